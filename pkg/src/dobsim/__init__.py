"""Robust path-following control toolkit: disturbance-observer loops,
parameter-space PD design, small-gain robustness checks and batch
closed-loop simulation."""

from .controllers import (
    ARCHITECTURES,
    AssemblyError,
    ControlLoop,
    LoopConfig,
    LoopSingularityError,
    ObserverSignals,
    PDGains,
    QFilter,
    assemble_loop,
    cdob_response,
    dob_transfers,
    pd_tf,
    q_tf,
)
from .dstability import DRegion, GainGrid, char_poly, feasible_map, in_d_region
from .lti import (
    DelayLine,
    DivergenceError,
    FrequencyResponse,
    ImproperTransferFunctionError,
    PoleEvaluationError,
    Polynomial,
    StateSpaceModel,
    TransferFunction,
    delay_apply,
    feedback,
    poly_roots,
    rk4_step_matrices,
    simulate,
    sweep,
    tf_eval,
    tf_to_ss,
)
from .robustness import (
    StabilityReport,
    UncertaintyEnvelope,
    cdob_small_gain,
    default_omega_grid,
    delay_uncertainty_magnitude,
    delta_m_envelope,
    dob_small_gain,
)
from .scenarios import (
    Metrics,
    Scenario,
    SimTrace,
    VertexComparison,
    compare_vertices,
    curvature_ramp,
    export,
    rms,
    run_scenario,
    sine_signal,
    step_signal,
)
from .vehicle import (
    SingularModelError,
    UncertaintyBox,
    VehicleParams,
    build_plant,
    nominal_tf,
    plant_tf,
    vertices,
)

__version__ = "0.1.0"
