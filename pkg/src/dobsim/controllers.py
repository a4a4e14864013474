"""PD controller, Q filter, and the observer architectures.

Frequency-domain forms (pure PD) serve the analysis; the time-domain loop
graph realizes every block as a proper state-space system stepped at a
fixed rate.  Three observer layouts sit on top of the plain PD loop:

    PD_DOB   inner disturbance observer: u = u_new - (Q/Gn) y + Q u
    PD_CDOB  network-disturbance estimation d_hat = Q (u - Gn^-1 y) plus a
             delay-compensation branch adding Gn d_hat to the feedback
    PD_DDOB  inner CDOB (delay compensation) nested inside an outer DOB
             (model regulation) acting on the compensated feedback

Implementation notes the block algebra glosses over:

* Gn^-1 is improper; the observer corrections Q(u - Gn^-1 y) are factored
  through proper blocks as (Q/Gn)(Gn u - y), with Gn u produced by a
  dedicated model block.  The grouping matters in sampled time: it keeps
  the residual Gn u - y exactly zero for a matched delay-free plant, where
  the textbook split Q u - (Q/Gn) y leaves a first-order sampling skew
  that the biproper Q/Gn block amplifies at reference discontinuities.
* The nominal model carries two kinematic integrators.  Passed through
  them, any transient or bias in d_hat would accumulate into an unbounded
  feedback drift, so the compensation branch uses a limited-integrator
  copy of the model: 1/s^2 replaced by 1/(s + leak)^2.
* A known path-curvature command excites the measured deviation through
  exact kinematics (-V^2/s^2).  The network-disturbance estimator removes
  that response from the measurement (via the same discrete kinematics
  recursion the plant integrates, so the growing terms cancel at the
  input) before inverting the model; otherwise the commanded curve is
  estimated as a network disturbance and cancelled from the feedback,
  steering the vehicle off the path.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .lti import (
    DelayLine,
    DivergenceError,
    ImproperTransferFunctionError,
    TransferFunction,
    rk4_step_matrices,
    tf_eval,
    tf_to_ss,
)
from .vehicle import VehicleParams, build_plant, nominal_tf

__all__ = [
    "ARCHITECTURES",
    "PDGains",
    "QFilter",
    "LoopConfig",
    "ObserverSignals",
    "AssemblyError",
    "LoopSingularityError",
    "pd_tf",
    "q_tf",
    "dob_transfers",
    "cdob_response",
    "assemble_loop",
    "ControlLoop",
]

ARCHITECTURES = ("PD", "PD_DOB", "PD_CDOB", "PD_DDOB")


class AssemblyError(ValueError):
    """The requested loop graph cannot be realized."""


class LoopSingularityError(ArithmeticError):
    """Closed-loop evaluation hit a (near-)singular denominator."""


@dataclass(frozen=True)
class PDGains:
    """Proportional-derivative gains; tau_d filters the derivative term in
    simulation (the frequency-domain analysis uses the pure PD form)."""

    kp: float = 1.0596
    kd: float = 0.939
    tau_d: float = 0.125  # derivative filter time constant [s]

    def __post_init__(self):
        if self.kp <= 0:
            raise ValueError("kp must be positive")
        if self.kd < 0:
            raise ValueError("kd must be nonnegative")
        if self.tau_d <= 0:
            raise ValueError("tau_d must be positive")


@dataclass(frozen=True)
class QFilter:
    """Second-order unity-DC low-pass 1/(tau s + 1)^2 with tau = 1/cutoff."""

    cutoff: float  # [rad/s]

    def __post_init__(self):
        if self.cutoff <= 0:
            raise ValueError("cutoff must be positive")

    @property
    def tau(self):
        return 1.0 / self.cutoff


@dataclass(frozen=True)
class LoopConfig:
    """One closed-loop experiment: architecture, gains, filters, delay, plant.

    ``plant`` accepts VehicleParams (full parametric vehicle, both inputs),
    an explicit strictly-proper TransferFunction (steering channel only),
    or None for the default: the fixed design model driving the steering
    channel plus the exact curvature kinematics at the nominal speed.
    """

    architecture: str = "PD"
    gains: PDGains = field(default_factory=PDGains)
    q_dob: QFilter = QFilter(5.0)
    q_cdob: QFilter = QFilter(200.0)
    delay: float = 0.08  # actuation delay [s]
    plant: object = None
    comp_leak: float = 1.0  # limited-integrator corner [rad/s], CDOB branch

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(
                f"unknown architecture {self.architecture!r}; "
                f"expected one of {ARCHITECTURES}"
            )
        if self.delay < 0:
            raise ValueError("delay must be nonnegative")
        if self.comp_leak <= 0:
            raise ValueError("comp_leak must be positive")


@dataclass
class ObserverSignals:
    """Per-step records exposed by a finished run."""

    u: np.ndarray        # applied steering command [rad]
    u_new: np.ndarray    # raw controller output [rad]
    e: np.ndarray        # filtered extended-disturbance estimate, input units
    d_hat: np.ndarray    # estimated network disturbance [rad]


def pd_tf(gains, filtered=False):
    """PD controller: kp + kd s, or the realizable filtered form."""
    if filtered:
        # kp + kd s / (tau_d s + 1)
        return TransferFunction(
            [gains.kp * gains.tau_d + gains.kd, gains.kp], [gains.tau_d, 1.0]
        )
    return TransferFunction([gains.kd, gains.kp], [1.0])


def q_tf(q):
    """1/(tau s + 1)^2; unity DC gain, relative degree 2."""
    t = q.tau
    return TransferFunction([1.0], [t * t, 2.0 * t, 1.0])


def _check_q_over_gn(q_filter, g_nom):
    qtf = q_tf(q_filter) if isinstance(q_filter, QFilter) else q_filter
    if qtf.relative_degree < g_nom.relative_degree:
        raise ImproperTransferFunctionError(
            "Q/Gn is improper: the Q filter needs relative degree >= "
            f"{g_nom.relative_degree}"
        )
    return qtf


def dob_transfers(g, g_nom, q):
    """Model-regulation and disturbance-rejection transfer functions.

    regulation = Gn G / (G Q + Gn (1 - Q))
    rejection  = Gn (1 - Q) / (G Q + Gn (1 - Q))

    Both are returned over the common denominator as single rational
    functions, no cancellation.
    """
    qtf = _check_q_over_gn(q, g_nom)
    one_minus_q = qtf.den - qtf.num  # numerator of (1 - Q) over den(Q)
    common = g.num * qtf.num * g_nom.den + g_nom.num * one_minus_q * g.den
    scale = max(common.norm_inf(), 1e-300)
    if common.is_zero or common.norm_inf() <= 1e-12 * scale:
        raise ValueError("degenerate observer loop: common denominator vanished")
    regulation = TransferFunction(g_nom.num * g.num * qtf.den, common)
    rejection = TransferFunction(g_nom.num * one_minus_q * g.den, common)
    return regulation, rejection


def cdob_response(c, g_nom, q, delay, omega):
    """Closed-loop reference response of the delay-compensated loop at jw.

    Evaluates C Gn e^{-jwT} / (1 + C Gn Q + C Gn (1 - Q) e^{-jwT}).  The
    delay factor makes this non-rational, hence an evaluator rather than a
    TransferFunction.  Accepts a scalar frequency or an array.
    """
    if delay < 0:
        raise ValueError("delay must be nonnegative")
    qtf = q_tf(q) if isinstance(q, QFilter) else q
    w = np.asarray(omega, dtype=float)
    s = 1j * w
    cg = tf_eval(c, s) * tf_eval(g_nom, s)
    qv = tf_eval(qtf, s)
    shift = np.exp(-1j * w * delay)
    den = 1.0 + cg * qv + cg * (1.0 - qv) * shift
    if np.any(np.abs(den) < 1e-12):
        raise LoopSingularityError(
            "closed-loop denominator magnitude below 1e-12 on the grid"
        )
    out = cg * shift / den
    return complex(out) if np.isscalar(omega) else out


class _Block:
    """A realized SISO transfer function stepped with the exact RK4 map."""

    __slots__ = ("F", "G", "C", "D", "x")

    def __init__(self, tf, h):
        ss = tf_to_ss(tf)
        F, G = rk4_step_matrices(ss.A, ss.B, h)
        self.F = F
        self.G = G[:, 0]
        self.C = ss.C[0]
        self.D = float(ss.D[0, 0])
        self.x = np.zeros(ss.n_states)

    def out(self, u=0.0):
        return float(self.C @ self.x) + self.D * u

    def step(self, u):
        self.x = self.F @ self.x + self.G * u


class _SmoothInputBlock(_Block):
    """Block variant for smooth (non-staircase) internal signals.

    The observer residual Gn u - y is continuous between samples; holding
    it constant over a step injects sampling images that the estimator's
    high-frequency plateau folds back in band.  Trapezoidal integration of
    the current interval (state advanced through t_k before reading the
    output) suppresses them.
    """

    __slots__ = ("_last",)

    def __init__(self, tf, h):
        super().__init__(tf, h)
        self._last = 0.0

    def out_step(self, z):
        """Advance the state over [t_{k-1}, t_k] with the trapezoid of the
        two endpoint samples, then evaluate the output at t_k."""
        self.x = self.F @ self.x + self.G * (0.5 * (self._last + z))
        self._last = z
        return float(self.C @ self.x) + self.D * z


class _VehiclePlant:
    """Two-input parametric vehicle plant (steering, curvature)."""

    def __init__(self, params, h):
        ss = build_plant(params)
        F, G = rk4_step_matrices(ss.A, ss.B, h)
        self.F = F
        self.G_steer = G[:, 0]
        self.G_curv = G[:, 1]
        self.x = np.zeros(4)
        self.v_ms = params.v_ms
        self.has_curvature = True

    def out(self):
        return float(self.x[3])

    def dpsi(self):
        return float(self.x[2])

    def step(self, steer, curv):
        self.x = self.F @ self.x + self.G_steer * steer + self.G_curv * curv


class _CurvatureChain:
    """Exact lateral response -V^2/s^2 to a sampled curvature command.

    Matches the kinematic rows of the parametric plant's discrete update,
    so subtracting its output cancels the (polynomially growing) commanded
    path response instead of leaving a residual for high-gain blocks.
    """

    def __init__(self, v_ms, h):
        A = np.array([[0.0, 0.0], [1.0, 0.0]])
        B = np.array([[-v_ms * v_ms], [0.0]])
        F, G = rk4_step_matrices(A, B, h)
        self._F = F
        self._G = G[:, 0]
        self._z = np.zeros(2)

    def out(self):
        return float(self._z[1])

    def step(self, curv):
        self._z = self._F @ self._z + self._G * curv


class _DesignPlant:
    """Design-model steering channel plus exact curvature kinematics.

    The yaw-error decomposition is not available here, so dpsi reads zero.
    """

    def __init__(self, tf, v_ms, h):
        self._steer = _Block(tf, h)
        self._curv = _CurvatureChain(v_ms, h)
        self.v_ms = v_ms
        self.has_curvature = True

    def out(self):
        return self._steer.out() + self._curv.out()

    def dpsi(self):
        return 0.0

    def step(self, steer, curv):
        self._steer.step(steer)
        self._curv.step(curv)


class _TfPlant:
    """An explicit transfer-function plant; no curvature channel."""

    def __init__(self, tf, h):
        if tf.relative_degree < 1:
            raise AssemblyError(
                "explicit plant must be strictly proper; a biproper plant "
                "closes an algebraic loop through the controller"
            )
        self._block = _Block(tf, h)
        self.v_ms = None
        self.has_curvature = False

    def out(self):
        return self._block.out()

    def dpsi(self):
        return 0.0

    def step(self, steer, curv):
        self._block.step(steer)


def _limited_integrator_model(g_nom, leak):
    """Nominal model with 1/s^2 replaced by 1/(s + leak)^2.

    Requires the denominator to end in two exact zero coefficients (the
    kinematic integrators); the remaining fast factor is kept as-is.
    """
    den = g_nom.den.coeffs
    if len(den) < 3 or den[-1] != 0.0 or den[-2] != 0.0:
        raise AssemblyError(
            "nominal model must carry an exact s^2 denominator factor for "
            "the limited-integrator compensation branch"
        )
    fast = den[:-2]
    shifted = np.convolve(fast, [1.0, 2.0 * leak, leak * leak])
    return TransferFunction(g_nom.num, shifted), fast


class ControlLoop:
    """Step-executable closed loop; owns per-run state, single-run confined.

    Built by :func:`assemble_loop`.  ``run`` consumes equally long sampled
    reference, output-disturbance and curvature signals and returns the
    recorded trace arrays; observer signals land on ``self.signals``.
    """

    def __init__(self, cfg, h):
        if h <= 0:
            raise ValueError("step size must be positive")
        self.cfg = cfg
        self.h = h
        self.use_dob = cfg.architecture in ("PD_DOB", "PD_DDOB")
        self.use_cdob = cfg.architecture in ("PD_CDOB", "PD_DDOB")

        g_nom = nominal_tf()
        if cfg.plant is None:
            self.plant = _DesignPlant(g_nom, VehicleParams().v_ms, h)
        elif isinstance(cfg.plant, TransferFunction):
            self.plant = _TfPlant(cfg.plant, h)
        elif isinstance(cfg.plant, VehicleParams):
            self.plant = _VehiclePlant(cfg.plant, h)
        else:
            raise AssemblyError(
                f"plant must be VehicleParams, TransferFunction or None, "
                f"got {type(cfg.plant).__name__}"
            )

        self.pd = _Block(pd_tf(cfg.gains, filtered=True), h)
        self.delay = DelayLine(cfg.delay, h)

        if self.use_dob or self.use_cdob:
            # shared nominal response to the commanded steering
            self.model_u = _Block(g_nom, h)
        if self.use_dob:
            q = q_tf(cfg.q_dob)
            if q.relative_degree < 1:
                raise AssemblyError("Q filter must be strictly proper")
            _check_q_over_gn(q, g_nom)
            self.dob_est = _SmoothInputBlock(
                TransferFunction(q.num * g_nom.den, q.den * g_nom.num), h
            )
        if self.use_cdob:
            q = q_tf(cfg.q_cdob)
            if q.relative_degree < 1:
                raise AssemblyError("Q filter must be strictly proper")
            _check_q_over_gn(q, g_nom)
            self.cdob_est = _SmoothInputBlock(
                TransferFunction(q.num * g_nom.den, q.den * g_nom.num), h
            )
            comp_tf, _ = _limited_integrator_model(g_nom, cfg.comp_leak)
            self.comp = _Block(comp_tf, h)
            if self.plant.has_curvature:
                self.curv_model = _CurvatureChain(self.plant.v_ms, h)
            else:
                self.curv_model = None
        self.signals = None

    def run(self, reference, disturbance, curvature):
        r = np.asarray(reference, dtype=float)
        d = np.asarray(disturbance, dtype=float)
        rho = np.asarray(curvature, dtype=float)
        if not (len(r) == len(d) == len(rho)):
            raise ValueError("reference, disturbance and curvature lengths differ")
        if not self.plant.has_curvature and np.any(rho != 0.0):
            raise AssemblyError(
                "curvature input requires a plant with a curvature channel"
            )
        n = len(r)
        y = np.empty(n)
        dpsi = np.empty(n)
        delta_f = np.empty(n)
        u_new_rec = np.empty(n)
        u_rec = np.empty(n)
        d_hat_rec = np.empty(n)

        for k in range(n):
            y_meas = self.plant.out() + d[k]
            model_y = self.model_u.out() if (self.use_dob or self.use_cdob) else 0.0
            if self.use_cdob:
                # d_hat = Q (u - Gn^-1 y_steer), grouped as (Q/Gn)(Gn u - y_steer)
                # with the commanded-curvature response removed from y first
                y_steer = y_meas
                if self.curv_model is not None:
                    y_steer = y_meas - self.curv_model.out()
                d_hat = self.cdob_est.out_step(model_y - y_steer)
                y_fb = y_meas + self.comp.out()
            else:
                d_hat = 0.0
                y_fb = y_meas
            err = r[k] - y_fb
            u_new = self.pd.out(err)
            if self.use_dob:
                # u = u_new - (Q/Gn) y + Q u, grouped as u_new + (Q/Gn)(Gn u - y)
                u_cmd = u_new + self.dob_est.out_step(model_y - y_fb)
            else:
                u_cmd = u_new
            if not (math.isfinite(y_meas) and math.isfinite(u_cmd)):
                raise DivergenceError(k)
            applied = self.delay.push(u_cmd)

            y[k] = y_meas
            dpsi[k] = self.plant.dpsi()
            delta_f[k] = applied
            u_new_rec[k] = u_new
            u_rec[k] = u_cmd
            d_hat_rec[k] = d_hat

            self.plant.step(applied, rho[k])
            self.pd.step(err)
            if self.use_dob or self.use_cdob:
                self.model_u.step(u_cmd)
            if self.use_cdob:
                if self.curv_model is not None:
                    self.curv_model.step(rho[k])
                self.comp.step(d_hat)

        self.signals = ObserverSignals(
            u=u_rec, u_new=u_new_rec, e=u_new_rec - u_rec, d_hat=d_hat_rec
        )
        return {
            "y": y,
            "dpsi": dpsi,
            "delta_f": delta_f,
            "u_new": u_new_rec,
            "d_hat": d_hat_rec,
        }


def assemble_loop(cfg, h):
    """Validate a LoopConfig and build the executable simulation graph."""
    return ControlLoop(cfg, h)
