"""Batch time-domain experiments: scenarios, metrics, comparisons, export.

The default scenario holds the test path fixed across all architecture
comparisons: straight running, a ramp into a steady 0.05 1/m curve between
t = 5 s and 7 s, and a 0.1 m path-offset command at t = 30 s that
exercises the loop's transient band.  Error metrics are computed on the
tracking error y - r; steering effort on the applied front-wheel angle.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .controllers import LoopConfig, assemble_loop
from .vehicle import UncertaintyBox, vertices

__all__ = [
    "Scenario",
    "SimTrace",
    "Metrics",
    "VertexComparison",
    "TRACE_COLUMNS",
    "curvature_ramp",
    "step_signal",
    "sine_signal",
    "run_scenario",
    "rms",
    "compare_vertices",
    "export",
]

TRACE_COLUMNS = ("t", "y", "dpsi", "delta_f", "u_new", "d_hat", "r")


def curvature_ramp(start=5.0, ramp=2.0, level=0.05):
    """Curvature profile: zero, linear ramp over `ramp` seconds, then hold."""
    def profile(t):
        return level * np.clip((t - start) / ramp, 0.0, 1.0)
    return profile


def step_signal(at, size):
    """Step of the given size switching on at time `at`."""
    def profile(t):
        return np.where(t >= at, size, 0.0)
    return profile


def sine_signal(amplitude, omega, start=0.0):
    """Sinusoid amplitude*sin(omega*(t-start)) active from `start`."""
    def profile(t):
        return np.where(t >= start, amplitude * np.sin(omega * (t - start)), 0.0)
    return profile


def _zeros(t):
    return np.zeros_like(t)


@dataclass(frozen=True)
class Scenario:
    """A closed-loop experiment: loop config, horizon, and input profiles.

    Profiles are callables mapping a time array to a sampled signal; None
    means identically zero.  duration/step must come out to a whole number
    of steps.
    """

    loop: LoopConfig = field(default_factory=LoopConfig)
    duration: float = 60.0
    step: float = 1e-3
    curvature: object = field(default_factory=curvature_ramp)
    disturbance: object = None
    reference: object = field(default_factory=lambda: step_signal(30.0, 0.1))

    def __post_init__(self):
        if self.duration <= 0 or self.step <= 0:
            raise ValueError("duration and step must be positive")
        n = round(self.duration / self.step)
        if n < 1 or abs(n * self.step - self.duration) > 1e-9 * self.duration:
            raise ValueError("duration must be a whole number of steps")

    @property
    def n_samples(self):
        return round(self.duration / self.step) + 1

    def time(self):
        return np.arange(self.n_samples) * self.step

    def sample(self, profile, t):
        if profile is None:
            return np.zeros_like(t)
        return np.asarray(profile(t), dtype=float)


@dataclass(frozen=True)
class SimTrace:
    """Uniformly sampled closed-loop signals."""

    t: np.ndarray
    y: np.ndarray        # lateral deviation [m]
    dpsi: np.ndarray     # yaw error to path [rad]
    delta_f: np.ndarray  # applied steering [rad]
    u_new: np.ndarray    # raw controller output [rad]
    d_hat: np.ndarray    # estimated network disturbance [rad]
    r: np.ndarray        # reference [m]

    def columns(self):
        return [getattr(self, name) for name in TRACE_COLUMNS]

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class Metrics:
    """Scalar scores of one run; error metrics are on y - r."""

    rms_y: float    # RMS tracking error [m]
    peak_y: float   # peak |tracking error| [m]
    rms_steer: float  # RMS applied steering [rad]
    ise_y: float    # integral of squared error [m^2 s]


def rms(series):
    """Root mean square with uniform sample weighting."""
    arr = np.asarray(series, dtype=float)
    if arr.size == 0:
        raise ValueError("rms of an empty series")
    return float(np.sqrt(np.mean(arr * arr)))


def run_scenario(scenario):
    """Execute one scenario; returns (SimTrace, Metrics), deterministic."""
    t = scenario.time()
    r = scenario.sample(scenario.reference, t)
    d = scenario.sample(scenario.disturbance, t)
    rho = scenario.sample(scenario.curvature, t)
    loop = assemble_loop(scenario.loop, scenario.step)
    out = loop.run(r, d, rho)
    trace = SimTrace(
        t=t,
        y=out["y"],
        dpsi=out["dpsi"],
        delta_f=out["delta_f"],
        u_new=out["u_new"],
        d_hat=out["d_hat"],
        r=r,
    )
    err = trace.y - trace.r
    metrics = Metrics(
        rms_y=rms(err),
        peak_y=float(np.max(np.abs(err))),
        rms_steer=rms(trace.delta_f),
        ise_y=float(np.sum(err * err) * scenario.step),
    )
    return trace, metrics


_VERTEX_LABELS = ("a", "b", "c", "d")


@dataclass(frozen=True)
class VertexComparison:
    """RMS tracking error of two architectures across the box vertices."""

    labels: tuple            # vertex descriptions
    architectures: tuple     # row names, e.g. ("PD", "PD_DOB")
    rms_y: np.ndarray        # shape (2, 4)
    reduction_pct: np.ndarray  # shape (4,)

    def rows(self):
        for j, label in enumerate(self.labels):
            yield (
                label,
                self.rms_y[0, j],
                self.rms_y[1, j],
                self.reduction_pct[j],
            )


def compare_vertices(base=None, box=None, architectures=("PD", "PD_DOB")):
    """Run two architectures over the four box vertices; delay forced to 0.

    The baseline/observer comparison at the corners is a no-delay
    experiment; everything else (path, gains, filters) comes from `base`.
    """
    if base is None:
        base = Scenario()
    if box is None:
        box = UncertaintyBox()
    verts = vertices(box)
    labels = tuple(
        f"{v.v_kmh:g}km/h {v.virtual_mass:g}kg ({name})"
        for name, v in zip(_VERTEX_LABELS, verts)
    )
    table = np.zeros((len(architectures), len(verts)))
    for i, arch in enumerate(architectures):
        for j, v in enumerate(verts):
            cfg = replace(base.loop, architecture=arch, plant=v, delay=0.0)
            _, metrics = run_scenario(replace(base, loop=cfg))
            table[i, j] = metrics.rms_y
    reduction = 100.0 * (1.0 - table[1] / table[0])
    return VertexComparison(
        labels=labels,
        architectures=tuple(architectures),
        rms_y=table,
        reduction_pct=reduction,
    )


def _write_trace_csv(trace, path):
    with open(path, "w") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        cols = trace.columns()
        for k in range(len(trace)):
            fh.write(",".join(repr(float(col[k])) for col in cols) + "\n")


def _write_table_csv(table, path):
    with open(path, "w") as fh:
        fh.write(
            "vertex,rms_y_%s,rms_y_%s,reduction_pct\n" % table.architectures
        )
        for label, base_rms, obs_rms, red in table.rows():
            fh.write(f"{label},{base_rms!r},{obs_rms!r},{red!r}\n")


def export(obj, fmt, path):
    """Write a trace or comparison table as CSV, or render it as SVG.

    CSV floats use repr, so a re-parsed file reproduces the trace
    bit-exactly.  SVG rendering goes through the report module.
    """
    if fmt == "csv":
        if isinstance(obj, SimTrace):
            _write_trace_csv(obj, path)
        elif isinstance(obj, VertexComparison):
            _write_table_csv(obj, path)
        else:
            raise TypeError(f"cannot export {type(obj).__name__} as CSV")
    elif fmt == "svg":
        from . import report

        if isinstance(obj, SimTrace):
            report.save_trace_figure(obj, path)
        elif isinstance(obj, VertexComparison):
            report.save_table_figure(obj, path)
        else:
            raise TypeError(f"cannot export {type(obj).__name__} as SVG")
    else:
        raise ValueError(f"unknown export format {fmt!r} (use csv or svg)")


def read_trace_csv(path):
    """Parse a trace CSV written by export(); exact float round-trip."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header in {path}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array([[float(v) for v in row] for row in rows]).reshape(
        len(rows), len(TRACE_COLUMNS)
    )
    return SimTrace(*(data[:, i] for i in range(len(TRACE_COLUMNS))))
