"""Frequency-domain robust-stability checks.

Two separate small-gain tests, matching how the design analysis treats the
two uncertainty sources:

* parametric spread over the operating box, folded into a multiplicative
  envelope and tested against the observer's Q filter: |Q| < 1/env;
* the actuation delay as unmodeled dynamics, dm = e^{-jwT} - 1, tested
  against the delay-compensated nominal loop Ln = C(1-Q)Gn e^{-jwT} /
  (1 + C Gn Q) via |Ln/(1+Ln)| < 1/|dm|.

The tests are sampled on a frequency grid (400 log-spaced points over
[1e-2, 1e4] rad/s by default), so reported margins are grid-resolution
statements, not continuous certificates.  A margin within 1e-9 dB of zero
counts as a fail.
"""

from dataclasses import dataclass, field

import numpy as np

from .controllers import q_tf, QFilter
from .lti import tf_eval
from .vehicle import plant_tf, vertices

__all__ = [
    "default_omega_grid",
    "UncertaintyEnvelope",
    "StabilityReport",
    "delta_m_envelope",
    "delay_uncertainty_magnitude",
    "dob_small_gain",
    "cdob_small_gain",
]

_TIE_DB = 1e-9


def default_omega_grid(points=400, lo=1e-2, hi=1e4):
    return np.logspace(np.log10(lo), np.log10(hi), points)


@dataclass(frozen=True)
class UncertaintyEnvelope:
    """Pointwise max of |G_vertex/G_ref - 1| over the box vertices."""

    omega: np.ndarray
    magnitude: np.ndarray
    vertex_magnitudes: np.ndarray  # shape (n_vertices, len(omega))


@dataclass(frozen=True)
class StabilityReport:
    passed: bool
    margin_db: float
    critical_omega: float
    omega: np.ndarray
    test_values: np.ndarray
    bounds: np.ndarray
    note: str = ""
    uncertainty_magnitude: np.ndarray = field(default=None, repr=False)


def delta_m_envelope(box, omega, reference=None):
    """Multiplicative-uncertainty envelope of the four box vertices.

    ``reference`` is the model the perturbation is measured against; by
    default the parametric plant at the box's own nominal point.  Pass the
    fixed design model when the envelope feeds the observer small-gain
    test, since that is the model the observer inverts.
    """
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 1 or np.any(omega <= 0) or np.any(np.diff(omega) <= 0):
        raise ValueError("omega grid must be 1-D, positive, strictly increasing")
    ref = plant_tf(box.nominal) if reference is None else reference
    ref_vals = tf_eval(ref, 1j * omega)
    rows = []
    for v in vertices(box):
        vals = tf_eval(plant_tf(v), 1j * omega)
        rows.append(np.abs(vals / ref_vals - 1.0))
    rows = np.array(rows)
    return UncertaintyEnvelope(
        omega=omega, magnitude=rows.max(axis=0), vertex_magnitudes=rows
    )


def _finish(omega, test, bound, note="", dm=None):
    with np.errstate(divide="ignore"):
        margin = 20.0 * np.log10(bound) - 20.0 * np.log10(test)
    finite = np.isfinite(margin)
    if not np.any(finite):
        return StabilityReport(
            passed=True, margin_db=np.inf, critical_omega=np.nan,
            omega=omega, test_values=test, bounds=bound, note=note,
            uncertainty_magnitude=dm,
        )
    i = int(np.argmin(np.where(finite, margin, np.inf)))
    worst = float(margin[i])
    return StabilityReport(
        passed=bool(worst > _TIE_DB),
        margin_db=worst,
        critical_omega=float(omega[i]),
        omega=omega,
        test_values=test,
        bounds=bound,
        note=note,
        uncertainty_magnitude=dm,
    )


def dob_small_gain(q, envelope):
    """Check |Q(jw)| < 1/env(w) at every grid point; margin in dB.

    Grid points where the envelope is zero impose no constraint (infinite
    bound).
    """
    qtf = q_tf(q) if isinstance(q, QFilter) else q
    omega = envelope.omega
    test = np.abs(tf_eval(qtf, 1j * omega))
    env = envelope.magnitude
    bound = np.where(env > 0.0, 1.0 / np.where(env > 0.0, env, 1.0), np.inf)
    return _finish(omega, test, bound)


def delay_uncertainty_magnitude(omega, delay):
    """|e^{-jwT} - 1| computed from the complex exponential."""
    return np.abs(np.exp(-1j * np.asarray(omega, dtype=float) * delay) - 1.0)


def cdob_small_gain(c, g_nom, q, delay, omega):
    """Delay-uncertainty small-gain check of the compensated loop.

    Tests |Ln/(1+Ln)| < 1/|dm| with Ln = C(1-Q)Gn e^{-jwT}/(1 + C Gn Q)
    and dm = e^{-jwT} - 1.  Fails immediately (nominal instability) if
    |1 + Ln| collapses below 1e-12 anywhere on the grid.
    """
    if delay < 0:
        raise ValueError("delay must be nonnegative")
    qtf = q_tf(q) if isinstance(q, QFilter) else q
    omega = np.asarray(omega, dtype=float)
    s = 1j * omega
    cg = tf_eval(c, s) * tf_eval(g_nom, s)
    qv = tf_eval(qtf, s)
    shift = np.exp(-1j * omega * delay)
    ln = cg * (1.0 - qv) * shift / (1.0 + cg * qv)
    one_plus = 1.0 + ln
    dm = delay_uncertainty_magnitude(omega, delay)
    bad = np.abs(one_plus) < 1e-12
    if np.any(bad):
        w_bad = float(omega[np.argmax(bad)])
        return StabilityReport(
            passed=False,
            margin_db=-np.inf,
            critical_omega=w_bad,
            omega=omega,
            test_values=np.abs(ln),
            bounds=np.where(dm > 0, 1.0 / np.where(dm > 0, dm, 1.0), np.inf),
            note=f"nominal instability: |1 + Ln| < 1e-12 at omega = {w_bad:g}",
            uncertainty_magnitude=dm,
        )
    test = np.abs(ln / one_plus)
    bound = np.where(dm > 0.0, 1.0 / np.where(dm > 0.0, dm, 1.0), np.inf)
    return _finish(omega, test, bound, dm=dm)
