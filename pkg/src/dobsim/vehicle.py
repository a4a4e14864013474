"""Single-track path-error plant and the fixed design model.

The plant states are [beta, r, dpsi, y]:

    beta  side slip [rad]
    r     yaw rate [rad/s]
    dpsi  yaw orientation error to the path [rad]
    y     lateral deviation [m]

Inputs are front steering delta_f [rad] and path curvature rho_ref [1/m];
the output selector is [0 0 0 1] (lateral deviation).  Road friction mu is
folded in by scaling both mass and yaw inertia by 1/mu, so the virtual
mass m/mu is the lumped uncertain parameter alongside speed.
"""

from dataclasses import dataclass, replace

import numpy as np

from .lti import Polynomial, StateSpaceModel, TransferFunction

__all__ = [
    "KMH_TO_MS",
    "VehicleParams",
    "UncertaintyBox",
    "SingularModelError",
    "build_plant",
    "plant_tf",
    "nominal_tf",
    "vertices",
]

KMH_TO_MS = 1.0 / 3.6

# Reference-vehicle defaults.
DEFAULT_MASS = 2000.0        # [kg]
DEFAULT_YAW_INERTIA = 3728.0  # [kg m^2]
DEFAULT_LF = 1.3008          # CG to front axle [m]
DEFAULT_LR = 1.5453          # CG to rear axle [m]
DEFAULT_CF = 195000.0        # front cornering stiffness [N/rad]
DEFAULT_CR = 50000.0         # rear cornering stiffness [N/rad]
DEFAULT_SPEED_KMH = 5.0      # [km/h]
DEFAULT_MU = 1.0             # road friction [-]


class SingularModelError(ValueError):
    """The lateral model is singular (undefined) at zero speed."""


@dataclass(frozen=True)
class VehicleParams:
    """Physical parameters; speed is stored in km/h and converted internally."""

    m: float = DEFAULT_MASS
    J: float = DEFAULT_YAW_INERTIA
    lf: float = DEFAULT_LF
    lr: float = DEFAULT_LR
    cf: float = DEFAULT_CF
    cr: float = DEFAULT_CR
    v_kmh: float = DEFAULT_SPEED_KMH
    mu: float = DEFAULT_MU

    def __post_init__(self):
        if self.v_kmh <= 0:
            raise SingularModelError("speed must be positive (model singular at V=0)")
        for name in ("m", "J", "lf", "lr", "cf", "cr"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.mu <= 1:
            raise ValueError("mu must lie in (0, 1]")

    @property
    def v_ms(self):
        return self.v_kmh * KMH_TO_MS

    @property
    def virtual_mass(self):
        return self.m / self.mu


@dataclass(frozen=True)
class UncertaintyBox:
    """Operating region in speed [km/h] and virtual mass [kg]."""

    v_range: tuple = (4.0, 7.0)
    m_virtual_range: tuple = (1600.0, 5000.0)
    nominal: VehicleParams = VehicleParams()

    def __post_init__(self):
        v_lo, v_hi = self.v_range
        m_lo, m_hi = self.m_virtual_range
        # lo == hi collapses the box onto a single operating point
        if v_lo > v_hi or m_lo > m_hi:
            raise ValueError("ranges must satisfy lo <= hi")
        if not v_lo <= self.nominal.v_kmh <= v_hi:
            raise ValueError("nominal speed must lie inside the box")
        if not m_lo <= self.nominal.virtual_mass <= m_hi:
            raise ValueError("nominal virtual mass must lie inside the box")


def _lateral_coefficients(p):
    """A-matrix entries of the side-slip / yaw-rate subsystem plus B column."""
    v = p.v_ms
    m_eff = p.m / p.mu
    j_eff = p.J / p.mu
    cross = p.cr * p.lr - p.cf * p.lf
    a11 = -(p.cf + p.cr) / (m_eff * v)
    a12 = cross / (m_eff * v * v) - 1.0
    a21 = cross / j_eff
    a22 = -(p.cf * p.lf**2 + p.cr * p.lr**2) / (j_eff * v)
    b1 = p.cf / (m_eff * v)
    b2 = p.cf * p.lf / j_eff
    return a11, a12, a21, a22, b1, b2


def build_plant(p):
    """4-state path-following model with inputs [delta_f, rho_ref], output y.

    The two kinematic rows (dpsi, y) contribute exactly two poles at the
    origin; the side-slip/yaw-rate pair is strictly stable.  Curvature
    enters only the dpsi row, with coefficient -V.
    """
    if p.v_kmh <= 0:
        raise SingularModelError("speed must be positive (model singular at V=0)")
    v = p.v_ms
    a11, a12, a21, a22, b1, b2 = _lateral_coefficients(p)
    A = [
        [a11, a12, 0.0, 0.0],
        [a21, a22, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [v, 0.0, v, 0.0],
    ]
    B = [
        [b1, 0.0],
        [b2, 0.0],
        [0.0, -v],
        [0.0, 0.0],
    ]
    C = [[0.0, 0.0, 0.0, 1.0]]
    D = [[0.0, 0.0]]
    return StateSpaceModel(A, B, C, D)


def plant_tf(p):
    """Steering-to-lateral-deviation transfer function.

    Assembled analytically from the 2x2 lateral subsystem so that the
    denominator carries the s^2 factor of the kinematic integrators with
    exact zero trailing coefficients:

        y/delta_f = V (s*n_beta(s) + n_r(s)) / (s^2 * den2(s))
    """
    v = p.v_ms
    a11, a12, a21, a22, b1, b2 = _lateral_coefficients(p)
    n_beta = Polynomial([b1, -b1 * a22 + a12 * b2])
    n_r = Polynomial([b2, -b2 * a11 + a21 * b1])
    num = v * (n_beta.shifted(1) + n_r)
    den2 = Polynomial([1.0, -(a11 + a22), a11 * a22 - a12 * a21])
    den = den2.shifted(2)
    return TransferFunction(num, den)


def nominal_tf():
    """The fixed quartic design model used by every observer and controller.

    Two poles at the origin, two fast stable poles; relative degree 2, so a
    second-order Q filter keeps Q/Gn proper.
    """
    num = [227.6, 8.479e4, 3.627e4]
    den = [1.0, 459.2, 3.329e4, 0.0, 0.0]
    return TransferFunction(num, den)


def vertices(box):
    """The four corner parameter sets of the box, in fixed (a, b, c, d) order:

        (v_lo, m_lo), (v_hi, m_lo), (v_lo, m_hi), (v_hi, m_hi)

    Virtual mass targets at or below the nominal mass are realized with
    mu = 1 and m set to the target; larger targets keep the nominal mass
    and derive mu = m / m_target.
    """
    v_lo, v_hi = box.v_range
    m_lo, m_hi = box.m_virtual_range
    corners = [(v_lo, m_lo), (v_hi, m_lo), (v_lo, m_hi), (v_hi, m_hi)]
    out = []
    for v, m_virtual in corners:
        if m_virtual <= box.nominal.m:
            m, mu = m_virtual, 1.0
        else:
            m, mu = box.nominal.m, box.nominal.m / m_virtual
        out.append(replace(box.nominal, m=m, mu=mu, v_kmh=v))
    return out
