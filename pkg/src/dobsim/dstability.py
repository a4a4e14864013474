"""Parameter-space PD design against a pole-region constraint.

The admissible region is the intersection of a minimum decay rate sigma, a
damping cone of half-angle (theta - 90 deg) about the negative real axis,
and a bandwidth disk of radius R that applies to the dominant pole pair
only (the plant's fast poles sit far outside any sensible R and carry no
information about the dominant dynamics).
"""

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .lti import Polynomial

__all__ = [
    "DRegion",
    "GainGrid",
    "char_poly",
    "in_d_region",
    "feasible_map",
]


@dataclass(frozen=True)
class DRegion:
    sigma: float = 0.3        # minimum decay rate [1/s]
    theta_deg: float = 135.0  # damping cone angle from the positive real axis
    radius: float = 1.3       # dominant-pair bandwidth bound [rad/s]

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 90.0 < self.theta_deg <= 180.0:
            raise ValueError("theta must lie in (90, 180] degrees")
        if self.radius <= self.sigma:
            raise ValueError("radius must exceed sigma")


def char_poly(c, g):
    """Closed-loop characteristic polynomial den(C)den(G) + num(C)num(G), monic."""
    p = c.den * g.den + c.num * g.num
    expected = max(
        c.den.degree + g.den.degree,
        c.num.degree + g.num.degree,
    )
    if p.degree < expected or p.norm_inf() <= 1e-12 * (
        c.den.norm_inf() * g.den.norm_inf() + c.num.norm_inf() * g.num.norm_inf()
    ):
        raise ValueError("degenerate cancellation in the characteristic polynomial")
    return p.monic()


def in_d_region(pole, region, dominant=False):
    """Pole check: decay rate, damping cone, and (dominant only) radius."""
    re = pole.real
    im = abs(pole.imag)
    if re > -region.sigma:
        return False
    half_cone = math.radians(region.theta_deg - 90.0)
    if math.atan2(im, -re) > half_cone:
        return False
    if dominant and abs(pole) > region.radius:
        return False
    return True


@dataclass
class GainGrid:
    """Feasibility map over a (kp, kd) grid, with the dominant pole per cell."""

    kp_values: np.ndarray
    kd_values: np.ndarray
    feasible: np.ndarray   # bool, shape (len(kp), len(kd))
    dominant: np.ndarray   # complex, same shape
    region: DRegion

    def nearest_cell(self, kp, kd):
        i = int(np.argmin(np.abs(self.kp_values - kp)))
        j = int(np.argmin(np.abs(self.kd_values - kd)))
        return i, j

    def is_feasible_at(self, kp, kd):
        i, j = self.nearest_cell(kp, kd)
        return bool(self.feasible[i, j])

    def connected_component(self, kp, kd):
        """Mask of the 4-connected feasible component containing (kp, kd)."""
        i0, j0 = self.nearest_cell(kp, kd)
        mask = np.zeros_like(self.feasible)
        if not self.feasible[i0, j0]:
            return mask
        queue = deque([(i0, j0)])
        mask[i0, j0] = True
        ni, nj = self.feasible.shape
        while queue:
            i, j = queue.popleft()
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                a, b = i + di, j + dj
                if 0 <= a < ni and 0 <= b < nj and self.feasible[a, b] and not mask[a, b]:
                    mask[a, b] = True
                    queue.append((a, b))
        return mask

    def rows(self):
        """Yield (kp, kd, feasible, dominant_re, dominant_im) per cell."""
        for i, kp in enumerate(self.kp_values):
            for j, kd in enumerate(self.kd_values):
                dom = self.dominant[i, j]
                yield kp, kd, bool(self.feasible[i, j]), dom.real, dom.imag


def _batched_roots(coeff_rows):
    """Roots of many monic polynomials via stacked companion eigenvalues."""
    n = coeff_rows.shape[1] - 1
    comp = np.zeros((coeff_rows.shape[0], n, n))
    comp[:, 0, :] = -coeff_rows[:, 1:]
    idx = np.arange(n - 1)
    comp[:, idx + 1, idx] = 1.0
    return np.linalg.eigvals(comp)


def feasible_map(g_nom, kp_values, kd_values, region=DRegion()):
    """Scan a PD gain grid and mark the cells whose closed loop is admissible.

    Every root must satisfy the decay and damping constraints; the
    dominant root (smallest |Re|) must additionally satisfy the radius
    bound.  Cells whose root extraction fails are marked infeasible.
    """
    kp_values = np.asarray(kp_values, dtype=float)
    kd_values = np.asarray(kd_values, dtype=float)
    if kp_values.size < 1 or kd_values.size < 1:
        raise ValueError("gain grid must be non-degenerate")

    den = g_nom.den.monic().coeffs
    num = g_nom.num.coeffs / g_nom.den.coeffs[0]
    n = len(den) - 1
    base = den  # degree n, monic
    num_p = np.concatenate([np.zeros(n + 1 - len(num)), num])          # * kp
    num_d = np.concatenate([np.zeros(n - len(num)), num, [0.0]])       # * kd (s*num)

    kp_grid, kd_grid = np.meshgrid(kp_values, kd_values, indexing="ij")
    flat_kp = kp_grid.ravel()[:, None]
    flat_kd = kd_grid.ravel()[:, None]
    coeffs = base[None, :] + flat_kp * num_p[None, :] + flat_kd * num_d[None, :]

    feasible = np.zeros(coeffs.shape[0], dtype=bool)
    dominant = np.zeros(coeffs.shape[0], dtype=complex)
    try:
        roots = _batched_roots(coeffs)
        failed = None
    except np.linalg.LinAlgError:
        roots = np.zeros((coeffs.shape[0], n), dtype=complex)
        failed = np.zeros(coeffs.shape[0], dtype=bool)
        for k in range(coeffs.shape[0]):
            try:
                roots[k] = np.roots(coeffs[k])
            except Exception:
                failed[k] = True

    for k in range(coeffs.shape[0]):
        if failed is not None and failed[k]:
            continue
        rts = roots[k]
        dom = rts[np.argmin(np.abs(rts.real))]
        dominant[k] = dom if dom.imag >= 0 else np.conj(dom)
        ok = all(in_d_region(complex(p), region) for p in rts)
        feasible[k] = ok and in_d_region(complex(dom), region, dominant=True)

    shape = (len(kp_values), len(kd_values))
    return GainGrid(
        kp_values=kp_values,
        kd_values=kd_values,
        feasible=feasible.reshape(shape),
        dominant=dominant.reshape(shape),
        region=region,
    )
