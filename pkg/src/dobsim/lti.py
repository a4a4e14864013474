"""Continuous-time LTI primitives.

Polynomials and rational transfer functions in the Laplace variable s,
state-space realization, fixed-step closed-form RK4 simulation, and exact
sample delay lines.  Everything is plain numpy; all values are immutable
after construction except :class:`DelayLine` and simulation state, which
must stay confined to a single run.
"""

import math

import numpy as np

__all__ = [
    "Polynomial",
    "TransferFunction",
    "StateSpaceModel",
    "DelayLine",
    "FrequencyResponse",
    "PoleEvaluationError",
    "ImproperTransferFunctionError",
    "DivergenceError",
    "poly_roots",
    "tf_eval",
    "feedback",
    "tf_to_ss",
    "rk4_step_matrices",
    "simulate",
    "delay_apply",
    "sweep",
]


class PoleEvaluationError(ArithmeticError):
    """Transfer function evaluated exactly at (or numerically on) a pole."""


class ImproperTransferFunctionError(ValueError):
    """Operation requires a proper (relative degree >= 0) transfer function."""


class DivergenceError(RuntimeError):
    """Simulation produced a non-finite value."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"state diverged (non-finite) at step {step}")


def _as_coeffs(values):
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("coefficients must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coefficients must be finite")
    return arr


class Polynomial:
    """Real polynomial with coefficients in descending powers of s.

    Exact leading zeros are stripped on construction; the zero polynomial
    is stored canonically as ``[0.0]``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        if isinstance(coeffs, Polynomial):
            arr = coeffs.coeffs.copy()
        else:
            arr = _as_coeffs(coeffs)
        nz = np.nonzero(arr)[0]
        arr = arr[nz[0]:].copy() if nz.size else np.zeros(1)
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return self.degree == 0 and self.coeffs[0] == 0.0

    def __call__(self, s):
        # Horner evaluation; works for real and complex scalars or arrays.
        return np.polyval(self.coeffs, s)

    def norm_inf(self):
        return float(np.max(np.abs(self.coeffs)))

    def _padded_pair(self, other):
        a, b = self.coeffs, Polynomial(other).coeffs
        n = max(len(a), len(b))
        pa = np.concatenate([np.zeros(n - len(a)), a])
        pb = np.concatenate([np.zeros(n - len(b)), b])
        return pa, pb

    def __add__(self, other):
        pa, pb = self._padded_pair(other)
        return Polynomial(pa + pb)

    def __sub__(self, other):
        pa, pb = self._padded_pair(other)
        return Polynomial(pa - pb)

    def __neg__(self):
        return Polynomial(-self.coeffs)

    def __mul__(self, other):
        if np.isscalar(other):
            return Polynomial(self.coeffs * float(other))
        other = Polynomial(other)
        if self.is_zero or other.is_zero:
            return Polynomial([0.0])
        return Polynomial(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def shifted(self, k):
        """Multiply by s**k (append k zero coefficients)."""
        if self.is_zero:
            return self
        return Polynomial(np.concatenate([self.coeffs, np.zeros(k)]))

    def monic(self):
        return Polynomial(self.coeffs / self.coeffs[0])

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)})"


def poly_roots(p):
    """All roots (with multiplicity) via companion-matrix eigenvalues."""
    p = Polynomial(p)
    if p.is_zero or p.degree < 1:
        raise ValueError("root finding needs degree >= 1 and a nonzero polynomial")
    return np.roots(p.coeffs)


class TransferFunction:
    """Rational function num(s)/den(s); no automatic pole-zero cancellation."""

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        num = Polynomial(num)
        den = Polynomial(den)
        if den.is_zero:
            raise ValueError("denominator must not be the zero polynomial")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("TransferFunction is immutable")

    @property
    def relative_degree(self):
        return self.den.degree - self.num.degree

    @property
    def is_proper(self):
        return self.relative_degree >= 0

    def __call__(self, s):
        return tf_eval(self, s)

    def poles(self):
        return poly_roots(self.den) if self.den.degree >= 1 else np.array([])

    def zeros(self):
        return poly_roots(self.num) if self.num.degree >= 1 else np.array([])

    def __mul__(self, other):
        if np.isscalar(other):
            return TransferFunction(self.num * float(other), self.den)
        other = _as_tf(other)
        return TransferFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __add__(self, other):
        other = _as_tf(other)
        return TransferFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __sub__(self, other):
        other = _as_tf(other)
        return TransferFunction(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def __neg__(self):
        return TransferFunction(-self.num, self.den)

    def minimal(self, tol=1e-6):
        """Diagnostic pole-zero cancellation with explicit tolerance.

        Pairs each zero with the nearest pole within ``tol`` (relative to
        1 + |pole|) and drops both.  Intended for inspection only; the
        algebra elsewhere never cancels implicitly.
        """
        if self.num.is_zero:
            return TransferFunction([0.0], [1.0])
        zs = list(self.zeros())
        ps = list(self.poles())
        kept_z = []
        for z in zs:
            hit = None
            for i, p in enumerate(ps):
                if abs(z - p) <= tol * (1.0 + abs(p)):
                    hit = i
                    break
            if hit is None:
                kept_z.append(z)
            else:
                ps.pop(hit)
        gain = self.num.coeffs[0] / self.den.coeffs[0]
        num = gain * Polynomial(np.real(np.poly(kept_z)) if kept_z else [1.0])
        den = Polynomial(np.real(np.poly(ps)) if ps else [1.0])
        return TransferFunction(num, den)

    def __repr__(self):
        return f"TransferFunction({list(self.num.coeffs)}, {list(self.den.coeffs)})"


def _as_tf(value):
    if isinstance(value, TransferFunction):
        return value
    if np.isscalar(value):
        return TransferFunction([float(value)], [1.0])
    raise TypeError(f"cannot interpret {value!r} as a transfer function")


def tf_eval(g, s):
    """Evaluate num(s)/den(s) by nested (Horner) evaluation.

    Raises PoleEvaluationError when s sits exactly on a pole (zero
    denominator) or the quotient overflows.
    """
    den_v = g.den(s)
    if np.isscalar(s) or np.ndim(s) == 0:
        if den_v == 0:
            raise PoleEvaluationError(f"evaluation at a pole: den({s}) = 0")
        val = g.num(s) / den_v
        if not np.isfinite(val.real) or not np.isfinite(val.imag):
            raise PoleEvaluationError(f"non-finite evaluation at s = {s}")
        return complex(val)
    den_v = np.asarray(den_v)
    if np.any(den_v == 0):
        bad = np.asarray(s)[den_v == 0]
        raise PoleEvaluationError(f"evaluation at a pole: den zero at s = {bad[0]}")
    return np.asarray(g.num(s)) / den_v


def feedback(forward, feedback_path=None):
    """Close the loop: forward / (1 + forward * feedback_path).

    Returns a single rational function without cancelling common factors.
    ``feedback_path=None`` means unity feedback.
    """
    fwd = _as_tf(forward)
    fb = _as_tf(1.0) if feedback_path is None else _as_tf(feedback_path)
    num = fwd.num * fb.den
    den = fwd.den * fb.den + fwd.num * fb.num
    scale = max(den.norm_inf(), num.norm_inf(), 1e-300)
    if den.is_zero or den.norm_inf() <= 1e-12 * scale:
        raise ValueError("degenerate feedback loop: denominator is identically zero")
    return TransferFunction(num, den)


class StateSpaceModel:
    """Matrix quadruple (A, B, C, D) with consistent dimensions."""

    __slots__ = ("A", "B", "C", "D")

    def __init__(self, A, B, C, D):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        C = np.atleast_2d(np.asarray(C, dtype=float))
        D = np.atleast_2d(np.asarray(D, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("A must be square")
        if B.shape[0] != n or C.shape[1] != n:
            raise ValueError("B/C dimensions inconsistent with A")
        if D.shape != (C.shape[0], B.shape[1]):
            raise ValueError("D dimensions inconsistent with B and C")
        for name, mat in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(mat)):
                raise ValueError(f"{name} must be finite")
            mat.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    def __setattr__(self, name, value):
        raise AttributeError("StateSpaceModel is immutable")

    @property
    def n_states(self):
        return self.A.shape[0]

    @property
    def n_inputs(self):
        return self.B.shape[1]

    @property
    def n_outputs(self):
        return self.C.shape[0]

    def eval(self, s):
        """Frequency response C (sI - A)^-1 B + D at a single complex s."""
        n = self.n_states
        if n == 0:
            return self.D.astype(complex)
        x = np.linalg.solve(s * np.eye(n) - self.A, self.B.astype(complex))
        return self.C @ x + self.D

    def poles(self):
        if self.n_states == 0:
            return np.array([])
        return np.linalg.eigvals(self.A)


def tf_to_ss(g):
    """Controllable-canonical realization of a proper transfer function.

    D is nonzero only for relative degree 0 (biproper) systems.
    """
    if not g.is_proper:
        raise ImproperTransferFunctionError(
            f"cannot realize improper transfer function (relative degree "
            f"{g.relative_degree})"
        )
    den = g.den.coeffs
    num = g.num.coeffs / den[0]
    den = den / den[0]
    n = len(den) - 1
    b = np.concatenate([np.zeros(n + 1 - len(num)), num])  # length n + 1
    d = b[0]
    if n == 0:
        return StateSpaceModel(
            np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[d]]
        )
    A = np.zeros((n, n))
    A[0, :] = -den[1:]
    A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    C = (b[1:] - d * den[1:]).reshape(1, n)
    return StateSpaceModel(A, B, C, [[d]])


def rk4_step_matrices(A, B, h):
    """One-step propagator of the classic explicit RK4 scheme for a held input.

    For x' = A x + B u with u constant over the step, RK4 collapses to the
    exact affine update x+ = F x + G u with the 4th-order Taylor matrices
    below.  Precomputing them makes every step a single mat-vec.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0)), np.zeros((0, B.shape[1]))
    eye = np.eye(n)
    hA = h * A
    hA2 = hA @ hA
    hA3 = hA2 @ hA
    hA4 = hA3 @ hA
    F = eye + hA + hA2 / 2.0 + hA3 / 6.0 + hA4 / 24.0
    G = (h * eye + h * hA / 2.0 + h * hA2 / 6.0 + h * hA3 / 24.0) @ B
    return F, G


def simulate(model, u, h):
    """Fixed-step RK4 simulation from x(0) = 0 with zero-order-hold input.

    Parameters
    ----------
    model : StateSpaceModel
    u : array, shape (N,) for single-input models or (N, m)
    h : step size [s], > 0

    Returns the sampled output, shape (N,) when the model has one output.
    Raises DivergenceError (with the step index) if the output goes
    non-finite.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.ndim != 2 or u.shape[0] < 1:
        raise ValueError("input signal must have at least one sample")
    if u.shape[1] != model.n_inputs:
        raise ValueError(
            f"input has {u.shape[1]} channels, model expects {model.n_inputs}"
        )
    n_steps = u.shape[0]
    F, G = rk4_step_matrices(model.A, model.B, h)
    C, D = model.C, model.D
    x = np.zeros(model.n_states)
    y = np.empty((n_steps, model.n_outputs))
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_steps):
            yk = C @ x + D @ u[k]
            if not np.all(np.isfinite(yk)):
                raise DivergenceError(k)
            y[k] = yk
            x = F @ x + G @ u[k]
    return y[:, 0] if model.n_outputs == 1 else y


# Delay rounding: nearest number of steps with ties rounding up.  The small
# epsilon absorbs binary representation noise in delay/step so that e.g.
# 0.0805/0.001 lands on 81 regardless of the last-bit direction.
_ROUND_EPS = 1e-9


class DelayLine:
    """Pure transport delay of a sampled signal, exact in whole steps.

    N = round(delay/step) with ties rounding up; output[k] = input[k - N]
    and zero for k < N.
    """

    def __init__(self, delay_seconds, step_seconds):
        if delay_seconds < 0:
            raise ValueError("delay must be nonnegative")
        if step_seconds <= 0:
            raise ValueError("step must be positive")
        self.delay_seconds = float(delay_seconds)
        self.step_seconds = float(step_seconds)
        self.steps = int(math.floor(delay_seconds / step_seconds + 0.5 + _ROUND_EPS))
        self.reset()

    def reset(self):
        self._buffer = np.zeros(self.steps)
        self._idx = 0

    def push(self, value):
        """Feed one sample, get the sample from `steps` pushes ago."""
        if self.steps == 0:
            return value
        out = self._buffer[self._idx]
        self._buffer[self._idx] = value
        self._idx = (self._idx + 1) % self.steps
        return out


def delay_apply(line, samples):
    """Shift a whole signal by the line's step count, zero-padded head.

    Pure function of the input signal; does not touch the line's running
    buffer state.
    """
    samples = np.asarray(samples, dtype=float)
    n = line.steps
    if n == 0:
        return samples.copy()
    out = np.zeros_like(samples)
    if n < len(samples):
        out[n:] = samples[:-n]
    return out


class FrequencyResponse:
    """Complex response samples on a strictly increasing positive grid."""

    __slots__ = ("omega", "values")

    def __init__(self, omega, values):
        omega = np.asarray(omega, dtype=float)
        values = np.asarray(values, dtype=complex)
        if omega.ndim != 1 or omega.shape != values.shape:
            raise ValueError("omega and values must be 1-D arrays of equal length")
        if np.any(omega <= 0):
            raise ValueError("all frequencies must be positive")
        if np.any(np.diff(omega) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        omega = omega.copy()
        values = values.copy()
        omega.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("FrequencyResponse is immutable")

    def magnitude(self):
        return np.abs(self.values)


def sweep(system, omega):
    """Frequency response of a TransferFunction or evaluator over a grid."""
    omega = np.asarray(omega, dtype=float)
    if isinstance(system, TransferFunction):
        values = tf_eval(system, 1j * omega)
    else:
        values = np.array([system(1j * w) for w in omega], dtype=complex)
    return FrequencyResponse(omega, values)
