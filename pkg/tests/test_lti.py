import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dobsim.lti import (
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
    simulate,
    sweep,
    tf_eval,
    tf_to_ss,
)


def rel_coeff_diff(p, q):
    a, b = np.asarray(p, float), np.asarray(q, float)
    n = max(len(a), len(b))
    a = np.concatenate([np.zeros(n - len(a)), a])
    b = np.concatenate([np.zeros(n - len(b)), b])
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return np.max(np.abs(a - b)) / scale


class TestPolynomial:
    def test_leading_zeros_stripped(self):
        p = Polynomial([0.0, 0.0, 2.0, 1.0])
        assert p.degree == 1
        assert list(p.coeffs) == [2.0, 1.0]

    def test_zero_polynomial_canonical(self):
        p = Polynomial([0.0, 0.0])
        assert p.is_zero
        assert list(p.coeffs) == [0.0]

    def test_arithmetic(self):
        p = Polynomial([1.0, 2.0])  # s + 2
        q = Polynomial([1.0, -2.0])  # s - 2
        assert list((p * q).coeffs) == [1.0, 0.0, -4.0]
        assert list((p + q).coeffs) == [2.0, 0.0]
        assert (p - p).is_zero

    def test_evaluation_is_horner(self):
        p = Polynomial([2.0, -3.0, 1.0])
        s = 1.5 + 0.5j
        assert p(s) == ((2.0 * s - 3.0) * s + 1.0)

    def test_immutability(self):
        p = Polynomial([1.0, 2.0])
        with pytest.raises(Exception):
            p.coeffs = np.array([1.0])
        with pytest.raises(ValueError):
            p.coeffs[0] = 5.0


class TestPolyRoots:
    def test_factorable_quadratic(self):
        roots = np.sort(poly_roots([1.0, 3.0, 2.0]))
        assert np.allclose(roots, [-2.0, -1.0], atol=1e-12)

    def test_repeated_origin_root(self):
        roots = poly_roots([1.0, 0.0, 0.0])
        assert np.allclose(roots, [0.0, 0.0], atol=1e-12)

    def test_quartic_with_double_integrator(self):
        # independent oracle: quadratic formula on s^2 + 459.2 s + 33290
        b, c = 459.2, 33290.0
        disc = math.sqrt(b * b - 4 * c)
        expected_fast = sorted([(-b + disc) / 2, (-b - disc) / 2])
        roots = np.sort_complex(poly_roots([1.0, 459.2, 33290.0, 0.0, 0.0]))
        fast = sorted(roots[:2].real)
        assert abs(fast[0] - expected_fast[0]) < 0.01
        assert abs(fast[1] - expected_fast[1]) < 0.01
        assert abs(fast[0] + 368.98) < 0.01
        assert abs(fast[1] + 90.22) < 0.01
        assert np.all(np.abs(roots[2:]) < 1e-8)

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            poly_roots([0.0])
        with pytest.raises(ValueError):
            poly_roots([3.0])

    @given(
        st.lists(
            st.floats(min_value=-1e3, max_value=1e3),
            min_size=2,
            max_size=7,
        ).filter(lambda c: abs(c[0]) > 1e-2)
    )
    @settings(max_examples=150, deadline=None)
    def test_root_residual_bound(self, coeffs):
        p = Polynomial(coeffs)
        roots = poly_roots(p)
        norm = p.norm_inf()
        for r in roots:
            bound = 1e-8 * (1.0 + norm) * (1.0 + abs(r)) ** p.degree
            assert abs(p(r)) <= bound


class TestTfEval:
    def test_first_order_at_j(self):
        g = TransferFunction([1.0], [1.0, 1.0])
        v = tf_eval(g, 1j)
        assert abs(v - (0.5 - 0.5j)) < 1e-15
        assert abs(abs(v) - 0.7071) < 1e-4

    def test_zero_at_origin(self):
        g = TransferFunction([1.0, 0.0], [1.0, 1.0])
        assert tf_eval(g, 0.0) == 0.0

    def test_pole_evaluation_raises(self):
        g = TransferFunction([1.0], [1.0, 0.0])
        with pytest.raises(PoleEvaluationError):
            tf_eval(g, 0.0)

    def test_dual_representation_oracle(self):
        # nominal design model at s = 5j against C (sI-A)^-1 B + D
        from dobsim.vehicle import nominal_tf

        g = nominal_tf()
        ss = tf_to_ss(g)
        direct = tf_eval(g, 5j)
        via_ss = complex(ss.eval(5j)[0, 0])
        assert abs(direct - via_ss) <= 1e-9 * abs(direct)

    def test_vectorized(self):
        g = TransferFunction([1.0], [1.0, 1.0])
        omega = np.array([0.5, 1.0, 2.0])
        vals = tf_eval(g, 1j * omega)
        assert vals.shape == (3,)
        assert abs(vals[1] - (0.5 - 0.5j)) < 1e-15


class TestFeedback:
    def test_integrator_unity_feedback(self):
        k = 3.5
        closed = feedback(TransferFunction([k], [1.0, 0.0]))
        assert rel_coeff_diff(closed.num.coeffs, [k]) == 0.0
        assert rel_coeff_diff(closed.den.coeffs, [1.0, k]) == 0.0

    def test_static_loop(self):
        closed = feedback(TransferFunction([1.0], [1.0]), TransferFunction([1.0], [1.0]))
        assert closed.num.coeffs[0] / closed.den.coeffs[0] == 0.5

    def test_denominator_matches_characteristic_polynomial(self):
        # cross-module identity with the gain-design module
        from dobsim.controllers import PDGains, pd_tf
        from dobsim.dstability import char_poly
        from dobsim.vehicle import nominal_tf

        c = pd_tf(PDGains())
        gn = nominal_tf()
        closed = feedback(c * gn)
        cp = char_poly(c, gn)
        den = closed.den.monic()
        assert rel_coeff_diff(den.coeffs, cp.coeffs) < 1e-12

    def test_degenerate_loop_raises(self):
        with pytest.raises(ValueError):
            feedback(TransferFunction([-1.0], [1.0]), TransferFunction([1.0], [1.0]))


class TestRealization:
    def test_first_order(self):
        ss = tf_to_ss(TransferFunction([1.0], [1.0, 1.0]))
        assert ss.n_states == 1
        assert ss.D[0, 0] == 0.0

    def test_biproper_has_feedthrough(self):
        ss = tf_to_ss(TransferFunction([1.0, 2.0], [1.0, 1.0]))
        assert ss.D[0, 0] == 1.0

    def test_design_model_four_states(self):
        from dobsim.vehicle import nominal_tf

        ss = tf_to_ss(nominal_tf())
        assert ss.n_states == 4
        assert ss.D[0, 0] == 0.0

    def test_improper_rejected(self):
        with pytest.raises(ImproperTransferFunctionError):
            tf_to_ss(TransferFunction([1.0, 0.0, 1.0], [1.0, 1.0]))

    def test_fidelity_on_standard_grid(self):
        from dobsim.vehicle import nominal_tf

        for g in (
            nominal_tf(),
            TransferFunction([2.0, 3.0], [1.0, 4.0, 8.0]),
            TransferFunction([1.0, 0.5], [1.0, 0.5]),
        ):
            ss = tf_to_ss(g)
            for omega in (1e-2, 1e-1, 1.0, 1e1, 1e2):
                direct = tf_eval(g, 1j * omega)
                via_ss = complex(ss.eval(1j * omega)[0, 0])
                assert abs(direct - via_ss) <= 1e-9 * (1.0 + abs(direct))

    @given(
        st.lists(st.floats(min_value=0.2, max_value=40.0), min_size=1, max_size=3),
        st.lists(st.floats(min_value=0.2, max_value=40.0), min_size=0, max_size=2),
        st.floats(min_value=0.1, max_value=10.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_fidelity_random_stable(self, pole_mags, zero_mags, gain):
        zero_mags = zero_mags[: max(0, len(pole_mags) - 1)]
        den = Polynomial(np.real(np.poly([-p for p in pole_mags])))
        num = gain * Polynomial(
            np.real(np.poly([-z for z in zero_mags])) if zero_mags else [1.0]
        )
        g = TransferFunction(num, den)
        ss = tf_to_ss(g)
        for omega in (1e-2, 1.0, 1e2):
            direct = tf_eval(g, 1j * omega)
            via_ss = complex(ss.eval(1j * omega)[0, 0])
            assert abs(direct - via_ss) <= 1e-9 * (1.0 + abs(direct))


def sine_amplitude(t, y, omega):
    """Least-squares fit of a sin/cos/offset basis; returns the amplitude."""
    basis = np.column_stack([np.sin(omega * t), np.cos(omega * t), np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return math.hypot(coef[0], coef[1])


class TestSimulate:
    def test_step_into_first_order_lag(self):
        h = 1e-3
        ss = tf_to_ss(TransferFunction([1.0], [1.0, 1.0]))
        u = np.ones(1501)
        y = simulate(ss, u, h)
        assert abs(y[1000] - (1.0 - math.exp(-1.0))) < 1e-4

    def test_step_into_integrator(self):
        h = 1e-3
        ss = tf_to_ss(TransferFunction([1.0], [1.0, 0.0]))
        n = 2001
        y = simulate(ss, np.ones(n), h)
        t = np.arange(n) * h
        assert np.max(np.abs(y - t)) < 1e-6

    @pytest.mark.parametrize(
        "num, den, omega",
        [
            ([1.0], [1.0, 1.0], 1.0),
            ([1.0], [1.0, 1.0], 100.0),  # omega = 0.1/h
            ([2.0], [1.0, 0.8, 4.0], 1.0),
            ([2.0], [1.0, 0.8, 4.0], 10.0),
        ],
    )
    def test_sinusoid_gain_matches_frequency_response(self, num, den, omega):
        h = 1e-3
        g = TransferFunction(num, den)
        ss = tf_to_ss(g)
        slowest = min(abs(p.real) for p in poly_roots(g.den))
        settle = 10.0 / slowest
        duration = settle + max(5 * 2 * math.pi / omega, 2.0)
        n = int(round(duration / h)) + 1
        t = np.arange(n) * h
        y = simulate(ss, np.sin(omega * t), h)
        mask = t >= settle
        amp = sine_amplitude(t[mask], y[mask], omega)
        assert abs(amp - abs(tf_eval(g, 1j * omega))) <= 0.01 * abs(
            tf_eval(g, 1j * omega)
        )

    def test_divergence_reports_step(self):
        # h far outside the RK4 stability region makes the lag blow up
        ss = tf_to_ss(TransferFunction([1.0], [1.0, 1.0]))
        with pytest.raises(DivergenceError) as err:
            simulate(ss, np.ones(10000), h=4.0)
        assert 0 < err.value.step < 10000

    def test_two_input_model(self):
        ss = StateSpaceModel([[0.0]], [[1.0, -1.0]], [[1.0]], [[0.0, 0.0]])
        u = np.column_stack([np.ones(100), np.ones(100)])
        y = simulate(ss, u, 1e-3)
        assert np.allclose(y, 0.0)


class TestDelayLine:
    def test_80_step_shift_bit_exact(self):
        h = 1e-3
        line = DelayLine(0.08, h)
        assert line.steps == 80
        rng = np.random.default_rng(7)
        x = rng.standard_normal(500)
        out = delay_apply(line, x)
        assert np.all(out[:80] == 0.0)
        assert np.array_equal(out[80:], x[:-80])

    def test_zero_delay_identity(self):
        line = DelayLine(0.0, 1e-3)
        x = np.arange(5.0)
        assert np.array_equal(delay_apply(line, x), x)

    def test_half_step_rounds_up(self):
        assert DelayLine(0.0805, 1e-3).steps == 81

    def test_negative_delay_rejected(self):
        with pytest.raises(ValueError):
            DelayLine(-0.1, 1e-3)

    def test_push_matches_batch(self):
        line = DelayLine(0.003, 1e-3)
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        streamed = np.array([line.push(v) for v in x])
        line2 = DelayLine(0.003, 1e-3)
        assert np.array_equal(streamed, delay_apply(line2, x))

    @given(st.integers(min_value=0, max_value=40), st.integers(min_value=0, max_value=40))
    @settings(max_examples=40, deadline=None)
    def test_composition_exact(self, n1, n2):
        h = 1e-3
        rng = np.random.default_rng(n1 * 100 + n2)
        x = rng.standard_normal(120)
        once = delay_apply(DelayLine(n1 * h, h), x)
        twice = delay_apply(DelayLine(n2 * h, h), once)
        combined = delay_apply(DelayLine((n1 + n2) * h, h), x)
        assert np.array_equal(twice, combined)


class TestFrequencyResponse:
    def test_validation(self):
        with pytest.raises(ValueError):
            FrequencyResponse([1.0, 0.5], [1 + 0j, 1 + 0j])
        with pytest.raises(ValueError):
            FrequencyResponse([0.0, 1.0], [1 + 0j, 1 + 0j])

    def test_sweep_transfer_function(self):
        g = TransferFunction([1.0], [1.0, 1.0])
        resp = sweep(g, np.array([1.0, 2.0]))
        assert abs(resp.values[0] - (0.5 - 0.5j)) < 1e-15
        assert abs(resp.magnitude()[0] - math.sqrt(0.5)) < 1e-12


class TestMinimalRealization:
    def test_cancels_matched_pair(self):
        # (s+1)(s+2) / (s+1)(s+3) -> (s+2)/(s+3)
        g = TransferFunction(
            Polynomial([1.0, 1.0]) * Polynomial([1.0, 2.0]),
            Polynomial([1.0, 1.0]) * Polynomial([1.0, 3.0]),
        )
        m = g.minimal()
        assert m.num.degree == 1 and m.den.degree == 1
        for s in (0.5j, 2j):
            assert abs(tf_eval(m, s) - tf_eval(g, s)) < 1e-9

    def test_no_cancellation_without_match(self):
        g = TransferFunction([1.0, 1.0], [1.0, 3.0])
        m = g.minimal()
        assert m.num.degree == 1 and m.den.degree == 1
