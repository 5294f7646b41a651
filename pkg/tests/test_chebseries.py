"""Coefficient computation, evaluation, continuation, and series arithmetic."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf, mpc

from chebpade import chebseries as cs

import oracles


def mpclose(a, b, rel):
    with mp.workprec(512):
        scale = max(abs(a), abs(b), mpf(10) ** -300)
        return abs(a - b) / scale < rel


class TestCoefficients:
    def test_identity_is_T1(self):
        s = cs.cheb_coeffs(cs.Rational((0, 1), (1,)), 5, 128)
        assert len(s.coeffs) == 6
        assert abs(s.coeffs[1] - 1) < 1e-35
        for k in (0, 2, 3, 4, 5):
            assert abs(s.coeffs[k]) < 1e-35

    def test_T7_polynomial(self):
        # T_7 in monomial form: 64x^7 - 112x^5 + 56x^3 - 7x
        t7 = cs.Rational((0, -7, 0, 56, 0, -112, 0, 64), (1,))
        s = cs.cheb_coeffs(t7, 10, 128)
        for k in range(11):
            target = 1 if k == 7 else 0
            assert abs(s.coeffs[k] - target) < 1e-30

    def test_markov_against_trapezoid_oracle(self):
        spec = cs.MarkovUniform(2, 3)
        s = cs.cheb_coeffs(spec, 3, 128)
        with mp.workprec(128):
            fn = lambda x: mp.log((3 - x) / (2 - x))
            for k in range(4):
                oracle = oracles.trapezoid_cheb_coeff(fn, k, n_nodes=100_000, bits=128)
                assert mpclose(s.coeffs[k], oracle, mpf(10) ** -20)

    def test_node_count_precondition(self):
        with pytest.raises(ValueError):
            cs.cheb_coeffs(cs.MarkovUniform(2, 3), 10, 64, n_nodes=20)

    def test_degree_zero_allowed(self):
        s = cs.cheb_coeffs(cs.MarkovUniform(2, 3), 0, 64)
        assert len(s.coeffs) == 1

    def test_quadrature_consistency_on_doubling(self):
        spec = cs.MarkovUniform(2, 3)
        a = cs.cheb_coeffs(spec, 20, 192, n_nodes=128)
        b = cs.cheb_coeffs(spec, 20, 192, n_nodes=256)
        # aliasing bound rho^-(2N - k) with rho = 2 + sqrt(3), plus the
        # summation roundoff floor of the working precision
        rho = 2 + 3**0.5
        floor = 512 * mpf(2) ** (-192)
        for k in range(21):
            assert abs(a.coeffs[k] - b.coeffs[k]) < 10 * rho ** (-(2 * 128 - k)) + floor

    def test_linearity_over_sums(self):
        f = cs.MarkovUniform(2, 3)
        g = cs.Rational((1, 0, 1), (2,))
        both = cs.FunctionSum((f, g))
        sf = cs.cheb_coeffs(f, 12, 128)
        sg = cs.cheb_coeffs(g, 12, 128)
        ss = cs.cheb_coeffs(both, 12, 128)
        with mp.workprec(160):
            sums = [sf.coeffs[k] + sg.coeffs[k] for k in range(13)]
        for k in range(13):
            assert mpclose(ss.coeffs[k], sums[k], mpf(10) ** -30)

    def test_parity_for_symmetric_sqrt(self):
        # Re b = 0 makes f even; odd coefficients sit at quadrature-noise level
        s = cs.cheb_coeffs(cs.SqrtConjPair(1j), 16, 128)
        for k in range(1, 17, 2):
            assert abs(s.coeffs[k]) < 1e-35
        assert abs(s.coeffs[0]) > 0.5

    def test_empty_sum_rejected(self):
        with pytest.raises(cs.InvalidFunctionError):
            cs.FunctionSum(())

    def test_pole_on_E_rejected(self):
        with pytest.raises(cs.InvalidFunctionError):
            cs.Rational((1,), (-0.25, 0, 1))  # roots +-0.5


class TestEvaluation:
    def test_eval_linear(self):
        s = cs.ChebSeries(coeffs=[mpf(0), mpf(1)], precision_bits=64)
        assert abs(cs.eval_on_E(s, 0.5) - 0.5) < 1e-17

    def test_eval_T2_at_zero(self):
        s = cs.ChebSeries(coeffs=[mpf(0), mpf(0), mpf(1)], precision_bits=64)
        assert abs(cs.eval_on_E(s, 0.0) - (-1)) < 1e-17

    def test_markov_series_value_at_zero(self):
        s = cs.cheb_coeffs(cs.MarkovUniform(2, 3), 60, 256)
        val = cs.eval_on_E(s, 0.0)
        with mp.workprec(256):
            assert abs(val - mp.log(mpf(3) / 2)) < 1e-15

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-2, 2), min_size=1, max_size=12), st.floats(-1, 1))
    def test_clenshaw_matches_cosine_sum(self, coeffs, x):
        # the ChebSeries invariant: Clenshaw equals the direct cos-sum
        s = cs.ChebSeries(coeffs=[mpf(c) for c in coeffs], precision_bits=64)
        with mp.workprec(96):
            t = mp.acos(mpf(x))
            direct = mp.fsum([s.coeffs[k] * mp.cos(k * t) for k in range(len(coeffs))])
        val = cs.eval_on_E(s, x)
        assert abs(val - direct) <= 2.0 ** (-32) * (1 + abs(direct))


class TestContinuation:
    def test_sqrt_at_zero(self):
        v = cs.eval_continuation(cs.SqrtConjPair(1j), 0.0, precision_bits=96)
        assert abs(v - 1) < 1e-25

    def test_markov_at_complex_point(self):
        v = cs.eval_continuation(cs.MarkovUniform(2, 3), 1 + 1j, precision_bits=128)
        oracle = oracles.markov_value(2, 3, mpc(1, 1), bits=128)
        assert abs(v - oracle) < 1e-35

    def test_rational_anywhere(self):
        spec = cs.Rational((1, 2), (3, 0, 1))
        z = mpc(0.3, 2.0)
        v = cs.eval_continuation(spec, z, precision_bits=96)
        with mp.workprec(112):
            assert abs(v - (1 + 2 * z) / (3 + z * z)) < 1e-25

    def test_continuation_matches_series_on_E(self):
        spec = cs.SqrtConjPair(0.3 + 1j)
        s = cs.cheb_coeffs(spec, 48, 192)
        for x in (-0.7, -0.2, 0.41, 0.9):
            a = cs.eval_on_E(s, x)
            b = cs.eval_continuation(spec, x, precision_bits=192)
            assert abs(a - b) < 1e-20  # truncation tail of the degree-48 series

    def test_near_branch_point_raises(self):
        with pytest.raises(cs.NearSingularityError):
            cs.eval_continuation(cs.MarkovUniform(2, 3), 2.0 + 1e-14j, precision_bits=64)

    def test_on_cut_raises(self):
        with pytest.raises(cs.NearSingularityError):
            cs.eval_continuation(cs.MarkovUniform(2, 3), 2.5, precision_bits=64)

    def test_sqrt_cut_jump_located_on_default_arc(self):
        # the default cut for b = i is the imaginary axis beyond +-i
        spec = cs.SqrtConjPair(1j)
        left = cs.eval_continuation(spec, -1e-6 + 2j, precision_bits=96)
        right = cs.eval_continuation(spec, 1e-6 + 2j, precision_bits=96)
        assert abs(left + right) < 1e-4  # opposite branches across the cut
        assert abs(left - right) > 1     # genuine jump
        # and no jump across the real axis
        lo = cs.eval_continuation(spec, 0.5 - 1e-6j, precision_bits=96)
        hi = cs.eval_continuation(spec, 0.5 + 1e-6j, precision_bits=96)
        assert abs(lo - hi) < 1e-4

    def test_sqrt_squares_back(self):
        spec = cs.SqrtConjPair(0.3 + 1j)
        b = mpc(0.3, 1)
        for z in (mpc(2, 0.5), mpc(-1.5, -0.4), mpc(0.1, 3)):
            v = cs.eval_continuation(spec, z, precision_bits=128)
            with mp.workprec(128):
                assert abs(v * v - (z - b) * (z - mp.conj(b))) < 1e-30

    def test_cbrt_real_branch_on_E(self):
        spec = cs.CbrtTriple(0.5 + 1j, -2.0)
        v = cs.eval_continuation(spec, mpc(0.2, 0), precision_bits=96)
        with mp.workprec(96):
            direct = spec.eval_real(mpf(0.2))
        assert abs(v - direct) < 1e-24

    def test_cbrt_cubes_back(self):
        spec = cs.CbrtTriple(0.5 + 1j, -2.0)
        z = mpc(1.2, 0.7)
        v = cs.eval_continuation(spec, z, precision_bits=128)
        with mp.workprec(128):
            b = mpc(0.5, 1)
            prod = (z - b) * (z - mp.conj(b)) * (z + 2)
            assert abs(v**3 - prod) < 1e-30


class TestProductCoefficients:
    def test_T1_squared(self):
        s = cs.ChebSeries(coeffs=[mpf(0), mpf(1), mpf(0)], precision_bits=64)
        assert abs(cs.series_product_coeff(s, [mpf(0), mpf(1)], 0) - mpf(1) / 2) < 1e-18
        with pytest.raises(cs.TruncationError):
            cs.series_product_coeff(s, [mpf(0), mpf(1)], 2)
        s3 = cs.ChebSeries(coeffs=[mpf(0), mpf(1), mpf(0), mpf(0)], precision_bits=64)
        assert abs(cs.series_product_coeff(s3, [mpf(0), mpf(1)], 2) - mpf(1) / 2) < 1e-18

    def test_identity_multiplier(self):
        s = cs.cheb_coeffs(cs.MarkovUniform(2, 3), 10, 128)
        for k in (0, 3, 7):
            assert mpclose(
                cs.series_product_coeff(s, [mpf(1)], k), s.coeffs[k], mpf(10) ** -35
            )

    def test_against_reexpansion_oracle(self):
        spec = cs.MarkovUniform(2, 3)
        s = cs.cheb_coeffs(spec, 24, 128)
        with mp.workprec(128):
            n_nodes = 512
            thetas = [mp.pi * (2 * m + 1) / (2 * n_nodes) for m in range(n_nodes)]
            fv = [spec.eval_real(mp.cos(t)) for t in thetas]
            qv = [1 + mp.cos(t) for t in thetas]
            oracle = oracles.product_reexpansion_coeff(fv, qv, thetas, 4, n_nodes)
            mine = cs.series_product_coeff(s, [mpf(1), mpf(1)], 4)
            assert mpclose(mine, oracle, mpf(10) ** -18)


class TestNormalizationAndIO:
    def test_orthonormal_roundtrip(self):
        s = cs.cheb_coeffs(cs.MarkovUniform(2, 3), 8, 128)
        on = cs.to_orthonormal(s)
        back = cs.from_orthonormal(on, 128)
        for k in range(9):
            assert mpclose(back.coeffs[k], s.coeffs[k], mpf(10) ** -35)
        with mp.workprec(128):
            assert mpclose(on[0], mp.sqrt(mp.pi) * s.coeffs[0], mpf(10) ** -35)
            assert mpclose(on[3], mp.sqrt(mp.pi / 2) * s.coeffs[3], mpf(10) ** -35)

    def test_json_roundtrip_preserves_precision(self):
        s = cs.cheb_coeffs(cs.MarkovUniform(2, 3), 6, 256)
        data = json.loads(json.dumps(cs.series_to_json(s)))
        back = cs.series_from_json(data)
        assert back.precision_bits == 256
        for k in range(7):
            assert mpclose(back.coeffs[k], s.coeffs[k], mpf(10) ** -70)

    def test_spec_json_roundtrip(self):
        for spec in (
            cs.MarkovUniform(2, 3),
            cs.SqrtConjPair(0.3 + 1j),
            cs.CbrtTriple(0.5 + 1j, -2.0),
            cs.Rational((1, 2), (3, 1)),
            cs.FunctionSum((cs.MarkovUniform(2, 3), cs.Rational((1,), (2,)))),
        ):
            back = cs.spec_from_json(cs.spec_to_json(spec))
            assert type(back) is type(spec)
