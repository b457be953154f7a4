'''
Smooth current limiter, gain matrices and the saturation-factor solver.
'''
import math

import numpy as np
import pytest

from gfmreduce.common_utils.errors import RhoSolverError
from gfmreduce.model.limiter import (RhoCache, gain_matrices, gain_matrices_oracle, gain_scalars, rho_exact_min,
                                     rho_lower_bound, rho_residual, rho_smooth, solve_rho_reduced, solve_rho_scalar)

LN2 = math.log(2.0)


class TestSmoothLimiter:

    @pytest.mark.parametrize('eps', [0.1, 0.2, 0.3, 0.4])
    def test_gap_bounds_over_ten_thousand_norms(self, eps):
        I_max = 1.2
        x = np.logspace(-3, 3, 10_000)
        gap = np.minimum(1.0, I_max / x) - rho_smooth(x, I_max, eps)
        assert gap.min() >= -1e-12
        assert gap.max() <= eps * LN2 + 1e-12

    def test_value_at_the_knee(self):
        assert rho_smooth(1.2, 1.2, 0.1) == pytest.approx(1.0 - 0.1 * LN2, abs=1e-15)

    def test_zero_reference_gives_one(self):
        assert rho_smooth(0.0, 1.2, 0.1) == 1.0
        assert rho_smooth(np.array([0.0, 1.0]), 1.2, 0.1)[0] == 1.0
        assert rho_exact_min(0.0, 1.2) == 1.0

    def test_scalar_and_array_paths_agree(self):
        x = np.geomspace(0.01, 100.0, 57)
        scalar = [rho_smooth(float(v), 1.2, 0.2) for v in x]
        np.testing.assert_allclose(rho_smooth(x, 1.2, 0.2), scalar, rtol=0, atol=1e-15)

    def test_non_increasing_and_capped(self):
        x = np.geomspace(0.01, 100.0, 1000)
        rho = rho_smooth(x, 1.2, 0.1)
        assert np.all(np.diff(rho) <= 1e-15)
        assert np.all(rho * x <= 1.2 * (1 + 1e-9))

    def test_larger_eps_widens_the_gap(self):
        gaps = [1.0 - rho_smooth(1.2, 1.2, eps) for eps in (0.1, 0.2, 0.3, 0.4)]
        assert gaps == sorted(gaps)

    def test_lower_bound(self):
        assert rho_lower_bound(0.1) == pytest.approx(-0.1 * LN2)
        assert rho_smooth(1e12, 1.2, 0.1) >= rho_lower_bound(0.1)


class TestGainMatrices:

    @pytest.mark.parametrize('name', ['table1-inductive', 'table1-resistive', 'table1'])
    def test_closed_forms_match_inverse_forms(self, name, rng):
        from gfmreduce.model.params import named_parameters
        params = named_parameters(name)
        worst = 0.0
        for rho in 1.0 - rng.uniform(0.0, 0.99, 1000):
            a, b = gain_matrices(float(rho), params), gain_matrices_oracle(float(rho), params)
            for m in ('A1', 'A2', 'A3', 'A4'):
                worst = max(worst, float(np.max(np.abs(getattr(a, m) - getattr(b, m)))))
        assert worst < 1e-9

    def test_f_terms_recovered(self, params):
        a, b = gain_matrices(0.4, params), gain_matrices_oracle(0.4, params)
        for name in ('f1', 'f2', 'f3', 'f4', 'f5'):
            assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-9, abs=1e-12)
        assert a.f5 > 0

    def test_unsaturated_gains(self, params):
        gains = gain_matrices(1.0, params)
        np.testing.assert_allclose(gains.A1, np.eye(2), atol=1e-15)
        np.testing.assert_allclose(gains.A2, [[0.0, -params.C], [params.C, 0.0]], atol=1e-15)

    def test_resistive_gains_at_unit_rho(self, params):
        gains = gain_matrices(1.0, params)
        R_g, L_g = params.R_g, params.L_g
        expected = np.array([[R_g, L_g], [-L_g, R_g]]) / (R_g ** 2 + L_g ** 2)
        np.testing.assert_allclose(gains.A3, expected, rtol=1e-14, atol=0)
        np.testing.assert_array_equal(gains.A4, -gains.A3)

    def test_blocks_act_like_complex_numbers(self, params, rng):
        rho = 0.37
        gains = gain_matrices(rho, params)
        scalars = gain_scalars(rho, params)
        v = rng.normal(size=2)
        z = complex(v[0], v[1])
        for matrix, scalar in zip((gains.A1, gains.A2, gains.A3, gains.A4), scalars):
            w = matrix @ v
            assert complex(w[0], w[1]) == pytest.approx(scalar * z, abs=1e-12)


class TestRhoSolver:

    def test_linear_residual(self):
        solution = solve_rho_scalar(lambda rho: rho - 0.5, 0.1)
        assert solution.rho == pytest.approx(0.5, abs=1e-12)
        assert solution.saturated

    def test_warm_start_at_the_root(self):
        solution = solve_rho_scalar(lambda rho: rho - 0.5, 0.1, guess=0.5)
        assert solution.iterations == 0
        assert solution.rho == 0.5

    def test_warm_start_falls_back_to_full_bracket(self):
        solution = solve_rho_scalar(lambda rho: rho - 0.2, 0.1, guess=0.9)
        assert solution.rho == pytest.approx(0.2, abs=1e-12)

    def test_re_solve_from_converged_root(self, params, rng):
        for _ in range(20):
            E_star = rng.uniform(0.8, 1.2)
            I_g = rng.uniform(-3.0, 3.0, 2)
            first = solve_rho_reduced(E_star, I_g, params)
            again = solve_rho_reduced(E_star, I_g, params, guess=first.rho)
            assert again.iterations <= 2
            assert again.rho == pytest.approx(first.rho, abs=1e-12)

    def test_no_sign_change(self):
        with pytest.raises(RhoSolverError) as info:
            solve_rho_scalar(lambda rho: 1.0 + rho ** 2, 0.1)
        assert info.value.bracket is not None
        assert info.value.exit_code == 4

    def test_degenerate_norm_gives_one(self, params):
        solution = solve_rho_reduced(1.0, (0.0, -params.C * 1.0), params)
        assert solution.rho == 1.0

    def test_reduced_root(self, params, rng):
        cache = RhoCache()
        for _ in range(50):
            E_star = rng.uniform(0.8, 1.2)
            I_g = rng.uniform(-3.0, 3.0, 2)
            solution = cache.update(solve_rho_reduced(E_star, I_g, params, guess=cache.last))
            assert abs(rho_residual(solution.rho, E_star, I_g, params)) <= 1e-12
            assert rho_lower_bound(params.eps_sat) <= solution.rho <= 1.0
        assert cache.last == solution.rho

    def test_deep_saturation_caps_the_manifold_current(self, params):
        E_star, I_g = 1.0, np.array([3.0, 1.0])
        rho = solve_rho_reduced(E_star, I_g, params).rho
        gains = gain_matrices(rho, params)
        from gfmreduce.model.frames import E1
        I_i = rho * (gains.A1 @ I_g + gains.A2 @ E1 * E_star)
        assert rho < 0.5
        assert np.linalg.norm(I_i) <= params.I_max * (1 + 1e-9)
