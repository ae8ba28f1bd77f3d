import math

import numpy as np
import pytest

from expanderlab.exceptions import DivergentNormError, DomainError
from expanderlab.exponents import derived_exponents
from expanderlab.profiles import RadialGrid
from expanderlab.semigroup import (
    GaussianDatum,
    RadialFunction,
    apply_S0,
    apply_S0_gaussian,
    growth_rate_gaussian,
    lq_norm,
    sphere_area,
    verify_smoothing,
)


@pytest.fixture(scope="module")
def grid():
    return RadialGrid.uniform(16.0, 0.01)


def heat_step_oracle(values, h, steps, dt, d):
    """Radial heat equation by explicit Euler on a fine grid.

    Independent physical-space oracle: forward differences in time, central
    in space, with the axis handled by the even-extension limit
    (Laplacian at 0 equals d * v''(0)).
    """
    v = values.copy()
    n = v.size
    r = np.arange(n) * h
    for _ in range(steps):
        lap = np.empty_like(v)
        lap[1:-1] = ((v[2:] - 2 * v[1:-1] + v[:-2]) / h ** 2
                     + (d - 1.0) / r[1:-1] * (v[2:] - v[:-2]) / (2 * h))
        lap[0] = d * 2.0 * (v[1] - v[0]) / h ** 2
        lap[-1] = 0.0
        v += dt * lap
    return v


class TestLqNorm:
    def test_unit_ball_indicator(self, grid):
        # jump node weighted 1/2 so the Simpson pair errors cancel
        vals = np.where(grid.nodes < 1.0, 1.0, 0.0)
        vals[grid.nodes == 1.0] = 0.5
        f = RadialFunction(grid=grid, values=vals)
        assert lq_norm(f, 1.0, 3) == pytest.approx(4 * math.pi / 3, rel=1e-3)

    def test_gaussian_l2(self, grid):
        g = GaussianDatum(1.0, 0.25)  # e^(-rho^2)
        f = RadialFunction(grid=grid, values=g.values_on(grid.nodes))
        exact = (math.pi / 2.0) ** 0.75
        assert g.lq_norm(2.0, 3) == pytest.approx(exact, rel=1e-14)
        assert lq_norm(f, 2.0, 3) == pytest.approx(exact, rel=1e-9)

    def test_zero_function(self, grid):
        f = RadialFunction(grid=grid, values=np.zeros_like(grid.nodes))
        assert lq_norm(f, 2.0, 5) == 0.0

    def test_tail_extrapolation_matches_closed_form(self, grid):
        # pure power rho^-2 from rho=1 on, L2 in d=5: finite, computable
        t = -2.0
        vals = np.maximum(grid.nodes, 1.0) ** t
        f = RadialFunction(grid=grid, values=vals, tail_exponent=t)
        # integral: int_0^1 rho^4 + int_1^inf rho^(-4) rho^4 = 1/5 + inf...
        # gamma=2: |f|^2 rho^4: int_0^1 rho^4 = 1/5; int_1^inf rho^-4 rho^4
        # diverges, so use gamma=4 instead: int_1^inf rho^(-8+4) = 1/3
        exact = (sphere_area(5) * (1.0 / 5.0 + 1.0 / 3.0)) ** 0.25
        assert lq_norm(f, 4.0, 5) == pytest.approx(exact, rel=1e-6)

    def test_divergent_tail_rejected(self, grid):
        f = RadialFunction(grid=grid, values=np.maximum(grid.nodes, 1.0) ** -2.0,
                           tail_exponent=-2.0)
        with pytest.raises(DivergentNormError):
            lq_norm(f, 2.0, 5)   # 2*(-2) + 5 = 1 >= 0


class TestGaussianSemigroup:
    def test_tau_zero_identity(self):
        params = derived_exponents(5, 3.0)
        g = GaussianDatum(1.7, 0.9)
        out = apply_S0_gaussian(0.0, g, params)
        assert out.amplitude == g.amplitude
        assert out.variance == g.variance

    def test_semigroup_law_random(self):
        params = derived_exponents(5, 3.0)
        rng = np.random.default_rng(0)
        for _ in range(50):
            g = GaussianDatum(float(rng.uniform(-2, 2)),
                              float(rng.uniform(0.1, 5.0)))
            t1 = float(rng.uniform(0.0, 1.0))
            t2 = float(rng.uniform(0.0, 1.0))
            once = apply_S0_gaussian(t1 + t2, g, params)
            twice = apply_S0_gaussian(t2, apply_S0_gaussian(t1, g, params),
                                      params)
            assert abs(once.amplitude - twice.amplitude) <= 1e-12 * max(
                1.0, abs(once.amplitude))
            assert abs(once.variance - twice.variance) <= 1e-12 * once.variance

    def test_growth_exponents_with_sign_flip(self):
        params = derived_exponents(5, 3.0)
        q_c = params.q_c
        for eta in [1.0, 2.0, q_c, 2.0 * q_c]:
            target = 1.0 / (params.p - 1.0) - params.d / (2.0 * eta)
            assert growth_rate_gaussian(eta, params) == pytest.approx(
                target, abs=1e-3)
        assert growth_rate_gaussian(0.9 * q_c, params) < 0.0
        assert growth_rate_gaussian(1.1 * q_c, params) > 0.0
        assert abs(growth_rate_gaussian(q_c, params)) <= 1e-3

    def test_fixed_datum_rate_bounded_by_operator_rate(self):
        # a fixed Gaussian relaxes at the mass rate 1/(p-1) - d/2, which is
        # below the operator bound for every eta
        params = derived_exponents(5, 3.0)
        g = GaussianDatum(1.0, 1.0)
        taus = np.linspace(6.0, 10.0, 5)
        for eta in [1.0, 4.0, 10.0]:
            logn = [math.log(apply_S0_gaussian(t, g, params).lq_norm(
                eta, params.d)) for t in taus]
            slope = np.polyfit(taus, logn, 1)[0]
            assert slope <= 1.0 / (params.p - 1.0) - params.d / (2 * eta) + 1e-6
            assert slope == pytest.approx(
                1.0 / (params.p - 1.0) - params.d / 2.0, abs=1e-3)


class TestQuadraturePath:
    def test_matches_closed_form_on_gaussians(self, grid):
        params = derived_exponents(5, 3.0)
        g = GaussianDatum(1.3, 0.8)
        fin = RadialFunction(grid=grid, values=g.values_on(grid.nodes))
        for tau in [1e-3, 0.1, 0.5, 2.0]:
            out = apply_S0(tau, fin, params)
            exact = apply_S0_gaussian(tau, g, params).values_on(grid.nodes)
            err = np.max(np.abs(out.values - exact)) / np.max(np.abs(exact))
            assert err <= 1e-6

    def test_compact_bump_against_heat_euler_oracle(self, grid):
        params = derived_exponents(3, 2.0)
        tau = 0.5
        bump = np.where(grid.nodes < 1.0, (1.0 - grid.nodes ** 2) ** 2, 0.0)
        fin = RadialFunction(grid=grid, values=bump)
        out = apply_S0(tau, fin, params)

        h = 0.0075
        a = math.expm1(tau)
        r_max = 30.0
        n = int(round(r_max / h)) + 1
        r = np.arange(n) * h
        v0 = np.where(r < 1.0, (1.0 - r ** 2) ** 2, 0.0)
        dt = 0.25 * h ** 2 / params.d
        steps = int(math.ceil(a / dt))
        dt = a / steps
        heat = heat_step_oracle(v0, h, steps, dt, params.d)
        # similarity rescaling back onto the grid
        xi = grid.nodes
        sample = np.interp(math.exp(0.5 * tau) * xi, r, heat)
        expected = math.exp(tau / (params.p - 1.0)) * sample
        scale = np.max(np.abs(expected))
        mask = xi <= 8.0
        err = np.max(np.abs(out.values[mask] - expected[mask])) / scale
        assert err <= 1e-4

    def test_strong_continuity_at_zero(self, grid):
        # the O(tau) drift of a curved bump is a |Delta f| ~ 20 tau, so the
        # gap must shrink roughly linearly along a geometric tau sequence
        params = derived_exponents(5, 3.0)
        bump = np.where(grid.nodes < 1.0, (1.0 - grid.nodes ** 2) ** 2, 0.0)
        fin = RadialFunction(grid=grid, values=bump)
        gaps = []
        for tau in [0.02, 0.005, 0.00125]:
            out = apply_S0(tau, fin, params)
            gaps.append(np.max(np.abs(out.values - bump)))
        assert gaps[1] < 0.5 * gaps[0]
        assert gaps[2] < 0.5 * gaps[1]
        assert gaps[2] < 0.04 * np.max(bump)


class TestSmoothing:
    def test_degenerate_reduces_to_growth_check(self):
        params = derived_exponents(5, 3.0)
        samples = [GaussianDatum(1.0, v) for v in (0.3, 1.0, 3.0)]
        rep = verify_smoothing(2.0, 2.0, 4.0, 4.0, samples, params)
        assert rep.passed
        assert rep.fitted_M == pytest.approx(1.0, abs=0.1)

    def test_gaussian_family_bounded(self):
        params = derived_exponents(5, 3.0)
        samples = [GaussianDatum(1.0, v) for v in (0.3, 1.0, 3.0)]
        rep = verify_smoothing(1.0, 2.0, 1.0, 2.0, samples, params,
                               tau_list=[2.0 ** (-k) for k in range(1, 11)])
        assert rep.passed
        assert rep.refined_max <= 10.0 * rep.fitted_M
        d = rep.as_dict()
        assert d["pass"] and len(d["ratios"]) == 30

    def test_bump_family_bounded(self, grid):
        params = derived_exponents(5, 3.0)
        bump = np.where(grid.nodes < 1.0, (1.0 - grid.nodes ** 2) ** 2, 0.0)
        samples = [RadialFunction(grid=grid, values=bump)]
        rep = verify_smoothing(1.0, 2.0, 1.0, 2.0, samples, params,
                               tau_list=[0.5, 0.25, 0.125])
        assert rep.passed

    def test_exponent_relation_enforced(self):
        params = derived_exponents(5, 3.0)
        with pytest.raises(DomainError):
            verify_smoothing(1.0, 2.0, 1.0, 3.0, [], params)
        with pytest.raises(DomainError):
            verify_smoothing(2.0, 1.0, 2.0, 1.0, [], params)
