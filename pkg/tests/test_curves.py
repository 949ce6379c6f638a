import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumpcurve import (
    ConstantFloor,
    FactorParams,
    ForwardCurve,
    GammaJumpMeasure,
    ModelSpec,
    affine_coefficients,
    bond_A,
    bond_A_dT,
    bond_B,
    bond_B_dT,
    bond_price,
    calibrate_floor,
    conditional_moments,
    cumulant_time_integral,
    forward_rate,
    match_moments,
    mc_bond_price,
    tilted_time_integral,
    yield_curve,
)


def deterministic_spec(level=0.03, lam=1.0, x0=0.0):
    """Jump intensity driven to zero: the rate collapses to mu + x e^{-lam t}."""
    return ModelSpec(
        factors=(
            FactorParams(lam=lam, sigma=1.0, x0=x0, measure=GammaJumpMeasure(1e-14, 10.0)),
        ),
        floor=ConstantFloor(level),
        horizon=10.0,
    )


class TestBondB:
    def test_terminal(self, baseline_factor):
        assert bond_B(baseline_factor, 1.0, 1.0) == 0.0

    def test_long_maturity_limit(self, baseline_factor):
        assert bond_B(baseline_factor, 0.0, 10.0) == pytest.approx(-1.0, rel=1e-4)

    def test_hand_value(self, baseline_factor):
        assert bond_B(baseline_factor, 0.0, math.log(2.0)) == pytest.approx(-0.5, rel=1e-14)

    def test_rejects_reversed(self, baseline_factor):
        with pytest.raises(ValueError):
            bond_B(baseline_factor, 2.0, 1.0)

    @given(
        lam=st.floats(min_value=0.05, max_value=5.0),
        t=st.floats(min_value=0.0, max_value=4.0),
        dt=st.floats(min_value=0.01, max_value=4.0),
    )
    @settings(max_examples=80, deadline=None)
    def test_monotonicity_and_ode(self, lam, t, dt):
        f = FactorParams(lam=lam, sigma=1.0, x0=0.0, measure=GammaJumpMeasure(1.0, 5.0))
        T = t + dt
        b = bond_B(f, t, T)
        assert b < 0
        # increasing in t, decreasing in T
        assert bond_B(f, t + 0.4 * dt, T) > b
        assert bond_B(f, t, T + 0.5) < b
        # dB/dt = 1 + lam B pointwise
        assert math.exp(-lam * (T - t)) == pytest.approx(1.0 + lam * b, abs=1e-12)


class TestBondA:
    def test_terminal(self, baseline_spec, baseline_factor):
        assert bond_A(baseline_factor, baseline_spec.floor, 1, 1.0, 1.0) == 0.0

    def test_no_jump_limit(self):
        spec = deterministic_spec(level=0.03)
        a = bond_A(spec.factors[0], spec.floor, 1, 0.5, 2.0)
        assert a == pytest.approx(-0.03 * 1.5, rel=1e-10)

    def test_closed_vs_quadrature(self, baseline_factor):
        floor = ConstantFloor(0.0)
        closed = bond_A(baseline_factor, floor, 1, 0.0, 1.0, method="closed")
        quad = bond_A(baseline_factor, floor, 1, 0.0, 1.0, method="quadrature")
        assert closed == pytest.approx(quad, rel=1e-10)

    def test_closed_vs_quadrature_grid(self, two_factor_spec):
        third = FactorParams(lam=3.0, sigma=0.2, x0=0.0, measure=GammaJumpMeasure(5.0, 40.0))
        factors = two_factor_spec.factors + (third,)
        for f in factors:
            for (t, T) in ((0.0, 0.5), (0.25, 1.0), (1.0, 5.0), (3.0, 8.0)):
                c = cumulant_time_integral(f, t, T, T, method="closed")
                q = cumulant_time_integral(f, t, T, T, method="quadrature")
                assert c == pytest.approx(q, rel=1e-10, abs=1e-14)
                ct = tilted_time_integral(f, t, T, T, method="closed")
                qt = tilted_time_integral(f, t, T, T, method="quadrature")
                assert ct == pytest.approx(qt, rel=1e-10, abs=1e-14)


class TestBondDerivatives:
    def test_slope_derivative_at_terminal(self, baseline_factor):
        assert bond_B_dT(baseline_factor, 1.0, 1.0) == -1.0

    def test_slope_derivative_finite_difference(self, baseline_factor):
        h = 1e-6
        for (t, T) in ((0.0, 1.0), (0.5, 3.0)):
            fd = (bond_B(baseline_factor, t, T + h) - bond_B(baseline_factor, t, T - h)) / (2 * h)
            assert bond_B_dT(baseline_factor, t, T) == pytest.approx(fd, abs=1e-8)

    def test_intercept_derivative_finite_difference(self, baseline_spec):
        f = baseline_spec.factors[0]
        h = 1e-6
        for (t, T) in ((0.0, 1.0), (0.5, 3.0)):
            fd = (
                bond_A(f, baseline_spec.floor, 1, t, T + h)
                - bond_A(f, baseline_spec.floor, 1, t, T - h)
            ) / (2 * h)
            closed = bond_A_dT(f, baseline_spec.floor, 1, t, T)
            assert closed == pytest.approx(fd, abs=1e-6)
            quad = bond_A_dT(f, baseline_spec.floor, 1, t, T, method="quadrature")
            assert closed == pytest.approx(quad, rel=1e-10)


class TestBondPrice:
    def test_terminal_is_one(self, baseline_spec):
        assert bond_price(baseline_spec, 1.0, 1.0, [0.3]) == 1.0

    def test_deterministic_limit(self):
        spec = deterministic_spec(level=0.03)
        assert bond_price(spec, 0.0, 2.0) == pytest.approx(math.exp(-0.06), rel=1e-10)

    def test_floor_bound(self, baseline_spec):
        for x in (0.0, 0.05, 0.4):
            p = bond_price(baseline_spec, 0.5, 3.0, [x])
            bound = math.exp(-baseline_spec.floor.integral(0.5, 3.0))
            assert p <= bound

    def test_monte_carlo_oracle(self, baseline_spec):
        est = mc_bond_price(baseline_spec, 1.0, 20_000, seed=31)
        analytic = bond_price(baseline_spec, 0.0, 1.0)
        assert abs(est.value - analytic) < 3.0 * est.std_error

    def test_zeta_nonpositive(self, baseline_factor):
        # exp(sigma B z) - 1 <= 0 for positive jump sizes
        for (t, T) in ((0.0, 1.0), (0.4, 2.0)):
            b = bond_B(baseline_factor, t, T)
            for z in (0.01, 0.1, 1.0, 5.0):
                assert math.expm1(baseline_factor.sigma * b * z) <= 0.0


class TestForwardRate:
    def test_short_maturity_is_short_rate(self, baseline_spec):
        got = forward_rate(baseline_spec, 0.7, 0.7, [0.04])
        assert got == pytest.approx(0.02 + 0.04, rel=1e-14)

    def test_no_jump_limit(self):
        spec = deterministic_spec(level=0.03, lam=2.0, x0=0.05)
        T = 1.5
        assert forward_rate(spec, 0.0, T) == pytest.approx(
            0.03 + 0.05 * math.exp(-2.0 * T), rel=1e-9
        )

    def test_matches_log_price_derivative(self, baseline_spec, two_factor_spec):
        h = 1e-5
        for spec in (baseline_spec, two_factor_spec):
            state = spec.initial_state() + 0.03
            for (t, T) in ((0.0, 1.0), (0.5, 2.5)):
                fd = -(
                    math.log(bond_price(spec, t, T + h, state))
                    - math.log(bond_price(spec, t, T - h, state))
                ) / (2 * h)
                assert forward_rate(spec, t, T, state) == pytest.approx(fd, abs=1e-6)

    def test_closed_vs_quadrature(self, baseline_spec):
        closed = forward_rate(baseline_spec, 0.25, 2.0)
        quad = forward_rate(baseline_spec, 0.25, 2.0, method="quadrature")
        assert closed == pytest.approx(quad, rel=1e-10)


class TestYieldCurve:
    def test_flat_deterministic_inversion(self):
        spec = deterministic_spec(level=0.03)
        assert yield_curve(spec, 0.5, 2.0) == pytest.approx(0.03, rel=1e-12)

    def test_short_maturity_limit(self, baseline_spec):
        t = 0.5
        state = [0.03]
        r_t = forward_rate(baseline_spec, t, t, state)
        assert yield_curve(baseline_spec, t, t + 1e-6, state) == pytest.approx(
            r_t, abs=1e-6
        )

    def test_affine_form_identity(self, baseline_spec):
        t, T = 0.5, 3.0
        state = np.array([0.07])
        coeffs = affine_coefficients(baseline_spec, t, T)
        affine = coeffs.log_price(state) / (t - T)
        assert yield_curve(baseline_spec, t, T, state) == pytest.approx(
            affine, rel=1e-12
        )

    def test_rejects_degenerate(self, baseline_spec):
        with pytest.raises(ValueError):
            yield_curve(baseline_spec, 1.0, 1.0)


class TestCalibration:
    def test_flat_market_no_jumps(self):
        factors = (
            FactorParams(lam=1.0, sigma=1.0, x0=0.0, measure=GammaJumpMeasure(1e-14, 10.0)),
        )
        market = ForwardCurve(np.linspace(0.25, 5.0, 20), np.full(20, 0.03))
        floor = calibrate_floor(factors, market)
        assert np.allclose(floor.values, 0.03, atol=1e-12)

    def test_round_trip(self, two_factor_spec):
        grid = np.linspace(0.1, 8.0, 50)
        market = ForwardCurve(
            grid, np.array([forward_rate(two_factor_spec, 0.0, T) for T in grid])
        )
        floor = calibrate_floor(two_factor_spec.factors, market)
        refit = ModelSpec(
            factors=two_factor_spec.factors, floor=floor, horizon=two_factor_spec.horizon
        )
        worst = max(
            abs(forward_rate(refit, 0.0, T) - f) for T, f in zip(grid, market.rates)
        )
        assert worst < 1e-8

    def test_recovers_known_floor(self, baseline_factor):
        # curve generated by a model with a known floor is refit exactly at knots
        true_floor = ConstantFloor(0.017)
        spec = ModelSpec(factors=(baseline_factor,), floor=true_floor, horizon=10.0)
        grid = np.linspace(0.25, 6.0, 24)
        market = ForwardCurve(
            grid, np.array([forward_rate(spec, 0.0, T) for T in grid])
        )
        floor = calibrate_floor(spec.factors, market)
        assert np.allclose(floor.values, 0.017, atol=1e-8)

    def test_negative_market_curve(self, baseline_factor):
        market = ForwardCurve(np.linspace(0.5, 5.0, 10), np.full(10, -0.005))
        floor = calibrate_floor((baseline_factor,), market)
        assert all(v < 0 for v in floor.values)
        refit = ModelSpec(factors=(baseline_factor,), floor=floor, horizon=10.0)
        assert forward_rate(refit, 0.0, 2.0) == pytest.approx(-0.005, abs=1e-10)

    def test_csv_round_trip(self, tmp_path):
        curve = ForwardCurve(np.array([0.5, 1.0, 2.0]), np.array([0.01, 0.02, 0.025]))
        path = tmp_path / "fwd.csv"
        curve.to_csv(path)
        back = ForwardCurve.from_csv(path)
        assert np.array_equal(back.maturities, curve.maturities)
        assert np.array_equal(back.rates, curve.rates)

    def test_rejects_unsorted_grid(self):
        with pytest.raises(ValueError):
            ForwardCurve(np.array([1.0, 0.5]), np.array([0.01, 0.02]))


class TestMatchMoments:
    @staticmethod
    def observations(spec, times):
        return [
            (t, *conditional_moments(spec, 0.0, t, spec.initial_state())) for t in times
        ]

    def test_fixed_point(self, baseline_spec):
        obs = self.observations(baseline_spec, np.linspace(0.25, 5.0, 10))
        fit = match_moments(obs, 1, baseline_spec)
        assert fit.residual < 1e-12
        assert fit.converged
        got = fit.spec.factors[0]
        truth = baseline_spec.factors[0]
        assert got.lam == truth.lam
        assert got.sigma == truth.sigma
        assert got.measure == truth.measure

    def test_synthetic_recovery(self, baseline_spec):
        obs = self.observations(baseline_spec, np.linspace(0.25, 6.0, 16))
        truth = baseline_spec.factors[0]
        # sigma and eps enter the moment curves only through sigma alpha/eps
        # and sigma^2 alpha/eps^2; perturb the identified coordinates.
        start = ModelSpec(
            factors=(
                FactorParams(
                    lam=truth.lam * 1.2,
                    sigma=truth.sigma,
                    x0=truth.x0,
                    measure=GammaJumpMeasure(truth.measure.alpha * 0.8, truth.measure.epsilon),
                ),
            ),
            floor=ConstantFloor(0.012),
            horizon=baseline_spec.horizon,
        )
        fit = match_moments(obs, 1, start, max_iterations=2000)
        got = fit.spec.factors[0]
        assert got.lam == pytest.approx(truth.lam, rel=0.05)
        assert got.measure.alpha == pytest.approx(truth.measure.alpha, rel=0.05)
        assert got.sigma / got.measure.epsilon == pytest.approx(
            truth.sigma / truth.measure.epsilon, rel=0.05
        )
        assert fit.spec.floor.value(0.0) == pytest.approx(0.02, abs=0.002)

    def test_model_misfit_reports_residual(self, two_factor_spec, baseline_spec):
        obs = self.observations(two_factor_spec, np.linspace(0.25, 6.0, 16))
        misfit = match_moments(obs, 1, baseline_spec)
        well = match_moments(self.observations(baseline_spec, np.linspace(0.25, 6.0, 16)), 1, baseline_spec)
        assert misfit.residual > well.residual
        assert misfit.residual > 1e-10

    def test_rejects_insufficient_observations(self, baseline_spec):
        obs = self.observations(baseline_spec, np.linspace(0.5, 2.0, 4))
        with pytest.raises(ValueError):
            match_moments(obs, 1, baseline_spec)
