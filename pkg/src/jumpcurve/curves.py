"""Affine bond pricing, forward curves, floor calibration, moment matching.

Bond prices are exponential-affine in the factors,

    P(t,T) = exp( sum_k [ A_k(t,T) + B_k(t,T) X_k(t) ] ),
    B_k(t,T) = (exp(-lam_k (T-t)) - 1) / lam_k  <= 0,
    A_k(t,T) = int_t^T ( -mu(s)/n + int (exp(sigma_k B_k(s,T) z) - 1) nu_k(dz) ) ds.

For the gamma jump measure the s-integral of the cumulant has a closed form:
substituting w = exp(-lam (T-s)) reduces it to a rational-plus-logarithmic
antiderivative,

    int_{t1}^{t2} cum(sigma B(s,T)) ds
        = -alpha sigma (t2-t1) / (eps lam + sigma)
          - alpha eps / (eps lam + sigma)
            * log( (eps - sigma B(t2,T)) / (eps - sigma B(t1,T)) ),

and similarly the maturity-tilted integral behind forward rates collapses to

    int_{t1}^{t2} sigma e^{-lam(T-s)} alpha eps / (eps - sigma B(s,T))^2 ds
        = alpha eps / (eps - sigma B(t2,T)) - alpha eps / (eps - sigma B(t1,T)).

Both integrals keep an adaptive-quadrature twin (``method="quadrature"``) as a
permanent oracle against derivation errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    CalibratedFloor,
    ConstantFloor,
    FactorParams,
    FloorFunction,
    ModelSpec,
    require_valid,
)
from .quadrature import gauss_kronrod

__all__ = [
    "AffineCoefficients",
    "ForwardCurve",
    "MomentFitResult",
    "bond_B",
    "bond_B_dT",
    "bond_A",
    "bond_A_dT",
    "cumulant_time_integral",
    "tilted_time_integral",
    "affine_coefficients",
    "bond_price",
    "forward_rate",
    "yield_curve",
    "calibrate_floor",
    "match_moments",
]

_METHODS = ("closed", "quadrature")
_QUAD_TOL = 1e-13


def _check_interval(t: float, T: float) -> None:
    if t < 0:
        raise ValueError("need t >= 0")
    if t > T:
        raise ValueError("need t <= T")


def _check_method(method: str) -> None:
    if method not in _METHODS:
        raise ValueError(f"method must be one of {_METHODS}")


def bond_B(factor: FactorParams, t: float, T: float) -> float:
    """Affine slope B(t,T) = (exp(-lam (T-t)) - 1) / lam <= 0."""
    _check_interval(t, T)
    return math.expm1(-factor.lam * (T - t)) / factor.lam


def bond_B_dT(factor: FactorParams, t: float, T: float) -> float:
    """Maturity derivative of the slope, -exp(-lam (T-t))."""
    _check_interval(t, T)
    return -math.exp(-factor.lam * (T - t))


def cumulant_time_integral(
    factor: FactorParams,
    t1: float,
    t2: float,
    T: float,
    method: str = "closed",
) -> float:
    """int_{t1}^{t2} cum(sigma B(s,T)) ds, the jump part of A over [t1, t2].

    Requires t1 <= t2 <= T.  ``method="quadrature"`` integrates the gamma
    cumulant adaptively and must agree with the closed form.
    """
    _check_method(method)
    _check_interval(t1, t2)
    _check_interval(t2, T)
    lam, sigma = factor.lam, factor.sigma
    alpha, eps = factor.measure.alpha, factor.measure.epsilon
    if method == "quadrature":
        def integrand(s):
            b = sigma * np.expm1(-lam * (T - s)) / lam
            return factor.measure.levy_cumulant(b)

        value, _ = gauss_kronrod(integrand, t1, t2, abs_tol=_QUAD_TOL)
        return value
    scale = eps * lam + sigma
    b1 = sigma * bond_B(factor, t1, T)
    b2 = sigma * bond_B(factor, t2, T)
    # log((eps - b2)/(eps - b1)) via log1p keeps t1 ~ t2 fully accurate
    ratio = (b1 - b2) / (eps - b1)
    return -alpha * sigma * (t2 - t1) / scale - alpha * eps / scale * math.log1p(ratio)


def tilted_time_integral(
    factor: FactorParams,
    t1: float,
    t2: float,
    T: float,
    method: str = "closed",
) -> float:
    """int_{t1}^{t2} sigma e^{-lam(T-s)} int z e^{sigma B(s,T) z} nu(dz) ds.

    The maturity-tilted compensator integral behind forward rates, the
    maturity derivative of A, and the forward-curve calibration condition.
    Requires t1 <= t2 <= T.
    """
    _check_method(method)
    _check_interval(t1, t2)
    _check_interval(t2, T)
    lam, sigma = factor.lam, factor.sigma
    eps = factor.measure.epsilon
    if method == "quadrature":
        def integrand(s):
            b = sigma * np.expm1(-lam * (T - s)) / lam
            return sigma * np.exp(-lam * (T - s)) * factor.measure.tilted_mean(b)

        value, _ = gauss_kronrod(integrand, t1, t2, abs_tol=_QUAD_TOL)
        return value
    alpha = factor.measure.alpha
    b1 = sigma * bond_B(factor, t1, T)
    b2 = sigma * bond_B(factor, t2, T)
    return alpha * eps / (eps - b2) - alpha * eps / (eps - b1)


def bond_A(
    factor: FactorParams,
    floor: FloorFunction,
    n_factors: int,
    t: float,
    T: float,
    method: str = "closed",
) -> float:
    """Affine intercept A(t,T) with the floor shared equally across factors.

    A(t,T) = -(1/n) int_t^T mu(s) ds + int_t^T cum(sigma B(s,T)) ds.
    """
    _check_interval(t, T)
    return (
        -floor.integral(t, T) / n_factors
        + cumulant_time_integral(factor, t, T, T, method=method)
    )


def bond_A_dT(
    factor: FactorParams,
    floor: FloorFunction,
    n_factors: int,
    t: float,
    T: float,
    method: str = "closed",
) -> float:
    """Maturity derivative of A: -mu(T)/n minus the tilted compensator.

    In closed form the tilted integral over [t, T] telescopes to
    -cum(sigma B(t,T)), so  dA/dT = -mu(T)/n + cum(sigma B(t,T)).
    """
    _check_interval(t, T)
    share = -floor.value(T) / n_factors
    if method == "quadrature":
        return share - tilted_time_integral(factor, t, T, T, method="quadrature")
    b = factor.sigma * bond_B(factor, t, T)
    return share + float(factor.measure.levy_cumulant(b))


@dataclass(frozen=True)
class AffineCoefficients:
    """Per-factor affine intercepts and slopes of log P(t,T)."""

    a: np.ndarray
    b: np.ndarray

    def log_price(self, state: np.ndarray) -> float:
        return float(np.sum(self.a) + self.b @ state)


def affine_coefficients(
    spec: ModelSpec,
    t: float,
    T: float,
    method: str = "closed",
) -> AffineCoefficients:
    _check_interval(t, T)
    n = spec.n_factors
    a = np.array(
        [bond_A(f, spec.floor, n, t, T, method=method) for f in spec.factors]
    )
    b = np.array([bond_B(f, t, T) for f in spec.factors])
    return AffineCoefficients(a=a, b=b)


def _state_or_initial(spec: ModelSpec, state) -> np.ndarray:
    if state is None:
        return spec.initial_state()
    state = np.asarray(state, dtype=float)
    if state.shape != (spec.n_factors,):
        raise ValueError("state must hold one value per factor")
    return state


def bond_price(
    spec: ModelSpec,
    t: float,
    T: float,
    state=None,
    method: str = "closed",
) -> float:
    """Zero-coupon bond price exp(sum_k [A_k + B_k X_k]) at the given state.

    ``state`` defaults to the time-0 factor values, which prices the bond at
    t = 0.  Strictly positive; equals 1 at t = T; bounded above by
    exp(-int_t^T mu) whenever every factor value is nonnegative.
    """
    require_valid(spec)
    if T > spec.horizon:
        raise ValueError("T exceeds the model horizon")
    state = _state_or_initial(spec, state)
    log_p = -spec.floor.integral(t, T)
    for f, x in zip(spec.factors, state):
        log_p += cumulant_time_integral(f, t, T, T, method=method)
        log_p += bond_B(f, t, T) * x
    return math.exp(log_p)


def forward_rate(
    spec: ModelSpec,
    t: float,
    T: float,
    state=None,
    method: str = "closed",
) -> float:
    """Instantaneous forward rate f(t,T) = -d/dT log P(t,T).

    f(t,T) = mu(T) + sum_k int_t^T sigma e^{-lam(T-s)} tilted-mean ds
           + sum_k X_k e^{-lam (T-t)},
    which collapses to mu(T) - sum_k cum(sigma B_k(t,T)) + decayed state in
    closed form.  Satisfies f(t,t) = r(t).
    """
    require_valid(spec)
    _check_interval(t, T)
    if T > spec.horizon:
        raise ValueError("T exceeds the model horizon")
    state = _state_or_initial(spec, state)
    rate = float(spec.floor.value(T))
    for f, x in zip(spec.factors, state):
        rate += tilted_time_integral(f, t, T, T, method=method)
        rate += x * math.exp(-f.lam * (T - t))
    return rate


def yield_curve(spec: ModelSpec, t: float, T: float, state=None) -> float:
    """Continuously-compounded spot rate R(t,T) = log P(t,T) / (t - T)."""
    if T <= t:
        raise ValueError("need T > t")
    return math.log(bond_price(spec, t, T, state)) / (t - T)


@dataclass(frozen=True)
class ForwardCurve:
    """Initial forward curve f(0,T) on a sorted maturity grid."""

    maturities: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        ms = np.asarray(self.maturities, dtype=float)
        rs = np.asarray(self.rates, dtype=float)
        if ms.ndim != 1 or ms.size == 0:
            raise ValueError("maturity grid must be a nonempty 1-d array")
        if ms.shape != rs.shape:
            raise ValueError("maturities and rates must match in length")
        if np.any(np.diff(ms) <= 0):
            raise ValueError("maturity grid must be strictly increasing")
        if not (np.all(np.isfinite(ms)) and np.all(np.isfinite(rs))):
            raise ValueError("curve entries must be finite")
        object.__setattr__(self, "maturities", ms)
        object.__setattr__(self, "rates", rs)

    @classmethod
    def from_csv(cls, path) -> "ForwardCurve":
        """Read the ``maturity,forward_rate`` CSV interchange format."""
        maturities, rates = [], []
        with open(path, "r", encoding="utf-8", newline="") as handle:
            lines = [ln.strip() for ln in handle if ln.strip()]
        if not lines or lines[0] != "maturity,forward_rate":
            raise ValueError("expected header 'maturity,forward_rate'")
        for row_number, line in enumerate(lines[1:], start=2):
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"row {row_number}: expected 2 columns")
            try:
                maturities.append(float(parts[0]))
                rates.append(float(parts[1]))
            except ValueError as exc:
                raise ValueError(f"row {row_number}: {exc}") from None
        return cls(np.array(maturities), np.array(rates))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write("maturity,forward_rate\n")
            for m, r in zip(self.maturities, self.rates):
                handle.write(f"{m:.17g},{r:.17g}\n")


def calibrate_floor(
    factors: Sequence[FactorParams],
    market: ForwardCurve,
) -> CalibratedFloor:
    """Floor that reproduces a given initial forward curve exactly.

    mu(T) = f_M(0,T) - sum_k ( x_k e^{-lam T} + tilted compensator over [0,T] ),
    evaluated on the market grid and stored as a piecewise-linear floor.
    Rebuilding the model with this floor returns f(0,T) = f_M(0,T) at every
    knot up to roundoff.
    """
    factors = tuple(factors)
    if not factors:
        raise ValueError("need at least one factor")
    levels = []
    for T, f_mkt in zip(market.maturities, market.rates):
        adj = 0.0
        for f in factors:
            adj += f.x0 * math.exp(-f.lam * T)
            adj += tilted_time_integral(f, 0.0, T, T)
        levels.append(f_mkt - adj)
    return CalibratedFloor(tuple(market.maturities), tuple(levels))


@dataclass(frozen=True)
class MomentFitResult:
    """Outcome of a moment-matching fit."""

    spec: ModelSpec
    residual: float
    converged: bool
    evaluations: int


def _unpack_candidate(
    params: np.ndarray, n: int, x0s: np.ndarray, template: ModelSpec
) -> ModelSpec:
    """Spec for packed parameters: per factor (lam, sigma, alpha, eps), then
    the constant floor level."""
    factors = []
    for k in range(n):
        lam, sigma, alpha, eps = params[4 * k: 4 * k + 4]
        factors.append(
            FactorParams(
                lam=float(lam),
                sigma=float(sigma),
                x0=float(x0s[k]),
                measure=type(template.factors[k].measure)(float(alpha), float(eps)),
            )
        )
    return ModelSpec(
        factors=tuple(factors),
        floor=ConstantFloor(float(params[-1])),
        horizon=template.horizon,
    )


def match_moments(
    observations: Sequence,
    n: int,
    initial: ModelSpec,
    max_iterations: int = 10_000,
    rel_tol: float = 1e-10,
) -> MomentFitResult:
    """Fit (lam, sigma, alpha, eps) per factor plus a constant floor level to
    observed (t, mean, variance) triples by coordinate-wise golden-section
    descent on the squared relative moment error.

    The moment curves depend on (sigma, alpha, eps) only through
    sigma*alpha/eps and sigma^2*alpha/eps^2, so alpha and the ratio
    sigma/eps are identified while sigma and eps individually are not;
    the fit stays near the initial guess along that flat direction.
    Initial factor values x_k are taken from ``initial`` and held fixed.
    Never raises on a poor fit: the result reports the residual and whether
    the descent converged.
    """
    obs = np.asarray([(t, m, v) for (t, m, v) in observations], dtype=float)
    if obs.shape[0] < 8 * n:
        raise ValueError(f"need at least {8 * n} observations to identify {n} factor(s)")
    if initial.n_factors != n:
        raise ValueError("initial guess must have n factors")
    times, means_obs, vars_obs = obs[:, 0], obs[:, 1], obs[:, 2]
    if times.max() > initial.horizon:
        raise ValueError("observation times exceed the model horizon")
    x0s = initial.initial_state()

    mean_scale = np.where(np.abs(means_obs) > 1e-12, np.abs(means_obs), 1.0)
    var_scale = np.where(np.abs(vars_obs) > 1e-12, np.abs(vars_obs), 1.0)

    evaluations = 0

    from .model import factor_mean_term, factor_var_term

    obs_rows = [
        (float(t), float(m), float(v), float(ms), float(vs))
        for t, m, v, ms, vs in zip(times, means_obs, vars_obs, mean_scale, var_scale)
    ]
    x0_list = [float(x) for x in x0s]

    def objective(params: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        level = params[-1]
        facs = []
        for k in range(n):
            lam, sigma, alpha, eps = params[4 * k: 4 * k + 4]
            facs.append((lam, sigma, alpha / eps, 2.0 * alpha / eps**2))
        total = 0.0
        for t, m_obs, v_obs, m_sc, v_sc in obs_rows:
            m = level
            v = 0.0
            for (lam, sigma, mean_jump, second), x0 in zip(facs, x0_list):
                m += factor_mean_term(lam, sigma, mean_jump, x0, t)
                v += factor_var_term(lam, sigma, second, t)
            total += ((m - m_obs) / m_sc) ** 2 + ((v - v_obs) / v_sc) ** 2
        return total

    params = np.empty(4 * n + 1)
    for k, f in enumerate(initial.factors):
        params[4 * k: 4 * k + 4] = (f.lam, f.sigma, f.measure.alpha, f.measure.epsilon)
    params[-1] = initial.floor.value(0.0)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0

    def golden_line(idx: int, best: float) -> float:
        # positive parameters move multiplicatively, the floor level additively
        multiplicative = idx < 4 * n
        center = params[idx]
        level_step = max(abs(center), 0.01)
        width = 0.6
        for _ in range(6):
            lo, hi = -width, width
            trial = params.copy()

            def along(offset):
                if multiplicative:
                    trial[idx] = center * math.exp(offset)
                else:
                    trial[idx] = center + offset * level_step
                return objective(trial)

            c = hi - invphi * (hi - lo)
            d = lo + invphi * (hi - lo)
            fc, fd = along(c), along(d)
            while hi - lo > 1e-7:
                if fc < fd:
                    hi, d, fd = d, c, fc
                    c = hi - invphi * (hi - lo)
                    fc = along(c)
                else:
                    lo, c, fc = c, d, fd
                    d = lo + invphi * (hi - lo)
                    fd = along(d)
            offset_star = 0.5 * (lo + hi)
            f_star = along(offset_star)
            if f_star < best:
                if multiplicative:
                    params[idx] = center * math.exp(offset_star)
                else:
                    params[idx] = center + offset_star * level_step
                return f_star
            width *= 2.0
        return best

    best = objective(params)
    converged = best == 0.0
    searches = 0
    while not converged and searches < max_iterations:
        before = best
        for idx in range(params.size):
            best = golden_line(idx, best)
            searches += 1
            if searches >= max_iterations:
                break
        if before > 0 and (before - best) / before < rel_tol:
            converged = True

    return MomentFitResult(
        spec=_unpack_candidate(params, n, x0s, initial),
        residual=best,
        converged=converged,
        evaluations=evaluations,
    )
