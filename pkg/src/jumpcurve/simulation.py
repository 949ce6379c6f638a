"""Exact event-driven simulation and Monte Carlo estimators.

Paths are simulated without discretization error: jump epochs come from
exponential inter-arrivals, factors decay in closed form between jumps,

    X_k(t) = x_k e^{-lam t} + sigma_k sum_{u_j <= t} e^{-lam (t - u_j)} z_j,

and the integrated short rate is evaluated exactly through its Volterra
representation

    I_t = int_0^t mu(s) ds - sum_k x_k B_k(0,t)
          - sum_k sum_{u_j <= t} sigma_k B_k(u_j, t) z_j.

Every estimator in this module is the independent oracle for an analytic
formula elsewhere in the library, so the random-number contract is strict:
draws for (seed, path, factor) come from a counter-based Philox stream keyed
by exactly that triple, making each path's jump record bit-reproducible
regardless of how many paths run or in what order.  Worker threads (capped by
the ``JUMPCURVE_THREADS`` environment variable, 0 = auto) only partition the
path index range; per-path values and the fixed-order pairwise reduction are
unchanged by the partitioning.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .curves import bond_B, bond_price, cumulant_time_integral, tilted_time_integral
from .model import GammaJumpMeasure, ModelSpec, require_valid

__all__ = [
    "JumpRecord",
    "SimulatedPath",
    "MonteCarloEstimate",
    "substream",
    "simulate_jumps",
    "evolve_factor",
    "simulate_path",
    "integrated_rate",
    "bond_path",
    "hjm_forward_path",
    "mc_bond_price",
    "mc_bond_curve",
    "mc_discounted_bond",
    "mc_option_price",
    "mc_short_rate_samples",
    "export_paths_csv",
    "export_jumps_csv",
]

_FACTOR_STRIDE = 1 << 16


@dataclass(frozen=True)
class JumpRecord:
    """Jump epochs and matched positive jump sizes of one factor's driver."""

    times: np.ndarray
    sizes: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        sizes = np.asarray(self.sizes, dtype=float)
        if times.shape != sizes.shape or times.ndim != 1:
            raise ValueError("times and sizes must be 1-d arrays of equal length")
        if times.size and np.any(np.diff(times) <= 0):
            raise ValueError("jump times must be strictly increasing")
        if np.any(sizes <= 0):
            raise ValueError("jump sizes must be positive")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "sizes", sizes)

    @property
    def count(self) -> int:
        return int(self.times.size)


@dataclass(frozen=True)
class SimulatedPath:
    """One exact path: jump records plus trajectories on an evaluation grid."""

    grid: np.ndarray
    jumps: tuple
    factors: np.ndarray
    short_rate: np.ndarray
    integrated: np.ndarray


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    std_error: float
    n_paths: int


def substream(seed: int, path_index: int, factor_index: int) -> Generator:
    """Counter-based random stream for one (seed, path, factor) triple."""
    key = np.array(
        [seed, path_index * _FACTOR_STRIDE + factor_index], dtype=np.uint64
    )
    return Generator(Philox(key=key))


class _StreamPool:
    """Reuses one Philox generator, rekeying it per (path, factor).

    Produces streams bit-identical to :func:`substream` while avoiding the
    per-path construction cost in tight Monte Carlo loops.
    """

    def __init__(self, seed: int):
        self._seed = seed
        self._bitgen = Philox(key=np.array([0, 0], dtype=np.uint64))
        self._gen = Generator(self._bitgen)
        self._state = self._bitgen.state

    def stream(self, path_index: int, factor_index: int) -> Generator:
        st = self._state
        st["state"]["key"][0] = self._seed
        st["state"]["key"][1] = path_index * _FACTOR_STRIDE + factor_index
        st["state"]["counter"][:] = 0
        st["buffer_pos"] = 4
        self._bitgen.state = st
        return self._gen


def _draw_jumps(measure: GammaJumpMeasure, horizon: float, rng: Generator):
    """Raw (times, sizes) arrays of one compound-Poisson record."""
    alpha = measure.alpha
    mean_count = alpha * horizon
    block = max(16, int(mean_count + 10.0 * math.sqrt(mean_count) + 16.0))
    gaps = -np.log1p(-rng.random(block)) / alpha
    times = np.cumsum(gaps)
    while times[-1] <= horizon:
        gaps = -np.log1p(-rng.random(block)) / alpha
        times = np.concatenate([times, times[-1] + np.cumsum(gaps)])
    times = times[times <= horizon]
    sizes = measure.sample_jump(rng, times.size)
    return times, sizes


def simulate_jumps(
    measure: GammaJumpMeasure, horizon: float, rng: Generator
) -> JumpRecord:
    """Exact compound-Poisson record on [0, horizon].

    Jump epochs accumulate Exp(alpha) inter-arrivals truncated at the
    horizon; sizes are i.i.d. Exp(epsilon) drawn by inverse CDF.
    """
    if horizon <= 0:
        raise ValueError("need horizon > 0")
    times, sizes = _draw_jumps(measure, horizon, rng)
    return JumpRecord(times=times, sizes=sizes)


def evolve_factor(factor, jumps: JumpRecord, grid) -> np.ndarray:
    """Exact factor trajectory on the grid: decayed start plus decayed jumps."""
    grid = np.asarray(grid, dtype=float)
    x = factor.x0 * np.exp(-factor.lam * grid)
    if jumps.count:
        lag = grid[:, None] - jumps.times[None, :]
        decayed = (lag >= 0) * np.exp(-factor.lam * np.maximum(lag, 0.0))
        x = x + factor.sigma * decayed @ jumps.sizes
    return x


def _integrated_at(spec: ModelSpec, jumps, t: float) -> float:
    total = spec.floor.integral(0.0, t)
    for f, rec in zip(spec.factors, jumps):
        total -= f.x0 * bond_B(f, 0.0, t)
        if rec.count:
            mask = rec.times <= t
            if np.any(mask):
                b = np.expm1(-f.lam * (t - rec.times[mask])) / f.lam
                total -= f.sigma * float(b @ rec.sizes[mask])
    return total


def _integrated_on_grid(spec: ModelSpec, jumps, grid: np.ndarray) -> np.ndarray:
    total = np.array([spec.floor.integral(0.0, float(g)) for g in grid])
    for f, rec in zip(spec.factors, jumps):
        total -= f.x0 * np.expm1(-f.lam * grid) / f.lam
        if rec.count:
            lag = grid[:, None] - rec.times[None, :]
            b = np.expm1(-f.lam * np.maximum(lag, 0.0)) / f.lam
            total -= f.sigma * ((lag >= 0) * b) @ rec.sizes
    return total


def simulate_path(
    spec: ModelSpec,
    seed: int,
    path_index: int = 0,
    points_per_year: int = 252,
) -> SimulatedPath:
    """Simulate one exact path with its own substream per factor.

    The evaluation grid unions a regular mesh with every jump epoch, so the
    stored trajectories are exact at the jumps themselves.
    """
    require_valid(spec)
    jumps = tuple(
        simulate_jumps(f.measure, spec.horizon, substream(seed, path_index, k))
        for k, f in enumerate(spec.factors)
    )
    mesh = np.linspace(0.0, spec.horizon, int(round(points_per_year * spec.horizon)) + 1)
    grid = np.union1d(mesh, np.concatenate([rec.times for rec in jumps]))
    factors = np.vstack([evolve_factor(f, rec, grid) for f, rec in zip(spec.factors, jumps)])
    short_rate = np.asarray(spec.floor.value(grid)) + factors.sum(axis=0)
    integrated = _integrated_on_grid(spec, jumps, grid)
    return SimulatedPath(
        grid=grid,
        jumps=jumps,
        factors=factors,
        short_rate=short_rate,
        integrated=integrated,
    )


def integrated_rate(spec: ModelSpec, path: SimulatedPath, t: float) -> float:
    """Exact integrated short rate I_t from the path's jump records."""
    if t < path.grid[0] or t > path.grid[-1]:
        raise ValueError("t outside the path's grid span")
    return _integrated_at(spec, path.jumps, t)


def _state_at(spec: ModelSpec, path: SimulatedPath, t: float) -> np.ndarray:
    state = np.empty(spec.n_factors)
    for k, (f, rec) in enumerate(zip(spec.factors, path.jumps)):
        x = f.x0 * math.exp(-f.lam * t)
        if rec.count:
            mask = rec.times <= t
            if np.any(mask):
                x += f.sigma * float(
                    np.exp(-f.lam * (t - rec.times[mask])) @ rec.sizes[mask]
                )
        state[k] = x
    return state


def bond_path(
    spec: ModelSpec,
    path: SimulatedPath,
    t: float,
    T: float,
    method: str = "closed",
) -> float:
    """Pathwise bond price from the stochastic-exponential solution.

    P(t,T) = P(0,T) exp( I_t - sum_k int_0^t cum_k(sigma B_k(s,T)) ds
                         + sum_k sum_{u_j <= t} sigma_k B_k(u_j, T) z_j ),
    which must coincide with the affine formula evaluated at the path's
    state; that identity is the module's central correctness check.
    """
    if t > T:
        raise ValueError("need t <= T")
    log_p = math.log(bond_price(spec, 0.0, T, method=method))
    log_p += integrated_rate(spec, path, t)
    for f, rec in zip(spec.factors, path.jumps):
        log_p -= cumulant_time_integral(f, 0.0, t, T, method=method)
        if rec.count:
            mask = rec.times <= t
            if np.any(mask):
                b = np.expm1(-f.lam * (T - rec.times[mask])) / f.lam
                log_p += f.sigma * float(b @ rec.sizes[mask])
    return math.exp(log_p)


def hjm_forward_path(spec: ModelSpec, path: SimulatedPath, t: float, T: float) -> float:
    """Forward rate along a path from its HJM-type jump representation.

    f(t,T) = f(0,T) + sum_k ( sum_{u_j <= t} sigma_k z_j e^{-lam_k (T - u_j)}
                              - tilted compensator over [0, t] ).
    Coincides pathwise with the affine forward-rate formula.
    """
    from .curves import forward_rate

    if t > T:
        raise ValueError("need t <= T")
    rate = forward_rate(spec, 0.0, T)
    for f, rec in zip(spec.factors, path.jumps):
        rate -= tilted_time_integral(f, 0.0, t, T)
        if rec.count:
            mask = rec.times <= t
            if np.any(mask):
                rate += f.sigma * float(
                    np.exp(-f.lam * (T - rec.times[mask])) @ rec.sizes[mask]
                )
    return rate


def _worker_count() -> int:
    raw = os.environ.get("JUMPCURVE_THREADS", "").strip()
    if not raw:
        return 1
    count = int(raw)
    if count < 0:
        raise ValueError("JUMPCURVE_THREADS must be >= 0")
    if count == 0:
        return min(4, os.cpu_count() or 1)
    return count


def _path_values(seed: int, n_paths: int, per_path) -> np.ndarray:
    """Evaluate a per-path functional for every path index, in path order."""
    out = np.empty(n_paths)
    workers = _worker_count()
    if workers <= 1:
        pool = _StreamPool(seed)
        for p in range(n_paths):
            out[p] = per_path(pool, p)
        return out

    chunk = (n_paths + workers - 1) // workers

    def run(start: int) -> None:
        pool = _StreamPool(seed)
        for p in range(start, min(start + chunk, n_paths)):
            out[p] = per_path(pool, p)

    with ThreadPoolExecutor(max_workers=workers) as pool_exec:
        list(pool_exec.map(run, range(0, n_paths, chunk)))
    return out


def _estimate(values: np.ndarray) -> MonteCarloEstimate:
    n = values.size
    mean = float(np.sum(values) / n)
    if n > 1:
        se = float(np.std(values, ddof=1) / math.sqrt(n))
    else:
        se = float("nan")
    return MonteCarloEstimate(value=mean, std_error=se, n_paths=n)


def _check_mc_args(spec: ModelSpec, T: float, n_paths: int) -> None:
    require_valid(spec)
    if T > spec.horizon:
        raise ValueError("maturity exceeds the model horizon")
    if n_paths < 100:
        raise ValueError("need at least 100 paths")


def mc_bond_price(spec: ModelSpec, T: float, n_paths: int, seed: int) -> MonteCarloEstimate:
    """Monte Carlo bond price: sample mean of exp(-I_T) over exact paths."""
    _check_mc_args(spec, T, n_paths)
    floor_part = spec.floor.integral(0.0, T)
    det = floor_part - sum(f.x0 * bond_B(f, 0.0, T) for f in spec.factors)
    params = [(f.lam, f.sigma, f.measure) for f in spec.factors]

    def per_path(pool, p):
        i_T = det
        for k, (lam, sigma, measure) in enumerate(params):
            times, sizes = _draw_jumps(measure, T, pool.stream(p, k))
            if times.size:
                b = np.expm1(-lam * (T - times)) / lam
                i_T -= sigma * float(b @ sizes)
        return math.exp(-i_T)

    return _estimate(_path_values(seed, n_paths, per_path))


def mc_bond_curve(spec: ModelSpec, maturities, n_paths: int, seed: int):
    """Bond-price estimates for several maturities from one shared path set."""
    maturities = [float(T) for T in maturities]
    t_max = max(maturities)
    _check_mc_args(spec, t_max, n_paths)
    params = [(f.lam, f.sigma, f.measure) for f in spec.factors]
    det = np.array(
        [
            spec.floor.integral(0.0, T)
            - sum(f.x0 * bond_B(f, 0.0, T) for f in spec.factors)
            for T in maturities
        ]
    )
    values = np.empty((len(maturities), n_paths))

    def per_path(pool, p):
        i_T = det.copy()
        for k, (lam, sigma, measure) in enumerate(params):
            times, sizes = _draw_jumps(measure, t_max, pool.stream(p, k))
            for j, T in enumerate(maturities):
                mask = times <= T
                if np.any(mask):
                    b = np.expm1(-lam * (T - times[mask])) / lam
                    i_T[j] -= sigma * float(b @ sizes[mask])
        values[:, p] = np.exp(-i_T)
        return 0.0

    _path_values(seed, n_paths, per_path)
    return [_estimate(values[j]) for j in range(len(maturities))]


def mc_discounted_bond(
    spec: ModelSpec, t: float, T: float, n_paths: int, seed: int
) -> MonteCarloEstimate:
    """Sample mean of exp(-I_t) P(t,T); a martingale check against P(0,T)."""
    _check_mc_args(spec, T, n_paths)
    if t > T:
        raise ValueError("need t <= T")
    if t == 0.0:
        price = bond_price(spec, 0.0, T)
        return MonteCarloEstimate(value=price, std_error=0.0, n_paths=n_paths)
    params = [(f.lam, f.sigma, f.measure) for f in spec.factors]
    floor_part = spec.floor.integral(0.0, t)
    det = floor_part - sum(f.x0 * bond_B(f, 0.0, t) for f in spec.factors)
    a_sum = sum(
        cumulant_time_integral(f, t, T, T) for f in spec.factors
    ) - spec.floor.integral(t, T)
    b_coef = [bond_B(f, t, T) for f in spec.factors]
    decay = [math.exp(-f.lam * t) for f in spec.factors]

    def per_path(pool, p):
        exponent = -det + a_sum
        for k, (lam, sigma, measure) in enumerate(params):
            times, sizes = _draw_jumps(measure, t, pool.stream(p, k))
            x_t = spec.factors[k].x0 * decay[k]
            if times.size:
                d = np.exp(-lam * (t - times))
                x_t += sigma * float(d @ sizes)
                exponent += sigma * float(((d - 1.0) / lam) @ sizes)
            exponent += b_coef[k] * x_t
        return math.exp(exponent)

    return _estimate(_path_values(seed, n_paths, per_path))


def mc_option_price(spec: ModelSpec, option, n_paths: int, seed: int) -> MonteCarloEstimate:
    """Monte Carlo call-on-bond price: mean of exp(-I_tau) (P(tau,T) - K)+.

    The bond at expiry is evaluated with the affine formula at the simulated
    state, so this estimator is independent of the Fourier pricer only
    through the pathwise expiry state and discount factor.
    """
    tau, T = option.option_maturity, option.bond_maturity
    _check_mc_args(spec, T, n_paths)
    strike = option.strike
    params = [(f.lam, f.sigma, f.measure) for f in spec.factors]
    det = spec.floor.integral(0.0, tau) - sum(
        f.x0 * bond_B(f, 0.0, tau) for f in spec.factors
    )
    a_sum = sum(
        cumulant_time_integral(f, tau, T, T) for f in spec.factors
    ) - spec.floor.integral(tau, T)
    b_coef = [bond_B(f, tau, T) for f in spec.factors]
    x_det = [f.x0 * math.exp(-f.lam * tau) for f in spec.factors]

    def per_path(pool, p):
        i_tau = det
        log_bond = a_sum
        for k, (lam, sigma, measure) in enumerate(params):
            times, sizes = _draw_jumps(measure, tau, pool.stream(p, k))
            x_tau = x_det[k]
            if times.size:
                d = np.exp(-lam * (tau - times))
                jump_sum = float(d @ sizes)
                x_tau += sigma * jump_sum
                i_tau -= sigma * float(((d - 1.0) / lam) @ sizes)
            log_bond += b_coef[k] * x_tau
        payoff = math.exp(log_bond) - strike
        if payoff <= 0.0:
            return 0.0
        return math.exp(-i_tau) * payoff

    return _estimate(_path_values(seed, n_paths, per_path))


def mc_short_rate_samples(spec: ModelSpec, t: float, n_paths: int, seed: int) -> np.ndarray:
    """Exact samples of r(t), one per path index."""
    _check_mc_args(spec, t, n_paths)
    params = [(f.lam, f.sigma, f.measure) for f in spec.factors]
    base = float(spec.floor.value(t)) + sum(
        f.x0 * math.exp(-f.lam * t) for f in spec.factors
    )

    def per_path(pool, p):
        r = base
        for k, (lam, sigma, measure) in enumerate(params):
            times, sizes = _draw_jumps(measure, t, pool.stream(p, k))
            if times.size:
                r += sigma * float(np.exp(-lam * (t - times)) @ sizes)
        return r

    return _path_values(seed, n_paths, per_path)


def export_paths_csv(paths, destination) -> None:
    """Write trajectories as ``path_id,time,factor_index,X,short_rate,integrated_rate``."""
    with open(destination, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("path_id,time,factor_index,X,short_rate,integrated_rate\n")
        for path_id, path in enumerate(paths):
            n = path.factors.shape[0]
            for i, t in enumerate(path.grid):
                for k in range(n):
                    handle.write(
                        f"{path_id},{t:.17g},{k + 1},{path.factors[k, i]:.17g},"
                        f"{path.short_rate[i]:.17g},{path.integrated[i]:.17g}\n"
                    )


def export_jumps_csv(paths, destination) -> None:
    """Write jump records as ``path_id,factor_index,jump_time,jump_size``."""
    with open(destination, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("path_id,factor_index,jump_time,jump_size\n")
        for path_id, path in enumerate(paths):
            for k, rec in enumerate(path.jumps):
                for t, z in zip(rec.times, rec.sizes):
                    handle.write(f"{path_id},{k + 1},{t:.17g},{z:.17g}\n")
