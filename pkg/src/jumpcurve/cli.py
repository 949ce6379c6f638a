"""Batch command-line front end.

Subcommands wrap the library stages and emit deterministic CSV:

    jumpcurve validate  --config model.json
    jumpcurve curve     --config model.json --output out/
    jumpcurve calibrate --config model.json --market fwd.csv --output out/
    jumpcurve simulate  --config model.json --seed 7 --paths 100 --output out/
    jumpcurve price     --config model.json bond   --maturity 1.0
    jumpcurve price     --config model.json option --strike 0.95 --expiry 0.5 --maturity 1.0

Model configuration file (JSON, schema version 1)::

    {
      "version": 1,
      "horizon": 10.0,
      "floor": {"variant": "constant", "level": 0.02},
      "factors": [
        {"lambda": 1.0, "sigma": 1.0, "x0": 0.01, "alpha": 2.0, "epsilon": 10.0}
      ],
      "spread_floor": {"variant": "constant", "level": 0.005},   # optional:
      "spread_factors": [ ... ],     # presence of any spread_* key or
      "shared_factor_count": 0,      # shared_factor_count enables dual-curve
      "grid": {"start": 0.25, "stop": 5.0, "count": 20},
      "tenor": 0.25,                 # OIS/LIBOR accrual period in the curve table
      "seed": 42,
      "paths": 10000,
      "output": "out"
    }

Floor variants: ``constant`` (``level``) and ``piecewise_linear`` /
``calibrated`` (``times`` + ``values``, flat extrapolation outside).

All numeric CSV fields are written with 17 significant digits, '.' decimal
separator, and LF line endings, so reruns with the same seed are
byte-identical.  Exit codes: 0 success, 1 domain or validation failure,
2 unreadable or unparseable input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .curves import ForwardCurve, bond_price, calibrate_floor, forward_rate, yield_curve
from .model import (
    ConstantFloor,
    FactorParams,
    GammaJumpMeasure,
    ModelSpec,
    PiecewiseLinearFloor,
    CalibratedFloor,
    conditional_moments,
    validate,
)
from .multicurve import (
    DualCurveSpec,
    effective_spec,
    fictitious_bond_price,
    forward_spread,
    libor_forward,
    ois_forward,
)
from .options import OptionSpec, fourier_call_price
from .simulation import (
    export_jumps_csv,
    export_paths_csv,
    mc_bond_price,
    mc_option_price,
    mc_short_rate_samples,
    simulate_path,
)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2


class ConfigError(Exception):
    """Unreadable or structurally invalid configuration input."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _parse_floor(node, label: str):
    if not isinstance(node, dict) or "variant" not in node:
        raise ConfigError(f"{label}: expected an object with a 'variant' key")
    variant = node["variant"]
    if variant == "constant":
        if "level" not in node:
            raise ConfigError(f"{label}: constant floor needs 'level'")
        return ConstantFloor(float(node["level"]))
    if variant in ("piecewise_linear", "calibrated"):
        if "times" not in node or "values" not in node:
            raise ConfigError(f"{label}: piecewise floor needs 'times' and 'values'")
        cls = CalibratedFloor if variant == "calibrated" else PiecewiseLinearFloor
        return cls(tuple(map(float, node["times"])), tuple(map(float, node["values"])))
    raise ConfigError(f"{label}: unknown floor variant {variant!r}")


def _parse_factor(node, label: str) -> FactorParams:
    required = ("lambda", "sigma", "x0", "alpha", "epsilon")
    if not isinstance(node, dict) or any(k not in node for k in required):
        raise ConfigError(f"{label}: factor needs keys {required}")
    return FactorParams(
        lam=float(node["lambda"]),
        sigma=float(node["sigma"]),
        x0=float(node["x0"]),
        measure=GammaJumpMeasure(float(node["alpha"]), float(node["epsilon"])),
    )


def load_config(path: str) -> dict:
    """Parse the JSON model file into specs plus run settings."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    if raw.get("version") != 1:
        raise ConfigError("config 'version' must be 1")
    try:
        horizon = float(raw["horizon"])
        floor = _parse_floor(raw["floor"], "floor")
        factors = tuple(
            _parse_factor(node, f"factors[{i}]")
            for i, node in enumerate(raw["factors"])
        )
    except KeyError as exc:
        raise ConfigError(f"config missing key {exc}") from exc
    spec = ModelSpec(factors=factors, floor=floor, horizon=horizon)
    dual = None
    dual_keys = ("spread_floor", "spread_factors", "shared_factor_count")
    if any(key in raw for key in dual_keys):
        spread_factors = tuple(
            _parse_factor(f, f"spread_factors[{i}]")
            for i, f in enumerate(raw.get("spread_factors", []))
        )
        spread_floor = _parse_floor(
            raw.get("spread_floor", {"variant": "constant", "level": 0.0}),
            "spread_floor",
        )
        try:
            dual = DualCurveSpec(
                base=spec,
                spread_factors=spread_factors,
                spread_floor=spread_floor,
                shared_factor_count=int(raw.get("shared_factor_count", 0)),
            )
        except ValueError as exc:
            raise ConfigError(f"dual-curve extension: {exc}") from exc
    grid = raw.get("grid", {})
    start = float(grid.get("start", 0.25))
    stop = float(grid.get("stop", horizon))
    count = int(grid.get("count", 20))
    if count < 1 or start <= 0 or stop < start:
        raise ConfigError("grid needs 0 < start <= stop and count >= 1")
    return {
        "spec": spec,
        "dual": dual,
        "maturities": np.linspace(start, stop, count),
        "tenor": float(raw.get("tenor", 0.25)),
        "seed": raw.get("seed"),
        "paths": raw.get("paths"),
        "output": raw.get("output", "."),
    }


def _resolve_output(cfg: dict, args) -> str:
    out = args.output if args.output is not None else cfg["output"]
    os.makedirs(out, exist_ok=True)
    return out


def _resolve_seed(cfg: dict, args) -> int:
    seed = args.seed if args.seed is not None else cfg["seed"]
    if seed is None:
        raise ValueError("simulation requires a seed (config 'seed' or --seed)")
    return int(seed)


def _resolve_paths(cfg: dict, args, default=None) -> int:
    paths = args.paths if args.paths is not None else cfg["paths"]
    if paths is None:
        paths = default
    if paths is None:
        raise ValueError("path count required (config 'paths' or --paths)")
    return int(paths)


def cmd_validate(cfg: dict, args) -> int:
    report = validate(cfg["spec"])
    print(str(report))
    return EXIT_OK if report.valid else EXIT_DOMAIN


def cmd_curve(cfg: dict, args) -> int:
    spec, dual = cfg["spec"], cfg["dual"]
    out_dir = _resolve_output(cfg, args)
    destination = os.path.join(out_dir, "curve.csv")
    tenor = cfg["tenor"]
    try:
        with open(destination, "w", encoding="utf-8", newline="\n") as handle:
            if dual is None:
                handle.write("maturity,P,f,R\n")
                for T in cfg["maturities"]:
                    row = (
                        bond_price(spec, 0.0, T),
                        forward_rate(spec, 0.0, T),
                        yield_curve(spec, 0.0, T),
                    )
                    handle.write(",".join([_fmt(T)] + [_fmt(v) for v in row]) + "\n")
            else:
                eff = effective_spec(dual)
                handle.write("maturity,P,P_bar,f,f_bar,g,F_ois,L_libor\n")
                for T in cfg["maturities"]:
                    f_val = forward_rate(spec, 0.0, T)
                    f_bar = forward_rate(eff, 0.0, T)
                    row = (
                        bond_price(spec, 0.0, T),
                        fictitious_bond_price(dual, 0.0, T),
                        f_val,
                        f_bar,
                        f_bar - f_val,
                        ois_forward(dual, 0.0, T, T + tenor),
                        libor_forward(dual, 0.0, T, T + tenor),
                    )
                    handle.write(",".join([_fmt(T)] + [_fmt(v) for v in row]) + "\n")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    print(f"wrote {destination}")
    return EXIT_OK


def cmd_calibrate(cfg: dict, args) -> int:
    spec = cfg["spec"]
    try:
        market = ForwardCurve.from_csv(args.market)
    except OSError as exc:
        print(f"error: cannot read market CSV: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: malformed market CSV: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if market.maturities[-1] > spec.horizon:
        print("error: market maturities exceed the model horizon", file=sys.stderr)
        return EXIT_DOMAIN
    floor = calibrate_floor(spec.factors, market)
    refitted = ModelSpec(factors=spec.factors, floor=floor, horizon=spec.horizon)
    worst = max(
        abs(forward_rate(refitted, 0.0, T) - f_mkt)
        for T, f_mkt in zip(market.maturities, market.rates)
    )
    out_dir = _resolve_output(cfg, args)
    destination = os.path.join(out_dir, "floor.csv")
    with open(destination, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("maturity,mu\n")
        for T, mu in zip(floor.times, floor.values):
            handle.write(f"{_fmt(T)},{_fmt(mu)}\n")
    print(f"wrote {destination}")
    print(f"refit max |f_model - f_market| = {worst:.3e}")
    if worst >= 1e-8:
        print("error: refit error exceeds 1e-8", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_simulate(cfg: dict, args) -> int:
    spec = cfg["spec"] if cfg["dual"] is None else effective_spec(cfg["dual"])
    try:
        seed = _resolve_seed(cfg, args)
        n_paths = _resolve_paths(cfg, args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    out_dir = _resolve_output(cfg, args)
    paths = [simulate_path(spec, seed, p) for p in range(n_paths)]
    try:
        export_paths_csv(paths, os.path.join(out_dir, "paths.csv"))
        export_jumps_csv(paths, os.path.join(out_dir, "jumps.csv"))
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    horizon = spec.horizon
    finals = np.array([p.short_rate[-1] for p in paths])
    mean_hat = float(np.mean(finals))
    var_hat = float(np.var(finals, ddof=1)) if n_paths > 1 else 0.0
    mean_th, var_th = conditional_moments(spec, 0.0, horizon, spec.initial_state())
    se = math.sqrt(var_th / n_paths) if n_paths else float("inf")
    print(
        f"r({_fmt(horizon)}): empirical mean {_fmt(mean_hat)} vs {_fmt(mean_th)}, "
        f"empirical var {_fmt(var_hat)} vs {_fmt(var_th)}"
    )
    if se > 0 and abs(mean_hat - mean_th) > 5.0 * se:
        print("warning: empirical mean deviates by more than 5 standard errors", file=sys.stderr)
    print(f"wrote {out_dir}/paths.csv and {out_dir}/jumps.csv")
    return EXIT_OK


def cmd_price(cfg: dict, args) -> int:
    spec = cfg["spec"]
    try:
        seed = _resolve_seed(cfg, args)
        n_paths = _resolve_paths(cfg, args, default=100_000)
        if args.instrument == "bond":
            analytic = bond_price(spec, 0.0, args.maturity)
            mc = mc_bond_price(spec, args.maturity, n_paths, seed)
        else:
            option = OptionSpec(
                strike=args.strike,
                option_maturity=args.expiry,
                bond_maturity=args.maturity,
                dampening=args.dampening,
            )
            analytic = fourier_call_price(spec, option)
            mc = mc_option_price(spec, option, n_paths, seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    z = abs(analytic - mc.value) / mc.std_error if mc.std_error > 0 else 0.0
    print(f"analytic {_fmt(analytic)}")
    print(f"monte-carlo {_fmt(mc.value)} +/- {_fmt(mc.std_error)} ({mc.n_paths} paths)")
    print(f"z-score {z:.3f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jumpcurve",
        description="Pure-jump lower-bounded short-rate model toolkit",
    )
    parser.add_argument("--config", required=True, help="model JSON file")
    parser.add_argument("--output", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--paths", type=int, default=None, help="Monte Carlo path count")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", help="check the model constraints")
    sub.add_parser("curve", help="emit bond/forward/yield curve CSV")
    calibrate = sub.add_parser("calibrate", help="fit the floor to a market forward curve")
    calibrate.add_argument("--market", required=True, help="maturity,forward_rate CSV")
    sub.add_parser("simulate", help="emit exact path and jump CSVs")
    price = sub.add_parser("price", help="price a bond or bond option")
    price.add_argument("instrument", choices=("bond", "option"))
    price.add_argument("--maturity", type=float, required=True)
    price.add_argument("--expiry", type=float, default=None, help="option expiry")
    price.add_argument("--strike", type=float, default=None)
    price.add_argument("--dampening", type=float, default=1.5)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.command == "price" and args.instrument == "option":
        if args.strike is None or args.expiry is None:
            print("error: option pricing needs --strike and --expiry", file=sys.stderr)
            return EXIT_DOMAIN
    handlers = {
        "validate": cmd_validate,
        "curve": cmd_curve,
        "calibrate": cmd_calibrate,
        "simulate": cmd_simulate,
        "price": cmd_price,
    }
    return handlers[args.command](cfg, args)


if __name__ == "__main__":
    sys.exit(main())
