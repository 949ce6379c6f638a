#!/usr/bin/env python3
"""Monte Carlo convergence study for the Fourier call price.

Doubles the path count repeatedly and reports the estimate, its standard
error, and the z-score against the Fourier price: the error should shrink
like 1/sqrt(paths) while the z-scores stay order one.
"""

import argparse

from jumpcurve import (
    ConstantFloor,
    FactorParams,
    GammaJumpMeasure,
    ModelSpec,
    OptionSpec,
    fourier_call_price,
    mc_option_price,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=90_210)
    parser.add_argument("--max-paths", type=int, default=512_000)
    parser.add_argument("--strike", type=float, default=0.94)
    args = parser.parse_args()

    spec = ModelSpec(
        factors=(
            FactorParams(lam=1.0, sigma=1.0, x0=0.01, measure=GammaJumpMeasure(2.0, 10.0)),
        ),
        floor=ConstantFloor(0.02),
        horizon=10.0,
    )
    option = OptionSpec(strike=args.strike, option_maturity=0.5, bond_maturity=1.0)
    reference = fourier_call_price(spec, option)
    print(f"fourier price: {reference:.10f}")
    print("paths       estimate       std error     z")
    paths = 1000
    while paths <= args.max_paths:
        est = mc_option_price(spec, option, paths, seed=args.seed)
        z = abs(est.value - reference) / est.std_error
        print(f"{paths:8d}  {est.value:.10f}  {est.std_error:.3e}  {z:5.2f}")
        paths *= 2


if __name__ == "__main__":
    main()
