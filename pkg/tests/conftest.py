"""Shared fixtures and independent numerical oracles."""

import numpy as np
import pytest

from jumpcurve import (
    ConstantFloor,
    FactorParams,
    GammaJumpMeasure,
    ModelSpec,
)
from jumpcurve.quadrature import gauss_kronrod


@pytest.fixture
def baseline_factor():
    return FactorParams(lam=1.0, sigma=1.0, x0=0.01, measure=GammaJumpMeasure(2.0, 10.0))


@pytest.fixture
def baseline_spec(baseline_factor):
    """Single-factor reference model used across the suite."""
    return ModelSpec(
        factors=(baseline_factor,),
        floor=ConstantFloor(0.02),
        horizon=10.0,
    )


@pytest.fixture
def two_factor_spec():
    return ModelSpec(
        factors=(
            FactorParams(lam=1.0, sigma=1.0, x0=0.01, measure=GammaJumpMeasure(2.0, 10.0)),
            FactorParams(lam=0.4, sigma=0.6, x0=0.02, measure=GammaJumpMeasure(1.5, 25.0)),
        ),
        floor=ConstantFloor(0.015),
        horizon=10.0,
    )
