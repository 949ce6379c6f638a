"""Pure-jump mean-reverting multi-factor short-rate model toolkit."""

from .model import (
    CalibratedFloor,
    ConstantFloor,
    FactorParams,
    FloorFunction,
    GammaJumpMeasure,
    JumpMeasure,
    ModelSpec,
    PiecewiseLinearFloor,
    SummedFloor,
    ValidationReport,
    conditional_moments,
    levy_cumulant,
    require_valid,
    tilted_mean,
    validate,
)
from .curves import (
    AffineCoefficients,
    ForwardCurve,
    MomentFitResult,
    affine_coefficients,
    bond_A,
    bond_A_dT,
    bond_B,
    bond_B_dT,
    bond_price,
    calibrate_floor,
    cumulant_time_integral,
    forward_rate,
    match_moments,
    tilted_time_integral,
    yield_curve,
)
from .transforms import (
    AffineExponent,
    DensitySettings,
    factor_exponent,
    levy_char_fn,
    levy_density,
    levy_zero_atom,
    short_rate_char_fn,
    short_rate_mgf,
)
from .simulation import (
    JumpRecord,
    MonteCarloEstimate,
    SimulatedPath,
    bond_path,
    evolve_factor,
    export_jumps_csv,
    export_paths_csv,
    hjm_forward_path,
    integrated_rate,
    mc_bond_curve,
    mc_bond_price,
    mc_discounted_bond,
    mc_option_price,
    mc_short_rate_samples,
    simulate_jumps,
    simulate_path,
    substream,
)
from .options import (
    FourierSettings,
    OptionSpec,
    PricingError,
    call_drift_exponent,
    call_jump_coefficient,
    call_jump_exponent,
    fourier_call_price,
    fourier_call_price_at,
    payoff_fourier_weight,
)
from .multicurve import (
    BondOrdering,
    DualCurveSpec,
    bond_ordering_check,
    effective_spec,
    effective_state,
    fictitious_bond_price,
    forward_spread,
    libor_forward,
    libor_path_closed_form,
    ois_forward,
)
from .quadrature import QuadratureError, gauss_kronrod

__version__ = "0.1.0"
