"""Travelling waves and homogenization for periodic flame-front propagation.

The library solves the free-boundary travelling-wave system for a flame
front moving through a horizontally striated periodic medium (curvature-
damped front equation coupled to an advection-diffusion temperature field
through an Arrhenius-type burning rate), and computes the homogenized
objects that describe the small-period limit: the speed curve over the
curvature-to-period ratio, its derivative, front correctors, second-order
oscillation profiles, and empirical convergence sweeps.
"""

from .errors import ConfigurationError, ConvergenceError, QuenchError
from .front import (FrontConfig, FrontProfile, FrontSolution,
                    arctan_bound_check, solve_front, speed_identity_residual)
from .homog import (Corrector, CorrectorLimitsReport, HomogenizedWave, MuRule,
                    SecondOrderProfile, SpeedCurve, SweepEntry, SweepResult,
                    compute_speed_curve, corrector_limits_check,
                    derivative_from_corrector, epsilon_sweep, fitted_orders,
                    homogenized_speed, rtilde_integral_check,
                    second_order_profile, speed_derivative_formula)
from .medium import (ArrheniusRate, AssumptionReport, CallableRate,
                     CombustionRate, MediumSpec, PeriodicField, SmallPeriodCheck,
                     TabulatedRate, check_small_period, effective_rate,
                     rate_at_temperature, validate_assumptions)
from .temperature import (MeshConfig, StripMesh, TemperatureBounds,
                          TemperatureField, dump_field_binary, dump_field_csv,
                          flux_balance_defect, load_field_binary,
                          solve_temperature, trace, verify_temperature_bounds)
from .wave import (Certificate, FixedPointConfig, TravellingWave, WaveResiduals,
                   lower_bound_certificate, solve_travelling_wave, wave_residuals)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "ConvergenceError", "QuenchError",
    "PeriodicField", "CombustionRate", "ArrheniusRate", "TabulatedRate",
    "CallableRate", "MediumSpec", "rate_at_temperature", "effective_rate",
    "SmallPeriodCheck", "check_small_period", "AssumptionReport",
    "validate_assumptions",
    "FrontConfig", "FrontProfile", "FrontSolution", "solve_front",
    "speed_identity_residual", "arctan_bound_check",
    "MeshConfig", "StripMesh", "TemperatureField", "TemperatureBounds",
    "solve_temperature", "trace", "verify_temperature_bounds",
    "flux_balance_defect", "dump_field_csv", "dump_field_binary",
    "load_field_binary",
    "FixedPointConfig", "Certificate", "TravellingWave", "WaveResiduals",
    "solve_travelling_wave", "wave_residuals", "lower_bound_certificate",
    "Corrector", "HomogenizedWave", "homogenized_speed",
    "derivative_from_corrector", "speed_derivative_formula",
    "rtilde_integral_check", "SecondOrderProfile", "second_order_profile",
    "SpeedCurve", "compute_speed_curve", "CorrectorLimitsReport",
    "corrector_limits_check", "MuRule", "SweepEntry", "SweepResult",
    "epsilon_sweep", "fitted_orders",
    "__version__",
]
