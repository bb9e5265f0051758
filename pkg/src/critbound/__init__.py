"""Critical-case semilinear difference equations x(n+1) = e(phi) x(n) + f(x(n)) + y(n)."""

from .circle import GOLDEN, RotationNumber, arg_star, circle_distance, e, reduce, rotate
from .conditions import certify_conditions, forcing_window_norm, phi_profile, uniform_gap
from .dynamics import (SystemSpec, Trajectory, boundedness_probe, simulate, step,
                       verify_recurrence, visiting_moments, window_drift)
from .envelope import (EnvelopeInput, PowerLawParams, powerlaw_envelope,
                       quantitative_envelope)
from .ergodic import (birkhoff_average, covering_measure, covering_number, discrepancy,
                      gap_spectrum, occupation_fraction)
from .errors import (ConfigError, FamilyError, NumericAbort, PreconditionError,
                     UndefinedArgumentError)
from .systems import (make_ce_decimal_warp, make_ce_orbit_switch, make_ce_slow_drift,
                      make_contraction, make_example_1_2, make_powerlaw, make_resonant,
                      make_rotation, make_system)

__version__ = "0.1.0"

__all__ = [
    "GOLDEN", "RotationNumber", "arg_star", "circle_distance", "e", "reduce", "rotate",
    "certify_conditions", "forcing_window_norm", "phi_profile", "uniform_gap",
    "SystemSpec", "Trajectory", "boundedness_probe", "simulate", "step",
    "verify_recurrence", "visiting_moments", "window_drift",
    "EnvelopeInput", "PowerLawParams", "powerlaw_envelope", "quantitative_envelope",
    "birkhoff_average", "covering_measure", "covering_number", "discrepancy",
    "gap_spectrum", "occupation_fraction",
    "ConfigError", "FamilyError", "NumericAbort", "PreconditionError",
    "UndefinedArgumentError",
    "make_ce_decimal_warp", "make_ce_orbit_switch", "make_ce_slow_drift",
    "make_contraction", "make_example_1_2", "make_powerlaw", "make_resonant",
    "make_rotation", "make_system",
]
