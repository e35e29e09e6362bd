"""Linear stability toolkit for two-dimensional compressible elastic vortex sheets."""

from .errors import DomainError, NumericalFailure, SingularDenominatorError
from .state import BackgroundState, Classification, PressureLaw, sound_speed, stability_window, elastic_parameters
from .dispersion import (
    FrequencyPoint,
    bound_constants,
    check_simple_root,
    complex_sqrt_halfplane,
    growth_rate,
    mu_pair,
    quartic_roots,
    symbol_direct,
    symbol_reduced,
    verify_x2_excluded,
)
from .modes import build_mode, interior_residual, boundary_residuals
from .hadamard import find_n_star, illposedness_table, make_bump
from .simulator import Grid1D, assemble_generator, evolve, measure_growth, spectral_abscissa, energy_monitor

__version__ = "0.1.0"
