"""Fractional dispersion of free Schrödinger evolution: spectral solvers,
the fractional uncertainty principle, periodic (Talbot) limits and the
arithmetic of the resulting jump measure."""

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError, InconsistencyError, InvalidInput
from .spectral import ComplexField, Grid1D, SpectralField, gaussian_datum
from .dispersion import DispersionCurve, h_direct, h_large_t, h_seminorm, dispersion_curve
from .uncertainty import GroundState, ground_state, uncertainty_product

__all__ = [
    "ComplexField", "ConvergenceError", "DispersionCurve", "DomainError", "Grid1D",
    "GroundState", "InconsistencyError", "InvalidInput", "SpectralField",
    "dispersion_curve", "gaussian_datum", "ground_state", "h_direct", "h_large_t",
    "h_seminorm", "uncertainty_product",
]
