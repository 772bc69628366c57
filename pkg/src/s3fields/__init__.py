"""Spectral geometry and energy minimization for unit vector fields on S^3."""

from .config import RunConfig, load_config_file
from .fields import FramedField, VariationField, generate_field
from .harmonics import HarmonicBasis, QuadratureGrid, build_basis, hopf_grid
from .operators import SpectrumEntry, closed_form_spectrum, hermitian_eigen, spectrum_report
from .variational import (
    EnergyReport,
    FlowResult,
    HopfClassification,
    classify_hopf,
    energy_identity_report,
    gradient_flow,
    hessian,
    map_energy,
    vertical_energy,
)

__all__ = [
    "RunConfig",
    "load_config_file",
    "FramedField",
    "VariationField",
    "generate_field",
    "HarmonicBasis",
    "QuadratureGrid",
    "build_basis",
    "hopf_grid",
    "SpectrumEntry",
    "closed_form_spectrum",
    "hermitian_eigen",
    "spectrum_report",
    "EnergyReport",
    "FlowResult",
    "HopfClassification",
    "classify_hopf",
    "energy_identity_report",
    "gradient_flow",
    "hessian",
    "map_energy",
    "vertical_energy",
]

__version__ = "0.1.0"
