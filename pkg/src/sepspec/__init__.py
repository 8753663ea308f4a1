"""Semiclassical spectra near a hyperbolic barrier top."""

__version__ = "0.1.0"

from .potential import (  # noqa: E402
    ParseError,
    PotentialModel,
    ValidationReport,
    format_potential,
    parse_potential,
    recenter,
    validate_double_well,
)
from .quantization import SemiclassicalParams, SpectrumWindow, check_interleaving, enumerate_window  # noqa: E402
from .oracle import OracleSpectrum, solve as oracle_solve  # noqa: E402
from .analysis import calibrate, compare  # noqa: E402
from .kernels import BACKEND  # noqa: E402

__all__ = [
    "__version__", "BACKEND", "ParseError", "PotentialModel", "ValidationReport",
    "format_potential", "parse_potential", "recenter", "validate_double_well",
    "SemiclassicalParams", "SpectrumWindow", "check_interleaving", "enumerate_window",
    "OracleSpectrum", "oracle_solve", "calibrate", "compare",
]
