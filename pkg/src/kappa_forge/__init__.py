"""kappa_forge: star products on kappa-Minkowski space with a symbolic and a grid engine."""

from .errors import (ConfigError, DegreeOverflow, KappaForgeError, NotIntegrable, NumericError,
                     SupportOverflow, UnknownRelation, UnsupportedGenerator, WrongDegree)
from .spectral import GridSpec, SpectralGrid, grid_star
from .suites import Config, run_suite

__version__ = "0.1.0"

__all__ = ["ConfigError", "DegreeOverflow", "KappaForgeError", "NotIntegrable", "NumericError",
           "SupportOverflow", "UnknownRelation", "UnsupportedGenerator", "WrongDegree",
           "GridSpec", "SpectralGrid", "grid_star", "Config", "run_suite", "__version__"]
