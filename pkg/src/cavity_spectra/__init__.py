"""Finite element spectra of Maxwell cavities with anisotropic permittivity."""
from .assembly import OperatorPencil, assemble_pencil
from .eigensolve import EigenSolution, solve_gsym
from .estimator import CavityEigensolver
from .exceptions import (
    CavitySpectraError,
    ConfigError,
    InvalidArgumentError,
    NotAdmissibleError,
    NumericalError,
)
from .geometry import BoxDomain, Mesh, build_box_mesh, gauss_rule
from .spectra import Spectrum, Tolerances, compute_spectrum, maxwell_eigenvalues

__version__ = "0.1.0"

__all__ = [
    "BoxDomain",
    "CavityEigensolver",
    "CavitySpectraError",
    "ConfigError",
    "EigenSolution",
    "InvalidArgumentError",
    "Mesh",
    "NotAdmissibleError",
    "NumericalError",
    "OperatorPencil",
    "Spectrum",
    "Tolerances",
    "__version__",
    "assemble_pencil",
    "build_box_mesh",
    "compute_spectrum",
    "gauss_rule",
    "maxwell_eigenvalues",
    "solve_gsym",
]
