"""Open staggered six-vertex chain: integrable structure, spectra, Bethe roots and characters."""

__version__ = "0.1.0"

from .core_params import Coupling, DomainError, coupling_from_gamma, coupling_from_k, parse_angle

__all__ = ["Coupling", "DomainError", "coupling_from_gamma", "coupling_from_k", "parse_angle", "__version__"]
