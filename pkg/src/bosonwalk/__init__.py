"""Discrete-time quantum walk for a massless spin-1 field on a cubic lattice.

Submodules:

- algebra:    6-component internal space, block generators, step projectors
- kernel:     single-mode step unitary, dispersion phase, group velocity
- lattice:    periodic-lattice states, wave packets, evolution, centroids
- anisotropy: direction dependence of the propagation speed on the sphere
- bounds:     observational constraints converted to lattice-spacing bounds
- verify:     named invariant checks spanning all of the above
- cli:        command-line interface (surface/propagate/anisotropy/bounds/verify)
"""

__version__ = "0.1.0"

from . import algebra, anisotropy, bounds, kernel, lattice
from .errors import (
    ArgumentOutOfRangeError,
    BasisMismatchError,
    CatalogParseError,
    CatalogValidationError,
    DegenerateSpectrumError,
    MissingWavelengthError,
    PacketSpecError,
    SeriesOutOfRangeError,
    UndefinedCentroidError,
    UnsupportedOrderError,
    WalkError,
    ZeroMomentumError,
)

__all__ = [
    "__version__",
    "algebra", "anisotropy", "bounds", "kernel", "lattice",
    "WalkError", "ArgumentOutOfRangeError", "BasisMismatchError",
    "CatalogParseError", "CatalogValidationError", "DegenerateSpectrumError",
    "MissingWavelengthError", "PacketSpecError", "SeriesOutOfRangeError",
    "UndefinedCentroidError", "UnsupportedOrderError", "ZeroMomentumError",
]
