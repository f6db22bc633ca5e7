"""k-fold invariant Gaussian random matrix ensembles.

Submodules: repcore (symmetric-group combinatorics), tensor (leg
operations and Hermitian coordinates), commutant (invariant families and
precision forms), ensembles (samplers), spectra (spectral diagnostics),
hc (HCIZ integral) and cli.
"""

from . import commutant, ensembles, hc, repcore, spectra, stats, tensor
from .errors import (
    InvalidArgumentError,
    KFoldError,
    NotPositiveDefiniteError,
    NumericalDegeneracyError,
    ResourceLimitError,
)

__version__ = "0.1.0"

__all__ = [
    "commutant",
    "ensembles",
    "hc",
    "repcore",
    "spectra",
    "stats",
    "tensor",
    "KFoldError",
    "InvalidArgumentError",
    "ResourceLimitError",
    "NotPositiveDefiniteError",
    "NumericalDegeneracyError",
]
