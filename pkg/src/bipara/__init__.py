"""Finite dyadic model of one- and bi-parameter paraproducts.

Signals live on the finest cells of a dyadic grid over [0,1) or [0,1)^2.
The package provides exact Haar calculus, Hardy and BMO type functionals,
sparse rectangle families with atomic decompositions, and operator-norm
estimation for the paraproduct operators.
"""

__version__ = "0.1.0"

from .dyadic import (  # noqa: E402
    AVG,
    HAAR,
    DyadicError,
    DyadicInterval,
    DyadicRectangle,
    Grid1D,
    Grid2D,
    GridMismatchError,
    HaarCoeffs1D,
    HaarCoeffs2D,
    SliceCoeffs,
    Signal1D,
    Signal2D,
    SubgridRegionError,
    average_over,
    haar_forward_1d,
    haar_forward_2d,
    haar_inverse_1d,
    haar_inverse_2d,
    inner_product,
    slice_transform,
)
from .functionals import NormKind, norm  # noqa: E402
from .paraproducts import NamedOperator, ParaOperator, ParaSignature  # noqa: E402
from .kernels import backend, set_backend  # noqa: E402

__all__ = [
    "AVG",
    "HAAR",
    "DyadicError",
    "DyadicInterval",
    "DyadicRectangle",
    "Grid1D",
    "Grid2D",
    "GridMismatchError",
    "HaarCoeffs1D",
    "HaarCoeffs2D",
    "SliceCoeffs",
    "Signal1D",
    "Signal2D",
    "SubgridRegionError",
    "average_over",
    "haar_forward_1d",
    "haar_forward_2d",
    "haar_inverse_1d",
    "haar_inverse_2d",
    "inner_product",
    "slice_transform",
    "NormKind",
    "norm",
    "NamedOperator",
    "ParaOperator",
    "ParaSignature",
    "backend",
    "set_backend",
]
