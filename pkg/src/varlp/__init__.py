"""Weighted variable-exponent Lebesgue spaces on dyadic grids.

Building blocks: uniform grids and quadrature, variable exponents and local
Muckenhoupt weights, Luxemburg norms, Daubechies wavelet expansions with
square functions, local maximal / median / oscillation / sparse-decomposition
operators, local Calderon-Zygmund kernels, and a CLI experiment harness that
verifies the norm-equivalence and boundedness facts at desk scale.
"""

from .errors import (
    ConfigurationError,
    DomainError,
    RangeError,
    ResolutionError,
    SetupError,
    SparseDecompositionError,
)
from .grid import (
    DyadicCube,
    Grid,
    GridFunction,
    dyadic_cubes,
    indicator,
    integrate,
    make_grid,
)
from .exponents import (
    AlignedInterval,
    LogHolderReport,
    VariableExponent,
    Weight,
    a_loc_constant,
    a_loc_products,
    aligned_interval_family,
    conjugate_exponent,
    dual_weight,
    log_holder_constants,
    make_exponent,
    make_weight,
    smoothstep,
)
from .norms import luxemburg_norm, modular, pairing
from .wavelets import (
    SquareFunctions,
    WaveletCoefficients,
    WaveletSystem,
    analyze,
    build_daubechies,
    dilate_translate,
    gram_matrix,
    square_functions,
    synthesize,
    translate_range,
)

__version__ = "0.1.0"
