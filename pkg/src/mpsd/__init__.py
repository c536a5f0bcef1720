"""Matrix-valued positive semidefiniteness toolkit.

Numerical verification of the Schoenberg-type equivalence between conditional
positivity of matrix-valued functions and positivity of their entrywise
exponentials, atomic matrix-valued measures with their convolution operators,
and discretized Fourier multipliers with positivity probes, norm bounds, and
counterexample experiments.
"""

from .matcore import (
    InputError,
    NormKind,
    PsdVerdict,
    RangeError,
    Report,
    ResolutionError,
    cpsd_check,
    hadamard_exp,
    hadamard_product,
    hermitian_split,
    matrix_norm,
    psd_check,
)
from .psdfun import (
    MatrixFunction,
    PointSet,
    cpsd_function_check,
    gram,
    hadamard_exp_function,
    make_function,
    psd_function_check,
    schoenberg_equivalence_report,
    schoenberg_gram,
    weak_cpsd_check,
)
from .measures import (
    MatrixMeasure,
    convolve,
    duality_pairing,
    entrywise_variation,
    gaussian_measure,
    make_measure,
    matrix_measure,
    variation,
)
from .grid import GridField, GridSpec, dft, idft
from .oplab import (
    MultiplierSymbol,
    apply_multiplier,
    l1_norm_bounds_check,
    l2_multiplier_norm,
    l2_triple_norm_bounds_check,
    positivity_probe,
    right_mult_norm,
    symbol_from_function,
    symbol_from_measure,
)

__version__ = "0.1.0"

__all__ = [
    "InputError",
    "NormKind",
    "PsdVerdict",
    "RangeError",
    "Report",
    "ResolutionError",
    "cpsd_check",
    "hadamard_exp",
    "hadamard_product",
    "hermitian_split",
    "matrix_norm",
    "psd_check",
    "MatrixFunction",
    "PointSet",
    "cpsd_function_check",
    "gram",
    "hadamard_exp_function",
    "make_function",
    "psd_function_check",
    "schoenberg_equivalence_report",
    "schoenberg_gram",
    "weak_cpsd_check",
    "MatrixMeasure",
    "convolve",
    "duality_pairing",
    "entrywise_variation",
    "gaussian_measure",
    "make_measure",
    "matrix_measure",
    "variation",
    "GridField",
    "GridSpec",
    "dft",
    "idft",
    "MultiplierSymbol",
    "apply_multiplier",
    "l1_norm_bounds_check",
    "l2_multiplier_norm",
    "l2_triple_norm_bounds_check",
    "positivity_probe",
    "right_mult_norm",
    "symbol_from_function",
    "symbol_from_measure",
    "__version__",
]
