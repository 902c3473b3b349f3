"""Digital sequences over prime bases, their discrepancy, and Walsh-spectral tools."""

__version__ = "0.1.0"

from .digitalseq import (
    GeneratorMatrix,
    GeneratorTuple,
    GridPoint,
    PointSet,
    apply_transpose,
    combined_image,
    named_matrix,
    point,
    point_set,
    sample_tuple,
)
from .discrepancy import character_sum, g_factor, local_direct, local_spectral, star_grid
from .errors import CostGuardError, DforgeError, InternalConsistencyError
from .qadic import DigitVec, digit_add, digits_of, first_nonzero_index, is_strongly_dependent, length_of
from .walsh import GridCoordinate, integral_oracle, interval_coeff, walsh

__all__ = [
    "CostGuardError", "DforgeError", "DigitVec", "GeneratorMatrix", "GeneratorTuple",
    "GridCoordinate", "GridPoint", "InternalConsistencyError", "PointSet",
    "apply_transpose", "character_sum", "combined_image", "digit_add", "digits_of",
    "first_nonzero_index", "g_factor", "integral_oracle", "interval_coeff",
    "is_strongly_dependent", "length_of", "local_direct", "local_spectral",
    "named_matrix", "point", "point_set", "sample_tuple", "star_grid", "walsh",
]
