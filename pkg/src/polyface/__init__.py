"""Face counts of randomly projected orthants, hypercubes and simplices."""

from .ensembles import DimensionSpec, EnsembleSpec, Kind, sample_matrix
from .geometry import FaceSpec, NullBasis, SurvivalVerdict, face_survives, nullspace_basis
from .probcalc import Shape, expected_face_ratio, wendel_probability

__version__ = "0.1.0"

__all__ = [
    "DimensionSpec", "EnsembleSpec", "Kind", "sample_matrix",
    "FaceSpec", "NullBasis", "SurvivalVerdict", "face_survives", "nullspace_basis",
    "Shape", "expected_face_ratio", "wendel_probability",
]
