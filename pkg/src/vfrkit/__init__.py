"""vfrkit: quality-aware template aggregation, subspace matching, face
association and open-set identification for video face recognition."""
from .core import backend_name, hungarian_assignment, symmetric_eigendecomposition
from .errors import (ConvergenceError, DegenerateTemplateError, NumericError,
                     ValidationError)
from .types import BoundingBox, Detection, Template

__version__ = "0.1.0"

__all__ = [
    "BoundingBox", "Detection", "Template",
    "ConvergenceError", "DegenerateTemplateError", "NumericError", "ValidationError",
    "backend_name", "hungarian_assignment", "symmetric_eigendecomposition",
    "__version__",
]
