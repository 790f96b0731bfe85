"""posterml: poster HTML/CSS analysis, design metrics, and generation loop."""
from .errors import PosterError
from .metrics import ThresholdProfile, embedding_similarity, evaluate
from .model import (
    CanvasSpec,
    ElementGeometry,
    ElementKind,
    GeometrySet,
    Group,
    ImagePrompt,
    MetricReport,
    Rect,
    SemanticPlan,
    TextRegion,
    TextSpec,
    ValidityResult,
    validate_geometry_set,
)

__version__ = "0.1.0"

__all__ = [
    "CanvasSpec",
    "ElementGeometry",
    "ElementKind",
    "GeometrySet",
    "Group",
    "ImagePrompt",
    "MetricReport",
    "PosterError",
    "Rect",
    "SemanticPlan",
    "TextRegion",
    "TextSpec",
    "ThresholdProfile",
    "ValidityResult",
    "__version__",
    "embedding_similarity",
    "evaluate",
    "validate_geometry_set",
]
