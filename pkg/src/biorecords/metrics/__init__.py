from .json_accuracy import (
    CATEGORY_ORDER,
    KeyAccuracy,
    NonConformingDocument,
    aggregate,
    category_accuracy,
    json_accuracy,
    overall_accuracy,
)
from .linkage import LinkageReport, LinkMapError, linkage_eval, validate_link_map
from .text import (
    EmptyReference,
    TextMetrics,
    VolumeTextMetrics,
    cer,
    levenshtein,
    normalize_for_metrics,
    text_metrics,
    volume_average,
    wer,
)

__all__ = [
    "CATEGORY_ORDER", "EmptyReference", "KeyAccuracy", "LinkMapError", "LinkageReport",
    "NonConformingDocument", "TextMetrics", "VolumeTextMetrics", "aggregate", "category_accuracy",
    "cer", "json_accuracy", "levenshtein", "linkage_eval", "normalize_for_metrics",
    "overall_accuracy", "text_metrics", "validate_link_map", "volume_average", "wer",
]
