"""Deterministic dataset engineering for aerial maritime search-and-rescue imagery.

Provides weather and lighting augmentation, leak-free grouped dataset
splitting, YOLO-format label IO, detection evaluation, and run reporting.
"""

from .conditions import NON_CLEAR_CONDITIONS, WeatherCondition
from .datasetio import (
    Annotation,
    BoundingBox,
    ClassTaxonomy,
    DatasetManifest,
    Detection,
    ManifestRecord,
    ObjectGroup,
    Split,
    Violation,
    grouped_split,
    load_manifest,
    maritime_taxonomy,
    merge_datasets,
    parse_label_file,
    parse_prediction_file,
    safe_stem,
    save_manifest,
    validate_manifest,
    write_label_file,
)
from .detmetrics import (
    GROUP_ALL,
    GROUP_HUMANS,
    GROUP_INANIMATE,
    GROUP_ROW_ORDER,
    MAP_THRESHOLDS,
    SCALAR_IOU_THRESHOLD,
    ClassMetrics,
    DetectionMatch,
    EvaluationResult,
    MatchResult,
    PrCurve,
    average_precision,
    collect_samples,
    combine_matches,
    evaluate_samples,
    grouped_metrics,
    iou,
    map_range,
    match_detections,
    pr_curve,
    scalar_prf,
)
from .errors import (
    DecodeFailureError,
    DimensionMismatchError,
    EmptyGroupError,
    GroupMismatchError,
    IdCollisionError,
    MalformedLineError,
    MaraugError,
    MissingSourceError,
    OutOfRangeError,
    RemapIncompleteError,
    WriteFailureError,
)
from .pixelops import (
    WHITE,
    AlphaTexture,
    ImageBuffer,
    RgbColor,
    adjust_brightness,
    adjust_contrast,
    apply_channel_gains,
    blend_with_layer,
    load_image,
    overlay_texture,
    round_half_away_from_zero,
    save_image,
)
from .reporting import (
    METRIC_COLUMNS,
    ComparisonCell,
    RunComparison,
    RunReport,
    compare_runs,
    load_report,
    render_comparison,
    render_table,
    save_report,
)
from .rng import SplitMix64, derive_seed
from .weathersim import (
    AugmentParams,
    AugmentPlan,
    PlanEntry,
    apply_condition,
    generate_rain_texture,
    plan_augmentation,
    run_augmentation,
)

__version__ = "0.1.0"

__all__ = [
    "WeatherCondition", "NON_CLEAR_CONDITIONS",
    "Annotation", "BoundingBox", "ClassTaxonomy", "DatasetManifest",
    "Detection", "ManifestRecord", "ObjectGroup", "Split", "Violation",
    "grouped_split", "load_manifest", "maritime_taxonomy", "merge_datasets",
    "parse_label_file", "parse_prediction_file", "safe_stem",
    "save_manifest", "validate_manifest", "write_label_file",
    "GROUP_ALL", "GROUP_HUMANS", "GROUP_INANIMATE", "GROUP_ROW_ORDER",
    "MAP_THRESHOLDS", "SCALAR_IOU_THRESHOLD",
    "ClassMetrics", "DetectionMatch", "EvaluationResult", "MatchResult",
    "PrCurve", "average_precision", "collect_samples", "combine_matches",
    "evaluate_samples", "grouped_metrics", "iou", "map_range",
    "match_detections", "pr_curve", "scalar_prf",
    "DecodeFailureError", "DimensionMismatchError", "EmptyGroupError",
    "GroupMismatchError", "IdCollisionError", "MalformedLineError",
    "MaraugError", "MissingSourceError", "OutOfRangeError",
    "RemapIncompleteError", "WriteFailureError",
    "WHITE", "AlphaTexture", "ImageBuffer", "RgbColor",
    "adjust_brightness", "adjust_contrast", "apply_channel_gains",
    "blend_with_layer", "load_image", "overlay_texture",
    "round_half_away_from_zero", "save_image",
    "METRIC_COLUMNS", "ComparisonCell", "RunComparison", "RunReport",
    "compare_runs", "load_report", "render_comparison", "render_table",
    "save_report",
    "SplitMix64", "derive_seed",
    "AugmentParams", "AugmentPlan", "PlanEntry", "apply_condition",
    "generate_rain_texture", "plan_augmentation", "run_augmentation",
    "__version__",
]
