"""Illumination-robust road-sign segmentation on spherical color coordinates.

The library is organized around a per-pixel pipeline: convert colors to
magnitude/angle coordinates (``spherical``), classify pixels red/blue/
background with a ratio-gated chromatic distance (``segmentation``),
group labels into candidate regions (``detection``), and score
detections against ground truth (``evaluation``). Three standard
comparison segmenters live in ``baselines``; ``synth`` generates seeded
scenes for the invariance experiments; ``cli`` wires everything into
reproducible command-line runs.
"""

from .spherical import (
    EPS_BLACK,
    RgbPixel,
    SphericalColor,
    SphericalImage,
    SyntheticSceneSpec,
    render_lambertian,
    rgb_to_spherical,
    spherical_to_rgb,
    transform_image,
)
from .segmentation import (
    EPS_DIV,
    ClassLabel,
    ReferenceChroma,
    SegmentationMask,
    SegmentationModel,
    TransferParams,
    alpha_blue,
    alpha_red,
    chromatic_distance,
    classify_pixel,
    hybrid_distance,
    load_model,
    red_blue_ratio,
    save_model,
    segment_image,
    train_model,
)
from .baselines import (
    BaselineParams,
    HsvParams,
    LogChromaticParams,
    RedEnhanceParams,
    segment_hsv,
    segment_log_chromatic,
    segment_red_enhance,
)
from .detection import (
    ComponentLabelMap,
    DetectionCandidate,
    GeometryFilters,
    connected_components,
    detect_signs,
    extract_candidates,
)
from .evaluation import (
    EvalReport,
    EvalRow,
    GroundTruthRecord,
    MatchResult,
    PRCurve,
    box_iou,
    compute_metrics,
    load_ground_truth,
    match_detections,
    pr_sweep,
)
from .synth import generate_dataset

__version__ = "0.1.0"

__all__ = [
    "EPS_BLACK",
    "EPS_DIV",
    "BaselineParams",
    "ClassLabel",
    "ComponentLabelMap",
    "DetectionCandidate",
    "EvalReport",
    "EvalRow",
    "GeometryFilters",
    "GroundTruthRecord",
    "HsvParams",
    "LogChromaticParams",
    "MatchResult",
    "PRCurve",
    "RedEnhanceParams",
    "ReferenceChroma",
    "RgbPixel",
    "SegmentationMask",
    "SegmentationModel",
    "SphericalColor",
    "SphericalImage",
    "SyntheticSceneSpec",
    "TransferParams",
    "alpha_blue",
    "alpha_red",
    "box_iou",
    "chromatic_distance",
    "classify_pixel",
    "compute_metrics",
    "connected_components",
    "detect_signs",
    "extract_candidates",
    "generate_dataset",
    "hybrid_distance",
    "load_ground_truth",
    "load_model",
    "match_detections",
    "pr_sweep",
    "red_blue_ratio",
    "render_lambertian",
    "rgb_to_spherical",
    "save_model",
    "segment_hsv",
    "segment_image",
    "segment_log_chromatic",
    "segment_red_enhance",
    "spherical_to_rgb",
    "train_model",
    "transform_image",
]
