"""Comparison segmenters: HSV banding, red-excess scoring, log-ratio chroma.

These reconstruct the three standard approaches the main method is
benchmarked against. They reproduce the comparison methodology, not any
particular published implementation: hue-band thresholding with
saturation/value gates, a normalized red-excess score (red-only by
construction), and rectangle thresholds in log-chromaticity space.
Parameters can be fitted from the same labeled pixels used to train the
main model so the comparison is parameter-fair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kv
from .segmentation import ClassLabel, SegmentationMask
from .spherical import _validate_image

LOGC_EPS = 1.0 / 255.0


@dataclass(frozen=True)
class HsvParams:
    red_hue_halfwidth: float = 15.0
    blue_hue_low: float = 200.0
    blue_hue_high: float = 260.0
    sat_min: float = 0.3
    val_min: float = 0.1

    def __post_init__(self) -> None:
        for name, v in (("red_hue_halfwidth", self.red_hue_halfwidth),
                        ("blue_hue_low", self.blue_hue_low),
                        ("blue_hue_high", self.blue_hue_high)):
            if not 0.0 <= v < 360.0:
                raise ValueError(f"{name}={v} outside [0, 360)")
        if not self.blue_hue_low < self.blue_hue_high:
            raise ValueError("blue hue band must have low < high")
        for name, v in (("sat_min", self.sat_min), ("val_min", self.val_min)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


@dataclass(frozen=True)
class RedEnhanceParams:
    threshold: float = 0.2

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold={self.threshold} outside [0, 1]")


@dataclass(frozen=True)
class LogChromaticParams:
    """Axis-aligned class rectangles in (log(r/g), log(b/g)) space,
    each as (u_min, u_max, v_min, v_max)."""

    red_region: tuple[float, float, float, float]
    blue_region: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        for name, rect in (("red_region", self.red_region),
                           ("blue_region", self.blue_region)):
            u0, u1, v0, v1 = rect
            if not (u0 < u1 and v0 < v1):
                raise ValueError(f"{name}={rect} is degenerate")


def rgb_to_hsv_arrays(img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized rgb -> (hue degrees in [0, 360), saturation, value)."""
    arr = _validate_image(img)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    v = np.max(arr, axis=-1)
    c = v - np.min(arr, axis=-1)
    safe_c = np.where(c > 0, c, 1.0)
    hue = np.zeros_like(v)
    hue = np.where(v == r, (g - b) / safe_c, hue)
    hue = np.where(v == g, 2.0 + (b - r) / safe_c, hue)
    hue = np.where(v == b, 4.0 + (r - g) / safe_c, hue)
    # max-channel ties resolve in b > g > r priority above; gray has c == 0
    hue = np.where(c > 0, (hue * 60.0) % 360.0, 0.0)
    sat = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    return hue, sat, v


def segment_hsv(img: np.ndarray, p: HsvParams) -> SegmentationMask:
    """Hue-band thresholding with saturation and value gates."""
    hue, sat, val = rgb_to_hsv_arrays(img)
    gates = (sat >= p.sat_min) & (val >= p.val_min)
    dist_to_red = np.minimum(hue, 360.0 - hue)
    red = gates & (dist_to_red <= p.red_hue_halfwidth)
    blue = gates & (hue >= p.blue_hue_low) & (hue <= p.blue_hue_high) & ~red
    labels = np.zeros(hue.shape, dtype=np.uint8)
    labels[red] = ClassLabel.RED
    labels[blue] = ClassLabel.BLUE
    h, w = labels.shape
    return SegmentationMask(width=w, height=h, labels=labels)


def red_enhance_score(img: np.ndarray) -> np.ndarray:
    """Normalized red excess: min(r-g, r-b) / (r+g+b), clamped at 0."""
    arr = _validate_image(img)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    total = r + g + b
    excess = np.minimum(r - g, r - b)
    score = np.where(total > 0, excess / np.where(total > 0, total, 1.0), 0.0)
    return np.maximum(score, 0.0)


def segment_red_enhance(img: np.ndarray, p: RedEnhanceParams) -> SegmentationMask:
    """Red-excess thresholding. Red-only: this baseline never emits blue."""
    score = red_enhance_score(img)
    labels = np.where(score >= p.threshold, np.uint8(ClassLabel.RED), np.uint8(0))
    h, w = labels.shape
    return SegmentationMask(width=w, height=h, labels=labels)


def log_chromatic_coords(
    img: np.ndarray, epsilon: float = LOGC_EPS
) -> tuple[np.ndarray, np.ndarray]:
    """Log channel ratios (ln((r+e)/(g+e)), ln((b+e)/(g+e)))."""
    arr = _validate_image(img)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    with np.errstate(divide="ignore"):
        u = np.log(r + epsilon) - np.log(g + epsilon)
        v = np.log(b + epsilon) - np.log(g + epsilon)
    return u, v


def segment_log_chromatic(
    img: np.ndarray, p: LogChromaticParams, epsilon: float = LOGC_EPS
) -> SegmentationMask:
    """Rectangle membership in log-chromaticity space; red has priority
    where the rectangles overlap."""
    u, v = log_chromatic_coords(img, epsilon)

    def inside(rect):
        u0, u1, v0, v1 = rect
        return (u >= u0) & (u <= u1) & (v >= v0) & (v <= v1)

    red = inside(p.red_region)
    blue = inside(p.blue_region) & ~red
    labels = np.zeros(u.shape, dtype=np.uint8)
    labels[red] = ClassLabel.RED
    labels[blue] = ClassLabel.BLUE
    h, w = labels.shape
    return SegmentationMask(width=w, height=h, labels=labels)


# Parameter fitting from labeled pixels (same fixture as the main model).

def _pixel_array(pixels) -> np.ndarray:
    return np.array([[p.r, p.g, p.b] for p in pixels], dtype=np.float64)


def fit_hsv_params(red_pixels, blue_pixels) -> HsvParams:
    """Hue bands from the observed class hues, gates from observed
    saturation/value floors (halved, so in-class pixels pass with margin)."""
    if not red_pixels or not blue_pixels:
        raise ValueError("both classes need training pixels")
    red = _pixel_array(red_pixels).reshape(-1, 1, 3)
    blue = _pixel_array(blue_pixels).reshape(-1, 1, 3)
    red_hue, red_sat, red_val = rgb_to_hsv_arrays(red)
    blue_hue, blue_sat, blue_val = rgb_to_hsv_arrays(blue)

    red_dev = np.abs((red_hue + 180.0) % 360.0 - 180.0)
    halfwidth = min(90.0, max(10.0, 1.5 * float(red_dev.max())))
    low = max(0.0, float(blue_hue.min()) - 10.0)
    high = min(359.9, float(blue_hue.max()) + 10.0)
    sat_min = max(0.05, 0.5 * float(min(red_sat.min(), blue_sat.min())))
    val_min = max(0.05, 0.5 * float(min(red_val.min(), blue_val.min())))
    return HsvParams(halfwidth, low, high, sat_min, val_min)


def fit_red_enhance_params(red_pixels) -> RedEnhanceParams:
    """Threshold at half the weakest red training score."""
    if not red_pixels:
        raise ValueError("red class needs training pixels")
    scores = red_enhance_score(_pixel_array(red_pixels).reshape(-1, 1, 3))
    return RedEnhanceParams(max(0.02, 0.5 * float(scores.min())))


def fit_log_chromatic_params(
    red_pixels, blue_pixels, margin: float = 0.15, epsilon: float = LOGC_EPS
) -> LogChromaticParams:
    """Class rectangles spanning the observed coordinates plus a margin."""
    if not red_pixels or not blue_pixels:
        raise ValueError("both classes need training pixels")

    def rect(pixels):
        u, v = log_chromatic_coords(_pixel_array(pixels).reshape(-1, 1, 3), epsilon)
        return (float(u.min()) - margin, float(u.max()) + margin,
                float(v.min()) - margin, float(v.max()) + margin)

    return LogChromaticParams(rect(red_pixels), rect(blue_pixels))


# Serialization in the shared flat key-value format.

_BASELINE_FLOAT_KEYS = (
    "hsv_red_hue_halfwidth", "hsv_blue_hue_low", "hsv_blue_hue_high",
    "hsv_sat_min", "hsv_val_min",
    "red_enhance_threshold",
    "logc_red_u_min", "logc_red_u_max", "logc_red_v_min", "logc_red_v_max",
    "logc_blue_u_min", "logc_blue_u_max", "logc_blue_v_min", "logc_blue_v_max",
)


@dataclass(frozen=True)
class BaselineParams:
    hsv: HsvParams
    red_enhance: RedEnhanceParams
    log_chromatic: LogChromaticParams


def default_baseline_params() -> BaselineParams:
    return BaselineParams(
        hsv=HsvParams(),
        red_enhance=RedEnhanceParams(),
        log_chromatic=LogChromaticParams(
            red_region=(0.8, 3.0, -1.5, 1.0),
            blue_region=(-2.0, 0.0, 0.8, 3.5),
        ),
    )


def dumps_baseline_params(p: BaselineParams) -> str:
    rr, br = p.log_chromatic.red_region, p.log_chromatic.blue_region
    values = {
        "hsv_red_hue_halfwidth": p.hsv.red_hue_halfwidth,
        "hsv_blue_hue_low": p.hsv.blue_hue_low,
        "hsv_blue_hue_high": p.hsv.blue_hue_high,
        "hsv_sat_min": p.hsv.sat_min,
        "hsv_val_min": p.hsv.val_min,
        "red_enhance_threshold": p.red_enhance.threshold,
        "logc_red_u_min": rr[0], "logc_red_u_max": rr[1],
        "logc_red_v_min": rr[2], "logc_red_v_max": rr[3],
        "logc_blue_u_min": br[0], "logc_blue_u_max": br[1],
        "logc_blue_v_min": br[2], "logc_blue_v_max": br[3],
    }
    return kv.dumps([(k, kv.format_float(values[k])) for k in _BASELINE_FLOAT_KEYS])


def loads_baseline_params(text: str) -> BaselineParams:
    fields = kv.loads(text)
    missing = set(_BASELINE_FLOAT_KEYS) - fields.keys()
    if missing:
        raise ValueError(f"baseline file missing keys: {sorted(missing)}")
    f = {k: float(fields[k]) for k in _BASELINE_FLOAT_KEYS}
    return BaselineParams(
        hsv=HsvParams(
            f["hsv_red_hue_halfwidth"], f["hsv_blue_hue_low"],
            f["hsv_blue_hue_high"], f["hsv_sat_min"], f["hsv_val_min"],
        ),
        red_enhance=RedEnhanceParams(f["red_enhance_threshold"]),
        log_chromatic=LogChromaticParams(
            red_region=(f["logc_red_u_min"], f["logc_red_u_max"],
                        f["logc_red_v_min"], f["logc_red_v_max"]),
            blue_region=(f["logc_blue_u_min"], f["logc_blue_u_max"],
                         f["logc_blue_v_min"], f["logc_blue_v_max"]),
        ),
    )


def save_baseline_params(path, p: BaselineParams) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_baseline_params(p))


def load_baseline_params(path) -> BaselineParams:
    with open(path, "r", encoding="ascii") as fh:
        return loads_baseline_params(fh.read())
