"""Red/blue pixel classification with a ratio-gated chromatic distance.

Each pixel is compared against trained reference chromaticities in
(theta, phi) angle space. The chromatic distance is the Euclidean
distance between the pixel's angles and a class reference; it is gated
by a transfer weight computed from the pixel's red/blue channel ratio,
so color evidence and ratio evidence must both be present.

Two decision rules are provided:

* ``calibrated`` (default): a class is a candidate when its transfer
  weight exceeds ``alpha_min`` and its chromatic distance is below the
  class threshold ``tau``; the nearer reference wins a double match.
* ``literal``: the published thresholding rule, comparing the gated
  distance directly against the red/blue ratio (red when above, blue
  when below). Kept for fidelity experiments; a pixel satisfying both
  branches counts as a conflict and falls back to background.

Transfer weights likewise come in the published piecewise form
(``literal``: unnormalized middle branch for red, discontinuous for
blue) and a ``normalized`` variant clamped to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from . import kv
from .spherical import (
    RgbPixel,
    SphericalColor,
    rgb_to_spherical,
    transform_image,
)

# Ratio regularizer matching one 8-bit quantization step; keeps the ratio
# finite for black-channel pixels at the cost of exact scale invariance.
EPS_DIV = 1.0 / 255.0

# A zero-variance training class would otherwise produce an unusable
# distance threshold.
TAU_FLOOR = 0.02

DECISION_MODES = ("calibrated", "literal")
TRANSFER_VARIANTS = ("literal", "normalized")


class ClassLabel(IntEnum):
    BACKGROUND = 0
    RED = 1
    BLUE = 2


@dataclass(frozen=True)
class ReferenceChroma:
    """Trained reference angles (radians) for one sign color class."""

    theta: float
    phi: float

    def __post_init__(self) -> None:
        for name, v in (("theta", self.theta), ("phi", self.phi)):
            if not math.isfinite(v) or not 0.0 <= v <= math.pi / 2:
                raise ValueError(f"{name}={v} outside [0, pi/2]")


@dataclass(frozen=True)
class TransferParams:
    """Knots of the ratio transfer functions: 0 < a < b."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("transfer knots must be finite")
        if not 0.0 < self.a < self.b:
            raise ValueError(f"require 0 < a < b, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class SegmentationModel:
    """Reference chromaticities, transfer knots, and decision thresholds."""

    red_ref: ReferenceChroma
    blue_ref: ReferenceChroma
    transfer: TransferParams
    tau_red: float
    tau_blue: float
    alpha_min: float = 0.1
    decision_mode: str = "calibrated"
    transfer_variant: str = "literal"
    epsilon_div: float = EPS_DIV
    # Sweep-time shift of the literal rule's comparator; never serialized.
    literal_offset: float = 0.0

    def __post_init__(self) -> None:
        if self.tau_red <= 0 or self.tau_blue <= 0:
            raise ValueError("distance thresholds must be positive")
        if not 0.0 <= self.alpha_min < 1.0:
            raise ValueError(f"alpha_min={self.alpha_min} outside [0, 1)")
        if self.red_ref == self.blue_ref:
            raise ValueError("red and blue references must differ")
        if self.decision_mode not in DECISION_MODES:
            raise ValueError(f"unknown decision_mode {self.decision_mode!r}")
        if self.transfer_variant not in TRANSFER_VARIANTS:
            raise ValueError(f"unknown transfer_variant {self.transfer_variant!r}")
        if self.epsilon_div < 0:
            raise ValueError("epsilon_div must be nonnegative")


@dataclass
class SegmentationMask:
    """Per-pixel class labels; ``literal_conflicts`` counts pixels that
    satisfied both branches of the literal rule (labeled background)."""

    width: int
    height: int
    labels: np.ndarray
    literal_conflicts: int = 0

    def __post_init__(self) -> None:
        if self.labels.shape != (self.height, self.width):
            raise ValueError(
                f"labels shape {self.labels.shape} != ({self.height}, {self.width})"
            )


def chromatic_distance(p: SphericalColor, o: ReferenceChroma) -> float:
    """Euclidean distance between pixel and reference in angle space."""
    if p.achromatic:
        raise ValueError("achromatic pixel has no chromatic distance")
    return math.hypot(o.theta - p.theta, o.phi - p.phi)


def red_blue_ratio(p: RgbPixel, epsilon: float = EPS_DIV) -> float:
    """Red/blue channel ratio ``(r + eps) / (b + eps)``.

    With ``epsilon > 0`` the ratio is finite and strictly positive but
    only approximately scale invariant; with ``epsilon = 0`` it is
    exactly scale invariant, and a zero blue channel maps to +inf for
    red-bearing pixels and to the neutral value 1 for r = b = 0.
    """
    num = p.r + epsilon
    den = p.b + epsilon
    if den == 0.0:
        return math.inf if num > 0.0 else 1.0
    return num / den


def alpha_red(x: float, t: TransferParams, variant: str = "literal") -> float:
    """Red transfer weight of the ratio ``x``.

    ``literal`` keeps the published middle branch (the raw ratio, which
    may exceed 1); ``normalized`` ramps linearly from 0 at ``a`` to 1 at
    ``b``.
    """
    if x <= t.a:
        return 0.0
    if x >= t.b:
        return 1.0
    if variant == "normalized":
        return (x - t.a) / (t.b - t.a)
    return x


def alpha_blue(x: float, t: TransferParams, variant: str = "literal") -> float:
    """Blue transfer weight of the ratio ``x``.

    ``literal`` is the published piecewise form: ``a - x`` up to ``a``
    (unbounded above when ``a > 1``) and 1 beyond it, discontinuous at
    ``a``. ``normalized`` ramps from 1 at x = 0 down to 0 at ``a`` so
    blue evidence decreases with the ratio.
    """
    if variant == "normalized":
        return min(1.0, max(0.0, (t.a - x) / t.a))
    if x <= t.a:
        return t.a - x
    return 1.0


def hybrid_distance(
    p: SphericalColor,
    o: ReferenceChroma,
    x: float,
    label: ClassLabel,
    t: TransferParams,
    variant: str = "literal",
) -> float:
    """Chromatic distance gated by the class transfer weight; zero when
    either factor is zero."""
    if p.achromatic:
        raise ValueError("achromatic pixel has no chromatic distance")
    if label == ClassLabel.RED:
        gate = alpha_red(x, t, variant)
    elif label == ClassLabel.BLUE:
        gate = alpha_blue(x, t, variant)
    else:
        raise ValueError(f"no transfer function for {label!r}")
    if gate == 0.0:
        return 0.0
    return gate * chromatic_distance(p, o)


@dataclass
class ClassifyDiagnostics:
    literal_conflicts: int = 0


def classify_pixel(
    p: RgbPixel,
    m: SegmentationModel,
    diagnostics: ClassifyDiagnostics | None = None,
) -> ClassLabel:
    """Label one pixel red, blue, or background under the model's rule."""
    s = rgb_to_spherical(p)
    if s.achromatic:
        return ClassLabel.BACKGROUND
    x = red_blue_ratio(p, m.epsilon_div)
    cd_red = chromatic_distance(s, m.red_ref)
    cd_blue = chromatic_distance(s, m.blue_ref)
    a_red = alpha_red(x, m.transfer, m.transfer_variant)
    a_blue = alpha_blue(x, m.transfer, m.transfer_variant)

    if m.decision_mode == "literal":
        comparator = x + m.literal_offset
        is_red = a_red * cd_red > comparator
        is_blue = a_blue * cd_blue < comparator
        if is_red and is_blue:
            if diagnostics is not None:
                diagnostics.literal_conflicts += 1
            return ClassLabel.BACKGROUND
        if is_red:
            return ClassLabel.RED
        if is_blue:
            return ClassLabel.BLUE
        return ClassLabel.BACKGROUND

    red_ok = a_red > m.alpha_min and cd_red < m.tau_red
    blue_ok = a_blue > m.alpha_min and cd_blue < m.tau_blue
    if red_ok and blue_ok:
        return ClassLabel.RED if cd_red <= cd_blue else ClassLabel.BLUE
    if red_ok:
        return ClassLabel.RED
    if blue_ok:
        return ClassLabel.BLUE
    return ClassLabel.BACKGROUND


def _ratio_array(r: np.ndarray, b: np.ndarray, epsilon: float) -> np.ndarray:
    num = r + epsilon
    den = b + epsilon
    with np.errstate(divide="ignore", invalid="ignore"):
        x = num / den
    if epsilon == 0.0:
        zero_den = den == 0.0
        x = np.where(zero_den & (num > 0.0), np.inf, x)
        x = np.where(zero_den & (num == 0.0), 1.0, x)
    return x


def _alpha_red_array(x: np.ndarray, t: TransferParams, variant: str) -> np.ndarray:
    middle = x if variant == "literal" else (x - t.a) / (t.b - t.a)
    out = np.where(x >= t.b, 1.0, middle)
    return np.where(x <= t.a, 0.0, out)


def _alpha_blue_array(x: np.ndarray, t: TransferParams, variant: str) -> np.ndarray:
    if variant == "normalized":
        return np.clip((t.a - x) / t.a, 0.0, 1.0)
    with np.errstate(invalid="ignore"):
        return np.where(x <= t.a, t.a - x, 1.0)


def segment_image(img: np.ndarray, m: SegmentationModel) -> SegmentationMask:
    """Classify every pixel of a (h, w, 3) float image.

    Vectorized over the image; agrees pixel-for-pixel with
    ``classify_pixel`` applied in a loop.
    """
    arr = np.asarray(img, dtype=np.float64)
    sph = transform_image(arr)
    chroma = ~sph.achromatic
    x = _ratio_array(arr[..., 0], arr[..., 2], m.epsilon_div)
    cd_red = np.hypot(m.red_ref.theta - sph.theta, m.red_ref.phi - sph.phi)
    cd_blue = np.hypot(m.blue_ref.theta - sph.theta, m.blue_ref.phi - sph.phi)
    a_red = _alpha_red_array(x, m.transfer, m.transfer_variant)
    a_blue = _alpha_blue_array(x, m.transfer, m.transfer_variant)

    height, width = arr.shape[:2]
    labels = np.zeros((height, width), dtype=np.uint8)
    conflicts = 0

    if m.decision_mode == "literal":
        comparator = x + m.literal_offset
        with np.errstate(invalid="ignore"):
            is_red = (a_red * cd_red > comparator) & chroma
            is_blue = (a_blue * cd_blue < comparator) & chroma
        both = is_red & is_blue
        conflicts = int(both.sum())
        labels[is_red & ~both] = ClassLabel.RED
        labels[is_blue & ~both] = ClassLabel.BLUE
    else:
        red_ok = (a_red > m.alpha_min) & (cd_red < m.tau_red) & chroma
        blue_ok = (a_blue > m.alpha_min) & (cd_blue < m.tau_blue) & chroma
        both = red_ok & blue_ok
        red_wins = both & (cd_red <= cd_blue)
        labels[(red_ok & ~both) | red_wins] = ClassLabel.RED
        labels[(blue_ok & ~both) | (both & ~red_wins)] = ClassLabel.BLUE

    return SegmentationMask(
        width=width, height=height, labels=labels, literal_conflicts=conflicts
    )


def nearest_rank(sorted_values: np.ndarray, percentile: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    n = len(sorted_values)
    if n == 0:
        raise ValueError("percentile of empty sample")
    rank = math.ceil(percentile / 100.0 * n)
    return float(sorted_values[max(rank, 1) - 1])


def knots_from_ratios(sorted_ratios: np.ndarray) -> TransferParams:
    """Transfer knots at the 25th/75th nearest-rank percentiles, falling
    back to 0.9/1.1 of the median when the quartiles are not separated
    at the 9-significant-digit serialization precision."""
    a = nearest_rank(sorted_ratios, 25.0)
    b = nearest_rank(sorted_ratios, 75.0)
    if not (a < b and b - a > 1e-8 * max(1.0, abs(b))):
        mid = float(np.median(sorted_ratios))
        a, b = 0.9 * mid, 1.1 * mid
    return TransferParams(a, b)


def _class_angles(pixels, name: str) -> tuple[np.ndarray, np.ndarray]:
    thetas, phis = [], []
    for p in pixels:
        s = rgb_to_spherical(p)
        if s.achromatic:
            continue
        thetas.append(s.theta)
        phis.append(s.phi)
    if not thetas:
        raise ValueError(f"class {name} has no training pixels")
    return np.array(thetas), np.array(phis)


def train_model(
    red_pixels,
    blue_pixels,
    bg_pixels=(),
    *,
    alpha_min: float = 0.1,
    decision_mode: str = "calibrated",
    transfer_variant: str = "literal",
    epsilon_div: float = EPS_DIV,
    tau_percentile: float = 95.0,
    tau_floor: float = TAU_FLOOR,
) -> SegmentationModel:
    """Estimate a segmentation model from labeled pixels.

    References are the componentwise medians of each class's angles;
    the transfer knots are the 25th/75th nearest-rank percentiles of the
    red pixels' red/blue ratios (falling back to 0.9/1.1 of the median
    when degenerate); each distance threshold is the ``tau_percentile``
    nearest-rank percentile of the class's distances to its own
    reference, floored at ``tau_floor``. Background pixels are accepted
    for API symmetry but unused by these estimators. The result depends
    only on the multiset of inputs, not their order.
    """
    red_theta, red_phi = _class_angles(red_pixels, "red")
    blue_theta, blue_phi = _class_angles(blue_pixels, "blue")
    del bg_pixels

    red_ref = ReferenceChroma(
        float(np.median(red_theta)), float(np.median(red_phi))
    )
    blue_ref = ReferenceChroma(
        float(np.median(blue_theta)), float(np.median(blue_phi))
    )

    ratios = np.array(
        [red_blue_ratio(p, epsilon_div) for p in red_pixels], dtype=np.float64
    )
    ratios = ratios[np.isfinite(ratios)]
    if len(ratios) == 0:
        raise ValueError("no finite red/blue ratios among red training pixels")
    ratios.sort()
    transfer = knots_from_ratios(ratios)

    def tau_for(theta, phi, ref):
        d = np.sort(np.hypot(ref.theta - theta, ref.phi - phi))
        return max(nearest_rank(d, tau_percentile), tau_floor)

    return SegmentationModel(
        red_ref=red_ref,
        blue_ref=blue_ref,
        transfer=transfer,
        tau_red=tau_for(red_theta, red_phi, red_ref),
        tau_blue=tau_for(blue_theta, blue_phi, blue_ref),
        alpha_min=alpha_min,
        decision_mode=decision_mode,
        transfer_variant=transfer_variant,
        epsilon_div=epsilon_div,
    )


# Serialization: flat key-value document, floats at 9 significant digits.

_MODEL_FLOAT_KEYS = (
    "theta_o_red", "phi_o_red", "theta_o_blue", "phi_o_blue",
    "a", "b", "tau_red", "tau_blue", "alpha_min", "epsilon_div",
)
_MODEL_STR_KEYS = ("decision_mode", "transfer_variant")


def dumps_model(m: SegmentationModel) -> str:
    pairs = [
        ("theta_o_red", kv.format_float(m.red_ref.theta)),
        ("phi_o_red", kv.format_float(m.red_ref.phi)),
        ("theta_o_blue", kv.format_float(m.blue_ref.theta)),
        ("phi_o_blue", kv.format_float(m.blue_ref.phi)),
        ("a", kv.format_float(m.transfer.a)),
        ("b", kv.format_float(m.transfer.b)),
        ("tau_red", kv.format_float(m.tau_red)),
        ("tau_blue", kv.format_float(m.tau_blue)),
        ("alpha_min", kv.format_float(m.alpha_min)),
        ("decision_mode", m.decision_mode),
        ("transfer_variant", m.transfer_variant),
        ("epsilon_div", kv.format_float(m.epsilon_div)),
    ]
    return kv.dumps(pairs)


def loads_model(text: str) -> SegmentationModel:
    fields = kv.loads(text)
    expected = set(_MODEL_FLOAT_KEYS) | set(_MODEL_STR_KEYS)
    missing = expected - fields.keys()
    if missing:
        raise ValueError(f"model file missing keys: {sorted(missing)}")
    unknown = fields.keys() - expected
    if unknown:
        raise ValueError(f"model file has unknown keys: {sorted(unknown)}")
    f = {k: float(fields[k]) for k in _MODEL_FLOAT_KEYS}
    return SegmentationModel(
        red_ref=ReferenceChroma(f["theta_o_red"], f["phi_o_red"]),
        blue_ref=ReferenceChroma(f["theta_o_blue"], f["phi_o_blue"]),
        transfer=TransferParams(f["a"], f["b"]),
        tau_red=f["tau_red"],
        tau_blue=f["tau_blue"],
        alpha_min=f["alpha_min"],
        decision_mode=fields["decision_mode"],
        transfer_variant=fields["transfer_variant"],
        epsilon_div=f["epsilon_div"],
    )


def save_model(path, m: SegmentationModel) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_model(m))


def load_model(path) -> SegmentationModel:
    with open(path, "r", encoding="ascii") as fh:
        return loads_model(fh.read())


def with_tau_scale(m: SegmentationModel, factor: float) -> SegmentationModel:
    """Model with both distance thresholds scaled (for PR sweeps)."""
    if factor <= 0:
        raise ValueError("tau scale factor must be positive")
    return replace(m, tau_red=m.tau_red * factor, tau_blue=m.tau_blue * factor)


def with_literal_offset(m: SegmentationModel, offset: float) -> SegmentationModel:
    """Model with the literal rule's comparator shifted (for PR sweeps)."""
    return replace(m, literal_offset=offset)
