"""Spherical color coordinates and a Lambertian blackbody pixel model.

A color vector (r, g, b) maps to a magnitude ``l`` and two angles:
azimuth ``theta = atan2(g, r)`` and zenith ``phi = arccos(sqrt(r²+g²)/l)``.
The angles depend only on the direction of the color vector, so any
uniform positive scaling of the inputs — diffuse shading, shadow,
highlight strength — leaves them unchanged. That homogeneity is the
foundation of the chromatic segmenter built on top of this module.

``render_lambertian`` produces the color a sensor would record from a
matte surface under a blackbody illuminant, which lets the invariance be
exercised end to end: the shading factor and light intensity enter the
model only as a product that the angles cancel out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Below this magnitude the direction of an 8-bit color vector is dominated
# by quantization noise; such pixels carry no usable chroma and are flagged
# achromatic (angles fixed at 0 by convention).
EPS_BLACK = 4.0 / 255.0

# Second radiation constant c2, in m·K. The overall scale constant of the
# blackbody model cancels in the angles, so it defaults to 1.
K2_RADIATION = 1.4388e-2

# Channel wavelengths in meters: red 800 nm, blue 460 nm; green 550 nm sits
# between them at the standard photopic peak.
DEFAULT_WAVELENGTHS = (800e-9, 550e-9, 460e-9)


@dataclass(frozen=True)
class RgbPixel:
    """A linear color sample with each channel in [0, 1]."""

    r: float
    g: float
    b: float

    def __post_init__(self) -> None:
        for name, value in (("r", self.r), ("g", self.g), ("b", self.b)):
            if not math.isfinite(value) or not 0.0 <= value <= 1.0:
                raise ValueError(f"channel {name}={value} outside [0, 1]")

    @classmethod
    def from_8bit(cls, r: int, g: int, b: int) -> "RgbPixel":
        return cls(r / 255.0, g / 255.0, b / 255.0)

    def scaled(self, s: float) -> "RgbPixel":
        return RgbPixel(self.r * s, self.g * s, self.b * s)


@dataclass(frozen=True)
class SphericalColor:
    """Magnitude plus azimuth/zenith angles of a color vector.

    ``achromatic`` marks near-black pixels whose angles are numerically
    meaningless; for those ``theta = phi = 0`` by convention.
    """

    l: float
    theta: float
    phi: float
    achromatic: bool = False


@dataclass(frozen=True)
class SphericalImage:
    """Per-pixel spherical coordinates of an image, as parallel arrays."""

    l: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    achromatic: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.l.shape


@dataclass(frozen=True)
class SyntheticSceneSpec:
    """Inputs of the Lambertian blackbody pixel model.

    ``sigma`` is the diffuse shading factor, ``intensity`` the overall
    light level, ``temperature`` the illuminant color temperature in
    kelvin. ``reflectance`` and ``sensitivity`` are the per-channel
    surface reflectance and sensor gain at the three wavelengths.
    """

    sigma: float
    intensity: float
    temperature: float
    k1: float = 1.0
    k2: float = K2_RADIATION
    wavelengths: tuple[float, float, float] = DEFAULT_WAVELENGTHS
    reflectance: tuple[float, float, float] = (1.0, 1.0, 1.0)
    sensitivity: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self) -> None:
        if self.sigma < 0 or self.intensity < 0:
            raise ValueError("sigma and intensity must be nonnegative")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError("model constants must be nonnegative")
        lam = self.wavelengths
        if not (lam[0] > lam[1] > lam[2] > 0):
            raise ValueError("wavelengths must be positive and strictly decreasing")
        for name, triple in (("reflectance", self.reflectance),
                             ("sensitivity", self.sensitivity)):
            for v in triple:
                if v < 0:
                    raise ValueError(f"{name} components must be nonnegative")
        for v in self.reflectance:
            if v > 1:
                raise ValueError("reflectance components must be <= 1")


def rgb_to_spherical(p: RgbPixel) -> SphericalColor:
    """Convert an rgb pixel to spherical coordinates.

    Near-black pixels (magnitude below ``EPS_BLACK``) come back flagged
    achromatic with both angles 0. A pure-blue pixel (r = g = 0) has
    theta = 0 by the atan2 convention and phi = pi/2.
    """
    l = math.sqrt(p.r * p.r + p.g * p.g + p.b * p.b)
    if l < EPS_BLACK:
        return SphericalColor(l, 0.0, 0.0, achromatic=True)
    theta = math.atan2(p.g, p.r)
    # Clamp guards the acos domain against rounding when b is tiny.
    phi = math.acos(min(1.0, math.sqrt(p.r * p.r + p.g * p.g) / l))
    return SphericalColor(l, theta, phi)


def spherical_to_rgb(s: SphericalColor) -> RgbPixel:
    """Invert ``rgb_to_spherical`` for non-achromatic colors."""
    if s.achromatic:
        raise ValueError("achromatic color has no recoverable angles")
    cos_phi = math.cos(s.phi)
    # Clamp guards 1-ulp overshoot past the channel bounds.
    clamp = lambda v: min(1.0, max(0.0, v))
    return RgbPixel(
        clamp(s.l * cos_phi * math.cos(s.theta)),
        clamp(s.l * cos_phi * math.sin(s.theta)),
        clamp(s.l * math.sin(s.phi)),
    )


def lambertian_channels(spec: SyntheticSceneSpec) -> tuple[float, float, float]:
    """Raw (unnormalized) channel responses of the blackbody model."""
    out = []
    for k in range(3):
        lam = spec.wavelengths[k]
        try:
            c = (spec.sigma * spec.intensity * spec.k1
                 * lam ** -5.0
                 * math.exp(-spec.k2 / (spec.temperature * lam))
                 * spec.reflectance[k]
                 * spec.sensitivity[k])
        except OverflowError:
            c = math.inf
        if not math.isfinite(c):
            raise ValueError(
                f"channel {k} overflowed (T={spec.temperature}, lambda={lam})"
            )
        out.append(c)
    return out[0], out[1], out[2]


def render_lambertian(
    spec: SyntheticSceneSpec, exposure: float | None = None
) -> tuple[RgbPixel, float]:
    """Render one matte pixel under a blackbody illuminant.

    The raw channel responses are uniformly rescaled by ``exposure`` so
    the maximum component is at most 1; when ``exposure`` is None the
    factor is chosen automatically to put the brightest channel at
    exactly 1 (a zero pixel keeps factor 1). Uniform rescaling cannot
    disturb the angles. Returns the pixel together with the factor used.
    """
    raw = lambertian_channels(spec)
    peak = max(raw)
    if exposure is None:
        exposure = 1.0 / peak if peak > 0 else 1.0
    if exposure < 0:
        raise ValueError("exposure must be nonnegative")
    scaled = tuple(c * exposure for c in raw)
    if max(scaled) > 1.0:
        raise ValueError(
            f"exposure {exposure} leaves max component {max(scaled)} > 1"
        )
    return RgbPixel(*scaled), exposure


def _validate_image(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) image, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("image dimensions must be positive")
    return arr


def transform_image(img: np.ndarray) -> SphericalImage:
    """Per-pixel spherical transform of a (h, w, 3) float image."""
    arr = _validate_image(img)
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    l = np.sqrt(r * r + g * g + b * b)
    achromatic = l < EPS_BLACK
    safe_l = np.where(l > 0, l, 1.0)
    theta = np.arctan2(g, r)
    phi = np.arccos(np.minimum(np.sqrt(r * r + g * g) / safe_l, 1.0))
    theta = np.where(achromatic, 0.0, theta)
    phi = np.where(achromatic, 0.0, phi)
    return SphericalImage(l=l, theta=theta, phi=phi, achromatic=achromatic)
