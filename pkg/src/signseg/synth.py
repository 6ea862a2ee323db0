"""Seeded synthetic scenes for exercising the illumination-invariance claims.

Each scene is a black canvas with uniform rectangular patches whose
colors come from the Lambertian blackbody model: red and blue "signs"
plus gray distractors, at shading factors drawn from a grid so patch
brightness varies within one scene. Every scene is written at several
global intensity factors; chromatic angles are identical across the
sweep by construction, so an intensity-invariant segmenter must produce
the same mask for all of them.

Alongside the images the generator emits exact ground-truth boxes, pixel
annotations for training, and reference model/baseline parameter files
derived from the exact (pre-quantization) patch colors.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import (
    BaselineParams,
    fit_hsv_params,
    fit_log_chromatic_params,
    fit_red_enhance_params,
    save_baseline_params,
)
from .ppm import to_uint8, write_ppm
from .segmentation import (
    ClassLabel,
    ReferenceChroma,
    SegmentationModel,
    knots_from_ratios,
    red_blue_ratio,
    save_model,
)
from .spherical import RgbPixel, SyntheticSceneSpec, lambertian_channels, rgb_to_spherical

# Surface reflectance triples (at the red/green/blue model wavelengths).
REFLECTANCE = {
    ClassLabel.RED: (0.70, 0.06, 0.05),
    ClassLabel.BLUE: (0.06, 0.10, 0.55),
    ClassLabel.BACKGROUND: (0.75, 0.75, 0.75),  # gray distractor
}

SIGMA_GRID = (0.55, 0.70, 0.85, 1.00)

# Margin for the reference model shipped with a dataset: generously wider
# than quantization drift, well inside the gray-distractor distance.
REFERENCE_TAU = 0.25


@dataclass(frozen=True)
class Patch:
    rect: tuple[int, int, int, int]  # (left, top, right, bottom)
    class_label: ClassLabel
    sigma: float
    color: RgbPixel  # exact color at intensity factor 1


@dataclass(frozen=True)
class Scene:
    index: int
    temperature: float
    patches: tuple[Patch, ...]


@dataclass
class DatasetPaths:
    root: Path
    images_dir: Path
    ground_truth: Path
    train_annotations: Path
    model_file: Path
    baselines_file: Path
    image_ids: list[str]
    scenes: list[Scene]
    intensities: tuple[float, ...]


def _place_patches(rng, width, height, count, min_side=24, max_side=60, gap=6):
    """Non-overlapping axis-aligned rects with a separation gap, found by
    rejection sampling (deterministic given the rng state)."""
    rects: list[tuple[int, int, int, int]] = []
    attempts = 0
    while len(rects) < count:
        attempts += 1
        if attempts > 10000:
            raise RuntimeError("could not place patches; canvas too small")
        w = int(rng.integers(min_side, max_side + 1))
        h = int(rng.integers(max(min_side, int(w / 1.6)), min(max_side, int(w * 1.6)) + 1))
        if width - w - 2 <= 1 or height - h - 2 <= 1:
            continue
        left = int(rng.integers(1, width - w - 1))
        top = int(rng.integers(1, height - h - 1))
        rect = (left, top, left + w, top + h)
        ok = all(
            rect[2] + gap <= r[0] or r[2] + gap <= rect[0]
            or rect[3] + gap <= r[1] or r[3] + gap <= rect[1]
            for r in rects
        )
        if ok:
            rects.append(rect)
    return rects


def _raw_channels(class_label, sigma, temperature):
    spec = SyntheticSceneSpec(
        sigma=sigma,
        intensity=1.0,
        temperature=temperature,
        reflectance=REFLECTANCE[class_label],
    )
    return lambertian_channels(spec)


def build_scenes(
    seed: int,
    n_scenes: int,
    width: int,
    height: int,
    n_red: int = 2,
    n_blue: int = 2,
    n_gray: int = 1,
    temperatures: tuple[float, ...] = (6500.0,),
) -> list[Scene]:
    """Lay out seeded scenes and compute exact patch colors at intensity 1.

    One exposure factor is shared by the whole dataset (the brightest
    patch maps to channel value 1), so shading differences survive into
    the rendered images instead of being normalized away per patch.
    """
    rng = np.random.default_rng(seed)
    layouts = []
    for idx in range(n_scenes):
        temperature = temperatures[idx % len(temperatures)]
        rects = _place_patches(rng, width, height, n_red + n_blue + n_gray)
        classes = ([ClassLabel.RED] * n_red + [ClassLabel.BLUE] * n_blue
                   + [ClassLabel.BACKGROUND] * n_gray)
        sigmas = [SIGMA_GRID[int(rng.integers(0, len(SIGMA_GRID)))] for _ in classes]
        layouts.append((idx, temperature, rects, classes, sigmas))

    peak = 0.0
    raws = []
    for idx, temperature, rects, classes, sigmas in layouts:
        scene_raws = [
            _raw_channels(cls, sigma, temperature)
            for cls, sigma in zip(classes, sigmas)
        ]
        raws.append(scene_raws)
        peak = max(peak, max(max(c) for c in scene_raws))
    exposure = 1.0 / peak

    scenes = []
    for (idx, temperature, rects, classes, sigmas), scene_raws in zip(layouts, raws):
        patches = tuple(
            Patch(
                rect=rect,
                class_label=cls,
                sigma=sigma,
                color=RgbPixel(*(c * exposure for c in raw)),
            )
            for rect, cls, sigma, raw in zip(rects, classes, sigmas, scene_raws)
        )
        scenes.append(Scene(index=idx, temperature=temperature, patches=patches))
    return scenes


def render_scene(scene: Scene, width: int, height: int, intensity: float) -> np.ndarray:
    """Float image of one scene at a global intensity factor."""
    img = np.zeros((height, width, 3), dtype=np.float64)
    for patch in scene.patches:
        left, top, right, bottom = patch.rect
        img[top:bottom, left:right, 0] = patch.color.r * intensity
        img[top:bottom, left:right, 1] = patch.color.g * intensity
        img[top:bottom, left:right, 2] = patch.color.b * intensity
    return img


def image_id(scene_index: int, intensity: float) -> str:
    return f"scene{scene_index:03d}_i{int(round(intensity * 100)):03d}.ppm"


def reference_model(
    scenes, epsilon_div: float = 0.0, alpha_min: float = 0.1,
    tau: float = REFERENCE_TAU,
) -> SegmentationModel:
    """Model derived from the exact patch colors: median reference angles,
    quartile ratio knots, and a fixed generous distance threshold."""
    angles = {ClassLabel.RED: ([], []), ClassLabel.BLUE: ([], [])}
    red_ratios = []
    for scene in scenes:
        for patch in scene.patches:
            if patch.class_label not in angles:
                continue
            s = rgb_to_spherical(patch.color)
            angles[patch.class_label][0].append(s.theta)
            angles[patch.class_label][1].append(s.phi)
            if patch.class_label == ClassLabel.RED:
                red_ratios.append(red_blue_ratio(patch.color, epsilon_div))

    def ref(cls):
        thetas, phis = angles[cls]
        return ReferenceChroma(float(np.median(thetas)), float(np.median(phis)))

    ratios = np.sort(np.array(red_ratios))
    return SegmentationModel(
        red_ref=ref(ClassLabel.RED),
        blue_ref=ref(ClassLabel.BLUE),
        transfer=knots_from_ratios(ratios),
        tau_red=tau,
        tau_blue=tau,
        alpha_min=alpha_min,
        epsilon_div=epsilon_div,
    )


def _quantized(pixel: RgbPixel, intensity: float) -> RgbPixel:
    """The 8-bit color this patch actually has in the written images."""
    return RgbPixel(
        round(pixel.r * intensity * 255) / 255.0,
        round(pixel.g * intensity * 255) / 255.0,
        round(pixel.b * intensity * 255) / 255.0,
    )


def fitted_baselines(scenes, intensities) -> BaselineParams:
    """Baseline parameters fitted on the quantized patch colors at every
    intensity — the same values the segmenters will see in the images —
    mirroring the main model's training fixture."""
    red, blue = [], []
    for scene in scenes:
        for patch in scene.patches:
            for f in intensities:
                pixel = _quantized(patch.color, f)
                if patch.class_label == ClassLabel.RED:
                    red.append(pixel)
                elif patch.class_label == ClassLabel.BLUE:
                    blue.append(pixel)
    return BaselineParams(
        hsv=fit_hsv_params(red, blue),
        red_enhance=fit_red_enhance_params(red),
        log_chromatic=fit_log_chromatic_params(red, blue),
    )


def _annotation_points(patch: Patch):
    left, top, right, bottom = patch.rect
    cx, cy = (left + right) // 2, (top + bottom) // 2
    dx, dy = max(1, (right - left) // 4), max(1, (bottom - top) // 4)
    return [(cx, cy), (cx - dx, cy - dy), (cx + dx, cy - dy),
            (cx - dx, cy + dy), (cx + dx, cy + dy)]


def _background_points(scene: Scene, width: int, height: int):
    candidates = [(4, 4), (width - 5, 4), (4, height - 5),
                  (width - 5, height - 5), (width // 2, height // 2)]
    out = []
    for x, y in candidates:
        inside = any(
            p.rect[0] <= x < p.rect[2] and p.rect[1] <= y < p.rect[3]
            for p in scene.patches
        )
        if not inside:
            out.append((x, y))
    return out


CLASS_NAMES = {
    ClassLabel.RED: "red",
    ClassLabel.BLUE: "blue",
    ClassLabel.BACKGROUND: "background",
}


def generate_dataset(
    out_dir,
    seed: int = 42,
    n_scenes: int = 6,
    width: int = 320,
    height: int = 200,
    intensities: tuple[float, ...] = (0.25, 0.5, 1.0),
    temperatures: tuple[float, ...] = (6500.0,),
    n_red: int = 2,
    n_blue: int = 2,
    n_gray: int = 1,
    model_epsilon_div: float = 0.0,
) -> DatasetPaths:
    """Write a complete synthetic dataset under ``out_dir``.

    Emits images/ (one PPM per scene per intensity), ground_truth.csv,
    train_annotations.csv, model.cfg (reference model, default with an
    exactly scale-invariant ratio, epsilon 0), and baselines.cfg.
    Byte-for-byte reproducible for a given seed and parameters.
    """
    root = Path(out_dir)
    images_dir = root / "images"
    images_dir.mkdir(parents=True, exist_ok=True)

    scenes = build_scenes(
        seed, n_scenes, width, height,
        n_red=n_red, n_blue=n_blue, n_gray=n_gray, temperatures=temperatures,
    )

    gt_lines = []
    ann_lines = []
    image_ids = []
    for scene in scenes:
        for f in intensities:
            iid = image_id(scene.index, f)
            image_ids.append(iid)
            img = render_scene(scene, width, height, f)
            write_ppm(images_dir / iid, to_uint8(img))
            for patch in scene.patches:
                name = CLASS_NAMES[patch.class_label]
                if patch.class_label in (ClassLabel.RED, ClassLabel.BLUE):
                    left, top, right, bottom = patch.rect
                    gt_lines.append(f"{iid};{left};{top};{right};{bottom};{name}")
                for x, y in _annotation_points(patch):
                    ann_lines.append(f"{iid};{x};{y};{name}")
            for x, y in _background_points(scene, width, height):
                ann_lines.append(f"{iid};{x};{y};background")

    ground_truth = root / "ground_truth.csv"
    ground_truth.write_text("\n".join(gt_lines) + "\n", encoding="ascii")
    train_annotations = root / "train_annotations.csv"
    train_annotations.write_text("\n".join(ann_lines) + "\n", encoding="ascii")

    model_file = root / "model.cfg"
    save_model(model_file, reference_model(scenes, epsilon_div=model_epsilon_div))
    baselines_file = root / "baselines.cfg"
    save_baseline_params(baselines_file, fitted_baselines(scenes, intensities))

    return DatasetPaths(
        root=root,
        images_dir=images_dir,
        ground_truth=ground_truth,
        train_annotations=train_annotations,
        model_file=model_file,
        baselines_file=baselines_file,
        image_ids=image_ids,
        scenes=scenes,
        intensities=tuple(intensities),
    )
