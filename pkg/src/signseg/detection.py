"""Candidate sign regions from segmentation masks.

Connected components are computed per class (red and blue
independently) with labels renumbered into raster-scan first-encounter
order, so the labeling is deterministic whatever the backend produces.
Components are then reduced to bounding-box candidates through
area/aspect/fill filters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .segmentation import ClassLabel, SegmentationMask

_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCTURE_8 = np.ones((3, 3), dtype=bool)


@dataclass
class ComponentLabelMap:
    """Per-pixel component ids for one class; 0 is background.

    Nonzero labels are numbered 1..component_count in the order their
    first pixel appears in a raster scan.
    """

    width: int
    height: int
    labels: np.ndarray
    component_count: int
    class_label: ClassLabel


@dataclass(frozen=True)
class GeometryFilters:
    """Candidate filters: minimum pixel area, bbox aspect (width/height)
    range, and minimum component area / bbox area ratio."""

    min_area: int = 64
    aspect_min: float = 0.5
    aspect_max: float = 2.0
    fill_min: float = 0.3

    def __post_init__(self) -> None:
        if self.min_area < 1:
            raise ValueError("min_area must be >= 1")
        if not 0 < self.aspect_min <= self.aspect_max:
            raise ValueError("require 0 < aspect_min <= aspect_max")
        if not 0.0 <= self.fill_min <= 1.0:
            raise ValueError("fill_min outside [0, 1]")


@dataclass(frozen=True)
class DetectionCandidate:
    """A filtered component: bbox is (left, top, right, bottom),
    inclusive-exclusive pixel coordinates."""

    bbox: tuple[int, int, int, int]
    class_label: ClassLabel
    area: int
    fill_ratio: float


def _raster_order_relabel(raw: np.ndarray, count: int) -> np.ndarray:
    """Renumber labels by first appearance in raster order."""
    if count == 0:
        return raw
    flat = raw.ravel()
    values, first_index = np.unique(flat, return_index=True)
    nonzero = values != 0
    order = np.argsort(first_index[nonzero], kind="stable")
    lut = np.zeros(int(values.max()) + 1, dtype=raw.dtype)
    lut[values[nonzero][order]] = np.arange(1, count + 1, dtype=raw.dtype)
    return lut[raw]


def connected_components(
    mask: SegmentationMask, connectivity: int = 8
) -> dict[ClassLabel, ComponentLabelMap]:
    """Label the red and blue components of a mask independently."""
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    structure = _STRUCTURE_4 if connectivity == 4 else _STRUCTURE_8
    out = {}
    for cls in (ClassLabel.RED, ClassLabel.BLUE):
        binary = mask.labels == cls
        raw, count = ndimage.label(binary, structure=structure)
        labels = _raster_order_relabel(raw.astype(np.int32), count)
        out[cls] = ComponentLabelMap(
            width=mask.width,
            height=mask.height,
            labels=labels,
            component_count=count,
            class_label=cls,
        )
    return out


def extract_candidates(
    cl: ComponentLabelMap, filters: GeometryFilters | None = None
) -> list[DetectionCandidate]:
    """Bounding-box candidates for the components passing all filters,
    sorted by area descending, ties by (top, left)."""
    if filters is None:
        filters = GeometryFilters()
    if cl.component_count == 0:
        return []
    areas = np.bincount(cl.labels.ravel(), minlength=cl.component_count + 1)
    slices = ndimage.find_objects(cl.labels)
    candidates = []
    for label in range(1, cl.component_count + 1):
        sl = slices[label - 1]
        if sl is None:
            continue
        top, bottom = sl[0].start, sl[0].stop
        left, right = sl[1].start, sl[1].stop
        area = int(areas[label])
        width = right - left
        height = bottom - top
        if area < filters.min_area:
            continue
        aspect = width / height
        if not filters.aspect_min <= aspect <= filters.aspect_max:
            continue
        fill = area / (width * height)
        if fill < filters.fill_min:
            continue
        candidates.append(
            DetectionCandidate(
                bbox=(left, top, right, bottom),
                class_label=cl.class_label,
                area=area,
                fill_ratio=fill,
            )
        )
    candidates.sort(key=lambda c: (-c.area, c.bbox[1], c.bbox[0]))
    return candidates


def detect_signs(
    mask: SegmentationMask,
    connectivity: int = 8,
    filters: GeometryFilters | None = None,
) -> list[DetectionCandidate]:
    """Full detection stage: per-class components, filtered and merged."""
    maps = connected_components(mask, connectivity)
    merged: list[DetectionCandidate] = []
    for cls in (ClassLabel.RED, ClassLabel.BLUE):
        merged.extend(extract_candidates(maps[cls], filters))
    merged.sort(key=lambda c: (-c.area, c.bbox[1], c.bbox[0]))
    return merged
