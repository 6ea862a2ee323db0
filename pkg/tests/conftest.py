"""Shared fixtures: seeded pixels, the synthetic dataset, and the
hand-verified five-image matching fixture."""

from __future__ import annotations

import numpy as np
import pytest

from signseg import RgbPixel
from signseg.synth import generate_dataset


def random_pixels(seed: int, n: int, low: float = 0.0, high: float = 1.0):
    rng = np.random.default_rng(seed)
    return [RgbPixel(*row) for row in rng.uniform(low, high, (n, 3))]


@pytest.fixture(scope="session")
def synth_dataset(tmp_path_factory):
    """The default seeded synthetic dataset (6 scenes, 3 intensities,
    2 red + 2 blue signs + 1 gray distractor per scene)."""
    root = tmp_path_factory.mktemp("synth")
    return generate_dataset(root, seed=42)


# Five images' worth of detection/truth boxes with hand-verified IoUs
# (left, top, right, bottom; right/bottom exclusive):
#   image 1: det == truth (10,10,40,40)              -> IoU 1.0    -> TP
#   image 2: det (5,0,15,10) vs truth (0,0,10,10)    -> 50/150=1/3 -> FP+FN
#   image 3: det (22,20,62,60) vs truth (20,20,60,60)-> 1520/1680  -> TP
#   image 4: det (1,1,31,31) vs truth (0,0,30,30)    -> 841/959    -> TP
#   image 5: no det, truth (100,100,140,140)         ->            -> FN
# Totals: detections 4, truths 5, TP=3, FP=1, FN=2 -> P 75.00, R 60.00.
FIVE_IMAGE_BOXES = [
    ([(10, 10, 40, 40)], [(10, 10, 40, 40)]),
    ([(5, 0, 15, 10)], [(0, 0, 10, 10)]),
    ([(22, 20, 62, 60)], [(20, 20, 60, 60)]),
    ([(1, 1, 31, 31)], [(0, 0, 30, 30)]),
    ([], [(100, 100, 140, 140)]),
]
