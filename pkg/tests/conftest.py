"""Shared synthetic data for the test suite.

The corpus images are structured (gradients, blobs, stripes) rather than
iid noise: region-count fidelity of the segmenter is a statement about
images with actual spatial coherence, and the mixing oracles do not care
either way.
"""

from __future__ import annotations

import numpy as np
import pytest
from PIL import Image

from hsmix import ClassMap, ImageTensor, one_hot


def corpus_image(idx: int, height: int = 64, width: int = 64, channels: int = 3) -> ImageTensor:
    """Deterministic structured synthetic image number ``idx``."""
    rng = np.random.default_rng(1000 + idx)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    base = (yy / height * rng.uniform(0.3, 1.0) + xx / width * rng.uniform(0.3, 1.0)) / 2
    for _ in range(int(rng.integers(2, 6))):
        cy, cx = rng.uniform(0, height), rng.uniform(0, width)
        r = rng.uniform(5, 20)
        base = base + rng.uniform(-0.5, 0.5) * np.exp(
            -((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * r * r)
        )
    stripes = 0.15 * np.sin(
        2 * np.pi * (xx * rng.uniform(0.02, 0.08) + yy * rng.uniform(0, 0.05))
    )
    img = base + stripes
    img = (img - img.min()) / (img.max() - img.min() + 1e-12)
    if channels == 3:
        shift = rng.uniform(0, 0.3, 3)
        arr = np.clip(img[:, :, None] * (1 - shift) + shift, 0, 1)
    else:
        arr = img[:, :, None]
    return ImageTensor(arr)


def random_image(rng: np.random.Generator, height: int, width: int, channels: int) -> ImageTensor:
    return ImageTensor(rng.random((height, width, channels)))


def random_class_map(rng: np.random.Generator, height: int, width: int, num_classes: int) -> ClassMap:
    return one_hot(rng.integers(0, num_classes, (height, width)), num_classes)


def write_toy_dataset(root, count: int = 6, height: int = 16, width: int = 16, channels: int = 1):
    """PNG dataset of ``count`` structured images with 2-class masks."""
    images = root / "images"
    masks = root / "masks"
    images.mkdir(parents=True, exist_ok=True)
    masks.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        img = corpus_image(500 + i, height, width, channels)
        arr = np.rint(img.data * 255).astype(np.uint8)
        if channels == 1:
            Image.fromarray(arr[:, :, 0], "L").save(images / f"t{i:02d}.png")
        else:
            Image.fromarray(arr, "RGB").save(images / f"t{i:02d}.png")
        yy, xx = np.mgrid[0:height, 0:width]
        mask = ((xx + yy + 3 * i) % (height + width) > (height - 2)).astype(np.uint8)
        Image.fromarray(mask, "L").save(masks / f"t{i:02d}.png")
    return images, masks


@pytest.fixture
def toy_dataset(tmp_path):
    return write_toy_dataset(tmp_path)
