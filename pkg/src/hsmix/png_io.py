"""PNG reading and writing for images and masks.

Input images are 8-bit single-channel or RGB PNG; input masks are 8-bit
single-channel PNG of integer class ids.  Outputs: 8-bit PNG for images
and hard (class-id) masks, and one 16-bit grayscale PNG per class for
soft masks (value = round(65535 * probability)) plus a JSON sidecar
naming the channel files.

Encoding goes through Pillow with fixed parameters, so a given array
always produces the same bytes; the batch determinism guarantees lean
on that.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .types import ClassMap, DomainError, ImageTensor

SOFT_SCALE = 65535


def read_image(path) -> ImageTensor:
    """Load an 8-bit L or RGB PNG as float intensities in [0, 1]."""
    with Image.open(path) as im:
        if im.mode not in ("L", "RGB"):
            raise DomainError(f"{path}: expected 8-bit L or RGB image, got mode {im.mode}")
        arr = np.asarray(im, dtype=np.float64) / 255.0
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return ImageTensor(arr)


def read_mask(path) -> np.ndarray:
    """Load an 8-bit single-channel PNG of class ids as an int64 grid."""
    with Image.open(path) as im:
        if im.mode != "L":
            raise DomainError(f"{path}: expected 8-bit single-channel mask, got mode {im.mode}")
        return np.asarray(im).astype(np.int64)


def write_image(path, image: ImageTensor):
    """Write as 8-bit PNG (L for one channel, RGB for three)."""
    arr = np.rint(image.data * 255.0).astype(np.uint8)
    if image.channels == 1:
        Image.fromarray(arr[:, :, 0], mode="L").save(path, format="PNG")
    else:
        Image.fromarray(arr, mode="RGB").save(path, format="PNG")


def write_hard_mask(path, ids: np.ndarray):
    """Write integer class ids as an 8-bit single-channel PNG."""
    ids = np.asarray(ids)
    if ids.ndim != 2:
        raise DomainError(f"class-id mask must be H x W, got shape {ids.shape}")
    if ids.min() < 0 or ids.max() > 255:
        raise DomainError("class ids must fit in [0, 255] for 8-bit PNG masks")
    Image.fromarray(ids.astype(np.uint8), mode="L").save(path, format="PNG")


def write_soft_mask(directory, stem: str, mask: ClassMap) -> list[str]:
    """Write one 16-bit PNG per class plus a JSON sidecar.

    Returns the file names written (channel images first, sidecar last),
    relative to ``directory``.
    """
    directory = Path(directory)
    names = []
    for n in range(mask.num_classes):
        channel = np.rint(mask.data[:, :, n] * SOFT_SCALE).astype(np.uint16)
        name = f"{stem}_class{n:02d}.png"
        # uint16 input infers mode I;16, Pillow's 16-bit grayscale
        Image.fromarray(channel).save(directory / name, format="PNG")
        names.append(name)
    sidecar = {"scale": SOFT_SCALE, "classes": names}
    sidecar_name = f"{stem}.json"
    with open(directory / sidecar_name, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    names.append(sidecar_name)
    return names


def read_soft_mask(sidecar_path) -> np.ndarray:
    """Decode the per-class 16-bit PNGs back into an H x W x N float array.

    Values carry the quantization of the encoding (error at most
    0.5/65535 per channel); per-pixel sums are close to but not exactly
    1, so the result is returned raw rather than as a ClassMap.
    """
    sidecar_path = Path(sidecar_path)
    with open(sidecar_path) as fh:
        sidecar = json.load(fh)
    scale = sidecar["scale"]
    channels = []
    for name in sidecar["classes"]:
        with Image.open(sidecar_path.parent / name) as im:
            channels.append(np.asarray(im, dtype=np.float64) / scale)
    return np.stack(channels, axis=2)
