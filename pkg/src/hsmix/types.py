"""Shared domain types and elementary conversions.

All types wrap validated, read-only numpy arrays (channel-last, row-major,
float64 in [0, 1] for image-like data).  Instances are immutable after
construction and safe to share across threads; every operation in the
library is a pure function over them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Input violates an operation's contract (bad values, shape mismatch)."""


class UndefinedResultError(ValueError):
    """The requested quantity is mathematically undefined for this input."""


def _frozen(data, dtype) -> np.ndarray:
    arr = np.array(data, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ImageTensor:
    """H x W x C image with intensities in [0, 1].

    C is 1 for single-channel modalities (CT/MRI slices) and 3 for RGB.
    8-bit sources are expected to be divided by 255 before construction.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.data, np.float64)
        if arr.ndim != 3:
            raise DomainError(f"image data must be H x W x C, got shape {arr.shape}")
        if arr.shape[2] not in (1, 3):
            raise DomainError(f"channel count must be 1 or 3, got {arr.shape[2]}")
        if not np.isfinite(arr).all():
            raise DomainError("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError("image intensities must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class ClassMap:
    """H x W x N per-class probabilities; per-pixel sums are 1 within 1e-6.

    ``hard`` marks maps whose values are exactly 0 or 1 (one-hot ground
    truth and anything produced purely by cut-and-paste of such maps).
    """

    data: np.ndarray
    hard: bool = False

    def __post_init__(self):
        arr = _frozen(self.data, np.float64)
        if arr.ndim != 3:
            raise DomainError(f"class map must be H x W x N, got shape {arr.shape}")
        if arr.shape[2] < 2:
            raise DomainError(f"need at least 2 classes, got {arr.shape[2]}")
        if not np.isfinite(arr).all():
            raise DomainError("class map contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError("class probabilities must lie in [0, 1]")
        sums = arr.sum(axis=2)
        if np.abs(sums - 1.0).max() > 1e-6:
            raise DomainError("per-pixel class probabilities must sum to 1 within 1e-6")
        if self.hard and not np.all((arr == 0.0) | (arr == 1.0)):
            raise DomainError("hard class map must contain only 0/1 values")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def num_classes(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class SuperpixelGrid:
    """H x W integer labels partitioning the image into num_labels regions.

    Labels are compact (every value in [0, num_labels) occurs at least
    once).  Connectivity of each region is a property of the producing
    operation, not of the type: grids composed from two sources may
    legitimately contain clipped, disconnected regions.
    """

    labels: np.ndarray
    num_labels: int

    def __post_init__(self):
        arr = _frozen(self.labels, np.int64)
        if arr.ndim != 2:
            raise DomainError(f"label grid must be H x W, got shape {arr.shape}")
        if self.num_labels < 1:
            raise DomainError("num_labels must be >= 1")
        if arr.min() < 0 or arr.max() >= self.num_labels:
            raise DomainError("labels must lie in [0, num_labels)")
        counts = np.bincount(arr.ravel(), minlength=self.num_labels)
        if (counts == 0).any():
            missing = int(np.flatnonzero(counts == 0)[0])
            raise DomainError(f"label {missing} has no pixels; labels must be compact")
        object.__setattr__(self, "labels", arr)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True)
class SaliencyMap:
    """H x W saliency values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.data, np.float64)
        if arr.ndim != 2:
            raise DomainError(f"saliency map must be H x W, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise DomainError("saliency map contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError("saliency values must lie in [0, 1]")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class MixMask:
    """H x W mixing coefficients; ``kind`` is 'hard' ({0,1}) or 'soft' ([0,1])."""

    data: np.ndarray
    kind: str

    def __post_init__(self):
        arr = _frozen(self.data, np.float64)
        if arr.ndim != 2:
            raise DomainError(f"mix mask must be H x W, got shape {arr.shape}")
        if self.kind not in ("hard", "soft"):
            raise DomainError(f"mask kind must be 'hard' or 'soft', got {self.kind!r}")
        if not np.isfinite(arr).all():
            raise DomainError("mix mask contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError("mix coefficients must lie in [0, 1]")
        if self.kind == "hard" and not np.all((arr == 0.0) | (arr == 1.0)):
            raise DomainError("hard mask must contain only 0/1 values")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class AugConfig:
    """Knobs of one augmentation run.

    ``grid_strategy`` is either ``"superpixel"`` or ``"square:K"`` (a K x K
    rectangular grid, the contour-free ablation).  ``lambda_strategy`` is
    ``"saliency"`` (per-region relative-saliency means) or ``"random"``
    (one global blend ratio per pair, classic-mixup style).
    """

    l_min: int = 30
    l_max: int = 80
    p: float = 0.3
    compactness: float = 10.0
    slic_iters: int = 10
    epsilon: float = 1e-6
    seed: int = 0
    grid_strategy: str = "superpixel"
    lambda_strategy: str = "saliency"

    def __post_init__(self):
        if not (1 <= self.l_min <= self.l_max):
            raise DomainError(f"need 1 <= l_min <= l_max, got [{self.l_min}, {self.l_max}]")
        if not (0.0 < self.p < 1.0):
            raise DomainError(f"selection probability must be in (0, 1), got {self.p}")
        if self.compactness <= 0.0:
            raise DomainError(f"compactness must be > 0, got {self.compactness}")
        if self.slic_iters < 1:
            raise DomainError(f"slic_iters must be >= 1, got {self.slic_iters}")
        if self.epsilon < 0.0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.lambda_strategy not in ("saliency", "random"):
            raise DomainError(f"unknown lambda strategy: {self.lambda_strategy!r}")
        self.square_cells()  # validates grid_strategy format

    def square_cells(self) -> int | None:
        """K for a 'square:K' strategy, None for 'superpixel'."""
        if self.grid_strategy == "superpixel":
            return None
        if self.grid_strategy.startswith("square:"):
            try:
                k = int(self.grid_strategy.split(":", 1)[1])
            except ValueError:
                raise DomainError(f"bad square grid spec: {self.grid_strategy!r}") from None
            if k < 1:
                raise DomainError(f"square grid needs K >= 1, got {k}")
            return k
        raise DomainError(f"unknown grid strategy: {self.grid_strategy!r}")


def one_hot(mask: np.ndarray, num_classes: int) -> ClassMap:
    """Expand an H x W array of class ids into a hard ClassMap."""
    ids = np.asarray(mask)
    if ids.ndim != 2:
        raise DomainError(f"class-id mask must be H x W, got shape {ids.shape}")
    if not np.issubdtype(ids.dtype, np.integer):
        raise DomainError(f"class ids must be integers, got dtype {ids.dtype}")
    if ids.min() < 0:
        raise DomainError("class ids must be >= 0")
    if ids.max() >= num_classes:
        raise DomainError(f"class id {int(ids.max())} out of range for {num_classes} classes")
    data = np.zeros(ids.shape + (num_classes,), dtype=np.float64)
    np.put_along_axis(data, ids[..., None].astype(np.int64), 1.0, axis=2)
    return ClassMap(data, hard=True)


def argmax_decode(class_map: ClassMap) -> np.ndarray:
    """Per-pixel most-likely class id; ties resolve to the lowest index."""
    return np.argmax(class_map.data, axis=2).astype(np.int64)


def _minmax_scale(values: np.ndarray) -> np.ndarray:
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.full(values.shape, 0.5)
    return (values - lo) / (hi - lo)


def minmax_normalize(saliency: SaliencyMap) -> SaliencyMap:
    """Affinely rescale to span [0, 1]; a constant map becomes all 0.5.

    The 0.5 convention keeps relative-saliency ratios symmetric on
    featureless images instead of collapsing them to one side.
    """
    return SaliencyMap(_minmax_scale(saliency.data))
