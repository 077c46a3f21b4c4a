"""Reference loss and evaluation metrics for segmentation outputs.

These are desk-scale oracles for validating training integrations, not
optimized kernels.  Everything is plain numpy; the Hausdorff computation
uses exact integer squared distances so results are reproducible digit
for digit across machines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import ClassMap, DomainError, UndefinedResultError

_LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class PredictionMap:
    """H x W x N predicted class probabilities; per-pixel sums are 1."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        arr.setflags(write=False)
        if arr.ndim != 3:
            raise DomainError(f"prediction must be H x W x N, got shape {arr.shape}")
        if arr.shape[2] < 2:
            raise DomainError(f"need at least 2 classes, got {arr.shape[2]}")
        if not np.isfinite(arr).all():
            raise DomainError("prediction contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError("prediction probabilities must lie in [0, 1]")
        if np.abs(arr.sum(axis=2) - 1.0).max() > 1e-6:
            raise DomainError("per-pixel probabilities must sum to 1 within 1e-6")
        object.__setattr__(self, "data", arr)


def dice_ce_loss(preds, targets) -> float:
    """Cross-entropy plus dice complement, averaged over the batch.

    CE is the mean over all B*H*W pixels of sum_n y_n * (-log p_n); for
    hard targets this is the usual log-likelihood of the true class, and
    soft targets weight every class by its probability.  The dice term
    for each image compares the full probability volumes:

        d_j = 1 - 2 * sum(p * y) / sum(p^2 + y^2)

    with sums over all pixels and classes, then averages d_j over the
    batch.  Probabilities are clamped to [1e-12, 1] inside the log only.
    """
    preds = list(preds)
    targets = list(targets)
    if len(preds) == 0 or len(preds) != len(targets):
        raise DomainError(
            f"need equal non-empty batches, got {len(preds)} predictions "
            f"and {len(targets)} targets"
        )
    shape = preds[0].data.shape
    for pred, target in zip(preds, targets):
        if not isinstance(pred, PredictionMap):
            raise DomainError("predictions must be PredictionMap instances")
        if not isinstance(target, ClassMap):
            raise DomainError("targets must be ClassMap instances")
        if pred.data.shape != shape or target.data.shape != shape:
            raise DomainError("all batch entries must share one H x W x N shape")

    ce_total = 0.0
    dice_total = 0.0
    for pred, target in zip(preds, targets):
        p = pred.data
        y = target.data
        ce_total += float((y * -np.log(np.clip(p, _LOG_FLOOR, 1.0))).sum())
        overlap = float((p * y).sum())
        energy = float((p * p + y * y).sum())
        dice_total += 1.0 - 2.0 * overlap / energy
    batch = len(preds)
    ce = ce_total / (batch * shape[0] * shape[1])
    return ce + dice_total / batch


def _class_sets(pred_ids: np.ndarray, target_ids: np.ndarray, cls: int):
    pred_ids = np.asarray(pred_ids)
    target_ids = np.asarray(target_ids)
    if pred_ids.shape != target_ids.shape or pred_ids.ndim != 2:
        raise DomainError(
            f"id maps must share one H x W shape, got {pred_ids.shape} "
            f"and {target_ids.shape}"
        )
    return pred_ids == cls, target_ids == cls


def dice_coefficient(pred_ids: np.ndarray, target_ids: np.ndarray, cls: int) -> float:
    """2|A&B| / (|A|+|B|) for one class; empty vs empty counts as 1."""
    a, b = _class_sets(pred_ids, target_ids, cls)
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int((a & b).sum()) / total


def jaccard(pred_ids: np.ndarray, target_ids: np.ndarray, cls: int) -> float:
    """Intersection over union for one class; empty vs empty counts as 1."""
    a, b = _class_sets(pred_ids, target_ids, cls)
    union = int((a | b).sum())
    if union == 0:
        return 1.0
    return int((a & b).sum()) / union


def boundary_pixels(mask: np.ndarray) -> np.ndarray:
    """(K, 2) row/col coordinates of mask pixels touching the outside.

    A pixel is boundary when any 4-neighbor is outside the mask; the
    image border counts as outside, so a region hugging the edge still
    has a boundary there.
    """
    mask = np.asarray(mask, dtype=bool)
    padded = np.pad(mask, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return np.argwhere(mask & ~interior).astype(np.int64)


def _directed_nearest_sq(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """For each src point, min squared distance to dst, exact in int64."""
    out = np.empty(src.shape[0], dtype=np.int64)
    block = max(1, 10_000_000 // max(1, dst.shape[0]))
    for start in range(0, src.shape[0], block):
        chunk = src[start : start + block]
        dr = chunk[:, 0:1] - dst[None, :, 0]
        dc = chunk[:, 1:2] - dst[None, :, 1]
        out[start : start + block] = (dr * dr + dc * dc).min(axis=1)
    return out


def hd95(pred_ids: np.ndarray, target_ids: np.ndarray, cls: int) -> float:
    """95th percentile (nearest rank) of symmetric boundary distances.

    Directed nearest-neighbor distances are gathered from both boundary
    sets, pooled, and the rank-ceil(0.95 n) order statistic is returned.
    The rank is computed in integer arithmetic so sizes at exact
    multiples of 20 do not wobble on float rounding.
    """
    a, b = _class_sets(pred_ids, target_ids, cls)
    pts_a = boundary_pixels(a)
    pts_b = boundary_pixels(b)
    if pts_a.shape[0] == 0 or pts_b.shape[0] == 0:
        raise UndefinedResultError(
            f"class {cls} has an empty boundary on one side; hd95 is undefined"
        )
    pooled_sq = np.concatenate(
        [_directed_nearest_sq(pts_a, pts_b), _directed_nearest_sq(pts_b, pts_a)]
    )
    distances = np.sort(np.sqrt(pooled_sq.astype(np.float64)))
    rank = -((-95 * distances.size) // 100)
    return float(distances[rank - 1])
