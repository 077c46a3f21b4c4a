"""Superpixel mixing: selection, hard cut-and-paste, soft saliency blending.

The full pair recipe lives in :func:`hsmix_pair`:

1. segment both images (or lay a shared square grid),
2. Bernoulli-select superpixels of the second grid and paste them into the
   first image/mask pair (hard path),
3. compose the mixed grid, average relative saliency per region into
   blend fractions, and blend the pair pointwise (soft path).

Both paths share one selection mask per pair, so the hard and soft outputs
of a pair are correlated by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import PairStreams
from .saliency import fine_grained_saliency, relative_saliency
from .superpixel import compute_superpixels, square_grid
from .types import (
    AugConfig,
    ClassMap,
    DomainError,
    ImageTensor,
    MixMask,
    SaliencyMap,
    SuperpixelGrid,
)


@dataclass(frozen=True)
class SelectionSet:
    """Labels of the second grid chosen for pasting.

    ``rng_state`` records which derived stream produced the draw, as a
    (master_seed, pair_index, purpose) tuple when known.
    """

    selected: np.ndarray
    p: float
    rng_state: tuple | None = None

    def __post_init__(self):
        arr = np.array(self.selected, dtype=np.int64, copy=True)
        arr.setflags(write=False)
        if arr.ndim != 1:
            raise DomainError("selected labels must be a flat sequence")
        if arr.size and (np.diff(arr) <= 0).any():
            raise DomainError("selected labels must be strictly ascending")
        object.__setattr__(self, "selected", arr)


@dataclass(frozen=True)
class LambdaVector:
    """Per-label blend fractions, one per label of the mixed grid."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        arr.setflags(write=False)
        if arr.ndim != 1:
            raise DomainError("lambda values must be a flat sequence")
        if not np.isfinite(arr).all():
            raise DomainError("lambda values must be finite")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise DomainError("lambda values must lie in [0, 1]")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


def sample_selection(
    grid2: SuperpixelGrid, p: float, rng: np.random.Generator, rng_state: tuple | None = None
) -> SelectionSet:
    """Include each label of ``grid2`` independently with probability p.

    One uniform is drawn per label in ascending label order, so the
    outcome depends only on the stream state, not on how callers batch
    the work.  p=0 and p=1 are allowed as exact force-exclude and
    force-include modes for tests; configs keep p strictly inside (0,1).
    """
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"selection probability must be in [0, 1], got {p}")
    draws = rng.random(grid2.num_labels)
    return SelectionSet(np.flatnonzero(draws < p), p, rng_state)


def hard_mask(grid2: SuperpixelGrid, sel: SelectionSet) -> MixMask:
    """Binary mask: 1 on every pixel whose grid2 label was selected."""
    if sel.selected.size and (
        sel.selected[0] < 0 or sel.selected[-1] >= grid2.num_labels
    ):
        raise DomainError("selection contains labels outside the grid's range")
    member = np.zeros(grid2.num_labels, dtype=bool)
    member[sel.selected] = True
    return MixMask(member[grid2.labels].astype(np.float64), "hard")


def _check_pair_dims(x1: ImageTensor, x2: ImageTensor, y1: ClassMap, y2: ClassMap):
    if x1.data.shape != x2.data.shape:
        raise DomainError(f"image shapes differ: {x1.data.shape} vs {x2.data.shape}")
    if y1.data.shape != y2.data.shape:
        raise DomainError(f"mask shapes differ: {y1.data.shape} vs {y2.data.shape}")
    if (x1.height, x1.width) != (y1.height, y1.width):
        raise DomainError(
            f"image is {x1.height}x{x1.width} but mask is {y1.height}x{y1.width}"
        )


def hard_mix(
    x1: ImageTensor,
    x2: ImageTensor,
    y1: ClassMap,
    y2: ClassMap,
    mh: MixMask,
) -> tuple[ImageTensor, ClassMap]:
    """Paste the masked region of the second pair into the first.

    Pixels are copied verbatim (selection, not arithmetic), so outputs
    are bit-exact draws from one source or the other.
    """
    _check_pair_dims(x1, x2, y1, y2)
    if (mh.height, mh.width) != (x1.height, x1.width):
        raise DomainError("mask dimensions do not match the images")
    if mh.kind != "hard":
        raise DomainError("hard_mix requires a hard mask")
    take2 = mh.data.astype(bool)
    x_h = np.where(take2[:, :, None], x2.data, x1.data)
    y_h = np.where(take2[:, :, None], y2.data, y1.data)
    return ImageTensor(x_h), ClassMap(y_h, hard=y1.hard and y2.hard)


def mixed_grid(sp1: SuperpixelGrid, sp2: SuperpixelGrid, mh: MixMask) -> SuperpixelGrid:
    """Partition of the mixed image: sp2 regions inside the mask, sp1 outside.

    sp2 labels are offset by sp1's label count before compaction so the
    two sources can never collide.  Regions clipped by the mask may be
    disconnected; downstream averaging runs over each label's full pixel
    set regardless, so connectivity is deliberately not enforced here.
    """
    if sp1.labels.shape != sp2.labels.shape:
        raise DomainError(f"grid shapes differ: {sp1.labels.shape} vs {sp2.labels.shape}")
    if (mh.height, mh.width) != (sp1.height, sp1.width):
        raise DomainError("mask dimensions do not match the grids")
    if mh.kind != "hard":
        raise DomainError("mixed_grid requires a hard mask")
    take2 = mh.data.astype(bool)
    combined = np.where(take2, sp2.labels + sp1.num_labels, sp1.labels)
    _, compact = np.unique(combined, return_inverse=True)
    compact = compact.reshape(combined.shape)
    return SuperpixelGrid(compact, int(compact.max()) + 1)


def superpixel_lambda(spm: SuperpixelGrid, sa21: SaliencyMap) -> LambdaVector:
    """Mean relative saliency over each region of the mixed grid."""
    if (spm.height, spm.width) != (sa21.height, sa21.width):
        raise DomainError("grid and saliency dimensions differ")
    flat = spm.labels.ravel()
    counts = np.bincount(flat, minlength=spm.num_labels)
    if (counts == 0).any():
        raise RuntimeError("mixed grid has an empty label after compaction")
    sums = np.bincount(flat, weights=sa21.data.ravel(), minlength=spm.num_labels)
    return LambdaVector(np.clip(sums / counts, 0.0, 1.0))


def soft_mask(spm: SuperpixelGrid, lambdas: LambdaVector) -> MixMask:
    """Broadcast per-label fractions onto the pixel grid."""
    if len(lambdas) != spm.num_labels:
        raise DomainError(
            f"{len(lambdas)} lambda values for {spm.num_labels} labels"
        )
    return MixMask(lambdas.values[spm.labels], "soft")


def soft_mix(
    x1: ImageTensor,
    x2: ImageTensor,
    y1: ClassMap,
    y2: ClassMap,
    ms: MixMask,
) -> tuple[ImageTensor, ClassMap]:
    """Pointwise convex blend of the pair under the mixing mask.

    Masks blend channel-wise over the probability stacks, so per-pixel
    class sums stay at 1 and the result can feed soft-target losses or
    be re-hardened with argmax_decode, whichever the consumer wants.
    """
    _check_pair_dims(x1, x2, y1, y2)
    if (ms.height, ms.width) != (x1.height, x1.width):
        raise DomainError("mask dimensions do not match the images")
    m = ms.data[:, :, None]
    x_s = np.clip((1.0 - m) * x1.data + m * x2.data, 0.0, 1.0)
    y_s = np.clip((1.0 - m) * y1.data + m * y2.data, 0.0, 1.0)
    return ImageTensor(x_s), ClassMap(y_s, hard=False)


@dataclass(frozen=True)
class PairDiagnostics:
    """Every intermediate of one pair run, for inspection and overlays."""

    sp1: SuperpixelGrid
    sp2: SuperpixelGrid
    spm: SuperpixelGrid
    sa1: SaliencyMap
    sa2: SaliencyMap
    sa21: SaliencyMap
    sa12: SaliencyMap
    mh: MixMask
    ms: MixMask
    lambdas: LambdaVector
    selection: SelectionSet
    l1: int
    l2: int


@dataclass(frozen=True)
class PairResult:
    hard: tuple[ImageTensor, ClassMap]
    soft: tuple[ImageTensor, ClassMap]
    diagnostics: PairDiagnostics


def hsmix_pair(
    x1: ImageTensor,
    x2: ImageTensor,
    y1: ClassMap,
    y2: ClassMap,
    cfg: AugConfig,
    streams: PairStreams,
) -> PairResult:
    """Run the full hard+soft recipe on one image/mask pair.

    Superpixel counts l1, l2 are drawn uniformly from [l_min, l_max]
    (inclusive) on dedicated streams; the square-grid strategy uses one
    shared k x k grid for both images and consumes no draws.  The
    lambda_strategy='random' ablation replaces per-region saliency means
    with a single global fraction drawn once per pair.
    """
    _check_pair_dims(x1, x2, y1, y2)
    k = cfg.square_cells()
    if k is None:
        l1 = int(streams.stream("l1").integers(cfg.l_min, cfg.l_max + 1))
        l2 = int(streams.stream("l2").integers(cfg.l_min, cfg.l_max + 1))
        sp1 = compute_superpixels(x1, l1, cfg.compactness, cfg.slic_iters)
        sp2 = compute_superpixels(x2, l2, cfg.compactness, cfg.slic_iters)
    else:
        sp1 = sp2 = square_grid(x1.height, x1.width, k)
        l1 = l2 = k * k
    selection = sample_selection(
        sp2, cfg.p, streams.stream("selection"), streams.state_tag("selection")
    )
    mh = hard_mask(sp2, selection)
    x_h, y_h = hard_mix(x1, x2, y1, y2, mh)

    sa1 = fine_grained_saliency(x1)
    sa2 = fine_grained_saliency(x2)
    sa21, sa12 = relative_saliency(sa1, sa2, cfg.epsilon)
    spm = mixed_grid(sp1, sp2, mh)
    if cfg.lambda_strategy == "saliency":
        lambdas = superpixel_lambda(spm, sa21)
    else:
        lam = float(streams.stream("lambda").random())
        lambdas = LambdaVector(np.full(spm.num_labels, lam))
    ms = soft_mask(spm, lambdas)
    x_s, y_s = soft_mix(x1, x2, y1, y2, ms)

    diagnostics = PairDiagnostics(
        sp1=sp1,
        sp2=sp2,
        spm=spm,
        sa1=sa1,
        sa2=sa2,
        sa21=sa21,
        sa12=sa12,
        mh=mh,
        ms=ms,
        lambdas=lambdas,
        selection=selection,
        l1=l1,
        l2=l2,
    )
    return PairResult(hard=(x_h, y_h), soft=(x_s, y_s), diagnostics=diagnostics)
