"""Superpixel-based image/mask mixing augmentation for segmentation.

Two augmented views per input pair: a hard view that cut-and-pastes
randomly selected superpixels of the second image into the first, and a
soft view that blends the pair pointwise with per-superpixel fractions
derived from relative saliency.  Includes SLIC segmentation, saliency,
reference loss/metrics, and a deterministic batch CLI.
"""

from .metrics import (
    PredictionMap,
    dice_ce_loss,
    dice_coefficient,
    hd95,
    jaccard,
)
from .mixer import (
    LambdaVector,
    PairDiagnostics,
    PairResult,
    SelectionSet,
    hard_mask,
    hard_mix,
    hsmix_pair,
    mixed_grid,
    sample_selection,
    soft_mask,
    soft_mix,
    superpixel_lambda,
)
from .pipeline import DatasetEntry, DatasetIndex, form_pairs, run_batch, scan_dataset, sweep
from .rng import PairStreams, derived_generator
from .saliency import fine_grained_saliency, relative_saliency
from .superpixel import (
    boundary_overlay,
    compute_superpixels,
    enforce_connectivity,
    square_grid,
)
from .types import (
    AugConfig,
    ClassMap,
    DomainError,
    ImageTensor,
    MixMask,
    SaliencyMap,
    SuperpixelGrid,
    UndefinedResultError,
    argmax_decode,
    minmax_normalize,
    one_hot,
)

__version__ = "0.1.0"

__all__ = [
    "AugConfig",
    "ClassMap",
    "DatasetEntry",
    "DatasetIndex",
    "DomainError",
    "ImageTensor",
    "LambdaVector",
    "MixMask",
    "PairDiagnostics",
    "PairResult",
    "PairStreams",
    "PredictionMap",
    "SaliencyMap",
    "SelectionSet",
    "SuperpixelGrid",
    "UndefinedResultError",
    "argmax_decode",
    "boundary_overlay",
    "compute_superpixels",
    "derived_generator",
    "dice_ce_loss",
    "dice_coefficient",
    "enforce_connectivity",
    "fine_grained_saliency",
    "form_pairs",
    "hard_mask",
    "hard_mix",
    "hd95",
    "hsmix_pair",
    "jaccard",
    "minmax_normalize",
    "mixed_grid",
    "one_hot",
    "relative_saliency",
    "run_batch",
    "sample_selection",
    "scan_dataset",
    "soft_mask",
    "soft_mix",
    "square_grid",
    "superpixel_lambda",
    "sweep",
]
