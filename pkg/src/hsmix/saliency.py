"""Static saliency and the relative-saliency map.

Saliency is the classic fine-grained center-surround construction: at six
scales, the mean intensity of a small centered box is compared against the
mean of a larger one, and the absolute differences are summed.  All box
sums come from one integral image.

For bit-reproducibility the intensity is quantized to 32 fractional bits
before the integral image is built, so every box sum is an exact int64 and
matches a naive double loop digit for digit regardless of summation order.
"""

from __future__ import annotations

import numpy as np

from .types import DomainError, ImageTensor, SaliencyMap

SCALES = (1, 2, 3, 4, 5, 6)

# Fixed-point scale for intensity quantization.  2**32 fractional bits on a
# value in [0, 1] keeps every box sum below 2**63 for images up to ~2**30
# pixels, far beyond anything this library meets.
_FP_ONE = np.int64(1) << np.int64(32)


def quantize_intensity(image: ImageTensor) -> np.ndarray:
    """Channel-mean intensity rounded to int64 fixed point (32 frac bits)."""
    gray = image.data.mean(axis=2)
    return np.rint(gray * float(_FP_ONE)).astype(np.int64)


def integral_image(values: np.ndarray) -> np.ndarray:
    """(H+1) x (W+1) zero-padded cumulative sum table of an int64 grid."""
    table = np.zeros((values.shape[0] + 1, values.shape[1] + 1), dtype=np.int64)
    np.cumsum(np.cumsum(values, axis=0, dtype=np.int64), axis=1, out=table[1:, 1:])
    return table


def box_mean(table: np.ndarray, half: int) -> np.ndarray:
    """Per-pixel mean over a (2*half+1)^2 box clipped to the image.

    Means are exact int64 sums divided by each pixel's clipped box area,
    so border pixels average over their in-bounds portion only.
    """
    h = table.shape[0] - 1
    w = table.shape[1] - 1
    rows = np.arange(h)
    cols = np.arange(w)
    r0 = np.maximum(rows - half, 0)
    r1 = np.minimum(rows + half + 1, h)
    c0 = np.maximum(cols - half, 0)
    c1 = np.minimum(cols + half + 1, w)
    sums = (
        table[r1[:, None], c1[None, :]]
        - table[r0[:, None], c1[None, :]]
        - table[r1[:, None], c0[None, :]]
        + table[r0[:, None], c0[None, :]]
    )
    areas = (r1 - r0)[:, None] * (c1 - c0)[None, :]
    return sums / areas


def fine_grained_saliency(image: ImageTensor) -> SaliencyMap:
    """Center-surround saliency over scales 1..6, minmax-normalized.

    At scale s the center box has side 2s+1 and the surround box side
    4s+1; the per-pixel response is |center mean - surround mean| and
    responses are summed over scales before normalization.  A constant
    image yields the all-0.5 map (the normalization convention).
    """
    table = integral_image(quantize_intensity(image))
    raw = np.zeros((image.height, image.width), dtype=np.float64)
    for s in SCALES:
        center = box_mean(table, s)
        surround = box_mean(table, 2 * s)
        raw += np.abs(center - surround)
    lo = raw.min()
    hi = raw.max()
    if hi == lo:
        return SaliencyMap(np.full(raw.shape, 0.5))
    return SaliencyMap((raw - lo) / (hi - lo))


def relative_saliency(
    sa1: SaliencyMap, sa2: SaliencyMap, epsilon: float = 1e-6
) -> tuple[SaliencyMap, SaliencyMap]:
    """Pointwise dominance of ``sa2`` over ``sa1``: the pair (SA21, SA12).

    SA21 = (sa2 + eps/2) / (sa1 + sa2 + eps) and SA12 = 1 - SA21.  The
    eps/2 numerator split keeps the guarded 0/0 case at exactly 0.5.

    Both maps are built from the ratio of the *larger* guarded operand to
    the sum; the smaller side is then literally 1 minus that ratio.  Since
    the larger-side ratio lives in [0.5, 1], the subtraction is exact in
    floating point, which makes swapping the inputs map SA21 to 1 - SA21
    bit for bit (an invariant the mask symmetry checks rely on).
    """
    if sa1.data.shape != sa2.data.shape:
        raise DomainError(
            f"saliency shapes differ: {sa1.data.shape} vs {sa2.data.shape}"
        )
    if epsilon < 0.0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    a = sa1.data + epsilon / 2.0
    b = sa2.data + epsilon / 2.0
    den = a + b
    big = np.maximum(a, b)
    ratio = np.divide(big, den, out=np.full(a.shape, 0.5), where=den > 0.0)
    sa21 = np.where(b > a, ratio, 1.0 - ratio)
    sa21 = np.where(b == a, 0.5, sa21)
    sa12 = np.where(a > b, ratio, 1.0 - ratio)
    sa12 = np.where(b == a, 0.5, sa12)
    return SaliencyMap(sa21), SaliencyMap(sa12)
