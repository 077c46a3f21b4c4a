"""SLIC superpixel segmentation and the square-grid ablation.

The clustering minimizes D = d_color + (c / S) * d_spatial with
S = sqrt(H * W / l), both distances Euclidean.  RGB images are measured
in CIELAB (D65 white point); single-channel images use raw intensity
scaled to a 0-100 range so the same compactness values stay meaningful
across modalities.

Determinism contract: identical inputs give a bit-identical grid.  All
tie-breaks are pinned (assignment ties go to the lowest center index,
absorption ties to the lowest component id) and the per-center update
order is fixed, so the result is independent of any internal batching.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .types import DomainError, ImageTensor, SuperpixelGrid

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

# D65 reference white and the linear-RGB -> XYZ matrix (sRGB primaries).
_WHITE = np.array([0.95047, 1.0, 1.08883])
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)


def rgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """sRGB in [0,1] (H x W x 3) to CIELAB under D65."""
    linear = np.where(rgb > 0.04045, ((rgb + 0.055) / 1.055) ** 2.4, rgb / 12.92)
    xyz = linear @ _RGB_TO_XYZ.T
    t = xyz / _WHITE
    delta = 6.0 / 29.0
    f = np.where(t > delta**3, np.cbrt(t), t / (3.0 * delta**2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def _feature_space(image: ImageTensor) -> np.ndarray:
    if image.channels == 3:
        return rgb_to_lab(image.data)
    return image.data * 100.0


def _gradient(feat: np.ndarray) -> np.ndarray:
    """Squared right/down intensity differences summed over channels.

    Edges replicate, so the last row/column contribute zero difference
    in that direction.
    """
    right = np.zeros(feat.shape[:2])
    down = np.zeros(feat.shape[:2])
    right[:, :-1] = ((feat[:, 1:] - feat[:, :-1]) ** 2).sum(axis=2)
    down[:-1, :] = ((feat[1:] - feat[:-1]) ** 2).sum(axis=2)
    return right + down


def _initial_centers(height: int, width: int, l: int) -> tuple[np.ndarray, int, int]:
    """Cell-centered seed lattice covering the image with about l cells.

    Returns (positions, n_rows, n_cols); positions are sub-pixel (row, col)
    pairs at the continuous center of each lattice cell, in row-major cell
    order.  Sub-pixel placement keeps the seed equidistant from its cell's
    pixel rows/columns, which matters for exact block partitions on
    constant images.
    """
    n_cols = min(int(np.ceil(np.sqrt(l * width / height))), l, width)
    n_cols = max(n_cols, 1)
    n_rows = max(min(int(np.ceil(l / n_cols)), height), 1)
    rows = (np.arange(n_rows) + 0.5) * (height / n_rows) - 0.5
    cols = (np.arange(n_cols) + 0.5) * (width / n_cols) - 0.5
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    return np.stack([rr.ravel(), cc.ravel()], axis=1), n_rows, n_cols


def _perturb_seeds(positions: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Move each seed to a strictly lower-gradient pixel in its 3x3 patch.

    The patch is centered on the seed's nearest pixel.  A move happens
    only when a candidate's gradient is strictly below the best so far,
    scanning in row-major order; on a flat patch the seed keeps its
    original sub-pixel position.
    """
    height, width = grad.shape
    out = positions.copy()
    for k in range(positions.shape[0]):
        r = int(np.clip(np.rint(positions[k, 0]), 0, height - 1))
        c = int(np.clip(np.rint(positions[k, 1]), 0, width - 1))
        best = grad[r, c]
        best_rc = None
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                rr, cc = r + dr, c + dc
                if 0 <= rr < height and 0 <= cc < width and grad[rr, cc] < best:
                    best = grad[rr, cc]
                    best_rc = (rr, cc)
        if best_rc is not None:
            out[k] = best_rc
    return out


def _assign(
    feat: np.ndarray,
    positions: np.ndarray,
    colors: np.ndarray,
    step: float,
    ratio: float,
) -> np.ndarray:
    """One SLIC assignment pass over 2S x 2S windows.

    Updates use strict less-than on D, so with centers visited in
    ascending index order ties resolve to the lowest index.  Pixels no
    window reaches (possible on extreme aspect ratios) are assigned by a
    full pass over all centers afterwards.
    """
    height, width = feat.shape[:2]
    dist = np.full((height, width), np.inf)
    labels = np.full((height, width), -1, dtype=np.int64)
    for k in range(positions.shape[0]):
        pr, pc = positions[k]
        r0 = max(0, int(np.floor(pr - step)))
        r1 = min(height, int(np.ceil(pr + step)) + 1)
        c0 = max(0, int(np.floor(pc - step)))
        c1 = min(width, int(np.ceil(pc + step)) + 1)
        if r0 >= r1 or c0 >= c1:
            continue
        block = feat[r0:r1, c0:c1]
        d_color = np.sqrt(((block - colors[k]) ** 2).sum(axis=2))
        rr = np.arange(r0, r1, dtype=np.float64)[:, None] - pr
        cc = np.arange(c0, c1, dtype=np.float64)[None, :] - pc
        d_spatial = np.sqrt(rr**2 + cc**2)
        d = d_color + ratio * d_spatial
        window_dist = dist[r0:r1, c0:c1]
        closer = d < window_dist
        window_dist[closer] = d[closer]
        labels[r0:r1, c0:c1][closer] = k
    missing = labels < 0
    if missing.any():
        rows, cols = np.nonzero(missing)
        f = feat[rows, cols]
        d_color = np.sqrt(((f[:, None, :] - colors[None, :, :]) ** 2).sum(axis=2))
        dr = rows[:, None] - positions[None, :, 0]
        dc = cols[:, None] - positions[None, :, 1]
        d = d_color + ratio * np.sqrt(dr**2 + dc**2)
        labels[rows, cols] = np.argmin(d, axis=1)
    return labels


def compute_superpixels(
    image: ImageTensor, l: int, compactness: float, iters: int = 10
) -> SuperpixelGrid:
    """Cluster the image into roughly ``l`` compact, connected regions.

    The realized label count lands in [l/2, 2l] for ordinary images: the
    seed lattice rounds the requested count up a little and connectivity
    enforcement merges fragments back down.
    """
    if l < 1:
        raise DomainError(f"requested superpixel count must be >= 1, got {l}")
    if l > image.height * image.width:
        raise DomainError(
            f"requested {l} superpixels for {image.height * image.width} pixels"
        )
    if compactness <= 0.0:
        raise DomainError(f"compactness must be > 0, got {compactness}")
    if iters < 1:
        raise DomainError(f"iteration count must be >= 1, got {iters}")

    feat = _feature_space(image)
    positions, _, _ = _initial_centers(image.height, image.width, l)
    positions = _perturb_seeds(positions, _gradient(feat))
    n_centers = positions.shape[0]

    pixel_r = np.clip(np.rint(positions[:, 0]).astype(np.int64), 0, image.height - 1)
    pixel_c = np.clip(np.rint(positions[:, 1]).astype(np.int64), 0, image.width - 1)
    colors = feat[pixel_r, pixel_c].astype(np.float64)

    step = float(np.sqrt(image.height * image.width / l))
    ratio = compactness / step
    row_coords = np.repeat(np.arange(image.height, dtype=np.float64), image.width)
    col_coords = np.tile(np.arange(image.width, dtype=np.float64), image.height)
    labels = None
    for _ in range(iters):
        labels = _assign(feat, positions, colors, step, ratio)
        flat = labels.ravel()
        counts = np.bincount(flat, minlength=n_centers).astype(np.float64)
        occupied = counts > 0
        rows_sum = np.bincount(flat, weights=row_coords, minlength=n_centers)
        cols_sum = np.bincount(flat, weights=col_coords, minlength=n_centers)
        positions[occupied, 0] = rows_sum[occupied] / counts[occupied]
        positions[occupied, 1] = cols_sum[occupied] / counts[occupied]
        for ch in range(feat.shape[2]):
            ch_sum = np.bincount(flat, weights=feat[:, :, ch].ravel(), minlength=n_centers)
            colors[occupied, ch] = ch_sum[occupied] / counts[occupied]

    _, compact = np.unique(labels, return_inverse=True)
    grid = SuperpixelGrid(compact.reshape(labels.shape), int(compact.max()) + 1)
    min_size = max(1, (image.height * image.width) // l // 4)
    return enforce_connectivity(grid, min_size)


def _components(labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """4-connected components across the whole grid.

    Returns (component map, label value per component).  Components are
    numbered deterministically: ascending label value, then the raster
    order scipy's labeling uses within one value.
    """
    comp = np.full(labels.shape, -1, dtype=np.int64)
    values = []
    next_id = 0
    for v in np.unique(labels):
        mask = labels == v
        marked, n = ndimage.label(mask, structure=_FOUR_CONN)
        comp[mask] = marked[mask] + next_id - 1
        values.extend([int(v)] * n)
        next_id += n
    return comp, np.array(values, dtype=np.int64)


def enforce_connectivity(grid: SuperpixelGrid, min_size: int) -> SuperpixelGrid:
    """Split disconnected labels and absorb fragments below ``min_size``.

    Each undersized 4-connected component merges into the adjacent
    component it shares the longest border with (ties to the lowest
    component id), smallest fragments first.  Surviving components are
    relabeled 0..L-1 in raster order of first occurrence, so every output
    label is one connected region.
    """
    if min_size < 1:
        raise DomainError(f"min_size must be >= 1, got {min_size}")
    comp, _ = _components(grid.labels)
    n_comp = int(comp.max()) + 1
    sizes = np.bincount(comp.ravel(), minlength=n_comp).astype(np.int64)

    # Border lengths between adjacent components, from horizontal and
    # vertical pixel-pair scans.
    adjacency: dict[int, dict[int, int]] = {k: {} for k in range(n_comp)}

    def _count_pairs(a_side: np.ndarray, b_side: np.ndarray):
        differ = a_side != b_side
        a = a_side[differ]
        b = b_side[differ]
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        pairs, counts = np.unique(lo * n_comp + hi, return_counts=True)
        for key, cnt in zip(pairs.tolist(), counts.tolist()):
            x, y = divmod(key, n_comp)
            adjacency[x][y] = adjacency[x].get(y, 0) + cnt
            adjacency[y][x] = adjacency[y].get(x, 0) + cnt

    _count_pairs(comp[:, :-1].ravel(), comp[:, 1:].ravel())
    _count_pairs(comp[:-1, :].ravel(), comp[1:, :].ravel())

    parent = np.arange(n_comp, dtype=np.int64)
    alive = set(range(n_comp))
    while len(alive) > 1:
        under = [k for k in alive if sizes[k] < min_size]
        if not under:
            break
        k = min(under, key=lambda c: (sizes[c], c))
        neighbors = adjacency[k]
        if not neighbors:
            break
        target = min(neighbors, key=lambda d: (-neighbors[d], d))
        for other, length in neighbors.items():
            if other == target:
                continue
            adjacency[target][other] = adjacency[target].get(other, 0) + length
            adjacency[other][target] = adjacency[target][other]
            del adjacency[other][k]
        del adjacency[target][k]
        adjacency[k] = {}
        sizes[target] += sizes[k]
        parent[k] = target
        alive.remove(k)

    root = parent.copy()
    changed = True
    while changed:
        new_root = parent[root]
        changed = bool((new_root != root).any())
        root = new_root
    merged = root[comp]

    order = np.unique(merged.ravel(), return_index=True)
    by_first_occurrence = order[0][np.argsort(order[1])]
    remap = np.empty(n_comp, dtype=np.int64)
    remap[by_first_occurrence] = np.arange(by_first_occurrence.size)
    return SuperpixelGrid(remap[merged], int(by_first_occurrence.size))


def square_grid(height: int, width: int, k: int) -> SuperpixelGrid:
    """k x k axis-aligned rectangular cells, sizes differing by at most 1.

    The contour-free baseline: label of cell (i, j) is i * k + j.
    """
    if not (1 <= k <= min(height, width)):
        raise DomainError(f"need 1 <= k <= min(H, W), got k={k} for {height}x{width}")
    row_bins = np.concatenate(
        [np.full(part.size, i, dtype=np.int64) for i, part in enumerate(np.array_split(np.arange(height), k))]
    )
    col_bins = np.concatenate(
        [np.full(part.size, j, dtype=np.int64) for j, part in enumerate(np.array_split(np.arange(width), k))]
    )
    labels = row_bins[:, None] * k + col_bins[None, :]
    return SuperpixelGrid(labels, k * k)


def boundary_overlay(image: ImageTensor, grid: SuperpixelGrid, color) -> ImageTensor:
    """Copy of the image with region-boundary pixels set to ``color``.

    A pixel is on the boundary when any 4-neighbor carries a different
    label, so boundaries are two pixels thick (one on each side).
    """
    if (image.height, image.width) != (grid.height, grid.width):
        raise DomainError(
            f"image is {image.height}x{image.width} but grid is {grid.height}x{grid.width}"
        )
    color_arr = np.atleast_1d(np.asarray(color, dtype=np.float64))
    if color_arr.shape != (image.channels,):
        raise DomainError(
            f"color must have {image.channels} components, got shape {color_arr.shape}"
        )
    if color_arr.min() < 0.0 or color_arr.max() > 1.0:
        raise DomainError("color components must lie in [0, 1]")
    labels = grid.labels
    boundary = np.zeros(labels.shape, dtype=bool)
    boundary[:, :-1] |= labels[:, :-1] != labels[:, 1:]
    boundary[:, 1:] |= labels[:, 1:] != labels[:, :-1]
    boundary[:-1, :] |= labels[:-1, :] != labels[1:, :]
    boundary[1:, :] |= labels[1:, :] != labels[:-1, :]
    out = image.data.copy()
    out[boundary] = color_arr
    return ImageTensor(out)
