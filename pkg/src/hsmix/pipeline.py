"""Batch orchestration: dataset scanning, pairing, parallel runs, sweeps.

Determinism contract: (dataset, config, master seed) fully determines
every output byte.  All randomness flows through streams keyed by
(master seed, pair index, purpose), so worker count and scheduling
cannot change any draw, and the manifest deliberately excludes
wall-clock facts like timestamps or worker counts.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import png_io
from .mixer import hsmix_pair
from .rng import PairStreams, derived_generator
from .superpixel import boundary_overlay
from .types import AugConfig, DomainError, argmax_decode, one_hot

SCHEMA_VERSION = 1
SEED_ENV_VAR = "HSMIX_SEED"

# Boundary color for overlays: green on RGB, white on single-channel.
_OVERLAY_RGB = (0.0, 1.0, 0.0)
_OVERLAY_GRAY = (1.0,)


@dataclass(frozen=True)
class DatasetEntry:
    stem: str
    image_path: str
    mask_path: str
    height: int
    width: int
    channels: int


@dataclass(frozen=True)
class DatasetIndex:
    """Validated image/mask pairs plus per-file problems.

    Problems (unmatched files, undecodable files, dimension mismatches)
    never abort the scan; the affected file is skipped and described.
    """

    entries: tuple[DatasetEntry, ...]
    num_classes: int
    channels: int
    problems: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.entries)


def scan_dataset(images_dir, masks_dir) -> DatasetIndex:
    """Index every image with a same-stem mask, validating as we go.

    Images and masks are matched by filename stem; the index is sorted
    by stem.  The class count is max observed id + 1 (floor 2 so binary
    datasets that happen to contain only background still one-hot
    cleanly).
    """
    images_dir = Path(images_dir)
    masks_dir = Path(masks_dir)
    if not images_dir.is_dir():
        raise DomainError(f"image directory does not exist: {images_dir}")
    if not masks_dir.is_dir():
        raise DomainError(f"mask directory does not exist: {masks_dir}")

    image_files = {p.stem: p for p in sorted(images_dir.glob("*.png"))}
    mask_files = {p.stem: p for p in sorted(masks_dir.glob("*.png"))}

    entries = []
    problems = []
    max_id = 1
    channels = None
    for stem in sorted(image_files):
        if stem not in mask_files:
            problems.append(f"{image_files[stem].name}: no mask with stem {stem!r}")
            continue
        try:
            image = png_io.read_image(image_files[stem])
            mask = png_io.read_mask(mask_files[stem])
        except (DomainError, OSError) as exc:
            problems.append(f"{stem}: {exc}")
            continue
        if mask.shape != (image.height, image.width):
            problems.append(
                f"{stem}: mask is {mask.shape[0]}x{mask.shape[1]} "
                f"but image is {image.height}x{image.width}"
            )
            continue
        if channels is None:
            channels = image.channels
        elif image.channels != channels:
            problems.append(
                f"{stem}: has {image.channels} channels, dataset uses {channels}"
            )
            continue
        max_id = max(max_id, int(mask.max()))
        entries.append(
            DatasetEntry(
                stem=stem,
                image_path=str(image_files[stem]),
                mask_path=str(mask_files[stem]),
                height=image.height,
                width=image.width,
                channels=image.channels,
            )
        )
    for stem in sorted(set(mask_files) - set(image_files)):
        problems.append(f"{mask_files[stem].name}: no image with stem {stem!r}")

    return DatasetIndex(
        entries=tuple(entries),
        num_classes=max_id + 1,
        channels=channels if channels is not None else 0,
        problems=tuple(problems),
    )


def form_pairs(index: DatasetIndex, rng: np.random.Generator) -> list[tuple[str, str]]:
    """Pair every entry with a distinct partner via one seeded shuffle.

    A permutation is chunked into consecutive pairs; with an odd count
    the leftover entry is paired with a random other entry (appearing a
    second time).  No entry is ever paired with itself.
    """
    n = len(index)
    if n == 0:
        raise DomainError("cannot form pairs from an empty dataset")
    if n == 1:
        raise DomainError("cannot form pairs from a single entry (no valid partner)")
    perm = rng.permutation(n)
    pairs = [
        (index.entries[perm[i]].stem, index.entries[perm[i + 1]].stem)
        for i in range(0, n - 1, 2)
    ]
    if n % 2 == 1:
        partner = perm[int(rng.integers(0, n - 1))]
        pairs.append((index.entries[perm[n - 1]].stem, index.entries[partner].stem))
    return pairs


def _lambda_stats(values: np.ndarray) -> dict:
    return {
        "min": float(values.min()),
        "mean": float(values.mean()),
        "max": float(values.max()),
    }


def _process_pair(job: tuple) -> dict:
    """Worker body: augment one pair and write its files.

    Module-level so process pools can pickle it.  Returns the manifest
    record for the pair; failures are captured, not raised, so one bad
    pair cannot take down the batch.
    """
    (pair_index, entry_a, entry_b, cfg, num_classes, out_dir, emit, overlay) = job
    stem = f"pair{pair_index:05d}_{entry_a.stem}_{entry_b.stem}"
    record = {"pair_index": pair_index, "id_a": entry_a.stem, "id_b": entry_b.stem}
    try:
        x1 = png_io.read_image(entry_a.image_path)
        x2 = png_io.read_image(entry_b.image_path)
        y1 = one_hot(png_io.read_mask(entry_a.mask_path), num_classes)
        y2 = one_hot(png_io.read_mask(entry_b.mask_path), num_classes)
        result = hsmix_pair(x1, x2, y1, y2, cfg, PairStreams(cfg.seed, pair_index))

        out_dir = Path(out_dir)
        files = []
        if "hard" in emit:
            x_h, y_h = result.hard
            name = f"{stem}_hard.png"
            png_io.write_image(out_dir / "images" / name, x_h)
            png_io.write_hard_mask(out_dir / "masks" / name, argmax_decode(y_h))
            files.extend([f"images/{name}", f"masks/{name}"])
        if "soft" in emit:
            x_s, y_s = result.soft
            name = f"{stem}_soft.png"
            png_io.write_image(out_dir / "images" / name, x_s)
            files.append(f"images/{name}")
            for written in png_io.write_soft_mask(out_dir / "masks", f"{stem}_soft", y_s):
                files.append(f"masks/{written}")
        if overlay:
            base = result.hard[0] if "hard" in emit else result.soft[0]
            color = _OVERLAY_RGB if base.channels == 3 else _OVERLAY_GRAY
            name = f"{stem}_overlay.png"
            png_io.write_image(
                out_dir / "overlays" / name,
                boundary_overlay(base, result.diagnostics.spm, color),
            )
            files.append(f"overlays/{name}")

        record.update(
            status="ok",
            l1=result.diagnostics.l1,
            l2=result.diagnostics.l2,
            num_selected=int(result.diagnostics.selection.selected.size),
            lambda_stats=_lambda_stats(result.diagnostics.lambdas.values),
            files=files,
        )
    except Exception as exc:
        record.update(status="failed", error=f"{type(exc).__name__}: {exc}")
    return record


def run_batch(
    index: DatasetIndex,
    cfg: AugConfig,
    out_dir,
    emit=("hard", "soft"),
    workers: int | None = None,
    overlay: bool = False,
) -> dict:
    """Augment all pairs of the dataset and write outputs plus a manifest.

    Output bytes are identical for any worker count and across repeat
    runs with the same seed.  Returns the manifest (also written to
    ``manifest.json``); callers decide how to surface failed pairs.
    """
    emit = tuple(emit)
    for kind in emit:
        if kind not in ("hard", "soft"):
            raise DomainError(f"emit entries must be 'hard' or 'soft', got {kind!r}")
    if not emit:
        raise DomainError("emit must request at least one of hard, soft")
    if index.channels == 0:
        raise DomainError("dataset index has no usable entries")
    dims = {(e.height, e.width) for e in index.entries}
    if len(dims) > 1:
        raise DomainError(f"entries must share one size to mix, found {sorted(dims)}")
    if workers is None:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")

    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)
    if overlay:
        (out_dir / "overlays").mkdir(parents=True, exist_ok=True)

    by_stem = {e.stem: e for e in index.entries}
    pairs = form_pairs(index, derived_generator(cfg.seed, 0, "pairing"))
    jobs = [
        (i, by_stem[a], by_stem[b], cfg, index.num_classes, str(out_dir), emit, overlay)
        for i, (a, b) in enumerate(pairs)
    ]
    if workers == 1:
        records = [_process_pair(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_process_pair, jobs))
    records.sort(key=lambda r: r["pair_index"])

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool": "hsmix",
        "tool_version": _tool_version(),
        "master_seed": cfg.seed,
        "config": {
            "l_min": cfg.l_min,
            "l_max": cfg.l_max,
            "p": cfg.p,
            "compactness": cfg.compactness,
            "slic_iters": cfg.slic_iters,
            "epsilon": cfg.epsilon,
            "grid_strategy": cfg.grid_strategy,
            "lambda_strategy": cfg.lambda_strategy,
        },
        "emit": sorted(emit),
        "overlay": overlay,
        "num_classes": index.num_classes,
        "channels": index.channels,
        "outputs": records,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _tool_version() -> str:
    from . import __version__

    return __version__


def sweep(
    index: DatasetIndex,
    p_values,
    l_ranges,
    cfg_base: AugConfig,
    out_path,
) -> list[dict]:
    """Augmentation statistics over a (p, l-range) grid, written as TSV.

    For every setting each pair is rerun with the same per-pair streams,
    so selection draws are shared across settings: raising p can only
    add superpixels to a pair's selection, which makes the coverage
    column monotone in p by construction rather than merely on average.
    """
    p_values = list(p_values)
    l_ranges = list(l_ranges)
    if not p_values or not l_ranges:
        raise DomainError("sweep needs at least one p value and one l range")
    for p in p_values:
        if not (0.0 < p < 1.0):
            raise DomainError(f"sweep p values must be in (0, 1), got {p}")
    for l_min, l_max in l_ranges:
        if not (1 <= l_min <= l_max):
            raise DomainError(f"bad l range [{l_min}, {l_max}]")

    by_stem = {e.stem: e for e in index.entries}
    pairs = form_pairs(index, derived_generator(cfg_base.seed, 0, "pairing"))
    loaded = {}
    for stem, entry in by_stem.items():
        image = png_io.read_image(entry.image_path)
        mask = one_hot(png_io.read_mask(entry.mask_path), index.num_classes)
        loaded[stem] = (image, mask)

    rows = []
    for l_min, l_max in l_ranges:
        for p in p_values:
            cfg = AugConfig(
                l_min=l_min,
                l_max=l_max,
                p=p,
                compactness=cfg_base.compactness,
                slic_iters=cfg_base.slic_iters,
                epsilon=cfg_base.epsilon,
                seed=cfg_base.seed,
                grid_strategy=cfg_base.grid_strategy,
                lambda_strategy=cfg_base.lambda_strategy,
            )
            coverage = []
            selected_frac = []
            lambda_means = []
            realized = []
            for i, (a, b) in enumerate(pairs):
                x1, y1 = loaded[a]
                x2, y2 = loaded[b]
                result = hsmix_pair(x1, x2, y1, y2, cfg, PairStreams(cfg.seed, i))
                d = result.diagnostics
                coverage.append(float(d.mh.data.mean()))
                selected_frac.append(d.selection.selected.size / d.sp2.num_labels)
                # Mean over the per-region fractions; the pixel mean of the
                # soft mask telescopes to the global saliency mean and would
                # not respond to the setting at all.
                lambda_means.append(float(d.lambdas.values.mean()))
                realized.append((d.sp1.num_labels + d.sp2.num_labels) / 2.0)
            rows.append(
                {
                    "p": p,
                    "l_min": l_min,
                    "l_max": l_max,
                    "pairs": len(pairs),
                    "mean_coverage": float(np.mean(coverage)),
                    "mean_selected_frac": float(np.mean(selected_frac)),
                    "mean_lambda": float(np.mean(lambda_means)),
                    "mean_realized_l": float(np.mean(realized)),
                }
            )

    columns = [
        "p",
        "l_min",
        "l_max",
        "pairs",
        "mean_coverage",
        "mean_selected_frac",
        "mean_lambda",
        "mean_realized_l",
    ]
    with open(out_path, "w") as fh:
        fh.write("\t".join(columns) + "\n")
        for row in rows:
            fh.write("\t".join(_format_cell(row[c]) for c in columns) + "\n")
    return rows


def _format_cell(value) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)
