"""Command line front end: `hsmix augment` and `hsmix sweep`.

Presets bundle the per-modality knobs (superpixel count range and
compactness); any explicitly passed flag overrides its preset value.
The HSMIX_SEED environment variable, when set, overrides --seed so CI
can pin reproduction without editing command lines.
"""

from __future__ import annotations

import argparse
import os
import sys

from .pipeline import SEED_ENV_VAR, run_batch, scan_dataset, sweep
from .types import AugConfig, DomainError

PRESETS = {
    "camera": {"l_min": 30, "l_max": 80, "compactness": 10.0},
    "microscopy": {"l_min": 200, "l_max": 400, "compactness": 10.0},
    "ct": {"l_min": 200, "l_max": 400, "compactness": 0.1},
    "mri": {"l_min": 50, "l_max": 150, "compactness": 0.003},
}

_DEFAULTS = {"l_min": 30, "l_max": 80, "p": 0.3, "compactness": 10.0, "seed": 0}


def _resolve(args, name):
    """Explicit flag > preset > global default."""
    value = getattr(args, name)
    if value is not None:
        return value
    if args.preset is not None and name in PRESETS[args.preset]:
        return PRESETS[args.preset][name]
    return _DEFAULTS[name]


def _resolve_seed(args) -> int:
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise DomainError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return _resolve(args, "seed")


def _parse_emit(text: str) -> tuple[str, ...]:
    kinds = tuple(part.strip() for part in text.split(",") if part.strip())
    for kind in kinds:
        if kind not in ("hard", "soft"):
            raise DomainError(f"--emit accepts hard and/or soft, got {kind!r}")
    if not kinds:
        raise DomainError("--emit must name at least one of hard, soft")
    return kinds


def _parse_l_ranges(text: str) -> list[tuple[int, int]]:
    ranges = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        try:
            if sep:
                ranges.append((int(lo), int(hi)))
            else:
                ranges.append((int(lo), int(lo)))
        except ValueError:
            raise DomainError(f"bad l range {part!r}; expected MIN-MAX or a single N") from None
    if not ranges:
        raise DomainError("--l-ranges must name at least one range")
    return ranges


def _parse_p_list(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise DomainError(f"bad --p-list {text!r}; expected comma-separated floats") from None
    if not values:
        raise DomainError("--p-list must name at least one value")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsmix",
        description="Superpixel cut-and-paste / blend augmentation for segmentation datasets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    aug = sub.add_parser("augment", help="augment a dataset and write hard/soft outputs")
    aug.add_argument("--images", required=True, help="directory of input PNG images")
    aug.add_argument("--masks", required=True, help="directory of class-id PNG masks")
    aug.add_argument("--out", required=True, help="output directory")
    aug.add_argument("--preset", choices=sorted(PRESETS), help="per-modality parameter bundle")
    aug.add_argument("--l-min", type=int, default=None, help="lower superpixel count bound")
    aug.add_argument("--l-max", type=int, default=None, help="upper superpixel count bound")
    aug.add_argument("--p", type=float, default=None, help="superpixel selection probability")
    aug.add_argument("--compactness", type=float, default=None, help="SLIC compactness")
    aug.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    aug.add_argument("--emit", default="hard,soft", help="comma list of outputs: hard,soft")
    aug.add_argument(
        "--grid",
        default="superpixel",
        help="region strategy: 'superpixel' or 'square:K' for a K x K grid",
    )
    aug.add_argument(
        "--lambda",
        dest="lambda_strategy",
        default="saliency",
        choices=("saliency", "random"),
        help="blend fractions from saliency means or one random draw per pair",
    )
    aug.add_argument("--overlay", action="store_true", help="also write region-boundary overlays")
    aug.add_argument("--workers", type=int, default=None, help="worker processes (default: cores)")

    sw = sub.add_parser("sweep", help="tabulate augmentation statistics over parameter grids")
    sw.add_argument("--images", required=True)
    sw.add_argument("--masks", required=True)
    sw.add_argument("--p-list", required=True, help="comma-separated selection probabilities")
    sw.add_argument("--l-ranges", required=True, help="comma-separated MIN-MAX superpixel ranges")
    sw.add_argument("--out", required=True, help="output TSV path")
    sw.add_argument("--preset", choices=sorted(PRESETS))
    sw.add_argument("--compactness", type=float, default=None)
    sw.add_argument("--seed", type=int, default=None)
    return parser


def _report_problems(index, stream):
    for problem in index.problems:
        print(f"warning: {problem}", file=stream)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "augment":
            cfg = AugConfig(
                l_min=_resolve(args, "l_min"),
                l_max=_resolve(args, "l_max"),
                p=_resolve(args, "p"),
                compactness=_resolve(args, "compactness"),
                seed=_resolve_seed(args),
                grid_strategy=args.grid,
                lambda_strategy=args.lambda_strategy,
            )
            emit = _parse_emit(args.emit)
            index = scan_dataset(args.images, args.masks)
            _report_problems(index, sys.stderr)
            manifest = run_batch(
                index, cfg, args.out, emit=emit, workers=args.workers, overlay=args.overlay
            )
            failed = [r for r in manifest["outputs"] if r["status"] != "ok"]
            done = len(manifest["outputs"]) - len(failed)
            print(f"augmented {done} pair(s) into {args.out}")
            for record in failed:
                print(
                    f"error: pair {record['pair_index']} "
                    f"({record['id_a']}, {record['id_b']}): {record['error']}",
                    file=sys.stderr,
                )
            return 1 if failed else 0

        cfg = AugConfig(
            compactness=_resolve(args, "compactness"),
            seed=_resolve_seed(args),
        )
        index = scan_dataset(args.images, args.masks)
        _report_problems(index, sys.stderr)
        rows = sweep(index, _parse_p_list(args.p_list), _parse_l_ranges(args.l_ranges), cfg, args.out)
        print(f"wrote {len(rows)} sweep row(s) to {args.out}")
        return 0
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
