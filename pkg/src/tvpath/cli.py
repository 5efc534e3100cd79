"""Command-line front end: ``tvpath smooth|path|bench|spectrum``.

Exit codes: 0 success, 1 partial failure, 2 invalid arguments.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import os
import platform
import re
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import kernels
from .dynamics import HyperParams
from .errors import DimensionError, ParameterError
from .imageio import ImageFormatError, is_supported, read_image, write_image
from .path import PathConfig, SparsityLevelWarning, default_level, run_path

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2
MANIFEST_NAME = "manifest.csv"
MANIFEST_COLUMNS = ("file", "status", "achieved_sparsity", "iterations", "kappa", "beta",
                    "alpha", "levels", "sha256", "message")
DEFAULT_PATH_LEVELS = (0.2, 0.4, 0.6, 0.8, 1.0)


class UsageError(Exception):
    pass


def format_level(v: float) -> str:
    return f"{v:g}"


# -- config -------------------------------------------------------------------

_CONFIG_KEYS = {
    "level": lambda s: [float(v) for v in s.replace(";", ",").split(",") if v.strip()],
    "kappa": float, "beta": float, "alpha": float, "max_iters": int,
    "color": str, "workers": int, "format": str, "radius": float,
    "iters": int, "size": str, "projections": int,
}


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        try:
            out[key] = _CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise UsageError(f"{path}:{n}: bad value for {key}: {exc}") from None
    return out


def _resolve(args, defaults: dict):
    """Command line > config file > built-in defaults."""
    config = read_config(args.config) if getattr(args, "config", None) else {}
    for key, default in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, config.get(key, default))
    return args


def _hyperparams(args) -> HyperParams:
    return HyperParams(kappa=args.kappa, beta=args.beta, alpha=args.alpha,
                       max_iters=args.max_iters)


# -- smoothing jobs -------------------------------------------------------------

def _collect_inputs(src: Path):
    if src.is_dir():
        return sorted(p for p in src.iterdir() if p.is_file() and not p.name.startswith("."))
    if src.is_file():
        return [src]
    raise UsageError(f"input {src} does not exist")


def _process(task):
    """Smooth one file. Runs in worker processes, so takes and returns plain data."""
    path, name, out_dir, levels, hp, max_iters, color, suffix, mode = task
    row = dict.fromkeys(MANIFEST_COLUMNS, "")
    row.update(file=name, kappa=f"{hp.kappa:g}", beta=f"{hp.beta:g}")
    if not is_supported(path):
        row.update(status="skipped", message="unsupported format")
        return row
    try:
        data = Path(path).read_bytes()
        row["sha256"] = hashlib.sha256(data).hexdigest()
        x = read_image(path, color)
    except (OSError, ValueError, ImageFormatError) as exc:
        row.update(status="error", message=f"unreadable image ({type(exc).__name__})")
        return row
    levels = list(levels) if levels else [default_level(x.shape)]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SparsityLevelWarning)
            result = run_path(x, PathConfig(tuple(levels), max_iters=max_iters, hp=hp))
    except (ParameterError, DimensionError) as exc:
        row.update(status="error", message=str(exc))
        return row
    stem = Path(path).stem
    by_level = {s.requested_level: s for s in result.snapshots if not s.terminal}
    terminal = result.snapshots[-1]
    achieved, iterations = [], []
    if mode == "smooth":
        for v in levels:
            shot = by_level.get(v, terminal)
            write_image(Path(out_dir) / f"{stem}_s{format_level(v)}{suffix}", shot.image)
            achieved.append(shot.achieved_sparsity)
            iterations.append(shot.iteration)
    else:
        meta = io.StringIO()
        writer = csv.writer(meta, lineterminator="\n")
        writer.writerow(["output", "requested_level", "achieved_sparsity", "iteration",
                         "shared_iterate", "terminal"])
        for shot in result.snapshots:
            out_name = f"{stem}_s{format_level(shot.requested_level)}{suffix}"
            write_image(Path(out_dir) / out_name, shot.image)
            writer.writerow([out_name, format_level(shot.requested_level),
                             f"{shot.achieved_sparsity:.6f}", shot.iteration,
                             str(shot.shared_iterate).lower(), str(shot.terminal).lower()])
            achieved.append(shot.achieved_sparsity)
            iterations.append(shot.iteration)
        (Path(out_dir) / f"{stem}_path.csv").write_text(meta.getvalue())
    row.update(
        status="truncated" if result.truncated else "ok",
        achieved_sparsity=";".join(f"{v:.6f}" for v in achieved),
        iterations=";".join(str(k) for k in iterations),
        alpha=f"{result.alpha:.12g}",
        levels=";".join(format_level(v) for v in levels),
        message="max_iters reached" if result.truncated else "",
    )
    return row


def write_manifest(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def machine_metadata():
    import numba
    yield "timestamp", _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    yield "backend", kernels.BACKEND
    yield "python", platform.python_version()
    yield "numpy", np.__version__
    yield "numba", numba.__version__
    yield "platform", platform.platform()
    yield "machine", platform.machine()
    yield "processor", platform.processor() or "unknown"
    yield "cpu_count", os.cpu_count()


def _write_report(path, items):
    text = "".join(f"{k}={v}\n" for k, v in items)
    if path:
        Path(path).write_text(text)
    return text


def _run_job(args, mode) -> int:
    src = Path(args.input)
    out = Path(args.out)
    inputs = _collect_inputs(src)
    src_dir = src if src.is_dir() else src.parent
    if out.resolve() == src_dir.resolve():
        raise UsageError("output directory must differ from the input directory")
    levels = args.level
    if mode == "path" and not levels:
        levels = list(DEFAULT_PATH_LEVELS)
    if levels:
        levels = sorted(set(levels))
        for v in levels:
            if not 0.0 < v <= 1.0:
                raise UsageError(f"level {v} outside (0, 1]")
    if args.color not in ("auto", "gray", "rgb"):
        raise UsageError(f"--color must be auto, gray or rgb, got {args.color!r}")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    hp = _hyperparams(args)
    suffix = "." + args.format.lower().lstrip(".")
    if suffix not in (".png", ".pgm", ".ppm", ".pnm"):
        raise UsageError(f"unsupported output format {args.format!r}")
    out.mkdir(parents=True, exist_ok=True)

    tasks = [(str(p), p.name, str(out), levels, hp, args.max_iters, args.color, suffix, mode)
             for p in inputs]
    started = time.perf_counter()
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    if args.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_process, tasks))
    else:
        rows = [_process(t) for t in tasks]
    write_manifest(out / MANIFEST_NAME, rows)

    counts = {s: sum(r["status"] == s for r in rows) for s in ("ok", "truncated", "error", "skipped")}
    for r in rows:
        if r["status"] in ("error", "skipped"):
            print(f"{r['file']}: {r['status']}: {r['message']}", file=sys.stderr)
    _write_report(args.report, [("command", mode), ("started", stamp),
                                ("elapsed", f"{time.perf_counter() - started:.3f}"),
                                ("files", len(rows)), *counts.items(), *machine_metadata()])
    print(f"{mode}: {counts['ok']} ok, {counts['truncated']} truncated, "
          f"{counts['error']} errors, {counts['skipped']} skipped -> {out / MANIFEST_NAME}")
    return EXIT_PARTIAL if counts["error"] else EXIT_OK


# -- bench ----------------------------------------------------------------------

def parse_size(text) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*(?:[xX,]\s*(\d+))?\s*", str(text))
    if not m:
        raise UsageError(f"size must look like 84 or 84x84, got {text!r}")
    h = int(m.group(1))
    w = int(m.group(2)) if m.group(2) else h
    if h < 1 or w < 1:
        raise UsageError(f"size must be positive, got {h}x{w}")
    return h, w


def cmd_bench(args) -> int:
    from .oracle import timing_benchmark

    size = parse_size(args.size)
    if args.iters < 1 or args.projections < 1:
        raise UsageError("--iters and --projections must be positive")
    report = timing_benchmark(size, args.iters, projections=args.projections,
                              hp=_hyperparams(args))
    text = _write_report(args.report, [*report.items(), *machine_metadata()])
    sys.stdout.write(text)
    return EXIT_OK


# -- spectrum -------------------------------------------------------------------

_LEVEL_SUFFIX = re.compile(r"^(.*)_s\d+(?:\.\d+)?$")


def match_stems(originals: list[Path], smoothed: list[Path]):
    """Pair files by stem; a smoothed stem may carry a ``_s<level>`` suffix."""
    exact = {p.stem: p for p in smoothed}
    stripped: dict[str, list[Path]] = {}
    for p in smoothed:
        m = _LEVEL_SUFFIX.match(p.stem)
        if m:
            stripped.setdefault(m.group(1), []).append(p)
    pairs, used, missing = [], set(), []
    for p in originals:
        q = exact.get(p.stem)
        if q is None and len(stripped.get(p.stem, [])) == 1:
            q = stripped[p.stem][0]
        if q is None:
            missing.append(p.name)
        else:
            pairs.append((p, q))
            used.add(q)
    extra = [p.name for p in smoothed if p not in used]
    if missing or extra:
        raise UsageError("unmatched files: originals without partner "
                         f"{missing or '[]'}; smoothed without partner {extra or '[]'}")
    return pairs


def cmd_spectrum(args) -> int:
    from .spectral import band_energy, expected_spectral_diff, heatmap, spectrum_band_fraction

    lists = []
    for d in (args.originals, args.smoothed):
        d = Path(d)
        if not d.is_dir():
            raise UsageError(f"{d} is not a directory")
        lists.append(sorted(p for p in d.iterdir() if p.is_file() and is_supported(p)))
    if not lists[0] or not lists[1]:
        raise UsageError("both directories must contain at least one supported image")
    if args.radius <= 0:
        raise UsageError(f"--radius must be positive, got {args.radius}")
    pairs = match_stems(*lists)
    orig = [read_image(p, args.color) for p, _ in pairs]
    smooth = [read_image(q, args.color) for _, q in pairs]
    spectrum = expected_spectral_diff(orig, smooth)
    low_high = np.array([band_energy(a - b, args.radius) for a, b in zip(orig, smooth)])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_image(out / "spectrum.png", heatmap(spectrum))
    items = [
        ("pairs", len(pairs)),
        ("radius", f"{args.radius:g}"),
        ("residual_low_energy", f"{low_high[:, 0].mean():.9g}"),
        ("residual_high_energy", f"{low_high[:, 1].mean():.9g}"),
        ("spectrum_high_fraction", f"{spectrum_band_fraction(spectrum, args.radius):.9g}"),
        ("spectrum_max", f"{spectrum.max():.9g}"),
        ("heatmap", out / "spectrum.png"),
    ]
    sys.stdout.write(_write_report(args.report, [*items, *machine_metadata()]))
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------

_JOB_DEFAULTS = {"kappa": 5.0, "beta": 1.0, "alpha": None, "max_iters": 50_000,
                 "color": "auto", "workers": 1, "format": "png", "level": None}


def _add_hp(p):
    p.add_argument("--kappa", type=float, help="elastic-net scale (default 5)")
    p.add_argument("--beta", type=float, help="splitting weight (default 1)")
    p.add_argument("--alpha", type=float, help="step size (default 1/(kappa*||H||))")
    p.add_argument("--max-iters", dest="max_iters", type=int, help="iteration cap (default 50000)")
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("--report", help="write a key=value run report here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tvpath", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (("smooth", "smooth images to target sparsity levels"),
                       ("path", "write the snapshot sequence along the smoothing path")):
        p = sub.add_parser(name, help=text)
        p.add_argument("input", help="image file or directory")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--level", type=float, action="append",
                       help="target sparsity level in (0, 1]; repeatable")
        p.add_argument("--color", choices=("auto", "gray", "rgb"))
        p.add_argument("--workers", type=int, help="worker processes (default 1)")
        p.add_argument("--format", choices=("png", "pgm", "ppm", "pnm"),
                       help="output format (default png)")
        _add_hp(p)

    p = sub.add_parser("bench", help="time graph vs dense vs LSQR projection")
    p.add_argument("--size", help="HxW or N (default 84x84)")
    p.add_argument("--iters", type=int, help="iterations (default 15000)")
    p.add_argument("--projections", type=int,
                   help="projection checkpoints, the last at the final iterate (default 1)")
    _add_hp(p)

    p = sub.add_parser("spectrum", help="expected spectral difference between two directories")
    p.add_argument("originals")
    p.add_argument("smoothed")
    p.add_argument("--radius", type=float, help="cut-off radius (default 6)")
    p.add_argument("--out", default=".", help="directory for spectrum.png")
    p.add_argument("--color", choices=("auto", "gray", "rgb"))
    p.add_argument("--config")
    p.add_argument("--report")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("smooth", "path"):
            return _run_job(_resolve(args, _JOB_DEFAULTS), args.command)
        if args.command == "bench":
            defaults = {"kappa": 5.0, "beta": 1.0, "alpha": None, "max_iters": 50_000,
                        "size": "84x84", "iters": 15_000, "projections": 1}
            return cmd_bench(_resolve(args, defaults))
        return cmd_spectrum(_resolve(args, {"radius": 6.0, "color": "auto"}))
    except (UsageError, ParameterError, DimensionError) as exc:
        print(f"tvpath {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
