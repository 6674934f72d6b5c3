"""Command-line interface: complete, mask, synth, bench, rerun.

Every command records a run manifest next to its outputs so the exact run
can be replayed with ``quatcomp rerun <manifest>``.  Option precedence for
``complete`` is CLI flag > config file (TOML) > built-in default.  The
QMC_THREADS environment variable caps internal BLAS parallelism (default 1
so runs are deterministic).

Exit codes: 0 success, 2 bad arguments, 3 I/O failure, 4 invalid solver
or mask configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import statistics
import sys
from datetime import datetime, timezone

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from threadpoolctl import threadpool_limits

from . import __version__
from .imaging import (
    load_mask_png,
    load_png,
    load_qmsk,
    quality_report,
    quaternion_to_image,
    image_to_quaternion,
    random_mask,
    save_mask_png,
    save_png,
    save_qmsk,
)
from .quaternion import Quaternion, save_qmat
from .solvers import METHODS, SolverConfig, complete as run_solver
from .synth import random_lowrank, random_qdct_sparse_lowrank

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CONFIG = 4

MANIFEST_SCHEMA = 1
METRICS_SCHEMA = 1

# SolverConfig fields settable through the TOML config file and flags
_CONFIG_KEYS = ("method", "rank", "mu0", "rho", "mu_max", "beta",
                "varsigma", "v", "tol", "max_iter", "qdct_axis", "seed")


class ConfigError(ValueError):
    """Invalid solver or mask configuration (exit code 4)."""


class InputError(ValueError):
    """Unreadable or malformed input/output file (exit code 3)."""


def _utc_now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _parse_axis(value):
    if isinstance(value, Quaternion):
        return value
    if isinstance(value, str):
        parts = value.split(",")
    else:
        parts = list(value)
    if len(parts) != 3:
        raise ConfigError("qdct-axis needs three components x,y,z")
    try:
        x, y, z = (float(p) for p in parts)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad qdct-axis: {exc}") from exc
    norm = math.sqrt(x * x + y * y + z * z)
    if norm == 0.0:
        raise ConfigError("qdct-axis must be nonzero")
    return Quaternion(0.0, x / norm, y / norm, z / norm)


def _load_config_file(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config file: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad TOML in {path}: {exc}") from exc
    unknown = set(raw) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigError(
            f"unknown config keys {sorted(unknown)}; "
            f"expected a subset of {list(_CONFIG_KEYS)}")
    return raw


def _resolve_solver_config(args):
    """Merge defaults, config file, and CLI flags (flags win)."""
    merged = {}
    if args.config:
        merged.update(_load_config_file(args.config))
    for key in _CONFIG_KEYS:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            merged[key] = flag
    if "method" not in merged:
        raise ConfigError("a completion method is required "
                          "(--method or config file)")
    if "rank" not in merged:
        raise ConfigError("a rank is required (--rank or config file)")
    if "qdct_axis" in merged:
        merged["qdct_axis"] = _parse_axis(merged["qdct_axis"])
    try:
        return SolverConfig(**merged)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _axis_components(q: Quaternion):
    return [q.x, q.y, q.z]


def _write_json(path, payload):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def _write_manifest(path, command, params):
    _write_json(path, {
        "schema": MANIFEST_SCHEMA,
        "tool_version": __version__,
        "created_utc": _utc_now(),
        "command": command,
        "params": params,
    })


def _load_mask_file(path):
    try:
        if str(path).endswith(".qmsk"):
            return load_qmsk(path)
        return load_mask_png(path)
    except OSError as exc:
        raise InputError(f"cannot read mask: {exc}") from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc


# -- complete -------------------------------------------------------------


def _cmd_complete_from_params(p):
    cfg_kwargs = dict(p["config"])
    cfg_kwargs["qdct_axis"] = _parse_axis(cfg_kwargs["qdct_axis"])
    try:
        cfg = SolverConfig(**cfg_kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    try:
        img = load_png(p["input"])
    except OSError as exc:
        raise InputError(f"cannot read image: {exc}") from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    prov = p["mask"]
    if "file" in prov:
        mask = _load_mask_file(prov["file"])
    else:
        gen = prov["generated"]
        try:
            mask = random_mask(img.height, img.width, gen["mr"], gen["seed"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if mask.shape != (img.height, img.width):
        raise InputError(
            f"mask shape {mask.shape} does not match image "
            f"({img.height}, {img.width})")

    observed = image_to_quaternion(img)
    try:
        report = run_solver(observed, mask, cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    restored = quaternion_to_image(report.x)

    try:
        save_png(p["output"], restored)
    except OSError as exc:
        raise InputError(f"cannot write image: {exc}") from exc

    quality = quality_report(img, restored)
    metrics = {
        "schema": METRICS_SCHEMA,
        "psnr_db": quality.psnr_db,
        "ssim": quality.ssim,
        "iterations": report.iterations,
        "converged": report.converged,
        "residuals": report.rel_changes,
        "seconds_per_iteration": report.iter_seconds,
    }
    _write_json(p["metrics"], metrics)
    _write_manifest(p["manifest"], "complete", p)
    return EXIT_OK


def cmd_complete(args):
    cfg = _resolve_solver_config(args)
    out = args.out
    params = {
        "input": os.path.abspath(args.in_path),
        "output": os.path.abspath(out),
        "metrics": os.path.abspath(args.metrics or out + ".metrics.json"),
        "manifest": os.path.abspath(args.manifest or out + ".manifest.json"),
        "config": {
            "method": cfg.method,
            "rank": cfg.rank,
            "mu0": cfg.mu0,
            "rho": cfg.rho,
            "mu_max": cfg.mu_max,
            "beta": cfg.beta,
            "varsigma": cfg.varsigma,
            "v": cfg.v,
            "tol": cfg.tol,
            "max_iter": cfg.max_iter,
            "qdct_axis": _axis_components(cfg.qdct_axis),
            "seed": cfg.seed,
        },
    }
    if args.mask:
        params["mask"] = {"file": os.path.abspath(args.mask)}
    else:
        if args.mr is None:
            raise ConfigError("supply a mask via --mask or --mr")
        params["mask"] = {"generated": {"mr": args.mr, "seed": cfg.seed}}
    return _cmd_complete_from_params(params)


# -- mask -----------------------------------------------------------------


def _cmd_mask_from_params(p):
    try:
        mask = random_mask(p["rows"], p["cols"], p["mr"], p["seed"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        save_mask_png(p["png"], mask)
        if p.get("qmsk"):
            save_qmsk(p["qmsk"], mask)
    except OSError as exc:
        raise InputError(f"cannot write mask: {exc}") from exc
    _write_manifest(p["manifest"], "mask", p)
    return EXIT_OK


def cmd_mask(args):
    try:
        rows, cols = (int(t) for t in args.size.lower().split("x"))
    except ValueError as exc:
        raise ConfigError(f"bad --size (expected RxC): {args.size}") from exc
    if rows < 1 or cols < 1:
        raise ConfigError("mask dimensions must be positive")
    params = {
        "rows": rows,
        "cols": cols,
        "mr": args.mr,
        "seed": args.seed,
        "png": os.path.abspath(args.out_png),
        "qmsk": os.path.abspath(args.out_qmsk) if args.out_qmsk else None,
        "manifest": os.path.abspath(
            args.manifest or args.out_png + ".manifest.json"),
    }
    return _cmd_mask_from_params(params)


# -- synth ----------------------------------------------------------------


def _cmd_synth_from_params(p):
    try:
        if p["qdct_sparsity"] is None:
            gt = random_lowrank(p["rows"], p["cols"], p["rank"], p["seed"])
        else:
            gt = random_qdct_sparse_lowrank(
                p["rows"], p["cols"], p["rank"], p["qdct_sparsity"],
                p["seed"], axis=_parse_axis(p["qdct_axis"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        save_qmat(p["output"], gt)
    except OSError as exc:
        raise InputError(f"cannot write output: {exc}") from exc
    _write_manifest(p["manifest"], "synth", p)
    return EXIT_OK


def cmd_synth(args):
    params = {
        "rows": args.rows,
        "cols": args.cols,
        "rank": args.rank,
        "seed": args.seed,
        "qdct_sparsity": args.qdct_sparsity,
        "qdct_axis": _axis_components(_parse_axis(args.qdct_axis)),
        "output": os.path.abspath(args.out),
        "manifest": os.path.abspath(args.manifest or args.out
                                    + ".manifest.json"),
    }
    return _cmd_synth_from_params(params)


# -- bench ----------------------------------------------------------------


def _cmd_bench_from_params(p):
    rows = []
    for size in p["sizes"]:
        gt = random_lowrank(size, size, p["rank"], p["seed"])
        mask = random_mask(size, size, p["mr"], p["seed"] + 1)
        cfg = SolverConfig(method="qlnm-qqr", rank=p["rank"], tol=0.0,
                           max_iter=p["iters"], seed=p["seed"])
        report = run_solver(mask.project(gt), mask, cfg)
        med_ms = statistics.median(report.iter_seconds) * 1e3
        rows.append((size, med_ms))
    try:
        with open(p["output"], "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["size", "median_iter_ms"])
            for size, med in rows:
                writer.writerow([size, f"{med:.3f}"])
    except OSError as exc:
        raise InputError(f"cannot write CSV: {exc}") from exc
    _write_manifest(p["manifest"], "bench", p)
    return EXIT_OK


def cmd_bench(args):
    try:
        sizes = [int(t) for t in args.sizes.split(",") if t]
    except ValueError as exc:
        raise ConfigError(f"bad --sizes: {args.sizes}") from exc
    if not sizes or any(s < 2 for s in sizes):
        raise ConfigError("sizes must be integers of at least 2")
    if args.rank < 1 or args.iters < 1:
        raise ConfigError("rank and iters must be positive")
    params = {
        "sizes": sizes,
        "rank": args.rank,
        "iters": args.iters,
        "mr": args.mr,
        "seed": args.seed,
        "output": os.path.abspath(args.out),
        "manifest": os.path.abspath(args.manifest or args.out
                                    + ".manifest.json"),
    }
    return _cmd_bench_from_params(params)


# -- rerun ----------------------------------------------------------------

_RERUNNERS = {
    "complete": _cmd_complete_from_params,
    "mask": _cmd_mask_from_params,
    "synth": _cmd_synth_from_params,
    "bench": _cmd_bench_from_params,
}


def cmd_rerun(args):
    try:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read manifest: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"bad manifest JSON: {exc}") from exc
    command = manifest.get("command")
    if manifest.get("schema") != MANIFEST_SCHEMA or command not in _RERUNNERS:
        raise InputError(f"unsupported manifest: {args.manifest}")
    return _RERUNNERS[command](manifest["params"])


# -- parser ---------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="quatcomp",
        description="Quaternion low-rank completion for color images.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("complete", help="restore a masked color image")
    pc.add_argument("--in", dest="in_path", required=True,
                    help="input RGB PNG")
    pc.add_argument("--out", required=True, help="restored PNG path")
    pc.add_argument("--metrics", help="metrics JSON path "
                                      "(default <out>.metrics.json)")
    pc.add_argument("--manifest", help="manifest path "
                                       "(default <out>.manifest.json)")
    pc.add_argument("--method", choices=METHODS)
    pc.add_argument("--rank", type=int, required=True)
    group = pc.add_mutually_exclusive_group(required=True)
    group.add_argument("--mask", help="mask file (PNG or .qmsk)")
    group.add_argument("--mr", type=float,
                       help="missing ratio for a generated mask")
    pc.add_argument("--seed", type=int)
    pc.add_argument("--config", help="TOML config file")
    pc.add_argument("--mu0", type=float)
    pc.add_argument("--rho", type=float)
    pc.add_argument("--mu-max", dest="mu_max", type=float)
    pc.add_argument("--beta", type=float)
    pc.add_argument("--varsigma", type=float)
    pc.add_argument("--v", dest="v", type=int,
                    help="unweighted leading columns (reweighted method)")
    pc.add_argument("--tol", type=float)
    pc.add_argument("--max-iter", dest="max_iter", type=int)
    pc.add_argument("--qdct-axis", dest="qdct_axis",
                    help="sparsity transform axis as x,y,z")
    pc.set_defaults(func=cmd_complete)

    pm = sub.add_parser("mask", help="generate a seeded random mask")
    pm.add_argument("--size", required=True, help="dimensions as RxC")
    pm.add_argument("--mr", type=float, required=True)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--out-png", dest="out_png", required=True)
    pm.add_argument("--out-qmsk", dest="out_qmsk")
    pm.add_argument("--manifest")
    pm.set_defaults(func=cmd_mask)

    ps = sub.add_parser("synth", help="write a synthetic quaternion matrix")
    ps.add_argument("--rows", type=int, required=True)
    ps.add_argument("--cols", type=int, required=True)
    ps.add_argument("--rank", type=int, required=True)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", required=True, help="output QMAT path")
    ps.add_argument("--qdct-sparsity", dest="qdct_sparsity", type=float,
                    help="also make the QDCT spectrum this fraction zero")
    ps.add_argument("--qdct-axis", dest="qdct_axis", default="1,1,1")
    ps.add_argument("--manifest")
    ps.set_defaults(func=cmd_synth)

    pb = sub.add_parser("bench", help="per-iteration timing sweep")
    pb.add_argument("--sizes", default="128,256,512")
    pb.add_argument("--rank", type=int, default=16)
    pb.add_argument("--iters", type=int, default=8)
    pb.add_argument("--mr", type=float, default=0.5)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--out", required=True, help="output CSV path")
    pb.add_argument("--manifest")
    pb.set_defaults(func=cmd_bench)

    pr = sub.add_parser("rerun", help="replay a recorded run manifest")
    pr.add_argument("manifest")
    pr.set_defaults(func=cmd_rerun)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = int(os.environ.get("QMC_THREADS", "1"))
    try:
        with threadpool_limits(limits=threads):
            return args.func(args)
    except ConfigError as exc:
        print(f"quatcomp: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"quatcomp: {exc}", file=sys.stderr)
        return EXIT_IO
    except FileNotFoundError as exc:
        print(f"quatcomp: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
