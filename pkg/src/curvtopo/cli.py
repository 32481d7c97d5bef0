"""Batch command-line driver.

Subcommands: ``pd`` (mask to persistence diagram JSON), ``pi-gen`` (directory
of masks to .pir persistence images plus reproducibility sidecars), ``eval``
(prediction/ground-truth directories to a metrics report).

Option precedence is CLI flag > config file (``--config``, flat JSON keyed by
flag names) > built-in defaults; the effective configuration is echoed into
every sidecar together with a hash used for resumability.  Exit codes:
0 success, 1 partial or metric failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import mask_io, metrics, pi, training
from .persistence import diagram_to_json
from .rips import RipsConfig

log = logging.getLogger("curvtopo")

_CONFIG_KEYS = (
    "threshold", "n_max", "strategy", "seed", "max_eps", "max_dim",
    "simplex_budget", "grid", "sigma", "pmax", "normalize", "dims",
    "resize_to_input", "tile", "threads", "format",
)

_DEFAULTS: dict = {
    "threshold": 128,
    "n_max": 400,
    "strategy": "maxmin",
    "seed": 0,
    "max_eps": None,
    "max_dim": 2,
    "simplex_budget": 20_000_000,
    "grid": [64, 64],
    "sigma": None,
    "pmax": None,
    "normalize": "max1",
    "dims": "1",
    "resize_to_input": False,
    "tile": "off",
    "threads": None,
    "format": "csv",
}


@dataclass
class RunConfig:
    """Effective per-run options after flag/config/default merging."""

    threshold: int = 128
    rips: RipsConfig = field(default_factory=RipsConfig)
    pi: pi.PiConfig = field(default_factory=pi.PiConfig)
    dims: tuple[int, ...] = (1,)
    resize_to_input: bool = False
    tile: int | None = None
    threads: int = 1
    format: str = "csv"

    def sidecar_config(self) -> dict:
        return {
            "threshold": self.threshold,
            "rips": self.rips.to_dict(),
            "pi": self.pi.to_dict(),
            "dims": list(self.dims),
            "resize_to_input": self.resize_to_input,
        }


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr
    )
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2
    try:
        if args.command == "pd":
            return _cmd_pd(args, cfg)
        if args.command == "pi-gen":
            return _cmd_pi_gen(args, cfg)
        if args.command == "eval":
            return _cmd_eval(args, cfg)
        parser.error(f"unknown command {args.command!r}")
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return 2
    except ValueError as exc:
        log.error("%s", exc)
        return 2
    return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvtopo",
        description="Persistence diagrams, persistence images, and "
        "topology-aware metrics for binary curvilinear masks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    pd_p = sub.add_parser("pd", help="mask to persistence diagram JSON")
    pd_p.add_argument("mask", type=Path)
    pd_p.add_argument("out", type=Path)
    _add_common_flags(pd_p)

    gen_p = sub.add_parser("pi-gen", help="directory of masks to .pir images")
    gen_p.add_argument("mask_dir", type=Path)
    gen_p.add_argument("out_dir", type=Path)
    _add_common_flags(gen_p)
    gen_p.add_argument("--grid", nargs=2, type=int, metavar=("W", "H"), default=None)
    gen_p.add_argument("--sigma", type=float, default=None)
    gen_p.add_argument("--pmax", type=float, default=None)
    gen_p.add_argument("--normalize", choices=("none", "max1"), default=None)
    gen_p.add_argument("--dims", choices=("0", "1", "01"), default=None)
    gen_p.add_argument(
        "--resize-to-input",
        action="store_true",
        default=None,
        help="bilinearly resize each PI to its source mask resolution",
    )
    gen_p.add_argument("--threads", type=int, default=None)

    ev_p = sub.add_parser("eval", help="evaluate predictions against ground truth")
    ev_p.add_argument("pred_dir", type=Path)
    ev_p.add_argument("gt_dir", type=Path)
    ev_p.add_argument("out", type=Path)
    ev_p.add_argument("--config", type=Path, default=None)
    ev_p.add_argument("--tile", default=None, help="tile size for Betti error, or 'off'")
    ev_p.add_argument("--threads", type=int, default=None)
    ev_p.add_argument("--format", choices=("csv", "json"), default=None)
    ev_p.add_argument("--threshold", type=int, default=None)
    return parser


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="JSON config file")
    p.add_argument("--threshold", type=int, default=None)
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--strategy", choices=("uniform", "maxmin"), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-eps", dest="max_eps", type=float, default=None)
    p.add_argument("--simplex-budget", dest="simplex_budget", type=int, default=None)


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path is not None:
        file_cfg = json.loads(Path(config_path).read_text())
        unknown = set(file_cfg) - set(_CONFIG_KEYS)
        if unknown:
            raise ValueError(f"unknown config file keys: {sorted(unknown)}")
        merged.update(file_cfg)
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val

    threads = merged["threads"]
    if threads is None:
        env = os.environ.get("CURVTOPO_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    tile_raw = merged["tile"]
    tile = None if tile_raw in (None, "off") else int(tile_raw)
    if tile is not None and tile < 1:
        raise ValueError(f"tile size must be >= 1, got {tile}")

    rips_cfg = RipsConfig(
        n_max=int(merged["n_max"]),
        strategy=str(merged["strategy"]),
        seed=int(merged["seed"]),
        max_eps=None if merged["max_eps"] is None else float(merged["max_eps"]),
        max_dim=int(merged["max_dim"]),
        simplex_budget=int(merged["simplex_budget"]),
    )
    rips_cfg.validate()
    grid = merged["grid"]
    pi_cfg = pi.PiConfig(
        grid_w=int(grid[0]),
        grid_h=int(grid[1]),
        sigma=None if merged["sigma"] is None else float(merged["sigma"]),
        weight_cap=None if merged["pmax"] is None else float(merged["pmax"]),
        normalize=str(merged["normalize"]),
    )
    pi_cfg.validate()
    dims = {"0": (0,), "1": (1,), "01": (0, 1)}[str(merged["dims"])]
    if not 0 <= int(merged["threshold"]) <= 255:
        raise ValueError(f"threshold must be in [0, 255], got {merged['threshold']}")
    return RunConfig(
        threshold=int(merged["threshold"]),
        rips=rips_cfg,
        pi=pi_cfg,
        dims=dims,
        resize_to_input=bool(merged["resize_to_input"]),
        tile=tile,
        threads=max(1, int(threads)),
        format=str(merged["format"]),
    )


def _cmd_pd(args: argparse.Namespace, cfg: RunConfig) -> int:
    mask = mask_io.load_mask(args.mask, cfg.threshold)
    diagram = pi.mask_to_diagram(mask, cfg.rips)
    if diagram is None:
        payload = {"max_eps": 0.0, "pairs": []}
        n0 = n1 = 0
    else:
        payload = diagram_to_json(diagram)
        n0 = sum(1 for p in diagram.pairs if p.dim == 0)
        n1 = sum(1 for p in diagram.pairs if p.dim == 1)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(payload, indent=1) + "\n")
    print(f"dim0: {n0} pairs, dim1: {n1} pairs")
    return 0


def _cmd_pi_gen(args: argparse.Namespace, cfg: RunConfig) -> int:
    mask_dir: Path = args.mask_dir
    out_dir: Path = args.out_dir
    if not mask_dir.is_dir():
        raise FileNotFoundError(f"mask directory not found: {mask_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)
    files = sorted(p for p in mask_dir.iterdir() if p.is_file())
    if not files:
        raise FileNotFoundError(f"no input files in {mask_dir}")
    side_cfg = cfg.sidecar_config()
    chash = config_hash(side_cfg)

    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        results = list(pool.map(lambda f: _pi_gen_one(f, out_dir, cfg, side_cfg, chash), files))
    wall = time.perf_counter() - t0

    generated = sum(1 for r in results if r == "generated")
    skipped = sum(1 for r in results if r == "skipped")
    failed = len(results) - generated - skipped
    print(
        f"{generated} generated, {skipped} skipped, {failed} failed "
        f"({len(files)} masks in {wall:.2f} s)"
    )
    return 1 if failed else 0


def _pi_gen_one(
    mask_path: Path, out_dir: Path, cfg: RunConfig, side_cfg: dict, chash: str
) -> str:
    pir_path = out_dir / (mask_path.stem + ".pir")
    sidecar_path = out_dir / (mask_path.stem + ".json")
    diagram_path = out_dir / (mask_path.stem + ".diagram.json")
    try:
        if pir_path.is_file() and sidecar_path.is_file() and diagram_path.is_file():
            try:
                existing = json.loads(sidecar_path.read_text())
            except json.JSONDecodeError:
                existing = {}
            if existing.get("config_hash") == chash:
                return "skipped"
        mask = mask_io.load_mask(mask_path, cfg.threshold)
        diagram = pi.mask_to_diagram(mask, cfg.rips)
        payload = {"max_eps": 0.0, "pairs": []} if diagram is None else diagram_to_json(diagram)
        img = pi.diagram_to_pi(diagram, cfg.pi, cfg.dims)
        if cfg.resize_to_input:
            img = training.resize_pi(img, mask.shape[0], mask.shape[1])
        mask_io.save_raster(np.asarray(img, dtype=np.float32), pir_path)
        diagram_path.write_text(json.dumps(payload, indent=1) + "\n")
        sidecar = {
            "source": mask_path.name,
            "engine_version": __version__,
            "config_hash": chash,
            "config": side_cfg,
            "diagram_path": diagram_path.name,
        }
        sidecar_path.write_text(json.dumps(sidecar, indent=1, sort_keys=True) + "\n")
        return "generated"
    except Exception as exc:
        log.error("failed on %s: %s", mask_path, exc)
        return "failed"


def _cmd_eval(args: argparse.Namespace, cfg: RunConfig) -> int:
    pairs = mask_io.pair_directories(args.pred_dir, args.gt_dir)

    def one(pair: tuple[Path, Path]):
        pred_path, gt_path = pair
        try:
            pred = mask_io.load_mask(pred_path, cfg.threshold)
            gt = mask_io.load_mask(gt_path, cfg.threshold)
            row = {"file": pred_path.name}
            row.update(metrics.evaluate_masks(pred, gt, cfg.tile))
            return row, None
        except Exception as exc:
            return None, f"{pred_path.name}: {exc}"

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        results = list(pool.map(one, pairs))
    rows = [r for r, _ in results if r is not None]
    errors = [e for _, e in results if e is not None]
    rows.sort(key=lambda r: r["file"])
    for err in errors:
        log.error("evaluation failed for %s", err)
    if not rows:
        log.error("all %d pairs failed", len(pairs))
        return 1

    report = metrics.MetricsReport(
        rows=rows, betti_mode="image" if cfg.tile is None else f"tile{cfg.tile}"
    )
    out: Path = args.out
    out.parent.mkdir(parents=True, exist_ok=True)
    if cfg.format == "json":
        out.write_text(json.dumps(report.to_json(), indent=1) + "\n")
    else:
        out.write_text(report.to_csv())
    agg = report.aggregate
    print(
        f"{len(rows)} pairs: dice={agg['dice']:.4f} cl_dice={agg['cl_dice']:.4f} "
        f"miou={agg['miou']:.4f} beta0_err={agg['beta0_err']:.3f} "
        f"beta1_err={agg['beta1_err']:.3f}"
    )
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
