"""Engine operations behind a flat configuration mapping.

Every function here is pure and reentrant: inputs pass through
``BoundArray`` admission, the call is delegated to the engine, and the
result is returned without touching module state, so concurrent host
threads can call them freely.  Configuration keys and defaults mirror the
engine CLI so a binding call and a CLI run with the same settings produce
identical bytes.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from curvtopo import metrics, pi, training
from curvtopo.rips import RipsConfig

from .arrays import BoundArray

_DIMS = {"0": (0,), "1": (1,), "01": (0, 1)}

_DEFAULTS: dict = {
    "n_max": 400,
    "strategy": "maxmin",
    "seed": 0,
    "max_eps": None,
    "max_dim": 2,
    "simplex_budget": 20_000_000,
    "grid": (64, 64),
    "sigma": None,
    "pmax": None,
    "normalize": "max1",
    "dims": "1",
    "resize_to_input": False,
}


def _resolve(
    config: Mapping | None,
) -> tuple[RipsConfig, pi.PiConfig, tuple[int, ...], bool]:
    merged = dict(_DEFAULTS)
    if config:
        unknown = set(config) - set(_DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged.update(config)
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
    dims_raw = merged["dims"]
    if isinstance(dims_raw, str):
        if dims_raw not in _DIMS:
            raise ValueError(f"dims must be one of {sorted(_DIMS)}, got {dims_raw!r}")
        dims = _DIMS[dims_raw]
    else:
        dims = tuple(int(d) for d in dims_raw)
        if not dims or not set(dims) <= {0, 1}:
            raise ValueError(f"dims must be a non-empty subset of {{0, 1}}, got {dims_raw!r}")
    return rips_cfg, pi_cfg, dims, bool(merged["resize_to_input"])


def bind_mask_to_pi(array, config: Mapping | None = None) -> np.ndarray:
    """Persistence image of a binary mask, identical to the batch CLI path.

    ``config`` is a flat mapping keyed like the CLI flags (``n_max``,
    ``strategy``, ``seed``, ``max_eps``, ``simplex_budget``, ``grid``,
    ``sigma``, ``pmax``, ``normalize``, ``dims``, ``resize_to_input``);
    missing keys take the CLI defaults and unknown keys are rejected.  The
    return value is the float32 grid the CLI would have written to a .pir
    file, cell for cell.
    """
    bound = BoundArray.wrap(array, ranks=(2,), name="mask")
    rips_cfg, pi_cfg, dims, resize = _resolve(config)
    img = pi.mask_to_pi(bound.data, rips_cfg, pi_cfg, dims)
    if resize:
        img = training.resize_pi(img, bound.shape[0], bound.shape[1])
    return np.asarray(img, dtype=np.float32)


def bind_metrics(pred, gt, tile: int | None = None) -> dict[str, float]:
    """All five mask metrics, exactly as the engine's metrics module reports.

    Keys: ``dice``, ``cl_dice``, ``miou``, ``beta0_err``, ``beta1_err``.
    ``tile`` switches the Betti errors to tile-averaged mode.
    """
    pred_b = BoundArray.wrap(pred, ranks=(2,), name="pred")
    gt_b = BoundArray.wrap(gt, ranks=(2,), name="gt")
    return metrics.evaluate_masks(pred_b.data, gt_b.data, tile)
