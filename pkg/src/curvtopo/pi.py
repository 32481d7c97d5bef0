"""Persistence images.

A diagram is mapped through the birth-persistence transform, each point is
weighted by a linear persistence ramp that vanishes on the diagonal, and a
unit-mass isotropic Gaussian is attached to it.  Cell values are the exact
integrals of the resulting surface: the 2-D integral of a Gaussian over an
axis-aligned cell separates into a product of 1-D CDF differences, evaluated
through ``scipy.special.erf`` (whose exact odd symmetry keeps symmetric
configurations exactly symmetric).  No sampling is involved, so halving the
cell size and re-summing reproduces the coarse image to float accuracy.

Images are computed in float64; the .pir disk format stores float32.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.special import erf

from . import mask_io
from .rips import RipsConfig, build_flag_filtration, pairwise_distances, subsample
from .persistence import PersistenceDiagram, PersistencePair, reduce as _reduce

_SQRT2 = math.sqrt(2.0)


@dataclass
class PiConfig:
    """Persistence-image grid, kernel, and weighting parameters.

    Fields left as ``None`` are resolved against the filtration cap:
    ranges become ``[0, max_eps]``, ``sigma = max_eps / 20`` and
    ``weight_cap = max_eps / 2``.
    """

    grid_w: int = 64
    grid_h: int = 64
    birth_range: tuple[float, float] | None = None
    pers_range: tuple[float, float] | None = None
    sigma: float | None = None
    weight_cap: float | None = None
    normalize: str = "max1"

    def resolved(self, max_eps: float) -> "PiConfig":
        if not max_eps > 0:
            raise ValueError(f"max_eps must be > 0 to resolve defaults, got {max_eps}")
        cfg = PiConfig(
            grid_w=self.grid_w,
            grid_h=self.grid_h,
            birth_range=self.birth_range or (0.0, float(max_eps)),
            pers_range=self.pers_range or (0.0, float(max_eps)),
            sigma=self.sigma if self.sigma is not None else max_eps / 20.0,
            weight_cap=self.weight_cap if self.weight_cap is not None else max_eps / 2.0,
            normalize=self.normalize,
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.grid_w < 1 or self.grid_h < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.normalize not in ("none", "max1"):
            raise ValueError(f"unknown normalize mode {self.normalize!r}")
        if self.birth_range is not None and not self.birth_range[1] > self.birth_range[0]:
            raise ValueError(f"birth_range must be increasing, got {self.birth_range}")
        if self.pers_range is not None:
            lo, hi = self.pers_range
            if not (hi > lo >= 0):
                raise ValueError(f"pers_range must satisfy hi > lo >= 0, got {self.pers_range}")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.weight_cap is not None and not self.weight_cap > 0:
            raise ValueError(f"weight_cap must be > 0, got {self.weight_cap}")

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("birth_range", "pers_range"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d


def select_and_cap(pd: PersistenceDiagram, dims: tuple[int, ...]) -> list[PersistencePair]:
    """Keep pairs of the requested dimensions, capping infinite deaths.

    Essential classes get ``death = max_eps`` and the capped flag, making the
    diagram safe for the birth-persistence transform.
    """
    out = []
    for p in pd.pairs:
        if p.dim not in dims:
            continue
        if math.isinf(p.death):
            out.append(PersistencePair(p.dim, p.birth, float(pd.max_eps), True))
        else:
            out.append(p)
    return out


def transform_diagram(pairs: list[PersistencePair] | PersistenceDiagram) -> np.ndarray:
    """Birth-persistence transform: (b, d) -> (b, d - b), multiplicity kept.

    Every death must be finite; an infinite death means the upstream capping
    policy was skipped and is reported as an error.
    """
    if isinstance(pairs, PersistenceDiagram):
        pairs = pairs.pairs
    out = np.empty((len(pairs), 2), dtype=np.float64)
    for row, p in enumerate(pairs):
        if math.isinf(p.death):
            raise ValueError(
                "diagram contains an infinite death; cap it before the "
                "birth-persistence transform"
            )
        out[row, 0] = p.birth
        out[row, 1] = p.death - p.birth
    return out


def weight(p, cap: float):
    """Linear persistence ramp: 0 at the diagonal, p/cap below cap, then 1."""
    if not cap > 0:
        raise ValueError(f"weight cap must be > 0, got {cap}")
    p = np.asarray(p, dtype=np.float64)
    if (p < 0).any():
        raise ValueError("persistence must be >= 0")
    w = np.minimum(p / cap, 1.0)
    return float(w) if w.ndim == 0 else w


def rasterize(points: np.ndarray, cfg: PiConfig) -> np.ndarray:
    """Exact per-cell integral of the weighted Gaussian persistence surface.

    ``points`` is an (n, 2) array of (birth, persistence) pairs.  Rows of the
    output index the persistence axis ascending, columns the birth axis
    ascending.  Points outside the grid ranges still contribute their tails.
    """
    cfg.validate()
    if cfg.birth_range is None or cfg.pers_range is None or cfg.sigma is None or cfg.weight_cap is None:
        raise ValueError("rasterize needs a fully resolved PiConfig")
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    img = np.zeros((cfg.grid_h, cfg.grid_w), dtype=np.float64)
    if len(points) == 0:
        return img
    b_edges = np.linspace(cfg.birth_range[0], cfg.birth_range[1], cfg.grid_w + 1)
    p_edges = np.linspace(cfg.pers_range[0], cfg.pers_range[1], cfg.grid_h + 1)
    denom = cfg.sigma * _SQRT2
    for b, pers in points:
        w = weight(pers, cfg.weight_cap)
        if w == 0.0:
            continue
        col_cdf = 0.5 * erf((b_edges - b) / denom)
        row_cdf = 0.5 * erf((p_edges - pers) / denom)
        img += w * np.outer(np.diff(row_cdf), np.diff(col_cdf))
    return img


def normalize(img: np.ndarray, mode: str) -> np.ndarray:
    """Scale to unit maximum (``max1``) or pass through (``none``)."""
    img = np.asarray(img, dtype=np.float64)
    if mode == "none":
        return img.copy()
    if mode == "max1":
        peak = img.max() if img.size else 0.0
        return img / peak if peak > 0 else img.copy()
    raise ValueError(f"unknown normalize mode {mode!r}")


def mask_to_pi(
    mask: np.ndarray,
    rips_cfg: RipsConfig | None = None,
    pi_cfg: PiConfig | None = None,
    dims: tuple[int, ...] = (1,),
    seed: int | None = None,
) -> np.ndarray:
    """Full mask-to-persistence-image pipeline, deterministic given the seed.

    Stages: foreground extraction, subsampling, distance matrix, flag
    filtration, reduction, dimension selection and capping, birth-persistence
    transform, exact rasterization, normalization.  Empty or degenerate masks
    yield the all-zero image of the configured grid.
    """
    rips_cfg = rips_cfg or RipsConfig()
    rips_cfg.validate()
    if seed is not None:
        rips_cfg = RipsConfig(**{**rips_cfg.to_dict(), "seed": seed})
    diagram = mask_to_diagram(mask, rips_cfg)
    return diagram_to_pi(diagram, pi_cfg, dims)


def diagram_to_pi(
    diagram: PersistenceDiagram | None,
    pi_cfg: PiConfig | None = None,
    dims: tuple[int, ...] = (1,),
) -> np.ndarray:
    """Select, cap, transform, rasterize, and normalize one diagram.

    ``None``, an empty diagram, or a zero filtration cap all mean there is
    nothing to spread on the grid, so the all-zero image comes back.
    """
    pi_cfg = pi_cfg or PiConfig()
    if not set(dims) <= {0, 1}:
        raise ValueError(f"dims must be a subset of {{0, 1}}, got {dims}")
    if diagram is None or not diagram.pairs or not diagram.max_eps > 0:
        return np.zeros((pi_cfg.grid_h, pi_cfg.grid_w), dtype=np.float64)
    cfg = pi_cfg.resolved(diagram.max_eps)
    pts = transform_diagram(select_and_cap(diagram, tuple(dims)))
    img = rasterize(pts, cfg)
    return normalize(img, cfg.normalize)


def mask_to_diagram(mask: np.ndarray, rips_cfg: RipsConfig | None = None) -> PersistenceDiagram | None:
    """Mask to persistence diagram; None for an empty mask.

    A single-point cloud has no positive filtration cap to build from; its
    diagram is just the one essential component, reported with max_eps 0.
    """
    rips_cfg = rips_cfg or RipsConfig()
    rips_cfg.validate()
    cloud = mask_io.mask_to_point_cloud(mask)
    if len(cloud) == 0:
        return None
    cloud = subsample(cloud, rips_cfg.n_max, rips_cfg.strategy, rips_cfg.seed)
    d = pairwise_distances(cloud)
    max_eps = rips_cfg.max_eps if rips_cfg.max_eps is not None else float(d.max())
    if not max_eps > 0:
        pairs = [PersistencePair(0, 0.0, math.inf)]
        return PersistenceDiagram(pairs, 0.0)
    filtration = build_flag_filtration(
        d, max_eps, rips_cfg.max_dim, rips_cfg.simplex_budget
    )
    return _reduce(filtration)
