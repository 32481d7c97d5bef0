"""Vietoris-Rips flag filtration construction (dimension <= 2).

The filtration is stored columnar (vertex count plus per-dimension index and
value arrays) so that million-simplex complexes never materialize per-simplex
Python objects.  Simplices are globally ordered by
``(value, dimension, lexicographic vertex order)``, which guarantees that
faces precede cofaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Iterator

import numpy as np
from numba import njit


class SimplexBudgetError(ValueError):
    """Raised when a complex would exceed the configured simplex budget."""


@dataclass(frozen=True)
class Simplex:
    """A single simplex: sorted vertex tuple plus its filtration value."""

    vertices: tuple[int, ...]
    value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


@dataclass
class Filtration:
    """Flag filtration of a point cloud, capped at ``max_eps``.

    ``edges`` rows and ``tris`` rows hold strictly increasing vertex indices;
    each per-dimension block is sorted by ``(value, lexicographic vertices)``.
    """

    n_points: int
    edges: np.ndarray          # (E, 2) int32
    edge_values: np.ndarray    # (E,) float64
    tris: np.ndarray           # (T, 3) int32
    tri_values: np.ndarray     # (T,) float64
    max_eps: float

    @property
    def n_simplices(self) -> int:
        return self.n_points + len(self.edge_values) + len(self.tri_values)

    def simplices(self) -> Iterator[Simplex]:
        """Yield all simplices in global reduction order.

        Intended for inspection and testing; large complexes should be
        consumed through the columnar arrays instead.
        """
        items: list[tuple[float, int, tuple[int, ...]]] = []
        items.extend((0.0, 0, (v,)) for v in range(self.n_points))
        items.extend(
            (float(val), 1, (int(a), int(b)))
            for (a, b), val in zip(self.edges, self.edge_values)
        )
        items.extend(
            (float(val), 2, (int(a), int(b), int(c)))
            for (a, b, c), val in zip(self.tris, self.tri_values)
        )
        items.sort()
        for val, _, verts in items:
            yield Simplex(verts, val)


@dataclass
class RipsConfig:
    """Knobs of the mask-to-filtration stage.

    ``max_eps=None`` means "use the diameter of the (subsampled) cloud".
    """

    n_max: int = 400
    strategy: str = "maxmin"
    seed: int = 0
    max_eps: float | None = None
    max_dim: int = 2
    simplex_budget: int = 20_000_000

    def validate(self) -> None:
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        if self.strategy not in ("uniform", "maxmin"):
            raise ValueError(f"unknown subsample strategy {self.strategy!r}")
        if self.max_eps is not None and not self.max_eps > 0:
            raise ValueError(f"max_eps must be > 0, got {self.max_eps}")
        if self.max_dim not in (1, 2):
            raise ValueError(f"max_dim must be 1 or 2, got {self.max_dim}")
        if self.simplex_budget < 1:
            raise ValueError("simplex_budget must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


def pairwise_distances(pc: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance matrix of an (n, 2) point array."""
    pc = np.asarray(pc, dtype=np.float64)
    if pc.ndim != 2 or pc.shape[1] != 2:
        raise ValueError(f"point cloud must have shape (n, 2), got {pc.shape}")
    if len(pc) < 1:
        raise ValueError("point cloud must contain at least one point")
    diff = pc[:, None, :] - pc[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(d, 0.0)
    return d


def subsample(
    pc: np.ndarray, n_max: int, strategy: str = "maxmin", seed: int = 0
) -> np.ndarray:
    """Reduce a cloud to at most ``n_max`` points, deterministically.

    ``uniform`` draws without replacement; ``maxmin`` runs farthest-point
    sampling from a seed-chosen start.  Selected points are returned in the
    original scan order so the result is itself a valid point cloud.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    pc = np.asarray(pc, dtype=np.float64)
    n = len(pc)
    if n <= n_max:
        return pc.copy()
    rng = np.random.default_rng(seed)
    if strategy == "uniform":
        idx = rng.choice(n, size=n_max, replace=False)
    elif strategy == "maxmin":
        idx = _maxmin_indices(pc, n_max, int(rng.integers(n)))
    else:
        raise ValueError(f"unknown subsample strategy {strategy!r}")
    return pc[np.sort(idx)]


def _maxmin_indices(pc: np.ndarray, n_max: int, first: int) -> np.ndarray:
    selected = np.empty(n_max, dtype=np.int64)
    selected[0] = first
    dmin = np.linalg.norm(pc - pc[first], axis=1)
    for t in range(1, n_max):
        # argmax takes the first maximizer, keeping tie handling deterministic
        nxt = int(dmin.argmax())
        selected[t] = nxt
        np.minimum(dmin, np.linalg.norm(pc - pc[nxt], axis=1), out=dmin)
    return selected


def build_flag_filtration(
    d: np.ndarray,
    max_eps: float,
    max_dim: int = 2,
    simplex_budget: int = 20_000_000,
) -> Filtration:
    """Build the flag filtration of a distance matrix, capped at ``max_eps``.

    Vertices enter at value 0, an edge at its length, and a triangle at its
    longest edge length (flag complex rule).  Complexes whose total simplex
    count would exceed ``simplex_budget`` are rejected up front.
    """
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {d.shape}")
    if not max_eps > 0:
        raise ValueError(f"max_eps must be > 0, got {max_eps}")
    if max_dim not in (1, 2):
        raise ValueError(f"max_dim must be 1 or 2, got {max_dim}")
    n = d.shape[0]

    iu, ju = np.nonzero(np.triu(d <= max_eps, k=1))
    ev = d[iu, ju]
    order = np.lexsort((ju, iu, ev))
    edges = np.empty((len(ev), 2), dtype=np.int32)
    edges[:, 0] = iu[order]
    edges[:, 1] = ju[order]
    edge_values = ev[order]

    n_tris = 0
    if max_dim == 2:
        n_tris = int(_count_triangles(d, max_eps))
    total = n + len(edge_values) + n_tris
    if total > simplex_budget:
        raise SimplexBudgetError(
            f"complex has {total} simplices, exceeding the simplex budget "
            f"of {simplex_budget}"
        )

    if max_dim == 2 and n_tris:
        # stable counting sort on the value rank: a triangle value is always
        # one of the edge values, rank order is value order, and the fill
        # loop emits lexicographic order within each rank bin
        uniq = np.unique(ev)
        vrank = np.zeros((n, n), dtype=np.int32)
        ranks = np.searchsorted(uniq, ev).astype(np.int32)
        vrank[iu, ju] = ranks
        vrank[ju, iu] = ranks
        raw_tris = np.empty((n_tris, 3), dtype=np.int32)
        raw_ranks = np.empty(n_tris, dtype=np.int32)
        _fill_triangles(d, max_eps, vrank, raw_tris, raw_ranks)
        tris, tri_ranks = _counting_sort_tris(raw_tris, raw_ranks, len(uniq))
        tri_values = uniq[tri_ranks]
    else:
        tris = np.empty((0, 3), dtype=np.int32)
        tri_values = np.empty(0, dtype=np.float64)

    return Filtration(
        n_points=n,
        edges=edges,
        edge_values=edge_values,
        tris=tris,
        tri_values=tri_values,
        max_eps=float(max_eps),
    )


@njit(cache=True, nogil=True)
def _count_triangles(d: np.ndarray, max_eps: float) -> np.int64:
    n = d.shape[0]
    count = np.int64(0)
    for i in range(n):
        for j in range(i + 1, n):
            if d[i, j] > max_eps:
                continue
            for k in range(j + 1, n):
                if d[i, k] <= max_eps and d[j, k] <= max_eps:
                    count += 1
    return count


@njit(cache=True, nogil=True)
def _fill_triangles(
    d: np.ndarray,
    max_eps: float,
    vrank: np.ndarray,
    tris: np.ndarray,
    tri_ranks: np.ndarray,
) -> None:
    n = d.shape[0]
    m = 0
    for i in range(n):
        for j in range(i + 1, n):
            if d[i, j] > max_eps:
                continue
            rij = vrank[i, j]
            for k in range(j + 1, n):
                if d[i, k] <= max_eps and d[j, k] <= max_eps:
                    r = rij
                    if vrank[i, k] > r:
                        r = vrank[i, k]
                    if vrank[j, k] > r:
                        r = vrank[j, k]
                    tris[m, 0] = i
                    tris[m, 1] = j
                    tris[m, 2] = k
                    tri_ranks[m] = r
                    m += 1


@njit(cache=True, nogil=True)
def _counting_sort_tris(
    tris: np.ndarray, tri_ranks: np.ndarray, n_bins: int
) -> tuple[np.ndarray, np.ndarray]:
    T = tri_ranks.shape[0]
    counts = np.zeros(n_bins + 1, dtype=np.int64)
    for t in range(T):
        counts[tri_ranks[t] + 1] += 1
    for b in range(1, n_bins + 1):
        counts[b] += counts[b - 1]
    out_t = np.empty_like(tris)
    out_r = np.empty_like(tri_ranks)
    for t in range(T):
        r = tri_ranks[t]
        p = counts[r]
        counts[r] = p + 1
        out_t[p, 0] = tris[t, 0]
        out_t[p, 1] = tris[t, 1]
        out_t[p, 2] = tris[t, 2]
        out_r[p] = r
    return out_t, out_r
