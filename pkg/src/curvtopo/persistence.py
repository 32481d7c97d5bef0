"""Persistence diagrams of flag filtrations.

H0 is available through two independent routes: Kruskal minimum-spanning-tree
merging (:func:`compute_h0`) and the boundary-matrix reduction inside
:func:`reduce`.  H1 comes from column reduction of the triangle boundary
matrix over GF(2) in filtration order, with two standard exactness-preserving
shortcuts:

- clearing: edges claimed as pivots of triangle columns are positive and are
  skipped in the edge-boundary pass;
- certified-positive skips: a triangle whose minimal cofacet tetrahedron (in
  the flag extension of the filtration) has it as the maximal facet forms an
  apparent pair, so its column provably reduces to zero and its cascade is
  never materialized.  Whether a triangle column reduces to zero depends only
  on the dimension-2 block of the matrix, hence is unchanged by the extension.

Both shortcuts leave the output identical to the plain algorithm; the test
suite checks this against an independent naive reducer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .rips import Filtration, _count_triangles


class FiltrationOrderError(ValueError):
    """Raised when an input filtration violates its ordering invariants."""


@dataclass(frozen=True)
class PersistencePair:
    """One homology class: (dimension, birth, death).

    ``death`` may be ``math.inf`` (essential class).  ``capped`` marks dim-1
    classes still alive at the filtration cap, whose true death is unknown;
    their recorded death equals ``max_eps``.
    """

    dim: int
    birth: float
    death: float
    capped: bool = False


@dataclass
class ReductionStats:
    """Integer bookkeeping of one reduction run.

    ``n_alive_h1`` counts dim-1 classes alive at the cap including
    zero-persistence ones born exactly at ``max_eps``; together with
    ``n_pos_triangles`` it satisfies the exact Euler identity
    ``V - E + T = n_essential_h0 - n_alive_h1 + n_pos_triangles``.
    """

    n_vertices: int = 0
    n_edges: int = 0
    n_triangles: int = 0
    n_neg_edges: int = 0
    n_pos_edges: int = 0
    n_neg_triangles: int = 0
    n_pos_triangles: int = 0
    n_essential_h0: int = 0
    n_alive_h1: int = 0
    n_dropped_zero_persistence: int = 0


@dataclass
class PersistenceDiagram:
    pairs: list[PersistencePair]
    max_eps: float
    stats: ReductionStats | None = None


def compute_h0(d: np.ndarray) -> list[PersistencePair]:
    """Dim-0 pairs of the full Rips filtration via Kruskal/union-find.

    Returns exactly n pairs: one essential ``(0, inf)`` and n-1 finite pairs
    whose deaths are the Euclidean minimum-spanning-tree edge weights.
    """
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if n < 1:
        raise ValueError("distance matrix must cover at least one point")
    iu, ju = np.triu_indices(n, k=1)
    w = d[iu, ju]
    order = np.lexsort((ju, iu, w))
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    deaths: list[float] = []
    for idx in order:
        ra, rb = find(int(iu[idx])), find(int(ju[idx]))
        if ra != rb:
            parent[ra] = rb
            deaths.append(float(w[idx]))
            if len(deaths) == n - 1:
                break
    pairs = [PersistencePair(0, 0.0, dth) for dth in sorted(deaths)]
    pairs.append(PersistencePair(0, 0.0, math.inf))
    return pairs


def reduce(f: Filtration) -> PersistenceDiagram:
    """Standard persistence reduction of a flag filtration.

    Zero-persistence pairs are discarded from the output (their counts remain
    visible in the attached stats).  Dim-1 classes unpaired at ``max_eps`` are
    emitted with ``death = max_eps`` and ``capped=True``.
    """
    n = f.n_points
    E = len(f.edge_values)
    T = len(f.tri_values)
    stats = ReductionStats(n_vertices=n, n_edges=E, n_triangles=T)
    if n == 0:
        return PersistenceDiagram([], float(f.max_eps), stats)

    _validate_order(f)

    edges64 = f.edges.astype(np.int64, copy=False)
    if T:
        eidx = np.full((n, n), -1, dtype=np.int32)
        eidx[edges64[:, 0], edges64[:, 1]] = np.arange(E, dtype=np.int32)
        eidx[edges64[:, 1], edges64[:, 0]] = eidx[edges64[:, 0], edges64[:, 1]]
        cols = np.empty((T, 3), dtype=np.int32)
        status = int(_build_tri_cols(eidx, f.edge_values, f.tris, f.tri_values, cols))
        if status == 1:
            raise FiltrationOrderError(
                "triangle references an edge missing from the filtration"
            )
        if status == 2:
            raise FiltrationOrderError(
                "triangle value must equal the maximum of its edge values"
            )

        dlook = np.full((n, n), np.inf, dtype=np.float64)
        dlook[edges64[:, 0], edges64[:, 1]] = f.edge_values
        dlook[edges64[:, 1], edges64[:, 0]] = f.edge_values
        np.fill_diagonal(dlook, 0.0)
        # the apparent-pair certificate is sound only on flag-complete input
        # (every triangle spanned by present edges is in the filtration);
        # otherwise fall back to cascading every column
        if int(_count_triangles(dlook, f.max_eps)) == T:
            certified = _certify_positive(
                dlook, f.edges, f.edge_values, f.tris, f.tri_values
            )
        else:
            certified = np.zeros(T, dtype=np.bool_)
        sub = np.nonzero(~certified)[0]
        sub_cols = np.sort(cols[sub], axis=1)
        pool_cap = 64 * max(E, 1)
        while True:
            pair_edge, n_zero = _reduce_d2(sub_cols, E, pool_cap)
            if n_zero >= 0:
                break
            pool_cap *= 4
        edge_killer = np.full(E, -1, dtype=np.int64)
        claimed = pair_edge >= 0
        edge_killer[pair_edge[claimed]] = sub[claimed]
        stats.n_pos_triangles = int(certified.sum()) + int(n_zero)
        stats.n_neg_triangles = T - stats.n_pos_triangles
    else:
        edge_killer = np.full(E, -1, dtype=np.int64)

    cleared = edge_killer >= 0
    negative, vertex_claimed = _reduce_d1(f.edges, n, cleared)
    stats.n_neg_edges = int(negative.sum())
    stats.n_pos_edges = E - stats.n_neg_edges
    stats.n_essential_h0 = n - int(vertex_claimed.sum())
    stats.n_alive_h1 = stats.n_pos_edges - stats.n_neg_triangles

    pairs: list[PersistencePair] = []
    dropped = 0
    for e in np.nonzero(negative)[0]:
        death = float(f.edge_values[e])
        if death > 0.0:
            pairs.append(PersistencePair(0, 0.0, death))
        else:
            dropped += 1
    pairs.extend(
        PersistencePair(0, 0.0, math.inf) for _ in range(stats.n_essential_h0)
    )
    positive = ~negative
    for e in np.nonzero(positive)[0]:
        birth = float(f.edge_values[e])
        killer = edge_killer[e]
        if killer >= 0:
            death = float(f.tri_values[killer])
            capped = False
        else:
            death = float(f.max_eps)
            capped = True
        if death > birth:
            pairs.append(PersistencePair(1, birth, death, capped))
        else:
            dropped += 1
    stats.n_dropped_zero_persistence = dropped
    pairs.sort(key=lambda p: (p.dim, p.birth, p.death))
    return PersistenceDiagram(pairs, float(f.max_eps), stats)


def betti_at(pd: PersistenceDiagram, eps: float) -> tuple[int, int]:
    """Betti numbers read off the diagram: classes with birth <= eps < death."""
    if not 0.0 <= eps <= pd.max_eps:
        raise ValueError(f"eps must lie in [0, {pd.max_eps}], got {eps}")
    b0 = sum(1 for p in pd.pairs if p.dim == 0 and p.birth <= eps < p.death)
    b1 = sum(1 for p in pd.pairs if p.dim == 1 and p.birth <= eps < p.death)
    return b0, b1


def diagram_to_json(pd: PersistenceDiagram) -> dict:
    """JSON-ready dict; infinite deaths encode as the string "inf"."""
    pairs = sorted(pd.pairs, key=lambda p: (p.dim, p.birth, p.death))
    return {
        "max_eps": float(pd.max_eps),
        "pairs": [
            {
                "dim": p.dim,
                "birth": p.birth,
                "death": "inf" if math.isinf(p.death) else p.death,
                "capped": p.capped,
            }
            for p in pairs
        ],
    }


def diagram_from_json(obj: dict) -> PersistenceDiagram:
    pairs = [
        PersistencePair(
            int(rec["dim"]),
            float(rec["birth"]),
            math.inf if rec["death"] == "inf" else float(rec["death"]),
            bool(rec.get("capped", False)),
        )
        for rec in obj["pairs"]
    ]
    return PersistenceDiagram(pairs, float(obj["max_eps"]))


def save_diagram(pd: PersistenceDiagram, path: str | Path) -> None:
    Path(path).write_text(json.dumps(diagram_to_json(pd), indent=1) + "\n")


def load_diagram(path: str | Path) -> PersistenceDiagram:
    return diagram_from_json(json.loads(Path(path).read_text()))


def _validate_order(f: Filtration) -> None:
    n = f.n_points
    messages = {
        1: "simplex vertex index out of range",
        2: "simplex vertices must be strictly increasing",
        3: "simplex value exceeds max_eps",
        4: "simplices are not sorted by value",
        5: "equal-value simplices are not in lexicographic order",
    }
    for verts, values in ((f.edges, f.edge_values), (f.tris, f.tri_values)):
        if len(values) == 0:
            continue
        status = int(_check_block_order(verts, values, n, f.max_eps))
        if status:
            raise FiltrationOrderError(messages[status])


@njit(cache=True, nogil=True)
def _check_block_order(
    verts: np.ndarray, values: np.ndarray, n: int, max_eps: float
) -> np.int64:
    m = verts.shape[0]
    width = verts.shape[1]
    for r in range(m):
        prev = np.int64(-1)
        for c in range(width):
            v = np.int64(verts[r, c])
            if v < 0 or v >= n:
                return np.int64(1)
            if v <= prev:
                return np.int64(2)
            prev = v
        if values[r] > max_eps:
            return np.int64(3)
        if r > 0:
            if values[r] < values[r - 1]:
                return np.int64(4)
            if values[r] == values[r - 1]:
                # previous row must strictly precede in lex order; an exact
                # duplicate row also fails
                before = False
                for c in range(width):
                    a = verts[r - 1, c]
                    b = verts[r, c]
                    if a != b:
                        before = a < b
                        break
                if not before:
                    return np.int64(5)
    return np.int64(0)


@njit(cache=True, nogil=True)
def _build_tri_cols(
    eidx: np.ndarray,
    edge_values: np.ndarray,
    tris: np.ndarray,
    tri_values: np.ndarray,
    cols: np.ndarray,
) -> np.int64:
    """Resolve each triangle's three edge indices, checking face presence and
    the flag rule (value equals max face value).  0 ok, 1 missing edge,
    2 value mismatch."""
    T = tris.shape[0]
    for t in range(T):
        a = tris[t, 0]
        b = tris[t, 1]
        c = tris[t, 2]
        e0 = eidx[a, b]
        e1 = eidx[a, c]
        e2 = eidx[b, c]
        if e0 < 0 or e1 < 0 or e2 < 0:
            return np.int64(1)
        v = edge_values[e0]
        if edge_values[e1] > v:
            v = edge_values[e1]
        if edge_values[e2] > v:
            v = edge_values[e2]
        if v != tri_values[t]:
            return np.int64(2)
        cols[t, 0] = e0
        cols[t, 1] = e1
        cols[t, 2] = e2
    return np.int64(0)


@njit(cache=True, nogil=True)
def _tri_key(a: np.int64, b: np.int64, c: np.int64) -> np.int64:
    # packed sorted triple; vertex indices must fit in 21 bits
    if a > b:
        a, b = b, a
    if b > c:
        b, c = c, b
    if a > b:
        a, b = b, a
    return (a << 42) | (b << 21) | c


@njit(cache=True, nogil=True)
def _certify_positive(
    dlook: np.ndarray,
    edges: np.ndarray,
    edge_values: np.ndarray,
    tris: np.ndarray,
    tri_values: np.ndarray,
) -> np.ndarray:
    """Mark triangles provably positive via the apparent-pair criterion.

    For triangle t = (i, j, k) at value v, the minimal cofacet among
    equal-value tetrahedra is (i, j, k, x*) with x* the smallest vertex whose
    distances to i, j, k are all <= v.  If t is additionally the maximal facet
    of that tetrahedron under (value, lexicographic) order, (t, cofacet) is an
    apparent pair and t's column reduces to zero.

    Both simplex blocks arrive sorted by value, so a single sweep maintains
    per-vertex neighbor bitsets of all edges <= the current value; x* is the
    lowest set bit of the AND of three rows.  A vertex never neighbors
    itself, so i, j, k drop out of the intersection automatically.
    """
    n = dlook.shape[0]
    E = edges.shape[0]
    T = tris.shape[0]
    words = (n + 63) >> 6
    bitset = np.zeros((n, words), dtype=np.uint64)
    out = np.zeros(T, dtype=np.bool_)
    one = np.uint64(1)
    eptr = 0
    for t in range(T):
        i = np.int64(tris[t, 0])
        j = np.int64(tris[t, 1])
        k = np.int64(tris[t, 2])
        v = tri_values[t]
        while eptr < E and edge_values[eptr] <= v:
            a = np.int64(edges[eptr, 0])
            b = np.int64(edges[eptr, 1])
            bitset[a, b >> 6] |= one << np.uint64(b & 63)
            bitset[b, a >> 6] |= one << np.uint64(a & 63)
            eptr += 1
        xstar = np.int64(-1)
        for w in range(words):
            word = bitset[i, w] & bitset[j, w] & bitset[k, w]
            if word != np.uint64(0):
                low = word & (~word + one)
                pos = np.int64(0)
                if low & np.uint64(0xFFFFFFFF) == np.uint64(0):
                    pos += 32
                    low >>= np.uint64(32)
                if low & np.uint64(0xFFFF) == np.uint64(0):
                    pos += 16
                    low >>= np.uint64(16)
                if low & np.uint64(0xFF) == np.uint64(0):
                    pos += 8
                    low >>= np.uint64(8)
                if low & np.uint64(0xF) == np.uint64(0):
                    pos += 4
                    low >>= np.uint64(4)
                if low & np.uint64(0x3) == np.uint64(0):
                    pos += 2
                    low >>= np.uint64(2)
                if low & np.uint64(0x1) == np.uint64(0):
                    pos += 1
                xstar = np.int64(w << 6) + pos
                break
        if xstar < 0:
            continue
        dxi = dlook[i, xstar]
        dxj = dlook[j, xstar]
        dxk = dlook[k, xstar]
        key_t = _tri_key(i, j, k)
        f1 = max(dlook[i, j], max(dxi, dxj))
        f2 = max(dlook[i, k], max(dxi, dxk))
        f3 = max(dlook[j, k], max(dxj, dxk))
        ok = True
        if f1 >= v and (f1 > v or _tri_key(i, j, xstar) > key_t):
            ok = False
        if ok and f2 >= v and (f2 > v or _tri_key(i, k, xstar) > key_t):
            ok = False
        if ok and f3 >= v and (f3 > v or _tri_key(j, k, xstar) > key_t):
            ok = False
        out[t] = ok
    return out


@njit(cache=True, nogil=True)
def _merge_xor(a: np.ndarray, la: int, pool: np.ndarray, s: int, lb: int, out: np.ndarray) -> int:
    i = 0
    j = 0
    m = 0
    while i < la and j < lb:
        x = a[i]
        y = pool[s + j]
        if x < y:
            out[m] = x
            m += 1
            i += 1
        elif y < x:
            out[m] = y
            m += 1
            j += 1
        else:
            i += 1
            j += 1
    while i < la:
        out[m] = a[i]
        m += 1
        i += 1
    while j < lb:
        out[m] = pool[s + j]
        m += 1
        j += 1
    return m


@njit(cache=True, nogil=True)
def _reduce_d2(
    tri_cols: np.ndarray, n_edges: int, pool_cap: int
) -> tuple[np.ndarray, np.int64]:
    """Column-reduce triangle boundary columns (rows = edge indices).

    ``tri_cols`` rows must be sorted ascending and the columns must arrive in
    filtration order.  Returns the pivot edge claimed by each column (-1 when
    the column reduces to zero) and the zero-column count, or -1 as the count
    when the storage pool overflows and a retry with a larger pool is needed.
    """
    m_cols = tri_cols.shape[0]
    claimed_start = np.full(n_edges, -1, dtype=np.int64)
    claimed_len = np.zeros(n_edges, dtype=np.int64)
    pool = np.empty(pool_cap, dtype=np.int64)
    pool_top = 0
    wa = np.empty(n_edges + 1, dtype=np.int64)
    wb = np.empty(n_edges + 1, dtype=np.int64)
    pair_edge = np.full(m_cols, -1, dtype=np.int64)
    n_zero = np.int64(0)
    for c in range(m_cols):
        m = 3
        wa[0] = tri_cols[c, 0]
        wa[1] = tri_cols[c, 1]
        wa[2] = tri_cols[c, 2]
        while m > 0:
            low = wa[m - 1]
            if claimed_start[low] == -1:
                if pool_top + m > pool_cap:
                    return pair_edge, np.int64(-1)
                claimed_start[low] = pool_top
                claimed_len[low] = m
                pool[pool_top:pool_top + m] = wa[:m]
                pool_top += m
                pair_edge[c] = low
                break
            m = _merge_xor(wa, m, pool, claimed_start[low], claimed_len[low], wb)
            tmp = wa
            wa = wb
            wb = tmp
        if m == 0:
            n_zero += 1
    return pair_edge, n_zero


@njit(cache=True, nogil=True)
def _reduce_d1(
    edges: np.ndarray, n_vertices: int, cleared: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Column-reduce edge boundary columns with vertex pivots.

    Edges flagged ``cleared`` (pivots of triangle columns) are positive by the
    clearing argument and skipped.  An edge column always holds exactly two
    vertices, so the cascade is a pair walk needing no storage pool.
    """
    E = edges.shape[0]
    claimed_other = np.full(n_vertices, -1, dtype=np.int64)
    negative = np.zeros(E, dtype=np.bool_)
    for e in range(E):
        if cleared[e]:
            continue
        a = np.int64(edges[e, 0])
        b = np.int64(edges[e, 1])
        while True:
            o = claimed_other[b]
            if o == -1:
                claimed_other[b] = a
                negative[e] = True
                break
            if o == a:
                break
            if o < a:
                b = a
                a = o
            else:
                b = o
    vertex_claimed = claimed_other != -1
    return negative, vertex_claimed
