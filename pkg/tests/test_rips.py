import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from curvtopo.rips import (
    RipsConfig,
    SimplexBudgetError,
    build_flag_filtration,
    pairwise_distances,
    subsample,
)
from oracles import brute_force_edge_pairs

SQ2 = math.sqrt(2.0)

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def clouds(min_size=2, max_size=30):
    return st.integers(0, 2**32 - 1).flatmap(
        lambda s: st.integers(min_size, max_size).map(
            lambda n: np.random.default_rng(s).uniform(0, 10, (n, 2))
        )
    )


class TestPairwiseDistances:
    def test_3_4_5_triangle(self):
        d = pairwise_distances(np.array([[0.0, 0.0], [3.0, 4.0]]))
        assert d[0, 1] == 5.0
        assert d[1, 0] == 5.0

    def test_single_point(self):
        assert pairwise_distances(np.array([[7.0, 2.0]])).tolist() == [[0.0]]

    def test_right_corner(self):
        d = pairwise_distances(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
        assert d[0, 1] == 1.0
        assert d[0, 2] == 1.0
        assert d[1, 2] == SQ2

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError, match=r"\(n, 2\)"):
            pairwise_distances(np.zeros((3, 3)))
        with pytest.raises(ValueError, match="at least one"):
            pairwise_distances(np.zeros((0, 2)))

    @given(clouds())
    def test_symmetric_zero_diagonal(self, pc):
        d = pairwise_distances(pc)
        assert np.array_equal(d, d.T)
        assert np.all(np.diag(d) == 0.0)
        assert np.all(d >= 0.0)


class TestSubsample:
    def test_no_op_when_small(self):
        pc = np.arange(20, dtype=np.float64).reshape(10, 2)
        out = subsample(pc, 20)
        assert np.array_equal(out, pc)
        assert out is not pc

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        pc = rng.uniform(0, 5, (50, 2))
        for strategy in ("uniform", "maxmin"):
            a = subsample(pc, 12, strategy, seed=99)
            b = subsample(pc, 12, strategy, seed=99)
            assert np.array_equal(a, b)

    def test_maxmin_square_picks_diagonal(self):
        for seed in range(8):
            out = subsample(UNIT_SQUARE, 2, "maxmin", seed=seed)
            assert abs(np.linalg.norm(out[0] - out[1]) - SQ2) < 1e-12

    def test_unknown_strategy(self):
        with pytest.raises(ValueError, match="strategy"):
            subsample(UNIT_SQUARE, 2, "random")

    @given(clouds(min_size=3, max_size=40), st.integers(1, 40), st.integers(0, 2**32 - 1),
           st.sampled_from(["uniform", "maxmin"]))
    def test_size_and_subset(self, pc, n_max, seed, strategy):
        out = subsample(pc, n_max, strategy, seed)
        assert len(out) == min(len(pc), n_max)
        rows = {tuple(p) for p in pc}
        assert all(tuple(p) in rows for p in out)
        assert len(np.unique(out, axis=0)) == len(out)


class TestBuildFlagFiltration:
    def test_unit_square_exhaustive(self):
        f = build_flag_filtration(pairwise_distances(UNIT_SQUARE), 2.0)
        assert f.n_points == 4
        assert len(f.edge_values) == 6
        assert len(f.tri_values) == 4
        unit_edges = f.edge_values[f.edge_values == 1.0]
        diag_edges = f.edge_values[f.edge_values == SQ2]
        assert len(unit_edges) == 4 and len(diag_edges) == 2
        assert np.all(f.tri_values == SQ2)
        # canonical order: the four side edges first, lexicographic
        assert f.edges[:4].tolist() == [[0, 1], [0, 3], [1, 2], [2, 3]]
        assert f.edges[4:].tolist() == [[0, 2], [1, 3]]
        assert f.tris.tolist() == [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]

    def test_far_points_have_no_edges(self):
        d = pairwise_distances(np.array([[0.0, 0.0], [10.0, 0.0]]))
        f = build_flag_filtration(d, 2.0)
        assert f.n_points == 2
        assert len(f.edge_values) == 0
        assert len(f.tri_values) == 0
        assert f.n_simplices == 2

    def test_single_point(self):
        f = build_flag_filtration(np.zeros((1, 1)), 1.0)
        assert f.n_simplices == 1
        simp = list(f.simplices())
        assert len(simp) == 1
        assert simp[0].vertices == (0,) and simp[0].value == 0.0

    def test_max_dim_1_skips_triangles(self):
        f = build_flag_filtration(pairwise_distances(UNIT_SQUARE), 2.0, max_dim=1)
        assert len(f.edge_values) == 6
        assert len(f.tri_values) == 0

    def test_budget_error_names_budget(self):
        d = pairwise_distances(UNIT_SQUARE)
        with pytest.raises(SimplexBudgetError, match="budget of 5"):
            build_flag_filtration(d, 2.0, simplex_budget=5)

    def test_invalid_args(self):
        d = pairwise_distances(UNIT_SQUARE)
        with pytest.raises(ValueError, match="max_eps"):
            build_flag_filtration(d, 0.0)
        with pytest.raises(ValueError, match="max_dim"):
            build_flag_filtration(d, 1.0, max_dim=3)
        with pytest.raises(ValueError, match="square"):
            build_flag_filtration(np.zeros((2, 3)), 1.0)

    @given(clouds(max_size=25), st.floats(0.1, 1.2))
    def test_face_property_and_values(self, pc, cap_frac):
        d = pairwise_distances(pc)
        cap = float(d.max()) * cap_frac + 1e-9
        f = build_flag_filtration(d, cap)
        assert float(f.edge_values.max(initial=0.0)) <= cap
        eidx = {}
        for (a, b), val in zip(f.edges, f.edge_values):
            assert a < b
            assert val == d[a, b]
            eidx[(int(a), int(b))] = val
        for (a, b, c), val in zip(f.tris, f.tri_values):
            assert a < b < c
            faces = (eidx[(int(a), int(b))], eidx[(int(a), int(c))], eidx[(int(b), int(c))])
            assert val == max(faces)

    @given(clouds(max_size=50), st.floats(0.05, 1.1))
    def test_edge_count_matches_brute_force(self, pc, cap_frac):
        d = pairwise_distances(pc)
        cap = float(d.max()) * cap_frac + 1e-9
        f = build_flag_filtration(d, cap, max_dim=1)
        got = {(int(a), int(b)) for a, b in f.edges}
        assert got == brute_force_edge_pairs(d, cap)

    @given(clouds(max_size=20), st.integers(0, 2**32 - 1))
    def test_permutation_canonical_identity(self, pc, seed):
        """Shuffling then canonically re-sorting the points reproduces the
        filtration exactly."""
        rng = np.random.default_rng(seed)
        perm = rng.permutation(len(pc))
        canon_a = pc[np.lexsort((pc[:, 1], pc[:, 0]))]
        shuffled = pc[perm]
        canon_b = shuffled[np.lexsort((shuffled[:, 1], shuffled[:, 0]))]
        d = pairwise_distances(canon_a)
        cap = float(d.max()) + 1.0
        fa = build_flag_filtration(d, cap)
        fb = build_flag_filtration(pairwise_distances(canon_b), cap)
        assert np.array_equal(fa.edges, fb.edges)
        assert np.array_equal(fa.edge_values, fb.edge_values)
        assert np.array_equal(fa.tris, fb.tris)
        assert np.array_equal(fa.tri_values, fb.tri_values)

    def test_global_order_of_simplices(self):
        f = build_flag_filtration(pairwise_distances(UNIT_SQUARE), 2.0)
        simps = list(f.simplices())
        assert len(simps) == f.n_simplices
        keys = [(s.value, s.dim, s.vertices) for s in simps]
        assert keys == sorted(keys)


class TestRipsConfig:
    def test_defaults(self):
        cfg = RipsConfig()
        assert cfg.n_max == 400
        assert cfg.strategy == "maxmin"
        assert cfg.max_eps is None
        assert cfg.max_dim == 2
        cfg.validate()

    def test_validate_rejects_bad_values(self):
        with pytest.raises(ValueError):
            RipsConfig(n_max=0).validate()
        with pytest.raises(ValueError):
            RipsConfig(strategy="nope").validate()
        with pytest.raises(ValueError):
            RipsConfig(max_eps=-1.0).validate()
        with pytest.raises(ValueError):
            RipsConfig(max_dim=3).validate()

    def test_to_dict_round_trip(self):
        cfg = RipsConfig(n_max=10, seed=3)
        assert RipsConfig(**cfg.to_dict()) == cfg
