import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarsecert.errors import (
    AsymmetryError,
    BadNormError,
    DisconnectedError,
    EmptySetError,
    InvalidInputError,
    MixedArityError,
    NegativeDistanceError,
    NonzeroDiagonalError,
    TriangleViolationError,
    ZeroOffDiagonalError,
)
from coarsecert.metric import (
    PointSubset,
    closed_set_ball,
    diameter,
    dist_to_set,
    dist_to_set_all,
    load_graph,
    load_matrix,
    load_points,
    nearest_point_retraction,
    set_ball,
)
from .conftest import path_space


class TestLoadMatrix:
    def test_two_point_space(self):
        sp = load_matrix([[0, 1], [1, 0]])
        assert sp.n == 2
        assert sp.d(0, 1) == 1.0

    def test_asymmetry(self):
        with pytest.raises(AsymmetryError):
            load_matrix([[0, 1], [2, 0]])

    def test_triangle_violation(self):
        # d(0,2)=3 > d(0,1)+d(1,2) = 2
        with pytest.raises(TriangleViolationError):
            load_matrix([[0, 1, 3], [1, 0, 1], [3, 1, 0]])

    def test_nonzero_diagonal(self):
        with pytest.raises(NonzeroDiagonalError):
            load_matrix([[1, 1], [1, 0]])

    def test_zero_off_diagonal(self):
        with pytest.raises(ZeroOffDiagonalError):
            load_matrix([[0, 0], [0, 0]])

    def test_negative(self):
        with pytest.raises(NegativeDistanceError):
            load_matrix([[0, -1], [-1, 0]])

    def test_not_square(self):
        with pytest.raises(InvalidInputError):
            load_matrix([[0, 1, 2], [1, 0, 1]])

    def test_not_finite(self):
        with pytest.raises(InvalidInputError):
            load_matrix([[0, math.inf], [math.inf, 0]])

    @given(st.integers(3, 6), st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_matches_bruteforce_oracle(self, n, seed):
        # oracle: exhaustive triple loop over a random symmetric grid
        rng = np.random.default_rng(seed)
        m = np.round(rng.uniform(0.5, 3.0, (n, n)), 3)
        m = (m + m.T) / 2.0
        np.fill_diagonal(m, 0.0)
        ok = all(
            m[x, z] <= m[x, y] + m[y, z] + 1e-9
            for x in range(n) for y in range(n) for z in range(n)
        )
        if ok:
            assert load_matrix(m).n == n
        else:
            with pytest.raises(TriangleViolationError):
                load_matrix(m)


class TestLoadGraph:
    def test_path(self):
        sp = load_graph(3, [(0, 1, 1), (1, 2, 1)])
        assert sp.d(0, 2) == 2.0

    def test_cycle(self, cycle4):
        assert cycle4.d(0, 2) == 2.0
        assert cycle4.d(0, 1) == 1.0
        assert cycle4.d(0, 3) == 1.0

    def test_disconnected(self):
        with pytest.raises(DisconnectedError) as err:
            load_graph(2, [])
        assert err.value.representative == 1

    def test_zero_weight_edge(self):
        with pytest.raises(ZeroOffDiagonalError):
            load_graph(2, [(0, 1, 0.0)])

    def test_parallel_edges_take_min(self):
        sp = load_graph(2, [(0, 1, 5.0), (0, 1, 2.0)])
        assert sp.d(0, 1) == 2.0

    def test_weighted(self):
        sp = load_graph(3, [(0, 1, 1.5), (1, 2, 2.5), (0, 2, 10.0)])
        assert sp.d(0, 2) == 4.0

    def test_unweighted_path_is_exact(self):
        sp = path_space(137)
        idx = np.arange(137)
        expect = np.abs(idx[:, None] - idx[None, :])
        assert np.array_equal(sp.matrix(), expect)

    def test_edge_out_of_range(self):
        with pytest.raises(InvalidInputError):
            load_graph(2, [(0, 5, 1.0)])


class TestLoadPoints:
    def test_euclidean_345(self):
        sp = load_points([(0, 0), (3, 4)], p=2)
        assert sp.d(0, 1) == pytest.approx(5.0)

    def test_l1(self):
        assert load_points([(0, 0), (3, 4)], p=1).d(0, 1) == 7.0

    def test_linf(self):
        assert load_points([(0, 0), (3, 4)], p=math.inf).d(0, 1) == 4.0
        assert load_points([(0, 0), (3, 4)], p="inf").d(0, 1) == 4.0

    def test_mixed_arity(self):
        with pytest.raises(MixedArityError):
            load_points([(0, 0), (1,)], p=2)

    def test_bad_norm(self):
        with pytest.raises(BadNormError):
            load_points([(0, 0), (1, 1)], p=0.5)

    def test_duplicate_points_rejected(self):
        with pytest.raises(ZeroOffDiagonalError):
            load_points([(1, 1), (1, 1)], p=2)

    @given(st.integers(2, 12), st.integers(0, 10_000),
           st.sampled_from([1.0, 1.5, 2.0, 3.0, math.inf]))
    @settings(max_examples=40, deadline=None)
    def test_lp_clouds_always_valid(self, n, seed, p):
        rng = np.random.default_rng(seed)
        coords = rng.normal(size=(n, 3)) * 10
        coords[1:] += np.arange(1, n)[:, None]  # avoid exact duplicates
        sp = load_points(coords.tolist(), p=p)
        assert sp.n == n


class TestPrimitives:
    def test_dist_to_set_member(self, p5):
        a = PointSubset((0, 2))
        assert dist_to_set(p5, 2, a) == 0.0

    def test_dist_to_set_path(self, p5):
        assert dist_to_set(p5, 3, PointSubset((0,))) == 3.0

    def test_dist_to_set_whole_space(self, p5):
        a = p5.all_points()
        assert all(dist_to_set(p5, x, a) == 0.0 for x in range(5))

    def test_dist_to_set_empty(self, p5):
        with pytest.raises(EmptySetError):
            dist_to_set(p5, 0, PointSubset(()))

    def test_set_ball_strict(self, p10):
        assert set_ball(p10, PointSubset((0,)), 3.0).ids == (0, 1, 2)

    def test_set_ball_small_radius(self, p10):
        a = PointSubset((3, 7))
        assert set_ball(p10, a, 1.0).ids == a.ids

    def test_set_ball_whole(self, p10):
        assert set_ball(p10, PointSubset((0,)), 100.0).ids == tuple(range(10))

    def test_closed_ball(self, p10):
        assert closed_set_ball(p10, PointSubset((0,)), 3.0).ids == (0, 1, 2, 3)

    def test_set_ball_monotone(self, p10):
        a = PointSubset((2, 9))
        prev = set()
        for r in [0.5, 1.0, 2.5, 4.0, 9.5]:
            cur = set(set_ball(p10, a, r).ids)
            assert prev <= cur
            assert set(a.ids) <= cur
            prev = cur

    def test_diameter(self, p10, cycle4):
        assert diameter(p10, PointSubset((4,))) == 0.0
        assert diameter(p10, PointSubset((2, 5, 7))) == 5.0
        assert diameter(cycle4, cycle4.all_points()) == 2.0

    def test_retraction_fixes_and_ties(self, p5):
        a = PointSubset((0, 4))
        p = nearest_point_retraction(p5, a)
        assert p(0) == 0 and p(4) == 4
        assert p(2) == 0  # tie at distance 2: smaller id wins
        assert p(3) == 4

    def test_retraction_exact_and_idempotent(self, p100):
        rng = np.random.default_rng(3)
        ids = sorted(rng.choice(100, size=17, replace=False).tolist())
        a = PointSubset(tuple(ids))
        p = nearest_point_retraction(p100, a)
        dist = dist_to_set_all(p100, a)
        for x in range(100):
            assert p100.d(x, p(x)) == dist[x]
            assert p(p(x)) == p(x)

    def test_retraction_empty(self, p5):
        with pytest.raises(EmptySetError):
            nearest_point_retraction(p5, PointSubset(()))


@pytest.fixture(scope="module")
def big_path():
    n = 4200
    return load_graph(n, [(i, i + 1, 1.0) for i in range(n - 1)])


class TestBigSpaceLane:
    """Graph spaces beyond the dense-table limit answer queries on demand."""

    def test_no_table(self, big_path):
        assert not big_path.has_table

    def test_rows_match_formula(self, big_path):
        for x in (0, 1234, 4199):
            row = big_path.row(x)
            assert np.array_equal(row, np.abs(np.arange(4200) - x))

    def test_neighbors_within(self, big_path):
        near = big_path.neighbors_within(2100, 5.0)
        assert near.tolist() == list(range(2096, 2105))

    def test_primitives(self, big_path):
        a = PointSubset((0, 4000))
        assert dist_to_set(big_path, 1000, a) == 1000.0
        assert set_ball(big_path, PointSubset((0,)), 2.0).ids == (0, 1)
        p = nearest_point_retraction(big_path, a)
        assert p(1999) == 0 and p(2001) == 4000 and p(2000) == 0
