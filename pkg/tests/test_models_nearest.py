"""Nearest-neighbor statistics: strict ranks, co-neighbor graphs, dimension
estimates, and the constant-explicit distance bound."""

import math

import numpy as np
import pytest

import steinlab as sl
from steinlab.errors import MomentOrderError, TieError
from steinlab.models import (
    NnModel,
    capped_scaled_distance,
    co_neighbor_rule,
    cone_cover_number,
    draw_tiefree,
    levina_bickel,
    neighbor_ranks,
    neighborhood_change,
    nn_bound,
    reverse_neighborhood,
)

from _oracles import (
    oracle_levina_bickel,
    oracle_neighbor_sets,
    oracle_ranks,
    oracle_union_size,
)


@pytest.fixture
def rng():
    return np.random.default_rng(173205)


class TestConeCoverNumber:
    def test_line_needs_two(self):
        assert cone_cover_number(1) == 2

    def test_plane_needs_six(self):
        assert cone_cover_number(2) == 6

    def test_higher_dimensions_unsupported(self):
        with pytest.raises(ValueError):
            cone_cover_number(3)


class TestRanks:
    def test_hand_example_on_line(self):
        ranks = neighbor_ranks(np.array([0.0, 1.0, 3.0]))
        assert ranks[0, 1] == 1
        assert ranks[0, 2] == 2
        assert ranks[2, 1] == 1
        assert ranks[2, 0] == 2

    def test_matches_oracle(self, rng):
        for dim in (1, 2):
            for _ in range(10):
                pts, _ = draw_tiefree(rng, 12, dim)
                assert np.array_equal(neighbor_ranks(pts), oracle_ranks(pts))

    def test_brute_and_tree_agree(self, rng):
        for _ in range(20):
            pts, _ = draw_tiefree(rng, 50, 2)
            assert np.array_equal(
                neighbor_ranks(pts, "brute"), neighbor_ranks(pts, "tree")
            )

    def test_duplicate_points_raise(self):
        with pytest.raises(TieError):
            neighbor_ranks(np.array([[0.1, 0.1], [0.1, 0.1], [0.5, 0.5]]))

    def test_equidistant_points_raise(self):
        # 1 is exactly one unit from both 0 and 2.
        with pytest.raises(TieError):
            neighbor_ranks(np.array([0.0, 1.0, 2.0]))

    def test_unknown_method_rejected(self, rng):
        pts, _ = draw_tiefree(rng, 5, 1)
        with pytest.raises(ValueError):
            neighbor_ranks(pts, "quantum")


class TestCoNeighborRule:
    def test_default_budget_is_k_plus_one(self):
        assert "budget=3" in co_neighbor_rule(2).name
        assert "budget=7" in co_neighbor_rule(2, budget=7).name

    def test_small_configurations_are_complete(self, rng):
        pts, _ = draw_tiefree(rng, 4, 1)
        g = co_neighbor_rule(3).build(pts)  # budget 4 >= n - 1
        assert all(g.has_edge(i, j) for i in range(4) for j in range(i + 1, 4))

    def test_edges_match_bruteforce_definition(self, rng):
        k, b = 2, 3
        rule = co_neighbor_rule(k)
        for _ in range(10):
            pts, _ = draw_tiefree(rng, 12, 2)
            g = rule.build(pts)
            ranks = oracle_ranks(pts)
            for i in range(12):
                for j in range(i + 1, 12):
                    expected = any(
                        ranks[l, i] <= b and ranks[l, j] <= b for l in range(12)
                    )
                    assert g.has_edge(i, j) == expected

    def test_rule_is_symmetric(self, rng):
        rep = sl.check_symmetry(
            co_neighbor_rule(1), lambda r: draw_tiefree(r, 9, 2)[0], 100, rng
        )
        assert rep.violations == 0


class TestNeighborhoods:
    def test_reverse_neighborhood_example(self):
        pts = np.array([0.0, 1.1, 2.0, 6.0])
        # who counts point 3 among their nearest two?  nobody but itself.
        assert list(reverse_neighborhood(pts, 3, 2)) == [3]
        out = reverse_neighborhood(pts, 1, 1)
        assert 0 in out and 2 in out

    def test_neighborhood_change_matches_oracle(self, rng):
        for _ in range(20):
            x, _ = draw_tiefree(rng, 10, 1)
            xp, _ = draw_tiefree(rng, 10, 1)
            j = int(rng.integers(0, 10))
            got = neighborhood_change(x, xp, j, 2)
            assert got == oracle_union_size(x, xp, j, 2)

    def test_corrected_union_cap_on_the_line(self, rng):
        # |N_j(x) u N_j(x^j)| <= 2 * alpha(1) * k + 1 over random moves.
        alpha = cone_cover_number(1)
        for k in (1, 2):
            cap = 2 * alpha * k + 1
            for _ in range(200):
                x, _ = draw_tiefree(rng, 12, 1)
                xp, _ = draw_tiefree(rng, 12, 1)
                j = int(rng.integers(0, 12))
                assert neighborhood_change(x, xp, j, k) <= cap

    def test_union_can_exceed_twice_alpha_k(self):
        # a hand construction where the union size hits 2 alpha k + 1:
        # moving the point at 0 to 10 rewires its whole neighborhood.
        x = np.array([0.0, -1.0, 1.1, 9.0, 11.2])
        xp = np.array([10.0, -1.0, 1.1, 9.0, 11.2])
        k, alpha = 1, cone_cover_number(1)
        size = neighborhood_change(x, xp, 0, k)
        assert size == 2 * alpha * k + 1 == 5
        assert size > 2 * alpha * k


class TestTieFreeSampling:
    def test_samples_are_tie_free(self, rng):
        for dim in (1, 2):
            pts, tries = draw_tiefree(rng, 20, dim)
            assert pts.shape == (20, dim)
            assert tries >= 0
            neighbor_ranks(pts)  # must not raise

    def test_impossible_request_raises(self, rng):
        class ZeroRng:
            def random(self, size=None):
                return np.zeros(size)

        with pytest.raises(TieError):
            draw_tiefree(ZeroRng(), 3, 1, max_tries=3)


class TestNnModel:
    def test_statistic_is_scaled_functional_sum(self, rng):
        model = NnModel(6, 1, 2, capped_scaled_distance(1, 6), name="demo")
        pts, _ = draw_tiefree(rng, 6, 1)
        total = 0.0
        for i in range(6):
            dists = sorted(abs(pts[j, 0] - pts[i, 0]) for j in range(6) if j != i)
            total += min(6.0 * (dists[0] + dists[1]) / 2.0, 1.0)
        assert model.statistic(pts) == pytest.approx(total / math.sqrt(6))

    def test_needs_enough_points(self):
        with pytest.raises(ValueError):
            NnModel(3, 1, 2, capped_scaled_distance(1, 3), name="demo")

    def test_coordinate_model_draws_points(self, rng):
        cm = NnModel(8, 2, 1, capped_scaled_distance(2, 8), name="demo").coordinate_model()
        pair = cm.sample_pair(rng)
        assert pair.x.shape == (8, 2)


class TestCappedScaledDistance:
    def test_scale_matches_density(self):
        fn = capped_scaled_distance(2, 100, cap=1.0)
        # mean distance 0.035 at density scale sqrt(100) = 10 -> 0.35.
        assert fn(np.array([0.02, 0.05])) == pytest.approx(0.35)

    def test_cap_applies(self):
        fn = capped_scaled_distance(1, 50, cap=2.0)
        assert fn(np.array([1.0])) == pytest.approx(2.0)


class TestLevinaBickel:
    def test_three_point_hand_value(self):
        # points 0, 1, 3: mean of 1/log(ratio of 2nd to 1st neighbor dist).
        got = levina_bickel(np.array([0.0, 1.0, 3.0]), 2)
        want = oracle_levina_bickel(np.array([0.0, 1.0, 3.0]), 2)
        assert got == pytest.approx(want, abs=1e-12)
        assert got == pytest.approx(1.6064, abs=1e-3)

    def test_matches_oracle_on_random_configs(self, rng):
        for _ in range(10):
            pts, _ = draw_tiefree(rng, 15, 2)
            assert levina_bickel(pts, 4) == pytest.approx(
                oracle_levina_bickel(pts, 4), abs=1e-10
            )

    def test_scale_and_rotation_invariance(self, rng):
        pts, _ = draw_tiefree(rng, 30, 2)
        theta = 0.7
        rot = np.array(
            [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
        )
        base = levina_bickel(pts, 5)
        assert levina_bickel(7.3 * pts, 5) == pytest.approx(base, abs=1e-12)
        assert levina_bickel(pts @ rot.T, 5) == pytest.approx(base, abs=1e-12)

    def test_rank_deficient_inputs_raise(self):
        with pytest.raises(MomentOrderError):
            levina_bickel(np.array([0.0, 1.0, 3.0]), 1)
        with pytest.raises(TieError):
            levina_bickel(np.array([0.0, 1.0, 2.0]), 2)

    def test_plane_sample_estimates_two(self, rng):
        pts = rng.random((2000, 2))
        est = levina_bickel(pts, 10)
        assert 1.6 <= est <= 2.4


class TestNnBound:
    def test_frozen_arithmetic(self):
        rep = nn_bound(alpha=6, k=2, gamma_p=1.0, p=8.0, sigma2=1.0, n=16)
        # alpha^3 k^4 = 216 * 16 = 3456 with no n-decay at p = 8;
        # alpha^3 k^3 = 1728 decays like n^{-1/8}.
        assert rep.variance_term == pytest.approx(3456.0)
        assert rep.third_moment_term == pytest.approx(1728.0 * 16 ** (-1 / 8))
        assert rep.modulo_c is True

    def test_moment_order_validated(self):
        with pytest.raises(MomentOrderError):
            nn_bound(alpha=2, k=1, gamma_p=1.0, p=6.0, sigma2=1.0, n=16)

    def test_shrinks_with_n_for_heavy_moments(self):
        small = nn_bound(2, 1, 1.0, 10.0, 1.0, 64)
        large = nn_bound(2, 1, 1.0, 10.0, 1.0, 4096)
        assert large.total < small.total
