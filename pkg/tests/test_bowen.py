from __future__ import annotations

import itertools

import numpy as np
import pytest

from mmdim.bowen import (
    BallSpec,
    SetFamily,
    bowen_distance,
    count_separated_spanning,
    five_r_disjointify,
    is_within,
    max_separated,
    min_spanning,
)
from mmdim.errors import ExactCapError
from mmdim.systems import ShiftSystem, metric


def full_shift(k=2, window=12, eps_min=0.1, **kw):
    return ShiftSystem(kind="full-shift", alphabet_size=k, window=window,
                       eps_min=eps_min, **kw)


class TestBowenDistance:
    def test_order_one_is_metric(self):
        sys = full_shift()
        x, y = sys.point([0, 1, 1]), sys.point([1, 1, 0])
        assert bowen_distance(sys, x, y, 1) == pytest.approx(metric(sys, x, y))

    def test_shifted_difference_dominates(self):
        sys = full_shift()
        x, y = sys.point([0, 0]), sys.point([0, 1])
        # d(x, y) = 0.5, d(sigma x, sigma y) = 1
        assert bowen_distance(sys, x, y, 2) == pytest.approx(1.0)

    def test_zero_on_diagonal(self):
        sys = full_shift()
        x = sys.point([1, 0, 1])
        for n in range(1, 5):
            assert bowen_distance(sys, x, x, n) == 0.0

    def test_monotone_in_order(self):
        sys = full_shift(window=12, eps_min=0.2)
        pts = sys.enumerate_points(4)
        for x, y in itertools.combinations(pts[:8], 2):
            prev = 0.0
            for n in range(1, 4):
                d = bowen_distance(sys, x, y, n)
                assert d >= prev - 1e-12
                prev = d


class TestSeparated:
    def test_single_point(self):
        sys = full_shift()
        pts = [sys.point([0, 1])]
        got, exact = max_separated(sys, pts, 2, 0.5, mode="exact")
        assert len(got) == 1 and exact

    def test_depth2_n2_all_separated(self):
        sys = full_shift()
        pts = sys.enumerate_points(2)
        # any two distinct words differ at coordinate 0 or 1, so d_2 >= 1
        got, _ = max_separated(sys, pts, 2, 0.6, mode="exact")
        assert len(got) == 4

    def test_depth2_n1_two_remain(self):
        sys = full_shift()
        pts = sys.enumerate_points(2)
        # words differing only at coordinate 1 have d_1 = 0.5 < 0.6
        got, _ = max_separated(sys, pts, 1, 0.6, mode="exact")
        assert len(got) == 2

    def test_greedy_is_maximal_hence_spanning(self):
        sys = full_shift(window=12, eps_min=0.2)
        pts = sys.enumerate_points(4)
        for n, eps in [(1, 0.6), (2, 0.6), (2, 0.3), (3, 0.9)]:
            kept, _ = max_separated(sys, pts, n, eps, mode="greedy")
            for z in pts:
                assert any(is_within(sys, c, z, n, eps) or c.symbols == z.symbols
                           for c in kept)

    def test_exact_cap(self):
        sys = full_shift(window=12, eps_min=0.2)
        pts = sys.enumerate_points(4)  # 16 points
        with pytest.raises(ExactCapError):
            max_separated(sys, pts, 2, 0.5, mode="exact", exact_cap=8)

    def test_greedy_no_worse_than_checkable(self):
        sys = full_shift(window=12, eps_min=0.2)
        pts = sys.enumerate_points(3)
        greedy, _ = max_separated(sys, pts, 2, 0.6, mode="greedy")
        exact, _ = max_separated(sys, pts, 2, 0.6, mode="exact")
        assert len(greedy) <= len(exact)


class TestSpanning:
    def test_single_point(self):
        sys = full_shift()
        got, exact = min_spanning(sys, [sys.point([1, 1])], 1, 0.5, mode="exact")
        assert len(got) == 1 and exact

    def test_depth2_large_radius_two_centers(self):
        sys = full_shift()
        pts = sys.enumerate_points(2)
        got, _ = min_spanning(sys, pts, 2, 1.2, mode="exact")
        assert len(got) == 2

    def test_radius_beyond_diameter(self):
        sys = full_shift()
        pts = sys.enumerate_points(2)
        diam = max(bowen_distance(sys, x, y, 1)
                   for x, y in itertools.combinations(pts, 2))
        got, _ = min_spanning(sys, pts, 1, diam + 1.0, mode="exact")
        assert len(got) == 1

    def test_every_point_covered(self):
        sys = full_shift(window=12, eps_min=0.2)
        pts = sys.enumerate_points(4)
        for mode in ("greedy",):
            centers, _ = min_spanning(sys, pts, 2, 0.7, mode=mode)
            for z in pts:
                assert any(is_within(sys, c, z, 2, 0.7) for c in centers)


class TestComparisons:
    def test_span_sep_sandwich_exhaustive(self):
        # r_n(eps) <= s_n(eps) <= r_n(eps/2) for k=2, depth <= 4, n <= 3
        sys = full_shift(window=14, eps_min=0.05)
        cases = 0
        for depth in (2, 3, 4):
            pts = sys.enumerate_points(depth)
            for n in (1, 2, 3):
                for eps in (1.2, 0.9, 0.6, 0.3):
                    s = len(max_separated(sys, pts, n, eps, mode="exact")[0])
                    r = len(min_spanning(sys, pts, n, eps, mode="exact")[0])
                    r_half = len(min_spanning(sys, pts, n, eps / 2,
                                              mode="exact")[0])
                    assert r <= s <= r_half
                    cases += 1
        assert cases == 36

    def test_separated_monotone_in_eps(self):
        sys = full_shift(window=12, eps_min=0.1)
        pts = sys.enumerate_points(3)
        for n in (1, 2):
            sizes = [len(max_separated(sys, pts, n, e, mode="exact")[0])
                     for e in (1.2, 0.9, 0.6, 0.3)]
            assert sizes == sorted(sizes)

    def test_separated_monotone_in_order(self):
        sys = full_shift(window=12, eps_min=0.1)
        pts = sys.enumerate_points(4)
        sizes = [len(max_separated(sys, pts, n, 0.6, mode="greedy")[0])
                 for n in (1, 2, 3)]
        assert sizes == sorted(sizes)


class TestFiveR:
    def _family(self, sys, centers, radii, n):
        balls = tuple(BallSpec(center=c, order=n, radius=r, closed=True)
                      for c, r in zip(centers, radii))
        return SetFamily(balls=balls)

    def test_single_ball(self):
        sys = full_shift()
        fam = self._family(sys, [sys.point([0, 1])], [0.5], 1)
        out = five_r_disjointify(sys, fam, sys.enumerate_points(2))
        assert len(out.balls) == 1

    def test_duplicate_balls_merge(self):
        sys = full_shift()
        c = sys.point([0, 1])
        fam = self._family(sys, [c, c], [0.5, 0.5], 1)
        universe = sys.enumerate_points(2)
        out = five_r_disjointify(sys, fam, universe)
        assert len(out.balls) == 1
        kept = out.balls[0]
        for u in universe:
            inside_original = any(
                is_within(sys, b.center, u, b.order, b.radius, closed=True)
                for b in fam.balls)
            if inside_original:
                assert is_within(sys, kept.center, u, kept.order,
                                 5 * kept.radius, closed=True)

    def test_postconditions_random_families(self):
        sys = full_shift(window=14, eps_min=0.05)
        universe = sys.enumerate_points(4)
        rng = np.random.default_rng(20240817)
        for _ in range(40):
            n = int(rng.integers(1, 4))
            m = int(rng.integers(2, 7))
            idx = rng.choice(len(universe), size=m, replace=False)
            radii = rng.choice([0.15, 0.3, 0.6, 0.9], size=m)
            fam = self._family(sys, [universe[i] for i in idx], radii, n)
            out = five_r_disjointify(sys, fam, universe)
            # pairwise disjoint over the universe
            member_sets = []
            for b in out.balls:
                members = {u.symbols for u in universe
                           if is_within(sys, b.center, u, n, b.radius,
                                        closed=True)}
                member_sets.append(members)
            for a, b in itertools.combinations(member_sets, 2):
                assert not (a & b)
            # 5r inflations cover the original union
            for u in universe:
                if any(is_within(sys, b.center, u, n, b.radius, closed=True)
                       for b in fam.balls):
                    assert any(is_within(sys, b.center, u, n, 5 * b.radius,
                                         closed=True) for b in out.balls)


class TestCounts:
    def test_small_instance_has_exact(self):
        sys = full_shift()
        counts = count_separated_spanning(sys, sys.enumerate_points(2), 2, 0.6)
        assert counts.s_exact == 4
        assert counts.r_exact is not None

    def test_above_cap_flags_greedy_only(self):
        sys = full_shift(window=14, eps_min=0.05)
        pts = sys.enumerate_points(4)
        counts = count_separated_spanning(sys, pts, 2, 0.6, exact_cap=8)
        assert counts.s_exact is None and counts.r_exact is None
        assert counts.s_lower > 0 and counts.r_upper > 0

    def test_empty(self):
        sys = full_shift()
        counts = count_separated_spanning(sys, [], 2, 0.6)
        assert (counts.s_lower, counts.r_upper) == (0, 0)
