from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmdim.bowen import bowen_distance, is_within
from mmdim.measures import wilson_interval
from mmdim.pressure import pressure_sum
from mmdim.systems import Potential, ShiftSystem, birkhoff_sum, combine, metric

SYS = ShiftSystem(kind="full-shift", alphabet_size=2, window=12, eps_min=0.2)
GRID = ShiftSystem(kind="grid-shift", alphabet_size=3, window=12, eps_min=0.2)

words = st.lists(st.integers(0, 1), min_size=1, max_size=10)
grid_words = st.lists(st.integers(0, 2), min_size=1, max_size=10)


@settings(max_examples=80, deadline=None)
@given(words, words, words)
def test_metric_triangle_inequality(a, b, c):
    x, y, z = SYS.point(a), SYS.point(b), SYS.point(c)
    assert metric(SYS, x, z) <= metric(SYS, x, y) + metric(SYS, y, z) + 1e-12


@settings(max_examples=80, deadline=None)
@given(grid_words, grid_words, st.integers(1, 4))
def test_bowen_metric_axioms(a, b, n):
    x, y = GRID.point(a), GRID.point(b)
    d = bowen_distance(GRID, x, y, n)
    assert d >= 0
    assert d == pytest.approx(bowen_distance(GRID, y, x, n))
    if tuple(x.symbols) == tuple(y.symbols):
        assert d == 0.0
    if n > 1:
        assert d >= bowen_distance(GRID, x, y, n - 1) - 1e-12


@settings(max_examples=60, deadline=None)
@given(grid_words, st.integers(1, 3), st.integers(1, 3))
def test_birkhoff_cocycle(word, n, m):
    from mmdim.systems import apply_map
    phi = Potential.from_table([0.2, 0.7, 0.4])
    x = GRID.point(word)
    sx = x
    for _ in range(n):
        sx = apply_map(GRID, sx)
    lhs = birkhoff_sum(GRID, phi, x, n + m)
    rhs = birkhoff_sum(GRID, phi, x, n) + birkhoff_sum(GRID, phi, sx, m)
    assert lhs == pytest.approx(rhs)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(0.1, 2.0),
       st.floats(0.15, 0.9), st.integers(1, 4))
def test_pressure_family_inequalities(b1, b2, eps, n):
    # Lipschitz and strict-decrease per-term mechanisms on a fixed witness
    pts = SYS.enumerate_points(4)[:6]
    phi = Potential.from_table([0.1, 0.6])
    psi = Potential.from_table([1.0, 1.5])
    L = math.log(1.0 / eps)

    def log_sum(beta):
        return pressure_sum(SYS, pts, combine(phi, psi, -beta, SYS), n, eps)

    assert abs(log_sum(b1) - log_sum(b2)) \
        <= abs(b1 - b2) * psi.norm * n * L + 1e-9
    lo, hi = min(b1, b2), max(b1, b2)
    assert log_sum(hi) <= log_sum(lo) - (hi - lo) * psi.min * n * L + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 500), st.integers(1, 500))
def test_wilson_interval_contains_point_estimate(hits, extra):
    samples = hits + extra
    lo, hi = wilson_interval(hits, samples)
    assert 0.0 <= lo <= hits / samples <= hi <= 1.0


@settings(max_examples=40, deadline=None)
@given(grid_words, grid_words, st.integers(1, 3),
       st.floats(0.1, 1.5))
def test_membership_consistent_with_distance(a, b, n, eps):
    x, y = GRID.point(a), GRID.point(b)
    inside = is_within(GRID, x, y, n, eps)
    d = bowen_distance(GRID, x, y, n)
    if inside:
        assert d < eps
    else:
        assert d + GRID.truncation_slack(n) >= eps
