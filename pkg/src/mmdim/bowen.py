"""Bowen metrics, ball membership, separated/spanning sets, 5r selection.

Radius comparisons follow one conservative rule everywhere: a point counts
as inside an open ball only when the truncated distance plus the window
tail bound stays below the radius (``<=`` for closed balls).  Separation
is the negation of open-ball membership, so the standard comparison
``r_n <= s_n <= r_n(eps/2)`` holds structurally on exact instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, ExactCapError
from .systems import DISCRETE, PointWindow, ShiftSystem

DEFAULT_EXACT_CAP = 24


@dataclass(frozen=True)
class BallSpec:
    """A Bowen ball: center point, order n, radius, open or closed."""

    center: PointWindow
    order: int
    radius: float
    closed: bool = False

    def __post_init__(self):
        if self.order < 1:
            raise ConfigurationError("ball order must be >= 1")
        if self.radius <= 0:
            raise ConfigurationError("ball radius must be positive")


@dataclass(frozen=True)
class SetFamily:
    """A finite family of Bowen balls with optional positive weights."""

    balls: tuple[BallSpec, ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.weights is not None:
            if len(self.weights) != len(self.balls):
                raise ConfigurationError("weights must match balls")
            if any(w <= 0 for w in self.weights):
                raise ConfigurationError("weights must be strictly positive")


# -- distances ---------------------------------------------------------------


def _shift_kernels(system: ShiftSystem, n: int) -> list[np.ndarray]:
    """Weight kernel of the truncated metric at each shift j < n.

    Kernel ``j`` lives on the original window positions; entries are
    ``weight^{|t - origin - j|}`` for positions the shifted window retains
    and 0 where the shift has run off the stored word.
    """
    L = system.word_length
    origin = system.origin_index
    w = system.weight_base
    kernels = []
    for j in range(n):
        t = np.arange(L)
        off = t - origin - j
        kern = w ** np.abs(off).astype(float)
        if system.sidedness == "one-sided":
            kern[off < 0] = 0.0
        else:
            kern[off < -system.window] = 0.0
        kernels.append(kern)
    return kernels


def bowen_distance(system: ShiftSystem, x: PointWindow, y: PointWindow,
                   n: int) -> float:
    """max over j < n of the truncated metric between the shifted points."""
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    xs = np.asarray(x.symbols)
    ys = np.asarray(y.symbols)
    if system.symbol_metric == DISCRETE:
        sd = (xs != ys).astype(float)
    else:
        sd = np.abs(xs - ys) / system.alphabet_size
    return max(float(np.dot(kern, sd)) for kern in _shift_kernels(system, n))


def distances_to(system: ShiftSystem, center: PointWindow, Z: np.ndarray,
                 n: int) -> np.ndarray:
    """Vector of Bowen-n distances from one center to every row of Z."""
    c = np.asarray(center.symbols)
    if system.symbol_metric == DISCRETE:
        sd = (Z != c[None, :]).astype(float)
    else:
        sd = np.abs(Z - c[None, :]) / system.alphabet_size
    best = None
    for kern in _shift_kernels(system, n):
        d = sd @ kern
        best = d if best is None else np.maximum(best, d)
    return best


def pairwise_bowen(system: ShiftSystem, Z: np.ndarray, n: int) -> np.ndarray:
    m = Z.shape[0]
    out = np.zeros((m, m))
    pts = [PointWindow(symbols=tuple(int(a) for a in row),
                       origin=system.origin_index) for row in Z]
    for i in range(m):
        out[i] = distances_to(system, pts[i], Z, n)
    return out


def is_within(system: ShiftSystem, x: PointWindow, y: PointWindow, n: int,
              eps: float, closed: bool = False) -> bool:
    d = bowen_distance(system, x, y, n)
    slack = system.truncation_slack(n)
    return d + slack <= eps if closed else d + slack < eps


# -- separated sets ----------------------------------------------------------


def _sorted_indices(Z: np.ndarray) -> list[int]:
    return sorted(range(Z.shape[0]), key=lambda i: tuple(Z[i]))


def max_separated(system: ShiftSystem, points: Sequence[PointWindow], n: int,
                  eps: float, mode: str = "greedy",
                  exact_cap: int = DEFAULT_EXACT_CAP,
                  ) -> tuple[list[PointWindow], bool]:
    """An (n, eps)-separated subset of the given points.

    Greedy scans points in lexicographic symbol order and keeps every point
    separated from all kept ones; the result is maximal, hence also an
    (n, eps)-spanning set.  Exact mode finds a maximum-cardinality set via
    branch and bound on the separation graph and requires at most
    ``exact_cap`` points.  Returns (set, is_exact).
    """
    pts = list(points)
    if not pts:
        return [], True
    system.check_order(n, eps)
    Z = system.as_matrix(pts)
    if mode == "exact":
        if len(pts) > exact_cap:
            raise ExactCapError(
                f"{len(pts)} points exceed the exact cap {exact_cap}"
            )
        D = pairwise_bowen(system, Z, n)
        slack = system.truncation_slack(n)
        sep = ~(D + slack < eps)
        np.fill_diagonal(sep, False)
        best = _max_clique(sep)
        return [pts[i] for i in sorted(best)], True
    if mode != "greedy":
        raise ConfigurationError(f"unknown mode {mode!r}")
    kept: list[int] = []
    kept_rows: list[np.ndarray] = []
    slack = system.truncation_slack(n)
    for i in _sorted_indices(Z):
        p = pts[i]
        ok = True
        for row in kept_rows:
            # row holds distances from a kept point to every candidate
            if row[i] + slack < eps:
                ok = False
                break
        if ok:
            kept.append(i)
            kept_rows.append(distances_to(system, p, Z, n))
    return [pts[i] for i in kept], False


def _max_clique(adj: np.ndarray) -> list[int]:
    """Maximum clique via branch and bound with a greedy coloring bound."""
    m = adj.shape[0]
    order = sorted(range(m), key=lambda i: -int(adj[i].sum()))
    best: list[int] = []

    def color_bound(cands: list[int]) -> int:
        colors: list[set[int]] = []
        for v in cands:
            for cls in colors:
                if all(not adj[v, u] for u in cls):
                    cls.add(v)
                    break
            else:
                colors.append({v})
        return len(colors)

    def expand(current: list[int], cands: list[int]):
        nonlocal best
        if not cands:
            if len(current) > len(best):
                best = list(current)
            return
        if len(current) + color_bound(cands) <= len(best):
            return
        for idx, v in enumerate(cands):
            if len(current) + len(cands) - idx <= len(best):
                return
            rest = [u for u in cands[idx + 1:] if adj[v, u]]
            expand(current + [v], rest)

    expand([], order)
    return best


# -- spanning sets -----------------------------------------------------------


def min_spanning(system: ShiftSystem, points: Sequence[PointWindow], n: int,
                 eps: float, mode: str = "greedy",
                 exact_cap: int = DEFAULT_EXACT_CAP,
                 ) -> tuple[list[PointWindow], bool]:
    """An (n, eps)-spanning set of the points, centers drawn from them.

    Exact mode solves the minimum set cover over the Bowen balls centered
    at the points; greedy mode is the standard best-coverage heuristic
    (within a ln factor).  Returns (centers, is_exact).
    """
    pts = list(points)
    if not pts:
        return [], True
    system.check_order(n, eps)
    Z = system.as_matrix(pts)
    m = len(pts)
    slack = system.truncation_slack(n)
    cover_sets = []
    for i in range(m):
        d = distances_to(system, pts[i], Z, n)
        cover_sets.append(d + slack < eps)
    if mode == "exact":
        if m > exact_cap:
            raise ExactCapError(f"{m} points exceed the exact cap {exact_cap}")
        chosen = _min_cover_exact(cover_sets, np.ones(m))
        return [pts[i] for i in sorted(chosen)], True
    if mode != "greedy":
        raise ConfigurationError(f"unknown mode {mode!r}")
    chosen = _min_cover_greedy(cover_sets, _sorted_indices(Z))
    return [pts[i] for i in chosen], False


def _min_cover_greedy(cover_sets: list[np.ndarray],
                      tie_order: list[int]) -> list[int]:
    m = len(cover_sets[0])
    uncovered = np.ones(m, dtype=bool)
    rank = {idx: pos for pos, idx in enumerate(tie_order)}
    chosen: list[int] = []
    while uncovered.any():
        best_i, best_gain = None, -1
        for i in tie_order:
            gain = int((cover_sets[i] & uncovered).sum())
            if gain > best_gain:
                best_i, best_gain = i, gain
        if best_gain <= 0:
            # every point covers itself, so this cannot happen
            raise ConfigurationError("greedy cover stalled")
        chosen.append(best_i)
        uncovered &= ~cover_sets[best_i]
    return sorted(chosen, key=lambda i: rank[i])


def _min_cover_exact(cover_sets: list[np.ndarray], weights: np.ndarray,
                     ) -> list[int]:
    """Branch-and-bound minimum-weight set cover."""
    m = len(cover_sets[0])
    n_sets = len(cover_sets)
    full = (1 << m) - 1
    masks = []
    for s in cover_sets:
        mask = 0
        for j in np.flatnonzero(s):
            mask |= 1 << int(j)
        masks.append(mask)
    containing: list[list[int]] = [[] for _ in range(m)]
    for i, mask in enumerate(masks):
        for j in range(m):
            if mask >> j & 1:
                containing[j].append(i)
    max_size = max(int(s.sum()) for s in cover_sets)
    min_w = float(weights.min())
    best_cost = float("inf")
    best_sol: list[int] = []

    def recurse(covered: int, cost: float, chosen: list[int]):
        nonlocal best_cost, best_sol
        if covered == full:
            if cost < best_cost - 1e-15:
                best_cost = cost
                best_sol = list(chosen)
            return
        remaining = m - bin(covered).count("1")
        if cost + min_w * np.ceil(remaining / max_size) >= best_cost - 1e-15:
            return
        # branch on the uncovered element with fewest candidate sets
        pick_opts = None
        for j in range(m):
            if covered >> j & 1:
                continue
            opts = containing[j]
            if pick_opts is None or len(opts) < len(pick_opts):
                pick_opts = opts
        for i in sorted(pick_opts, key=lambda i: weights[i]):
            recurse(covered | masks[i], cost + float(weights[i]), chosen + [i])

    recurse(0, 0.0, [])
    return best_sol


# -- 5r covering selection ----------------------------------------------------


def five_r_disjointify(system: ShiftSystem, family: SetFamily,
                       universe: Sequence[PointWindow]) -> SetFamily:
    """Greedy disjoint subfamily whose 5r inflations cover the family union.

    Balls must be closed and share a common order.  Processing by
    descending radius, a ball is kept iff it shares no universe point with
    any kept ball; every point of the original union then lies within 5
    radii of some kept center.
    """
    balls = family.balls
    if not balls:
        return SetFamily(balls=())
    if any(not b.closed for b in balls):
        raise ConfigurationError("5r selection expects closed balls")
    orders = {b.order for b in balls}
    if len(orders) > 1:
        raise ConfigurationError("5r selection expects a common order")
    n = balls[0].order
    U = system.as_matrix(list(universe))
    slack = system.truncation_slack(n)
    members = []
    for b in balls:
        d = distances_to(system, b.center, U, n)
        members.append(d + slack <= b.radius)
    idx = sorted(
        range(len(balls)),
        key=lambda i: (-balls[i].radius, balls[i].center.symbols),
    )
    kept: list[int] = []
    for i in idx:
        if all(not (members[i] & members[j]).any() for j in kept):
            kept.append(i)
    kept_balls = tuple(balls[i] for i in kept)
    kept_weights = (None if family.weights is None
                    else tuple(family.weights[i] for i in kept))
    return SetFamily(balls=kept_balls, weights=kept_weights)


# -- batched counts ------------------------------------------------------------


@dataclass(frozen=True)
class SeparationCounts:
    s_lower: int
    s_exact: int | None
    r_upper: int
    r_exact: int | None

    @property
    def s_best(self) -> int:
        return self.s_exact if self.s_exact is not None else self.s_lower

    @property
    def r_best(self) -> int:
        return self.r_exact if self.r_exact is not None else self.r_upper


def covering_number_profile(system_factory, eps_schedule: Sequence[float],
                            theta: float, depth: int = 4,
                            pool_cap: int = 1024) -> dict[float, float]:
    """eps^theta * log r_1(eps) over the schedule (tame-growth profile).

    r_1 is the greedy one-step spanning count of enumerated words of the
    per-scale model (depth shrunk so the pool stays below the cap); on
    metrics with tame growth of covering numbers the profile decays to 0
    for every positive theta.
    """
    out = {}
    for eps in sorted(set(eps_schedule), reverse=True):
        system = system_factory(eps)
        d = depth
        while d > 1 and system.alphabet_size ** d > pool_cap:
            d -= 1
        pts = system.enumerate_points(d)
        r1 = len(min_spanning(system, pts, 1, eps, mode="greedy")[0])
        out[eps] = (eps ** theta) * math.log(max(r1, 1))
    return out


def count_separated_spanning(system: ShiftSystem,
                             points: Sequence[PointWindow], n: int,
                             eps: float,
                             exact_cap: int = DEFAULT_EXACT_CAP,
                             ) -> SeparationCounts:
    """Greedy bounds plus exact values when the instance is small enough."""
    pts = list(points)
    if not pts:
        return SeparationCounts(0, 0, 0, 0)
    greedy_sep, _ = max_separated(system, pts, n, eps, mode="greedy")
    greedy_span, _ = min_spanning(system, pts, n, eps, mode="greedy")
    s_exact = r_exact = None
    if len(pts) <= exact_cap:
        s_exact = len(max_separated(system, pts, n, eps, mode="exact",
                                    exact_cap=exact_cap)[0])
        r_exact = len(min_spanning(system, pts, n, eps, mode="exact",
                                   exact_cap=exact_cap)[0])
    return SeparationCounts(
        s_lower=len(greedy_sep), s_exact=s_exact,
        r_upper=len(greedy_span), r_exact=r_exact,
    )
