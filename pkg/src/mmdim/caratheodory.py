"""Caratheodory-Pesin constructions on finite point sets.

Six structures share one candidate family, Bowen balls B_n(z, eps) with
centers in the target set (plus configured extras) and orders N..n_max:

* cover-M        min-weight cover, weights exp(-n lam + log(1/eps) sup S_n phi)
* cover-fixed    the same restricted to order exactly N
* packing-P      max-weight pairwise-disjoint closed family, centers in Z
* BS-R           min-weight cover, weights exp(-lam sup S_n phi), phi > 0
* packing-BS     packing with BS weights
* weighted-W     fractional cover LP with BS weights

Ball suprema of Birkhoff sums are evaluated on the base potential and
mapped through the affine transform of the potential, so the one-parameter
families used by the critical-exponent machinery share their maximizing
points; this is exactly what makes the BS/cover and packing-BS/packing
substitution identities hold to machine precision.  Critical exponents are
extracted as the threshold-1 crossing of the (nonincreasing) value map,
the standard finite-scale surrogate for the jump from infinity to zero.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

from .bowen import _min_cover_exact, distances_to
from .errors import BracketError, ConfigurationError
from .pressure import DimensionEstimate, _slope
from .systems import PointWindow, Potential, ShiftSystem

COVER_M = "cover-M"
COVER_FIXED = "cover-fixed-m"
PACKING_P = "packing-P"
BS_R = "BS-R"
PACKING_BS = "packing-BS"
WEIGHTED_W = "weighted-W"

STRUCTURES = (COVER_M, COVER_FIXED, PACKING_P, BS_R, PACKING_BS, WEIGHTED_W)

DEFAULT_PARTITION_EXACT = 8


@dataclass(frozen=True)
class OuterMeasureProblem:
    """A structure valuation instance on a finite point set."""

    system: ShiftSystem
    points: tuple[PointWindow, ...]
    phi: Potential
    eps: float
    N: int = 1
    n_max: int = 3
    structure: str = COVER_M
    extras: tuple[PointWindow, ...] = ()
    exact_cap: int = 24
    complete: bool = True

    def __post_init__(self):
        if not self.points:
            raise ConfigurationError("Z must be nonempty")
        if self.N > self.n_max:
            raise ConfigurationError("need N <= n_max")
        if self.N < 1:
            raise ConfigurationError("orders start at 1")
        if self.structure not in STRUCTURES:
            raise ConfigurationError(f"unknown structure {self.structure!r}")
        if self.structure in (BS_R, PACKING_BS, WEIGHTED_W):
            if self.phi.min <= 0:
                raise ConfigurationError("BS structures need phi > 0")

    def with_structure(self, structure: str) -> "OuterMeasureProblem":
        return replace(self, structure=structure)

    def with_potential(self, phi: Potential) -> "OuterMeasureProblem":
        return replace(self, phi=phi)


@dataclass(frozen=True)
class StructureValue:
    value: float
    exact: bool
    chosen: tuple[tuple[int, int], ...] = ()  # (center index, order)
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class CriticalValue:
    lambda_star: float
    bracket: tuple[float, float]
    threshold: float = 1.0
    value_lo: float = math.inf
    value_hi: float = 0.0


# -- candidate family ---------------------------------------------------------


@dataclass(frozen=True)
class _Candidates:
    centers: tuple[int, ...]          # index into universe
    orders: tuple[int, ...]
    open_members: np.ndarray          # (n_cand, |Z|) bool
    closed_members_Z: np.ndarray      # (n_cand, |Z|) bool
    closed_members_U: np.ndarray      # (n_cand, |U|) bool
    sup_open: np.ndarray              # base-potential ball suprema
    sup_closed: np.ndarray
    center_in_Z: np.ndarray           # bool
    n_Z: int


@functools.lru_cache(maxsize=256)
def _build_candidates(problem: OuterMeasureProblem) -> _Candidates:
    system = problem.system
    Z = list(problem.points)
    universe = Z + [p for p in problem.extras if p not in Z]
    U = system.as_matrix(universe)
    n_Z = len(Z)
    base = problem.phi
    # per-universe-point base Birkhoff sums at each order
    from .systems import birkhoff_sums_matrix
    plain = Potential(kind=base.kind, value=base.value, table=base.table,
                      range_len=base.range_len)
    sums = {}
    for n in range(problem.N, problem.n_max + 1):
        sums[n] = birkhoff_sums_matrix(system, plain, U, n,
                                       origin=system.origin_index)
    centers, orders = [], []
    open_members, closed_Z, closed_U = [], [], []
    sup_open, sup_closed = [], []
    center_in_Z = []
    for ci, c in enumerate(universe):
        for n in range(problem.N, problem.n_max + 1):
            d = distances_to(system, c, U, n)
            slack = system.truncation_slack(n)
            open_u = d + slack < problem.eps
            closed_u = d + slack <= problem.eps
            open_u[ci] = True  # a ball always contains its center
            closed_u[ci] = True
            centers.append(ci)
            orders.append(n)
            open_members.append(open_u[:n_Z])
            closed_Z.append(closed_u[:n_Z])
            closed_U.append(closed_u)
            # conservative sup correction for sampled (incomplete) pools;
            # assumes the potential scale applied later is nonnegative
            gamma_n = 0.0
            if not problem.complete:
                gamma_n = n * plain.modulus(system, problem.eps)
            sup_open.append(float(sums[n][open_u].max()) + gamma_n)
            sup_closed.append(float(sums[n][closed_u].max()) + gamma_n)
            center_in_Z.append(ci < n_Z)
    return _Candidates(
        centers=tuple(centers), orders=tuple(orders),
        open_members=np.array(open_members),
        closed_members_Z=np.array(closed_Z),
        closed_members_U=np.array(closed_U),
        sup_open=np.array(sup_open), sup_closed=np.array(sup_closed),
        center_in_Z=np.array(center_in_Z), n_Z=n_Z,
    )


def _log_weights(problem: OuterMeasureProblem, lam: float,
                 closed: bool) -> np.ndarray:
    cands = _build_candidates(problem)
    sup_base = cands.sup_closed if closed else cands.sup_open
    n = np.asarray(cands.orders, dtype=float)
    phi = problem.phi
    formal_sup = phi.scale * sup_base + n * phi.offset
    L = math.log(1.0 / problem.eps)
    if problem.structure in (COVER_M, COVER_FIXED, PACKING_P):
        out = -n * lam + L * formal_sup
    else:
        out = -lam * formal_sup
    # extreme lambdas show up transiently during bracket growth; clipping
    # keeps exp() finite without disturbing the threshold crossing
    return np.clip(out, -700.0, 700.0)


# -- covers ---------------------------------------------------------------------


def _cover_optimize(problem: OuterMeasureProblem, log_w: np.ndarray,
                    order_filter: Callable[[int], bool] | None = None,
                    ) -> StructureValue:
    cands = _build_candidates(problem)
    idx = [i for i in range(len(cands.orders))
           if order_filter is None or order_filter(cands.orders[i])]
    if not idx:
        raise ConfigurationError("no candidate balls after order filter")
    member_matrix = cands.open_members[idx]
    weights = np.exp(log_w[idx])
    m = cands.n_Z
    if not member_matrix.any(axis=0).all():
        raise ConfigurationError("candidates cannot cover Z")
    if m <= problem.exact_cap and len(idx) <= 4 * problem.exact_cap:
        chosen_local = _min_cover_exact(list(member_matrix), weights)
        exact = True
    else:
        chosen_local = _greedy_weighted_cover(member_matrix, weights)
        exact = False
    chosen = tuple((cands.centers[idx[i]], cands.orders[idx[i]])
                   for i in chosen_local)
    value = float(weights[chosen_local].sum())
    flags = () if exact else ("greedy-upper-bound",)
    return StructureValue(value=value, exact=exact, chosen=chosen, flags=flags)


def _greedy_weighted_cover(member_matrix: np.ndarray,
                           weights: np.ndarray) -> list[int]:
    """Cost-effectiveness greedy cover with lazy score re-evaluation.

    Coverage gains only shrink as points get covered, so weight/gain
    scores only grow and a stale heap top can be re-checked in isolation.
    """
    import heapq

    M = member_matrix
    uncovered = np.ones(M.shape[1], dtype=bool)
    remaining = int(M.shape[1])
    gains = M @ uncovered
    heap = [(w / g if g > 0 else math.inf, i)
            for i, (w, g) in enumerate(zip(weights, gains))]
    heapq.heapify(heap)
    chosen: list[int] = []
    while remaining > 0:
        score, i = -1.0, -1
        while heap:
            score, i = heapq.heappop(heap)
            gain = int((M[i] & uncovered).sum())
            fresh = weights[i] / gain if gain > 0 else math.inf
            if not heap or fresh <= heap[0][0] + 1e-18:
                score = fresh
                break
            heapq.heappush(heap, (fresh, i))
        if i < 0 or not np.isfinite(score):
            raise ConfigurationError("greedy cover stalled")
        chosen.append(i)
        newly = M[i] & uncovered
        uncovered &= ~M[i]
        remaining -= int(newly.sum())
    return chosen


def cover_value(problem: OuterMeasureProblem, lam: float) -> StructureValue:
    """Minimum-weight cover of Z over orders N..n_max (structure cover-M)."""
    log_w = _log_weights(problem, lam, closed=False)
    return _cover_optimize(problem, log_w)


def fixed_length_value(problem: OuterMeasureProblem, lam: float,
                       ) -> StructureValue:
    """Cover restricted to order exactly N (the u-upper construction)."""
    log_w = _log_weights(problem, lam, closed=False)
    return _cover_optimize(problem, log_w,
                           order_filter=lambda n: n == problem.N)


def bs_value(problem: OuterMeasureProblem, lam: float) -> StructureValue:
    """Minimum-weight cover with BS weights exp(-lam sup S_n phi)."""
    if problem.phi.min <= 0:
        raise ConfigurationError("BS structures need phi > 0")
    log_w = _log_weights(problem.with_structure(BS_R), lam, closed=False)
    return _cover_optimize(problem, log_w)


def weighted_value(problem: OuterMeasureProblem, lam: float) -> StructureValue:
    """Fractional cover LP: min sum c_i w_i with coverage >= 1 on Z, c >= 0."""
    if problem.phi.min <= 0:
        raise ConfigurationError("weighted structure needs phi > 0")
    cands = _build_candidates(problem)
    log_w = _log_weights(problem.with_structure(WEIGHTED_W), lam, closed=False)
    weights = np.exp(log_w)
    A = cands.open_members.astype(float).T  # (|Z|, n_cand)
    res = linprog(c=weights, A_ub=-A, b_ub=-np.ones(cands.n_Z),
                  bounds=(0, None), method="highs")
    if res.status != 0:
        raise ConfigurationError(f"fractional cover LP failed: {res.message}")
    support = tuple(
        (cands.centers[i], cands.orders[i])
        for i in np.flatnonzero(res.x > 1e-12)
    )
    return StructureValue(value=float(res.fun), exact=True, chosen=support)


# -- packings -------------------------------------------------------------------


def _packing_optimize(problem: OuterMeasureProblem, log_w: np.ndarray,
                      center_mask: np.ndarray | None = None) -> StructureValue:
    cands = _build_candidates(problem)
    allowed = cands.center_in_Z.copy()
    if center_mask is not None:
        keep = np.zeros(len(allowed), dtype=bool)
        for i in range(len(allowed)):
            keep[i] = allowed[i] and center_mask[cands.centers[i]]
        allowed = keep
    idx = list(np.flatnonzero(allowed))
    if not idx:
        raise ConfigurationError("no candidate balls centered in the block")
    weights = np.exp(log_w[idx])
    membs = [cands.closed_members_U[i] for i in idx]
    if len(idx) <= 3 * problem.exact_cap:
        conflict = np.zeros((len(idx), len(idx)), dtype=bool)
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                c = bool((membs[a] & membs[b]).any())
                conflict[a, b] = conflict[b, a] = c
        chosen_local, total = _max_weight_disjoint_exact(conflict, weights)
        exact = True
    else:
        chosen_local, total = _max_weight_disjoint_greedy(membs, weights)
        exact = False
    chosen = tuple((cands.centers[idx[i]], cands.orders[idx[i]])
                   for i in chosen_local)
    flags = () if exact else ("greedy-lower-bound",)
    return StructureValue(value=total, exact=exact, chosen=chosen, flags=flags)


def _max_weight_disjoint_exact(conflict: np.ndarray, weights: np.ndarray,
                               ) -> tuple[list[int], float]:
    order = sorted(range(len(weights)), key=lambda i: -weights[i])
    suffix = np.zeros(len(order) + 1)
    for pos in range(len(order) - 1, -1, -1):
        suffix[pos] = suffix[pos + 1] + weights[order[pos]]
    best_set: list[int] = []
    best_val = 0.0

    def recurse(pos: int, current: list[int], val: float):
        nonlocal best_set, best_val
        if val > best_val:
            best_val, best_set = val, list(current)
        if pos == len(order) or val + suffix[pos] <= best_val + 1e-15:
            return
        i = order[pos]
        if all(not conflict[i, j] for j in current):
            recurse(pos + 1, current + [i], val + float(weights[i]))
        recurse(pos + 1, current, val)

    recurse(0, [], 0.0)
    return sorted(best_set), best_val


def _max_weight_disjoint_greedy(membs: list[np.ndarray],
                                weights: np.ndarray,
                                ) -> tuple[list[int], float]:
    order = sorted(range(len(weights)), key=lambda i: -weights[i])
    chosen: list[int] = []
    taken = np.zeros(len(membs[0]), dtype=bool)
    for i in order:
        if not (membs[i] & taken).any():
            chosen.append(i)
            taken |= membs[i]
    return sorted(chosen), float(weights[chosen].sum())


def packing_value(problem: OuterMeasureProblem, lam: float,
                  center_mask: np.ndarray | None = None) -> StructureValue:
    """Max-weight pairwise-disjoint closed family with centers in Z.

    Disjointness is decided on the finite universe (Z plus extras): two
    balls conflict iff some universe point lies in both.
    """
    log_w = _log_weights(problem.with_structure(PACKING_P), lam, closed=True)
    return _packing_optimize(problem, log_w, center_mask)


def packing_bs_value(problem: OuterMeasureProblem, lam: float,
                     center_mask: np.ndarray | None = None) -> StructureValue:
    """Packing with BS weights exp(-lam sup S_n phi) over closed balls."""
    if problem.phi.min <= 0:
        raise ConfigurationError("BS structures need phi > 0")
    log_w = _log_weights(problem.with_structure(PACKING_BS), lam, closed=True)
    return _packing_optimize(problem, log_w, center_mask)


def _partitions(indices: list[int], max_blocks: int):
    """All set partitions of the indices into at most max_blocks blocks."""
    if not indices:
        yield []
        return
    first, rest = indices[0], indices[1:]
    for part in _partitions(rest, max_blocks):
        for bi in range(len(part)):
            yield part[:bi] + [part[bi] + [first]] + part[bi + 1:]
        if len(part) < max_blocks:
            yield part + [[first]]


def refined_packing_value(problem: OuterMeasureProblem, lam: float,
                          partition_cap: int = 4,
                          packer: Callable[..., StructureValue] | None = None,
                          exact_points: int = DEFAULT_PARTITION_EXACT,
                          ) -> StructureValue:
    """Minimum over partitions of Z of the per-block packing values.

    Exact over all partitions (up to ``partition_cap`` blocks) when Z is
    small; greedy agglomerative otherwise, which still yields a valid
    upper bound for the infimum.
    """
    packer = packer or packing_value
    m = len(problem.points)
    trivial = packer(problem, lam)
    best = trivial
    if m <= exact_points:
        for part in _partitions(list(range(m)), partition_cap):
            if len(part) == 1:
                continue
            total, exact_all, chosen = 0.0, True, []
            for block in part:
                mask = np.zeros(m, dtype=bool)
                mask[block] = True
                sv = packer(problem, lam, center_mask=mask)
                total += sv.value
                exact_all &= sv.exact
                chosen.extend(sv.chosen)
            if total < best.value - 1e-15:
                best = StructureValue(value=total, exact=exact_all,
                                      chosen=tuple(chosen))
        return best
    # agglomerative: start from singletons, merge while the value drops
    blocks = [[i] for i in range(m)]

    def total_of(blks):
        s = 0.0
        for blk in blks:
            mask = np.zeros(m, dtype=bool)
            mask[blk] = True
            s += packer(problem, lam, center_mask=mask).value
        return s

    current = total_of(blocks)
    improved = True
    while improved and len(blocks) > 1:
        improved = False
        for a, b in itertools.combinations(range(len(blocks)), 2):
            trial = [blk for i, blk in enumerate(blocks) if i not in (a, b)]
            trial.append(blocks[a] + blocks[b])
            val = total_of(trial)
            if val < current - 1e-15:
                blocks, current, improved = trial, val, True
                break
    value = min(current, trivial.value)
    return StructureValue(value=value, exact=False, chosen=(),
                          flags=("greedy-partition-upper-bound",))


# -- critical exponents ----------------------------------------------------------


def critical_lambda(valuation: Callable[[float], float], tol: float = 1e-6,
                    threshold: float = 1.0, max_doublings: int = 80,
                    ) -> CriticalValue:
    """Bisection for the lambda where a nonincreasing valuation crosses the
    threshold, with geometric bracket growth from [-1, 1]."""
    lo, hi = -1.0, 1.0
    v_lo, v_hi = valuation(lo), valuation(hi)
    grow = 0
    while v_lo < threshold and grow < max_doublings:
        lo *= 2.0
        v_lo = valuation(lo)
        grow += 1
    while v_hi > threshold and grow < max_doublings:
        hi *= 2.0
        v_hi = valuation(hi)
        grow += 1
    if v_lo < threshold or v_hi > threshold:
        raise BracketError(
            "valuation did not straddle the threshold; it may be constant"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        v_mid = valuation(mid)
        if v_mid >= threshold:
            lo, v_lo = mid, v_mid
        else:
            hi, v_hi = mid, v_mid
    return CriticalValue(lambda_star=0.5 * (lo + hi), bracket=(lo, hi),
                         threshold=threshold, value_lo=v_lo, value_hi=v_hi)


_VALUATIONS = {
    COVER_M: cover_value,
    COVER_FIXED: fixed_length_value,
    PACKING_P: packing_value,
    BS_R: bs_value,
    PACKING_BS: packing_bs_value,
    WEIGHTED_W: weighted_value,
}

# Structures whose parametrized potential is -lam * phi require the scaled
# family to stay anchored at the same base table; the cover/packing kinds
# already carry lambda in the order exponent.
BOWEN_STRUCTURES = (COVER_M, COVER_FIXED, PACKING_P)
BS_STRUCTURES = (BS_R, PACKING_BS, WEIGHTED_W)


def structure_valuation(problem: OuterMeasureProblem,
                        ) -> Callable[[float], float]:
    fn = _VALUATIONS[problem.structure]
    return lambda lam: fn(problem, lam).value


def subset_mdim(system: ShiftSystem, points: Sequence[PointWindow],
                phi: Potential, structure: str,
                eps_schedule: Sequence[float], N: int = 1, n_max: int = 3,
                tol: float = 1e-4, extras: Sequence[PointWindow] = (),
                exact_cap: int = 24) -> DimensionEstimate:
    """Critical exponent per eps, then regression against log(1/eps).

    The per-eps ratios lambda*(eps)/log(1/eps) are stored alongside the
    regression slope; BS structures are conventionally read through the
    ratios (their critical value is already the dimensionless exponent of
    Def-style normalization), the slope is the primary estimate for the
    cover/packing structures.
    """
    eps_schedule = tuple(sorted(set(eps_schedule), reverse=True))
    if len(eps_schedule) < 2:
        raise ConfigurationError("need at least 2 eps values")
    per_eps: dict[float, float] = {}
    ratios: dict[float, float] = {}
    for eps in eps_schedule:
        problem = OuterMeasureProblem(
            system=system, points=tuple(points), phi=phi, eps=eps, N=N,
            n_max=n_max, structure=structure, extras=tuple(extras),
            exact_cap=exact_cap,
        )
        crit = critical_lambda(structure_valuation(problem), tol=tol)
        per_eps[eps] = crit.lambda_star
        ratios[eps] = crit.lambda_star / math.log(1.0 / eps)
    xs = [math.log(1.0 / e) for e in eps_schedule]
    ys = [per_eps[e] for e in eps_schedule]
    slope, intercept, residual = _slope(xs, ys)
    return DimensionEstimate(
        per_eps_pressure=per_eps, slope=slope, intercept=intercept,
        residual=residual, eps_schedule=eps_schedule,
        n_schedule=tuple(range(N, n_max + 1)),
        details={"ratios": ratios, "structure": structure},
    )
