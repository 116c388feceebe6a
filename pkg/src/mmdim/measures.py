"""Probability measures on shift models and local entropy estimators.

Product measures (uniform or Bernoulli coordinates) admit exact
per-coordinate ball-mass brackets: the Bowen ball B_n(x, eps) is squeezed
between two product sets, an inner box that constrains symbol distances to
eps/6 on the coordinates 0..n-1+r (plus -r..-1 on two-sided models) with
r = ceil(log2(4/eps)) + 1, and an outer box that constrains coordinates
0..n-1 to symbol distance < eps.  Monte-Carlo estimation of the same
masses is kept as an independent cross-check.  Entropy rates are extracted
from per-step increments of -log(mass), which cancels the n-independent
boundary factor that would otherwise bias small-n ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bowen import distances_to, max_separated
from .errors import ConfigurationError, PoolInsufficientError
from .pressure import DimensionEstimate, _slope
from .systems import ABSOLUTE, PointWindow, Potential, ShiftSystem

WILSON_Z99 = 2.5758293035489004

PRODUCT_UNIFORM = "product-uniform"
BERNOULLI = "bernoulli"
EMPIRICAL = "empirical"


@dataclass(frozen=True)
class MeasureModel:
    """A probability measure on a shift model.

    Product kinds draw every retained coordinate independently from the
    symbol distribution ``p``; the empirical kind is a finite weighted
    sample.  All randomness is drawn from Philox streams derived from the
    model seed and a caller-chosen stream index, so reruns reproduce
    samples exactly.
    """

    kind: str
    system: ShiftSystem
    p: tuple[float, ...] = ()
    support: tuple[PointWindow, ...] = ()
    support_weights: tuple[float, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.kind in (PRODUCT_UNIFORM, BERNOULLI):
            total = sum(self.p)
            if abs(total - 1.0) > 1e-12:
                raise ConfigurationError("probability vector must sum to 1")
            if len(self.p) != self.system.alphabet_size:
                raise ConfigurationError("probability vector length mismatch")
        elif self.kind == EMPIRICAL:
            if not self.support:
                raise ConfigurationError("empirical measure needs support")
            if len(self.support) != len(self.support_weights):
                raise ConfigurationError("support and weights mismatch")
            if any(w <= 0 for w in self.support_weights):
                raise ConfigurationError("empirical weights must be positive")
            total = sum(self.support_weights)
            if abs(total - 1.0) > 1e-9:
                raise ConfigurationError("empirical weights must sum to 1")
        else:
            raise ConfigurationError(f"unknown measure kind {self.kind!r}")

    # -- constructors ---------------------------------------------------

    @staticmethod
    def product_uniform(system: ShiftSystem, seed: int = 0) -> "MeasureModel":
        k = system.alphabet_size
        return MeasureModel(kind=PRODUCT_UNIFORM, system=system,
                            p=(1.0 / k,) * k, seed=seed)

    @staticmethod
    def bernoulli(system: ShiftSystem, p: Sequence[float],
                  seed: int = 0) -> "MeasureModel":
        return MeasureModel(kind=BERNOULLI, system=system,
                            p=tuple(float(v) for v in p), seed=seed)

    @staticmethod
    def empirical(system: ShiftSystem, points: Sequence[PointWindow],
                  weights: Sequence[float] | None = None,
                  seed: int = 0) -> "MeasureModel":
        pts = tuple(points)
        if weights is None:
            weights = (1.0 / len(pts),) * len(pts)
        return MeasureModel(kind=EMPIRICAL, system=system, support=pts,
                            support_weights=tuple(weights), seed=seed)

    @staticmethod
    def point_mass(system: ShiftSystem, point: PointWindow,
                   seed: int = 0) -> "MeasureModel":
        return MeasureModel.empirical(system, [point], [1.0], seed=seed)

    # -- sampling ---------------------------------------------------------

    @property
    def is_product(self) -> bool:
        return self.kind in (PRODUCT_UNIFORM, BERNOULLI)

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.Generator(
            np.random.Philox(np.random.SeedSequence((self.seed, stream))))

    def sample_matrix(self, count: int, stream: int = 0) -> np.ndarray:
        rng = self.rng(stream)
        L = self.system.word_length
        if self.is_product:
            k = self.system.alphabet_size
            return rng.choice(k, size=(count, L), p=np.asarray(self.p))
        idx = rng.choice(len(self.support), size=count,
                         p=np.asarray(self.support_weights))
        return np.array([self.support[i].symbols for i in idx])

    def sample_points(self, count: int, stream: int = 0) -> list[PointWindow]:
        mat = self.sample_matrix(count, stream)
        origin = self.system.origin_index
        exact = not self.is_product
        return [PointWindow(symbols=tuple(int(a) for a in row), origin=origin,
                            exact_tail=exact) for row in mat]

    def to_empirical(self, size: int, stream: int = 0) -> "MeasureModel":
        pts = self.sample_points(size, stream)
        return MeasureModel.empirical(self.system, pts, seed=self.seed)

    # -- exact marginals ---------------------------------------------------

    def coordinate_mass_within(self, a: int, radius: float) -> float:
        """Mass of symbols at distance < radius from symbol a."""
        if not self.is_product:
            raise ConfigurationError("marginals need a product measure")
        sys = self.system
        return float(sum(
            self.p[b] for b in range(sys.alphabet_size)
            if sys.symbol_distance(a, b) < radius
        ))

    def indicator_integral(self, a: int) -> float:
        """Integral of the coordinate-0 indicator of symbol a."""
        if self.is_product:
            return self.p[a]
        return float(sum(
            w for z, w in zip(self.support, self.support_weights)
            if z.coordinate(0) == a
        ))

    def empirical_ball_mass(self, x: PointWindow, n: int, eps: float) -> float:
        if self.kind != EMPIRICAL:
            raise ConfigurationError("exact summation needs empirical measure")
        Z = self.system.as_matrix(list(self.support))
        d = distances_to(self.system, x, Z, n)
        slack = self.system.truncation_slack(n)
        inside = d + slack < eps
        w = np.asarray(self.support_weights)
        return float(w[inside].sum())


# -- ball-mass brackets ---------------------------------------------------------


def bracket_reach(eps: float) -> int:
    """The coordinate reach r = ceil(log2(4/eps)) + 1 of the inner box."""
    return int(math.ceil(math.log2(4.0 / eps))) + 1


def _check_bracket_model(measure: MeasureModel, eps: float) -> None:
    if not measure.is_product:
        raise ConfigurationError("mass brackets need a product measure")
    if measure.system.weight_base != 0.5:
        raise ConfigurationError("mass brackets assume weight base 1/2")
    if eps >= 1.0:
        raise ConfigurationError("mass brackets need eps < 1")


def ball_mass_bracket(measure: MeasureModel, x: PointWindow, n: int,
                      eps: float) -> tuple[float, float]:
    """The closed-form bracket ((eps/6)^{n+2r}, (4 eps)^n) on mu(B_n(x, eps)).

    Valid for product-uniform measures on absolute-difference alphabets
    whose grid resolves eps (2 eps k >= 1); the degenerate order 0 returns
    (0, 1).  Requires eps < 1/4 so that the inner-box reach derivation
    applies.
    """
    _check_bracket_model(measure, eps)
    if measure.kind != PRODUCT_UNIFORM:
        raise ConfigurationError("the closed-form bracket is for the "
                                 "product-uniform measure")
    if measure.system.symbol_metric != ABSOLUTE:
        raise ConfigurationError("the closed-form bracket needs the "
                                 "absolute-difference symbol metric")
    if eps >= 0.25:
        raise ConfigurationError("closed-form bracket needs eps < 1/4")
    k = measure.system.alphabet_size
    if 2.0 * eps * k < 1.0:
        raise ConfigurationError(
            f"grid too coarse for the bracket: need 2*eps*k >= 1, got "
            f"k={k}, eps={eps}"
        )
    if n == 0:
        return 0.0, 1.0
    r = bracket_reach(eps)
    return (eps / 6.0) ** (n + 2 * r), (4.0 * eps) ** n


def _inner_coords(system: ShiftSystem, n: int, r: int) -> range:
    if system.sidedness == "one-sided":
        lo, hi = 0, min(n - 1 + r, system.window - 1)
    else:
        lo, hi = -min(r, system.window), min(n - 1 + r, system.window)
    return range(lo, hi + 1)


def exact_cylinder_bracket(measure: MeasureModel, x: PointWindow, n: int,
                           eps: float) -> tuple[float, float]:
    """Exact product-set bracket on mu(B_n(x, eps)), grid-adapted.

    Lower: mass of the inner box (per-coordinate distance < eps/6 on the
    reach-extended coordinate range).  Upper: mass of the outer box
    (distance < eps on coordinates 0..n-1).  Both sides are exact product
    masses, conservative in their respective directions.
    """
    _check_bracket_model(measure, eps)
    if n == 0:
        return 0.0, 1.0
    sys = measure.system
    r = bracket_reach(eps)
    lower = 1.0
    for i in _inner_coords(sys, n, r):
        lower *= measure.coordinate_mass_within(x.coordinate(i), eps / 6.0)
    upper = 1.0
    for j in range(n):
        upper *= measure.coordinate_mass_within(x.coordinate(j), eps)
    return lower, upper


@dataclass(frozen=True)
class MassEstimate:
    p_hat: float
    ci: tuple[float, float]
    hits: int
    samples: int
    zero_hits: bool

    def refutes(self, lo: float, hi: float) -> bool:
        """True when the CI excludes the whole bracket [lo, hi]."""
        return self.ci[0] > hi or self.ci[1] < lo


def wilson_interval(hits: int, samples: int,
                    z: float = WILSON_Z99) -> tuple[float, float]:
    if samples <= 0:
        raise ConfigurationError("need a positive sample count")
    p = hits / samples
    denom = 1.0 + z * z / samples
    center = (p + z * z / (2 * samples)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / samples
                                   + z * z / (4 * samples * samples))
    return max(0.0, center - half), min(1.0, center + half)


def estimate_ball_mass(measure: MeasureModel, x: PointWindow, n: int,
                       eps: float, samples: int = 100_000,
                       stream: int = 1) -> MassEstimate:
    """Empirical frequency of d_n(x, Y) < eps over iid Y ~ mu, Wilson CI.

    With zero hits only the upper end of the interval is informative; the
    estimate is flagged and the lower end set to 0.
    """
    if samples < 1000:
        raise ConfigurationError("need at least 1000 samples")
    if measure.kind == EMPIRICAL:
        mass = measure.empirical_ball_mass(x, n, eps)
        return MassEstimate(p_hat=mass, ci=(mass, mass), hits=-1,
                            samples=0, zero_hits=False)
    sys = measure.system
    slack = sys.truncation_slack(n)
    hits = 0
    block = 20_000
    done = 0
    bi = 0
    while done < samples:
        take = min(block, samples - done)
        Y = measure.sample_matrix(take, stream=stream * 1000 + bi)
        d = distances_to(sys, x, Y, n)
        hits += int((d + slack < eps).sum())
        done += take
        bi += 1
    lo, hi = wilson_interval(hits, samples)
    zero = hits == 0
    if zero:
        lo = 0.0
    return MassEstimate(p_hat=hits / samples, ci=(lo, hi), hits=hits,
                        samples=samples, zero_hits=zero)


# -- local entropies --------------------------------------------------------------


@dataclass(frozen=True)
class EntropyEstimate:
    quantity: str
    per_scale: dict
    extrapolated: float
    ci: tuple[float, float] | None = None
    flags: tuple[str, ...] = ()
    details: dict = field(default_factory=dict)


def _bootstrap_ci(values: np.ndarray, rng: np.random.Generator,
                  resamples: int = 200) -> tuple[float, float]:
    if len(values) == 1:
        return float(values[0]), float(values[0])
    means = np.array([
        values[rng.integers(0, len(values), size=len(values))].mean()
        for _ in range(resamples)
    ])
    return float(np.quantile(means, 0.025)), float(np.quantile(means, 0.975))


def _slope_ci(xs: Sequence[float], ys: Sequence[float],
              z: float = 1.96) -> tuple[float, tuple[float, float]]:
    """Least-squares slope with its normal-approximation band."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    if len(xs) <= 2:
        return float(slope), (float(slope), float(slope))
    resid = ys - (slope * xs + intercept)
    se = math.sqrt(float(resid @ resid) / (len(xs) - 2)
                   / float(((xs - xs.mean()) ** 2).sum()))
    return float(slope), (float(slope - z * se), float(slope + z * se))


def _mass_curves(measure: MeasureModel, x: PointWindow, n_schedule,
                 eps: float) -> tuple[np.ndarray, np.ndarray]:
    """(-log upper mass, -log lower mass) per n: rate brackets from below
    and above."""
    v_low, v_high = [], []
    for n in n_schedule:
        if measure.is_product:
            lo, hi = exact_cylinder_bracket(measure, x, n, eps)
        else:
            m = measure.empirical_ball_mass(x, n, eps)
            lo = hi = m
        if hi <= 0 or lo <= 0:
            break
        v_low.append(-math.log(hi))
        v_high.append(-math.log(lo))
    return np.array(v_low), np.array(v_high)


def bs_entropy(measure: MeasureModel, phi: Potential, eps: float,
               n_schedule: Sequence[int], x_samples: int = 32,
               bound: str = "lower", stream: int = 7) -> EntropyEstimate:
    """Local entropy rate with Birkhoff denominator S_n phi.

    Per sampled point the rate is the widest-span increment ratio
    (v(n_hi) - v(n_lo)) / (S_{n_hi} phi - S_{n_lo} phi), which cancels the
    order-independent boundary factor in the mass and is exact for
    constant phi.  The lower quantity reads the upper mass curve (rates
    certified from below) and the upper quantity the lower mass curve,
    clamped to stay above the lower rate; per-step extremes over the top
    half of the schedule are kept as liminf/limsup band diagnostics.  The
    reported value averages the sample, with a bootstrap interval.
    """
    if phi.min <= 0:
        raise ConfigurationError("BS entropy needs phi > 0")
    if bound not in ("lower", "upper"):
        raise ConfigurationError("bound must be 'lower' or 'upper'")
    n_schedule = sorted(set(int(n) for n in n_schedule))
    if len(n_schedule) < 2:
        raise ConfigurationError("need at least two orders")
    if measure.kind == EMPIRICAL and len(measure.support) <= x_samples:
        xs = list(measure.support)
    else:
        xs = measure.sample_points(x_samples, stream=stream)
    flags: list[str] = []
    lower_vals, upper_vals = [], []
    band_lo, band_hi = [], []
    per_scale: dict[int, list[float]] = {n: [] for n in n_schedule}
    for x in xs:
        v_low, v_high = _mass_curves(measure, x, n_schedule, eps)
        usable = len(v_low)
        if usable < 2:
            flags.append("schedule-shrunk")
            continue
        ns = n_schedule[:usable]
        span = _birkhoff_step(measure.system, phi, x, ns[0], ns[-1])
        lo_x = float((v_low[-1] - v_low[0]) / span)
        hi_x = max(float((v_high[-1] - v_high[0]) / span), lo_x)
        lower_vals.append(lo_x)
        upper_vals.append(hi_x)
        denoms = np.array([
            _birkhoff_step(measure.system, phi, x, ns[i], ns[i + 1])
            for i in range(usable - 1)
        ])
        tail = max(1, (usable - 1) // 2)
        band_lo.append(float((np.diff(v_low) / denoms)[-tail:].min()))
        band_hi.append(float((np.diff(v_high) / denoms)[-tail:].max()))
        for i, n in enumerate(ns):
            denom_total = _birkhoff_step(measure.system, phi, x, 0, n)
            mid = 0.5 * (v_low[i] + v_high[i])
            per_scale[n].append(mid / denom_total)
    if not lower_vals:
        raise ConfigurationError(
            "mass estimates vanished at every order; shrink the schedule"
        )
    vals = np.array(lower_vals if bound == "lower" else upper_vals)
    rng = measure.rng(stream + 1)
    ci = _bootstrap_ci(vals, rng)
    per_scale_mean = {n: float(np.mean(v)) for n, v in per_scale.items() if v}
    quantity = "BS-" + bound
    if phi.kind == "constant" and phi.scale * phi.value + phi.offset == 1.0:
        quantity = "BK-" + bound
    return EntropyEstimate(
        quantity=quantity, per_scale=per_scale_mean,
        extrapolated=float(vals.mean()), ci=ci, flags=tuple(flags),
        details={"per_point": vals.tolist(), "eps": eps,
                 "step_band": (float(np.mean(band_lo)),
                               float(np.mean(band_hi)))},
    )


def _birkhoff_step(system: ShiftSystem, phi: Potential, x: PointWindow,
                   n0: int, n1: int) -> float:
    from .systems import birkhoff_sum
    return birkhoff_sum(system, phi, x, n1) - birkhoff_sum(system, phi, x, n0)


def brin_katok(measure: MeasureModel, eps: float, n_schedule: Sequence[int],
               x_samples: int = 32, bound: str = "lower",
               stream: int = 7) -> EntropyEstimate:
    """Brin-Katok local entropy: the BS entropy of the unit potential."""
    return bs_entropy(measure, Potential.constant(1.0), eps, n_schedule,
                      x_samples=x_samples, bound=bound, stream=stream)


# -- Katok covering entropy ---------------------------------------------------------


@dataclass(frozen=True)
class KatokCount:
    count: int
    exact: bool
    covered_mass: float


def katok_rn(measure: MeasureModel, n: int, eps: float, delta: float,
             candidate_pool: Sequence[PointWindow] | None = None,
             exact_cap: int = 14, stream: int = 11,
             pool_size: int = 512) -> KatokCount:
    """Minimal number of Bowen balls whose union has mass > 1 - delta.

    Product measures are snapshotted to an empirical sample first (flagged
    by exactness of the underlying measure); greedy picks the ball of
    largest uncovered mass, with an exhaustive search below the cap.
    """
    if not 0.0 < delta < 1.0:
        raise ConfigurationError("delta must lie in (0, 1)")
    if measure.kind != EMPIRICAL:
        measure = measure.to_empirical(pool_size, stream)
    sys = measure.system
    support = list(measure.support)
    weights = np.asarray(measure.support_weights)
    pool = list(candidate_pool) if candidate_pool is not None else support
    Z = sys.as_matrix(support)
    slack = sys.truncation_slack(n)
    members = []
    for c in pool:
        d = distances_to(sys, c, Z, n)
        members.append(d + slack < eps)
    member_matrix = np.array(members)
    target = 1.0 - delta
    total_reachable = float(weights[member_matrix.any(axis=0)].sum())
    if total_reachable <= target:
        raise PoolInsufficientError(
            f"pool covers mass {total_reachable:.4f} <= 1 - delta = {target}"
        )
    if len(pool) <= exact_cap:
        count = _katok_exact(member_matrix, weights, target)
        return KatokCount(count=count, exact=True, covered_mass=target)
    # lazy greedy: uncovered-mass gains only shrink as coverage grows
    import heapq
    active = weights.astype(float).copy()
    gains = member_matrix @ active
    heap = [(-g, i) for i, g in enumerate(gains)]
    heapq.heapify(heap)
    count = 0
    mass = 0.0
    while mass <= target:
        fresh, i = 0.0, -1
        while heap:
            _, i = heapq.heappop(heap)
            fresh = float(member_matrix[i] @ active)
            if not heap or fresh >= -heap[0][0] - 1e-15:
                break
            heapq.heappush(heap, (-fresh, i))
        if fresh <= 0:
            raise PoolInsufficientError("greedy mass cover stalled")
        active[member_matrix[i]] = 0.0
        mass += fresh
        count += 1
    return KatokCount(count=count, exact=False, covered_mass=mass)


def _katok_exact(member_matrix: np.ndarray, weights: np.ndarray,
                 target: float) -> int:
    n_sets = member_matrix.shape[0]
    best = n_sets + 1

    def recurse(start: int, covered: np.ndarray, picked: int):
        nonlocal best
        if float(weights[covered].sum()) > target:
            best = min(best, picked)
            return
        if picked + 1 >= best or start == n_sets:
            return
        # upper bound on achievable extra mass
        rest = member_matrix[start:].any(axis=0) & ~covered
        if float(weights[covered].sum() + weights[rest].sum()) <= target:
            return
        recurse(start + 1, covered | member_matrix[start], picked + 1)
        recurse(start + 1, covered, picked)

    recurse(0, np.zeros(member_matrix.shape[1], dtype=bool), 0)
    if best > n_sets:
        raise PoolInsufficientError("no subset reaches the target mass")
    return best


def katok_entropy(measure: MeasureModel, eps: float, delta: float,
                  n_schedule: Sequence[int], pool_size: int = 512,
                  stream: int = 11) -> EntropyEstimate:
    """Slope of log r_n(mu; eps, delta) against n."""
    n_schedule = sorted(set(int(n) for n in n_schedule))
    if measure.kind != EMPIRICAL:
        measure = measure.to_empirical(pool_size, stream)
    per_scale = {}
    flags = []
    counts = []
    for n in n_schedule:
        kc = katok_rn(measure, n, eps, delta, stream=stream)
        counts.append(kc)
        per_scale[n] = math.log(kc.count)
        if not kc.exact:
            flags.append(f"greedy-n{n}")
    xs = np.array(n_schedule, dtype=float)
    ys = np.array([per_scale[n] for n in n_schedule])
    if len(xs) > 1:
        slope, ci = _slope_ci(xs, ys)
    else:
        slope, ci = 0.0, (0.0, 0.0)
    return EntropyEstimate(
        quantity="Katok", per_scale=per_scale, extrapolated=slope, ci=ci,
        flags=tuple(flags),
        details={"counts": [(c.count, c.exact) for c in counts],
                 "eps": eps, "delta": delta},
    )


# -- Pfister-Sullivan entropy ----------------------------------------------------


def default_dictionary(system: ShiftSystem, size: int = 16) -> tuple[int, ...]:
    """Dictionary of coordinate-0 symbol indicators (first ``size`` symbols)."""
    return tuple(range(min(system.alphabet_size, size)))


def _empirical_symbol_frequencies(system: ShiftSystem, pool: np.ndarray,
                                  n: int, symbols: Sequence[int],
                                  start: int = 1) -> np.ndarray:
    """Frequency of each dictionary symbol over orbit steps start..start+n-1.

    Matches the empirical measure (1/n) sum_{j=start}^{start+n-1}
    delta_{sigma^j x}, read off coordinate 0 of the shifted points.
    """
    origin = system.origin_index
    cols = pool[:, origin + start: origin + start + n]
    freqs = np.zeros((pool.shape[0], len(symbols)))
    for si, a in enumerate(symbols):
        freqs[:, si] = (cols == a).mean(axis=1)
    return freqs


def ps_entropy(measure: MeasureModel, eps: float,
               eta: float | Sequence[float], n_schedule: Sequence[int],
               dictionary_size: int = 16, pool_size: int = 1024,
               pool: Sequence[PointWindow] | None = None,
               stream: int = 13) -> EntropyEstimate:
    """Separated-set growth restricted to near-generic points.

    X_{n, F} is approximated by the pool points whose empirical symbol
    frequencies over steps 1..n stay within eta of the measure's marginals
    for every dictionary indicator; the estimate is the slope of
    log s_n over the schedule, reported at the smallest feasible eta.
    """
    etas = sorted({float(e) for e in
                   (eta if isinstance(eta, (list, tuple)) else [eta])},
                  reverse=True)
    n_schedule = sorted(set(int(n) for n in n_schedule))
    sys = measure.system
    if pool is None:
        pool_pts = measure.sample_points(pool_size, stream)
    else:
        pool_pts = list(pool)
    mat = sys.as_matrix(pool_pts)
    symbols = default_dictionary(sys, dictionary_size)
    targets = np.array([measure.indicator_integral(a) for a in symbols])
    per_eta: dict[float, float] = {}
    per_eta_ci: dict[float, tuple[float, float]] = {}
    per_scale: dict[tuple, float] = {}
    flags: list[str] = []
    for eta_v in etas:
        logs, ns = [], []
        for n in n_schedule:
            freqs = _empirical_symbol_frequencies(sys, mat, n, symbols)
            ok = (np.abs(freqs - targets[None, :]) <= eta_v + 1e-12).all(axis=1)
            members = [pool_pts[i] for i in np.flatnonzero(ok)]
            if not members:
                flags.append(f"empty-eta{eta_v}-n{n}")
                continue
            sep, _ = max_separated(sys, members, n, eps, mode="greedy")
            per_scale[(n, eta_v)] = math.log(len(sep))
            logs.append(math.log(len(sep)))
            ns.append(n)
        if len(ns) >= 2:
            per_eta[eta_v], per_eta_ci[eta_v] = _slope_ci(ns, logs)
    if not per_eta:
        raise ConfigurationError("every (n, eta) cell was empty; enlarge eta")
    feasible = min(per_eta)
    return EntropyEstimate(
        quantity="PS", per_scale=per_scale,
        extrapolated=per_eta[feasible], ci=per_eta_ci[feasible],
        flags=tuple(flags),
        details={"per_eta": per_eta, "eta": feasible, "eps": eps},
    )


# -- generic points ---------------------------------------------------------------


def generic_point_test(system: ShiftSystem, x: PointWindow,
                       measure: MeasureModel, n: int, tol: float,
                       dictionary: Sequence[int] | None = None) -> bool:
    """Birkhoff averages over steps 0..n-1 match the integrals within tol."""
    symbols = dictionary if dictionary is not None \
        else default_dictionary(system)
    origin = system.origin_index
    word = np.asarray(x.symbols)[origin:origin + n]
    for a in symbols:
        avg = float((word == a).mean())
        if abs(avg - measure.indicator_integral(a)) > tol:
            return False
    return True


def generic_subset(system: ShiftSystem, points: Sequence[PointWindow],
                   measure: MeasureModel, n: int, tol: float,
                   dictionary: Sequence[int] | None = None,
                   ) -> list[PointWindow]:
    symbols = dictionary if dictionary is not None \
        else default_dictionary(system)
    mat = system.as_matrix(list(points))
    origin = system.origin_index
    cols = mat[:, origin:origin + n]
    ok = np.ones(mat.shape[0], dtype=bool)
    for a in symbols:
        avg = (cols == a).mean(axis=1)
        ok &= np.abs(avg - measure.indicator_integral(a)) <= tol
    return [p for p, keep in zip(points, ok) if keep]


# -- generic-point mean dimension -----------------------------------------------


@dataclass(frozen=True)
class GenericPointReport:
    bowen_subset: "DimensionEstimate"
    ps_ratio: "DimensionEstimate"
    katok_ratio: "DimensionEstimate"
    bk_lower_ratio: "DimensionEstimate"
    bk_upper_ratio: "DimensionEstimate"
    flags: tuple[str, ...] = ()

    def ratio_summary(self) -> dict[str, float]:
        """Mean of the per-eps ratios estimate(eps)/log(1/eps) per quantity."""
        def mean_ratio(est):
            ratios = list(est.details["ratios"].values())
            return float(np.mean(ratios))

        return {
            "bowen-subset": mean_ratio(self.bowen_subset),
            "ps": mean_ratio(self.ps_ratio),
            "katok": mean_ratio(self.katok_ratio),
            "bk-lower": mean_ratio(self.bk_lower_ratio),
            "bk-upper": mean_ratio(self.bk_upper_ratio),
        }


def _ratio_estimate(per_eps: dict[float, float], name: str,
                    extra: dict | None = None) -> DimensionEstimate:
    eps_schedule = tuple(sorted(per_eps, reverse=True))
    xs = [math.log(1.0 / e) for e in eps_schedule]
    ys = [per_eps[e] for e in eps_schedule]
    if len(eps_schedule) >= 2:
        slope, intercept, residual = _slope(xs, ys)
    else:
        slope = ys[0] / xs[0]
        intercept, residual = 0.0, 0.0
    details = {"quantity": name,
               "ratios": {e: per_eps[e] / math.log(1.0 / e)
                          for e in eps_schedule}}
    if extra:
        details.update(extra)
    return DimensionEstimate(
        per_eps_pressure=per_eps, slope=slope, intercept=intercept,
        residual=residual, eps_schedule=eps_schedule, n_schedule=(),
        details=details,
    )


def gmu_mdim_estimate(system: ShiftSystem, measure: MeasureModel,
                      eps_schedule: Sequence[float],
                      n_schedule: Sequence[int], tol: float = 0.1,
                      model_factory: Callable[
                          [float], tuple[ShiftSystem, MeasureModel]] | None = None,
                      pool_depth: Callable[[float], int] | None = None,
                      delta: float = 0.5,
                      eta: Sequence[float] = (0.5, 0.25),
                      subset_orders: tuple[int, int] = (1, 4),
                      generic_order: int | None = None,
                      stream: int = 17) -> GenericPointReport:
    """Bowen subset dimension of near-generic points next to the PS, Katok
    and Brin-Katok ratio estimates on the same eps schedule.

    Per eps the model may be rebuilt by ``model_factory`` (the grid family
    uses alphabet size ceil(1/eps)); pools are enumerated at
    ``pool_depth(eps)`` so that covering counts are exact finite-model
    quantities.  The report carries one regression-slope estimate per
    quantity; finite-scale consistency of the four numbers is the
    testable surrogate for the limiting equalities.
    """
    from .caratheodory import COVER_M, subset_mdim

    eps_schedule = tuple(sorted(set(float(e) for e in eps_schedule),
                                reverse=True))
    n_schedule = sorted(set(int(n) for n in n_schedule))
    flags: list[str] = []
    bk_lo: dict[float, float] = {}
    bk_hi: dict[float, float] = {}
    kat: dict[float, float] = {}
    ps: dict[float, float] = {}
    bowen: dict[float, float] = {}
    for ei, eps in enumerate(eps_schedule):
        sys_eps, mu_eps = (model_factory(eps) if model_factory
                           else (system, measure))
        bk_lo[eps] = bs_entropy(mu_eps, Potential.constant(1.0), eps,
                                n_schedule, bound="lower",
                                stream=stream + ei).extrapolated
        bk_hi[eps] = bs_entropy(mu_eps, Potential.constant(1.0), eps,
                                n_schedule, bound="upper",
                                stream=stream + ei).extrapolated
        depth = pool_depth(eps) if pool_depth else max(n_schedule) + 2
        if mu_eps.is_product and \
                sys_eps.alphabet_size ** depth <= sys_eps.enumeration_cap:
            pool = sys_eps.enumerate_points(depth)
            weights = _product_weights(mu_eps, pool, depth)
            snapshot = MeasureModel.empirical(sys_eps, pool, weights,
                                              seed=mu_eps.seed)
        else:
            snapshot = mu_eps.to_empirical(1024, stream + 31 * ei) \
                if mu_eps.is_product else mu_eps
            pool = list(snapshot.support)
            flags.append(f"sampled-pool-eps{eps}")
        kat[eps] = katok_entropy(snapshot, eps, delta, n_schedule,
                                 stream=stream + ei).extrapolated
        ps[eps] = ps_entropy(snapshot, eps, eta, n_schedule,
                             pool=pool, stream=stream + ei).extrapolated
        g_order = generic_order or depth
        zg = generic_subset(sys_eps, pool, mu_eps, g_order, tol)
        if not zg:
            flags.append(f"generic-empty-eps{eps}")
            continue
        est = subset_mdim(sys_eps, zg, Potential.constant(0.0), COVER_M,
                          [eps, eps / 2.0], N=subset_orders[0],
                          n_max=subset_orders[1], tol=1e-3)
        bowen[eps] = est.per_eps_pressure[eps]
    if not bowen:
        raise ConfigurationError("generic set empty at every eps")
    return GenericPointReport(
        bowen_subset=_ratio_estimate(bowen, "bowen-subset"),
        ps_ratio=_ratio_estimate(ps, "ps"),
        katok_ratio=_ratio_estimate(kat, "katok"),
        bk_lower_ratio=_ratio_estimate(bk_lo, "bk-lower"),
        bk_upper_ratio=_ratio_estimate(bk_hi, "bk-upper"),
        flags=tuple(flags),
    )


def _product_weights(measure: MeasureModel, pool: Sequence[PointWindow],
                     depth: int) -> list[float]:
    p = np.asarray(measure.p)
    origin = measure.system.origin_index
    out = []
    for z in pool:
        w = 1.0
        for j in range(depth):
            w *= p[z.symbols[origin + j]]
        out.append(float(w))
    total = sum(out)
    return [w / total for w in out]
