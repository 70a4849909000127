"""Monte-Carlo measure of the set of x whose lattice g_t u_f(x) Z^(n+1) has a short vector.

Every sampled point is pushed through the map exactly, rounded once to the
working precision, and then followed along the flow with exact first
minima.  Work is split over processes by sample index and reassembled in
index order, so results do not depend on the worker count.
"""

from __future__ import annotations

import json
import math
import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import TargetVector, as_fraction, default_precision, gamma_of_v, quantize
from .correspondence import heights_at, multiplicative_trajectory, trajectory
from .measures import MapSpec, MeasureSampler

DEFAULT_T = tuple(range(5, 101, 5))
DEFAULT_EPS = tuple(Fraction(1, 2 ** k) for k in range(1, 13))
TAIL_TOL = Fraction(1, 1000)


class HypothesisWarning(UserWarning):
    """An input violates a hypothesis of the statement being tested."""


def target_of(point: Sequence[Fraction], precision_bits: int) -> TargetVector:
    return TargetVector(tuple(quantize(c, precision_bits) for c in point), precision_bits)


def _in_ball(x: Sequence[Fraction], center: Sequence[Fraction], radius: Fraction) -> bool:
    return all(abs(a - c) < radius for a, c in zip(x, center))


def ball_samples(f: MapSpec, ms: MeasureSampler, center, radius, count: int,
                 precision_bits: int, max_draws: int | None = None) -> list[TargetVector]:
    """First ``count`` exact samples of ms inside the sup-norm ball, mapped by f."""
    center = tuple(as_fraction(c) for c in center)
    radius = as_fraction(radius)
    ms = ms.with_resolution(precision_bits)
    out = []
    limit = max_draws if max_draws is not None else 1000 * count
    i = 0
    while len(out) < count:
        if i >= limit:
            raise ValueError("ball holds no (or too little) support of the measure")
        x = ms.point(i)
        i += 1
        if _in_ball(x, center, radius):
            out.append(target_of(f.apply(x), precision_bits))
    return out


def _chunks(n: int, k: int) -> list[range]:
    k = max(1, min(k, n))
    step = -(-n // k)
    return [range(i, min(i + step, n)) for i in range(0, n, step)]


def _pmap(fn, items: list, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    parts = _chunks(len(items), threads)
    with ProcessPoolExecutor(max_workers=threads) as ex:
        blocks = list(ex.map(_apply_block, [(fn, [items[i] for i in r]) for r in parts]))
    return [x for b in blocks for x in b]


def _apply_block(args):
    fn, items = args
    return [fn(it) for it in items]


class _HeightsJob:
    def __init__(self, t_list):
        self.t_list = list(t_list)

    def __call__(self, y):
        return heights_at(y, self.t_list)


@dataclass
class NondivergenceScan:
    map: dict
    measure: dict
    ball: dict
    t_list: list
    eps_grid: list
    samples: int
    ratios: list
    slopes: list
    alpha_bound: float
    K: float
    alpha_used: float
    rho_used: float
    goodness: dict | None
    hypothesis_verified: bool
    theorem_constant: str = "(n+1) C (N_d D^2)^(n+1)"
    notes: list = field(default_factory=list)

    def ratio(self, t: int, eps) -> float:
        return self.ratios[self.t_list.index(t)][[Fraction(e) for e in self.eps_grid].index(Fraction(eps))]

    def monotone(self) -> bool:
        order = sorted(range(len(self.eps_grid)), key=lambda j: Fraction(self.eps_grid[j]))
        return all(all(row[a] <= row[b] for a, b in zip(order, order[1:])) for row in self.ratios)

    def to_json(self, **kw) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=str, **kw)

    def to_csv(self) -> str:
        head = "t," + ",".join(str(e) for e in self.eps_grid)
        rows = [f"{t}," + ",".join(repr(r) for r in row) for t, row in zip(self.t_list, self.ratios)]
        return "\n".join([head] + rows) + "\n"


def _slope(eps: list[Fraction], ratios: list[float], counts: list[int], min_count: int) -> float:
    pts = [(math.log(float(e)), math.log(r)) for e, r, c in zip(eps, ratios, counts)
           if e <= 1 and c >= min_count]
    if len(pts) < 2:
        return math.nan
    x, y = zip(*pts)
    return float(np.polyfit(x, y, 1)[0])


def dilated_ball_inside(ms: MeasureSampler, center, radius, n: int) -> bool:
    """Whether 3^(n+1) B lies in the declared domain of the (base) measure."""
    base = ms.base if ms.kind == "pushforward" else ms
    box = base.domain()
    if box is None:
        return True
    r = float(radius) * 3 ** (n + 1)
    c = np.array([float(x) for x in center])
    return bool(np.all(c - r >= box[0]) and np.all(c + r <= box[1]))


def scan(f: MapSpec, ms: MeasureSampler, center, radius, t_list: Sequence[int] = DEFAULT_T,
         eps_grid: Sequence = DEFAULT_EPS, samples: int = 20000, *, goodness=None,
         threads: int = 1, min_count: int = 5) -> NondivergenceScan:
    """Ratios mu({x in B : lambda_1(g_t u_f(x)) < eps}) / mu(B) on a (t, eps) grid.

    ``goodness`` may be a GoodnessReport; its (C_hat, alpha_hat, rho_hat)
    then fix the comparison shape (eps/rho)^alpha, otherwise the fitted
    slope and rho = 1 are used.
    """
    t_list = sorted(set(int(t) for t in t_list))
    if not t_list or t_list[0] < 0:
        raise ValueError("t_list must hold non-negative times")
    eps_grid = [as_fraction(e) for e in eps_grid]
    if any(e <= 0 for e in eps_grid):
        raise ValueError("eps grid must be positive")
    prec = default_precision(f.n, t_list[-1])
    ys = ball_samples(f, ms, center, radius, samples, prec)
    heights = _pmap(_HeightsJob(t_list), ys, threads)
    counts = [[sum(1 for h in heights if h[i] < e) for e in eps_grid] for i in range(len(t_list))]
    ratios = [[c / samples for c in row] for row in counts]
    slopes = [_slope(eps_grid, r, c, min_count) for r, c in zip(ratios, counts)]
    finite = [s for s in slopes if not math.isnan(s)]
    alpha_bound = min(finite) if finite else math.nan

    if goodness is not None:
        alpha, rho = goodness.alpha_hat, goodness.rho_hat
        gdict = {"C_hat": goodness.C_hat, "alpha_hat": goodness.alpha_hat, "rho_hat": goodness.rho_hat}
    else:
        alpha, rho, gdict = alpha_bound, 1.0, None
    K = 0.0
    for row in ratios:
        for e, r in zip(eps_grid, row):
            if float(e) <= rho and r > 0:
                K = max(K, r / (float(e) / rho) ** alpha)
    notes = []
    verified = dilated_ball_inside(ms, center, radius, f.n)
    if not verified:
        notes.append("3^(n+1)B leaves the declared domain: Federer/goodness hypotheses on the "
                     "dilated ball are unverified")
    return NondivergenceScan(
        map=f.describe(), measure=ms.describe(),
        ball={"center": [str(as_fraction(c)) for c in center], "radius": str(as_fraction(radius))},
        t_list=t_list, eps_grid=[str(e) for e in eps_grid], samples=samples, ratios=ratios,
        slopes=slopes, alpha_bound=alpha_bound, K=K, alpha_used=float(alpha), rho_used=float(rho),
        goodness=gdict, hypothesis_verified=verified, notes=notes)


def _below_pow2(h: Fraction, gamma: Fraction, t: int) -> bool:
    """h < 2^(-gamma t), exactly."""
    a, b = gamma.numerator * t, gamma.denominator
    return h ** b * Fraction(2) ** a < 1


class _TrajectoryJob:
    def __init__(self, t_max):
        self.t_max = t_max

    def __call__(self, y):
        return trajectory(y, self.t_max).heights


@dataclass
class BCSeries:
    v: str
    gamma: str
    gamma_threshold: str
    hypothesis_ok: bool
    t_max: int
    samples: int
    terms: list
    partial_sums: list
    tail_increment: float
    converged: bool
    growth_rate: float

    def to_json(self, **kw) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=str, **kw)


def borel_cantelli_series(f: MapSpec, ms: MeasureSampler, center, radius, v, gamma, t_max: int,
                          samples: int = 2000, *, threads: int = 1) -> BCSeries:
    """Partial sums of mu({x in B : lambda_1(g_t u_f(x)) < 2^(-gamma t)}) for t = 1..t_max."""
    v, gamma = as_fraction(v), as_fraction(gamma)
    thresh = gamma_of_v(f.n, v)
    ok = gamma > thresh
    if not ok:
        warnings.warn(f"gamma={gamma} <= gamma(v)={thresh}: the summability hypothesis fails",
                      HypothesisWarning, stacklevel=2)
    prec = default_precision(f.n, t_max)
    ys = ball_samples(f, ms, center, radius, samples, prec)
    heights = _pmap(_TrajectoryJob(t_max), ys, threads)
    terms = []
    for t in range(1, t_max + 1):
        terms.append(sum(1 for h in heights if _below_pow2(h[t], gamma, t)) / samples)
    sums = list(np.cumsum(terms).tolist())
    q = t_max - (t_max // 4)
    tail = sums[-1] - sums[q - 1]
    total = sums[-1]
    converged = tail < float(TAIL_TOL) * total if total > 0 else True
    growth = tail / max(t_max - q, 1)
    return BCSeries(str(v), str(gamma), str(thresh), ok, t_max, samples, terms, sums, tail,
                    converged, growth)


class _ExponentJob:
    def __init__(self, t_max, multiplicative, stride):
        self.t_max = t_max
        self.multiplicative = multiplicative
        self.stride = stride

    def __call__(self, y):
        rec = trajectory(y, self.t_max)
        out = [rec.omega_hat_sharp, math.nan]
        if self.multiplicative:
            # the diagonal (t,...,t) of the multiplicative walk is g_t, so match horizons
            m = multiplicative_trajectory(y, y.n * self.t_max, stride=self.stride)
            out[1] = m.omega_hat_sharp
        return out


@dataclass
class ExtremalityResult:
    n: int
    t_max: int
    samples: int
    omegas: list
    omegas_mult: list | None
    median: float
    median_mult: float | None
    histogram: dict
    margin: float
    fraction_exceeding: float
    min_omega: float

    def to_json(self, **kw) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=str, **kw)


def extremality_experiment(f: MapSpec, ms: MeasureSampler, center, radius, sample_count: int,
                           t_max: int, *, multiplicative: bool = False, stride: int = 10,
                           margin: float = 0.1, bins: int = 20, threads: int = 1) -> ExtremalityResult:
    """Per-sample finite-horizon exponents omega_hat_sharp (and omega_hat_x) over f_* mu."""
    n = f.n
    prec = default_precision(n, t_max)
    if multiplicative:
        prec = max(prec, 2 * n * t_max + 64)
    ys = ball_samples(f, ms, center, radius, sample_count, prec)
    res = _pmap(_ExponentJob(t_max, multiplicative, stride), ys, threads)
    om = [r[0] for r in res]
    fin = [x for x in om if math.isfinite(x)]
    counts, edges = np.histogram(fin, bins=bins) if fin else (np.zeros(0), np.zeros(0))
    mult = [r[1] for r in res] if multiplicative else None
    return ExtremalityResult(
        n=n, t_max=t_max, samples=sample_count, omegas=om, omegas_mult=mult,
        median=statistics.median(om), median_mult=statistics.median(mult) if mult else None,
        histogram={"counts": counts.astype(int).tolist(), "edges": edges.tolist()},
        margin=margin, fraction_exceeding=sum(1 for x in om if x > n + margin) / len(om),
        min_omega=min(om))
