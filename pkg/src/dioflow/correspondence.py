"""Trajectories of u_y Z^(n+1) under the diagonal flow, and exponent estimates.

A lattice vector coming from integers (p, q) is
``g_t u_y (p, q) = (2^(nt) (p + y.q), 2^(-t) q)``, so small sup norms at
time t correspond to good approximations ``|y.q + p|`` with moderate ``q``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core import INFINITY, TargetVector, default_precision, log2_fraction, v_of_gamma
from .lattice import DEFAULT_DELTA, LatticeBasis, ShortVectorResult, first_minimum, lll_reduce


class PrecisionError(ValueError):
    """The dyadic precision of y cannot resolve the requested horizon."""


def build_u(y: TargetVector) -> LatticeBasis:
    """Basis of u_y Z^(n+1): columns e_0 and (y_j, e_j)."""
    nums, scale = y.integer_numerators()
    n = y.n
    one = 1 << scale
    cols = [tuple([one] + [0] * n)]
    for j in range(n):
        col = [0] * (n + 1)
        col[0] = nums[j]
        col[j + 1] = one
        cols.append(tuple(col))
    return LatticeBasis(tuple(cols), scale).canonical()


@dataclass(frozen=True)
class FlowSpec:
    """diag(2^(nt), 2^-t, ..., 2^-t) or diag(2^t, 2^-t_1, ..., 2^-t_n) with t = sum t_i."""

    n: int
    kind: str = "standard"
    t: int = 0
    t_vec: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind == "standard":
            if self.t < 0:
                raise ValueError("t must be non-negative")
        elif self.kind == "multiplicative":
            if self.t_vec is None or len(self.t_vec) != self.n or min(self.t_vec) < 0:
                raise ValueError("multiplicative flow needs n non-negative t_i")
            object.__setattr__(self, "t_vec", tuple(int(x) for x in self.t_vec))
            object.__setattr__(self, "t", sum(self.t_vec))
        else:
            raise ValueError(f"unknown flow kind {self.kind!r}")

    def exponents(self) -> list[int]:
        if self.kind == "standard":
            return [self.n * self.t] + [-self.t] * self.n
        return [self.t] + [-x for x in self.t_vec]


def apply_flow(basis: LatticeBasis, flow: FlowSpec) -> LatticeBasis:
    if flow.n + 1 != basis.dim:
        raise ValueError(f"flow for n={flow.n} cannot act on a rank-{basis.dim} lattice")
    return basis.scale_coordinates(flow.exponents())


def witness_pq(y: TargetVector, vector: Sequence[Fraction], flow: FlowSpec) -> tuple[int, tuple[int, ...]]:
    """Recover the integers (p, q) behind a vector of g u_y Z^(n+1)."""
    exps = flow.exponents()
    q = tuple(int(vector[i + 1] * Fraction(2) ** (-exps[i + 1])) for i in range(y.n))
    form = vector[0] * Fraction(2) ** (-exps[0])
    nums, s = y.integer_numerators()
    p = form - Fraction(sum(a * b for a, b in zip(nums, q)), 1 << s)
    return int(p), q


def tail_window(t_max: int) -> tuple[int, int]:
    return max(1, -(-t_max // 2)), t_max


@dataclass
class TrajectoryRecord:
    y: TargetVector
    schedule: list[int]
    heights: list[Fraction]
    witnesses: list[tuple[Fraction, ...]]
    window: tuple[int, int]
    flow_kind: str = "standard"
    t_vecs: list[tuple[int, ...]] | None = None
    gamma_hat: float = 0.0
    omega_hat_sharp: float = 0.0
    omega_hat_scaled: float = 0.0
    h_min: Fraction = Fraction(1)
    t_at_h_min: int = 0
    floor_hits: list[int] = field(default_factory=list)

    @property
    def log2_heights(self) -> list[float]:
        return [log2_fraction(h) for h in self.heights]

    def summary(self) -> dict:
        return {
            "n": self.y.n,
            "flow_kind": self.flow_kind,
            "t_max": self.schedule[-1] if self.schedule else 0,
            "window": list(self.window),
            "gamma_hat": self.gamma_hat,
            "omega_hat_sharp": _jsonable(self.omega_hat_sharp),
            "omega_hat_scaled": _jsonable(self.omega_hat_scaled),
            "h_min": str(self.h_min),
            "t_at_h_min": self.t_at_h_min,
        }


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def _rate(height: Fraction, t_total: int, n: int, multiplicative: bool) -> float:
    # multiplicative rates are normalized so g_(t,...,t) matches g_t
    r = -log2_fraction(height)
    return r * n / t_total if multiplicative else r / t_total


def _finalize(rec: TrajectoryRecord, totals: list[int]) -> TrajectoryRecord:
    n = rec.y.n
    lo, hi = rec.window
    mult = rec.flow_kind == "multiplicative"
    rates = [_rate(h, T, n, mult) for h, T in zip(rec.heights, totals) if lo <= T <= hi and T > 0]
    g = max(rates) if rates else 0.0
    rec.gamma_hat = g
    rec.omega_hat_sharp = v_of_gamma(n, max(g, 0.0), "sharp")
    rec.omega_hat_scaled = v_of_gamma(n, max(g, 0.0), "scaled")
    i = min(range(len(rec.heights)), key=lambda j: rec.heights[j])
    rec.h_min = rec.heights[i]
    rec.t_at_h_min = rec.schedule[i]
    return rec


def check_precision(y: TargetVector, t_max: int) -> None:
    need = default_precision(y.n, t_max)
    if y.precision_bits < need:
        raise PrecisionError(
            f"precision_bits={y.precision_bits} < (n+1)*t_max+64 = {need} for t_max={t_max}")


def _floor_hit(height: Fraction, y: TargetVector) -> bool:
    return height <= Fraction(1, 1 << y.precision_bits)


def trajectory(y: TargetVector, t_max: int, flow_kind: str = "standard", *,
               stride: int = 10, delta: Fraction = DEFAULT_DELTA,
               check: bool = True) -> TrajectoryRecord:
    """Exact first minima along the flow and the limsup-style rate fit.

    Standard flow: every integer t in [0, t_max].  Multiplicative flow:
    ``t_max`` bounds t = sum t_i; the grid is every t_vec with entries on
    a ``stride`` lattice plus the diagonal points (t, ..., t).
    """
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    if flow_kind == "multiplicative":
        return multiplicative_trajectory(y, t_max, stride=stride, delta=delta, check=check)
    if flow_kind != "standard":
        raise ValueError(f"unknown flow kind {flow_kind!r}")
    if check:
        check_precision(y, t_max)
    n = y.n
    basis = lll_reduce(build_u(y), delta)
    step = FlowSpec(n, "standard", 1)
    heights, witnesses, floor = [], [], []
    for t in range(t_max + 1):
        if t:
            basis = lll_reduce(apply_flow(basis, step), delta)
        res = first_minimum(basis, reduced=True)
        heights.append(res.norm)
        witnesses.append(res.vector)
        if _floor_hit(res.norm, y):
            floor.append(t)
    if check and floor:
        raise PrecisionError(f"heights reached the quantization floor at t={floor[:5]}")
    rec = TrajectoryRecord(y=y, schedule=list(range(t_max + 1)), heights=heights,
                           witnesses=witnesses, window=tail_window(t_max), floor_hits=floor)
    return _finalize(rec, rec.schedule)


def heights_at(y: TargetVector, t_list: Sequence[int], delta: Fraction = DEFAULT_DELTA) -> list[Fraction]:
    """lambda_1(g_t u_y Z^(n+1)) for an increasing list of times, reusing reductions."""
    n = y.n
    basis = lll_reduce(build_u(y), delta)
    cur = 0
    out = []
    for t in t_list:
        if t < cur:
            raise ValueError("t_list must be non-decreasing")
        if t > cur:
            basis = lll_reduce(apply_flow(basis, FlowSpec(n, "standard", t - cur)), delta)
            cur = t
        out.append(first_minimum(basis, reduced=True).norm)
    return out


def multiplicative_grid(n: int, t_max: int, stride: int) -> list[tuple[int, ...]]:
    """Stride lattice points of {sum t_i <= t_max} plus the diagonal, in walk order."""
    pts = set()
    for combo in itertools.product(range(0, t_max + 1, stride), repeat=n):
        if sum(combo) <= t_max:
            pts.add(combo)
    for t in range(t_max // n + 1):
        pts.add((t,) * n)
    return sorted(pts)


def multiplicative_trajectory(y: TargetVector, t_max: int, *, stride: int = 10,
                              delta: Fraction = DEFAULT_DELTA, check: bool = True) -> TrajectoryRecord:
    n = y.n
    if check:
        need = 2 * t_max + 64
        if y.precision_bits < need:
            raise PrecisionError(f"precision_bits={y.precision_bits} < 2*t_max+64 = {need}")
    grid = multiplicative_grid(n, t_max, stride)
    start = lll_reduce(build_u(y), delta)
    cache: dict[tuple[int, ...], LatticeBasis] = {(0,) * n: start}
    heights, witnesses, floor = [], [], []
    for tv in grid:
        basis = cache.get(tv)
        if basis is None:
            # nearest already reduced point that is componentwise below, preferring the last one
            prev = max((p for p in cache if all(a <= b for a, b in zip(p, tv))),
                       key=lambda p: (sum(p), p))
            diff = tuple(b - a for a, b in zip(prev, tv))
            basis = lll_reduce(apply_flow(cache[prev], FlowSpec(n, "multiplicative", t_vec=diff)), delta)
            cache[tv] = basis
        res = first_minimum(basis, reduced=True)
        heights.append(res.norm)
        witnesses.append(res.vector)
        if _floor_hit(res.norm, y):
            floor.append(sum(tv))
    if check and floor:
        raise PrecisionError("heights reached the quantization floor")
    totals = [sum(tv) for tv in grid]
    lo, hi = tail_window(t_max)
    rec = TrajectoryRecord(y=y, schedule=totals, heights=heights, witnesses=witnesses,
                           window=(lo, hi), flow_kind="multiplicative", t_vecs=grid,
                           floor_hits=floor)
    return _finalize(rec, totals)


@dataclass(frozen=True)
class BAVerdict:
    bounded: bool
    h_min: Fraction
    t_at_h_min: int
    epsilon0: Fraction


def detect_ba(record: TrajectoryRecord, epsilon0) -> BAVerdict:
    """Finite-horizon bounded-orbit test: every height stays at or above epsilon0."""
    eps = Fraction(epsilon0)
    return BAVerdict(record.h_min >= eps, record.h_min, record.t_at_h_min, eps)


def ba_constant_estimate(y: TargetVector, Q: int) -> Fraction:
    """min over 0 < |q| <= Q of |y.q + p| * |q|^n, by exhaustive scan."""
    from .oracle import scan_shells

    if Q < 1:
        raise ValueError("Q must be at least 1")
    n = y.n
    best = None
    for qs, dist in scan_shells(y, Q):
        val = dist * Fraction(max(abs(x) for x in qs)) ** n
        if best is None or val < best:
            best = val
            if best == 0:
                break
    return best


def exponent_estimates(record: TrajectoryRecord) -> dict:
    return {"gamma_hat": record.gamma_hat,
            "omega_hat_sharp": record.omega_hat_sharp,
            "omega_hat_scaled": record.omega_hat_scaled}
