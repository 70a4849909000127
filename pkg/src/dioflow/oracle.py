"""Dynamics-free ground truth for approximation exponents.

Everything here works directly with the linear form ``y.q + p`` and never
touches the lattice engine.  Scans choose p as the nearest integer to
``-y.q`` so only q is enumerated, and only one of each pair +-q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .core import INFINITY, BoxSpec, TargetVector, as_fraction, log2_fraction

DEFAULT_SMAX_LIMIT = {1: 24, 2: 12, 3: 8}
_LIMB = 60
_MASK = (1 << _LIMB) - 1
_CHUNK = 1 << 20


class BudgetError(RuntimeError):
    """An exhaustive scan would exceed the configured cost budget."""


def scan_cost(n: int, s_max: int) -> int:
    return (2 ** (s_max + 1) + 1) ** n


def check_budget(n: int, s_max: int, limit: int | None = None) -> None:
    if s_max < 0:
        raise ValueError("s_max must be non-negative")
    if limit is None:
        limit = DEFAULT_SMAX_LIMIT.get(n, 0)
    if s_max > limit:
        raise BudgetError(
            f"scan over |q| <= 2^{s_max} in dimension {n} costs ~{scan_cost(n, s_max):.3e} "
            f"evaluations (limit s_max={limit})")


def pi_plus(q: Sequence[int]) -> int:
    """Product of |q_i| over the nonzero coordinates (1 for q = 0)."""
    out = 1
    for x in q:
        if x:
            out *= abs(x)
    return out


def shell_of(norm: int) -> int:
    """Smallest s with norm <= 2^s."""
    return max(norm - 1, 0).bit_length()


class _Form:
    """Exact and fast approximate evaluation of |y.q + p| for a fixed y."""

    def __init__(self, y: TargetVector):
        self.y = y
        self.nums, self.scale = y.integer_numerators()
        P = self.scale
        self.one = 1 << P
        fr = [m % self.one for m in self.nums]
        # two 60-bit limbs of each fractional part
        if P >= 2 * _LIMB:
            hi = [f >> (P - _LIMB) for f in fr]
            lo = [(f >> (P - 2 * _LIMB)) & _MASK for f in fr]
        else:
            hi = [((f << (2 * _LIMB - P)) >> _LIMB) for f in fr]
            lo = [(f << (2 * _LIMB - P)) & _MASK for f in fr]
        self.hi = [np.uint64(h) for h in hi]
        self.lo = [l / 2.0 ** (2 * _LIMB) for l in lo]

    def exact(self, q: Sequence[int]) -> tuple[Fraction, int]:
        s = sum(a * int(b) for a, b in zip(self.nums, q))
        r = s % self.one
        if 2 * r <= self.one:
            dist, p = r, -((s - r) >> self.scale)
        else:
            dist, p = self.one - r, -((s - r + self.one) >> self.scale)
        return Fraction(dist, self.one), p

    def approx(self, cols: Sequence[np.ndarray]) -> np.ndarray:
        """Distance of y.q to the nearest integer, for q given column-wise."""
        acc = np.zeros(cols[0].shape, dtype=np.uint64)
        low = np.zeros(cols[0].shape, dtype=np.float64)
        with np.errstate(over="ignore"):
            for c, h, l in zip(cols, self.hi, self.lo):
                acc += c.astype(np.uint64) * h
                low += c.astype(np.float64) * l
        acc &= np.uint64(_MASK)
        d = acc.astype(np.int64)
        d = np.where(d >= (1 << (_LIMB - 1)), d - (1 << _LIMB), d)
        val = d.astype(np.float64) * 2.0 ** -_LIMB + low
        return np.abs(val - np.rint(val))

    def tolerance(self, Q: int) -> float:
        return self.y.n * Q * 2.0 ** -100


def _rows(n: int, Q: int) -> Iterator[tuple[int, ...]]:
    """Prefixes (q_1..q_{n-1}) in scan order, skipping those with a negative leading entry."""
    if n == 1:
        yield ()
        return

    def rec(prefix):
        if len(prefix) == n - 1:
            yield prefix
            return
        lead_zero = all(v == 0 for v in prefix)
        for x in range(0 if lead_zero else -Q, Q + 1):
            yield from rec(prefix + (x,))

    yield from rec(())


def _blocks(n: int, Q: int):
    """Blocks of q (one of each +-q, 0 < |q| <= Q) in a fixed scan order.

    Yields (columns, shell index per q, q_of(i)).
    """
    shell_tab = np.array([shell_of(x) for x in range(Q + 1)], dtype=np.int64)
    if n == 1:
        for start in range(1, Q + 1, _CHUNK):
            qs = np.arange(start, min(Q, start + _CHUNK - 1) + 1, dtype=np.int64)
            yield [qs], shell_tab[qs], (lambda i, qs=qs: (int(qs[i]),))
        return
    last = np.arange(-Q, Q + 1, dtype=np.int64)
    last_shell = shell_tab[np.abs(last)]
    for prefix in _rows(n, Q):
        pre_shell = max((shell_of(abs(x)) for x in prefix if x), default=0)
        if all(x == 0 for x in prefix):
            qn, ls = last[Q + 1:], last_shell[Q + 1:]
        else:
            qn, ls = last, last_shell
        cols = [np.full(qn.shape, x, dtype=np.int64) for x in prefix] + [qn]
        yield cols, np.maximum(ls, pre_shell), (lambda i, prefix=prefix, qn=qn: prefix + (int(qn[i]),))


def shell_minima(y: TargetVector, s_max: int, Q: int | None = None):
    """Exact min of |y.q + p| over each shell 2^(s-1) < |q| <= 2^s (s = 0: |q| = 1).

    ``Q`` (default 2^s_max) truncates the scan at |q| <= Q.  Returns per
    shell (distance, p, q), or None for an empty shell; ties keep the
    first q in scan order.
    """
    n = y.n
    if Q is None:
        Q = 1 << s_max
    form = _Form(y)
    tol = form.tolerance(Q)
    rel = 1 + 2.0 ** -40
    S = s_max + 1
    best: list = [None] * S
    best_f = np.full(S, np.inf)
    for cols, shells, q_of in _blocks(n, Q):
        dist = form.approx(cols)
        blockmin = np.full(S, np.inf)
        np.minimum.at(blockmin, shells, dist)
        for s in np.nonzero(blockmin <= best_f * rel + tol)[0]:
            if best[s] is not None and best[s][0] == 0:
                continue
            idx = np.nonzero((shells == s) & (dist <= blockmin[s] * rel + tol))[0]
            idx = idx[np.argsort(dist[idx], kind="stable")]
            for i in idx:
                if dist[i] > best_f[s] * rel + tol:
                    break
                q = q_of(i)
                d, p = form.exact(q)
                if best[s] is None or d < best[s][0]:
                    best[s] = (d, p, q)
                    best_f[s] = float(d)
                    if d == 0:
                        break
    return best


def scan_shells(y: TargetVector, Q: int) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    """Every q with 0 < |q| <= Q (one of each +-q) with its exact distance; pure Python."""
    form = _Form(y)
    n = y.n
    for prefix in _rows(n, Q):
        lead_zero = all(v == 0 for v in prefix)
        for x in range(1 if lead_zero else -Q, Q + 1):
            q = prefix + (x,)
            yield q, form.exact(q)[0]


@dataclass
class ApproxRow:
    s: int
    m: Fraction
    p: int
    q: tuple[int, ...]
    v_scale: float


@dataclass
class BestApproximationTable:
    y: TargetVector
    rows: list[ApproxRow]
    window: tuple[int, int]
    omega_oracle: float
    omega_scale_max: float
    mult_rows: list[ApproxRow] = field(default_factory=list)
    omega_mult_oracle: float | None = None

    def m(self, s: int) -> Fraction:
        return self.rows[s].m


def per_scale_exponent(m: Fraction, s: int) -> float:
    """Supremum of v with m < 2^(-vs)."""
    if s <= 0:
        return math.nan
    if m == 0:
        return INFINITY
    return -log2_fraction(m) / s


def oracle_window(s_max: int) -> tuple[int, int]:
    return max(1, -(-s_max // 2)), s_max


def slope_exponent(values: Sequence[float], scales: Sequence[int]) -> float:
    """Least-squares slope of -log2 m(s) against s."""
    if any(math.isinf(v) for v in values):
        return INFINITY
    x = np.asarray(scales, dtype=float)
    yv = np.asarray(values, dtype=float)
    x = x - x.mean()
    return float((x * (yv - yv.mean())).sum() / (x * x).sum())


def _cumulative(shells) -> list[tuple[Fraction, int, tuple[int, ...]]]:
    out = []
    cur = None
    for entry in shells:
        if cur is None or (entry is not None and entry[0] < cur[0]):
            cur = entry
        out.append(cur)
    return out


def best_approximations(y: TargetVector, s_max: int, *, budget: int | None = None) -> BestApproximationTable:
    """m(s) = min over 0 < |q| <= 2^s of |y.q + p| for s = 0..s_max, exactly."""
    check_budget(y.n, s_max, budget)
    cum = _cumulative(shell_minima(y, s_max))
    rows = []
    for s, (d, p, q) in enumerate(cum):
        rows.append(ApproxRow(s, d, p, q, per_scale_exponent(d, s)))
    lo, hi = oracle_window(s_max)
    tail = [r for r in rows if lo <= r.s <= hi]
    scale_max = max(r.v_scale for r in tail)
    if lo == hi:
        omega = tail[0].v_scale
    else:
        omega = slope_exponent([math.inf if r.m == 0 else -log2_fraction(r.m) for r in tail],
                               [r.s for r in tail])
    return BestApproximationTable(y=y, rows=rows, window=(lo, hi), omega_oracle=omega,
                                  omega_scale_max=scale_max)


def check_box_system(y: TargetVector, v, s: int, *, budget: int | None = None):
    """Does |y.q + p| < 2^(-vs) with 0 < |q| < 2^(s+1) have an integer solution?

    Returns (answer, witness (p, q) or None).  The answer comes from the
    exact minimum over the q-range; independently, the point u_y (p, q)
    of the minimizer is tested against the box B_{v,s}.  The two
    formulations must agree.
    """
    v = as_fraction(v)
    check_budget(y.n, s + 1, budget)
    box = BoxSpec(v, s, y.n)
    per_shell = shell_minima(y, s + 1, Q=(1 << (s + 1)) - 1)
    best = None
    for entry in per_shell:
        if entry is not None and (best is None or entry[0] < best[0]):
            best = entry
    d, p, q = best
    by_inequality = _below_pow2(d, -v * s)
    point = [y.linear_form(p, q)] + [Fraction(x) for x in q]
    by_box = box.contains(point)
    if by_inequality != by_box:
        raise AssertionError(f"inequality scan ({by_inequality}) and box test ({by_box}) disagree")
    return by_inequality, ((p, q) if by_inequality else None)


def _below_pow2(d: Fraction, exponent: Fraction) -> bool:
    """Exact test of d < 2^exponent for rational exponent."""
    if d == 0:
        return True
    e = Fraction(exponent)
    return d ** e.denominator < Fraction(2) ** e.numerator


def multiplicative_best(y: TargetVector, s_max: int, *, budget: int | None = None) -> BestApproximationTable:
    """Standard table plus multiplicative per-scale exponents.

    At scale s every q with |q| <= 2^s contributes
    ``n * log2(1/|y.q+p|) / max(log2 Pi_+(q), s)``.  Flooring the product
    at the scale keeps vectors with Pi_+(q) = 1 finite, and since
    Pi_+(q) <= 2^(ns) the per-scale value dominates the standard one.
    ``omega_mult_oracle`` adds the largest per-scale excess over the window
    to ``omega_oracle``.
    """
    table = best_approximations(y, s_max, budget=budget)
    n = y.n
    Q = 1 << s_max
    form = _Form(y)
    S = s_max + 1
    # best[s] = (value, q): max over |q| <= 2^s
    best_val = np.full(S, -np.inf)
    best_q: list = [None] * S
    for cols, shells, q_of in _blocks(n, Q):
        dist = form.approx(cols)
        with np.errstate(divide="ignore"):
            a = -np.log2(dist)
        logpi = np.zeros(dist.shape)
        for c in cols:
            ac = np.abs(c)
            logpi += np.where(ac > 0, np.log2(np.maximum(ac, 1)), 0.0)
        for s in range(int(shells.min()), S):
            mask = shells <= s
            if not mask.any():
                continue
            vals = np.where(mask, n * a / np.maximum(logpi, s if s > 0 else 1), -np.inf)
            i = int(np.argmax(vals))
            if vals[i] > best_val[s]:
                best_val[s] = vals[i]
                best_q[s] = q_of(i)
    rows = []
    for s in range(S):
        std = table.rows[s]
        q = best_q[s]
        d, p = form.exact(q)
        if s == 0:
            rows.append(ApproxRow(0, d, p, q, math.nan))
            continue
        val = INFINITY if d == 0 else n * -log2_fraction(d) / max(math.log2(pi_plus(q)), s)
        # the standard minimizer always qualifies; keeps v_mult >= v_scale exactly
        if std.v_scale >= val:
            val, d, p, q = std.v_scale, std.m, std.p, std.q
        rows.append(ApproxRow(s, d, p, q, val))
    lo, hi = table.window
    excess = max(r.v_scale - table.rows[r.s].v_scale if not math.isinf(r.v_scale) else INFINITY
                 for r in rows if lo <= r.s <= hi)
    table.mult_rows = rows
    table.omega_mult_oracle = table.omega_oracle + excess
    if not table.omega_mult_oracle >= table.omega_oracle:
        raise AssertionError("multiplicative exponent below the standard one")
    return table


@dataclass
class ContinuedFraction:
    """Partial quotients a_1..a_K of y in (0, 1) and convergent denominators."""

    y: Fraction
    partial_quotients: list[int]
    denominators: list[int]
    terminated: bool

    @property
    def is_rational(self) -> bool:
        return self.terminated


def cf_expand(y, K: int | None = None) -> ContinuedFraction:
    """Exact continued fraction of a rational/dyadic y, truncated for safety.

    Expansion stops after K quotients or once a convergent denominator
    would reach 2^(precision/2), beyond which quotients of the truncated
    input no longer reflect the real number it stands for.
    """
    if isinstance(y, TargetVector):
        if y.n != 1:
            raise ValueError("continued fractions need n = 1")
        prec = y.precision_bits
        x = y.fractions()[0]
    else:
        x = as_fraction(y)
        prec = 2 * x.denominator.bit_length()
    x -= math.floor(x)
    limit = 1 << (prec // 2)
    num, den = x.numerator, x.denominator
    a_list: list[int] = []
    q_list: list[int] = []
    q_prev, q_cur = 0, 1  # q_{-1}, q_0
    terminated = num == 0
    while num and (K is None or len(a_list) < K):
        a, r = divmod(den, num)
        q_next = a * q_cur + q_prev
        if q_next >= limit:
            break
        a_list.append(a)
        q_list.append(q_next)
        q_prev, q_cur = q_cur, q_next
        den, num = num, r
        if r == 0:
            terminated = True
    return ContinuedFraction(x, a_list, q_list, terminated)


def cf_exponent(cf: ContinuedFraction) -> float:
    """Tail-window max of log q_(k+1) / log q_k; inf for a terminating expansion."""
    if cf.terminated:
        return INFINITY
    qs = [q for q in cf.denominators if q > 1]
    if len(qs) < 3:
        raise ValueError("too few convergents for an exponent estimate")
    ratios = [math.log(qs[i + 1]) / math.log(qs[i]) for i in range(len(qs) - 1)]
    lo = len(ratios) // 2
    return max(ratios[lo:])
