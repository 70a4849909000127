"""Exact lattice reduction and first minima for small unimodular lattices.

A basis is stored as integer column vectors over a common denominator
``2**log2_denominator``; all reduction happens on the integer matrix, so
no rounding ever enters the lattice itself.  Enumeration uses floating
Gram-Schmidt data only to bound the search region (with a safety margin);
every candidate is re-evaluated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

DEFAULT_DELTA = Fraction(99, 100)
MAX_EXACT_DIM = 8
_RADIUS_SLACK = 1e-6


class DimensionError(ValueError):
    pass


def bareiss_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    a = [list(r) for r in rows]
    k = len(a)
    sign = 1
    prev = 1
    for i in range(k - 1):
        if a[i][i] == 0:
            for r in range(i + 1, k):
                if a[r][i] != 0:
                    a[i], a[r] = a[r], a[i]
                    sign = -sign
                    break
            else:
                return 0
        for r in range(i + 1, k):
            for c in range(i + 1, k):
                a[r][c] = (a[r][c] * a[i][i] - a[r][i] * a[i][c]) // prev
        prev = a[i][i]
    return sign * a[k - 1][k - 1]


@dataclass(frozen=True)
class LatticeBasis:
    """Columns ``vectors[j] / 2**log2_denominator`` spanning a unimodular lattice."""

    vectors: tuple[tuple[int, ...], ...]
    log2_denominator: int = 0

    def __post_init__(self):
        vecs = tuple(tuple(int(x) for x in v) for v in self.vectors)
        k = len(vecs)
        if k == 0 or any(len(v) != k for v in vecs):
            raise ValueError("basis must be k vectors of length k")
        object.__setattr__(self, "vectors", vecs)

    @property
    def dim(self) -> int:
        return len(self.vectors)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], check: bool = True) -> "LatticeBasis":
        """Build from rational columns whose denominators are powers of two."""
        fr = [[Fraction(x) for x in col] for col in columns]
        d = 0
        for col in fr:
            for x in col:
                den = x.denominator
                if den & (den - 1):
                    raise ValueError(f"denominator of {x} is not a power of two")
                d = max(d, den.bit_length() - 1)
        vecs = tuple(tuple(int(x * (1 << d)) for x in col) for col in fr)
        basis = cls(vecs, d).canonical()
        if check:
            basis.check_unimodular()
        return basis

    @classmethod
    def identity(cls, k: int) -> "LatticeBasis":
        return cls(tuple(tuple(int(i == j) for i in range(k)) for j in range(k)), 0)

    def columns(self) -> list[list[Fraction]]:
        den = 1 << self.log2_denominator
        return [[Fraction(x, den) for x in v] for v in self.vectors]

    def canonical(self) -> "LatticeBasis":
        """Strip common factors of two from the integer matrix."""
        d = self.log2_denominator
        if d == 0:
            return self
        acc = 0
        for v in self.vectors:
            for x in v:
                acc |= x
        if acc == 0:
            return self
        tz = min((acc & -acc).bit_length() - 1, d)
        if tz == 0:
            return self
        return LatticeBasis(tuple(tuple(x >> tz for x in v) for v in self.vectors), d - tz)

    def integer_determinant(self) -> int:
        return bareiss_det(self.vectors)

    def determinant(self) -> Fraction:
        return Fraction(self.integer_determinant(), 1 << (self.dim * self.log2_denominator))

    def check_unimodular(self) -> None:
        det = self.integer_determinant()
        if abs(det) != 1 << (self.dim * self.log2_denominator):
            raise ValueError(f"basis is not unimodular (det = {self.determinant()})")

    def scale_coordinates(self, exponents: Sequence[int]) -> "LatticeBasis":
        """Left-multiply by diag(2**e_0, ..., 2**e_{k-1}), exactly."""
        if len(exponents) != self.dim:
            raise DimensionError(f"expected {self.dim} exponents, got {len(exponents)}")
        lo = min(0, min(exponents))
        shifts = [e - lo for e in exponents]
        vecs = tuple(tuple(x << s for x, s in zip(v, shifts)) for v in self.vectors)
        return LatticeBasis(vecs, self.log2_denominator - lo).canonical()

    def sup_norm(self, j: int) -> Fraction:
        return Fraction(max(abs(x) for x in self.vectors[j]), 1 << self.log2_denominator)

    def float_vectors(self) -> list[list[float]]:
        den = 1 << self.log2_denominator
        return [[x / den for x in v] for v in self.vectors]


@dataclass(frozen=True)
class ShortVectorResult:
    vector: tuple[Fraction, ...]
    norm: Fraction
    coefficients: tuple[int, ...]
    exact: bool
    norm_kind: str = "sup"
    lower_bound: float = 0.0

    @property
    def sup_norm(self) -> Fraction:
        return max(abs(x) for x in self.vector)


def _dot(u, v) -> int:
    return sum(a * b for a, b in zip(u, v))


def _lll_integral(b: list[list[int]], delta: Fraction) -> tuple[list[list[int]], list[list[int]]]:
    """Integral LLL (fraction-free Gram-Schmidt); returns (basis, transform).

    ``transform[i]`` holds the coefficients of output vector i in the input.
    """
    n = len(b)
    b = [list(v) for v in b]
    h = [[int(i == j) for j in range(n)] for i in range(n)]
    if n == 1:
        return b, h
    a_num, a_den = delta.numerator, delta.denominator
    d = [0] * (n + 1)  # d[i+1] = Gram determinant of the first i+1 vectors; d[0] = 1
    lam = [[0] * n for _ in range(n)]
    d[0] = 1
    d[1] = _dot(b[0], b[0])
    if d[1] == 0:
        raise ValueError("zero basis vector")
    k, k_max = 1, 0

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            h[k] = [x - q * y for x, y in zip(h[k], h[l])]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swap(k):
        b[k], b[k - 1] = b[k - 1], b[k]
        h[k], h[k - 1] = h[k - 1], h[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lk = lam[k][k - 1]
        bb = (d[k - 1] * d[k + 1] + lk * lk) // d[k]
        for i in range(k + 1, k_max + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lk * t) // d[k]
            lam[i][k - 1] = (bb * t + lk * lam[i][k]) // d[k + 1]
        d[k] = bb

    while k < n:
        if k > k_max:
            k_max = k
            for j in range(k + 1):
                u = _dot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    if u == 0:
                        raise ValueError("basis vectors are linearly dependent")
                    d[k + 1] = u
        red(k, k - 1)
        lk = lam[k][k - 1]
        # Lovasz: d_{k+1} d_{k-1} >= delta d_k^2 - lam^2
        if a_den * (d[k + 1] * d[k - 1] + lk * lk) < a_num * d[k] * d[k]:
            swap(k)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b, h


def lll_transform(basis: LatticeBasis, delta: Fraction = DEFAULT_DELTA) -> tuple[LatticeBasis, list[list[int]]]:
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta < 1:
        raise ValueError("delta must lie in (1/4, 1)")
    vecs, transform = _lll_integral([list(v) for v in basis.vectors], delta)
    return LatticeBasis(tuple(tuple(v) for v in vecs), basis.log2_denominator), transform


def lll_reduce(basis: LatticeBasis, delta: Fraction = DEFAULT_DELTA) -> LatticeBasis:
    """delta-LLL-reduce ``basis``; the lattice and determinant are unchanged."""
    return lll_transform(basis, delta)[0]


def is_lll_reduced(basis: LatticeBasis, delta: Fraction = DEFAULT_DELTA) -> bool:
    """Exact check of size reduction and the Lovasz condition."""
    cols = [[Fraction(x) for x in v] for v in basis.vectors]
    k = len(cols)
    bstar: list[list[Fraction]] = []
    norms: list[Fraction] = []
    mu = [[Fraction(0)] * k for _ in range(k)]
    for i in range(k):
        v = list(cols[i])
        for j in range(i):
            mu[i][j] = sum(a * c for a, c in zip(cols[i], bstar[j])) / norms[j]
            v = [a - mu[i][j] * c for a, c in zip(v, bstar[j])]
        bstar.append(v)
        norms.append(sum(a * a for a in v))
    for i in range(k):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    for i in range(1, k):
        if norms[i] < (Fraction(delta) - mu[i][i - 1] ** 2) * norms[i - 1]:
            return False
    return True


def _ldexp_int(x: int, e: int) -> float:
    """x * 2**e as a float, without overflowing on huge integers."""
    if e >= 0:
        return float(x << e)
    return x / (1 << -e)


def _gram_schmidt_float(vecs: list[list[float]]) -> tuple[list[list[float]], list[float]]:
    k = len(vecs)
    bstar: list[list[float]] = []
    bn: list[float] = []
    mu = [[0.0] * k for _ in range(k)]
    for i in range(k):
        v = list(vecs[i])
        for j in range(i):
            mu[i][j] = sum(a * c for a, c in zip(vecs[i], bstar[j])) / bn[j]
            v = [a - mu[i][j] * c for a, c in zip(v, bstar[j])]
        bstar.append(v)
        bn.append(sum(a * a for a in v))
    return mu, bn


def _enumerate_shortest(basis: LatticeBasis, norm: str) -> tuple[tuple[int, ...], int | None]:
    """Exact shortest vector of a reduced basis (integer coefficients, integer norm key).

    For the sup norm the key is max|coordinate|; for the Euclidean norm it
    is the squared length, both in units of the common denominator.
    """
    ivecs = basis.vectors
    k = basis.dim

    def key(coeffs):
        v = [sum(c * ivecs[j][i] for j, c in enumerate(coeffs) if c) for i in range(k)]
        if norm == "sup":
            return max(abs(x) for x in v)
        return sum(x * x for x in v)

    best_coeffs = None
    best_key = None
    for j in range(k):
        e = tuple(int(i == j) for i in range(k))
        kk = key(e)
        if best_key is None or kk < best_key:
            best_key, best_coeffs = kk, e
    # float data normalized so the initial best vector has length ~1
    shift = best_key.bit_length() if norm == "sup" else (best_key.bit_length() + 1) // 2
    fvecs = [[_ldexp_int(x, -shift) for x in v] for v in ivecs]
    mu, bn = _gram_schmidt_float(fvecs)

    def radius2() -> float:
        # squared Euclidean radius enclosing every vector at least as short as the best
        if norm == "sup":
            b = _ldexp_int(best_key, -shift)
            r2 = b * b * k
        else:
            r2 = _ldexp_int(best_key, -2 * shift)
        return r2 * (1 + _RADIUS_SLACK)

    r2 = radius2()
    x = [0] * k
    centers = [0.0] * k
    partial = [0.0] * (k + 1)

    # iterative depth-first enumeration, top level first
    def recurse(level: int, all_zero_above: bool):
        nonlocal r2, best_key, best_coeffs
        c = -sum(mu[j][level] * x[j] for j in range(level + 1, k))
        rem = r2 - partial[level + 1]
        if rem < 0:
            return
        span = math.sqrt(rem / bn[level]) if bn[level] > 0 else 0.0
        lo = math.ceil(c - span - 1e-9)
        hi = math.floor(c + span + 1e-9)
        if all_zero_above:
            lo = max(lo, 0)
        for xi in range(lo, hi + 1):
            diff = xi - c
            p = partial[level + 1] + diff * diff * bn[level]
            if p > r2:
                continue
            x[level] = xi
            partial[level] = p
            if level == 0:
                if all_zero_above and xi == 0:
                    continue
                coeffs = tuple(x)
                kk = key(coeffs)
                if kk < best_key:
                    best_key, best_coeffs = kk, coeffs
                    r2 = radius2()
            else:
                recurse(level - 1, all_zero_above and xi == 0)
        x[level] = 0

    recurse(k - 1, True)
    return best_coeffs, best_key


def _vector_from(basis: LatticeBasis, coeffs: Sequence[int]) -> tuple[Fraction, ...]:
    den = 1 << basis.log2_denominator
    k = basis.dim
    return tuple(Fraction(sum(c * basis.vectors[j][i] for j, c in enumerate(coeffs) if c), den)
                 for i in range(k))


def shortest_vector(basis: LatticeBasis, mode: str = "exact", norm: str = "sup",
                    delta: Fraction = DEFAULT_DELTA, reduced: bool = False) -> ShortVectorResult:
    """First minimum of the lattice in the sup or Euclidean norm.

    ``mode='exact'`` enumerates inside the Euclidean ball guaranteed to
    contain the minimizer; ``mode='lll'`` returns the best reduced basis
    vector together with the LLL lower bound.  Coefficients are expressed
    in the *input* basis.
    """
    if norm not in ("sup", "euclidean"):
        raise ValueError(f"unknown norm {norm!r}")
    k = basis.dim
    if mode == "exact" and k > MAX_EXACT_DIM:
        raise DimensionError(f"exact enumeration limited to dim <= {MAX_EXACT_DIM}, got {k}")
    if reduced:
        red, transform = basis, [[int(i == j) for j in range(k)] for i in range(k)]
    else:
        red, transform = lll_transform(basis, delta)
    den = 1 << red.log2_denominator

    if mode == "lll":
        if norm == "sup":
            keys = [max(abs(x) for x in v) for v in red.vectors]
        else:
            keys = [sum(x * x for x in v) for v in red.vectors]
        j = min(range(k), key=lambda i: keys[i])
        coeffs_red = tuple(int(i == j) for i in range(k))
    elif mode == "exact":
        coeffs_red, _ = _enumerate_shortest(red, norm)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    vec = _vector_from(red, coeffs_red)
    if norm == "sup":
        value = max(abs(x) for x in vec)
    else:
        value = sum(x * x for x in vec)  # squared Euclidean length, kept exact
    coeffs_in = tuple(sum(c * transform[j][i] for j, c in enumerate(coeffs_red)) for i in range(k))
    b1 = math.sqrt(sum(x * x for x in red.float_vectors()[0]))
    bound = b1 / 2 ** ((k - 1) / 2)
    if norm == "sup":
        bound /= math.sqrt(k)
    return ShortVectorResult(vector=vec, norm=value, coefficients=coeffs_in,
                             exact=(mode == "exact"), norm_kind=norm, lower_bound=bound)


def first_minimum(basis: LatticeBasis, mode: str = "exact", delta: Fraction = DEFAULT_DELTA,
                  reduced: bool = False) -> ShortVectorResult:
    """Sup-norm first minimum; ``.norm`` is the exact value of lambda_1."""
    return shortest_vector(basis, mode=mode, norm="sup", delta=delta, reduced=reduced)


def in_omega_epsilon(basis: LatticeBasis, epsilon, mode: str = "exact") -> bool:
    """True iff the lattice has a nonzero vector of sup norm strictly below epsilon."""
    eps = Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    return first_minimum(basis, mode=mode).norm < eps


def random_unimodular(k: int, rng, steps: int = 12, bound: int = 3) -> LatticeBasis:
    """Random integer basis of Z^k (det +-1) built from elementary column operations."""
    cols = [[int(i == j) for i in range(k)] for j in range(k)]
    for _ in range(steps):
        i, j = rng.choice(k, size=2, replace=False)
        c = int(rng.integers(-bound, bound + 1))
        cols[i] = [a + c * b for a, b in zip(cols[i], cols[j])]
    perm = rng.permutation(k)
    cols = [cols[p] for p in perm]
    return LatticeBasis(tuple(tuple(c) for c in cols), 0)
