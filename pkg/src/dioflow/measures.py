"""Samplers for the test measures and empirical checks of their regularity.

Two sample streams exist for every sampler.  ``sample`` returns exact
rational points (used to build target vectors), ``sample_array`` returns
float64 reference points (used for counting ball masses).  Both come from
Philox counter streams keyed by (seed, index), so any prefix of a stream is
reproducible on its own.
"""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm as _normal
from scipy.stats import qmc

from .core import as_fraction, parse_rational

KINDS = ("lebesgue_ball", "cantor", "ifs", "pushforward")
MAP_KINDS = ("veronese", "polynomial", "affine_embedding", "coordinatewise")

DEFAULT_REFERENCE_SIZE = 10 ** 6
DEFAULT_MIN_HITS = 50
DEFAULT_CANTOR_DEPTH = 64
DEFAULT_BITS = 64

_FLOAT_TAG = 1 << 63
_CENTER_TAG = 3 << 62
_FLOAT_CHUNK = 1 << 16
_FLOAT_DIGITS = 40  # ternary digits beyond float resolution are dropped


def _generator(seed: int, index: int) -> np.random.Generator:
    key = (seed & ((1 << 64) - 1)) | ((index & ((1 << 64) - 1)) << 64)
    return np.random.Generator(np.random.Philox(key=key))


# --------------------------------------------------------------------- maps

def _horner(coeffs: Sequence[Fraction], x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _horner_array(coeffs: Sequence[Fraction], x: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(x)
    for c in reversed(coeffs):
        acc = acc * x + float(c)
    return acc


@dataclass(frozen=True)
class MapSpec:
    """A map f from R^d to R^n with exact rational coefficients.

    polynomial: d = 1, ``coefficients[i]`` lists f_i's coefficients from the
    constant term up.  coordinatewise: d = n, f_i(x) = p_i(x_i).
    affine_embedding: ``matrix`` (n rows of d entries) and ``offset``.
    """

    kind: str
    d: int
    n: int
    coefficients: tuple[tuple[Fraction, ...], ...] = ()
    matrix: tuple[tuple[Fraction, ...], ...] = ()
    offset: tuple[Fraction, ...] = ()
    smoothness: int = 1

    def __post_init__(self):
        if self.kind not in MAP_KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.d < 1 or self.n < 1:
            raise ValueError("map dimensions must be positive")
        fr = lambda rows: tuple(tuple(as_fraction(c) for c in r) for r in rows)
        object.__setattr__(self, "coefficients", fr(self.coefficients))
        object.__setattr__(self, "matrix", fr(self.matrix))
        object.__setattr__(self, "offset", tuple(as_fraction(c) for c in self.offset))
        if self.kind in ("polynomial", "coordinatewise") and len(self.coefficients) != self.n:
            raise ValueError(f"{self.kind} map needs {self.n} coefficient lists")
        if self.kind == "polynomial" and self.d != 1:
            raise ValueError("polynomial maps are curves (d = 1)")
        if self.kind == "coordinatewise" and self.d != self.n:
            raise ValueError("coordinatewise maps need d = n")
        if self.kind == "veronese" and self.d != 1:
            raise ValueError("the Veronese curve has d = 1")
        if self.kind == "affine_embedding":
            if len(self.matrix) != self.n or any(len(r) != self.d for r in self.matrix):
                raise ValueError("affine matrix must be n x d")
            if len(self.offset) != self.n:
                raise ValueError("affine offset must have n entries")

    @classmethod
    def veronese(cls, n: int) -> "MapSpec":
        return cls("veronese", 1, n, smoothness=n)

    @classmethod
    def polynomial(cls, coefficients: Sequence[Sequence]) -> "MapSpec":
        deg = max(len(c) for c in coefficients) - 1
        return cls("polynomial", 1, len(coefficients), coefficients=tuple(map(tuple, coefficients)),
                   smoothness=max(deg, 1))

    @classmethod
    def affine(cls, matrix: Sequence[Sequence], offset: Sequence) -> "MapSpec":
        return cls("affine_embedding", len(matrix[0]), len(matrix), matrix=tuple(map(tuple, matrix)),
                   offset=tuple(offset))

    @classmethod
    def coordinatewise(cls, coefficients: Sequence[Sequence]) -> "MapSpec":
        n = len(coefficients)
        deg = max(len(c) for c in coefficients) - 1
        return cls("coordinatewise", n, n, coefficients=tuple(map(tuple, coefficients)),
                   smoothness=max(deg, 1))

    def apply(self, x: Sequence) -> tuple[Fraction, ...]:
        """Exact image of a rational point."""
        x = tuple(as_fraction(c) for c in x)
        if len(x) != self.d:
            raise ValueError(f"expected a point of R^{self.d}")
        if self.kind == "veronese":
            return tuple(x[0] ** k for k in range(1, self.n + 1))
        if self.kind == "polynomial":
            return tuple(_horner(c, x[0]) for c in self.coefficients)
        if self.kind == "coordinatewise":
            return tuple(_horner(c, xi) for c, xi in zip(self.coefficients, x))
        return tuple(sum((a * b for a, b in zip(row, x)), Fraction(0)) + o
                     for row, o in zip(self.matrix, self.offset))

    def apply_array(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(len(X), self.d)
        if self.kind == "veronese":
            return np.stack([X[:, 0] ** k for k in range(1, self.n + 1)], axis=1)
        if self.kind == "polynomial":
            return np.stack([_horner_array(c, X[:, 0]) for c in self.coefficients], axis=1)
        if self.kind == "coordinatewise":
            return np.stack([_horner_array(c, X[:, i]) for i, c in enumerate(self.coefficients)], axis=1)
        A = np.array([[float(a) for a in r] for r in self.matrix])
        b = np.array([float(o) for o in self.offset])
        return X @ A.T + b

    def describe(self) -> dict:
        out = {"kind": self.kind, "d": self.d, "n": self.n, "smoothness": self.smoothness}
        if self.coefficients:
            out["coefficients"] = [[str(c) for c in r] for r in self.coefficients]
        if self.matrix:
            out["matrix"] = [[str(c) for c in r] for r in self.matrix]
            out["offset"] = [str(c) for c in self.offset]
        return out


# ----------------------------------------------------------------- samplers

@dataclass(frozen=True)
class Similarity:
    """x -> ratio * x + shift."""

    ratio: Fraction
    shift: tuple[Fraction, ...]


@dataclass(frozen=True)
class MeasureSampler:
    kind: str
    d: int
    n: int
    seed: int = 0
    center: tuple[Fraction, ...] = ()
    radius: Fraction = Fraction(0)
    maps: tuple[Similarity, ...] = ()
    weights: tuple[Fraction, ...] = ()
    depth: int = DEFAULT_CANTOR_DEPTH
    bits: int = DEFAULT_BITS
    base: "MeasureSampler | None" = None
    map: MapSpec | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.kind == "lebesgue_ball":
            if len(self.center) != self.d or self.radius <= 0:
                raise ValueError("Lebesgue ball needs a center in R^d and a positive radius")
        if self.kind in ("cantor", "ifs"):
            if not self.maps or len(self.weights) != len(self.maps):
                raise ValueError("IFS needs maps and one weight per map")
            if any(w < 0 for w in self.weights) or sum(self.weights) != 1:
                raise ValueError("IFS weights must be non-negative and sum to 1")
            if any(not 0 <= m.ratio < 1 for m in self.maps):
                raise ValueError("IFS ratios must lie in [0, 1)")
            if self.depth < 1:
                raise ValueError("depth must be positive")
        if self.kind == "pushforward":
            if self.base is None or self.map is None:
                raise ValueError("pushforward needs a base measure and a map")
            if self.map.d != self.base.n:
                raise ValueError("map domain does not match the base measure")

    # constructors
    @classmethod
    def lebesgue(cls, center: Sequence, radius, seed: int = 0, bits: int = DEFAULT_BITS) -> "MeasureSampler":
        """Normalized Lebesgue measure on the sup-norm ball (a cube) around ``center``."""
        c = tuple(as_fraction(x) for x in center)
        return cls("lebesgue_ball", len(c), len(c), seed, center=c, radius=as_fraction(radius), bits=bits)

    @classmethod
    def interval(cls, lo, hi, seed: int = 0, bits: int = DEFAULT_BITS, d: int = 1) -> "MeasureSampler":
        lo, hi = as_fraction(lo), as_fraction(hi)
        if hi <= lo:
            raise ValueError("empty interval")
        return cls.lebesgue(((lo + hi) / 2,) * d, (hi - lo) / 2, seed, bits)

    @classmethod
    def cantor(cls, depth: int = DEFAULT_CANTOR_DEPTH, seed: int = 0) -> "MeasureSampler":
        maps = (Similarity(Fraction(1, 3), (Fraction(0),)), Similarity(Fraction(1, 3), (Fraction(2, 3),)))
        return cls("cantor", 1, 1, seed, maps=maps, weights=(Fraction(1, 2),) * 2, depth=depth)

    @classmethod
    def ifs(cls, maps: Sequence[Similarity], weights: Sequence, depth: int = DEFAULT_CANTOR_DEPTH,
            seed: int = 0) -> "MeasureSampler":
        d = len(maps[0].shift)
        return cls("ifs", d, d, seed, maps=tuple(maps), weights=tuple(as_fraction(w) for w in weights),
                   depth=depth)

    @classmethod
    def pushforward(cls, base: "MeasureSampler", f: MapSpec) -> "MeasureSampler":
        return cls("pushforward", base.d, f.n, base.seed, base=base, map=f)

    def with_seed(self, seed: int) -> "MeasureSampler":
        from dataclasses import replace

        base = self.base.with_seed(seed) if self.base is not None else None
        return replace(self, seed=seed, base=base)

    def with_resolution(self, bits: int) -> "MeasureSampler":
        """Raise Lebesgue bits / IFS depth so exact samples resolve 2^-bits."""
        from dataclasses import replace

        if self.kind == "lebesgue_ball":
            return replace(self, bits=max(self.bits, bits))
        if self.kind in ("cantor", "ifs"):
            r = max(m.ratio for m in self.maps)
            need = math.ceil(bits / -math.log2(r)) + 2 if r > 0 else 1
            return replace(self, depth=max(self.depth, need))
        return replace(self, base=self.base.with_resolution(bits))

    # geometry
    def domain(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Axis box that must contain 3B in the Federer check (None: all of R^n)."""
        if self.kind == "lebesgue_ball":
            c = np.array([float(x) for x in self.center])
            r = float(self.radius)
            return c - r, c + r
        return None

    def describe(self) -> dict:
        out = {"kind": self.kind, "d": self.d, "n": self.n, "seed": self.seed}
        if self.kind == "lebesgue_ball":
            out.update(center=[str(c) for c in self.center], radius=str(self.radius), bits=self.bits)
        elif self.kind in ("cantor", "ifs"):
            out.update(depth=self.depth, weights=[str(w) for w in self.weights],
                       maps=[{"ratio": str(m.ratio), "shift": [str(s) for s in m.shift]} for m in self.maps])
        else:
            out.update(base=self.base.describe(), map=self.map.describe())
        return out

    # exact sampling
    def _choices(self, rng: np.random.Generator, size) -> np.ndarray:
        if len(self.maps) == 1:
            return np.zeros(size, dtype=np.int64)
        # integer weights keep the draw exact: pick k uniform below the common denominator
        den = math.lcm(*(w.denominator for w in self.weights))
        cuts = np.cumsum([int(w * den) for w in self.weights])
        k = rng.integers(0, den, size=size)
        return np.searchsorted(cuts, k, side="right")

    def _ifs_point(self, idx: Sequence[int]) -> tuple[Fraction, ...]:
        x = (Fraction(0),) * self.d
        for i in reversed(idx):
            m = self.maps[i]
            x = tuple(m.ratio * xi + si for xi, si in zip(x, m.shift))
        return x

    def point(self, index: int) -> tuple[Fraction, ...]:
        """The ``index``-th exact sample."""
        if self.kind == "pushforward":
            return self.map.apply(self.base.point(index))
        rng = _generator(self.seed, index)
        if self.kind == "lebesgue_ball":
            out = []
            for c in self.center:
                k = int.from_bytes(rng.bytes((self.bits + 7) // 8), "little") & ((1 << self.bits) - 1)
                out.append(c - self.radius + 2 * self.radius * Fraction(k, 1 << self.bits))
            return tuple(out)
        return self._ifs_point(self._choices(rng, self.depth).tolist())

    # float reference sampling
    def _chunk(self, j: int, size: int) -> np.ndarray:
        if self.kind == "pushforward":
            return self.map.apply_array(self.base._chunk(j, size))
        rng = _generator(self.seed, _FLOAT_TAG + j)
        if self.kind == "lebesgue_ball":
            c = np.array([float(x) for x in self.center])
            return c - float(self.radius) + 2 * float(self.radius) * rng.random((size, self.d))
        depth = min(self.depth, _FLOAT_DIGITS)
        idx = self._choices(rng, (size, depth))
        ratios = np.array([float(m.ratio) for m in self.maps])
        shifts = np.array([[float(s) for s in m.shift] for m in self.maps])
        x = np.zeros((size, self.d))
        for k in range(depth - 1, -1, -1):
            col = idx[:, k]
            x = ratios[col][:, None] * x + shifts[col]
        return x

    def sample_array(self, count: int) -> np.ndarray:
        chunks, j = [], 0
        while count > 0:
            m = min(count, _FLOAT_CHUNK)
            chunks.append(self._chunk(j, _FLOAT_CHUNK)[:m])
            count -= m
            j += 1
        return np.concatenate(chunks) if chunks else np.zeros((0, self.n))

    def centers(self, count: int) -> np.ndarray:
        """Support points for ball centers, from a stream disjoint from the reference sample."""
        return self.with_seed(self.seed ^ _CENTER_TAG).sample_array(count)


def sample(ms: MeasureSampler, count: int, start: int = 0) -> list[tuple[Fraction, ...]]:
    """``count`` exact i.i.d. draws (indices start, start+1, ...)."""
    if count < 1:
        raise ValueError("count must be at least 1")
    return [ms.point(i) for i in range(start, start + count)]


def cantor_point(digits: Sequence[int]) -> Fraction:
    """sum a_k 3^-k for ternary digits a_k."""
    x = Fraction(0)
    for a in reversed(digits):
        x = (x + a) / 3
    return x


def ternary_digits(x: Fraction, depth: int) -> list[int]:
    out = []
    for _ in range(depth):
        x *= 3
        a = int(x)
        out.append(a)
        x -= a
    return out


# ------------------------------------------------------------------ parsing

def _nums(text: str) -> list[Fraction]:
    return [parse_rational(t) for t in text.split(",") if t.strip()]


def parse_map(text: str) -> MapSpec:
    """veronese:N | poly:c0,c1,..|c0,c1,.. | affine:a1,..;b1,.. | coordinatewise:..|.."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind == "veronese":
        return MapSpec.veronese(int(rest))
    if kind in ("poly", "polynomial"):
        return MapSpec.polynomial([_nums(p) for p in rest.split("|")])
    if kind in ("coordinatewise", "coord"):
        return MapSpec.coordinatewise([_nums(p) for p in rest.split("|")])
    if kind in ("affine", "affine_embedding"):
        rows, _, off = rest.partition(";")
        matrix = [_nums(r) for r in rows.split("|")]
        if len(matrix) == 1 and len(matrix[0]) > 1:
            # a single list is a curve x -> (a_1 x, ..., a_n x) + b
            matrix = [[a] for a in matrix[0]]
        offset = _nums(off) if off else [Fraction(0)] * len(matrix)
        return MapSpec.affine(matrix, offset)
    raise ValueError(f"unknown map spec {text!r}")


def parse_measure(text: str, seed: int = 0) -> MeasureSampler:
    """lebesgue:LO,HI[,d=D] | cantor[:DEPTH] | ifs:r=..;b=..;w=.."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind in ("lebesgue", "lebesgue_ball"):
        parts = [p.strip() for p in rest.split(",")]
        d = 1
        if parts and parts[-1].startswith("d="):
            d = int(parts.pop()[2:])
        if len(parts) != 2:
            raise ValueError("lebesgue needs LO,HI")
        return MeasureSampler.interval(parse_rational(parts[0]), parse_rational(parts[1]), seed, d=d)
    if kind == "cantor":
        return MeasureSampler.cantor(int(rest) if rest else DEFAULT_CANTOR_DEPTH, seed)
    if kind == "ifs":
        fields = dict(p.split("=", 1) for p in rest.split(";"))
        ratios = _nums(fields["r"])
        shifts = _nums(fields["b"])
        weights = _nums(fields.get("w", ",".join("1/%d" % len(shifts) for _ in shifts)))
        if len(ratios) == 1:
            ratios = ratios * len(shifts)
        maps = [Similarity(r, (b,)) for r, b in zip(ratios, shifts)]
        return MeasureSampler.ifs(maps, weights, int(fields.get("depth", DEFAULT_CANTOR_DEPTH)), seed)
    raise ValueError(f"unknown measure spec {text!r}")


def measure_from_config(section: Mapping[str, str]) -> MeasureSampler:
    """Build a sampler from a key-value section (measure=..., map=..., seed=..., depth=...)."""
    seed = int(section.get("seed", "0"))
    ms = parse_measure(section["measure"], seed)
    if "depth" in section and ms.kind in ("cantor", "ifs"):
        from dataclasses import replace

        ms = replace(ms, depth=int(section["depth"]))
    if "bits" in section and ms.kind == "lebesgue_ball":
        from dataclasses import replace

        ms = replace(ms, bits=int(section["bits"]))
    if section.get("map"):
        ms = MeasureSampler.pushforward(ms, parse_map(section["map"]))
    return ms


def read_config(text: str, section: str = "measure") -> MeasureSampler:
    cp = configparser.ConfigParser()
    cp.read_string(text)
    return measure_from_config(cp[section])


# ------------------------------------------------------------------ reports

@dataclass
class PropertyReport:
    property: str
    constants: dict
    trials: int
    discarded: int
    census: list = field(default_factory=list)
    passed: bool = True
    thresholds: dict = field(default_factory=dict)

    def to_json(self, **kw) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=str, **kw)


def sphere_census(dim: int, count: int) -> np.ndarray:
    """Deterministic, roughly uniform unit vectors in R^dim (antipodes identified)."""
    if dim == 1:
        return np.ones((1, 1))
    if dim == 2:
        th = math.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    pts = qmc.Halton(d=dim, scramble=False).random(count + 1)[1:]
    z = _normal.ppf(pts)
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _slope(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(x, y, 1)[0])


def _inside(points: np.ndarray, box, margin: float) -> np.ndarray:
    if box is None:
        return np.ones(len(points), dtype=bool)
    lo, hi = box
    return np.all((points - margin >= lo) & (points + margin <= hi), axis=1)


def _default_radii(ms: MeasureSampler, ref: np.ndarray, kind: str) -> list[float]:
    if ms.kind == "cantor":
        top = 0 if kind == "scaling" else 1
        bottom = 7 if kind == "scaling" else 5
        return [3.0 ** -j for j in range(top, bottom + 1)]
    extent = float(np.max(np.ptp(ref, axis=0))) or 1.0
    if kind == "scaling":
        return list(extent / 4 * np.logspace(0, -3, 10))
    if kind == "federer":
        return [extent / 8, extent / 12, extent / 20]
    return [extent / 8]


class _Reference:
    def __init__(self, ms: MeasureSampler, size: int, p: float):
        self.pts = ms.sample_array(size)
        self.tree = cKDTree(self.pts)
        self.size = size
        self.p = p

    def counts(self, centers: np.ndarray, r: float) -> np.ndarray:
        if len(centers) == 0:
            return np.zeros(0, dtype=int)
        return np.asarray(self.tree.query_ball_point(centers, r, p=self.p, return_length=True))

    def ball(self, center: np.ndarray, r: float) -> np.ndarray:
        return self.pts[self.tree.query_ball_point(center, r, p=self.p)]


def _pick_centers(ms, trials, margin_fn):
    pool = ms.centers(max(16 * trials, 1024))
    box = ms.domain()
    out = []
    for i, c in enumerate(pool):
        if _inside(c[None, :], box, margin_fn(len(out)))[0]:
            out.append(c)
            if len(out) == trials:
                break
    if len(out) < trials:
        raise ValueError("could not place enough balls inside the declared domain")
    return np.array(out)


def check_federer(ms: MeasureSampler, trials: int = 100, radii: Sequence[float] | None = None,
                  reference_size: int = DEFAULT_REFERENCE_SIZE, min_hits: int = DEFAULT_MIN_HITS,
                  threshold: float | None = None, p: float = 2.0) -> PropertyReport:
    """Largest empirical mu(3B)/mu(B) over balls centered on the support."""
    ref = _Reference(ms, reference_size, p)
    radii = list(radii) if radii else _default_radii(ms, ref.pts, "federer")
    rad = [radii[i % len(radii)] for i in range(trials)]
    centers = _pick_centers(ms, trials, lambda i: 3 * rad[i])
    census, discarded = [], 0
    for r in sorted(set(rad)):
        sel = [i for i in range(trials) if rad[i] == r]
        small = ref.counts(centers[sel], r)
        big = ref.counts(centers[sel], 3 * r)
        for i, a, b in zip(sel, small, big):
            if a < min_hits:
                discarded += 1
                continue
            census.append({"trial": i, "center": centers[i].tolist(), "radius": r,
                           "hits": int(a), "ratio": float(b / a)})
    census.sort(key=lambda e: e["trial"])
    D = max((e["ratio"] for e in census), default=math.nan)
    passed = bool(census) and (threshold is None or D <= threshold)
    return PropertyReport("federer", {"D_hat": float(D)}, trials, discarded, census, passed,
                          {"D_max": threshold, "min_hits": min_hits, "reference_size": reference_size})


def _tangent_normal(points: np.ndarray) -> np.ndarray | None:
    if len(points) <= points.shape[1] or points.shape[1] < 2:
        return None
    _, _, vt = np.linalg.svd(points - points.mean(axis=0), full_matrices=False)
    return vt[-1]


def check_abs_decay(ms: MeasureSampler, trials: int = 50, eps_grid: Sequence[float] | None = None,
                    radius: float | None = None, normals: int = 64,
                    reference_size: int = DEFAULT_REFERENCE_SIZE, min_hits: int = DEFAULT_MIN_HITS,
                    threshold: float = 0.05) -> PropertyReport:
    """Fit mu(B cap L^(eps r))/mu(B) ~ C eps^alpha over balls and hyperplanes through their centers.

    The normal census is a deterministic sphere census plus, for each ball,
    the direction of least spread of the support inside it.
    """
    ref = _Reference(ms, reference_size, 2.0)
    r = radius if radius is not None else _default_radii(ms, ref.pts, "decay")[0]
    eta = np.array(eps_grid if eps_grid is not None else [2.0 ** -k for k in range(1, 9)], dtype=float)
    census_normals = sphere_census(ms.n, normals)
    centers = _pick_centers(ms, trials, lambda i: r)
    census, discarded = [], 0
    alphas = []
    for i, c in enumerate(centers):
        pts = ref.ball(c, r)
        if len(pts) < min_hits:
            discarded += 1
            continue
        us = census_normals
        t = _tangent_normal(pts)
        if t is not None:
            us = np.vstack([us, t])
        dist = np.sort(np.abs((pts - c) @ us.T), axis=0)
        for k, u in enumerate(us):
            hits = np.searchsorted(dist[:, k], eta * r, side="left")
            ok = hits >= min_hits
            if ok.sum() < 2:
                continue
            ratio = hits / len(pts)
            a = _slope(np.log(eta[ok]), np.log(ratio[ok]))
            alphas.append(a)
            census.append({"trial": i, "center": c.tolist(), "radius": r, "normal": u.tolist(),
                           "tangent": bool(t is not None and k == len(us) - 1),
                           "alpha": a, "eta": eta[ok].tolist(), "ratio": ratio[ok].tolist()})
    alpha = min(alphas) if alphas else math.nan
    C = max((max(q / e ** alpha for e, q in zip(rec["eta"], rec["ratio"])) for rec in census),
            default=math.nan)
    passed = bool(alphas) and alpha >= threshold
    return PropertyReport("abs_decay", {"C_hat": C, "alpha_hat": alpha}, trials, discarded, census, passed,
                          {"alpha_min": threshold, "min_hits": min_hits, "reference_size": reference_size})


def check_scaling(ms: MeasureSampler, trials: int = 50, radii: Sequence[float] | None = None,
                  reference_size: int = DEFAULT_REFERENCE_SIZE, min_hits: int = DEFAULT_MIN_HITS,
                  threshold: float | None = None) -> PropertyReport:
    """Fit mu(B(x, r)) <= c r^beta: beta_hat is the smallest log-log slope over centers."""
    ref = _Reference(ms, reference_size, 2.0)
    radii = sorted(radii if radii else _default_radii(ms, ref.pts, "scaling"), reverse=True)
    if radii[0] / radii[-1] < 1e3:
        raise ValueError("the radius grid must span at least three orders of magnitude")
    box = ms.domain()
    centers = _pick_centers(ms, trials, lambda i: radii[0] if box is not None else 0.0)
    mass = np.stack([ref.counts(centers, r) for r in radii], axis=1) / reference_size
    hits = mass * reference_size
    lr = np.log(np.array(radii))
    census, betas, discarded = [], [], 0
    for i in range(trials):
        ok = hits[i] >= min_hits
        if ok.sum() < 2:
            discarded += 1
            continue
        b = _slope(lr[ok], np.log(mass[i, ok]))
        betas.append(b)
        census.append({"trial": i, "center": centers[i].tolist(), "beta": b,
                       "radii": np.array(radii)[ok].tolist(), "mass": mass[i, ok].tolist()})
    beta = min(betas) if betas else math.nan
    c = max((max(m / r ** beta for r, m in zip(e["radii"], e["mass"])) for e in census), default=math.nan)
    passed = bool(betas) and (threshold is None or beta >= threshold)
    return PropertyReport("scaling", {"c_hat": c, "beta_hat": beta}, trials, discarded, census, passed,
                          {"beta_min": threshold, "min_hits": min_hits, "reference_size": reference_size})
