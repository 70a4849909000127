"""Empirical (C, alpha)-good constants and the nonplanarity rank test.

For a map f and coefficients c we look at f_c = c_0 + sum c_i f_i on balls
B' and record the sublevel ratios mu({|f_c| < eta sup_B' |f_c|}) / mu(B').
Thresholds are relative to the sup norm, so rescaling c changes nothing.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .measures import MapSpec, MeasureSampler, sphere_census

DEFAULT_CENSUS = 256
DEFAULT_SV_TOL = 1e-8
DEFAULT_ETA = tuple(2.0 ** -k for k in range(1, 11))


@dataclass
class GoodnessReport:
    map: dict
    measure: dict
    ball: dict
    C_hat: float
    alpha_hat: float
    rho_hat: float
    worst_c: list
    worst_ball: dict
    census_size: int
    subballs: list
    degenerate: list = field(default_factory=list)
    trials: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.rho_hat > 0 and not self.degenerate and self.alpha_hat > 0

    def to_json(self, with_trials: bool = False, **kw) -> str:
        d = asdict(self)
        if not with_trials:
            d.pop("trials")
        d["passed"] = self.passed
        return json.dumps(d, sort_keys=True, default=str, **kw)


def _support_in_ball(ms: MeasureSampler, center: np.ndarray, radius: float, size: int) -> np.ndarray:
    """Reference points of the base measure lying in the sup-norm ball."""
    X = ms.sample_array(size)
    keep = np.all(np.abs(X - center) < radius, axis=1)
    return X[keep]


def coefficient_census(n: int, census) -> np.ndarray:
    if isinstance(census, int):
        return sphere_census(n + 1, census)
    C = np.atleast_2d(np.asarray(census, dtype=float))
    if C.shape[1] != n + 1:
        raise ValueError(f"coefficient vectors must have {n + 1} entries")
    return C


def _design(f: MapSpec, X: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((len(X), 1)), f.apply_array(X)])


def check_good(f: MapSpec, ms: MeasureSampler, center: Sequence[float], radius: float,
               eps_grid: Sequence[float] = DEFAULT_ETA, coeff_census=DEFAULT_CENSUS,
               subballs: int = 8, reference_size: int = 20000, min_hits: int = 20,
               seed_offset: int = 0) -> GoodnessReport:
    """Census of sublevel ratios for f_c on B and on sub-balls centered at support points.

    ``ms`` is the measure on the domain R^d; balls are sup-norm balls there.
    alpha_hat is the smallest per-(c, B') least-squares slope of log ratio
    against log eta; C_hat the smallest constant with ratio <= C eta^alpha_hat
    on every recorded point.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if len(center) != f.d or ms.n != f.d:
        raise ValueError("ball, measure and map dimensions disagree")
    eta = np.asarray(sorted(eps_grid, reverse=True), dtype=float)
    if np.any(eta <= 0):
        raise ValueError("eps grid must be positive")
    X = _support_in_ball(ms, center, radius, reference_size)
    if len(X) < f.n + 1:
        raise ValueError("ball contains too few support samples")
    C = coefficient_census(f.n, coeff_census)
    M = _design(f, X)

    balls = [(center, float(radius))]
    # sub-balls: centers from the support inside B, radii shrinking so B' stays inside B
    for k in range(subballs):
        c = X[(k * 7919 + seed_offset) % len(X)]
        room = radius - float(np.max(np.abs(c - center)))
        r = room * (0.5 ** (k % 3))
        if r > 0:
            balls.append((c, r))

    trials, degenerate = [], []
    rho = math.inf
    worst = (math.inf, None, None)
    for b, (bc, br) in enumerate(balls):
        inside = np.all(np.abs(X - bc) < br, axis=1)
        m = int(inside.sum())
        if m < max(min_hits, f.n + 1):
            continue
        vals = np.abs(M[inside] @ C.T)
        sup = vals.max(axis=0)
        scale = np.abs(M[inside]).max() * np.abs(C).max(axis=1)
        srt = np.sort(vals, axis=0)
        for j in range(len(C)):
            if sup[j] <= 1e-12 * scale[j]:
                degenerate.append({"c": C[j].tolist(), "ball": b})
                continue
            if b == 0:
                rho = min(rho, float(sup[j]))
            hits = np.searchsorted(srt[:, j], eta * sup[j], side="left")
            ok = hits >= min_hits
            if ok.sum() < 2:
                continue
            ratio = hits[ok] / m
            a = float(np.polyfit(np.log(eta[ok]), np.log(ratio), 1)[0])
            trials.append({"c": C[j].tolist(), "ball": b, "alpha": a,
                           "eta": eta[ok].tolist(), "ratio": ratio.tolist(), "sup": float(sup[j])})
            if a < worst[0]:
                worst = (a, C[j].tolist(), b)
    alpha = worst[0] if trials else math.nan
    C_hat = max((max(q / e ** alpha for e, q in zip(t["eta"], t["ratio"])) for t in trials), default=math.nan)
    wb = balls[worst[2]] if worst[2] is not None else balls[0]
    return GoodnessReport(
        map=f.describe(), measure=ms.describe(),
        ball={"center": center.tolist(), "radius": float(radius)},
        C_hat=float(C_hat), alpha_hat=float(alpha), rho_hat=float(rho if rho < math.inf else 0.0),
        worst_c=worst[1] or [], worst_ball={"center": np.asarray(wb[0]).tolist(), "radius": wb[1]},
        census_size=len(C), subballs=[{"center": np.asarray(c).tolist(), "radius": r} for c, r in balls],
        degenerate=degenerate, trials=trials)


@dataclass(frozen=True)
class NonplanarVerdict:
    nonplanar: bool
    singular_values: tuple[float, ...]
    smallest_relative: float
    tolerance: float
    samples: int


def check_nonplanar(f: MapSpec, ms: MeasureSampler, center: Sequence[float], radius: float,
                    sample_count: int = 2000, tol: float = DEFAULT_SV_TOL,
                    X: np.ndarray | None = None) -> NonplanarVerdict:
    """Numerical rank of the rows (1, f_1(x), ..., f_n(x)) over support samples in the ball."""
    if sample_count < f.n + 2:
        raise ValueError(f"need at least n+2 = {f.n + 2} samples")
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if X is None:
        X = _support_in_ball(ms, center, radius, sample_count)
    if len(np.unique(X, axis=0)) < f.n + 1:
        raise ValueError("fewer than n+1 distinct support samples in the ball")
    M = _design(f, X)
    # column scaling keeps the test about rank rather than units
    M = M / np.maximum(np.abs(M).max(axis=0), 1e-300)
    sv = np.linalg.svd(M, compute_uv=False)
    rel = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
    return NonplanarVerdict(rel > tol, tuple(float(s) for s in sv), rel, tol, len(X))
