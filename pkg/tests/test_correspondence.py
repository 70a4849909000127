import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import liouville_value, surd_target
from dioflow.core import TargetVector
from dioflow.correspondence import (FlowSpec, PrecisionError, apply_flow, ba_constant_estimate, build_u,
                                    detect_ba, heights_at, multiplicative_grid, multiplicative_trajectory,
                                    tail_window, trajectory, witness_pq)
from dioflow.lattice import first_minimum


def brute_height(y: TargetVector, t: int, q_max: int) -> Fraction:
    """lambda_1 of g_t u_y Z^2 by direct search over q (n = 1)."""
    (x,) = y.fractions()
    best = Fraction(2 ** t)  # the vector with q = 0, p = 1
    for q in range(1, q_max + 1):
        p = -round(x * q)
        val = max(2 ** t * abs(x * q + p), Fraction(q, 2 ** t))
        best = min(best, val)
    return best


def test_zero_vector_heights():
    y = TargetVector.exact([0], 74)
    rec = trajectory(y, 5)
    assert rec.heights == [Fraction(1, 2 ** t) for t in range(6)]


def test_build_u_is_unimodular():
    y = TargetVector.from_literals(["0.3", "0.7"], 40)
    b = build_u(y)
    assert abs(b.determinant()) == 1
    assert first_minimum(b).norm == 1


@pytest.mark.parametrize("seed", range(5))
def test_heights_match_direct_search(seed):
    rng = np.random.default_rng(seed)
    y = TargetVector.exact([Fraction(int(rng.integers(1, 2 ** 60)), 2 ** 60)], 60)
    hs = heights_at(y, list(range(0, 13)))
    for t, h in enumerate(hs):
        # any vector with sup norm <= 1 has |q| <= 2^t
        assert h == brute_height(y, t, 2 ** t)


def test_witness_recovers_pq():
    y = surd_target("golden", 128)
    rec = trajectory(y, 30)
    for t in (5, 17, 30):
        p, q = witness_pq(y, rec.witnesses[t], FlowSpec(1, "standard", t))
        val = max(2 ** t * abs(y.linear_form(p, q)), Fraction(abs(q[0]), 2 ** t))
        assert val == rec.heights[t]


def test_flow_spec_validation():
    assert FlowSpec(2, "standard", 3).exponents() == [6, -3, -3]
    assert FlowSpec(2, "multiplicative", t_vec=(1, 4)).exponents() == [5, -1, -4]
    with pytest.raises(ValueError):
        FlowSpec(2, "multiplicative", t_vec=(1,))
    with pytest.raises(ValueError):
        FlowSpec(1, "weird")
    with pytest.raises(ValueError):
        apply_flow(build_u(TargetVector.exact([Fraction(1, 2)])), FlowSpec(2, "standard", 1))


def test_precision_guard():
    y = TargetVector.from_literals(["0.3"], 100)
    with pytest.raises(PrecisionError):
        trajectory(y, 100)
    trajectory(y, 18)


def test_rational_hits_floor():
    # y = 1/2 exactly: the relation 2y - 1 = 0 drives heights to 2^(1-t), never below
    y = TargetVector.exact([Fraction(1, 2)], 200)
    rec = trajectory(y, 60)
    assert rec.heights[60] == Fraction(2, 2 ** 60)
    assert rec.omega_hat_sharp > 100


def test_quadratic_irrationals_bounded():
    # frozen from an exact run: golden conjugate at 512 bits
    y = surd_target("golden", 512)
    rec = trajectory(y, 200)
    assert rec.t_at_h_min == 14
    assert float(rec.h_min) == pytest.approx(0.6693904221544024, abs=1e-12)
    assert detect_ba(rec, Fraction(3, 5)).bounded
    assert not detect_ba(rec, Fraction(7, 10)).bounded
    assert 1.0 <= rec.omega_hat_sharp <= 1.05
    c = ba_constant_estimate(y, 1 << 12)
    # min |q y + p| q is attained at q = 1: 1 - y = (3 - sqrt 5) / 2
    assert float(c) == pytest.approx((3 - math.sqrt(5)) / 2, rel=1e-12)
    assert rec.h_min ** 2 >= c


def test_liouville_rate():
    y = TargetVector.exact([liouville_value(6)], 720)
    rec = trajectory(y, 200)
    assert rec.window == (100, 200)
    assert rec.gamma_hat == pytest.approx(0.4, abs=1e-12)
    # the relation q = 2^24, |y q + p| = 2^-96 (1 + tiny) peaks at t = 60 with rate 3/5
    assert -math.log2(rec.heights[60]) / 60 == pytest.approx(0.6, abs=1e-9)


def test_tail_window():
    assert tail_window(200) == (100, 200)
    assert tail_window(1) == (1, 1)
    assert tail_window(7) == (4, 7)


def test_multiplicative_diagonal_matches_standard():
    y = TargetVector.from_literals(["(sqrt(2)-1)", "(sqrt(3)-1)"], 400)
    std = trajectory(y, 40)
    mul = multiplicative_trajectory(y, 80, stride=20)
    for tv, h in zip(mul.t_vecs, mul.heights):
        if tv[0] == tv[1]:
            assert h == std.heights[tv[0]]
    assert mul.omega_hat_sharp >= std.omega_hat_sharp


def test_multiplicative_grid():
    g = multiplicative_grid(2, 20, 10)
    assert (0, 0) in g and (10, 10) in g and (20, 0) in g and (7, 7) in g
    assert all(sum(p) <= 20 for p in g)
    assert g == sorted(g)
