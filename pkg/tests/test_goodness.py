from fractions import Fraction

import numpy as np
import pytest

from dioflow.goodness import check_good, check_nonplanar, coefficient_census
from dioflow.measures import MapSpec, MeasureSampler, parse_map

L = MeasureSampler.interval(-1, 1, seed=1)


def test_identity_is_one_one_good():
    f = parse_map("poly:0,1")
    rep = check_good(f, L, [0], 1, coeff_census=[[0, 1]], subballs=0, reference_size=20000)
    assert rep.alpha_hat == pytest.approx(1.0, abs=0.1)
    assert rep.C_hat == pytest.approx(1.0, abs=0.1)
    assert rep.passed
    # off-center sub-balls see up to twice the mass: |x| < eta sup covers 2 eta sup of the line
    rep = check_good(f, L, [0], 1, coeff_census=[[0, 1]], reference_size=20000)
    assert rep.C_hat <= 2.2


def test_square_has_exponent_one_half():
    rep = check_good(parse_map("poly:0,0,1"), L, [0], 1, coeff_census=[[0, 1]], reference_size=20000)
    assert rep.alpha_hat == pytest.approx(0.5, abs=0.1)


def test_constant_is_trivially_good():
    rep = check_good(parse_map("poly:0,1"), L, [0], 1, coeff_census=[[1, 0]], reference_size=5000)
    # |f_c| = 1 never drops below eta < 1
    assert rep.rho_hat == 1
    assert rep.trials == [] and not rep.degenerate


def test_scaling_coefficients_changes_nothing():
    f = MapSpec.veronese(2)
    ms = MeasureSampler.interval(1, 2, seed=2)
    c = np.array([[-2.25, 0.0, 1.0]])
    a = check_good(f, ms, [1.5], 0.5, coeff_census=c, reference_size=20000)
    b = check_good(f, ms, [1.5], 0.5, coeff_census=7.5 * c, reference_size=20000)
    assert a.alpha_hat == pytest.approx(b.alpha_hat, abs=1e-12)
    assert a.C_hat == pytest.approx(b.C_hat, abs=1e-12)


def test_affine_reparametrization_invariance():
    # x -> (2x + 1) on [0, 1] has the same sublevel ratios as x on [1, 3]
    a = check_good(parse_map("poly:1,2"), MeasureSampler.interval(0, 1, seed=3), [0.5], 0.5,
                   coeff_census=[[-2, 1]], reference_size=40000)
    b = check_good(parse_map("poly:0,1"), MeasureSampler.interval(1, 3, seed=3), [2], 1,
                   coeff_census=[[-2, 1]], reference_size=40000)
    assert a.alpha_hat == pytest.approx(b.alpha_hat, abs=0.05)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_veronese_degree_band(n):
    rep = check_good(MapSpec.veronese(n), MeasureSampler.interval(1, 2, seed=4), [1.5], 0.5,
                     coeff_census=64, reference_size=20000)
    # degree-1 polynomials on a ball that contains their root only partially sit near 0.86
    lo = 0.8 if n == 1 else 1 / n - 0.1
    assert lo <= rep.alpha_hat <= 1.0
    assert rep.C_hat > 0


def test_coefficient_census_shapes():
    assert coefficient_census(2, 10).shape == (10, 3)
    with pytest.raises(ValueError):
        coefficient_census(2, [[1, 2]])


def test_nonplanar_verdicts():
    ms = MeasureSampler.interval(1, 2, seed=5)
    assert check_nonplanar(MapSpec.veronese(2), ms, [1.5], 0.5).nonplanar
    assert check_nonplanar(MapSpec.veronese(3), ms, [1.5], 0.5).nonplanar
    planar = check_nonplanar(parse_map("affine:1,2;0,1"), ms, [1.5], 0.5)
    assert not planar.nonplanar and planar.smallest_relative < 1e-12
    can = MeasureSampler.cantor(seed=5)
    assert check_nonplanar(MapSpec.veronese(2), can, [0.5], 0.5).nonplanar
    with pytest.raises(ValueError):
        check_nonplanar(MapSpec.veronese(2), ms, [1.5], 0.5, sample_count=3)
