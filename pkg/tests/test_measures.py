import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dioflow.measures import (MapSpec, MeasureSampler, Similarity, cantor_point, check_federer, check_scaling,
                              parse_map, parse_measure, read_config, sample, sphere_census, ternary_digits)


def test_cantor_point_extremes():
    assert cantor_point([0] * 20) == 0
    assert cantor_point([2] * 20) == 1 - Fraction(1, 3 ** 20)
    assert cantor_point([0, 2]) == Fraction(2, 9)


@given(st.integers(0, 2 ** 32), st.integers(0, 50))
@settings(max_examples=30, deadline=None)
def test_cantor_samples_lie_in_support(seed, index):
    ms = MeasureSampler.cantor(depth=30, seed=seed)
    (x,) = ms.point(index)
    digits = ternary_digits(x, 30)
    assert set(digits) <= {0, 2}
    assert cantor_point(digits) == x


def test_exact_samples_are_deterministic_and_indexed():
    ms = MeasureSampler.interval(0, 1, seed=11, bits=80, d=2)
    a = sample(ms, 5)
    assert a == sample(ms, 5)
    assert sample(ms, 2, start=3) == a[3:5]
    assert sample(ms.with_seed(12), 5) != a
    for p in a:
        assert all(0 <= x < 1 and (x * 2 ** 80).denominator == 1 for x in p)
    with pytest.raises(ValueError):
        sample(ms, 0)


def test_float_samples_deterministic_and_in_domain():
    ms = MeasureSampler.interval(1, 2, seed=3)
    X = ms.sample_array(70000)
    assert np.array_equal(X, ms.sample_array(70000))
    assert X.min() >= 1 and X.max() <= 2
    assert not np.array_equal(ms.centers(10), X[:10])


def test_pushforward_is_exact():
    f = MapSpec.veronese(2)
    assert f.apply([Fraction(3, 2)]) == (Fraction(3, 2), Fraction(9, 4))
    base = MeasureSampler.interval(1, 2, seed=1, bits=40)
    ms = MeasureSampler.pushforward(base, f)
    for i in range(5):
        (x,) = base.point(i)
        assert ms.point(i) == (x, x * x)
    X = ms.sample_array(100)
    assert np.allclose(X[:, 1], X[:, 0] ** 2)


def test_resolution_raises_depth_and_bits():
    assert MeasureSampler.cantor(depth=10).with_resolution(100).depth == math.ceil(100 / math.log2(3)) + 2
    assert MeasureSampler.interval(0, 1, bits=64).with_resolution(200).bits == 200
    ms = MeasureSampler.pushforward(MeasureSampler.interval(0, 1), MapSpec.veronese(2)).with_resolution(300)
    assert ms.base.bits == 300


def test_map_parsing():
    assert parse_map("veronese:3").apply([2]) == (2, 4, 8)
    assert parse_map("poly:0,1|1,0,1").apply([Fraction(1, 2)]) == (Fraction(1, 2), Fraction(5, 4))
    assert parse_map("affine:1,2;0,1").apply([3]) == (3, 7)
    assert parse_map("coordinatewise:0,1|0,0,1").apply([2, 3]) == (2, 9)
    with pytest.raises(ValueError):
        parse_map("spline:1")
    with pytest.raises(ValueError):
        MapSpec.polynomial([[1], [1, 2]]).apply([1, 2])


def test_measure_parsing_and_config():
    assert parse_measure("lebesgue:0,1,d=3").d == 3
    assert parse_measure("cantor:20").depth == 20
    ifs = parse_measure("ifs:r=1/4;b=0,3/4;w=1/3,2/3")
    assert ifs.weights == (Fraction(1, 3), Fraction(2, 3))
    assert ifs.maps[1] == Similarity(Fraction(1, 4), (Fraction(3, 4),))
    ms = read_config("[measure]\nmeasure = cantor\nmap = veronese:2\nseed = 7\ndepth = 12\n")
    assert ms.kind == "pushforward" and ms.seed == 7 and ms.base.depth == 12
    with pytest.raises(ValueError):
        parse_measure("ifs:r=1/2;b=0,1/2;w=1/2,1/3")
    with pytest.raises(ValueError):
        parse_measure("lebesgue:2,1")


def test_sphere_census_unit_vectors():
    for dim in (1, 2, 3, 4):
        U = sphere_census(dim, 32)
        assert U.shape[1] == dim
        assert np.allclose(np.linalg.norm(U, axis=1), 1)


def test_federer_dirac_and_cantor():
    dirac = MeasureSampler.ifs([Similarity(Fraction(0), (Fraction(1, 2),))], [1], depth=3)
    rep = check_federer(dirac, trials=10, radii=[0.1, 0.01], reference_size=2000)
    assert rep.constants["D_hat"] == 1
    rep = check_federer(MeasureSampler.cantor(seed=2), trials=60, reference_size=200000)
    # mu(3B)/mu(B) for triadic balls on the Cantor set is close to 2
    assert 1.8 <= rep.constants["D_hat"] <= 2.6


def test_scaling_needs_wide_radius_grid():
    with pytest.raises(ValueError):
        check_scaling(MeasureSampler.cantor(), radii=[0.1, 0.01])


def test_lebesgue_scaling_exponent():
    rep = check_scaling(MeasureSampler.interval(0, 1, seed=4), trials=20, radii=[0.1, 0.01, 0.001, 0.0001],
                        reference_size=400000, min_hits=20)
    assert rep.constants["beta_hat"] == pytest.approx(1.0, abs=0.1)
