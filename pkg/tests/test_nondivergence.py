import warnings
from fractions import Fraction

import pytest

from dioflow.goodness import check_good
from dioflow.measures import MapSpec, MeasureSampler, parse_map
from dioflow.nondivergence import (HypothesisWarning, ball_samples, borel_cantelli_series, dilated_ball_inside,
                                   extremality_experiment, scan)

L = MeasureSampler.interval(1, 2, seed=21)
V2 = MapSpec.veronese(2)
HALF = Fraction(1, 2)


@pytest.fixture(scope="module")
def small_scan():
    eps = [Fraction(2), Fraction(1, 2), Fraction(1, 8), Fraction(1, 32)]
    return scan(V2, L, [Fraction(3, 2)], HALF, t_list=[0, 5, 20], eps_grid=eps, samples=120)


def test_ratio_at_eps_two_is_one(small_scan):
    # Minkowski: lambda_1 <= 1 on a covolume-one lattice
    for t in small_scan.t_list:
        assert small_scan.ratio(t, 2) == 1
    assert small_scan.monotone()
    assert small_scan.ratio(0, Fraction(1, 2)) == 0


def test_scan_csv_layout(small_scan):
    lines = small_scan.to_csv().splitlines()
    assert lines[0] == "t,2,1/2,1/8,1/32"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["0", "5", "20"]


def test_thread_count_does_not_change_results():
    kw = dict(t_list=[10, 30], eps_grid=[Fraction(1, 4), Fraction(1, 16)], samples=24)
    a = scan(V2, L, [Fraction(3, 2)], HALF, threads=1, **kw)
    b = scan(V2, L, [Fraction(3, 2)], HALF, threads=3, **kw)
    assert a.to_json() == b.to_json()


def test_ball_samples_stay_in_ball():
    ys = ball_samples(V2, L, [Fraction(5, 4)], Fraction(1, 8), 10, 128)
    for y in ys:
        x = y.coords[0].to_fraction()
        assert abs(x - Fraction(5, 4)) < Fraction(1, 8) + Fraction(1, 2 ** 120)
        assert abs(y.coords[1].to_fraction() - x * x) <= Fraction(1, 2 ** 127)
    with pytest.raises(ValueError):
        ball_samples(V2, L, [Fraction(5)], Fraction(1, 8), 1, 64, max_draws=50)


def test_hypothesis_flag():
    assert not dilated_ball_inside(L, [Fraction(3, 2)], HALF, 2)
    assert dilated_ball_inside(MeasureSampler.interval(-100, 100), [0], Fraction(1, 2), 2)
    assert dilated_ball_inside(MeasureSampler.cantor(), [HALF], HALF, 1)


def test_goodness_fixes_comparison_shape():
    good = check_good(V2, L, [1.5], 0.5, coeff_census=32)
    res = scan(V2, L, [Fraction(3, 2)], HALF, t_list=[10], eps_grid=[Fraction(1, 4)], samples=20, goodness=good)
    assert res.alpha_used == good.alpha_hat and res.goodness["rho_hat"] == good.rho_hat


def test_bc_warns_below_threshold():
    with pytest.warns(HypothesisWarning):
        s = borel_cantelli_series(V2, L, [Fraction(3, 2)], HALF, 2, 0, 10, samples=4)
    assert not s.hypothesis_ok
    assert len(s.partial_sums) == 10
    with warnings.catch_warnings():
        warnings.simplefilter("error", HypothesisWarning)
        s = borel_cantelli_series(V2, L, [Fraction(3, 2)], HALF, 2, Fraction(1, 10), 10, samples=4)
    assert s.hypothesis_ok and s.gamma_threshold == "0"


def test_dirichlet_lower_bound_on_curve():
    res = extremality_experiment(V2, L, [Fraction(3, 2)], HALF, 6, 60)
    assert res.min_omega >= 2 - 0.05
    assert len(res.omegas) == 6 and res.omegas_mult is None


def test_rational_line_is_very_well_approximable():
    # x -> (x, 1/3): the relation 3 y_2 - 1 = 0 gives unbounded exponents
    f = parse_map("affine:1,0;0,1/3")
    res = extremality_experiment(f, L, [Fraction(3, 2)], HALF, 4, 60)
    assert res.min_omega > 5
