import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jumpmart.oracles import covering_number, entropy_integral_quadrature, random_series, separation_table
from jumpmart.partitions import (
    EntropyProfile, IndexSet, PartitionSeries, SeriesKind, as_fraction, asymptotically_separates,
    build_ball_partition_series, dyadic_breakpoints, entropy_integral, entropy_table_csv, n_pi,
    validate_series,
)

TWO_LEVEL = PartitionSeries((Fraction(1), Fraction(1, 2)), (((0, 1),), ((0,), (1,))), 2, nested=True)
CONSTANT = PartitionSeries((Fraction(1),), (((0,),),), 1)


def test_as_fraction_inputs():
    assert as_fraction("1/2") == Fraction(1, 2)
    assert as_fraction(3) == 3
    assert as_fraction(0.25) == Fraction(1, 4)


# ---------------------------------------------------------------- construction

def test_two_point_ball_series():
    series = build_ball_partition_series(IndexSet.from_coordinates([0.0, 1.0]), ["1", "1/2"])
    assert series.levels == (((0, 1),), ((0,), (1,)))


def test_singleton_index_set():
    series = build_ball_partition_series(IndexSet.from_coordinates([0.3]), [1, Fraction(1, 2), Fraction(1, 4)])
    assert series.counts == [1, 1, 1]
    assert all(n_pi(series, e) == 1 for e in (1, 0.5, 0.1))


def test_equispaced_points_cover_bound():
    pts = IndexSet.from_coordinates(np.linspace(0.0, 1.0, 16))
    bps = [Fraction(1, 2 ** j) for j in range(6)]
    for hier in (False, True):
        series = build_ball_partition_series(pts, bps, hierarchical=hier, force_singletons=False)
        for j, b in enumerate(bps):
            assert n_pi(series, b) <= 2 ** j + 1


def test_greedy_cells_have_bounded_diameter():
    rng = np.random.default_rng(1)
    pts = IndexSet.from_coordinates(rng.random(20))
    bps = dyadic_breakpoints(1, 0.01)
    series = build_ball_partition_series(pts, bps, hierarchical=True)
    for b, lvl in zip(series.breakpoints, series.levels):
        for cell in lvl:
            d = pts.distances[np.ix_(cell, cell)]
            assert d.max() <= 2 * float(b) + 1e-15


def test_hierarchical_series_is_nested_and_singleton_final():
    rng = np.random.default_rng(2)
    pts = IndexSet.from_coordinates(rng.random(12))
    series = build_ball_partition_series(pts, ["1", "1/2", "1/4"], hierarchical=True)
    v = validate_series(series)
    assert v.verdict is SeriesKind.NFP and v.singleton_final


def test_flat_series_counts_are_monotone():
    rng = np.random.default_rng(3)
    pts = IndexSet.from_coordinates(rng.random(30))
    series = build_ball_partition_series(pts, dyadic_breakpoints(1, 1e-3))
    assert validate_series(series).dfp_checks_pass


def test_dyadic_breakpoints_reach_min_distance():
    bps = dyadic_breakpoints("1", 0.1)
    assert bps[0] == 1 and float(bps[-1]) < 0.1 and float(bps[-2]) >= 0.1


def test_construction_errors():
    with pytest.raises(ValueError):
        build_ball_partition_series(IndexSet((0.0, 1.0)), [1])
    with pytest.raises(ValueError):
        PartitionSeries((Fraction(1, 2), Fraction(1)), (((0,),), ((0,),)), 1)
    with pytest.raises(ValueError):
        IndexSet((0.0, 0.0))


def test_series_round_trips_through_dict():
    again = PartitionSeries.from_dict(TWO_LEVEL.to_dict())
    assert again.breakpoints == TWO_LEVEL.breakpoints and again.levels == TWO_LEVEL.levels


def test_restrict_drops_elements():
    series = PartitionSeries((1, Fraction(1, 2)), (((0, 1, 2),), ((0, 2), (1,))), 3)
    r = series.restrict(2)
    assert r.levels == (((0, 1),), ((0,), (1,)))


# ---------------------------------------------------------------- validation

def test_non_nested_series_is_dfp_only():
    series = PartitionSeries((1, Fraction(1, 2), Fraction(1, 4)),
                             (((0, 1, 2, 3),), ((0, 1), (2, 3)), ((0, 2), (1, 3))), 4)
    v = validate_series(series)
    assert v.verdict is SeriesKind.DFP_ONLY and v.dfp_checks_pass


def test_overlapping_cells_are_invalid():
    series = PartitionSeries((1, Fraction(1, 2)), (((0, 1, 2),), ((0, 1), (1, 2))), 3)
    v = validate_series(series)
    assert v.verdict is SeriesKind.INVALID
    assert any("overlap at element 1" in s for s in v.violations)


def test_coarsest_level_must_be_one_cell():
    series = PartitionSeries((1,), (((0,), (1,)),), 2)
    assert validate_series(series).verdict is SeriesKind.INVALID


# ---------------------------------------------------------------- covering numbers

def test_covering_number_at_delta_is_one():
    assert n_pi(TWO_LEVEL, 1) == 1


def test_covering_number_interval_convention():
    # level j holds on (eps_{j+1}, eps_j]; the breakpoint 1/2 belongs to the finer level
    assert n_pi(TWO_LEVEL, 0.6) == 1
    assert n_pi(TWO_LEVEL, "1/2") == 2
    assert n_pi(TWO_LEVEL, 0.49) == 2


def test_covering_number_below_last_breakpoint_is_size():
    assert n_pi(TWO_LEVEL, Fraction(1, 1000)) == 2


def test_covering_number_out_of_range():
    with pytest.raises(ValueError):
        n_pi(TWO_LEVEL, 0)
    with pytest.raises(ValueError):
        n_pi(TWO_LEVEL, 1.5)


# ---------------------------------------------------------------- entropy

def test_entropy_constant_covering():
    assert entropy_integral(CONSTANT, 1) == pytest.approx(math.sqrt(math.log(2)), rel=1e-14)
    assert entropy_integral(CONSTANT, 1) == pytest.approx(0.83255, abs=5e-6)


def test_entropy_two_level():
    expected = 0.5 * math.sqrt(math.log(2)) + 0.5 * math.sqrt(math.log(3))
    assert entropy_integral(TWO_LEVEL, 1) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.940351, abs=1e-6)


def test_entropy_vanishes_with_delta():
    values = [entropy_integral(TWO_LEVEL, Fraction(1, 10 ** k)) for k in range(1, 8)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-6


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10 ** 6), size=st.integers(1, 8), n_levels=st.integers(1, 6),
       frac=st.floats(0.05, 1.0))
def test_entropy_matches_quadrature(seed, size, n_levels, frac):
    series = random_series(np.random.default_rng(seed), size, n_levels)
    delta = series.delta * as_fraction(frac).limit_denominator(1000)
    if delta <= 0:
        return
    exact = entropy_integral(series, delta)
    assert exact == pytest.approx(entropy_integral_quadrature(series, delta), rel=1e-8)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10 ** 6), eps=st.floats(1e-3, 1.0))
def test_covering_number_matches_float_scan(seed, eps):
    series = random_series(np.random.default_rng(seed), 6, 5)
    e = min(as_fraction(eps), series.delta)
    assert n_pi(series, e) == covering_number(series, float(e))


def test_entropy_csv():
    text = entropy_table_csv(TWO_LEVEL)
    assert text.splitlines()[0] == "eps,eps_float,N,sqrt_log_1_plus_N"
    assert text.splitlines()[2].startswith("1/2,0.5,2,")


def test_entropy_profiles():
    assert math.isfinite(EntropyProfile("power", 1.0, dim=3.0).integral())
    assert math.isfinite(EntropyProfile("exp", 1.0, power=1.0).integral())
    assert math.isinf(EntropyProfile("exp", 1.0, power=2.5).integral())


# ---------------------------------------------------------------- separation

def test_singleton_final_series_separates():
    rng = np.random.default_rng(4)
    pts = IndexSet.from_coordinates(rng.random(8))
    series = build_ball_partition_series(pts, ["1", "1/2", "1/4"], hierarchical=True)
    res = asymptotically_separates(series, max_f=3)
    assert res.separates
    assert all(eps >= series.breakpoints[-1] for eps in res.eps_table.values())


def test_merged_pair_gives_witness():
    series = PartitionSeries((1, Fraction(1, 2)), (((0, 1, 2),), ((0, 1), (2,))), 3)
    res = asymptotically_separates(series, max_f=2)
    assert not res.separates and res.witness == (0, 1)


def test_ball_series_separation_scale():
    rng = np.random.default_rng(5)
    pts = IndexSet.from_coordinates(rng.random(10))
    bps = dyadic_breakpoints(1, float(np.min(pts.distances[np.triu_indices(10, 1)])))
    series = build_ball_partition_series(pts, bps, hierarchical=True)
    res = asymptotically_separates(series, max_f=3)
    assert res.separates
    for f, eps in res.eps_table.items():
        if len(f) < 2:
            continue
        dmin = min(pts.distances[i, j] for i, j in itertools.combinations(f, 2))
        # cells have diameter <= 2 eps, so a pair at distance d is split once 2 eps < d;
        # the recorded scale is within a factor 2 granularity of d/2
        assert float(eps) >= dmin / 4


def test_separation_against_direct_oracle():
    rng = np.random.default_rng(6)
    for _ in range(50):
        series = random_series(rng, int(rng.integers(1, 7)), int(rng.integers(1, 6)))
        got = asymptotically_separates(series, max_f=3)
        ok, table, witness = separation_table(series, 3)
        assert got.separates == ok
        if ok:
            assert got.eps_table == table


def test_separation_size_cap():
    with pytest.raises(ValueError):
        asymptotically_separates(PartitionSeries((1,), ((tuple(range(70)),),), 70))
