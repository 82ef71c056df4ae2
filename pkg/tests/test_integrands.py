import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from jumpmart.integrands import (
    FunctionFamily, envelope, intrinsic_distances, make_family, oscillation, psi_grid, quadratic_modulus,
    van_der_corput,
)
from jumpmart.measure_sim import JumpModel, Normal, PowerLawLevy, Uniform
from jumpmart.partitions import IndexSet, PartitionSeries

TWO_LEVEL = PartitionSeries((Fraction(1), Fraction(1, 2)), (((0, 1),), ((0,), (1,))), 2, nested=True)
X = np.linspace(-3, 3, 61)


def test_envelope_linear_two_point():
    fam = make_family("linear", [0.0, 1.0])
    assert np.array_equal(envelope(fam)(0.0, X), np.abs(X))


def test_envelope_single_member():
    fam = make_family("sine", [2.0])
    assert np.allclose(envelope(fam)(0.3, X), np.abs(np.sin(2 * X)))


def test_oscillation_singleton_is_zero():
    fam = make_family("threshold", [0.1, 0.5])
    assert np.all(oscillation(fam, (1,))(0.0, X) == 0)


def test_oscillation_linear_pair():
    fam = make_family("linear", [0.0, 1.0])
    assert np.array_equal(oscillation(fam, (0, 1))(0.0, X), np.abs(X))


@settings(max_examples=30, deadline=None)
@given(psis=st.lists(st.floats(-3, 3), min_size=1, max_size=6, unique=True),
       x=st.floats(-5, 5), t=st.floats(0, 2))
def test_envelope_and_oscillation_bounds(psis, x, t):
    fam = make_family("sine", psis)
    vals = np.array([np.sin(p * x) for p in psis])
    assert envelope(fam)(t, x) == pytest.approx(np.max(np.abs(vals)))
    osc = oscillation(fam, tuple(range(len(psis))))(t, x)
    assert osc == pytest.approx(vals.max() - vals.min())
    assert osc <= 2 * envelope(fam)(t, x) + 1e-15


def test_oscillation_rejects_empty_cell():
    with pytest.raises(ValueError):
        oscillation(make_family("linear", [1.0]), ())


def test_psi_grids():
    assert psi_grid("grid", 3) == [0.0, 0.5, 1.0]
    assert van_der_corput(5) == [0.0, 0.5, 0.25, 0.75, 0.125]
    with pytest.raises(ValueError):
        psi_grid("random", 3)
    with pytest.raises(ValueError):
        make_family("quadratic", [1.0])


def test_intrinsic_distance_matches_quadrature():
    model = JumpModel.finite(2.0, Normal(0.0, 1.0))
    fam = make_family("threshold", [0.2, 0.7])
    d = intrinsic_distances(fam, model, 1.5)
    # |W^0.2 - W^0.7| = |x| on 0.2 < |x| <= 0.7
    oracle = 1.5 * 2.0 * 2 * integrate.quad(lambda x: x ** 2 * math.exp(-x * x / 2) / math.sqrt(2 * math.pi),
                                             0.2, 0.7, epsrel=1e-12)[0]
    assert d[0, 1] == pytest.approx(math.sqrt(oracle), rel=1e-9)
    assert d[0, 0] == 0 and d[1, 0] == d[0, 1]


def test_modulus_two_point_value():
    model = JumpModel.finite(1.0, Uniform(-1.0, 1.0))
    res = quadratic_modulus(make_family("linear", [0.0, 1.0]), TWO_LEVEL, model, 1.0)
    assert res.value == pytest.approx(2 / math.sqrt(3), abs=1e-10)
    assert res.levels[0].v_max == pytest.approx(1 / 3, rel=1e-12)
    assert res.levels[1].value == 0.0


def test_modulus_identical_members_is_zero():
    fam = FunctionFamily(IndexSet.from_coordinates([0.0, 1.0]), lambda p, t, x: x + 0 * p)
    assert quadratic_modulus(fam, TWO_LEVEL, JumpModel.finite(3.0, Normal(0.0, 1.0)), 1.0).value == 0.0


@pytest.mark.parametrize("c", [-2.0, 0.5, 10.0])
def test_modulus_homogeneity(c):
    model = JumpModel.finite(1.0, Uniform(-1.0, 1.0))
    fam = make_family("linear", [0.0, 1.0])
    base = quadratic_modulus(fam, TWO_LEVEL, model, 1.0).value
    scaled = quadratic_modulus(fam.scaled(c), TWO_LEVEL, model, 1.0).value
    assert scaled == pytest.approx(abs(c) * base, rel=1e-12)


def test_modulus_zero_scale():
    model = JumpModel.finite(1.0, Uniform(-1.0, 1.0))
    assert quadratic_modulus(make_family("linear", [0.0, 1.0], scale=0.0), TWO_LEVEL, model, 1.0).value == 0.0


def test_modulus_monotone_in_time():
    model = JumpModel.finite(1.0, Uniform(-1.0, 1.0))
    fam = make_family("linear", [0.0, 1.0])
    vals = [quadratic_modulus(fam, TWO_LEVEL, model, t).value for t in (0.25, 0.5, 1.0, 2.0)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(vals[-1] / math.sqrt(8), rel=1e-12)


def test_modulus_infinite_on_nonsingleton_final_level():
    series = PartitionSeries((Fraction(1),), (((0, 1),),), 2)
    model = JumpModel.finite(1.0, Uniform(-1.0, 1.0))
    assert math.isinf(quadratic_modulus(make_family("linear", [0.0, 1.0]), series, model, 1.0).value)


def test_modulus_divergent_integral_is_infinite():
    # |W^0 - W^1| = |x| is not square integrable near 0 under this density
    fam = FunctionFamily(IndexSet.from_coordinates([0.0, 1.0]), lambda p, t, x: p * np.sign(x) * np.abs(x) ** 0.2)
    model = JumpModel.infinite(PowerLawLevy(1.5))
    assert math.isinf(quadratic_modulus(fam, TWO_LEVEL, model, 1.0).value)


def test_modulus_size_mismatch():
    with pytest.raises(ValueError):
        quadratic_modulus(make_family("linear", [0.0, 1.0, 2.0]), TWO_LEVEL,
                          JumpModel.finite(1.0, Uniform(-1, 1)), 1.0)
