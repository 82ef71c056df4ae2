import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from jumpmart.bounds import BoundInputs, optimal_K, rhs_bound_i, rhs_bound_ii, truncation_level_a
from jumpmart.partitions import PartitionSeries

CONSTANT = PartitionSeries((Fraction(1),), (((0,),),), 1)
TWO_LEVEL = PartitionSeries((Fraction(1), Fraction(1, 2)), (((0, 1),), ((0,), (1,))), 2, nested=True)
THREE_AT_HALF = PartitionSeries((Fraction(1), Fraction(1, 2)), (((0, 1, 2),), ((0,), (1,), (2,))), 3)


def test_truncation_level_constant_covering():
    assert truncation_level_a(1, 1.0, CONSTANT) == pytest.approx(1 / math.sqrt(math.log(2)), rel=1e-14)
    assert truncation_level_a(1, 1.0, CONSTANT) == pytest.approx(1.20112, abs=5e-6)


def test_truncation_level_three_cells():
    assert truncation_level_a(1, 1.0, THREE_AT_HALF) == pytest.approx(1 / math.sqrt(math.log(4)), rel=1e-14)
    assert truncation_level_a(1, 1.0, THREE_AT_HALF) == pytest.approx(0.84932, abs=5e-6)


@settings(max_examples=40, deadline=None)
@given(K=st.floats(1e-3, 1e3))
def test_truncation_level_linear_in_K(K):
    assert truncation_level_a(1, 2 * K, TWO_LEVEL) == 2 * truncation_level_a(1, K, TWO_LEVEL)


def test_truncation_level_range():
    with pytest.raises(ValueError):
        truncation_level_a(4, 1.0, TWO_LEVEL)


def test_rhs_i_values():
    assert rhs_bound_i(CONSTANT, 1, 1.0) == pytest.approx(0.83255, abs=5e-6)
    assert rhs_bound_i(CONSTANT, 1, 0.0) == 0.0
    two = 2 * (0.5 * math.sqrt(math.log(2)) + 0.5 * math.sqrt(math.log(3)))
    assert rhs_bound_i(TWO_LEVEL, 1, 2.0) == pytest.approx(two, rel=1e-14)
    assert two == pytest.approx(1.880702, abs=1e-6)
    with pytest.raises(ValueError):
        rhs_bound_i(CONSTANT, 1, -1.0)


def test_rhs_ii_values():
    assert rhs_bound_ii(CONSTANT, 1.0, 1.0) == pytest.approx(math.sqrt(math.log(2)) + 1, rel=1e-14)
    assert rhs_bound_ii(CONSTANT, 1.0, 1.0) == pytest.approx(1.83255, abs=5e-6)
    assert rhs_bound_ii(TWO_LEVEL, 3.0, 0.0) == rhs_bound_i(TWO_LEVEL, TWO_LEVEL.delta, 3.0)
    with pytest.raises(ValueError):
        rhs_bound_ii(CONSTANT, 0.0, 1.0)
    with pytest.raises(ValueError):
        rhs_bound_ii(CONSTANT, 1.0, -1.0)


def test_rhs_ii_grows_linearly_in_K():
    big = [rhs_bound_ii(TWO_LEVEL, K, 1.0) for K in (1e4, 2e4)]
    assert big[1] / big[0] == pytest.approx(2.0, rel=1e-4)


@settings(max_examples=40, deadline=None)
@given(L=st.floats(1e-3, 1e3), factor=st.floats(0.1, 10.0))
def test_optimal_K_minimises(L, factor):
    k_star = optimal_K(TWO_LEVEL, L)
    best = rhs_bound_ii(TWO_LEVEL, k_star, L)
    assert best <= rhs_bound_ii(TWO_LEVEL, k_star * factor, L) * (1 + 1e-12)


def test_bound_inputs_validation():
    assert BoundInputs(TWO_LEVEL, "1/2", 1.0).delta == Fraction(1, 2)
    for bad in (dict(delta=2, K=1.0), dict(delta=1, K=0.0), dict(delta=1, K=1.0, L=-1.0)):
        with pytest.raises(ValueError):
            BoundInputs(TWO_LEVEL, **bad)
