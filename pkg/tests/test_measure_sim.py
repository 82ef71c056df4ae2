import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from jumpmart.integrands import make_family
from jumpmart.measure_sim import (
    Case, FirstExit, FixedTime, JumpModel, JumpPath, LevyRestriction, ModelError, Normal, PointMass,
    PowerLawLevy, QuadratureError, Uniform, classify_case, compensator_integral, derive_seed, generator,
    level_crossings, mark_integral, model_from_dict, quad, simulate_finite_activity, truncate_levy,
)


# ---------------------------------------------------------------- seeding

def test_generator_streams_are_reproducible_and_distinct():
    a = generator(5, 0).random(4)
    assert np.array_equal(a, generator(5, 0).random(4))
    assert not np.array_equal(a, generator(5, 1).random(4))
    assert not np.array_equal(a, generator(6, 0).random(4))


def test_derive_seed_is_stable_and_spreads():
    seeds = {derive_seed(0, r) for r in range(1000)}
    assert len(seeds) == 1000
    assert derive_seed(3, 17) == derive_seed(3, 17)
    with pytest.raises(ValueError):
        derive_seed(-1, 0)


# ---------------------------------------------------------------- simulation

def test_zero_rate_gives_empty_path():
    path = simulate_finite_activity(JumpModel.finite(0.0, PointMass(1.0)), 1.0, 7)
    assert len(path) == 0 and path.events == []


def test_same_seed_same_path(normal_model):
    assert simulate_finite_activity(normal_model, 2.0, 11) == simulate_finite_activity(normal_model, 2.0, 11)
    assert simulate_finite_activity(normal_model, 2.0, 11) != simulate_finite_activity(normal_model, 2.0, 12)


def test_mean_event_count_matches_poisson_mean():
    model = JumpModel.finite(2.0, PointMass(1.0))
    counts = np.array([len(simulate_finite_activity(model, 1.0, s)) for s in range(100_000)])
    se = counts.std(ddof=1) / math.sqrt(counts.size)
    assert abs(counts.mean() - 2.0) <= 3 * se
    assert abs(counts.var(ddof=1) - 2.0) < 0.05


def test_marks_follow_the_mark_distribution():
    model = JumpModel.finite(50.0, Uniform(-1.0, 2.0))
    marks = np.concatenate([simulate_finite_activity(model, 1.0, s).marks for s in range(200)])
    assert stats.kstest(marks, stats.uniform(loc=-1.0, scale=3.0).cdf).pvalue > 1e-3


@settings(max_examples=40, deadline=None)
@given(rate=st.floats(0.0, 30.0), horizon=st.floats(0.01, 5.0), seed=st.integers(0, 2 ** 32))
def test_paths_are_ordered_and_inside_the_horizon(rate, horizon, seed):
    path = simulate_finite_activity(JumpModel.finite(rate, Normal(0.0, 2.0)), horizon, seed)
    assert np.all(np.diff(path.times) > 0)
    if len(path):
        assert path.times[0] > 0 and path.times[-1] <= horizon


def test_simulation_rejects_bad_horizon(normal_model, levy15):
    with pytest.raises(ValueError):
        simulate_finite_activity(normal_model, 0.0, 1)
    with pytest.raises(ModelError):
        simulate_finite_activity(levy15, 1.0, 1)


def test_jump_path_invariants():
    with pytest.raises(ValueError):
        JumpPath(1.0, np.array([0.5, 0.2]), np.array([1.0, 1.0]), 0)
    with pytest.raises(ValueError):
        JumpPath(1.0, np.array([0.5, 1.5]), np.array([1.0, 1.0]), 0)
    with pytest.raises(ValueError):
        JumpPath(1.0, np.array([0.5]), np.array([0.1]), 0, truncation_floor=0.2)


def test_jump_path_csv():
    path = JumpPath(1.0, np.array([0.25, 0.5]), np.array([1.0, -2.0]), 0)
    assert path.to_csv() == "time,mark\n0.25,1.0\n0.5,-2.0\n"


def test_superposition_of_disjoint_annuli():
    levy = JumpModel.infinite(PowerLawLevy(1.0))
    whole = truncate_levy(levy, 0.1)
    inner = truncate_levy(levy, 0.1, upper=0.4)
    outer = truncate_levy(levy, 0.4)
    n_whole = np.array([len(simulate_finite_activity(whole, 1.0, s)) for s in range(10_000)])
    n_split = np.array([len(simulate_finite_activity(inner, 1.0, s, 0))
                        + len(simulate_finite_activity(outer, 1.0, s, 1)) for s in range(10_000)])
    se = math.sqrt(n_whole.var() / n_whole.size + n_split.var() / n_split.size)
    assert abs(n_whole.mean() - n_split.mean()) <= 4 * se
    assert abs(n_whole.var() / n_split.var() - 1) < 0.1


# ---------------------------------------------------------------- truncation

def test_truncated_rate_closed_form():
    model = truncate_levy(JumpModel.infinite(PowerLawLevy(0.5)), 0.25)
    assert model.rate == pytest.approx(4.0, rel=1e-14)
    assert model.truncation_floor == 0.25


def test_truncation_at_radius_is_refused():
    levy = JumpModel.infinite(PowerLawLevy(0.5))
    with pytest.raises(ModelError, match="zero-rate"):
        truncate_levy(levy, 1.0)
    with pytest.raises(ModelError):
        truncate_levy(levy, 0.0)


def test_truncated_rate_grows_like_power_and_matches_quadrature():
    levy = JumpModel.infinite(PowerLawLevy(1.5))
    rates = []
    for k in range(1, 9):
        h = 2.0 ** -k
        rate = truncate_levy(levy, h).rate
        oracle = 2 * integrate.quad(lambda x: x ** -2.5, h, 1.0, epsabs=0, epsrel=1e-12)[0]
        assert rate == pytest.approx(oracle, rel=1e-9)
        rates.append(rate)
    assert all(a < b for a, b in zip(rates, rates[1:]))
    slope = np.polyfit(np.log([2.0 ** -k for k in range(5, 9)]), np.log(rates[4:]), 1)[0]
    assert slope == pytest.approx(-1.5, abs=0.02)


def test_truncated_mark_distribution_has_unit_mass():
    levy = PowerLawLevy(1.2, c_pos=1.0, c_neg=0.5)
    for h in (0.01, 0.1, 0.5):
        dist = LevyRestriction(levy, h, 1.0)
        mass = sum(integrate.quad(dist.pdf, a, b, epsabs=1e-14, epsrel=1e-13)[0]
                   for a, b in ((-1.0, -h), (h, 1.0)))
        assert mass == pytest.approx(1.0, abs=1e-12)


def test_truncated_marks_sample_the_restricted_density():
    levy = PowerLawLevy(1.5)
    model = truncate_levy(JumpModel.infinite(levy), 0.05)
    marks = simulate_finite_activity(model, 100.0, 3).marks
    assert np.all(np.abs(marks) > 0.05) and np.all(np.abs(marks) <= 1.0)
    absx = np.abs(marks)
    lo, hi = 0.05, 1.0
    cdf = lambda x: (lo ** -1.5 - np.asarray(x) ** -1.5) / (lo ** -1.5 - hi ** -1.5)  # noqa: E731
    assert stats.kstest(absx, cdf).pvalue > 1e-3
    assert abs(np.mean(marks > 0) - 0.5) < 0.02


def test_stable_index_above_two_is_rejected():
    with pytest.raises(ModelError):
        JumpModel.infinite(PowerLawLevy(2.1))


# ---------------------------------------------------------------- compensator

def test_compensator_second_moment_normal(normal_model):
    assert compensator_integral(lambda t, x: x ** 2, normal_model, 1.0) == pytest.approx(2.0, rel=1e-10)


def test_compensator_of_zero(normal_model, levy15):
    for model in (normal_model, levy15):
        assert compensator_integral(lambda t, x: 0.0 * x, model, 3.0) == 0.0


def test_compensator_small_jump_integral_matches_quadrature(levy15):
    got = compensator_integral(lambda t, x: np.minimum(x ** 2, np.abs(x)), levy15, 1.0, homogeneous=True)
    oracle = 2 * integrate.quad(lambda x: x ** 2 * x ** -2.5, 0.0, 1.0, epsabs=0, epsrel=1e-13, limit=200)[0]
    assert got == pytest.approx(oracle, rel=1e-8)
    assert oracle == pytest.approx(4.0, rel=1e-10)


def test_compensator_divergence_is_detected(levy15):
    with pytest.raises(QuadratureError):
        compensator_integral(lambda t, x: np.abs(x), levy15, 1.0, homogeneous=True)


def test_compensator_linearity(normal_model):
    g = lambda t, x: np.cos(x) * (1 + t)  # noqa: E731
    h = lambda t, x: x ** 2 * t  # noqa: E731
    lhs = compensator_integral(lambda t, x: 2 * g(t, x) - 3 * h(t, x), normal_model, 1.5)
    rhs = 2 * compensator_integral(g, normal_model, 1.5) - 3 * compensator_integral(h, normal_model, 1.5)
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-10)


def test_compensator_time_dependent_matches_closed_form(uniform_model):
    # int_0^t int (s x^2) 2 (1/2) dx ds = t^2/3
    assert compensator_integral(lambda s, x: s * x ** 2, uniform_model, 2.0) == pytest.approx(4 / 3, rel=1e-10)


def test_compensator_rejects_negative_time(normal_model):
    with pytest.raises(ValueError):
        compensator_integral(lambda t, x: x, normal_model, -1.0)


def test_mark_integral_with_discontinuity():
    model = JumpModel.finite(1.0, Normal(0.0, 1.0))
    got = mark_integral(lambda x: np.where(np.abs(x) > 0.7, 1.0, 0.0), model, breaks=(-0.7, 0.7))
    assert got == pytest.approx(2 * stats.norm.sf(0.7), rel=1e-10)


def test_quad_raises_on_nonconvergence():
    with pytest.raises(QuadratureError):
        quad(lambda x: 1.0 / x, 0.0, 1.0)


def test_level_crossings_finds_roots():
    grid = np.linspace(-2, 2, 41)
    roots = level_crossings(lambda x: x ** 2, grid, 1.0)
    assert roots == pytest.approx([-1.0, 1.0], abs=1e-12)


# ---------------------------------------------------------------- classification

def test_classify_finite_model_is_case_a(uniform_model):
    fam = make_family("linear", [1.0])
    rep = classify_case(fam, JumpModel.finite(1.0, Normal(0.0, 1.0)), 1.0)
    assert rep.verdict is Case.A and rep.case_a and rep.case_b


def test_classify_stable_15_is_case_b(levy15):
    rep = classify_case(make_family("linear", [1.0]), levy15, 1.0)
    assert rep.verdict is Case.B
    assert not rep.case_a and math.isinf(rep.envelope_integral)
    assert rep.case_b_integral == pytest.approx(4.0, rel=1e-8)


def test_classify_neither_when_small_jumps_not_square_integrable():
    # unchecked construction: the density violates x^2 ^ 1 integrability
    bad = JumpModel.infinite(PowerLawLevy.__new__(PowerLawLevy), check=False)
    object.__setattr__(bad.levy_density, "alpha", 2.1)
    object.__setattr__(bad.levy_density, "radius", 1.0)
    object.__setattr__(bad.levy_density, "c_pos", 1.0)
    object.__setattr__(bad.levy_density, "c_neg", 1.0)
    rep = classify_case(make_family("linear", [1.0]), bad, 1.0)
    assert rep.verdict is Case.NEITHER


# ---------------------------------------------------------------- stopping rules

def test_fixed_time_returns_t0():
    assert FixedTime(0.7).evaluate(np.array([0.0, 1.0]), np.array([0.0, 5.0])) == 0.7


def test_first_exit_interpolates_and_caps():
    rule = FirstExit(0, 1.0, cap=2.0)
    times = np.array([0.0, 1.0, 2.0])
    assert rule.evaluate(times, np.array([0.0, 0.5, 1.5])) == pytest.approx(1.5)
    assert rule.evaluate(times, np.array([0.0, -2.0, 0.0])) == pytest.approx(0.5)
    assert rule.evaluate(times, np.array([0.0, 0.1, 0.2])) == 2.0


# ---------------------------------------------------------------- serialisation

def test_model_from_dict():
    m = model_from_dict({"kind": "finite", "rate": 2.0, "marks": {"name": "std_normal"}})
    assert m.rate == 2.0 and m.mark_dist == Normal(0.0, 1.0)
    m = model_from_dict({"kind": "infinite", "levy": {"name": "power", "alpha": 0.5}})
    assert not m.is_finite and m.levy_density.alpha == 0.5
    with pytest.raises(ModelError):
        model_from_dict({"kind": "finite", "rate": 1.0, "marks": {"name": "cauchy"}})
