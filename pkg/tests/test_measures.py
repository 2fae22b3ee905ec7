import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from rvfilter.laws import (
    CounterexampleLaw,
    CounterexampleSpec,
    Discrete,
    MomentDivergence,
    Pareto,
    Symmetrized,
    Uniform,
    counterexample_tail,
)
from rvfilter.measures import (
    CallableKernel,
    ExpKernel,
    FilterModel,
    GeometricAtoms,
    PowerAtoms,
    PowerMeasure,
    PowerPiece,
    SpectralMeasure,
    StepKernel,
    TabulatedPiece,
    build_noise_law,
    kernel_from_dict,
    kernel_to_measure,
    merge_atoms,
    sample_noise,
)

THETA_PI_LN2 = math.pi / math.log(2)


# -- spectral measures ----------------------------------------------------


def test_atoms_must_be_positive_and_distinct():
    with pytest.raises(ValueError):
        SpectralMeasure(((1.0, 1.0), (1.0, 2.0)))
    with pytest.raises(ValueError):
        SpectralMeasure(((0.0, 1.0),))
    with pytest.raises(ValueError):
        SpectralMeasure(((1.0, -1.0),))


def test_from_weights_merges_equal_locations():
    m = SpectralMeasure.from_weights([0.5, 0.5, 1.0])
    assert m.atoms == ((0.5, 2.0), (1.0, 1.0))
    assert merge_atoms([(2, 1), (1, 1), (2, 0.5)]) == ((1.0, 1.0), (2.0, 1.5))


def test_moment_examples():
    assert SpectralMeasure(((2.0, 1.0),)).moment(3.0) == 8.0
    geo = SpectralMeasure(families=(GeometricAtoms(1.0, 0.5, 1),))
    assert geo.moment(1.0) == pytest.approx(1.0, abs=1e-15)
    piece = SpectralMeasure(ac_pieces=(PowerPiece(1.0, 1.0, 1.0, math.inf),))
    assert piece.moment(0.5) == pytest.approx(2.0, abs=1e-14)
    assert piece.moment(1.0) == math.inf


def test_power_family_divergence_is_a_value():
    m = SpectralMeasure(families=(PowerAtoms(1.0),))
    assert m.moment(1.0) == math.inf
    assert m.moment(2.0) == pytest.approx(math.pi**2 / 6)


def test_tabulated_piece_moment_matches_trapezoid_integral():
    piece = TabulatedPiece((1.0, 2.0, 3.0), (0.0, 1.0, 0.0))
    # triangle of area 1 centred at 2
    assert piece.moment(0.0) == pytest.approx(1.0, rel=1e-12)
    assert piece.moment(1.0) == pytest.approx(2.0, rel=1e-12)


def test_serialization_round_trip():
    m = SpectralMeasure(((0.5, 2.0), (1.0, 1.0)),
                        (PowerPiece(1.0, 1.0, 1.0, math.inf), TabulatedPiece((1.0, 2.0), (1.0, 0.5))),
                        (GeometricAtoms(2.0, 0.25, 0), PowerAtoms(3.0)))
    assert SpectralMeasure.from_dict(m.to_dict()) == m
    for key in ("atoms", "ac_pieces"):
        assert key in m.to_dict()


def test_power_measure_tail():
    nu = PowerMeasure(1.5)
    assert float(nu.tail(4.0)) == pytest.approx(0.125)
    with pytest.raises(ValueError):
        PowerMeasure(0.0).tail(2.0)


# -- truncation of infinite families --------------------------------------


@pytest.mark.parametrize("fam,p", [(GeometricAtoms(1.0, 0.5, 1), 0.5), (GeometricAtoms(3.0, 0.9, 0), 1.0),
                                   (PowerAtoms(2.0), 1.0), (PowerAtoms(1.5), 1.2)])
def test_truncation_rule_meets_absolute_and_relative_bounds(fam, p):
    k = fam.truncation(p)
    if isinstance(fam, GeometricAtoms):
        total = float(fam.power_sum(p).real)
        head = float(np.sum(fam.locations(k - fam.start + 1) ** p))
    else:
        total = fam.power_sum_real(p)
        head = float(np.sum(fam.locations(k) ** p))
    rest = total - head
    assert rest <= 1e-6 * min(1.0, total) * (1 + 1e-6)


# -- kernels -----------------------------------------------------------------


def test_box_kernel_image_is_one_atom():
    assert kernel_to_measure(StepKernel((1.0,), (3.0,))).atoms == ((1.0, 3.0),)


def test_step_kernel_reproduces_weighted_sum():
    psi = (0.7, 0.2, 0.9)
    assert kernel_to_measure(StepKernel.unit(psi)) == SpectralMeasure.from_weights(psi)


def test_exp_kernel_image_moment():
    for alpha in (0.5, 1.0, 2.5):
        m = kernel_to_measure(ExpKernel(1.0))
        val, _ = integrate.quad(lambda s: math.exp(-alpha * s), 0, np.inf)
        assert m.moment(alpha) == pytest.approx(1.0 / alpha, rel=1e-13)
        assert m.moment(alpha) == pytest.approx(val, rel=1e-8)


@given(st.floats(0.1, 5.0), st.floats(0.2, 4.0), st.booleans())
def test_kernel_image_preserves_power_integrals(rate, alpha, two_sided):
    k = ExpKernel(rate, two_sided)
    lo = -np.inf if two_sided else 0.0
    val, _ = integrate.quad(lambda s: float(k(s)) ** alpha, lo, np.inf, epsabs=0, epsrel=1e-12)
    assert kernel_to_measure(k).moment(alpha) == pytest.approx(val, rel=1e-8)


@given(st.lists(st.tuples(st.floats(0.01, 5.0), st.floats(0.1, 3.0)), min_size=1, max_size=6),
       st.floats(0.2, 3.0))
def test_step_image_preserves_power_integrals(pieces, alpha):
    k = StepKernel(tuple(v for v, _ in pieces), tuple(m for _, m in pieces))
    edges = np.concatenate([[0.0], np.cumsum(k.lengths)])
    val = sum(integrate.quad(lambda s: float(k(s)) ** alpha, a, b)[0] for a, b in zip(edges[:-1], edges[1:]))
    assert kernel_to_measure(k).moment(alpha) == pytest.approx(val, rel=1e-8)


def test_callable_kernel_has_no_closed_image():
    k = CallableKernel(lambda s: 1 - s, 0.0, 1.0)
    with pytest.raises(ValueError):
        kernel_to_measure(k)
    assert k.power_integral(1.0) == pytest.approx(0.5)


def test_kernel_dict_round_trip():
    for k in (ExpKernel(2.0, True), StepKernel((1.0, 0.5), (1.0, 2.0))):
        assert kernel_from_dict(k.to_dict()) == k


# -- filter models ------------------------------------------------------


def test_filter_model_guards():
    with pytest.raises(ValueError):
        FilterModel.weighted_sum([1.0, 0.0], alpha=1.0)
    with pytest.raises(ValueError):
        FilterModel.weighted_sum([1.0], alpha=1.0, delta=1.0)
    with pytest.raises(MomentDivergence):
        FilterModel.weighted_sum(family=PowerAtoms(1.0), alpha=1.5, delta=0.6)
    with pytest.raises(MomentDivergence):
        FilterModel.product(Pareto(1.0), alpha=1.0)


def test_filter_model_kernel_condition_branches():
    f = FilterModel.kernel_integral(StepKernel((2.0,), (1.0,)), alpha=1.0, delta=0.5)
    # alpha < 2: int f^(alpha-delta) v f^2 = max(2^0.5, 2^2)
    assert f.kernel_condition() == pytest.approx(4.0)
    g = FilterModel.kernel_integral(StepKernel((2.0,), (1.0,)), alpha=3.0, delta=0.5)
    assert g.kernel_condition() == pytest.approx(2.0**3.5)


def test_filter_model_round_trip():
    for m in (FilterModel.weighted_sum([0.5, 0.5, 1.0], 1.0),
              FilterModel.weighted_sum([1.0], 1.0, family=GeometricAtoms()),
              FilterModel.product(Uniform(0, 1), 1.0),
              FilterModel.kernel_integral(ExpKernel(1.0), 1.5)):
        assert FilterModel.from_dict(m.to_dict()) == m


# -- counterexample noise -----------------------------------------------


def test_noise_law_trivial_case():
    law = CounterexampleLaw(CounterexampleSpec(1.0, 3.0, 0.0, 0.0, trunc=2.0))
    assert law.upper_mass == pytest.approx(0.5)
    assert law.point_mass == pytest.approx(0.5)


def test_noise_law_is_log_periodic_not_constant():
    law = build_noise_law(CounterexampleSpec(1.0, THETA_PI_LN2, 0.9, 0.0))
    x = np.geomspace(8.0, 32.0, 201)
    scaled = x * law.sf(x)
    assert np.allclose(4 * x * law.sf(4 * x), scaled, rtol=1e-12)
    assert scaled.max() - scaled.min() > 0.1
    assert float(4 * law.sf(4.0)) != pytest.approx(float(8 * law.sf(8.0)), abs=1e-3)


@st.composite
def specs(draw):
    alpha = draw(st.floats(0.3, 3.0))
    theta0 = draw(st.floats(0.5, 20.0))
    r = draw(st.floats(0.01, 1.0))
    phi = draw(st.floats(0, 2 * math.pi))
    return CounterexampleSpec(alpha, theta0, r * math.cos(phi), r * math.sin(phi))


@given(specs())
def test_noise_law_has_unit_mass_and_monotone_right_continuous_tail(spec):
    base = build_noise_law(spec).base
    assert base.point_mass + base.upper_mass == pytest.approx(1.0, abs=1e-15)
    grid = np.concatenate([np.geomspace(1e-3, 1e6, 4000), [1.0, base.trunc]])
    grid.sort()
    sf = base.sf(grid)
    assert np.all(np.diff(sf) <= 1e-15)
    assert float(base.sf(0.0)) == pytest.approx(1.0)
    # right-continuity at the breakpoints
    for b in (1.0, base.trunc):
        assert float(base.sf(b * (1 + 1e-12))) == pytest.approx(float(base.sf(b)), abs=1e-9)


def test_noise_tail_is_exact_beyond_truncation():
    spec = CounterexampleSpec(1.0, THETA_PI_LN2, 0.9, 0.0)
    law = build_noise_law(spec)
    x = np.geomspace(2.5, 1e4, 20)
    assert np.allclose(law.sf(x), 0.5 * counterexample_tail(spec, x), rtol=1e-15)


# -- sampling -----------------------------------------------------------------


def test_pareto_sample_tail_probability():
    n = 10**6
    z = sample_noise(Pareto(1.0), n, seed=11)
    p_hat = np.mean(z > 10)
    assert abs(p_hat - 0.1) <= 3 * math.sqrt(0.1 * 0.9 / n)


def test_sampling_is_deterministic():
    law = build_noise_law(CounterexampleSpec(1.0, THETA_PI_LN2, 0.9, 0.0))
    a = sample_noise(law, 50_000, seed=3)
    b = sample_noise(law, 50_000, seed=3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_noise(law, 50_000, seed=4))


def test_chunking_derives_sub_seeds_from_the_seed():
    law = Pareto(2.0)
    whole = sample_noise(law, 1000, seed=5, chunk=400)
    tail = sample_noise(law, 200, seed=7, chunk=400)
    assert np.array_equal(whole[800:], tail)


def test_counterexample_sample_matches_exact_tail():
    spec = CounterexampleSpec(1.0, THETA_PI_LN2, 0.9, 0.0)
    base = CounterexampleLaw(spec)
    n = 400_000
    z = sample_noise(base, n, seed=1)
    x = 2 * base.trunc
    p = float(base.sf(x))
    assert abs(np.mean(z > x) - p) <= 3 * math.sqrt(p * (1 - p) / n)
    assert abs(np.mean(z == 1.0) - base.point_mass) <= 3 * math.sqrt(0.25 / n)


def test_bisection_draws_invert_the_tail():
    base = CounterexampleLaw(CounterexampleSpec(1.5, 2.0, 0.3, -0.6))
    z = sample_noise(base, 20_000, seed=2)
    cont = z[z > base.trunc]
    # every continuous draw sits where the tail equals its uniform to 1e-12 relative in x
    rng = np.random.default_rng(2)
    v = 1.0 - rng.random(20_000)
    mask = z > base.trunc
    assert np.allclose(base.sf(cont), v[mask], rtol=1e-9)


def test_symmetrized_sample_has_both_signs():
    z = sample_noise(Symmetrized(Discrete.point(1.0)), 10_000, seed=0)
    assert set(np.unique(z)) == {-1.0, 1.0}
    assert abs(np.mean(z > 0) - 0.5) < 0.02
