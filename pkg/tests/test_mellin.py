import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from rvfilter.laws import (
    AbsCauchy,
    CounterexampleLaw,
    CounterexampleSpec,
    Discrete,
    Gamma,
    LogNormal,
    MomentDivergence,
    Pareto,
    TruncatedPower,
    Uniform,
)
from rvfilter.measures import (
    CallableKernel,
    ExpKernel,
    GeometricAtoms,
    PowerPiece,
    SpectralMeasure,
    StepKernel,
    TabulatedPiece,
    kernel_to_measure,
)
from rvfilter.mellin import (
    alpha_conjugate_atoms,
    alpha_conjugate_density,
    atoms_derivative_bound,
    eval_atoms,
    eval_atoms_derivative,
    eval_catalog,
    eval_kernel,
    eval_measure,
    law_by_quadrature,
    mellin_line,
    moment,
)

THETA_PI_LN2 = math.pi / math.log(2)


def scipy_line_integral(env, lo, hi, theta):
    """int_lo^hi env(u) e^(i theta u) du with scipy's QAWO/QAWF weights (independent route)."""
    if theta < 0:
        # env is real, so negative frequencies are conjugates
        return scipy_line_integral(env, lo, hi, -theta).conjugate()

    def piece(a, b):
        if theta == 0:
            return complex(integrate.quad(env, a, min(b, 200.0), limit=500, epsabs=1e-14, epsrel=1e-12)[0], 0.0)
        # envelopes used here are below e^-100 past u = 200
        b = min(b, 200.0)
        re = integrate.quad(env, a, b, weight="cos", wvar=theta, limit=500, epsabs=1e-14)[0]
        im = integrate.quad(env, a, b, weight="sin", wvar=theta, limit=500, epsabs=1e-14)[0]
        return complex(re, im)

    if math.isinf(lo):
        # reflect (-inf, mid] onto [-mid, inf)
        mid = 0.0 if math.isinf(hi) else min(0.0, hi)
        flipped = scipy_line_integral(lambda u: env(-u), -mid, np.inf, theta)
        right = scipy_line_integral(env, mid, hi, theta) if hi > mid else 0j
        return flipped.conjugate() + right
    return piece(lo, hi)


def law_oracle(law, alpha, theta):
    """E[Y^(alpha + i theta)] = atoms + int e^((alpha+1)u) pdf(e^u) e^(i theta u) du."""
    atoms = sum(w * x ** complex(alpha, theta) for x, w in law.atoms())
    lo, hi = law.support()
    ulo = math.log(lo) if lo > 0 else -math.inf
    uhi = math.log(hi) if hi < math.inf else math.inf

    def env(u):
        return math.exp((alpha + 1) * u) * float(law.pdf(math.exp(u)))

    edges = [ulo] + [math.log(b) for b in law.breakpoints() if b > 0 and ulo < math.log(b) < uhi] + [uhi]
    total = 0j
    for a, b in zip(edges[:-1], edges[1:]):
        total += scipy_line_integral(env, a, b, theta)
    return atoms + total


# -- atoms ----------------------------------------------------------------


def test_eval_atoms_examples():
    assert eval_atoms([(1, 1), (1, 1)], 1.0, 3.7) == pytest.approx(2 + 0j, abs=1e-15)
    assert abs(eval_atoms([(0.5, 1), (0.5, 1), (1, 1)], 1.0, THETA_PI_LN2)) < 1e-12
    assert eval_atoms([(0.4, 1), (0.3, 1), (1, 1)], 1.0, 0.0) == pytest.approx(1.7 + 0j, abs=1e-15)


def test_eval_atoms_rejects_nonpositive():
    with pytest.raises(ValueError):
        eval_atoms([(0.0, 1.0)], 1.0, 0.0)


atom_sets = st.lists(st.tuples(st.floats(0.01, 100.0), st.floats(0.01, 10.0)), min_size=1, max_size=8)


@settings(max_examples=1000)
@given(atom_sets, st.floats(0.0, 3.0), st.floats(-500.0, 500.0))
def test_triangle_inequality_bound(atoms, alpha, theta):
    assert abs(eval_atoms(atoms, alpha, theta)) <= eval_atoms(atoms, alpha, 0.0).real * (1 + 1e-12)


@given(atom_sets, st.floats(0.0, 3.0), st.floats(-200.0, 200.0))
def test_conjugate_symmetry_atoms(atoms, alpha, theta):
    a, b = eval_atoms(atoms, alpha, theta), eval_atoms(atoms, alpha, -theta)
    assert b == pytest.approx(a.conjugate(), abs=1e-12 * eval_atoms(atoms, alpha, 0.0).real)


@settings(max_examples=50)
@given(atom_sets, st.floats(0.2, 2.0), st.lists(st.floats(-50.0, 50.0), min_size=100, max_size=100))
def test_derivative_bound_and_finite_differences(atoms, alpha, thetas):
    th = np.array(thetas)
    h = 1e-5
    fd = (eval_atoms(atoms, alpha, th + h) - eval_atoms(atoms, alpha, th - h)) / (2 * h)
    exact = eval_atoms_derivative(atoms, alpha, th)
    scale = max(1.0, atoms_derivative_bound(atoms, alpha))
    assert np.all(np.abs(fd - exact) <= 1e-4 * scale)
    assert np.all(np.abs(exact) <= atoms_derivative_bound(atoms, alpha) * (1 + 1e-12))


# -- catalog laws -------------------------------------------------------------

CATALOG = [
    (Pareto(2.5), 1.0),
    (Uniform(0.0, 1.0), 1.0),
    (Uniform(0.5, 4.0), 2.0),
    (Gamma(2.0, 1.0), 1.0),
    (Gamma(0.7, 3.0), 0.5),
    (LogNormal(0.2, 0.6), 1.0),
    (AbsCauchy(), 0.5),
    (TruncatedPower(1.0, 1.0, math.e), 1.0),
    (TruncatedPower(2.0, 0.5, 3.0), 0.7),
    (CounterexampleLaw(CounterexampleSpec(1.0, THETA_PI_LN2, 0.9, 0.0)), 0.5),
    (Discrete.two_point(1.0, math.e, 0.7), 1.0),
]


@pytest.mark.parametrize("law,alpha", CATALOG, ids=lambda v: getattr(v, "kind", str(v)))
def test_closed_forms_match_independent_quadrature(law, alpha):
    thetas = np.random.default_rng(7).uniform(-25, 25, 50)
    for th in thetas:
        closed = eval_catalog(law, alpha, th).value
        assert closed == pytest.approx(law_oracle(law, alpha, th), abs=1e-8)


@pytest.mark.parametrize("law,alpha", CATALOG, ids=lambda v: getattr(v, "kind", str(v)))
def test_own_quadrature_matches_closed_form(law, alpha):
    for th in (0.0, 1.0, 7.5, -20.0):
        q = eval_catalog(law, alpha, th, method="quadrature")
        assert q.abs_error <= 1e-10
        assert q.value == pytest.approx(eval_catalog(law, alpha, th).value, abs=1e-8)


@pytest.mark.parametrize("law,alpha", CATALOG, ids=lambda v: getattr(v, "kind", str(v)))
def test_theta_zero_is_the_moment(law, alpha):
    s = eval_catalog(law, alpha, 0.0)
    assert abs(s.value.imag) <= 1e-14
    assert s.value.real > 0
    assert s.value.real == pytest.approx(moment(law, alpha), abs=max(s.abs_error, 1e-14))


def test_catalog_examples():
    assert eval_catalog(Gamma(1.0, 1.0), 1.0, 0.0).value == pytest.approx(1.0, abs=1e-14)
    two = Discrete.two_point(1.0, math.e, math.e / (1 + math.e))
    assert abs(eval_catalog(two, 1.0, math.pi).value) < 1e-15
    assert eval_catalog(Uniform(0, 1), 1.0, 0.0).value == pytest.approx(0.5)


def test_catalog_moment_divergence():
    with pytest.raises(MomentDivergence):
        eval_catalog(Pareto(1.0), 1.0, 0.0)
    with pytest.raises(MomentDivergence):
        eval_catalog(Pareto(2.0), 1.5, 0.0, delta=0.5)


def test_quadrature_conjugate_symmetry():
    law = LogNormal(0.0, 1.0)
    a = law_by_quadrature(law, 1.0, 3.0)
    b = law_by_quadrature(law, 1.0, -3.0)
    assert abs(a.value - b.value.conjugate()) <= 2 * max(a.abs_error, 1e-15)


def test_truncated_power_zeros_follow_log_ratio():
    # density proportional to y^-2 on (1, e^(2 pi)) at alpha = 1: zeros at 2 pi n / log(b/a) = n
    law = TruncatedPower(1.0, 1.0, math.exp(2 * math.pi))
    for n in (1, 2, 3):
        q = eval_catalog(law, 1.0, float(n), method="quadrature")
        assert abs(q.value) < 1e-9
    assert abs(eval_catalog(law, 1.0, 0.5, method="quadrature").value) > 0.1


# -- kernels ------------------------------------------------------------------


def test_exp_kernel_examples():
    assert eval_kernel(ExpKernel(1.0), 1.0, 0.0).value == pytest.approx(1.0)
    for lam, alpha, th in [(1.0, 1.0, 0.0), (1.0, 1.0, 1.0), (1.0, 1.0, 10.0), (2.5, 0.7, -3.0)]:
        closed = eval_kernel(ExpKernel(lam), alpha, th).value
        assert closed == pytest.approx(1 / (lam * complex(alpha, th)), abs=1e-15)
        quad = eval_kernel(ExpKernel(lam), alpha, th, method="quadrature").value
        assert quad == pytest.approx(closed, abs=1e-8)


def test_two_sided_exp_kernel_closed_form_vs_quadrature():
    for lam, alpha, th in [(1.0, 1.0, 2.0), (0.5, 2.0, -7.0)]:
        k = ExpKernel(lam, two_sided=True)
        closed = eval_kernel(k, alpha, th).value
        assert closed == pytest.approx(2 / (lam * complex(alpha, th)), abs=1e-15)
        # 2 int_0^inf e^(-lam alpha s) e^(-i lam theta s) ds in the time variable
        env = lambda t: 2 * math.exp(-lam * alpha * t)  # noqa: E731
        re = integrate.quad(env, 0, np.inf, weight="cos", wvar=lam * abs(th))[0]
        im = -math.copysign(1, th) * integrate.quad(env, 0, np.inf, weight="sin", wvar=lam * abs(th))[0]
        assert closed == pytest.approx(complex(re, im), abs=1e-8)
        assert eval_kernel(k, alpha, th, method="quadrature").value == pytest.approx(closed, abs=1e-8)


def test_exp_kernel_oracle_in_time_domain():
    # int_0^inf e^(-(alpha + i theta) s) ds by scipy in the s variable
    for th in (0.0, 1.0, 10.0):
        re = integrate.quad(lambda s: math.exp(-s), 0, np.inf, weight="cos", wvar=th)[0] if th else 1.0
        im = -integrate.quad(lambda s: math.exp(-s), 0, np.inf, weight="sin", wvar=th)[0] if th else 0.0
        assert eval_kernel(ExpKernel(1.0), 1.0, th).value == pytest.approx(complex(re, im), abs=1e-8)


@given(st.lists(st.tuples(st.floats(0.05, 5.0), st.floats(0.1, 3.0)), min_size=1, max_size=6),
       st.floats(0.2, 3.0), st.floats(-100.0, 100.0))
def test_step_kernel_equals_image_atoms_exactly(pieces, alpha, theta):
    k = StepKernel(tuple(v for v, _ in pieces), tuple(m for _, m in pieces))
    atoms = [(v, m) for v, m in pieces]
    assert eval_kernel(k, alpha, theta).value == eval_atoms(atoms, alpha, theta)


def test_callable_kernel_quadrature():
    k = CallableKernel(lambda s: np.exp(-s), 0.0, 40.0)
    for th in (0.0, 3.0):
        assert eval_kernel(k, 1.0, th).value == pytest.approx(1 / complex(1.0, th), abs=1e-10)


def test_kernel_divergence():
    with pytest.raises(MomentDivergence):
        eval_kernel(ExpKernel(1.0), 0.0, 1.0)


# -- moments --------------------------------------------------------------


def test_moment_examples():
    assert moment(SpectralMeasure(((2.0, 1.0),)), 3.0) == 8.0
    assert moment(SpectralMeasure(families=(GeometricAtoms(1.0, 0.5, 1),)), 1.0) == pytest.approx(1.0)
    assert moment(SpectralMeasure(ac_pieces=(PowerPiece(1.0, 1.0, 1.0, math.inf),)), 0.5) == pytest.approx(2.0)
    assert moment(Pareto(1.0), 1.0) == math.inf
    assert moment([(2.0, 1.0), (2.0, 1.0)], 1.0) == 4.0


# -- alpha-conjugate ----------------------------------------------------------


def test_conjugate_of_point_mass_is_atomic_at_zero():
    law = Discrete.point(1.0)
    assert alpha_conjugate_atoms(law, 2.0) == ((0.0, 1.0),)
    assert alpha_conjugate_density(law, 2.0, 0.0) == math.inf
    assert alpha_conjugate_density(law, 2.0, 0.3) == 0.0


def test_conjugate_of_lognormal_is_shifted_normal():
    x = np.linspace(-4, 6, 101)
    dens = alpha_conjugate_density(LogNormal(0.0, 1.0), 1.0, x)
    assert np.allclose(dens, stats.norm(loc=1.0, scale=1.0).pdf(x), rtol=1e-12, atol=1e-300)


def test_conjugate_density_integrates_to_one():
    total, _ = integrate.quad(lambda x: alpha_conjugate_density(Uniform(0, 1), 1.0, x), -np.inf, 0.0,
                              epsabs=1e-13, epsrel=1e-12)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_conjugate_requires_finite_moment():
    with pytest.raises(MomentDivergence):
        alpha_conjugate_density(Pareto(1.0), 1.0, 0.0)


# -- line transforms ------------------------------------------------------


LINE_CASES = [
    ([0.5, 0.5, 1.0], 1.0),
    (SpectralMeasure(families=(GeometricAtoms(1.0, 0.5, 1),)), 1.0),
    (SpectralMeasure(((1.0, 1.0),), (PowerPiece(0.4, 1.0, 1.0, math.inf),)), 0.6),
    (SpectralMeasure(ac_pieces=(TabulatedPiece((1.0, 2.0, 3.0), (0.0, 1.0, 0.0)),)), 1.0),
    (Gamma(2.0, 1.0), 1.0),
    (StepKernel((0.5, 0.5, 1.0), (1.0, 1.0, 1.0)), 1.0),
    (CallableKernel(lambda s: 1.0 - s, 0.0, 1.0), 1.0),
]


@pytest.mark.parametrize("obj,alpha", LINE_CASES)
def test_line_transform_agrees_with_direct_evaluation(obj, alpha):
    tr = mellin_line(obj, alpha, theta_max=30.0)
    for th in (0.0, 0.9, 12.0, 29.0):
        direct = eval_measure(obj, alpha, th).value
        assert complex(tr.value(th)[0]) == pytest.approx(direct, abs=1e-8 + 2 * tr.err)


@pytest.mark.parametrize("obj,alpha", LINE_CASES)
def test_line_transform_lipschitz_constants_bound_derivatives(obj, alpha):
    tr = mellin_line(obj, alpha, theta_max=30.0)
    if not tr.parts:
        # nothing is scanned when the whole transform is closed form
        assert tr.closed_form is not None
        return
    th = np.linspace(0, 30, 3001)
    d1 = np.abs(tr.deriv_centered(th))
    assert np.all(d1 <= tr.lip(1) * (1 + 1e-9) + 1e-12)
    h = 1e-4
    d2 = np.abs(tr.deriv_centered(th + h) - tr.deriv_centered(th - h)) / (2 * h)
    assert np.all(d2 <= tr.lip(2) * (1 + 1e-3) + 1e-8)


def test_tabulated_density_transform_matches_oracle():
    piece = TabulatedPiece((1.0, 2.0, 3.0), (0.0, 1.0, 0.0))
    m = SpectralMeasure(ac_pieces=(piece,))

    def env(u):
        return math.exp(2 * u) * float(piece.density(math.exp(u)))

    for th in (0.0, 4.0, 25.0):
        oracle = scipy_line_integral(env, 0.0, math.log(2), th) + scipy_line_integral(env, math.log(2),
                                                                                     math.log(3), th)
        assert eval_measure(m, 1.0, th).value == pytest.approx(oracle, abs=1e-9)


def test_kernel_image_transform_equals_kernel_transform():
    k = ExpKernel(2.0)
    for th in (0.0, 5.0):
        a = eval_measure(kernel_to_measure(k), 0.8, th).value
        assert a == pytest.approx(eval_kernel(k, 0.8, th).value, abs=1e-13)
