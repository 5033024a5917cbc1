from collections import Counter

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from koopres.errors import ChartDomainError, ChartMismatchError, DegreeChangingError, UnknownPresetError
from koopres.liouville import (
    FirstOrderOperator,
    GradedBasis,
    analytic_eigenvalue,
    analytic_spectrum,
    apply,
    block_csv,
    build_liouville,
    compare_spectra,
    complex_scale,
    completeness_classify,
    distributional_eigencheck,
    matrix_on_basis,
    oscillator_state,
    representation_check,
    selfadjointness_residual,
    spectrum,
    to_complex_chart,
)
from koopres.presets import (
    ROTATED_CHART,
    XP_CHART,
    Z4_CHART,
    Z_CHART,
    damped_oscillator,
    damped_toy,
    damped_toy_xp,
    free_particle,
    harmonic,
    power_damped,
)
from koopres.symbolic import ComplexChartMap, ExpPoly, MultiPolynomial, gaussian_dressing, weighted_inner

from strategies import polynomials

g, w = sp.symbols("gamma omega", positive=True)
x, p = MultiPolynomial.var(XP_CHART, "x"), MultiPolynomial.var(XP_CHART, "p")
z, zb = MultiPolynomial.var(Z_CHART, "z"), MultiPolynomial.var(Z_CHART, "zb")
I = sp.I


def _osc_op(omega=w):
    return build_liouville((x**2 + p**2) * (omega / 2))


def _toy_op(gamma=g):
    return build_liouville(x * p * -gamma)


# -- construction -----------------------------------------------------------


def test_build_examples():
    op = _osc_op()
    assert op.coefficient("x") == p * I * w
    assert op.coefficient("p") == x * -I * w
    toy = _toy_op()
    assert toy.coefficient("x") == x * -I * g
    assert toy.coefficient("p") == p * I * g
    assert build_liouville(MultiPolynomial.zero(XP_CHART)).is_zero


def test_build_rejects_non_canonical_chart():
    with pytest.raises(ChartMismatchError):
        build_liouville(z * zb)


def test_complex_chart_forms():
    cmap = harmonic().complex_map
    op = to_complex_chart(_osc_op(), cmap)
    assert op.coefficient("z") == z * w
    assert op.coefficient("zb") == zb * -w
    ident = ComplexChartMap.from_forward(XP_CHART, XP_CHART, {"x": x, "p": p})
    assert to_complex_chart(_osc_op(), ident) == _osc_op()


def test_damped_oscillator_complex_form():
    pre = damped_oscillator(w, g)
    op = to_complex_chart(build_liouville(pre.hamiltonian), pre.complex_map)
    alpha = w - I * g
    z1, z1b, z2, z2b = (MultiPolynomial.var(Z4_CHART, n) for n in Z4_CHART.names)
    assert op.coefficient("z1") == z1 * alpha
    assert op.coefficient("z1b") == z1b * -sp.conjugate(alpha)
    assert op.coefficient("z2") == z2 * sp.conjugate(alpha)
    assert op.coefficient("z2b") == z2b * -alpha


def test_apply_examples():
    assert apply(_toy_op(), x) == ExpPoly.from_poly(x * -I * g)
    op = to_complex_chart(_osc_op(), harmonic(w).complex_map)
    for n, m in [(0, 0), (2, 0), (1, 3), (4, 1)]:
        f = z**n * zb**m
        assert apply(op, f) == ExpPoly.from_poly(f * w * (n - m))
    assert apply(_osc_op(), MultiPolynomial.const(XP_CHART, 1)).is_zero


@settings(max_examples=40)
@given(polynomials(), polynomials())
def test_generator_is_a_derivation(a, b):
    op = _osc_op(3)
    lhs = apply(op, a * b)
    assert lhs == apply(op, a) * b + apply(op, b) * a


@given(polynomials(complex_coeffs=True))
def test_generator_commutes_with_conjugation_up_to_sign(f):
    # i L is i times a real vector field, so conj(iL f) = -iL conj(f)
    op = _osc_op(2)
    assert apply(op, f).conjugate() == -apply(op, f.conjugate())


def test_oscillator_kernel():
    op = to_complex_chart(_osc_op(), harmonic(w).complex_map)
    for k in range(5):
        assert apply(op, (z * zb) ** k).is_zero


# -- matrices and spectra ---------------------------------------------------


def test_toy_blocks_are_diagonal():
    basis = GradedBasis(XP_CHART, 2)
    blocks = matrix_on_basis(_toy_op(1), basis)
    for d, M in blocks.items():
        mons = basis.block(d)
        np.testing.assert_allclose(M, np.diag([1j * (m - n) for n, m in mons]), atol=0)


def test_oscillator_degree_one_block():
    M = matrix_on_basis(_osc_op(1), GradedBasis(XP_CHART, 1))[1]
    np.testing.assert_array_equal(M, np.array([[0, 1j], [-1j, 0]]))
    assert sorted(np.linalg.eigvals(M).real) == pytest.approx([-1, 1])


def test_degree_raising_rejected():
    with pytest.raises(DegreeChangingError, match="degree-raising operator"):
        matrix_on_basis(build_liouville(x**2 * p * -g), GradedBasis(XP_CHART, 2))


def test_block_csv():
    basis = GradedBasis(XP_CHART, 1)
    text = block_csv(matrix_on_basis(_toy_op(1), basis)[1], basis, 1)
    lines = text.strip().splitlines()
    assert lines[0] == "target,p,x"
    assert len(lines) == 3


def _multiplicities(D, rule):
    return Counter(rule(n, m) for n in range(D + 1) for m in range(D + 1 - n))


def test_toy_spectrum_multiplicities():
    report = spectrum(_toy_op(1), GradedBasis(XP_CHART, 3))
    expected = _multiplicities(3, lambda n, m: m - n)
    for k, mult in expected.items():
        assert report.multiplicity_of(1j * k) == mult
    assert report.total_multiplicity == sum(expected.values())


def test_oscillator_spectrum_multiplicities():
    report = spectrum(_osc_op(1), GradedBasis(XP_CHART, 3))
    for l, mult in _multiplicities(3, lambda n, m: n - m).items():
        assert report.multiplicity_of(l) == mult


def test_damped_oscillator_degree_one():
    pre = damped_oscillator(1, sp.Rational(1, 2))
    op = to_complex_chart(build_liouville(pre.hamiltonian), pre.complex_map)
    report = spectrum(op, GradedBasis(Z4_CHART, 1))
    for lam in (1 - 0.5j, -1 - 0.5j, 1 + 0.5j, -1 + 0.5j):
        assert report.multiplicity_of(lam) == 1


def test_analytic_examples():
    assert analytic_eigenvalue("damped-oscillator", (1, 0, 0, 0), w, g) == w - I * g
    assert analytic_eigenvalue("damped-oscillator", (1, 0, 1, 0), w, g) == 2 * w
    for preset, idx in [("harmonic", (0, 0)), ("damped-toy", (0, 0)), ("damped-oscillator", (0, 0, 0, 0))]:
        assert analytic_eigenvalue(preset, idx) == 0
    with pytest.raises(UnknownPresetError):
        analytic_spectrum("free-particle", 2)


@pytest.mark.parametrize("D", range(7))
@pytest.mark.parametrize("name", ["harmonic", "damped-toy"])
def test_matrix_matches_analytic(name, D):
    pre = harmonic(1) if name == "harmonic" else damped_toy(1)
    op = build_liouville(pre.hamiltonian)
    basis = GradedBasis(pre.chart, D)
    if pre.complex_map is not None:
        op = to_complex_chart(op, pre.complex_map)
        basis = GradedBasis(pre.complex_map.target, D)
    assert compare_spectra(spectrum(op, basis), analytic_spectrum(name, D)) <= 1e-10


@pytest.mark.parametrize("D", range(5))
def test_damped_oscillator_matrix_matches_analytic(D):
    pre = damped_oscillator(1, 0.5)
    op = to_complex_chart(build_liouville(pre.hamiltonian), pre.complex_map)
    report = spectrum(op, GradedBasis(Z4_CHART, D))
    assert compare_spectra(report, analytic_spectrum("damped-oscillator", D, 1, 0.5)) <= 1e-10


def test_oscillator_xp_chart_matches_complex_chart():
    D = 4
    a = spectrum(_osc_op(1), GradedBasis(XP_CHART, D))
    b = analytic_spectrum("harmonic", D)
    assert compare_spectra(a, b) <= 1e-10


def test_spectrum_json_roundtrip():
    from koopres.liouville import SpectrumReport

    report = analytic_spectrum("damped-toy", 2)
    again = SpectrumReport.from_json(report.dumps())
    assert compare_spectra(report, again) == 0


# -- inner products and self-adjointness ------------------------------------


def _inner_formula(n, m, k, l):
    if n - m != k - l:
        return sp.Integer(0)
    return sp.factorial(m + k) / sp.sqrt(sp.factorial(n + m) * sp.factorial(k + l))


@pytest.mark.parametrize("n,m,k,l", [(1, 0, 1, 0), (1, 1, 0, 0), (1, 0, 0, 1), (2, 1, 3, 2), (3, 3, 1, 1)])
def test_oscillator_state_inner_products(n, m, k, l):
    got = weighted_inner(oscillator_state(n, m), oscillator_state(k, l))
    assert sp.simplify(got - _inner_formula(n, m, k, l)) == 0


def test_selfadjointness_examples():
    G = gaussian_dressing(XP_CHART)
    assert selfadjointness_residual(_toy_op(), G * x, G * p) == 0
    mult = FirstOrderOperator(XP_CHART, {}, x)
    assert selfadjointness_residual(mult, G * (x + p), G * p**2) == 0


@settings(max_examples=25, deadline=None)
@given(polynomials(max_degree=3, max_terms=3, complex_coeffs=True),
       polynomials(max_degree=3, max_terms=3, complex_coeffs=True))
def test_oscillator_generator_is_symmetric(a, b):
    G = gaussian_dressing(XP_CHART)
    assert sp.simplify(selfadjointness_residual(_osc_op(1), G * a, G * b)) == 0


# -- free particle ----------------------------------------------------------


def _plane_wave(chart, k):
    phase = MultiPolynomial.zero(chart)
    for name, kk in zip(chart.base_names, k):
        phase = phase + MultiPolynomial.var(chart, name) * (-I * kk)
    return ExpPoly.exp(phase)


def test_free_particle_generator_gives_k_squared_over_m():
    pre = free_particle(1)
    op = build_liouville(pre.hamiltonian)
    k = (1, 0, 0)
    pin = dict(zip(pre.chart.momentum_names, k))
    f = _plane_wave(pre.chart, k)
    assert distributional_eigencheck(op, f, pin, 1).is_zero
    assert not distributional_eigencheck(op, f, pin, sp.Rational(1, 2)).is_zero


def test_free_particle_half_factor_operator():
    # the operator (i/2m) p . grad has eigenvalue k^2/(2m) on the same plane wave
    pre = free_particle(1)
    c = pre.chart
    op = FirstOrderOperator(c, {xn: MultiPolynomial.var(c, pn) * (I / 2)
                                for xn, pn in zip(c.base_names, c.momentum_names)})
    k = (1, 0, 0)
    res = distributional_eigencheck(op, _plane_wave(c, k), dict(zip(c.momentum_names, k)), sp.Rational(1, 2))
    assert res.is_zero


def test_free_particle_zero_momentum_and_misuse():
    pre = free_particle(1)
    op = build_liouville(pre.hamiltonian)
    f = _plane_wave(pre.chart, (0, 0, 0))
    assert distributional_eigencheck(op, f, dict(zip(pre.chart.momentum_names, (0, 0, 0))), 0).is_zero
    chart1 = XP_CHART
    wave = _plane_wave(chart1, (2,))
    assert not distributional_eigencheck(_toy_op(1), wave, {"p": 2}, 2).is_zero


# -- complex scaling --------------------------------------------------------


def test_complex_scaling_examples():
    X, P = MultiPolynomial.var(ROTATED_CHART, "X"), MultiPolynomial.var(ROTATED_CHART, "P")
    H = (P**2 - X**2) * (g / 2)
    assert complex_scale(H, sp.pi / 4) == (P**2 + X**2) * (I * g / 2)
    assert complex_scale(H, -sp.pi / 4) == (P**2 + X**2) * (-I * g / 2)
    assert complex_scale(H, 0) == H


@settings(max_examples=30)
@given(polynomials(max_degree=3, complex_coeffs=True),
       st.floats(-3, 3, allow_nan=False), st.floats(-3, 3, allow_nan=False))
def test_complex_scaling_composition(f, l1, l2):
    lhs = complex_scale(complex_scale(f, l1), l2)
    rhs = complex_scale(f, l1 + l2)
    diff = (lhs - rhs).numeric()[1]
    assert np.all(np.abs(diff) <= 1e-12)


@given(polynomials(max_degree=3, complex_coeffs=True))
def test_complex_scaling_composition_exact_at_quarter_turns(f):
    q = sp.pi / 4
    assert complex_scale(complex_scale(f, q), q) == complex_scale(f, 2 * q)
    assert complex_scale(complex_scale(f, q), -q) == f


def test_complex_scaling_commutes_with_generator():
    H = damped_toy_xp(g).hamiltonian
    lam = sp.pi / 4
    assert complex_scale(build_liouville(H), lam) == build_liouville(complex_scale(H, lam))


def test_complex_scaling_needs_pair_in_higher_dimension():
    with pytest.raises(ChartMismatchError):
        complex_scale(damped_oscillator().hamiltonian, 1)
    scaled = complex_scale(damped_oscillator().hamiltonian, 0, pair=("x1", "p1"))
    assert scaled == damped_oscillator().hamiltonian


# -- representations --------------------------------------------------------


def test_representation_checks():
    assert representation_check("harmonic", x**2 * p) <= 1e-6
    X, P = MultiPolynomial.var(ROTATED_CHART, "X"), MultiPolynomial.var(ROTATED_CHART, "P")
    assert representation_check("damped-toy-xp", X * P) <= 1e-6
    assert representation_check("harmonic", MultiPolynomial.const(XP_CHART, 3)) == 0


def test_representation_domain_errors():
    with pytest.raises(ChartDomainError):
        representation_check("harmonic", x, points=[[0.0, 0.0]])
    X = MultiPolynomial.var(ROTATED_CHART, "X")
    with pytest.raises(ChartDomainError):
        representation_check("damped-toy-xp", X, points=[[2.0, 1.0]])


# -- completeness -----------------------------------------------------------


def test_completeness_examples():
    assert completeness_classify(x * p * -g).kind == "complete"
    two = completeness_classify(x**2 * p * -g)
    assert (two.kind, two.n) == ("incomplete", 2)
    five = completeness_classify(x**5 * p * -g)
    assert (five.kind, five.n) == ("incomplete", 5)
    assert completeness_classify(x * p**2).kind == "unclassified"
    assert completeness_classify(power_damped(2, 1).hamiltonian).escape_time(1.0) == pytest.approx(-1.0)
    assert completeness_classify(x * p * -1).escape_time(1.0) is None


def test_escape_time_general_power():
    c = completeness_classify(power_damped(3, 2).hamiltonian)
    # x^-2 = x0^-2 + 4 t vanishes at t = -1/(4 x0^2)
    assert c.escape_time(0.5) == pytest.approx(-1.0)
