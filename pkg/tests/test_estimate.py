import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from koopres.errors import IllConditionedDictionaryError
from koopres.estimate import (
    Dictionary,
    SnapshotSet,
    collect_snapshots,
    dressed_dictionary,
    edmd_spectrum,
    fit_koopman,
    fit_koopman_matrix,
    recover_generator_spectrum,
)
from koopres.flow import integrate
from koopres.lift import lift_vector_field, VectorField
from koopres.liouville import GradedBasis, analytic_spectrum, build_liouville, compare_spectra, matrix_on_basis
from koopres.presets import XP_CHART, damped_toy, harmonic, power_damped
from koopres.symbolic import CoordinateChart, MultiPolynomial

x, p = MultiPolynomial.var(XP_CHART, "x"), MultiPolynomial.var(XP_CHART, "p")
BOX = np.random.default_rng(0).uniform(-2, 2, (50, 2))


def test_snapshot_cardinality():
    snaps = collect_snapshots(damped_toy(1), BOX, 0.1, steps=3)
    assert len(snaps) == 150
    assert snaps.dt == 0.1


def test_harmonic_snapshots_stay_on_circle():
    phi = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    snaps = collect_snapshots(harmonic(1), np.c_[np.cos(phi), np.sin(phi)], 0.3, steps=2)
    np.testing.assert_allclose(np.hypot(*snaps.Y.T), 1, atol=1e-12)


def test_escape_during_sampling_warns():
    with pytest.warns(RuntimeWarning, match="escaped"):
        snaps = collect_snapshots(power_damped(2, 1), [[-1.0, 1.0], [0.1, 0.1]], 0.6, steps=2, method="integrate")
    assert len(snaps) == 3


def test_damped_toy_k_is_diagonal():
    gamma, dt = 1.0, 0.1
    K = fit_koopman_matrix(collect_snapshots(damped_toy(gamma), BOX, dt), Dictionary.from_polys([x, p]))
    np.testing.assert_allclose(K, np.diag([math.exp(-gamma * dt), math.exp(gamma * dt)]), atol=1e-10)


def test_harmonic_k_is_rotation():
    omega, dt = 1.0, 0.1
    K = fit_koopman_matrix(collect_snapshots(harmonic(omega), BOX, dt), Dictionary.from_polys([x, p]))
    c, s = math.cos(omega * dt), math.sin(omega * dt)
    # psi(x') = psi(x) K with x' = c x + s p, p' = -s x + c p
    np.testing.assert_allclose(K, [[c, -s], [s, c]], atol=1e-10)


def test_zero_field_gives_identity():
    base = CoordinateChart.plain(("x",))
    sys_ = lift_vector_field(VectorField(("x",), (MultiPolynomial.zero(base),), "still"))
    K = fit_koopman_matrix(collect_snapshots(sys_, BOX, 0.1), Dictionary.monomials(XP_CHART, 2))
    np.testing.assert_allclose(K, np.eye(6), atol=1e-10)
    report = recover_generator_spectrum(K, 0.1)
    assert np.all(np.abs(report.values) <= 1e-8)


def test_fit_equals_exponential_of_generator_block():
    # psi(Phi_dt x) = psi(x) K with K = expm(-i dt M)^T in the monomial basis, where M is i L on coefficients
    dt, D = 0.1, 3
    pre = damped_toy(0.7)
    basis = GradedBasis(XP_CHART, D)
    blocks = matrix_on_basis(build_liouville(pre.hamiltonian), basis)
    M = np.zeros((len(basis), len(basis)), dtype=complex)
    for d, sl in basis.block_slices().items():
        M[sl, sl] = blocks[d]
    expected = expm(-1j * dt * M).T
    K = fit_koopman_matrix(collect_snapshots(pre, BOX, dt), Dictionary.monomials(XP_CHART, D))
    assert np.linalg.norm(K - expected) <= 1e-8


def test_damped_toy_spectrum_from_xp_dictionary():
    report = recover_generator_spectrum(fit_koopman(collect_snapshots(damped_toy(1), BOX, 0.1),
                                                    Dictionary.from_polys([x, p])), 0.1)
    assert compare_spectra(report, [-1j, 1j]) <= 1e-8


@pytest.mark.parametrize("name, pre", [("harmonic", harmonic(1)), ("damped-toy", damped_toy(1))])
def test_monomial_dictionary_recovers_analytic_spectrum(name, pre):
    report = edmd_spectrum(pre, 3, 0.1)
    assert compare_spectra(report, analytic_spectrum(name, 3)) <= 1e-6
    meta = report.metadata
    assert meta["dt"] == 0.1 and meta["dict_degree"] == 3
    assert meta["condition_number"] < 1e10
    assert meta["aliasing_guard"]["flagged"] == 0


@pytest.mark.parametrize("pre", [harmonic(1), damped_toy(1)])
def test_dt_halving_consistency(pre):
    a = edmd_spectrum(pre, 3, 0.1)
    b = edmd_spectrum(pre, 3, 0.05)
    assert compare_spectra(a, b) <= 1e-6


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(0.2, 5), min_size=6, max_size=6), st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_spectrum_invariant_under_affine_rescaling(scales, shifts):
    dt = 0.1
    snaps = collect_snapshots(damped_toy(1), BOX, dt)
    base = Dictionary.monomials(XP_CHART, 2)
    ref = recover_generator_spectrum(fit_koopman(snaps, base), dt)
    # the constant is in the dictionary, so shifting by constants keeps the span
    polys = [MultiPolynomial.monomial(XP_CHART, e) for e in GradedBasis(XP_CHART, 2).elements]
    moved = [q * a + (b if k else 0) for k, (q, a, b) in enumerate(zip(polys, scales, shifts))]
    report = recover_generator_spectrum(fit_koopman(snaps, Dictionary.from_polys(moved)), dt)
    assert compare_spectra(ref, report) <= 1e-8


def test_identity_k_has_zero_spectrum():
    report = recover_generator_spectrum(np.eye(3), 0.5)
    assert compare_spectra(report, [0, 0, 0]) == 0


def test_aliasing_flagged():
    report = recover_generator_spectrum(fit_koopman(collect_snapshots(harmonic(1), BOX, 3.1),
                                                    Dictionary.from_polys([x, p])), 3.1)
    assert report.metadata["aliasing_guard"]["flagged"] == 2
    assert "notes" in report.metadata


def test_zero_eigenvalue_excluded():
    report = recover_generator_spectrum(np.diag([1.0, 0.0]), 0.1)
    assert report.total_multiplicity == 1
    assert report.metadata["notes"]


def test_ill_conditioned_dictionary():
    snaps = collect_snapshots(damped_toy(1), BOX, 0.1)
    with pytest.raises(IllConditionedDictionaryError) as info:
        fit_koopman(snaps, Dictionary.from_polys([x, p, x + p]))
    assert info.value.condition_number > 1e10
    with pytest.raises(IllConditionedDictionaryError):
        fit_koopman(SnapshotSet(0.1, BOX[:2], BOX[:2], ("x", "p")), Dictionary.monomials(XP_CHART, 2))


def test_snapshots_from_trajectory():
    tr = integrate(damped_toy(1), [1, 1], 1.0)
    with pytest.raises(ValueError, match="uniformly"):
        SnapshotSet.from_trajectory(tr)
    from koopres.flow import Trajectory

    t = np.arange(0, 1.05, 0.1)
    uniform = Trajectory(t, np.c_[np.exp(-t), np.exp(t)], ("x", "p"))
    snaps = SnapshotSet.from_trajectory(uniform)
    assert snaps.dt == pytest.approx(0.1)
    assert len(snaps) == len(t) - 1


def test_dressed_dictionary_fit_runs():
    d = dressed_dictionary(XP_CHART, 1)
    assert d.labels[0] == "1*G"
    assert d.gram_condition(BOX) < 1e10
