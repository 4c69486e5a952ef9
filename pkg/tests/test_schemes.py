import numpy as np
import pytest
from hypothesis import assume, given, seed, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid
from scipy.optimize import minimize_scalar
from scipy.signal import argrelmax
from scipy.stats import norm

from experiments.spin_quench import closed_form_mean, closed_form_pdf
from pointer.gaussian import make_pointer, pure_pointer
from quantum.dynamics import Protocol, untouched_average_work
from quantum.errors import UnsupportedCaseError
from quantum.operators import DensityMatrix, commutator_norm, project_diagonal
from work.schemes import (
    broad_gaussian_approx,
    imprecise_limit_pdf,
    imprecise_q,
    mean_work,
    pem_work_pdf,
    tmh_quasi_pdf,
    two_gaussian_work_pdf,
    work_meter_pdf,
)
from tests.conftest import P_GROUND, Q_MAX
from tests.helpers import random_density, random_hermitian, random_protocol, window_masses

PROJECTIVE_VALUES = np.array([-1.5, -0.5, 0.5, 1.5])
W = np.linspace(-4, 4, 1601)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def _maxima(pdf, w=W):
    """Local maxima of pdf refined by bounded minimization."""
    values = pdf.evaluate(w)
    found = []
    for i in argrelmax(values)[0]:
        res = minimize_scalar(lambda x: -pdf.evaluate(x), bounds=(w[i - 1], w[i + 1]), method="bounded",
                              options={"xatol": 1e-10})
        found.append(res.x)
    return np.array(found)


def test_projective_atoms_of_spin_quench(quench):
    p, rho = quench(Q_MAX)
    atoms = pem_work_pdf(p, rho)
    assert np.allclose(atoms.positions, PROJECTIVE_VALUES)
    assert np.allclose(atoms.weights, [0.15, 0.35, 0.15, 0.35], atol=1e-12)
    assert atoms.mean() == pytest.approx(0.2, abs=1e-12)


@pytest.mark.parametrize("q", [0.0, Q_MAX, -Q_MAX])
@pytest.mark.parametrize("sigma_e2", [0.01, 0.1, 1.0])
def test_work_meter_matches_closed_form(quench, q, sigma_e2):
    p, rho = quench(q)
    pdf = work_meter_pdf(p, pure_pointer(sigma_e2), rho)
    expected = closed_form_pdf(W, P_GROUND, complex(q), 1.0, 2.0, sigma_e2)
    assert np.allclose(pdf.evaluate(W), expected, rtol=0, atol=1e-12)


def test_separated_peaks_sit_at_projective_values(quench):
    p, rho = quench(0.0)
    peaks = _maxima(work_meter_pdf(p, pure_pointer(0.01), rho))
    assert len(peaks) == 4
    assert np.allclose(peaks, PROJECTIVE_VALUES, atol=1e-6)


@pytest.mark.parametrize("q", [Q_MAX, -Q_MAX])
def test_coherences_displace_peaks(quench, q):
    p, rho = quench(q)
    peaks = _maxima(work_meter_pdf(p, pure_pointer(0.1), rho))
    offsets = np.abs(peaks[:, None] - PROJECTIVE_VALUES[None, :]).min(axis=1)
    assert offsets.max() > 0.01


@pytest.mark.parametrize("q", [Q_MAX, 0.5 * Q_MAX, 0.0, -0.5 * Q_MAX, -Q_MAX])
def test_mean_work_limits(quench, q):
    p, rho = quench(q)
    accurate = mean_work(p, pure_pointer(1e-6), rho)
    assert accurate == pytest.approx(pem_work_pdf(p, rho).mean(), abs=1e-6)
    assert accurate == pytest.approx(0.2, abs=1e-6)

    imprecise = mean_work(p, pure_pointer(1e4), rho)
    assert imprecise == pytest.approx(closed_form_mean(P_GROUND, complex(q), 1.0, 2.0, 1e4), abs=1e-10)
    assert imprecise == pytest.approx(untouched_average_work(p, rho), abs=2e-5)
    assert untouched_average_work(p, rho) == pytest.approx(0.2 + 2 * q, abs=1e-12)


def test_untouched_limit_value_for_maximal_coherence(quench):
    p, rho = quench(Q_MAX)
    assert untouched_average_work(p, rho) == pytest.approx(1.11652, abs=1e-5)


@seed(30)
@settings(max_examples=60, deadline=None)
@given(instance=seeds, dim=st.integers(min_value=2, max_value=5))
def test_mean_work_agrees_with_mixture_mean(instance, dim):
    rng = np.random.default_rng(instance)
    p = random_protocol(rng, dim)
    rho = random_density(rng, dim)
    ptr = make_pointer(rng.uniform(0.05, 1.0), 8.0, sym_xp=rng.uniform(-0.5, 0.5))
    assert mean_work(p, ptr, rho) == pytest.approx(work_meter_pdf(p, ptr, rho).mean(), abs=1e-9)
    assert two_gaussian_work_pdf(p, ptr, rho).mean() == pytest.approx(mean_work(p, ptr, rho), abs=1e-9)


def test_imprecise_limit_goes_negative(quench):
    p, rho = quench(Q_MAX)
    ptr = pure_pointer(1.0)
    limit = imprecise_limit_pdf(p, ptr, rho)
    exact = work_meter_pdf(p, ptr, rho)
    near = np.linspace(-2.2, -1.8, 41)
    assert limit.evaluate(near).min() < 0
    assert exact.evaluate(W).min() >= -1e-10
    assert limit.total_mass() == pytest.approx(1.0)


def test_imprecise_limit_close_at_broader_pointer(quench):
    p, rho = quench(Q_MAX)
    ptr = pure_pointer(2.0)
    w = np.linspace(-15, 15, 6001)
    distance = np.sum(np.abs(imprecise_limit_pdf(p, ptr, rho).evaluate(w) - work_meter_pdf(p, ptr, rho).evaluate(w)))
    assert distance * (w[1] - w[0]) <= 0.05


def test_imprecise_q_deconvolves_limit(quench):
    p, rho = quench(Q_MAX)
    q = imprecise_q(p, rho)
    assert q.negative
    assert q.mean() == pytest.approx(untouched_average_work(p, rho), abs=1e-12)
    ptr = pure_pointer(0.7)
    assert np.allclose(q.smeared(ptr.sigma_e2).evaluate(W), imprecise_limit_pdf(p, ptr, rho).evaluate(W),
                       atol=1e-12)


def test_imprecise_q_needs_uncorrelated_pointer(quench):
    p, rho = quench(Q_MAX)
    with pytest.raises(UnsupportedCaseError):
        imprecise_q(p, rho, sym_xp=0.3)


def test_broad_gaussian_sits_at_untouched_work(quench):
    p, rho = quench(-0.5 * Q_MAX)
    approx = broad_gaussian_approx(p, rho, 50.0)
    assert approx.mean() == pytest.approx(untouched_average_work(p, rho))
    assert approx.variance() == pytest.approx(50.0)


def test_tmh_quasi_probability_has_negative_weight(quench):
    p, rho = quench(Q_MAX)
    tmh = tmh_quasi_pdf(p, rho)
    # excited -> lower final level, i.e. w = -1.5
    assert tmh.weight_at(-1.5) == pytest.approx(0.15 - Q_MAX / 2, abs=1e-12)
    assert tmh.negative


@seed(31)
@settings(max_examples=100, deadline=None)
@given(instance=seeds, dim=st.integers(min_value=2, max_value=6))
def test_tmh_mean_is_untouched_work(instance, dim):
    rng = np.random.default_rng(instance)
    p = random_protocol(rng, dim)
    rho = random_density(rng, dim)
    assert tmh_quasi_pdf(p, rho).mean() == pytest.approx(untouched_average_work(p, rho), abs=1e-10)


@seed(32)
@settings(max_examples=30, deadline=None)
@given(instance=seeds, dim=st.integers(min_value=2, max_value=3))
def test_strong_coupling_bins_onto_projective_atoms(instance, dim):
    rng = np.random.default_rng(instance)
    p = random_protocol(rng, dim)
    rho = random_density(rng, dim)
    atoms = pem_work_pdf(p, rho)
    assume(len(atoms.positions) == dim ** 2 and np.min(np.diff(atoms.positions)) > 0.02)
    gap = np.min(np.diff(atoms.positions))
    # sigma_e2 = var_x / kappa^2 = 1e-4 gap^2
    ptr = make_pointer(1.0, 1.0, kappa=100 / gap)
    for pdf in (work_meter_pdf(p, ptr, rho), two_gaussian_work_pdf(p, ptr, rho)):
        masses = window_masses(atoms.positions, pdf.evaluate)
        total_variation = 0.5 * np.sum(np.abs(masses - atoms.weights)) + 0.5 * (1 - masses.sum())
        assert total_variation <= 1e-3


@pytest.mark.parametrize("level", [0, 2])
def test_eigenstate_without_dynamics_reads_zero_work(level):
    rng = np.random.default_rng(33)
    H = random_hermitian(rng, 3)
    p = Protocol(H, H, np.eye(3))
    rho = DensityMatrix.symmetrized(p.initial_levels.projectors[level])
    ptr = make_pointer(0.25, 2.0, sym_xp=0.3)
    assert np.allclose(work_meter_pdf(p, ptr, rho).evaluate(W), norm.pdf(W, scale=np.sqrt(ptr.sigma_e2)),
                       atol=1e-12)
    assert np.allclose(two_gaussian_work_pdf(p, ptr, rho).evaluate(W),
                       norm.pdf(W, scale=np.sqrt(2 * ptr.sigma_e2)), atol=1e-12)


@seed(34)
@settings(max_examples=40, deadline=None)
@given(instance=seeds, dim=st.integers(min_value=2, max_value=5))
def test_diagonal_state_pdf_ignores_momentum_moments(instance, dim):
    rng = np.random.default_rng(instance)
    p = random_protocol(rng, dim)
    rho = project_diagonal(random_density(rng, dim), p.initial_levels)
    sigma_e2 = rng.uniform(0.05, 1.0)
    sym_xp = rng.uniform(-2.0, 2.0)
    var_p = (1 + sym_xp ** 2) / (4 * sigma_e2) * rng.uniform(1.0, 5.0)
    w = np.linspace(*work_meter_pdf(p, pure_pointer(sigma_e2), rho).support(), 401)
    reference = work_meter_pdf(p, pure_pointer(sigma_e2), rho).evaluate(w)
    assert np.allclose(work_meter_pdf(p, make_pointer(sigma_e2, var_p, sym_xp), rho).evaluate(w), reference,
                       atol=1e-12)


@seed(35)
@settings(max_examples=100, deadline=None)
@given(instance=seeds, dim=st.integers(min_value=2, max_value=3), stationary=st.booleans())
def test_imprecise_q_is_negative_exactly_for_coherent_states(instance, dim, stationary):
    rng = np.random.default_rng(instance)
    p = random_protocol(rng, dim)
    rho = random_density(rng, dim)
    if stationary:
        rho = project_diagonal(rho, p.initial_levels)
    coherent = commutator_norm(p.initial_hamiltonian, rho) > 1e-8
    assert coherent != stationary
    assert imprecise_q(p, rho).negative == coherent


@seed(36)
@settings(max_examples=60, deadline=None)
@given(instance=seeds, dim=st.integers(min_value=2, max_value=5))
def test_untouched_work_changes_under_dephasing_only_for_coherent_states(instance, dim):
    rng = np.random.default_rng(instance)
    p = random_protocol(rng, dim)
    rho = random_density(rng, dim)
    dephased = project_diagonal(rho, p.initial_levels)
    redephased = project_diagonal(dephased, p.initial_levels)
    assert untouched_average_work(p, redephased) == pytest.approx(untouched_average_work(p, dephased), abs=1e-12)
    assert abs(untouched_average_work(p, rho) - untouched_average_work(p, dephased)) > 1e-9


def test_broad_gaussian_approaches_the_work_meter_pdf(quench):
    p, rho = quench(Q_MAX)
    distances = []
    for sigma_e2 in 2.0 ** np.arange(7):
        exact = work_meter_pdf(p, pure_pointer(sigma_e2), rho)
        w = exact.grid(8001)
        gap = np.abs(exact.evaluate(w) - broad_gaussian_approx(p, rho, sigma_e2).evaluate(w))
        distances.append(trapezoid(gap, w))
    assert np.all(np.diff(distances) < 0)
    assert distances[-1] < 0.1 * distances[0]
