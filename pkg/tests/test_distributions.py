import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from pointer.gaussian import make_pointer, pure_pointer
from quantum.dynamics import Protocol
from quantum.errors import NumericalError, ValidationError
from quantum.operators import HermitianOperator, project_diagonal
from work.distributions import (
    AtomDistribution,
    GaussianMixture,
    evaluate,
    find_conjugate_partners,
    invert_characteristic,
    merge_atoms,
    moments,
)
from work.schemes import characteristic_function, pem_work_pdf, two_gaussian_work_pdf, work_meter_pdf
from tests.helpers import random_density, random_hermitian, random_protocol, random_unitary

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def test_merge_atoms_sums_coincident_positions():
    positions, weights = merge_atoms([0.0, 1.0, 1.0 + 1e-12, 2.0], [0.1, 0.2, 0.3, 0.4], tol=1e-9)
    assert np.allclose(positions, [0.0, 1.0, 2.0])
    assert np.allclose(weights, [0.1, 0.5, 0.4])


def test_atom_distribution_validation():
    with pytest.raises(NumericalError, match="sum to"):
        AtomDistribution([0.0, 1.0], [0.5, 0.4])
    with pytest.raises(NumericalError, match="negative"):
        AtomDistribution([0.0, 1.0], [1.2, -0.2])
    signed = AtomDistribution([0.0, 1.0], [1.2, -0.2], scheme="tmh", signed=True)
    assert signed.negative


def test_atom_moments_and_characteristic():
    atoms = AtomDistribution([-1.0, 2.0], [0.25, 0.75])
    assert moments(atoms, 1) == pytest.approx(1.25)
    assert atoms.moment(2) == pytest.approx(0.25 + 3.0)
    assert atoms.characteristic(0.0) == pytest.approx(1.0)
    assert evaluate(atoms, 2.0) == pytest.approx(0.75)
    assert atoms.evaluate(0.5) == 0.0


def test_mixture_requires_conjugate_partners():
    with pytest.raises(NumericalError, match="conjugate partner"):
        GaussianMixture([0.5 + 0.1j, 0.5], [0.0, 1.0], [1.0, 1.0])


def test_conjugate_partners_found_without_an_index(quench):
    p, rho = quench(0.4)
    pdf = work_meter_pdf(p, make_pointer(0.2, 3.0, sym_xp=0.5), rho)
    partners = find_conjugate_partners(pdf.weights, pdf.centers, pdf.variances, pdf.log_scales)
    assert np.all(partners >= 0)
    assert np.allclose(pdf.weights[partners], np.conj(pdf.weights), atol=1e-12)
    assert np.allclose(pdf.centers[partners], np.conj(pdf.centers), atol=1e-12)


def test_mixture_checks_a_given_partner_index():
    weights, centers = [0.5 + 0.1j, 0.5 - 0.1j], [0.2j, -0.2j]
    GaussianMixture(weights, centers, [1.0, 1.0], partners=[1, 0])
    with pytest.raises(NumericalError, match="conjugate partner"):
        GaussianMixture(weights, centers, [1.0, 1.0], partners=[0, 1])


def test_exponential_average_in_log_domain():
    mixture = GaussianMixture([0.25, 0.75], [-20.0, 3.0], [4.0, 4.0])
    # exponents -beta c + beta^2 v / 2 are 4000 and 3080 at beta = 40
    assert mixture.log_exponential_average(40.0) == pytest.approx(4000.0 + np.log(0.25), rel=1e-14)
    assert mixture.log_exponential_average(0.1) == pytest.approx(
        np.log(0.25 * np.exp(2.0 + 0.02) + 0.75 * np.exp(-0.3 + 0.02)), rel=1e-12)
    assert mixture.exponential_average(0.1) == pytest.approx(np.exp(mixture.log_exponential_average(0.1)))


def test_mixture_refuses_imaginary_density():
    mixture = GaussianMixture([1j], [0.0], [1.0], check_pairs=False)
    with pytest.raises(NumericalError, match="imaginary residue"):
        mixture.evaluate(0.0)


def test_mixture_rejects_nonpositive_variance():
    with pytest.raises(ValidationError, match="variances"):
        GaussianMixture([1.0], [0.0], [0.0])


@seed(20)
@settings(max_examples=30, deadline=None)
@given(instance=seeds, dim=st.integers(min_value=2, max_value=4))
def test_mixture_moments_match_quadrature(instance, dim):
    rng = np.random.default_rng(instance)
    p = random_protocol(rng, dim)
    rho = random_density(rng, dim)
    ptr = make_pointer(0.4, 1.0, sym_xp=0.3)
    pdf = work_meter_pdf(p, ptr, rho)
    lo, hi = pdf.support()
    for k in (0, 1, 2, 3):
        value, _ = quad(lambda w: w ** k * pdf.evaluate(w), lo, hi, limit=400, epsabs=1e-12)
        assert pdf.moment(k) == pytest.approx(value, abs=1e-8)
    assert pdf.total_mass() == pytest.approx(1.0, abs=1e-12)
    assert pdf.quadrature_mass() == pytest.approx(1.0, abs=1e-8)


@seed(21)
@settings(max_examples=50, deadline=None)
@given(instance=seeds, dim=st.integers(min_value=2, max_value=5), sigma_e2=st.floats(0.01, 2.0))
def test_diagonal_state_pdf_is_smeared_projective_pdf(instance, dim, sigma_e2):
    rng = np.random.default_rng(instance)
    p = random_protocol(rng, dim)
    rho = project_diagonal(random_density(rng, dim), p.initial_levels)
    ptr = pure_pointer(sigma_e2)
    w = np.linspace(*work_meter_pdf(p, ptr, rho).support(), 301)
    smeared = pem_work_pdf(p, rho).smeared(sigma_e2)
    assert np.allclose(work_meter_pdf(p, ptr, rho).evaluate(w), smeared.evaluate(w), atol=1e-12)
    assert np.allclose(two_gaussian_work_pdf(p, ptr, rho).evaluate(w),
                       pem_work_pdf(p, rho).smeared(2 * sigma_e2).evaluate(w), atol=1e-12)


def test_single_level_initial_spectrum_differs_only_in_variance():
    rng = np.random.default_rng(22)
    initial = HermitianOperator(0.7 * np.eye(3))
    p = Protocol(initial, random_hermitian(rng, 3), random_unitary(rng, 3))
    rho = random_density(rng, 3)
    ptr = make_pointer(0.3, 2.0, sym_xp=0.4)
    wm, tg = work_meter_pdf(p, ptr, rho), two_gaussian_work_pdf(p, ptr, rho)
    assert np.allclose(wm.centers, tg.centers)
    assert np.allclose(wm.weights, tg.weights)
    assert np.allclose(tg.variances, 2 * wm.variances)


@pytest.mark.parametrize("sigma_e2", [0.05, 0.3])
def test_fft_inversion_recovers_density(quench, sigma_e2):
    p, rho = quench(0.4)
    ptr = pure_pointer(sigma_e2)
    w, pdf = invert_characteristic(characteristic_function(p, ptr, rho))
    assert np.allclose(pdf, work_meter_pdf(p, ptr, rho).evaluate(w), atol=1e-8)


def test_characteristic_function_at_origin(quench):
    p, rho = quench(0.4)
    cf = characteristic_function(p, make_pointer(0.2, 3.0, sym_xp=0.5), rho)
    assert cf(0.0) == pytest.approx(1.0)
    u = np.array([0.3, 1.7])
    assert np.allclose(cf(-u), np.conj(cf(u)))


def test_json_mirror_reconstructs_mixture(quench):
    p, rho = quench(0.4)
    pdf = work_meter_pdf(p, make_pointer(0.2, 3.0, sym_xp=0.5), rho)
    data = pdf.to_json()
    rebuilt = GaussianMixture([complex(*t["weight"]) for t in data["terms"]],
                              [complex(*t["center"]) for t in data["terms"]],
                              [t["variance"] for t in data["terms"]],
                              [t["log_scale"] for t in data["terms"]])
    w = np.linspace(-3, 3, 13)
    assert np.allclose(rebuilt.evaluate(w), pdf.evaluate(w), atol=1e-14)
    frame = pdf.to_frame(w)
    assert list(frame.columns) == ["w", "pdf"]
