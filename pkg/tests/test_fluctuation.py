import logging

import numpy as np
import pytest

from experiments.spin_quench import two_level_quench
from fluctuation.process import (
    ProcessPair,
    build_backward,
    canonical_pair,
    free_energy_difference,
)
from fluctuation.theorems import (
    crooks_check,
    jarzynski_check,
    modified_crooks_check,
    modified_jarzynski,
)
from pointer.gaussian import make_pointer, pure_pointer
from quantum.dynamics import Protocol, Schedule
from quantum.errors import UnsupportedCaseError, ValidationError
from quantum.operators import HermitianOperator, canonical_state
from tests.helpers import random_hermitian, two_segment_protocol

BETAS = [0.5, 1.0, 2.0]
RELATION_TOL = 1e-10


def _boltzmann_population(beta: float) -> float:
    """Ground population of (1/2) sigma_z at inverse temperature beta."""
    return 1 / (1 + np.exp(-beta))


@pytest.mark.parametrize("beta", BETAS)
def test_free_energy_of_spin_quench(quench, beta):
    p, _ = quench()
    expected = -np.log(np.cosh(beta) / np.cosh(beta / 2)) / beta
    assert free_energy_difference(p.initial_hamiltonian, p.final_hamiltonian, beta) == pytest.approx(expected)


def test_free_energy_at_infinite_temperature():
    h0, ht = HermitianOperator(np.diag([0.0, 2.0])), HermitianOperator(np.diag([1.0, 5.0]))
    assert free_energy_difference(h0, ht, 0.0) == pytest.approx(2.0)
    assert free_energy_difference(h0, ht, 1e-7) == pytest.approx(2.0, abs=1e-5)


@pytest.mark.parametrize("beta", BETAS)
def test_crooks_and_jarzynski_for_spin_quench(quench, beta):
    p, _ = quench()
    pair = canonical_pair(p, beta)
    crooks = crooks_check(pair)
    assert crooks.passed
    assert crooks.max_violation <= RELATION_TOL
    assert jarzynski_check(pair).max_violation <= RELATION_TOL


@pytest.mark.parametrize("beta", BETAS)
def test_crooks_for_two_segment_protocol(beta):
    p = two_segment_protocol(np.random.default_rng(40))
    pair = canonical_pair(p, beta)
    assert crooks_check(pair).passed
    assert jarzynski_check(pair).passed


def test_crooks_holds_for_boltzmann_diagonal_coherent_state(quench):
    beta = 1.0
    pop = _boltzmann_population(beta)
    p, rho = quench(0.9 * np.sqrt(pop * (1 - pop)), p=pop)
    assert crooks_check(canonical_pair(p, beta, forward_state=rho)).passed


@pytest.mark.parametrize("perturbation", [1e-3, 1e-2])
def test_crooks_perturbation_is_detected_linearly(quench, perturbation):
    p, _ = quench()
    report = crooks_check(canonical_pair(p, 1.0), perturbation)
    assert not report.passed
    assert report.max_violation == pytest.approx(perturbation / (1 + perturbation), rel=1e-6)


@pytest.mark.parametrize("scheme", ["work_meter", "two_gaussian"])
@pytest.mark.parametrize("beta", BETAS)
def test_modified_crooks(quench, scheme, beta):
    p, _ = quench()
    report = modified_crooks_check(canonical_pair(p, beta), 0.1, scheme)
    assert report.passed, report.max_violation


def test_modified_crooks_negative_control(quench):
    p, _ = quench()
    assert not modified_crooks_check(canonical_pair(p, 1.0), 0.1, perturbation=1e-3).passed


def test_modified_crooks_needs_stationary_states(quench):
    pop = _boltzmann_population(1.0)
    p, rho = quench(0.3, p=pop)
    with pytest.raises(ValidationError, match="not canonical"):
        modified_crooks_check(canonical_pair(p, 1.0, forward_state=rho), 0.1)


def test_modified_crooks_at_zero_width_is_crooks(quench):
    p, _ = quench()
    assert modified_crooks_check(canonical_pair(p, 1.0), 0.0).relation == "crooks"


@pytest.mark.parametrize("beta", BETAS)
def test_modified_jarzynski_for_canonical_state(quench, beta):
    p, _ = quench()
    rho = canonical_state(p.initial_hamiltonian, beta)
    result = modified_jarzynski(p, pure_pointer(0.1), rho, beta)
    assert result.passed
    assert result.deviation < RELATION_TOL


def test_modified_jarzynski_fails_with_maximal_coherence():
    beta = 1.0
    pop = _boltzmann_population(beta)
    p, rho = two_level_quench(pop, complex(np.sqrt(pop * (1 - pop))), 1.0, 2.0)
    lhs, rhs = modified_jarzynski(p, pure_pointer(0.1), rho, beta)
    assert abs(lhs / rhs - 1) > 1e-3


def test_modified_jarzynski_at_low_temperature(quench):
    p, _ = quench()
    beta = 30.0
    result = modified_jarzynski(p, pure_pointer(2.0), canonical_state(p.initial_hamiltonian, beta), beta)
    assert result.log_rhs > 709
    assert np.isfinite(result.deviation)
    assert result.passed


@pytest.mark.parametrize("var_p, sym_xp", [(1.0, 0.0), (4.0, 0.0), (2.5, 0.9), (6.0, -1.5)])
def test_modified_jarzynski_depends_only_on_pointer_variance(quench, var_p, sym_xp):
    p, _ = quench()
    beta, sigma_e2 = 1.5, 0.3
    rho = canonical_state(p.initial_hamiltonian, beta)
    reference = modified_jarzynski(p, pure_pointer(sigma_e2), rho, beta)
    result = modified_jarzynski(p, make_pointer(sigma_e2, var_p, sym_xp), rho, beta)
    assert result.passed
    assert result.log_lhs == pytest.approx(reference.log_lhs, abs=RELATION_TOL)
    assert result.log_rhs == pytest.approx(reference.log_rhs, abs=RELATION_TOL)


def test_process_pair_rejects_non_boltzmann_state(quench):
    p, rho = quench(0.0)
    with pytest.raises(ValidationError, match="level 0"):
        canonical_pair(p, 3.0, forward_state=rho)


def test_backward_protocol_reverses_segments():
    rng = np.random.default_rng(41)
    p = two_segment_protocol(rng)
    back = build_backward(p)
    assert np.array_equal(back.initial_hamiltonian.matrix, p.final_hamiltonian.matrix)
    assert np.allclose(back.propagator, p.propagator.T, atol=1e-12)


def test_backward_warns_on_complex_segments(caplog):
    rng = np.random.default_rng(42)
    h = random_hermitian(rng, 3)
    p = Protocol.from_schedule(Schedule(((h, 1.0),)))
    with caplog.at_level(logging.WARNING):
        build_backward(p)
    assert "complex Hamiltonians" in caplog.text


def test_explicit_backward_needs_propagator():
    rng = np.random.default_rng(43)
    p = Protocol(random_hermitian(rng, 2), random_hermitian(rng, 2), np.eye(2))
    with pytest.raises(UnsupportedCaseError):
        build_backward(p, mode="explicit")
    with pytest.raises(ValidationError, match="backward mode"):
        build_backward(p, mode="mirror")


def test_explicit_delta_f_is_kept(quench):
    p, _ = quench()
    back = build_backward(p)
    pair = ProcessPair(p, canonical_state(p.initial_hamiltonian, 1.0), back,
                       canonical_state(back.initial_hamiltonian, 1.0), 1.0, delta_f=0.123)
    assert pair.delta_f == 0.123
    assert not crooks_check(pair).passed
