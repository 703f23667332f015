import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import logm, sqrtm

from cclab import qinfo
from cclab.qinfo import CQEnsemble, DensityMatrix, POVM, PureState, QuantumStateError

LN2 = math.log(2)


def oracle_fidelity(rho, sigma):
    r = sqrtm(rho.matrix)
    return float(np.real(np.trace(sqrtm(r @ sigma.matrix @ r))))


def oracle_relative_entropy(rho, sigma):
    return float(np.real(np.trace(rho.matrix @ (logm(rho.matrix) - logm(sigma.matrix))))) / LN2


seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 6)


def test_state_validation():
    with pytest.raises(QuantumStateError):
        DensityMatrix([[0.5, 0.1], [0.2, 0.5]])
    with pytest.raises(QuantumStateError):
        DensityMatrix([[1.5, 0], [0, -0.5]])
    with pytest.raises(QuantumStateError):
        PureState([1, 1])
    with pytest.raises(QuantumStateError):
        POVM([np.eye(2) / 3, np.eye(2) / 3])


@settings(max_examples=60, deadline=None)
@given(seeds, dims)
def test_fidelity_and_trace_distance_match_oracles(seed, d):
    rng = np.random.default_rng(seed)
    rho, sigma = qinfo.random_density(rng, d), qinfo.random_density(rng, d)
    assert qinfo.fidelity(rho, sigma) == pytest.approx(oracle_fidelity(rho, sigma), abs=1e-7)
    eig = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    assert qinfo.trace_distance(rho, sigma) == pytest.approx(np.abs(eig).sum(), abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(seeds, dims)
def test_relative_entropy_matches_logm(seed, d):
    rng = np.random.default_rng(seed)
    rho, sigma = qinfo.random_density(rng, d), qinfo.random_density(rng, d)
    assert qinfo.q_relative_entropy(rho, sigma) == pytest.approx(
        oracle_relative_entropy(rho, sigma), abs=1e-6)


def test_relative_entropy_infinite_off_support():
    rho = DensityMatrix.maximally_mixed(2)
    sigma = DensityMatrix.basis(2, 0)
    assert qinfo.q_relative_entropy(rho, sigma) == math.inf


@settings(max_examples=60, deadline=None)
@given(seeds, dims)
def test_jozsa_purification_overlap(seed, d):
    """Aligned purifications attain the fidelity as their overlap."""
    rng = np.random.default_rng(seed)
    rho, sigma = qinfo.random_density(rng, d), qinfo.random_density(rng, d)
    psi = qinfo.purify(rho)
    qinfo.check_purifies(psi, rho)
    phi = qinfo.align_purifications(psi, sigma)
    qinfo.check_purifies(phi, sigma)
    assert abs(psi.overlap(phi)) == pytest.approx(qinfo.fidelity(rho, sigma), abs=1e-8)


def test_schmidt_coefficients_are_root_eigenvalues():
    rng = np.random.default_rng(5)
    rho = qinfo.random_density(rng, 4)
    psi = qinfo.purify(rho)
    coeffs = np.sort(qinfo.schmidt_coefficients(psi, 4))
    assert np.allclose(coeffs, np.sqrt(np.clip(np.sort(np.linalg.eigvalsh(rho.matrix)), 0, None)),
                       atol=1e-8)


def test_von_neumann_entropy_of_mixed_qubit():
    assert qinfo.von_neumann_entropy(DensityMatrix.maximally_mixed(4)) == pytest.approx(2.0)
    assert qinfo.von_neumann_entropy(DensityMatrix.basis(3, 1)) == pytest.approx(0.0, abs=1e-12)


def test_measure_computational_basis():
    rho = DensityMatrix(np.diag([0.25, 0.75]))
    p = qinfo.measure(rho, POVM.computational(2))
    assert p.prob(0) == pytest.approx(0.25) and p.prob(1) == pytest.approx(0.75)


def test_fuchs_caves_measurement_attains_fidelity():
    rng = np.random.default_rng(9)
    for _ in range(20):
        rho, sigma = qinfo.random_density(rng, 3), qinfo.random_density(rng, 3)
        m = qinfo.fuchs_caves_measurement(rho, sigma)
        b = qinfo.bhattacharyya(qinfo.measure(rho, m), qinfo.measure(sigma, m))
        assert b == pytest.approx(qinfo.fidelity(rho, sigma), abs=1e-6)


def test_quantum_average_encoding_hand_case():
    e = CQEnsemble((0, 1), (0.5, 0.5), (DensityMatrix.basis(2, 0), DensityMatrix.basis(2, 1)))
    cert = qinfo.q_average_encoding_certificate(e, [qinfo.purify(s) for s in e.states])
    assert cert.lhs == pytest.approx(1.41421, abs=1e-4)
    assert cert.rhs == pytest.approx(1.66511, abs=1e-4)
    assert cert.holds


def test_cq_information_of_classical_copy():
    e = CQEnsemble((0, 1), (0.5, 0.5), (DensityMatrix.basis(2, 0), DensityMatrix.basis(2, 1)))
    assert qinfo.cq_mutual_information(e) == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(2, 4), st.integers(2, 3))
def test_quantum_average_encoding_property(seed, labels, d):
    rng = np.random.default_rng(seed)
    e = qinfo.random_ensemble(rng, labels, d)
    cert = qinfo.q_average_encoding_certificate(e, [qinfo.purify(s) for s in e.states])
    assert cert.lhs <= cert.rhs + 1e-6


def test_matrix_json_round_trip():
    rng = np.random.default_rng(0)
    rho = qinfo.random_density(rng, 3)
    assert np.allclose(DensityMatrix.from_json(rho.to_json()).matrix, rho.matrix)
