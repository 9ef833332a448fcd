import math

import numpy as np
import pytest

from ccbell.correlations import check_nonsignaling, summarize
from ccbell.problems import index_problem, rac21
from ccbell.quantum import (
    BinaryMeasurement,
    QState,
    QuantumError,
    QuantumProtocol,
    box_from_protocol,
    index_quantum_protocol,
    isotropic,
    phi_plus,
    rac_quantum_protocol,
    werner,
)

from conftest import COS2


def kron_box(protocol, state, problem):
    """Brute-force p(a,b|x,y) with explicit Kronecker products and full traces."""
    d = protocol.dim
    out = np.zeros(problem.shape + (2, 2))
    for i, x in enumerate(problem.x_labels):
        psi = protocol.states[x].conj()
        A1 = np.outer(psi, psi.conj())
        A = [np.eye(d) - A1, A1]
        for j, y in enumerate(problem.y_labels):
            B1 = protocol.measurements[y].effect
            B = [np.eye(d) - B1, B1]
            for a in (0, 1):
                for b in (0, 1):
                    out[i, j, a, b] = np.trace(np.kron(A[a], B[b]) @ state.rho).real
    return out


def random_unit(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def test_phi_plus_entries():
    rho = phi_plus(2).rho
    assert rho[0, 3] == pytest.approx(0.5)
    assert rho[0, 0] == pytest.approx(0.5)


@pytest.mark.parametrize("d", [2, 3, 4, 8])
def test_phi_plus_pure_and_maximally_entangled(d):
    s = phi_plus(d)
    assert np.trace(s.rho).real == pytest.approx(1.0, abs=1e-12)
    assert s.purity() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(s.reduced(0), np.eye(d) / d, atol=1e-12)
    np.testing.assert_allclose(s.reduced(1), np.eye(d) / d, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_isotropic_edges_and_convexity(d):
    np.testing.assert_allclose(isotropic(d, 1.0).rho, phi_plus(d).rho, atol=1e-15)
    np.testing.assert_allclose(np.diag(isotropic(d, 0.0).rho).real, 1 / d**2, atol=1e-15)
    for p in (0.1, 0.5, 0.9):
        mix = p * isotropic(d, 1).rho + (1 - p) * isotropic(d, 0).rho
        np.testing.assert_allclose(isotropic(d, p).rho, mix, atol=1e-15)


def test_werner_is_two_qubit_isotropic():
    for p in (0.0, 0.3, 1 / math.sqrt(2), 1.0):
        np.testing.assert_allclose(werner(p).rho, isotropic(2, p).rho, atol=0)


@pytest.mark.parametrize("bad", [-0.1, 1.1])
def test_mixing_range(bad):
    with pytest.raises(QuantumError):
        isotropic(2, bad)
    with pytest.raises(QuantumError):
        werner(bad)


def test_state_validation():
    with pytest.raises(QuantumError):
        phi_plus(1)
    with pytest.raises(QuantumError):
        phi_plus(65)
    with pytest.raises(QuantumError):
        QState(np.diag([1.5, -0.5]), 2, bipartite=False)
    with pytest.raises(QuantumError):
        QState(np.eye(4), 2)
    with pytest.raises(QuantumError):
        BinaryMeasurement(2 * np.eye(2))
    with pytest.raises(QuantumError):
        BinaryMeasurement(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("d", [2, 4, 8])
def test_remote_preparation_identity(d):
    rng = np.random.default_rng(100 + d)
    phi = phi_plus(d).rho
    for _ in range(100):
        psi = random_unit(rng, d)
        M = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        M = M + M.conj().T
        lhs = np.trace(np.kron(np.outer(psi.conj(), psi), M) @ phi)
        rhs = psi.conj() @ M @ psi / d
        assert abs(lhs - rhs) <= 1e-10


def test_rac_protocol_geometry():
    q = rac_quantum_protocol()
    assert q.qbits == 1
    assert q.declared_success == pytest.approx(0.853553, abs=1e-6)
    assert q.declared_success == pytest.approx((2 + math.sqrt(2)) / 4, abs=1e-15)
    states = list(q.states.values())
    for i in range(4):
        for j in range(i + 1, 4):
            ov = abs(np.vdot(states[i], states[j])) ** 2
            assert min(abs(ov), abs(ov - 0.5)) < 1e-12
    assert q.success(rac21()) == pytest.approx(COS2, abs=1e-12)


def test_box_matches_kron_oracle(rac):
    q = rac_quantum_protocol()
    for state in (phi_plus(2), werner(0.4), isotropic(2, 0.0)):
        box = box_from_protocol(q, state, rac)
        np.testing.assert_allclose(box.p, kron_box(q, state, rac), atol=1e-12)


def test_box_random_protocol_matches_oracle():
    rng = np.random.default_rng(3)
    d = 4
    p = index_problem(2)
    states = {x: random_unit(rng, d) for x in p.x_labels}
    meas = {}
    for y in p.y_labels:
        U, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        meas[y] = BinaryMeasurement(U @ np.diag(rng.random(d)) @ U.conj().T)
    proto = QuantumProtocol(states, meas, 0.5)
    for s in (phi_plus(d), isotropic(d, 0.3)):
        box = box_from_protocol(proto, s, p)
        np.testing.assert_allclose(box.p, kron_box(proto, s, p), atol=1e-12)
        assert check_nonsignaling(box, 1e-10).passed
        np.testing.assert_allclose(box.p.sum(axis=(2, 3)), 1.0, atol=1e-10)
        assert box.p.min() >= -1e-12


@pytest.mark.parametrize("bits", [1, 2, 3])
def test_acceptance_is_one_over_d(bits):
    p = index_problem(bits)
    box = box_from_protocol(index_quantum_protocol(bits), phi_plus(2**bits), p)
    np.testing.assert_allclose(box.alice_marginal()[:, :, 1], 1 / 2**bits, atol=1e-10)
    s = summarize(box, p)
    assert s.p_B == pytest.approx(1.0, abs=1e-12)


def test_declared_success_equals_p_B(rac, rac_box):
    assert summarize(rac_box, rac).p_B == pytest.approx(rac_quantum_protocol().declared_success, abs=1e-12)


def test_maximally_mixed_gives_trace_over_d():
    p = index_problem(2)
    proto = index_quantum_protocol(2)
    box = box_from_protocol(proto, isotropic(4, 0.0), p)
    for j, y in enumerate(p.y_labels):
        e1 = proto.measurements[y].effect
        cond_b1 = box.p[:, j, 1, 1] / box.p[:, j, 1, :].sum(axis=1)
        np.testing.assert_allclose(cond_b1, np.trace(e1).real / 4, atol=1e-12)
    assert summarize(box, p).p_B == pytest.approx(0.5, abs=1e-12)


def test_box_affine_in_state(rac):
    q = rac_quantum_protocol()
    b1 = box_from_protocol(q, phi_plus(2), rac).p
    b0 = box_from_protocol(q, werner(0.0), rac).p
    for p in (0.2, 0.6, 0.95):
        np.testing.assert_allclose(box_from_protocol(q, werner(p), rac).p, p * b1 + (1 - p) * b0, atol=1e-10)


def test_dimension_mismatch(rac):
    with pytest.raises(QuantumError):
        box_from_protocol(rac_quantum_protocol(), phi_plus(4), rac)


def test_missing_measurement(rac):
    q = rac_quantum_protocol()
    partial = QuantumProtocol(q.states, {0: q.measurements[0]}, q.declared_success)
    with pytest.raises(QuantumError):
        box_from_protocol(partial, phi_plus(2), rac)
