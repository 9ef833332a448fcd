"""Dense finite-dimensional quantum states, binary measurements and box compilation.

Bipartite operators live on ``C^d (x) C^d`` in the computational product basis
``|i>|j> -> i * d + j``. The maximally entangled state is
``Phi+ = (1/sqrt d) sum_i |ii>``; with that convention

    Tr[(|psi*><psi*| (x) M) Phi+] = <psi|M|psi> / d,

so Alice projecting onto the conjugated protocol state prepares ``psi`` on
Bob's side whenever she sees outcome 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ccbell.problems import CommProblem

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
NORM_TOL = 1e-10
MAX_DIM = 64


class QuantumError(ValueError):
    pass


def _check_dim(d: int) -> int:
    if int(d) != d or d < 2:
        raise QuantumError(f"dimension must be an integer >= 2, got {d!r}")
    if d > MAX_DIM:
        raise QuantumError(f"dimension {d} exceeds the dense-matrix limit {MAX_DIM}")
    return int(d)


@dataclass(frozen=True, eq=False)
class QState:
    """Density matrix, either local (``d x d``) or bipartite (``d^2 x d^2``)."""

    rho: np.ndarray
    dim: int
    bipartite: bool = True

    def __post_init__(self):
        d = _check_dim(self.dim)
        rho = np.array(self.rho, dtype=np.complex128)
        size = d * d if self.bipartite else d
        if rho.shape != (size, size):
            raise QuantumError(f"density matrix has shape {rho.shape}, expected {(size, size)}")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise QuantumError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > TRACE_TOL:
            raise QuantumError(f"density matrix has trace {np.trace(rho).real:.12g}")
        if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
            raise QuantumError("density matrix is not positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "dim", d)

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    def reduced(self, side: int) -> np.ndarray:
        """Partial trace keeping subsystem ``side`` (0 = Alice, 1 = Bob)."""
        if not self.bipartite:
            raise QuantumError("reduced state requires a bipartite state")
        d = self.dim
        r = self.rho.reshape(d, d, d, d)
        return np.einsum("ijkj->ik", r) if side == 0 else np.einsum("ijil->jl", r)

    def mixed_with(self, other: "QState", w: float) -> "QState":
        """``w * self + (1 - w) * other``."""
        if other.dim != self.dim or other.bipartite != self.bipartite:
            raise QuantumError("cannot mix states of different shapes")
        return QState(w * self.rho + (1 - w) * other.rho, self.dim, self.bipartite)


@dataclass(frozen=True, eq=False)
class BinaryMeasurement:
    """Two-outcome POVM given by its outcome-1 effect; outcome 0 is ``I - effect``."""

    effect: np.ndarray

    def __post_init__(self):
        e = np.array(self.effect, dtype=np.complex128)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise QuantumError("effect must be a square matrix")
        if np.max(np.abs(e - e.conj().T)) > HERMITIAN_TOL:
            raise QuantumError("effect is not Hermitian")
        ev = np.linalg.eigvalsh(e)
        if ev.min() < -PSD_TOL or ev.max() > 1 + PSD_TOL:
            raise QuantumError("effect eigenvalues must lie in [0, 1]")
        e.setflags(write=False)
        object.__setattr__(self, "effect", e)

    @property
    def dim(self) -> int:
        return self.effect.shape[0]

    def effects(self) -> tuple[np.ndarray, np.ndarray]:
        """``(E0, E1)``."""
        return np.eye(self.dim) - self.effect, self.effect

    @classmethod
    def projector(cls, vector) -> "BinaryMeasurement":
        v = np.asarray(vector, dtype=np.complex128)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))


@dataclass(frozen=True, eq=False)
class QuantumProtocol:
    """One-way quantum protocol: Alice sends ``states[x]``, Bob measures ``measurements[y]``.

    Bob's outcome is his answer; ``declared_success`` is the distributional
    success probability the protocol is meant to reach.
    """

    states: Mapping
    measurements: Mapping
    declared_success: float
    name: str = "protocol"

    def __post_init__(self):
        states = {}
        dims = set()
        for x, psi in self.states.items():
            v = np.array(psi, dtype=np.complex128).reshape(-1)
            if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
                raise QuantumError(f"state for input {x!r} is not normalized")
            v.setflags(write=False)
            states[x] = v
            dims.add(v.shape[0])
        for y, m in self.measurements.items():
            if not isinstance(m, BinaryMeasurement):
                raise QuantumError(f"measurement for input {y!r} is not a BinaryMeasurement")
            dims.add(m.dim)
        if len(dims) != 1:
            raise QuantumError(f"inconsistent dimensions in protocol: {sorted(dims)}")
        _check_dim(dims.pop())
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "measurements", dict(self.measurements))

    @property
    def dim(self) -> int:
        return next(iter(self.states.values())).shape[0]

    @property
    def qbits(self) -> float:
        """``log2 d``; integral when ``d`` is a power of two."""
        q = math.log2(self.dim)
        return int(q) if q.is_integer() else q

    def success(self, problem: CommProblem) -> float:
        """Actual distributional success when the states are sent directly."""
        total = 0.0
        for i, x in enumerate(problem.x_labels):
            psi = self.states[x]
            for j, y in enumerate(problem.y_labels):
                if problem.mu[i, j] == 0:
                    continue
                p1 = float(np.real(psi.conj() @ self.measurements[y].effect @ psi))
                total += problem.mu[i, j] * (problem.valid[i, j, 1] * p1 + problem.valid[i, j, 0] * (1 - p1))
        return total


def phi_plus(d: int) -> QState:
    """Maximally entangled state ``(1/sqrt d) sum_i |ii>`` as a density matrix."""
    d = _check_dim(d)
    v = np.zeros(d * d, dtype=np.complex128)
    v[np.arange(d) * (d + 1)] = 1 / math.sqrt(d)
    return QState(np.outer(v, v.conj()), d)


def isotropic(d: int, p: float) -> QState:
    """``p * Phi+ + (1 - p) * I / d^2``."""
    if not 0.0 <= p <= 1.0:
        raise QuantumError("mixing weight p must lie in [0, 1]")
    d = _check_dim(d)
    rho = p * phi_plus(d).rho + (1 - p) * np.eye(d * d) / (d * d)
    return QState(rho, d)


def werner(p: float) -> QState:
    """Two-qubit Werner state ``p * Phi+ + (1 - p) * I / 4``."""
    return isotropic(2, p)


def _box_tensor(alice, bob, state: QState) -> np.ndarray:
    """p[ix, iy, a, b] = Tr[(A_ix^a (x) B_iy^b) rho] for effect stacks (n, 2, d, d)."""
    d = state.dim
    r = state.rho.reshape(d, d, d, d)
    # Tr[(A (x) B) rho] = sum A[i, j] B[k, l] rho[j, l, i, k]
    p = np.einsum("xaij,ybkl,jlik->xyab", alice, bob, r, optimize=True)
    return np.real(p)


def box_from_protocol(protocol: QuantumProtocol, state: QState, problem: CommProblem):
    """Correlation box of construction (ii): Alice projects onto ``conj(psi_x)``, Bob measures ``B_y``."""
    from ccbell.correlations import CorrelationBox

    if not state.bipartite:
        raise QuantumError("box compilation needs a bipartite state")
    if state.dim != protocol.dim:
        raise QuantumError(f"state dimension {state.dim} does not match protocol dimension {protocol.dim}")
    d = state.dim
    supp = problem.support
    for i, x in enumerate(problem.x_labels):
        if supp[i].any() and x not in protocol.states:
            raise QuantumError(f"protocol has no state for input x={x!r}")
    for j, y in enumerate(problem.y_labels):
        if supp[:, j].any() and y not in protocol.measurements:
            raise QuantumError(f"protocol has no measurement for input y={y!r}")
    eye = np.eye(d)
    alice = np.zeros((len(problem.x_labels), 2, d, d), dtype=np.complex128)
    for i, x in enumerate(problem.x_labels):
        if x not in protocol.states:
            alice[i, 0] = eye
            continue
        psi_c = protocol.states[x].conj()
        proj = np.outer(psi_c, psi_c.conj())
        alice[i, 1] = proj
        alice[i, 0] = eye - proj
    bob = np.zeros((len(problem.y_labels), 2, d, d), dtype=np.complex128)
    for j, y in enumerate(problem.y_labels):
        if y not in protocol.measurements:
            bob[j, 0] = eye
            continue
        e0, e1 = protocol.measurements[y].effects()
        bob[j, 0], bob[j, 1] = e0, e1
    p = _box_tensor(alice, bob, state)
    p[np.abs(p) < 1e-15] = 0.0
    return CorrelationBox(problem.x_labels, problem.y_labels, p)


def bloch_state(r) -> np.ndarray:
    """Pure qubit state with unit Bloch vector ``r``."""
    rx, ry, rz = np.asarray(r, dtype=float) / np.linalg.norm(r)
    theta = math.acos(max(-1.0, min(1.0, rz)))
    phi = math.atan2(ry, rx)
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


def rac_quantum_protocol() -> QuantumProtocol:
    """Qubit protocol for the 2 -> 1 random access code, success ``cos^2(pi/8)``.

    Input ``x1x0`` is encoded in the Bloch vector ``((-1)^x0, (-1)^x1, 0)/sqrt 2``;
    Bob measures along X for ``y = 0`` and Y for ``y = 1``, outcome ``b``
    pointing along ``(-1)^b`` times the axis.
    """
    states = {}
    for x in ("00", "01", "10", "11"):
        x1, x0 = int(x[0]), int(x[1])
        states[x] = bloch_state(((-1) ** x0, (-1) ** x1, 0.0))
    measurements = {y: BinaryMeasurement.projector(bloch_state((-(1 - y), -y, 0.0))) for y in (0, 1)}
    return QuantumProtocol(states, measurements, math.cos(math.pi / 8) ** 2, name="rac")


def index_quantum_protocol(bits: int) -> QuantumProtocol:
    """Error-free protocol for :func:`ccbell.problems.index_problem`: send ``|x>`` on ``bits`` qubits."""
    d = 2**bits
    states = {}
    for v in range(d):
        e = np.zeros(d)
        e[v] = 1.0
        states[format(v, f"0{bits}b")] = e
    measurements = {}
    for y in range(bits):
        diag = np.array([(v >> y) & 1 for v in range(d)], dtype=float)
        measurements[y] = BinaryMeasurement(np.diag(diag))
    return QuantumProtocol(states, measurements, 1.0, name=f"index{bits}")
