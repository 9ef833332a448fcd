"""Exact one-way distributional communication complexity for small problems.

Shared randomness cannot beat the best deterministic protocol on a fixed
input distribution, so the optimum over ``c``-bit one-way protocols is a
maximum over encoders ``X -> {messages}`` with at most ``2**c`` messages.
Each encoder is a set partition of ``X``; for a fixed partition Bob's best
decoder answers, per message block and ``y``, the output with the larger
acceptable weight. Partitions are enumerated as restricted-growth strings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ccbell import _kernels
from ccbell.problems import CommProblem

MAX_PARTITIONS = 10**8
SUCCESS_SLACK = 1e-12


class GuardExceeded(RuntimeError):
    """The exhaustive search would enumerate more partitions than allowed."""


@dataclass(frozen=True)
class Protocol:
    """A deterministic one-way protocol: ``message[x]`` and ``decoder[message, y]``."""

    message: np.ndarray
    decoder: np.ndarray
    value: float

    @property
    def n_messages(self) -> int:
        return int(self.message.max()) + 1

    def output(self) -> np.ndarray:
        """Output table ``out[x, y]``."""
        return self.decoder[self.message]


def best_decoder(problem: CommProblem, message: np.ndarray) -> np.ndarray:
    """Bob's optimal answer per (message, y) for a fixed encoder; ties go to 0."""
    message = np.asarray(message, dtype=np.int64)
    w = problem.weighted_valid()
    m = int(message.max()) + 1
    sums = np.zeros((m, w.shape[1], 2))
    np.add.at(sums, message, w)
    return (sums[:, :, 1] > sums[:, :, 0]).astype(np.int64)


def protocol_value(problem: CommProblem, message, decoder) -> float:
    """Success probability of an explicit deterministic one-way protocol."""
    message = np.asarray(message, dtype=np.int64)
    decoder = np.asarray(decoder, dtype=np.int64)
    out = decoder[message]
    nx, ny = problem.shape
    hits = problem.valid[np.arange(nx)[:, None], np.arange(ny)[None, :], out]
    return float(np.sum(problem.mu * hits))


def _check_bits(bits: int) -> int:
    if isinstance(bits, bool) or int(bits) != bits:
        raise ValueError(f"bits must be an integer, got {bits!r}")
    if bits < 0:
        raise ValueError("bits must be >= 0")
    return int(bits)


def optimal_protocol(problem: CommProblem, bits: int, backend: str | None = None) -> Protocol:
    """Best deterministic one-way protocol using at most ``2**bits`` messages."""
    bits = _check_bits(bits)
    nx = problem.shape[0]
    max_blocks = nx if bits >= 63 else min(nx, 2**bits)
    count = _kernels.count_partitions(nx, max_blocks)
    if count > MAX_PARTITIONS:
        raise GuardExceeded(
            f"{count} encoder partitions for |X|={nx} at {bits} bits exceeds the limit of {MAX_PARTITIONS}"
        )
    value, rgs = _kernels.partition_search(problem.weighted_valid(), max_blocks, backend=backend)
    decoder = best_decoder(problem, rgs)
    return Protocol(message=rgs, decoder=decoder, value=min(value, 1.0))


def optimal_success(problem: CommProblem, bits: int, backend: str | None = None) -> float:
    """Maximum distributional success probability with ``bits`` of one-way communication."""
    return optimal_protocol(problem, bits, backend=backend).value


def full_disclosure_bits(problem: CommProblem) -> int:
    """Bits needed for Alice to send her input verbatim."""
    return math.ceil(math.log2(problem.shape[0])) if problem.shape[0] > 1 else 0


@dataclass(frozen=True)
class CCCurve:
    """Maximum success per message budget.

    ``points[c]`` is the best success with ``c`` bits; ``source`` is
    ``"exact-search"`` or ``"bound-formula"``.
    """

    points: dict
    source: str = "exact-search"
    problem_id: str = ""
    params: dict = field(default_factory=dict)

    def max_success(self, bits: int) -> float:
        """Largest success reachable with ``bits``; saturates beyond the tabulated range."""
        if bits < 0:
            return 0.0
        keys = sorted(self.points)
        usable = [c for c in keys if c <= bits]
        return self.points[usable[-1]] if usable else 0.0

    def complexity(self, p_target: float):
        """Fewest bits reaching ``p_target`` (1e-12 slack), or ``None`` if unattainable."""
        for c in sorted(self.points):
            if self.points[c] >= p_target - SUCCESS_SLACK:
                return c
        return None

    def to_rows(self) -> list[tuple[int, float]]:
        return [(c, self.points[c]) for c in sorted(self.points)]


def cc_curve(problem: CommProblem, max_bits: int | None = None, backend: str | None = None) -> CCCurve:
    """Tabulate :func:`optimal_success` for ``bits = 0..max_bits`` (default: full disclosure)."""
    top = full_disclosure_bits(problem) if max_bits is None else _check_bits(max_bits)
    points = {}
    for c in range(top + 1):
        if points and points[c - 1] >= 1.0 - SUCCESS_SLACK:
            points[c] = points[c - 1]
            continue
        points[c] = optimal_success(problem, c, backend=backend)
    return CCCurve(points=points, source="exact-search", problem_id=problem.name)


def complexity(problem: CommProblem, p_target: float, backend: str | None = None):
    """Minimum bits ``c`` with ``optimal_success(problem, c) >= p_target``.

    Returns ``None`` when even full disclosure falls short of the target.
    """
    if not 0.0 <= p_target <= 1.0:
        raise ValueError("p_target must lie in [0, 1]")
    top = full_disclosure_bits(problem)
    for c in range(top + 1):
        if optimal_success(problem, c, backend=backend) >= p_target - SUCCESS_SLACK:
            return c
    return None


def pumped_bound(c_two_thirds: float, p_s: float) -> float:
    """Lower bound on the bits needed for success ``p_s`` given the cost at success 2/3.

    Majority-vote amplification gives ``C(1/2 + eps) >= eps**2 / 3 * C(2/3)``
    below 2/3; above it the 2/3 cost itself is a lower bound. Valid for
    boolean functions.
    """
    if c_two_thirds < 0:
        raise ValueError("c_two_thirds must be >= 0")
    if p_s <= 0.5:
        return 0.0
    if p_s <= 2.0 / 3.0:
        return (p_s - 0.5) ** 2 / 3.0 * c_two_thirds
    return float(c_two_thirds)


def repetitions_needed(epsilon: float) -> int:
    """Repetitions ``l >= 3 / eps**2`` lifting success 1/2 + eps to 2/3 by majority vote."""
    if not 0.0 < epsilon <= 0.5:
        raise ValueError("epsilon must lie in (0, 1/2]")
    # guard against 3/eps**2 landing a hair above an integer
    return math.ceil(3.0 / epsilon**2 - 1e-9)
