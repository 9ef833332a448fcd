"""Classical one-way protocol built from a correlation box.

Alice and Bob share ``N = ceil(k / p_A)`` independent copies of the box. Alice
sends the index of the first copy where her outcome is 1, or ABORT if there
is none; Bob answers with his outcome on that copy, or a uniformly random
bit after ABORT. The message needs ``ceil(log2 N)`` bits for the index plus
one flag bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ccbell import _kernels
from ccbell.correlations import CorrelationBox, _align, summarize
from ccbell.problems import CommProblem

CHUNK_TRIALS = 1 << 16


@dataclass(frozen=True, eq=False)
class PiBProtocol:
    box: CorrelationBox
    problem: CommProblem
    k: int
    copies: int
    message_bits: int
    p_A: float
    p_B: float

    @property
    def delta(self) -> float:
        return 2.0**-self.k


def compile_protocol(box: CorrelationBox, problem: CommProblem, k: int) -> PiBProtocol:
    """First-acceptance protocol with failure parameter ``delta = 2**-k``."""
    if int(k) != k or k < 1:
        raise ValueError("k must be an integer >= 1")
    k = int(k)
    s = summarize(box, problem)
    if s.p_A <= 0.0:
        raise ValueError("p_A = 0: Alice never accepts, the protocol is undefined")
    copies = math.ceil(k / s.p_A - 1e-12)
    index_bits = math.ceil(math.log2(copies) - 1e-12) if copies > 1 else 0
    return PiBProtocol(box, problem, k, copies, index_bits + 1, s.p_A, s.p_B)


def _abort_success(problem: CommProblem) -> np.ndarray:
    # a uniformly random bit is acceptable with probability |valid| / 2
    return problem.valid.sum(axis=2) / 2.0


def exact_success(protocol: PiBProtocol) -> float:
    """Exact success, resolved per input pair.

    ``sum mu(x,y) [(1 - r^N) q(x,y) + r^N g(x,y)]`` with ``r = 1 - p(a=1|x,y)``,
    ``q`` the conditional agreement and ``g`` the chance a random bit is
    acceptable (1/2 for functions).
    """
    problem = protocol.problem
    s = summarize(protocol.box, problem)
    miss = np.clip(1.0 - s.accept, 0.0, 1.0) ** protocol.copies
    per_pair = (1.0 - miss) * s.agree + miss * _abort_success(problem)
    return float(np.sum(problem.mu * per_pair))


def guaranteed_success(protocol: PiBProtocol) -> float:
    """The averaged guarantee ``(1 - delta) p_B + delta / 2``."""
    d = protocol.delta
    return (1.0 - d) * protocol.p_B + d / 2.0


@dataclass(frozen=True)
class SimulationResult:
    successes: int
    trials: int

    @property
    def estimate(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1.0 - p) / self.trials)


def simulate(protocol: PiBProtocol, trials: int, seed: int = 0, backend: str | None = None) -> SimulationResult:
    """Monte Carlo run of the protocol.

    Trials are split into fixed chunks of ``CHUNK_TRIALS``, each with its own
    child seed spawned from ``seed``, so the result depends only on
    ``(trials, seed)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    problem = protocol.problem
    p = _align(protocol.box, problem)
    nx, ny = problem.shape
    cells_mu = problem.mu.ravel()
    cum = np.cumsum(p.reshape(nx * ny, 4), axis=1)
    valid = problem.valid.reshape(nx * ny, 2)
    n_chunks = -(-trials // CHUNK_TRIALS)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    hits = 0
    for c, child in enumerate(children):
        size = min(CHUNK_TRIALS, trials - c * CHUNK_TRIALS)
        rng = np.random.Generator(np.random.PCG64(child))
        pairs = rng.choice(nx * ny, size=size, p=cells_mu)
        inst_u = rng.random((size, protocol.copies))
        abort_u = rng.random(size)
        hits += _kernels.pib_success_count(pairs, inst_u, abort_u, cum, valid, backend=backend)
    return SimulationResult(hits, trials)
