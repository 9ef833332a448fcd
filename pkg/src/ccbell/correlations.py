"""Binary-outcome correlation boxes ``p(a, b | x, y)``.

Includes the acceptance/agreement summary used by the Bell inequalities,
a non-signaling check, convex mixing, and an LP test for membership in the
local (LHV) polytope.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from ccbell.problems import CommProblem

NONNEG_TOL = 1e-12
NORM_TOL = 1e-9
ACCEPT_EPS = 1e-12
LHV_FEASIBLE_TOL = 1e-9
LHV_MARGINAL = 1e-7
MAX_LOCAL_STRATEGIES = 2**24


class BoxError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CorrelationBox:
    """Table ``p[x, y, a, b]`` over labelled inputs and binary outcomes."""

    x_labels: tuple
    y_labels: tuple
    p: np.ndarray

    def __post_init__(self):
        xs, ys = tuple(self.x_labels), tuple(self.y_labels)
        p = np.array(self.p, dtype=np.float64)
        if p.shape != (len(xs), len(ys), 2, 2):
            raise BoxError(f"table has shape {p.shape}, expected {(len(xs), len(ys), 2, 2)}")
        if np.any(p < -NONNEG_TOL):
            raise BoxError("box has negative probabilities")
        norms = p.sum(axis=(2, 3))
        if np.max(np.abs(norms - 1.0)) > NORM_TOL:
            raise BoxError("box is not normalized for every (x, y)")
        p.setflags(write=False)
        object.__setattr__(self, "x_labels", xs)
        object.__setattr__(self, "y_labels", ys)
        object.__setattr__(self, "p", p)

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape[:2]

    def alice_marginal(self) -> np.ndarray:
        """``p(a | x, y)`` as an array ``[x, y, a]``."""
        return self.p.sum(axis=3)

    def bob_marginal(self) -> np.ndarray:
        """``p(b | x, y)`` as an array ``[x, y, b]``."""
        return self.p.sum(axis=2)

    def __getitem__(self, key):
        x, y, a, b = key
        return float(self.p[self.x_labels.index(x), self.y_labels.index(y), a, b])

    def to_dict(self) -> dict:
        return {"x": list(self.x_labels), "y": list(self.y_labels), "p": self.p.tolist()}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc) -> "CorrelationBox":
        if not isinstance(doc, dict) or set(doc) != {"x", "y", "p"}:
            raise BoxError("box document must have exactly the keys 'x', 'y', 'p'")
        try:
            p = np.array(doc["p"], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise BoxError(f"'p' is not a numeric 4-D array: {exc}") from None
        return cls(tuple(doc["x"]), tuple(doc["y"]), p)

    @classmethod
    def from_json(cls, text: str) -> "CorrelationBox":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise BoxError(f"malformed JSON: {exc}") from None
        return cls.from_dict(doc)

    @classmethod
    def deterministic(cls, x_labels, y_labels, alice, bob) -> "CorrelationBox":
        """Local box where Alice outputs ``alice[x]`` and Bob ``bob[y]``."""
        nx, ny = len(x_labels), len(y_labels)
        p = np.zeros((nx, ny, 2, 2))
        for i in range(nx):
            for j in range(ny):
                p[i, j, int(alice[i]), int(bob[j])] = 1.0
        return cls(tuple(x_labels), tuple(y_labels), p)


def _align(box: CorrelationBox, problem: CommProblem) -> np.ndarray:
    """Box table reindexed to the problem's label order."""
    try:
        ix = [box.x_labels.index(x) for x in problem.x_labels]
        iy = [box.y_labels.index(y) for y in problem.y_labels]
    except ValueError:
        raise BoxError("box labels do not cover the problem's inputs") from None
    return box.p[np.ix_(ix, iy)]


@dataclass(frozen=True)
class BoxSummary:
    """Averaged acceptance ``p_A`` and conditional agreement ``p_B``."""

    p_A: float
    p_B: float
    undefined_pairs: list = field(default_factory=list)
    accept: np.ndarray | None = field(default=None, repr=False, compare=False)
    agree: np.ndarray | None = field(default=None, repr=False, compare=False)


def summarize(box: CorrelationBox, problem: CommProblem) -> BoxSummary:
    """``p_A = sum mu p(a=1|x,y)`` and ``p_B = sum mu p(b ok | x, y, a=1)``.

    Where Alice never accepts the conditional is undefined; those pairs
    contribute 1/2 (a random guess) and are listed in ``undefined_pairs``.
    """
    p = _align(box, problem)
    accept = p[:, :, 1, :].sum(axis=2)
    joint_ok = (p[:, :, 1, :] * problem.valid).sum(axis=2)
    defined = accept > ACCEPT_EPS
    agree = np.where(defined, joint_ok / np.where(defined, accept, 1.0), 0.5)
    agree = np.clip(agree, 0.0, 1.0)
    supp = problem.support
    undefined = [
        (problem.x_labels[i], problem.y_labels[j]) for i, j in zip(*np.nonzero(supp & ~defined))
    ]
    mu = problem.mu
    p_A = float(np.sum(mu * accept))
    p_B = float(np.sum(mu * agree))
    return BoxSummary(min(max(p_A, 0.0), 1.0), min(max(p_B, 0.0), 1.0), undefined, accept, agree)


@dataclass(frozen=True)
class SignalingReport:
    alice_deviation: float
    bob_deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.alice_deviation <= self.tol and self.bob_deviation <= self.tol


def check_nonsignaling(box: CorrelationBox, tol: float = 1e-10) -> SignalingReport:
    """Largest dependence of each party's marginal on the other party's input."""
    pa = box.alice_marginal()
    pb = box.bob_marginal()
    dev_a = float(np.max(pa.max(axis=1) - pa.min(axis=1)))
    dev_b = float(np.max(pb.max(axis=0) - pb.min(axis=0)))
    return SignalingReport(dev_a, dev_b, tol)


def mix(box1: CorrelationBox, box2: CorrelationBox, w: float) -> CorrelationBox:
    """``w * box1 + (1 - w) * box2``."""
    if box1.x_labels != box2.x_labels or box1.y_labels != box2.y_labels:
        raise BoxError("cannot mix boxes with different labels")
    if not 0.0 <= w <= 1.0:
        raise BoxError("mixing weight must lie in [0, 1]")
    return CorrelationBox(box1.x_labels, box1.y_labels, w * box1.p + (1 - w) * box2.p)


# --- local polytope -------------------------------------------------------


def local_strategies(nx: int, ny: int) -> tuple[np.ndarray, np.ndarray]:
    """All deterministic assignments ``(alpha[k, x], beta[k, y])`` in a fixed order."""
    alphas = np.array(list(itertools.product((0, 1), repeat=nx)), dtype=np.int8)
    betas = np.array(list(itertools.product((0, 1), repeat=ny)), dtype=np.int8)
    ia, ib = np.meshgrid(np.arange(len(alphas)), np.arange(len(betas)), indexing="ij")
    return alphas[ia.ravel()], betas[ib.ravel()]


def _vertex_matrix(nx: int, ny: int) -> sp.csc_matrix:
    # column k is the flattened deterministic box of strategy k
    alphas, betas = local_strategies(nx, ny)
    n_strat = len(alphas)
    xs, ys = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    xs, ys = xs.ravel(), ys.ravel()
    rows = ((xs[None, :] * ny + ys[None, :]) * 4 + alphas[:, xs] * 2 + betas[:, ys]).ravel()
    cols = np.repeat(np.arange(n_strat), nx * ny)
    data = np.ones_like(rows, dtype=np.float64)
    return sp.csc_matrix((data, (rows, cols)), shape=(nx * ny * 4, n_strat))


@dataclass(frozen=True)
class LHVResult:
    """Outcome of the local-polytope test.

    ``weights`` (feasible) reproduce the box as a mixture of
    :func:`local_strategies`; ``functional`` (infeasible) is a table
    ``F[x, y, a, b]`` with ``<F, box> > local_bound >= <F, D>`` for every
    deterministic box ``D``.
    """

    feasible: bool
    distance: float
    weights: np.ndarray | None = None
    functional: np.ndarray | None = None
    local_bound: float | None = None
    box_value: float | None = None

    @property
    def marginal(self) -> bool:
        return LHV_FEASIBLE_TOL < self.distance < LHV_MARGINAL

    def strategies(self, nx: int, ny: int):
        """Nonzero-weight strategies as ``(weight, alpha, beta)`` tuples."""
        alphas, betas = local_strategies(nx, ny)
        idx = np.nonzero(self.weights > 1e-12)[0]
        return [(float(self.weights[k]), alphas[k], betas[k]) for k in idx]


def lhv_membership(box: CorrelationBox) -> LHVResult:
    """Decide whether ``box`` is a convex mixture of deterministic local boxes.

    Solves ``min s`` subject to ``|V w - p|_inf <= s``, ``w >= 0``,
    ``sum w = 1``. When the optimum is above numerical zero a separating
    functional is computed from a second LP and returned as the certificate.
    """
    nx, ny = box.shape
    n_strat = 2 ** (nx + ny)
    if n_strat > MAX_LOCAL_STRATEGIES:
        raise BoxError(f"{n_strat} local strategies exceed the limit of {MAX_LOCAL_STRATEGIES}")
    V = _vertex_matrix(nx, ny)
    target = box.p.ravel()
    m = V.shape[0]
    ones = sp.csc_matrix(np.ones((m, 1)))
    # variables: [w (n_strat), s]
    A_ub = sp.vstack([sp.hstack([V, -ones]), sp.hstack([-V, -ones])]).tocsc()
    b_ub = np.concatenate([target, -target])
    A_eq = sp.csc_matrix(np.concatenate([np.ones(n_strat), [0.0]])[None, :])
    c = np.zeros(n_strat + 1)
    c[-1] = 1.0
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    distance = max(float(res.x[-1]), 0.0)
    if distance <= LHV_FEASIBLE_TOL:
        w = np.clip(res.x[:-1], 0.0, None)
        w /= w.sum()
        return LHVResult(True, distance, weights=w)
    F, bound, value = _separating_functional(V, target)
    return LHVResult(False, distance, functional=F.reshape(nx, ny, 2, 2), local_bound=bound, box_value=value)


def _separating_functional(V, target):
    # max <F, p> - t  s.t.  V^T F <= t, -1 <= F <= 1
    m, n_strat = V.shape
    c = np.concatenate([-target, [1.0]])
    A_ub = sp.hstack([V.T, -sp.csc_matrix(np.ones((n_strat, 1)))]).tocsc()
    bounds = [(-1.0, 1.0)] * m + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n_strat), bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    F = res.x[:m]
    bound = float(np.max(V.T @ F))
    return F, bound, float(F @ target)


def verify_certificate(box: CorrelationBox, result: LHVResult, tol: float = 1e-8) -> bool:
    """Independent check of an :class:`LHVResult` by brute force over deterministic boxes."""
    nx, ny = box.shape
    alphas, betas = local_strategies(nx, ny)
    xi, yi = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    if result.feasible:
        recon = np.zeros_like(box.p)
        for k in np.nonzero(result.weights)[0]:
            recon[xi, yi, alphas[k][xi], betas[k][yi]] += result.weights[k]
        return bool(np.max(np.abs(recon - box.p)) <= tol and abs(result.weights.sum() - 1) <= tol)
    F = result.functional
    best = max(float(F[xi, yi, a[xi], b[yi]].sum()) for a, b in zip(alphas, betas))
    return float(np.sum(F * box.p)) > best + tol
