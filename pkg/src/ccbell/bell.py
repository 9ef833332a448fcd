"""Nonlinear Bell inequalities derived from one-way communication complexity.

For a box with acceptance ``p_A`` and conditional agreement ``p_B`` every
local model satisfies, for all ``0 < delta < 1``,

    ceil(log2(1/p_A) + log2 log2(1/delta)) + 1 >= C((1 - delta) p_B + delta/2)

where ``C(s)`` is the one-way distributional complexity at success ``s``. The
right-hand side may come from exact search, from the amplification bound on
the 2/3-complexity, or from an asymptotic formula. All logs are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from ccbell.classical_cc import cc_curve, complexity, pumped_bound
from ccbell.correlations import BoxSummary, CorrelationBox, _align, local_strategies, summarize
from ccbell.problems import CommProblem, rac21
from ccbell.quantum import QuantumProtocol, box_from_protocol, isotropic

VIOLATION_SLACK = 1e-12
RAC_CLASSICAL_BOUND = 0.75
DEFAULT_DELTA_GRID = tuple(sorted([2.0**-k for k in range(1, 21)] + [2.0 / 3.0], reverse=True))

RHS_EXACT = "exact-search"
RHS_PUMPED = "pumped-bound"
RHS_ASYMPTOTIC = "asymptotic-formula"


def loglog(delta: float) -> float:
    """``log2 log2 (1/delta)``; negative for ``delta > 1/2``."""
    return math.log2(math.log2(1.0 / delta))


def _ceil(v: float) -> int:
    r = round(v)
    if abs(v - r) < 1e-9:
        return int(r)
    return math.ceil(v)


def lhs(p_A: float, delta: float) -> float:
    """Message length of the first-acceptance protocol: ``ceil(log 1/p_A + log log 1/delta) + 1``.

    Infinite when ``p_A == 0`` (nothing can be detected).
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not 0.0 <= p_A <= 1.0:
        raise ValueError("p_A must lie in [0, 1]")
    if p_A == 0.0:
        return math.inf
    return _ceil(math.log2(1.0 / p_A) + loglog(delta)) + 1


def amplified_success(p_B: float, delta: float) -> float:
    return (1.0 - delta) * p_B + delta / 2.0


@dataclass(frozen=True)
class BellReport:
    lhs: float
    rhs: float
    delta_star: float
    violated: bool
    rhs_source: str
    per_delta: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self) -> dict:
        def num(v):
            return None if v is None else ("inf" if v == math.inf else v)

        return {
            "lhs": num(self.lhs),
            "rhs": num(self.rhs),
            "delta_star": self.delta_star,
            "violated": self.violated,
            "rhs_source": self.rhs_source,
            "constants": self.constants,
            "per_delta": [{k: num(v) for k, v in row.items()} for row in self.per_delta],
        }


def rhs_function(problem: CommProblem | None, rhs_source: str = RHS_EXACT, c_two_thirds: float | None = None,
                 fam: "AsymptoticFamily | None" = None, n: int | None = None) -> Callable[[float], float]:
    """Complexity lower bound ``C(success)`` for the chosen source; ``inf`` when unattainable."""
    if rhs_source == RHS_EXACT:
        curve = cc_curve(problem)

        def exact(s):
            c = curve.complexity(min(max(s, 0.0), 1.0))
            return math.inf if c is None else float(c)

        return exact
    if rhs_source == RHS_PUMPED:
        if c_two_thirds is None:
            c = complexity(problem, 2.0 / 3.0)
            if c is None:
                raise ValueError("success 2/3 is unattainable for this problem")
            c_two_thirds = c
        return lambda s: pumped_bound(c_two_thirds, s)
    if rhs_source == RHS_ASYMPTOTIC:
        fam = fam or AsymptoticFamily()
        size = n if n is not None else problem.n
        return lambda s: vsp_bound(size, s, fam)
    raise ValueError(f"unknown rhs source {rhs_source!r}")


def evaluate(summary: BoxSummary, problem: CommProblem | None = None, delta_grid=None, rhs_source: str = RHS_EXACT,
             *, complexity_fn: Callable[[float], float] | None = None, c_two_thirds: float | None = None,
             fam: "AsymptoticFamily | None" = None, n: int | None = None) -> BellReport:
    """Check the inequality at every delta in the grid and report the most violating one.

    ``complexity_fn`` overrides the right-hand side with any map from success
    probability to bits. Deltas where the rhs is unattainable (``inf``) are
    listed but never count as a violation.
    """
    grid = list(DEFAULT_DELTA_GRID if delta_grid is None else delta_grid)
    if not grid:
        raise ValueError("delta grid is empty")
    if any(not 0.0 < d < 1.0 for d in grid):
        raise ValueError("every delta must lie in (0, 1)")
    rhs_of = complexity_fn or rhs_function(problem, rhs_source, c_two_thirds, fam, n)
    rows = []
    best = None
    for d in grid:
        left = lhs(summary.p_A, d)
        s = amplified_success(summary.p_B, d)
        right = float(rhs_of(s))
        gap = right - left if math.isfinite(right) and math.isfinite(left) else -math.inf
        rows.append({"delta": d, "lhs": left, "success": s, "rhs": right, "gap": gap})
        if best is None or gap > best["gap"]:
            best = rows[-1]
    violated = math.isfinite(best["gap"]) and best["lhs"] < best["rhs"] - VIOLATION_SLACK
    constants = {}
    if rhs_source == RHS_ASYMPTOTIC:
        constants = (fam or AsymptoticFamily()).constants()
    if rhs_source == RHS_PUMPED and c_two_thirds is not None:
        constants = {"c_two_thirds": c_two_thirds}
    return BellReport(best["lhs"], best["rhs"], best["delta"], bool(violated), rhs_source, rows, constants)


def evaluate_box(box: CorrelationBox, problem: CommProblem, delta_grid=None, rhs_source: str = RHS_EXACT, **kw) -> BellReport:
    return evaluate(summarize(box, problem), problem, delta_grid, rhs_source, **kw)


def lemma_bound(p_S: float, complexity_fn: Callable[[float], float], deltas) -> float:
    """``max_delta [C((1-delta) p_S + delta/2) - log log 1/delta] - 2``.

    A quantum protocol with fewer qubits than this yields, via the
    entangled-measurement construction, a box violating the inequality.
    """
    return max(complexity_fn(amplified_success(p_S, d)) - loglog(d) for d in deltas) - 2.0


# --- random access code ---------------------------------------------------


def rac_inequality(box: CorrelationBox, problem: CommProblem | None = None, parity: int = 1) -> float:
    """Success of the protocol where Bob outputs ``b xor a xor parity``, weighted by ``mu``.

    With the entangled-measurement box Bob's qubit is ``psi_x`` when ``a = 1``
    and its orthogonal complement when ``a = 0``, so ``parity = 1`` is the
    decoding that reaches ``cos^2(pi/8)``. Any local box scores at most 3/4
    for either parity.
    """
    problem = problem or rac21()
    p = _align(box, problem)
    total = 0.0
    for a in (0, 1):
        for b in (0, 1):
            total += np.sum(problem.mu * p[:, :, a, b] * problem.valid[:, :, b ^ a ^ parity])
    return float(total)


def rac_violated(value: float) -> bool:
    return value > RAC_CLASSICAL_BOUND + VIOLATION_SLACK


def local_bound(problem: CommProblem, parity: int = 1) -> float:
    """Maximum of :func:`rac_inequality` over deterministic local boxes (brute force)."""
    nx, ny = problem.shape
    alphas, betas = local_strategies(nx, ny)
    xi, yi = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    best = 0.0
    for a, b in zip(alphas, betas):
        out = b[yi] ^ a[xi] ^ parity
        best = max(best, float(np.sum(problem.mu * problem.valid[xi, yi, out])))
    return best


# --- noise robustness -----------------------------------------------------


def noise_threshold(protocol: QuantumProtocol, problem: CommProblem, inequality: str = "rac", tol: float = 1e-9,
                    **evaluate_kw):
    """Smallest isotropic visibility ``p`` whose box violates the chosen inequality.

    Bisection on ``p``; the violation is monotone in ``p`` because the box is
    affine in the state and both inequalities are monotone in the relevant
    box parameter. Returns ``None`` when even ``p = 1`` shows no violation.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    d = protocol.dim
    if inequality == "rac":

        def violated(p):
            return rac_violated(rac_inequality(box_from_protocol(protocol, isotropic(d, p), problem), problem))

    elif inequality == "theorem1":
        if "complexity_fn" not in evaluate_kw:
            evaluate_kw["complexity_fn"] = rhs_function(
                problem, evaluate_kw.pop("rhs_source", RHS_EXACT), evaluate_kw.pop("c_two_thirds", None),
                evaluate_kw.pop("fam", None), evaluate_kw.pop("n", None))
        grid = evaluate_kw.pop("delta_grid", None)

        def violated(p):
            s = summarize(box_from_protocol(protocol, isotropic(d, p), problem), problem)
            return evaluate(s, problem, grid, **evaluate_kw).violated

    else:
        raise ValueError(f"unknown inequality {inequality!r}")

    if not violated(1.0):
        return None
    if violated(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if violated(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# --- asymptotic families --------------------------------------------------


@dataclass(frozen=True)
class AsymptoticFamily:
    """Constants of the asymptotic complexity bounds (known only up to scale)."""

    family: str = "VSP"
    c: float = 1.0
    c_prime: float = 1.0
    c_dprime: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.family not in ("VSP", "alphaPHM"):
            raise ValueError(f"unknown family {self.family!r}")
        if min(self.c, self.c_prime, self.c_dprime) <= 0:
            raise ValueError("constants must be positive")
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")

    def constants(self) -> dict:
        return {"family": self.family, "c": self.c, "c_prime": self.c_prime, "c_dprime": self.c_dprime,
                "alpha": self.alpha}


def vsp_bound(n: float, success: float, fam: AsymptoticFamily | None = None) -> float:
    """Classical bound for the vector-in-subspace problem: amplified ``c * n**(1/3)``."""
    fam = fam or AsymptoticFamily()
    return pumped_bound(fam.c * n ** (1.0 / 3.0), success)


def asymptotic_vsp(n: float, p_B: float, delta: float, fam: AsymptoticFamily | None = None):
    """``(lhs, rhs, violated)`` for the VSP inequality with acceptance ``1/n``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    left = math.log2(n) + loglog(delta)
    right = vsp_bound(n, amplified_success(p_B, delta), fam)
    return left, right, left < right - VIOLATION_SLACK


def asymptotic_phm(n: float, delta: float, fam: AsymptoticFamily | None = None):
    """``(lhs, rhs, violated)`` for the functional hidden-matching inequality."""
    fam = fam or AsymptoticFamily(family="alphaPHM")
    if n < 2:
        raise ValueError("n must be >= 2")
    left = fam.c_prime * math.log2(n) / fam.alpha + loglog(delta)
    right = ((1.0 - delta) / 6.0) ** 2 / 3.0 * fam.c_dprime * math.sqrt(n / fam.alpha)
    return left, right, left < right - VIOLATION_SLACK


def crossover(violated_at: Callable[[float], bool], n_grid):
    """First ``n`` in the grid from which every later grid point is violated; ``None`` if none."""
    flags = [bool(violated_at(n)) for n in n_grid]
    if not flags or not flags[-1]:
        return None
    i = len(flags) - 1
    while i > 0 and flags[i - 1]:
        i -= 1
    return n_grid[i]


def vsp_crossover(p_B: float, fam: AsymptoticFamily | None = None, delta_grid=(0.01,), n_grid=None):
    """Smallest grid ``n`` beyond which the VSP inequality is violated for some grid delta."""
    if n_grid is None:
        n_grid = default_n_grid()
    return crossover(lambda n: any(asymptotic_vsp(n, p_B, d, fam)[2] for d in delta_grid), list(n_grid))


def phm_crossover(fam: AsymptoticFamily | None = None, delta_grid=(0.5,), n_grid=None):
    if n_grid is None:
        n_grid = default_n_grid(top=1e12)
    return crossover(lambda n: any(asymptotic_phm(n, d, fam)[2] for d in delta_grid), list(n_grid))


def default_n_grid(lo: float = 2.0, top: float = 1e9, per_decade: int = 50) -> list:
    """Log-spaced integer problem sizes, deduplicated."""
    count = int(round(math.log10(top / lo) * per_decade)) + 1
    vals = np.unique(np.round(np.geomspace(lo, top, count)).astype(np.int64))
    return [int(v) for v in vals]


# --- detection-boundary curves -------------------------------------------


REGIONS = ("detected", "advantage-undetected", "classical")


@dataclass(frozen=True)
class CurveTable:
    """Rows ``(p_B, C, boundary)``; see :meth:`classify` for the three regions."""

    n: float
    rows: list
    constants: dict

    def classify(self, p_B: float, log_inv_p_A: float) -> str:
        """Region of a point: below the boundary, between the curves, or above ``C``."""
        fam = AsymptoticFamily(**self.constants)
        c = vsp_bound(self.n, p_B, fam)
        b = vsp_boundary(self.n, p_B, fam)
        if log_inv_p_A < b:
            return REGIONS[0]
        if log_inv_p_A < c:
            return REGIONS[1]
        return REGIONS[2]


def vsp_boundary(n: float, p_B: float, fam: AsymptoticFamily | None = None, delta_min: float = 1e-15):
    """Largest ``log2(1/p_A)`` still detected: ``max_delta C(...) - log log 1/delta`` over ``delta <= 1/2``.

    Deltas above 1/2 are excluded because their negative ``log log`` term
    would credit pure noise with detection.
    """
    fam = fam or AsymptoticFamily()

    def value(d):
        return vsp_bound(n, amplified_success(p_B, d), fam) - loglog(d)

    grid = list(np.geomspace(delta_min, 0.5, 400))
    if p_B > 2.0 / 3.0:
        # success > 2/3 holds for delta below this point; the sup sits just under it
        d_edge = (p_B - 2.0 / 3.0) / (p_B - 0.5)
        if d_edge > delta_min:
            grid.append(min(d_edge * (1 - 1e-12), 0.5))
    grid = sorted(set(grid))
    vals = [value(d) for d in grid]
    k = int(np.argmax(vals))
    best_d, best_v = grid[k], vals[k]
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda d: -value(d), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14 * max(hi, 1e-300) + 1e-300})
        if res.success and -res.fun > best_v:
            best_d, best_v = float(res.x), float(-res.fun)
    return max(best_v, 0.0)


def fig3_curves(n: float, fam: AsymptoticFamily | None = None, p_B_grid=None) -> CurveTable:
    """VSP complexity curve and the delta-optimized detection boundary on a ``p_B`` grid."""
    if n < 2:
        raise ValueError("n must be >= 2")
    fam = fam or AsymptoticFamily()
    if p_B_grid is None:
        p_B_grid = np.linspace(0.5, 1.0, 100)
    rows = []
    for pb in p_B_grid:
        pb = float(pb)
        rows.append((float(pb), vsp_bound(n, pb, fam), float(vsp_boundary(n, pb, fam))))
    return CurveTable(n, rows, fam.constants())
