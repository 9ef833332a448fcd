"""Finite bipartite communication problems.

A problem is a weight table ``mu[x, y]`` over Alice/Bob input pairs together
with a table of acceptable outputs ``valid[x, y, o]`` for ``o`` in {0, 1}.
Functions have exactly one acceptable output per pair; relations (or
don't-care pairs) may accept both.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

NORM_TOL = 1e-9


class ProblemError(ValueError):
    """Raised when a problem definition violates its invariants."""


@dataclass(frozen=True, eq=False)
class CommProblem:
    x_labels: tuple
    y_labels: tuple
    mu: np.ndarray
    valid: np.ndarray
    n: int = 0
    name: str = field(default="problem")

    def __post_init__(self):
        x_labels = tuple(self.x_labels)
        y_labels = tuple(self.y_labels)
        if not x_labels or not y_labels:
            raise ProblemError("input label sets must be nonempty")
        if len(set(x_labels)) != len(x_labels) or len(set(y_labels)) != len(y_labels):
            raise ProblemError("input labels must be duplicate-free")
        mu = np.array(self.mu, dtype=np.float64)
        valid = np.array(self.valid, dtype=bool)
        shape = (len(x_labels), len(y_labels))
        if mu.shape != shape:
            raise ProblemError(f"mu has shape {mu.shape}, expected {shape}")
        if valid.shape != shape + (2,):
            raise ProblemError(f"valid has shape {valid.shape}, expected {shape + (2,)}")
        if not np.all(np.isfinite(mu)):
            raise ProblemError("mu contains non-finite weights")
        if np.any(mu < 0):
            raise ProblemError("mu contains negative weights")
        total = mu.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise ProblemError(f"mu sums to {total!r}, not 1")
        mu = mu / total
        if np.any((mu > 0) & ~valid.any(axis=2)):
            raise ProblemError("empty valid-output set on a pair with positive weight")
        mu.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "x_labels", x_labels)
        object.__setattr__(self, "y_labels", y_labels)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "valid", valid)
        object.__setattr__(self, "n", int(self.n))

    @property
    def shape(self) -> tuple[int, int]:
        return self.mu.shape

    @property
    def support(self) -> np.ndarray:
        """Boolean mask of pairs with positive weight."""
        return self.mu > 0

    @property
    def is_function(self) -> bool:
        return bool(np.all(self.valid.sum(axis=2)[self.support] == 1))

    def weighted_valid(self) -> np.ndarray:
        """``w[x, y, o] = mu(x, y) * [o is acceptable]``; the table the solvers consume."""
        return self.mu[:, :, None] * self.valid

    def x_index(self, label) -> int:
        return self.x_labels.index(label)

    def y_index(self, label) -> int:
        return self.y_labels.index(label)

    def __eq__(self, other):
        if not isinstance(other, CommProblem):
            return NotImplemented
        return (
            self.x_labels == other.x_labels
            and self.y_labels == other.y_labels
            and self.n == other.n
            and np.array_equal(self.valid, other.valid)
            and np.allclose(self.mu, other.mu, rtol=0, atol=1e-12)
        )

    __hash__ = object.__hash__

    def to_dict(self) -> dict:
        cells = []
        for i in range(len(self.x_labels)):
            row = []
            for j in range(len(self.y_labels)):
                v0, v1 = self.valid[i, j]
                row.append("any" if v0 and v1 else 1 if v1 else 0 if v0 else None)
            cells.append(row)
        return {
            "x": list(self.x_labels),
            "y": list(self.y_labels),
            "mu": self.mu.tolist(),
            "valid": cells,
            "n": self.n,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _decode_valid(cell) -> tuple[bool, bool]:
    if cell is None:
        return (False, False)
    if isinstance(cell, bool):
        raise ProblemError(f"invalid valid-set entry {cell!r}")
    if cell == "any":
        return (True, True)
    if cell in (0, 1):
        return (cell == 0, cell == 1)
    if isinstance(cell, list) and all(c in (0, 1) and not isinstance(c, bool) for c in cell):
        return (0 in cell, 1 in cell)
    raise ProblemError(f"invalid valid-set entry {cell!r}")


def from_dict(doc: Mapping[str, Any]) -> CommProblem:
    if not isinstance(doc, Mapping):
        raise ProblemError("problem document must be an object")
    missing = {"x", "y", "mu", "valid"} - set(doc)
    if missing:
        raise ProblemError(f"problem document is missing keys: {sorted(missing)}")
    unknown = set(doc) - {"x", "y", "mu", "valid", "n", "name"}
    if unknown:
        raise ProblemError(f"unknown keys in problem document: {sorted(unknown)}")
    xs, ys = doc["x"], doc["y"]
    if not isinstance(xs, list) or not isinstance(ys, list):
        raise ProblemError("'x' and 'y' must be arrays of labels")
    mu, cells = doc["mu"], doc["valid"]
    if not isinstance(mu, list) or len(mu) != len(xs):
        raise ProblemError("'mu' must have one row per x label")
    if not isinstance(cells, list) or len(cells) != len(xs):
        raise ProblemError("'valid' must have one row per x label")
    for row in list(mu) + list(cells):
        if not isinstance(row, list) or len(row) != len(ys):
            raise ProblemError("every row must have one entry per y label")
    try:
        mu_arr = np.array(mu, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"'mu' is not numeric: {exc}") from None
    valid = np.array([[_decode_valid(c) for c in row] for row in cells], dtype=bool)
    valid = valid.reshape(len(xs), len(ys), 2)
    n = doc.get("n", 0)
    if not isinstance(n, int) or isinstance(n, bool):
        raise ProblemError("'n' must be an integer")
    return CommProblem(tuple(xs), tuple(ys), mu_arr, valid, n, name=str(doc.get("name", "problem")))


def from_json(document: str) -> CommProblem:
    """Parse and validate a problem from JSON text."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"malformed JSON: {exc}") from None
    return from_dict(doc)


def from_function(x_labels: Sequence, y_labels: Sequence, f, mu=None, n: int = 0, name: str = "problem") -> CommProblem:
    """Build a problem from a boolean function ``f(x, y)``; uniform ``mu`` by default."""
    nx, ny = len(x_labels), len(y_labels)
    valid = np.zeros((nx, ny, 2), dtype=bool)
    for i, x in enumerate(x_labels):
        for j, y in enumerate(y_labels):
            valid[i, j, int(f(x, y))] = True
    if mu is None:
        mu = np.full((nx, ny), 1.0 / (nx * ny))
    return CommProblem(tuple(x_labels), tuple(y_labels), mu, valid, n, name=name)


def rac21() -> CommProblem:
    """The 2 -> 1 random access code: Alice holds ``x1x0``, Bob must output bit ``x_y``.

    Labels are the strings ``"00", "01", "10", "11"`` read as ``x1 x0``.
    """
    xs = ("00", "01", "10", "11")
    return from_function(xs, (0, 1), lambda x, y: int(x[1 - y]), n=2, name="rac21")


def index_problem(bits: int) -> CommProblem:
    """Index function: Alice holds a ``bits``-bit string, Bob outputs bit ``y`` of it.

    ``bits = 2`` coincides with :func:`rac21` up to naming.
    """
    if bits < 1:
        raise ProblemError("bits must be >= 1")
    xs = tuple(format(v, f"0{bits}b") for v in range(2**bits))
    return from_function(xs, tuple(range(bits)), lambda x, y: int(x[bits - 1 - y]), n=bits, name=f"index{bits}")


def strategy_table(problem: CommProblem, strategy) -> np.ndarray:
    """Normalize a strategy (array or mapping ``(x, y) -> output``) to an int array over the support.

    Off-support cells are set to -1.
    """
    nx, ny = problem.shape
    out = np.full((nx, ny), -1, dtype=np.int64)
    if isinstance(strategy, Mapping):
        for i, x in enumerate(problem.x_labels):
            for j, y in enumerate(problem.y_labels):
                if (x, y) in strategy:
                    out[i, j] = int(strategy[(x, y)])
    else:
        arr = np.asarray(strategy)
        if arr.shape != (nx, ny):
            raise ProblemError(f"strategy has shape {arr.shape}, expected {(nx, ny)}")
        out[:] = arr
    supp = problem.support
    if np.any(out[supp] < 0):
        raise ProblemError("strategy is missing a pair in the support of mu")
    if np.any((out[supp] != 0) & (out[supp] != 1)):
        raise ProblemError("strategy outputs must be 0 or 1")
    return out


def success_probability(problem: CommProblem, strategy) -> float:
    """mu-weighted probability that the strategy's output is acceptable."""
    table = strategy_table(problem, strategy)
    supp = problem.support
    i, j = np.nonzero(supp)
    hits = problem.valid[i, j, table[i, j]]
    return float(np.sum(problem.mu[i, j] * hits))
