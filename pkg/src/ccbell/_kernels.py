"""Hot loops, compiled with numba when available.

Every kernel has a pure-numpy twin with identical results. Set
``CCBELL_DISABLE_NUMBA=1`` to force the numpy path (useful for debugging and
for platforms without numba); individual calls may also pass
``backend="numpy"`` or ``backend="numba"``.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

DISABLED = os.environ.get("CCBELL_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
DEFAULT_BACKEND = "numba" if HAVE_NUMBA and not DISABLED else "numpy"

_BATCH = 4096


def resolve_backend(backend: str | None) -> str:
    if backend is None:
        return DEFAULT_BACKEND
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


# --- set partitions -------------------------------------------------------


def count_partitions(n: int, max_blocks: int) -> int:
    """Number of set partitions of ``n`` items into at most ``max_blocks`` blocks."""
    if n == 0:
        return 1
    m = min(max_blocks, n)
    # Stirling numbers of the second kind, row by row.
    row = [1] + [0] * m
    for _ in range(n):
        new = [0] * (m + 1)
        for k in range(1, m + 1):
            new[k] = k * row[k] + row[k - 1]
        row = new
    return sum(row[1:])


def _partition_search_py(w: np.ndarray, max_blocks: int):
    # w[x, y, o]; restricted-growth strings in lexicographic order
    nx = w.shape[0]
    m = min(max_blocks, nx)
    best = -1.0
    best_rgs = np.zeros(nx, dtype=np.int64)
    a = np.zeros(nx, dtype=np.int64)
    batch = np.empty((_BATCH, nx), dtype=np.int64)
    blocks = np.arange(m)
    done = False
    while not done:
        fill = 0
        while fill < _BATCH and not done:
            batch[fill] = a
            fill += 1
            done = not _next_rgs(a, m)
        chunk = batch[:fill]
        # same accumulation order as the compiled kernel, so near-ties break identically
        sums = np.zeros((fill, m, w.shape[1], 2))
        rows = np.arange(fill)
        for x in range(nx):
            sums[rows, chunk[:, x]] += w[x]
        scores = np.zeros(fill)
        for b in blocks:
            for y in range(w.shape[1]):
                s0, s1 = sums[:, b, y, 0], sums[:, b, y, 1]
                scores += np.where(s1 > s0, s1, s0)
        k = int(np.argmax(scores))
        if scores[k] > best:
            best = float(scores[k])
            best_rgs = chunk[k].copy()
    return best, best_rgs


def _next_rgs(a, m):
    """Advance ``a`` to the next restricted-growth string with values < m; False when exhausted."""
    nx = a.shape[0]
    prefmax = np.empty(nx, dtype=np.int64)
    cur = -1
    for i in range(nx):
        if a[i] > cur:
            cur = a[i]
        prefmax[i] = cur
    for i in range(nx - 1, 0, -1):
        if a[i] < m - 1 and a[i] <= prefmax[i - 1]:
            a[i] += 1
            for j in range(i + 1, nx):
                a[j] = 0
            return True
    return False


if HAVE_NUMBA:
    _next_rgs_nb = njit(cache=True)(_next_rgs)

    @njit(cache=True)
    def _partition_search_nb(w, max_blocks):
        nx, ny = w.shape[0], w.shape[1]
        m = min(max_blocks, nx)
        a = np.zeros(nx, dtype=np.int64)
        best_rgs = np.zeros(nx, dtype=np.int64)
        sums = np.zeros((m, ny, 2))
        best = -1.0
        while True:
            sums[:] = 0.0
            for x in range(nx):
                b = a[x]
                for y in range(ny):
                    sums[b, y, 0] += w[x, y, 0]
                    sums[b, y, 1] += w[x, y, 1]
            score = 0.0
            for b in range(m):
                for y in range(ny):
                    s0 = sums[b, y, 0]
                    s1 = sums[b, y, 1]
                    score += s1 if s1 > s0 else s0
            if score > best:
                best = score
                best_rgs[:] = a
            if not _next_rgs_nb(a, m):
                break
        return best, best_rgs


def partition_search(w: np.ndarray, max_blocks: int, backend: str | None = None):
    """Best encoder partition for weighted-valid table ``w[x, y, o]``.

    Returns ``(value, rgs)`` where ``rgs[x]`` is the message sent on input ``x``.
    Ties keep the first partition in lexicographic restricted-growth order.
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    if resolve_backend(backend) == "numba":
        value, rgs = _partition_search_nb(w, int(max_blocks))
    else:
        value, rgs = _partition_search_py(w, int(max_blocks))
    return float(value), np.asarray(rgs)


# --- protocol simulation --------------------------------------------------


def _pib_count_py(pairs, inst_u, abort_u, cum, valid):
    # cum[p] = cumulative probabilities over outcomes ordered (a, b) = 00, 01, 10, 11
    trials, copies = inst_u.shape
    c = cum[pairs]  # (T, 4)
    outcome = (inst_u[:, :, None] >= c[:, None, :3]).sum(axis=2)  # (T, N) in 0..3
    accept = outcome >= 2
    any_acc = accept.any(axis=1)
    first = np.argmax(accept, axis=1)
    bob = outcome[np.arange(trials), first] & 1
    guess = (abort_u < 0.5).astype(np.int64)
    out = np.where(any_acc, bob, guess)
    return int(valid[pairs, out].sum())


if HAVE_NUMBA:

    @njit(cache=True)
    def _pib_count_nb(pairs, inst_u, abort_u, cum, valid):
        trials, copies = inst_u.shape
        hits = 0
        for t in range(trials):
            p = pairs[t]
            out = -1
            for i in range(copies):
                u = inst_u[t, i]
                k = 0
                while k < 3 and u >= cum[p, k]:
                    k += 1
                if k >= 2:
                    out = k & 1
                    break
            if out < 0:
                out = 1 if abort_u[t] < 0.5 else 0
            if valid[p, out]:
                hits += 1
        return hits


def pib_success_count(pairs, inst_u, abort_u, cum, valid, backend: str | None = None) -> int:
    """Count successful trials of the first-acceptance protocol given pre-drawn uniforms.

    ``pairs`` indexes flattened (x, y) cells, ``inst_u`` is (trials, copies),
    ``abort_u`` supplies the random guess on ABORT, ``cum`` is (cells, 4) and
    ``valid`` is (cells, 2).
    """
    pairs = np.ascontiguousarray(pairs, dtype=np.int64)
    inst_u = np.ascontiguousarray(inst_u, dtype=np.float64)
    abort_u = np.ascontiguousarray(abort_u, dtype=np.float64)
    cum = np.ascontiguousarray(cum, dtype=np.float64)
    valid = np.ascontiguousarray(valid, dtype=np.bool_)
    if resolve_backend(backend) == "numba":
        return int(_pib_count_nb(pairs, inst_u, abort_u, cum, valid))
    return _pib_count_py(pairs, inst_u, abort_u, cum, valid)
