import os
import subprocess
import sys

import numpy as np
import pytest

from ccbell import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def test_resolve_backend():
    assert _kernels.resolve_backend("numpy") == "numpy"
    with pytest.raises(ValueError):
        _kernels.resolve_backend("fortran")


@pytest.mark.parametrize("n,m,expected", [(0, 3, 1), (4, 4, 15), (4, 2, 8), (5, 1, 1), (13, 13, 27644437)])
def test_count_partitions(n, m, expected):
    assert _kernels.count_partitions(n, m) == expected


def test_rgs_enumeration_matches_count():
    for nx in range(1, 7):
        for m in range(1, nx + 1):
            a = np.zeros(nx, dtype=np.int64)
            seen = {tuple(a)}
            while _kernels._next_rgs(a, m):
                seen.add(tuple(a))
            assert len(seen) == _kernels.count_partitions(nx, m)


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_pib_backends_agree(seed):
    rng = np.random.default_rng(seed)
    cells, trials, copies = 6, 3000, 4
    p = rng.dirichlet(np.ones(4), size=cells)
    cum = np.cumsum(p, axis=1)
    valid = rng.random((cells, 2)) < 0.6
    pairs = rng.integers(0, cells, trials)
    inst_u = rng.random((trials, copies))
    abort_u = rng.random(trials)
    args = (pairs, inst_u, abort_u, cum, valid)
    assert _kernels.pib_success_count(*args, backend="numba") == _kernels.pib_success_count(*args, backend="numpy")


@needs_numba
def test_partition_backends_agree():
    rng = np.random.default_rng(3)
    w = rng.random((7, 3, 2))
    w /= w.sum()
    v1, r1 = _kernels.partition_search(w, 3, backend="numba")
    v2, r2 = _kernels.partition_search(w, 3, backend="numpy")
    assert v1 == v2 and np.array_equal(r1, r2)


def test_env_flag_selects_numpy():
    env = dict(os.environ, CCBELL_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from ccbell import _kernels; print(_kernels.DEFAULT_BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
