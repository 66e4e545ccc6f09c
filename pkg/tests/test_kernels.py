"""The numba and numpy flavours of every hot kernel agree."""
import os
import subprocess
import sys

import numpy as np
import pytest

from hdpreduce import _kernels as K
from hdpreduce._jit import JIT_AVAILABLE

pytestmark = pytest.mark.skipif(not JIT_AVAILABLE, reason="numba not installed")


def both(name, *args):
    return K.flavour(name, False)(*args), K.flavour(name, True)(*args)


def test_small_kernels(rng):
    for _ in range(50):
        v = rng.normal(size=3) * rng.choice([1e-8, 1.0, 10.0])
        m = rng.normal(size=(3, 3)) + 2 * np.eye(3)
        for name, args in (("hat", (v,)), ("cross", (v, m[0].copy())),
                           ("exp_so3", (v,)), ("polar", (m,)), ("so3_defect", (m,))):
            a, b = both(name, *args)
            assert np.abs(np.asarray(a) - np.asarray(b)).max() < 1e-13, name
        a, b = both("vee", K.np_hat(v))
        assert np.array_equal(a, b)


def test_sphere_frame(rng):
    for _ in range(50):
        e = rng.normal(size=3)
        e /= np.linalg.norm(e)
        a, b = both("sphere_frame", e)
        assert np.abs(a - b).max() < 1e-15
        assert np.abs(a.T @ a - np.eye(2)).max() < 1e-14
        assert np.abs(e @ a).max() < 1e-14


def _span_equal(a, b):
    if a.shape[1] != b.shape[1]:
        return False
    if a.shape[1] == 0:
        return True
    return np.abs(a @ a.T - b @ b.T).max() < 1e-12


def test_bases(rng):
    for rows, cols, rank in ((8, 5, 5), (8, 11, 3), (3, 9, 3), (6, 6, 0)):
        a = rng.normal(size=(rows, rank)) @ rng.normal(size=(rank, cols)) if rank else np.zeros((rows, cols))
        o1, o2 = both("orth_basis", a, 1e-10)
        n1, n2 = both("null_basis", a, 1e-10)
        assert o1.shape[1] == rank and _span_equal(o1, o2)
        assert n1.shape[1] == cols - rank and _span_equal(n1, n2)
        if n1.size:
            assert np.abs(a @ n1).max() < 1e-10


def test_min_norm_constrained(rng):
    E = rng.normal(size=(11, 13))
    r = E @ rng.normal(size=13)
    L = rng.normal(size=(8, 13))
    c = rng.normal(size=8)
    (u1, c1), (u2, c2) = both("min_norm_constrained", E, r, L, c, 1e-10)
    assert np.abs(u1 - u2).max() < 1e-11
    assert c1 < 1e-10 and c2 < 1e-10
    # optimality oracle: among all solutions u1 + N z, |L u + c| is least at z = 0
    from scipy.linalg import null_space
    N = null_space(E)
    z, *_ = np.linalg.lstsq(L @ N, -(L @ u1 + c), rcond=None)
    assert np.abs(z).max() < 1e-9


def test_env_flag_selects_numpy():
    code = ("import hdpreduce._kernels as K, hdpreduce._jit as J;"
            "print(J.JIT_ENABLED, K.hat is K.np_hat)")
    env = dict(os.environ, HDPREDUCE_DISABLE_JIT="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True).stdout.split()
    assert out == ["False", "True"]
