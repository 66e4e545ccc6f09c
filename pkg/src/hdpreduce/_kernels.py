"""Hot kernels, each in a numba flavour (nb_*) and a pure-numpy flavour (np_*).

The unprefixed names are bound to one flavour at import time, see _jit.
"""
import numpy as np

from ._jit import JIT_ENABLED, njit

SMALL_ANGLE = 1e-6


# ---------------------------------------------------------------- numpy twins

def np_hat(v):
    return np.array([[0.0, -v[2], v[1]],
                     [v[2], 0.0, -v[0]],
                     [-v[1], v[0], 0.0]])


def np_vee(m):
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def np_cross(a, b):
    return np.cross(a, b)


def np_exp_so3(v):
    th = np.linalg.norm(v)
    if th < SMALL_ANGLE:
        a = 1.0 - th * th / 6.0
        b = 0.5 - th * th / 24.0
    else:
        a = np.sin(th) / th
        b = (1.0 - np.cos(th)) / (th * th)
    k = np_hat(v)
    return np.eye(3) + a * k + b * (k @ k)


def np_polar(m):
    u, _, vt = np.linalg.svd(m)
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        u[:, 2] = -u[:, 2]
        r = u @ vt
    return r


def np_sphere_frame(e):
    e = e / np.linalg.norm(e)
    a = np.zeros(3)
    a[np.argmin(np.abs(e))] = 1.0
    t1 = a - (a @ e) * e
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(e, t1)
    return np.column_stack((t1, t2))


def np_rank_split(a, rtol):
    """SVD of a plus its numerical rank (singular values below rtol*s_max dropped)."""
    u, s, vt = np.linalg.svd(a, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return u, s, vt, 0
    return u, s, vt, int(np.sum(s > rtol * s[0]))


def np_orth_basis(a, rtol):
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], 0))
    u, _, _, k = np_rank_split(a, rtol)
    return np.ascontiguousarray(u[:, :k])


def np_null_basis(a, rtol):
    if a.shape[0] == 0:
        return np.eye(a.shape[1])
    _, _, vt, k = np_rank_split(a, rtol)
    return np.ascontiguousarray(vt[k:].T)


def np_min_norm_constrained(E, r, L, c, rtol):
    """argmin |L u + c| subject to E u = r, ties broken by least |u|.

    Returns (u, |E u_p - r|) where u_p is the min-norm particular solution;
    the second value flags an inconsistent system.
    """
    n = E.shape[1]
    if E.shape[0] == 0:
        up = np.zeros(n)
        N = np.eye(n)
        res = 0.0
    else:
        u_, s, vt, k = np_rank_split(E, rtol)
        up = vt[:k].T @ ((u_[:, :k].T @ r) / s[:k])
        N = vt[k:].T
        res = np.linalg.norm(E @ up - r)
    if N.shape[1] == 0:
        return up, res
    A = L @ N
    b = -(L @ up + c)
    ua, sa, vta, ka = np_rank_split(A, rtol)
    z = vta[:ka].T @ ((ua[:, :ka].T @ b) / sa[:ka])
    return up + N @ z, res


def np_so3_defect(m):
    return max(np.max(np.abs(m.T @ m - np.eye(3))), abs(np.linalg.det(m) - 1.0))


# ---------------------------------------------------------------- numba twins

@njit
def nb_hat(v):
    m = np.zeros((3, 3))
    m[0, 1] = -v[2]
    m[0, 2] = v[1]
    m[1, 0] = v[2]
    m[1, 2] = -v[0]
    m[2, 0] = -v[1]
    m[2, 1] = v[0]
    return m


@njit
def nb_vee(m):
    out = np.empty(3)
    out[0] = m[2, 1]
    out[1] = m[0, 2]
    out[2] = m[1, 0]
    return out


@njit
def nb_cross(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@njit
def nb_exp_so3(v):
    th = np.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if th < SMALL_ANGLE:
        a = 1.0 - th * th / 6.0
        b = 0.5 - th * th / 24.0
    else:
        a = np.sin(th) / th
        b = (1.0 - np.cos(th)) / (th * th)
    k = nb_hat(v)
    out = a * k + b * (k @ k)
    for i in range(3):
        out[i, i] += 1.0
    return out


@njit
def nb_polar(m):
    u, _, vt = np.linalg.svd(np.ascontiguousarray(m))
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        for i in range(3):
            u[i, 2] = -u[i, 2]
        r = u @ vt
    return r


@njit
def nb_sphere_frame(e):
    e = e / np.sqrt(e @ e)
    a = np.zeros(3)
    a[np.argmin(np.abs(e))] = 1.0
    t1 = a - (a @ e) * e
    t1 = t1 / np.sqrt(t1 @ t1)
    t2 = nb_cross(e, t1)
    out = np.empty((3, 2))
    out[:, 0] = t1
    out[:, 1] = t2
    return out


@njit
def nb_rank_split(a, rtol):
    u, s, vt = np.linalg.svd(np.ascontiguousarray(a))
    k = 0
    if s.size > 0 and s[0] > 0.0:
        for i in range(s.size):
            if s[i] > rtol * s[0]:
                k += 1
    return u, s, vt, k


@njit
def nb_orth_basis(a, rtol):
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], 0))
    u, _, _, k = nb_rank_split(a, rtol)
    return np.ascontiguousarray(u[:, :k])


@njit
def nb_null_basis(a, rtol):
    if a.shape[0] == 0:
        return np.eye(a.shape[1])
    _, _, vt, k = nb_rank_split(a, rtol)
    return np.ascontiguousarray(vt[k:].T)


@njit
def nb_min_norm_constrained(E, r, L, c, rtol):
    n = E.shape[1]
    if E.shape[0] == 0:
        up = np.zeros(n)
        N = np.eye(n)
        res = 0.0
    else:
        u_, s, vt, k = nb_rank_split(E, rtol)
        up = np.ascontiguousarray(vt[:k].T) @ (
            (np.ascontiguousarray(u_[:, :k].T) @ r) / s[:k])
        N = np.ascontiguousarray(vt[k:].T)
        res = np.sqrt(np.sum((E @ up - r) ** 2))
    if N.shape[1] == 0:
        return up, res
    A = L @ N
    b = -(L @ up + c)
    ua, sa, vta, ka = nb_rank_split(A, rtol)
    z = np.ascontiguousarray(vta[:ka].T) @ (
        (np.ascontiguousarray(ua[:, :ka].T) @ b) / sa[:ka])
    return up + N @ z, res


@njit
def nb_so3_defect(m):
    d = np.max(np.abs(m.T @ m - np.eye(3)))
    return max(d, abs(np.linalg.det(m) - 1.0))


# ---------------------------------------------------------------- binding

_NAMES = ("hat", "vee", "cross", "exp_so3", "polar", "sphere_frame",
          "orth_basis", "null_basis", "min_norm_constrained", "so3_defect")


def flavour(name, jit=None):
    """Return kernel `name` from the requested flavour (default: active one)."""
    if jit is None:
        jit = JIT_ENABLED
    return globals()[("nb_" if jit else "np_") + name]


hat = flavour("hat")
vee = flavour("vee")
cross = flavour("cross")
exp_so3 = flavour("exp_so3")
polar = flavour("polar")
sphere_frame = flavour("sphere_frame")
orth_basis = flavour("orth_basis")
null_basis = flavour("null_basis")
min_norm_constrained = flavour("min_norm_constrained")
so3_defect = flavour("so3_defect")
