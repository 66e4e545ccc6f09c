"""Connection forms on the trivial bundle X x SO(3) -> X, X = SO(3) x S^2.

A form is stored through its matrix at x: a 3x6 array acting on the embedded
base tangent (eta_R, de). The de-block is always composed with the tangent
projector at e so normal components never leak in.

Tangent vectors of Q at (x, C) are embedded 9-vectors (eta_R, de, xi) in
right-trivialized form; they do not depend on C.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .bundle import BasePoint, sphere_frame, tangent_projector
from .errors import RankDeficiency, StepFailure

DROP_TOL = 1e-10
CURVATURE_STEP = 1e-5


class ConnectionForm:
    """x -> A(x), a linear map T_x X -> g.

    fn(x, zeta) returns the raw 3x6 matrix; curvature(x, u, v) may be given
    analytically, otherwise reduced_curvature falls back to finite differences.
    """

    def __init__(self, fn=None, is_trivial=False, zeta_dependent=False,
                 curvature=None, name=""):
        if fn is None and not is_trivial:
            raise ValueError("non-trivial connection needs an evaluator")
        self._fn = fn
        self.is_trivial = is_trivial
        self.zeta_dependent = zeta_dependent
        self.curvature = curvature
        self.name = name

    def matrix(self, x, zeta=None):
        if self.is_trivial:
            return np.zeros((3, 6))
        a = np.array(self._fn(x, zeta), dtype=float).reshape(3, 6)
        a[:, 3:] = a[:, 3:] @ tangent_projector(x.e)
        return a

    def __call__(self, x, xdot, zeta=None):
        v = xdot.vector() if hasattr(xdot, "vector") else np.asarray(xdot, float)
        return self.matrix(x, zeta) @ v


def trivial_connection():
    return ConnectionForm(is_trivial=True, name="trivial")


def constant_form(fn, name=""):
    """Connection from fn(x) -> 3x6 with no zeta dependence."""
    return ConnectionForm(lambda x, zeta: fn(x), name=name)


class VariationalDistribution:
    """zeta-dependent spanning set of C_V, as rows (eta_R, de, xi) at (x, C)."""

    def __init__(self, generator, name=""):
        self._gen = generator
        self.name = name

    def generators(self, x, zeta=None):
        g = np.atleast_2d(np.asarray(self._gen(x, zeta), dtype=float))
        if g.size == 0:
            return np.zeros((0, 9))
        return g.reshape(-1, 9)


def tangent_basis(x):
    """9x8 orthonormal basis of the embedded T_qQ (intrinsic coordinates)."""
    b = np.zeros((9, 8))
    b[0:3, 0:3] = np.eye(3)
    b[3:6, 3:5] = sphere_frame(x.e)
    b[6:9, 5:8] = np.eye(3)
    return b


def base_basis(x):
    """6x5 orthonormal basis of the embedded T_xX."""
    return tangent_basis(x)[:6, :5]


def _orth(a):
    return K.orth_basis(np.ascontiguousarray(a, dtype=float), DROP_TOL)


def _orth_abs(a, scale):
    """Like _orth, but directions below DROP_TOL * scale in absolute size are
    dropped too (a relative cut keeps pure rounding noise)."""
    if a.size == 0:
        return np.zeros((a.shape[0], 0))
    u, sv, _ = np.linalg.svd(a, full_matrices=False)
    return u[:, sv > DROP_TOL * scale].copy()


def _complement(sub, whole):
    """Orthonormal basis of the part of span(whole) orthogonal to span(sub)."""
    if sub.shape[1] == 0:
        return _orth(whole)
    rest = whole - sub @ (sub.T @ whole)
    return _orth(rest) if rest.size else rest


def _intersect(a, b):
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.zeros((a.shape[0], 0))
    n = K.null_basis(np.ascontiguousarray(np.hstack((a, -b))), DROP_TOL)
    return _orth(a @ n[:a.shape[1]])


@dataclass
class GncDecomposition:
    """Splitting of T_qQ built from C_V and a metric.

    Bases are columns of embedded 9-vectors, orthonormal for the metric.
    A6 is the 3x6 matrix of the resulting connection at x; hor (6 x k) and
    ver (3 x m) are the reduced variation spaces.
    """
    x: BasePoint
    S: np.ndarray
    T: np.ndarray
    U: np.ndarray
    R: np.ndarray
    H: np.ndarray
    V: np.ndarray
    A6: np.ndarray
    hor: np.ndarray
    ver: np.ndarray
    cv: np.ndarray
    metric: np.ndarray
    dropped: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def dim_cv(self):
        return self.cv.shape[1]


def _metric_at(metric, x):
    m = metric(x) if callable(metric) else metric
    return np.asarray(m, dtype=float).reshape(9, 9)


def build_gnc(dist, metric, x, zeta=None, warn=True):
    """Generalized nonholonomic splitting at x for the distribution dist.

    metric: 9x9 symmetric positive-definite array (or callable of x) on the
    embedded tangent space; only its restriction to T_qQ matters.
    """
    B = tangent_basis(x)
    M = _metric_at(metric, x)
    G = B.T @ M @ B
    G = 0.5 * (G + G.T)
    L = np.linalg.cholesky(G)
    Lt = L.T
    to_z = lambda emb: Lt @ (B.T @ emb)  # embedded -> metric-orthonormal coords
    to_emb = lambda z: B @ np.linalg.solve(Lt, z)

    gens = dist.generators(x, zeta)
    cv_w = B.T @ gens.T
    Qc = _orth(Lt @ cv_w)
    dropped = gens.shape[0] - Qc.shape[1]
    if dropped and warn:
        warnings.warn(f"{dropped} dependent generator(s) dropped", RankDeficiency)
    vert = np.zeros((9, 3))
    vert[6:9] = np.eye(3)
    Vz_raw = to_z(vert)
    Qv = _orth(Vz_raw)
    Sz = _intersect(Qc, Qv)
    Tz = _complement(Sz, Qc)
    Uz = _complement(Sz, Qv)
    span = _orth(np.hstack((Qc, Qv)))
    Rz = K.null_basis(np.ascontiguousarray(span.T), DROP_TOL) if span.shape[1] < 8 \
        else np.zeros((8, 0))
    Hz = np.hstack((Rz, Tz))
    if Hz.shape[1] + Qv.shape[1] != 8:
        raise StepFailure("horizontal and vertical spaces do not span T_qQ")

    # A6: solve (eta, de, 0) = h + (0, 0, xi) with h in H
    sys = np.hstack((Hz, Vz_raw))
    rhs = Lt[:, :5]
    coef = np.linalg.solve(sys, rhs)
    a5 = coef[Hz.shape[1]:]
    Tf = B[3:6, 3:5]
    A6 = np.hstack((a5[:, :3], a5[:, 3:] @ Tf.T))

    scale = max(np.abs(cv_w).max() if cv_w.size else 0.0, 1.0)
    hor5 = _orth_abs(cv_w[:5], scale)
    hor = B[:6, :5] @ hor5
    a_bullet = a5 @ cv_w[:5] + cv_w[5:]
    ver = _orth_abs(a_bullet, scale)
    if hor.shape[1] + ver.shape[1] != Qc.shape[1]:
        raise StepFailure("reduced variation spaces do not add up to C_V")

    emb = lambda z: to_emb(z) if z.shape[1] else np.zeros((9, 0))
    return GncDecomposition(
        x=x, S=emb(Sz), T=emb(Tz), U=emb(Uz), R=emb(Rz), H=emb(Hz),
        V=emb(Qv), A6=A6, hor=hor, ver=ver, cv=emb(Qc), metric=M,
        dropped=dropped)


def gnc_connection(dist, metric, name="gnc"):
    """The (possibly zeta-dependent) connection A* as a ConnectionForm."""
    return ConnectionForm(lambda x, zeta: build_gnc(dist, metric, x, zeta, warn=False).A6,
                          zeta_dependent=True, name=name)


def decompose_reduced_variations(gnc):
    """(hor, ver): bases of pi_*(C_V) (6 x k, embedded) and a*(C_V) (3 x m)."""
    return gnc.hor, gnc.ver


def phi_map(connA, connGnc, x, dx, zeta=None):
    """g-part of alpha_A o (alpha_A*)^-1 on a purely horizontal input dx."""
    v = dx.vector() if hasattr(dx, "vector") else np.asarray(dx, float)
    out = -connGnc.matrix(x, zeta) @ v
    if not connA.is_trivial:
        out = out + connA.matrix(x, zeta) @ v
    return out


# ------------------------------------------------------------------ curvature

def left_jacobian(th):
    t = np.linalg.norm(th)
    k = K.hat(np.ascontiguousarray(th, dtype=float))
    if t < 1e-6:
        return np.eye(3) + 0.5 * k + (k @ k) / 6.0
    return (np.eye(3) + (1 - np.cos(t)) / t ** 2 * k
            + (t - np.sin(t)) / t ** 3 * (k @ k))


def _chart(x, q):
    """Chart around x: R = exp(theta^) R0, e = normalize(e0 + T phi).

    Returns the point and the 6x5 matrix mapping chart velocities to the
    embedded tangent (eta_R, de).
    """
    T = sphere_frame(x.e)
    th, ph = q[:3], q[3:]
    R = K.exp_so3(np.ascontiguousarray(th)) @ x.R
    w = x.e + T @ ph
    n = np.linalg.norm(w)
    e = w / n
    if abs(e @ e - 1.0) > 1e-9:
        raise StepFailure("chart left the sphere")
    J = np.zeros((6, 5))
    J[:3, :3] = left_jacobian(th)
    J[3:, 3:] = (np.eye(3) - np.outer(e, e)) @ T / n
    return BasePoint(R, e), J, T


def exterior_derivative(conn, x, zeta=None, step=CURVATURE_STEP):
    """dA at x as a 3x5x5 array in chart coordinates (eta, T^T de)."""
    h = step
    q0 = np.zeros(5)
    om = np.zeros((5, 3, 5))  # om[i] = d/dq_i of (A(chi(q)) J(q))
    for i in range(5):
        dq = np.zeros(5)
        dq[i] = h
        xp, Jp, _ = _chart(x, q0 + dq)
        xm, Jm, _ = _chart(x, q0 - dq)
        om[i] = (conn.matrix(xp, zeta) @ Jp - conn.matrix(xm, zeta) @ Jm) / (2 * h)
    d = np.zeros((3, 5, 5))
    for i in range(5):
        for j in range(5):
            d[:, i, j] = om[i][:, j] - om[j][:, i]
    return d


def reduced_curvature(conn, x, u, v, zeta=None, action_side="right"):
    """dA(u, v) + [A u, A v] for base tangents u, v at x (right action);
    the bracket enters with a minus sign for a left action."""
    if conn.is_trivial:
        return np.zeros(3)
    uv = u.vector() if hasattr(u, "vector") else np.asarray(u, float)
    vv = v.vector() if hasattr(v, "vector") else np.asarray(v, float)
    if conn.curvature is not None:
        return np.asarray(conn.curvature(x, uv, vv), dtype=float)
    d = exterior_derivative(conn, x, zeta)
    T = sphere_frame(x.e)
    uq = np.concatenate((uv[:3], T.T @ uv[3:]))
    vq = np.concatenate((vv[:3], T.T @ vv[3:]))
    a = conn.matrix(x, zeta)
    sign = 1.0 if action_side == "right" else -1.0
    return np.einsum("kij,i,j->k", d, uq, vq) + sign * np.cross(a @ uv, a @ vv)


def curvature_covector(conn, x, mu, u, zeta=None, action_side="right"):
    """The covector dx -> <mu, B(u, dx)> on T_xX, as an embedded 6-vector."""
    if conn.is_trivial:
        return np.zeros(6)
    Bb = base_basis(x)
    vals = np.array([mu @ reduced_curvature(conn, x, u, Bb[:, j], zeta, action_side)
                     for j in range(5)])
    return Bb @ vals
