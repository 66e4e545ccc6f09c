"""Trivialized state spaces on Q = SO(3) x S^2 x SO(3) with G = SO(3) acting on C.

Everything on the sphere is embedded in R^3. Group velocities are
right-trivialized, xi^ = C' C^-1, so the lifted action C -> CB leaves all
momentum components untouched.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import ProjectionFailure

UNIT_TOL = 1e-9
TANGENCY_REPAIR_TOL = 1e-6

FULL_SIZE = 30
REDUCED_SIZE = 21


def _v(a):
    return np.asarray(a, dtype=float).reshape(3)


def _m(a):
    return np.asarray(a, dtype=float).reshape(3, 3)


@dataclass(frozen=True, eq=False)
class BasePoint:
    R: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "R", _m(self.R))
        object.__setattr__(self, "e", _v(self.e))


@dataclass(frozen=True, eq=False)
class BaseTangent:
    x: BasePoint
    eta_R: np.ndarray
    de: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eta_R", _v(self.eta_R))
        object.__setattr__(self, "de", _v(self.de))

    def vector(self):
        return np.concatenate((self.eta_R, self.de))


@dataclass(frozen=True, eq=False)
class FullState:
    R: np.ndarray
    pi: np.ndarray
    e: np.ndarray
    sigma: np.ndarray
    C: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        for k in ("pi", "e", "sigma", "gamma"):
            object.__setattr__(self, k, _v(getattr(self, k)))
        for k in ("R", "C"):
            object.__setattr__(self, k, _m(getattr(self, k)))

    @property
    def x(self):
        return BasePoint(self.R, self.e)

    def flat(self):
        return np.concatenate((self.R.ravel(), self.pi, self.e, self.sigma,
                               self.C.ravel(), self.gamma))

    @classmethod
    def from_flat(cls, y):
        y = np.asarray(y, dtype=float)
        return cls(y[0:9].reshape(3, 3), y[9:12], y[12:15], y[15:18],
                   y[18:27].reshape(3, 3), y[27:30])

    def replace(self, **kw):
        d = dict(R=self.R, pi=self.pi, e=self.e, sigma=self.sigma,
                 C=self.C, gamma=self.gamma)
        d.update(kw)
        return FullState(**d)


@dataclass(frozen=True, eq=False)
class ReducedState:
    """(x, y, mu) with x = (R, e), y = (pi, sigma)."""
    R: np.ndarray
    pi: np.ndarray
    e: np.ndarray
    sigma: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        for k in ("pi", "e", "sigma", "mu"):
            object.__setattr__(self, k, _v(getattr(self, k)))
        object.__setattr__(self, "R", _m(self.R))

    @property
    def x(self):
        return BasePoint(self.R, self.e)

    @property
    def y(self):
        return self.pi, self.sigma

    def flat(self):
        return np.concatenate((self.R.ravel(), self.pi, self.e, self.sigma, self.mu))

    @classmethod
    def from_flat(cls, y):
        y = np.asarray(y, dtype=float)
        return cls(y[0:9].reshape(3, 3), y[9:12], y[12:15], y[15:18], y[18:21])

    def replace(self, **kw):
        d = dict(R=self.R, pi=self.pi, e=self.e, sigma=self.sigma, mu=self.mu)
        d.update(kw)
        return ReducedState(**d)


def check_state(s, tol=UNIT_TOL):
    """Raise ValueError unless s satisfies its type invariants."""
    from .algebra import rotation_defect
    if abs(np.linalg.norm(s.e) - 1.0) > tol:
        raise ValueError("e is not a unit vector")
    if abs(s.sigma @ s.e) > tol:
        raise ValueError("sigma is not tangent to the sphere at e")
    mats = [s.R] + ([s.C] if isinstance(s, FullState) else [])
    for m in mats:
        if rotation_defect(m) > tol:
            raise ValueError("rotation invariant violated")
    return s


def project_sphere_tangent(e, v):
    e = _v(e)
    v = _v(v)
    return v - (e @ v) * e


def tangent_projector(e):
    e = _v(e)
    return np.eye(3) - np.outer(e, e)


def sphere_frame(e):
    """Orthonormal 3x2 basis of the tangent plane at e."""
    return K.sphere_frame(np.ascontiguousarray(e, dtype=float))


def sphere_geodesic(e, u, t):
    """Point at time t on the great circle through e with initial velocity u."""
    n = np.linalg.norm(u)
    if n == 0.0:
        return _v(e).copy()
    return np.cos(n * t) * e + np.sin(n * t) * (u / n)


def sphere_transport(e, u, t, w):
    """Levi-Civita transport of tangent w along sphere_geodesic(e, u, .) to time t."""
    n = np.linalg.norm(u)
    if n == 0.0:
        return _v(w).copy()
    a = u / n
    wa = w @ a
    rest = w - wa * a
    return rest + wa * (np.cos(n * t) * a - np.sin(n * t) * e)


def momentum_map(s):
    return s.C.T @ s.gamma


def lifted_action(s, B):
    """Cotangent lift of C -> CB; trivialized momenta are unchanged."""
    return s.replace(C=s.C @ _m(B))


def atiyah_cotangent(s, conn):
    """T*Q -> T*X x g* for the connection conn (mu is the spatial momentum)."""
    mu = s.gamma
    pi, sigma = s.pi, s.sigma
    if not conn.is_trivial:
        a = conn.matrix(s.x)
        dual = a.T @ mu
        pi = pi - dual[:3]
        sigma = sigma - dual[3:]
    if abs(sigma @ s.e) > TANGENCY_REPAIR_TOL:
        raise ProjectionFailure(f"sigma-slot normal component {sigma @ s.e:.3e}")
    return ReducedState(s.R, pi, s.e, project_sphere_tangent(s.e, sigma), mu)


def atiyah_cotangent_inverse(r, C, conn):
    pi, sigma = r.pi, r.sigma
    if not conn.is_trivial:
        dual = conn.matrix(r.x).T @ r.mu
        pi = pi + dual[:3]
        sigma = project_sphere_tangent(r.e, sigma + dual[3:])
    return FullState(r.R, pi, r.e, sigma, C, r.mu)


def atiyah_forward(x, h, xdot, hdot_body, conn):
    """(xdot, A(x) xdot + hdot) with hdot the trivialized group velocity."""
    hdot_body = _v(hdot_body)
    if conn.is_trivial:
        return xdot, hdot_body.copy()
    return xdot, conn.matrix(x) @ xdot.vector() + hdot_body


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)
