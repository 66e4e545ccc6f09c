"""Unreduced oracle on T*Q: the constrained Hamiltonian system with forces in F_V.

The rate of a full state is held in intrinsic form with 16 unknowns

    u = [eta (3), de in the sphere frame (2), xi (3),
         pi' (3), tangential sigma' (2), gamma' (3)]

Base velocities come from the fiber derivative FH. The momentum rates make
the generalized force f = D/Dt(momenta) + BH annihilate C_V, which is the
same as f lying in F_V. They also satisfy the differentiated kinematic
constraints. Remaining freedom goes to the least |f|.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .bundle import FullState, sphere_frame, sphere_geodesic, sphere_transport
from .connection import DROP_TOL, tangent_basis
from .errors import Inconsistent

FD_STEP = 1e-6
SOLVE_RTOL = 1e-10
INCONSISTENT_TOL = 1e-8
N_FULL = 16


class Hamiltonian:
    """H on T*Q. fiber_derivative -> (eta, de, xi); base_derivative ->
    covector (R-part, tangent e-part, C-part), both embedded 9-vectors."""

    def value(self, s):
        raise NotImplementedError

    def fiber_derivative(self, s):
        return fd_fiber_derivative(self, s)

    def base_derivative(self, s):
        return fd_base_derivative(self, s)


def fd_fiber_derivative(H, s, step=FD_STEP):
    out = np.zeros(9)
    T = sphere_frame(s.e)
    for i in range(3):
        d = np.zeros(3)
        d[i] = step
        out[i] = (H.value(s.replace(pi=s.pi + d)) - H.value(s.replace(pi=s.pi - d))) / (2 * step)
        out[6 + i] = (H.value(s.replace(gamma=s.gamma + d))
                      - H.value(s.replace(gamma=s.gamma - d))) / (2 * step)
    for j in range(2):
        d = T[:, j] * step
        out[3:6] += T[:, j] * (H.value(s.replace(sigma=s.sigma + d))
                               - H.value(s.replace(sigma=s.sigma - d))) / (2 * step)
    return out


def fd_base_derivative(H, s, step=FD_STEP):
    """Momenta held parallel: constant components on the SO(3) factors,
    Levi-Civita transport of sigma on the sphere."""
    out = np.zeros(9)
    for i in range(3):
        w = np.zeros(3)
        w[i] = step
        Rp, Rm = K.exp_so3(w) @ s.R, K.exp_so3(-w) @ s.R
        out[i] = (H.value(s.replace(R=Rp)) - H.value(s.replace(R=Rm))) / (2 * step)
        out[6 + i] = (H.value(s.replace(C=K.exp_so3(w) @ s.C))
                      - H.value(s.replace(C=K.exp_so3(-w) @ s.C))) / (2 * step)
    T = sphere_frame(s.e)
    for j in range(2):
        u = T[:, j]
        sp = s.replace(e=sphere_geodesic(s.e, u, step),
                       sigma=sphere_transport(s.e, u, step, s.sigma))
        sm = s.replace(e=sphere_geodesic(s.e, u, -step),
                       sigma=sphere_transport(s.e, u, -step, s.sigma))
        out[3:6] += u * (H.value(sp) - H.value(sm)) / (2 * step)
    return out


def annihilator_basis(generators, ambient=None):
    """Covectors (rows) spanning the annihilator of span(generators).

    ambient: optional n x d orthonormal basis of the space the generators
    live in (e.g. the embedded T_qQ); the result stays inside it.
    """
    g = np.atleast_2d(np.asarray(generators, dtype=float))
    if ambient is None:
        n = g.shape[1] if g.size else 0
        ambient = np.eye(n)
    ambient = np.asarray(ambient, dtype=float)
    if g.size == 0:
        return ambient.T.copy()
    ga = np.ascontiguousarray(g @ ambient)
    null = K.null_basis(ga, DROP_TOL)
    return (ambient @ null).T


@dataclass
class FullDynamics:
    """H, the variational distribution C_V and the kinematic constraints."""
    H: Hamiltonian
    dist: object
    constraints: tuple = ()
    name: str = ""


@dataclass
class FullRate:
    eta: np.ndarray
    de: np.ndarray
    xi: np.ndarray
    dpi: np.ndarray
    dsigma: np.ndarray
    dgamma: np.ndarray

    def flat_derivative(self, s):
        return np.concatenate(((K.hat(self.eta) @ s.R).ravel(), self.dpi, self.de,
                               self.dsigma, (K.hat(self.xi) @ s.C).ravel(),
                               self.dgamma))

    def momentum_rate(self):
        """Embedded rate (eta, de, pi', sigma', gamma') seen by constraints."""
        return np.concatenate((self.eta, self.de, self.dpi, self.dsigma, self.dgamma))

    @classmethod
    def from_unknowns(cls, s, u):
        T = sphere_frame(s.e)
        de = T @ u[3:5]
        dsigma = T @ u[11:13] - (s.sigma @ de) * s.e
        return cls(u[0:3].copy(), de, u[5:8].copy(), u[8:11].copy(), dsigma,
                   u[13:16].copy())


@dataclass
class FullInfo:
    n_unknowns: int
    n_equations: int
    consistency: float
    force: np.ndarray
    force_basis: np.ndarray
    multiplier_residual: float


def _rate_rows(s, T):
    m = np.zeros((15, N_FULL))
    m[0:3, 0:3] = np.eye(3)
    m[3:6, 3:5] = T
    m[6:9, 8:11] = np.eye(3)
    m[9:12, 11:13] = T
    m[9:12, 3:5] = -np.outer(s.e, s.sigma @ T)
    m[12:15, 13:16] = np.eye(3)
    return m


def force_rows(s, H):
    """f = D/Dt(momenta) + BH + torsion term, intrinsic: (8 x 16 rows, constant).

    D/Dt is trivial on the SO(3) factors in right-trivialized form and
    Levi-Civita on the sphere. The trivial connection has torsion
    T(a, b) = a x b, which adds <p, T(FH, .)> = p x FH on both group slots.
    """
    T = sphere_frame(s.e)
    BH = H.base_derivative(s)
    FH = H.fiber_derivative(s)
    m = np.zeros((8, N_FULL))
    m[0:3, 8:11] = np.eye(3)
    m[3:5, 11:13] = np.eye(2)
    m[5:8, 13:16] = np.eye(3)
    c = np.concatenate((BH[0:3] + np.cross(s.pi, FH[0:3]), T.T @ BH[3:6],
                        BH[6:9] + np.cross(s.gamma, FH[6:9])))
    return m, c


def full_vector_field(d, s, zeta=None, with_info=False):
    """Returns (FullRate, multipliers) or, with_info, (rate, multipliers, info).

    multipliers are the coefficients of f on an orthonormal basis of F_V
    (the annihilator of C_V inside T*_qQ, intrinsic coordinates).
    """
    T = sphere_frame(s.e)
    FH = d.H.fiber_derivative(s)
    L, fc = force_rows(s, d.H)
    B = tangent_basis(s.x)

    rows, rhs = [], []
    lift = np.zeros((8, N_FULL))
    lift[0:8, 0:8] = np.eye(8)
    rows.append(lift)
    rhs.append(np.concatenate((FH[0:3], T.T @ FH[3:6], FH[6:9])))

    gens = d.dist.generators(s.x, s if zeta is None else zeta)
    cv = K.orth_basis(np.ascontiguousarray((gens @ B).T), DROP_TOL) if gens.size \
        else np.zeros((8, 0))
    if cv.shape[1]:
        rows.append(cv.T @ L)
        rhs.append(-cv.T @ fc)

    if d.constraints:
        P = _rate_rows(s, T)
        for c in d.constraints:
            k, b = c.rate_rows(s)
            rows.append(k @ P)
            rhs.append(b)

    E = np.vstack(rows)
    r = np.concatenate(rhs)
    u, cons = K.min_norm_constrained(E, r, L, fc, SOLVE_RTOL)
    if cons > INCONSISTENT_TOL:
        raise Inconsistent(f"full system inconsistent (residual {cons:.3e})")
    f = L @ u + fc
    Fb = K.null_basis(np.ascontiguousarray(cv.T), DROP_TOL) if cv.shape[1] \
        else np.eye(8)
    lam = Fb.T @ f
    mres = float(np.linalg.norm(Fb @ lam - f))
    if mres > INCONSISTENT_TOL:
        raise Inconsistent(f"force leaves F_V (residual {mres:.3e})")
    rate = FullRate.from_unknowns(s, u)
    if with_info:
        return rate, lam, FullInfo(N_FULL, E.shape[0], float(cons), f, Fb, mres)
    return rate, lam


# ------------------------------------------------------------------ residuals

def rolling_residual(s, p):
    """sigma/m2 - ((r1/I1) pi + (r2/I2) gamma) x e / (r1 + r2)."""
    w = (p.r1 / p.I1) * s.pi + (p.r2 / p.I2) * s.gamma
    return s.sigma / p.m2 - np.cross(w, s.e) / (p.r1 + p.r2)


def _momenta(s):
    return np.concatenate((s.pi, s.sigma, s.gamma))


def lyapunov_value(spec, s):
    p = _momenta(s)
    return 0.5 * p @ spec.phi(s.R, s.e) @ p + spec.v(s.R, s.e)


def lyapunov_gradient(spec, s, step=FD_STEP):
    """dV at s as a covector on the embedded rate (eta, de, pi', sigma', gamma')."""
    p = _momenta(s)
    out = np.zeros(15)
    out[6:15] = spec.phi(s.R, s.e) @ p
    grad = getattr(spec, "grad_config", None)
    if grad is not None:
        gR, ge = grad(s.R, s.e, p)
        out[0:3] = gR
        out[3:6] = ge - (ge @ s.e) * s.e
        return out
    # momenta fixed in their embedded components while (R, e) move
    Vf = lambda R, e: 0.5 * p @ spec.phi(R, e) @ p + spec.v(R, e)
    for i in range(3):
        w = np.zeros(3)
        w[i] = step
        out[i] = (Vf(K.exp_so3(w) @ s.R, s.e) - Vf(K.exp_so3(-w) @ s.R, s.e)) / (2 * step)
    T = sphere_frame(s.e)
    for j in range(2):
        u = T[:, j]
        out[3:6] += u * (Vf(s.R, sphere_geodesic(s.e, u, step))
                         - Vf(s.R, sphere_geodesic(s.e, u, -step))) / (2 * step)
    return out


def lyapunov_residual(spec, s, s_dot):
    """<dV(s), s_dot> + mu_rate(s); s_dot is a FullRate or an embedded 15-vector."""
    rate = s_dot.momentum_rate() if hasattr(s_dot, "momentum_rate") \
        else np.asarray(s_dot, dtype=float)
    return lyapunov_gradient(spec, s) @ rate + spec.mu_rate(s)


def project_full(s, momenta_projector=None):
    """Restore the invariants of a FullState after a step."""
    from .algebra import orthonormalize
    e = s.e / np.linalg.norm(s.e)
    s = FullState(orthonormalize(s.R), s.pi, e, s.sigma - (s.sigma @ e) * e,
                  orthonormalize(s.C), s.gamma)
    if momenta_projector is not None:
        s = momenta_projector(s)
    return s
