"""Reduced Hamilton-d'Alembert-Poincare equations on T*X x g*.

State ς = (x, y, mu) with x = (R, e), y = (pi, sigma). A candidate derivative
ς' is a ReducedRate. Residuals are affine in ς', so every equation is
assembled once as (rows, constant) over the 13 intrinsic unknowns

    u = [eta (3), de in the sphere frame (2), pi' (3),
         tangential sigma' in the sphere frame (2), mu' (3)]

and the public residual functions just evaluate rows @ u + constant.
The normal part of sigma' is fixed by tangency: sigma'.e = -sigma.e'.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .bundle import (FullState, ReducedState, atiyah_cotangent,
                     atiyah_cotangent_inverse, project_sphere_tangent,
                     sphere_frame, sphere_geodesic, sphere_transport)
from .connection import (base_basis, build_gnc, curvature_covector,
                         reduced_curvature, trivial_connection)
from .errors import DegenerateDistribution, Inconsistent

FD_STEP = 1e-6
SOLVE_RTOL = 1e-10
INCONSISTENT_TOL = 1e-8
N_REDUCED = 13

CASES = ("general", "trivial-A", "trivial-A-and-flat-base")
ACTION_SIGN = {"right": -1.0, "left": 1.0}


@dataclass
class ReducedRate:
    """ς' : eta = R' R^-1, de = e', dpi = pi', dsigma = sigma', dmu = mu'."""
    eta: np.ndarray
    de: np.ndarray
    dpi: np.ndarray
    dsigma: np.ndarray
    dmu: np.ndarray

    @property
    def xdot(self):
        return np.concatenate((self.eta, self.de))

    def flat_derivative(self, r):
        return np.concatenate(((K.hat(self.eta) @ r.R).ravel(), self.dpi,
                               self.de, self.dsigma, self.dmu))

    @classmethod
    def from_unknowns(cls, r, u):
        T = sphere_frame(r.e)
        de = T @ u[3:5]
        dsigma = T @ u[8:10] - (r.sigma @ de) * r.e
        return cls(u[0:3].copy(), de, u[5:8].copy(), dsigma, u[10:13].copy())

    def unknowns(self, r):
        T = sphere_frame(r.e)
        return np.concatenate((self.eta, T.T @ self.de, self.dpi,
                               T.T @ self.dsigma, self.dmu))


@dataclass
class HdpResiduals:
    horizontal: np.ndarray
    vertical: np.ndarray
    kinematic: np.ndarray
    base: np.ndarray

    def max_abs(self):
        parts = [np.abs(p).max() for p in (self.horizontal, self.vertical,
                                            self.kinematic, self.base) if p.size]
        return max(parts) if parts else 0.0


# ------------------------------------------------------------ hamiltonians

def _full_of(r):
    return FullState(r.R, r.pi, r.e, r.sigma, np.eye(3), r.mu)


class ReducedHamiltonian:
    """h on T*X x g*. Subclasses override any derivative they know analytically;
    the defaults are central differences."""

    def value(self, r):
        raise NotImplementedError

    def dh_dy(self, r):
        return fd_dh_dy(self, r)

    def dh_dmu(self, r):
        return fd_dh_dmu(self, r)

    def dch_dx(self, r):
        return fd_dch_dx(self, r)


def fd_dh_dy(h, r, step=FD_STEP):
    g = np.zeros(6)
    for i in range(3):
        d = np.zeros(3)
        d[i] = step
        g[i] = (h.value(r.replace(pi=r.pi + d)) - h.value(r.replace(pi=r.pi - d))) / (2 * step)
    T = sphere_frame(r.e)
    for j in range(2):
        d = T[:, j] * step
        g[3:] += T[:, j] * (h.value(r.replace(sigma=r.sigma + d))
                            - h.value(r.replace(sigma=r.sigma - d))) / (2 * step)
    return g


def fd_dh_dmu(h, r, step=FD_STEP):
    g = np.zeros(3)
    for i in range(3):
        d = np.zeros(3)
        d[i] = step
        g[i] = (h.value(r.replace(mu=r.mu + d)) - h.value(r.replace(mu=r.mu - d))) / (2 * step)
    return g


def moved_base(r, w, t):
    """Move x along (eta, de) = w for time t with y parallel and mu fixed."""
    R = K.exp_so3(np.ascontiguousarray(t * w[:3])) @ r.R
    e = sphere_geodesic(r.e, w[3:], t)
    sigma = sphere_transport(r.e, w[3:], t, r.sigma)
    return r.replace(R=R, e=e, sigma=sigma)


def fd_dch_dx(h, r, step=FD_STEP):
    B = base_basis(r.x)
    vals = np.array([(h.value(moved_base(r, B[:, j], step))
                      - h.value(moved_base(r, B[:, j], -step))) / (2 * step)
                     for j in range(5)])
    return B @ vals


class InducedHamiltonian(ReducedHamiltonian):
    """h = H o (Atiyah map of conn)^-1, evaluated at C = I.

    Fiber derivatives follow from the chain rule; the base derivative is
    exact for the trivial connection and a finite difference otherwise.
    """

    def __init__(self, H, conn=None):
        self.H = H
        self.conn = conn if conn is not None else trivial_connection()

    def full(self, r):
        return atiyah_cotangent_inverse(r, np.eye(3), self.conn)

    def value(self, r):
        return self.H.value(self.full(r))

    def dh_dy(self, r):
        return self.H.fiber_derivative(self.full(r))[:6]

    def dh_dmu(self, r):
        fh = self.H.fiber_derivative(self.full(r))
        if self.conn.is_trivial:
            return fh[6:]
        return fh[6:] + self.conn.matrix(r.x) @ fh[:6]

    def dch_dx(self, r):
        if self.conn.is_trivial:
            return self.H.base_derivative(self.full(r))[:6]
        return fd_dch_dx(self, r)


# ------------------------------------------------------------------ problem

@dataclass
class HdpProblem:
    """Reduced problem data.

    h            ReducedHamiltonian
    conn         descriptive connection A (trivial in the scenarios)
    dist         VariationalDistribution C_V
    metric       9x9 kinetic metric used to build A*
    constraints  kinematic constraints (see scenarios), written on the
                 trivialized momenta (R, pi, e, sigma, gamma)
    """
    h: ReducedHamiltonian
    conn: object
    dist: object
    metric: object
    constraints: tuple = ()
    action_side: str = "right"
    case: str = "general"
    name: str = ""
    nominal_dims: tuple = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}")
        if self.action_side not in ACTION_SIGN:
            raise ValueError(f"unknown action side {self.action_side!r}")
        if self.case != "general" and not self.conn.is_trivial:
            raise ValueError(f"case {self.case!r} needs the trivial connection")

    @property
    def ad_sign(self):
        return ACTION_SIGN[self.action_side]


def covariant_dmu(mu, mu_dot, conn, x, x_dot, action_side="left"):
    """mu' + s ad*_{A(x) x'} mu; s = +1 for a left action, -1 for a right one."""
    if conn.is_trivial:
        return np.asarray(mu_dot, dtype=float).copy()
    v = x_dot.vector() if hasattr(x_dot, "vector") else np.asarray(x_dot, float)
    return mu_dot + ACTION_SIGN[action_side] * np.cross(mu, conn.matrix(x) @ v)


def covariant_dy(dpi, dsigma, e):
    return np.asarray(dpi, dtype=float).copy(), project_sphere_tangent(e, dsigma)


def base_derivative_correction(h, r, conn, dx, action_side="right"):
    """<dh/dx, dx> with mu parallel: <d^c h/dx, dx> + <dh/dmu, ad*_{A dx} mu>
    for a right action (the sign flips for a left action)."""
    v = dx.vector() if hasattr(dx, "vector") else np.asarray(dx, float)
    out = h.dch_dx(r) @ v
    if not conn.is_trivial:
        out += -ACTION_SIGN[action_side] * (h.dh_dmu(r) @ np.cross(r.mu, conn.matrix(r.x) @ v))
    return out


class _Assembly:
    """Everything state-dependent that the residual rows need, computed once."""

    def __init__(self, p, r, zeta=None):
        if zeta is None:
            zeta = atiyah_cotangent_inverse(r, np.eye(3), p.conn)
        self.p, self.r, self.zeta = p, r, zeta
        self.T = sphere_frame(r.e)
        self.gnc = build_gnc(p.dist, p.metric, r.x, zeta, warn=False)
        self.hor, self.ver = self.gnc.hor, self.gnc.ver
        if p.nominal_dims is not None and \
                (self.hor.shape[1], self.ver.shape[1]) != tuple(p.nominal_dims):
            raise DegenerateDistribution(
                f"reduced variation dims {(self.hor.shape[1], self.ver.shape[1])}"
                f" differ from nominal {tuple(p.nominal_dims)}")
        self.A = p.conn.matrix(r.x, zeta)
        self.Ab = self.gnc.A6
        self.dhdy = p.h.dh_dy(r)
        self.dhdmu = p.h.dh_dmu(r)
        self.dchdx = p.h.dch_dx(r)
        self.s = p.ad_sign
        self.adstar = np.cross(r.mu, self.dhdmu)  # ad*_{dh/dmu} mu
        general = p.case == "general" and not p.conn.is_trivial
        self.general = general
        self.curv = curvature_covector(p.conn, r.x, r.mu, self.dhdy, zeta,
                                       p.action_side) if general else np.zeros(6)
        # torsion of the trivial connection on the SO(3) factor of X:
        # dx -> <pi, T(dh/dy, dx)> with T(a, b) = a x b, i.e. the covector pi x dh/dy
        self.tors = np.concatenate((np.cross(r.pi, self.dhdy[:3]), np.zeros(3)))

    # x' in embedded (eta, de) form as rows over u
    def xdot_rows(self):
        m = np.zeros((6, N_REDUCED))
        m[:3, 0:3] = np.eye(3)
        m[3:, 3:5] = self.T
        return m

    def dy_rows(self):
        """Dy/Dt paired with embedded base tangents: rows (6 x 13)."""
        m = np.zeros((6, N_REDUCED))
        m[:3, 5:8] = np.eye(3)
        if self.p.case == "trivial-A-and-flat-base":
            # plain sigma', normal part included
            m[3:, 8:10] = self.T
            m[3:, 3:5] = -np.outer(self.r.e, self.r.sigma @ self.T)
        else:
            m[3:, 8:10] = self.T
        return m

    def E_rows(self):
        """E = Dmu/Dt - s ad*_{dh/dmu} mu with Dmu/Dt = mu' + s ad*_{A x'} mu,
        as (3 x 13 rows, constant)."""
        m = np.zeros((3, N_REDUCED))
        m[:, 10:13] = np.eye(3)
        if self.general:
            m += self.s * K.hat(np.ascontiguousarray(self.r.mu)) @ self.A @ self.xdot_rows()
        return m, -self.s * self.adstar

    def dhdx_covector(self):
        """dh/dx (with mu parallel) as an embedded 6-covector."""
        c = self.dchdx.copy()
        if self.general:
            c += -self.s * self.A.T @ np.cross(self.dhdmu, self.r.mu)
        return c

    def horizontal(self):
        Em, Ec = self.E_rows()
        Dy = self.dy_rows()
        hcov = self.dhdx_covector()
        rows, const = [], []
        for j in range(self.hor.shape[1]):
            dx = self.hor[:, j]
            phi = -self.Ab @ dx
            if not self.p.conn.is_trivial:
                phi = phi + self.A @ dx
            row = dx @ Dy + phi @ Em
            c = hcov @ dx + phi @ Ec + self.curv @ dx + self.tors @ dx
            rows.append(row)
            const.append(c)
        return _stack(rows, const)

    def vertical(self):
        Em, Ec = self.E_rows()
        return _stack([self.ver[:, k] @ Em for k in range(self.ver.shape[1])],
                      [self.ver[:, k] @ Ec for k in range(self.ver.shape[1])])

    def base(self):
        m = self.xdot_rows()
        return m, -self.dhdy

    def base_intrinsic(self):
        m = np.zeros((5, N_REDUCED))
        m[:, 0:5] = np.eye(5)
        c = -np.concatenate((self.dhdy[:3], self.T.T @ self.dhdy[3:]))
        return m, c

    def full_rate_rows(self):
        """Rows (15 x 13) mapping u to the embedded rate of the trivialized
        momenta: (eta, de, pi_full', sigma_full', gamma')."""
        m = np.zeros((15, N_REDUCED))
        m[0:6] = self.xdot_rows()
        m[6:9, 5:8] = np.eye(3)
        m[9:12, 8:10] = self.T
        m[9:12, 3:5] = -np.outer(self.r.e, self.r.sigma @ self.T)
        m[12:15, 10:13] = np.eye(3)
        if not self.p.conn.is_trivial:
            # y_full = y + A^T mu (sigma-part kept tangent)
            m[6:12] += self.A.T @ m[12:15]
            m[6:12] += _dual_rate(self.p.conn, self.r, self.zeta) @ m[0:6]
        return m

    def kinematic(self):
        if not self.p.constraints:
            return np.zeros((0, N_REDUCED)), np.zeros(0)
        z = atiyah_cotangent_inverse(self.r, np.eye(3), self.p.conn)
        P = self.full_rate_rows()
        rows, rhs = [], []
        for c in self.p.constraints:
            k, b = c.rate_rows(z)
            rows.append(k @ P)
            rhs.append(b)
        return np.vstack(rows), -np.concatenate(rhs)

    def force(self):
        """Unreduced constraint force written through the reduced quantities,
        in intrinsic covector coordinates (8 x 13 rows, constant)."""
        Em, Ec = self.E_rows()
        fy_rows = self.dy_rows()
        fy_c = self.dhdx_covector() + self.curv + self.tors
        base_rows = fy_rows + self.A.T @ Em
        base_c = fy_c + self.A.T @ Ec
        Bb = base_basis(self.r.x)
        rows = np.vstack((Bb.T @ base_rows, Em))
        return rows, np.concatenate((Bb.T @ base_c, Ec))


def _stack(rows, const):
    if not rows:
        return np.zeros((0, N_REDUCED)), np.zeros(0)
    return np.vstack(rows), np.asarray(const)


def _dual_rate(conn, r, zeta=None, step=FD_STEP):
    """d/ds of A(x(s))^T mu along base directions: 6 x 6 acting on (eta, de)."""
    Bb = base_basis(r.x)
    cols = []
    for j in range(5):
        rp = moved_base(r, Bb[:, j], step)
        rm = moved_base(r, Bb[:, j], -step)
        dp = conn.matrix(rp.x, zeta).T @ r.mu
        dm = conn.matrix(rm.x, zeta).T @ r.mu
        dp[3:] = project_sphere_tangent(rp.e, dp[3:])
        dm[3:] = project_sphere_tangent(rm.e, dm[3:])
        cols.append((dp - dm) / (2 * step))
    return np.column_stack(cols) @ Bb.T


def _unknowns(r, rate):
    if isinstance(rate, ReducedRate):
        return rate.unknowns(r)
    return np.asarray(rate, dtype=float)


def horizontal_residuals(p, r, rate, zeta=None):
    m, c = _Assembly(p, r, zeta).horizontal()
    return m @ _unknowns(r, rate) + c


def vertical_residuals(p, r, rate, zeta=None):
    m, c = _Assembly(p, r, zeta).vertical()
    return m @ _unknowns(r, rate) + c


def base_equation_residual(p, r, x_dot):
    v = x_dot.vector() if hasattr(x_dot, "vector") else np.asarray(x_dot, float)
    return v - p.h.dh_dy(r)


def kinematic_residuals(p, r, rate, zeta=None):
    m, c = _Assembly(p, r, zeta).kinematic()
    return m @ _unknowns(r, rate) + c


def residuals(p, r, rate, zeta=None):
    a = _Assembly(p, r, zeta)
    u = _unknowns(r, rate)
    out = []
    for m, c in (a.horizontal(), a.vertical(), a.kinematic()):
        out.append(m @ u + c)
    rr = ReducedRate.from_unknowns(r, u)
    return HdpResiduals(out[0], out[1], out[2], rr.xdot - a.dhdy)


@dataclass
class SolveInfo:
    n_unknowns: int
    n_equations: int
    consistency: float
    residual: float
    dims: tuple


def assemble(p, r, zeta=None):
    """(E, rhs, F, c): equality rows E u = rhs and force rows F u + c."""
    a = _Assembly(p, r, zeta)
    blocks = [a.base_intrinsic(), a.horizontal(), a.vertical(), a.kinematic()]
    E = np.vstack([m for m, _ in blocks])
    rhs = -np.concatenate([c for _, c in blocks])
    F, fc = a.force()
    return E, rhs, F, fc, a


def solve_reduced_step(p, r, zeta=None, with_info=False):
    """ς' satisfying the reduced equations; ties broken by the least
    unreduced constraint force (then least |ς'|)."""
    E, rhs, F, fc, a = assemble(p, r, zeta)
    u, cons = K.min_norm_constrained(E, rhs, F, fc, SOLVE_RTOL)
    res = float(np.abs(E @ u - rhs).max()) if E.shape[0] else 0.0
    info = SolveInfo(N_REDUCED, E.shape[0], float(cons), res,
                     (a.hor.shape[1], a.ver.shape[1]))
    if cons > INCONSISTENT_TOL:
        raise Inconsistent(f"reduced system inconsistent (residual {cons:.3e})",
                           diagnostics={"dropped": a.gnc.dropped,
                                        "dims": info.dims})
    rate = ReducedRate.from_unknowns(r, u)
    return (rate, info) if with_info else rate


def reduce_state(s, p):
    return atiyah_cotangent(s, p.conn)
