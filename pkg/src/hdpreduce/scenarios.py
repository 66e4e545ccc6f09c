"""Concrete systems: a small ball B2 rolling on a big ball B1.

State (R, pi, e, sigma, C, gamma): R and C are the attitudes of the big and
small ball, e the unit contact direction seen from the centre of B1, and
pi, sigma, gamma the conjugate momenta. H is kinetic energy plus gravity on
the small ball.

Three systems share this H:
  ball_hocs          rolling + Lyapunov torque constraint, C_V = {eta = 0, de = r12 xi x e}
  ball_dalembert     rolling with C_V equal to the rolling distribution
  free               no constraints
"""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .algebra import random_rotation
from .bundle import (FullState, ReducedState, atiyah_cotangent,
                     atiyah_cotangent_inverse, random_unit)
from .connection import (ConnectionForm, VariationalDistribution, sphere_frame,
                         trivial_connection)
from .fullspace import (FullDynamics, Hamiltonian, lyapunov_gradient,
                        lyapunov_residual, project_full, rolling_residual)
from .reduction import HdpProblem, InducedHamiltonian

Z = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class BallParams:
    r1: float = 1.0
    r2: float = 0.5
    I1: float = 1.0
    I2: float = 0.1
    m2: float = 1.0
    g: float = 9.81

    def __post_init__(self):
        if not (self.r1 > self.r2 > 0):
            raise ValueError("need r1 > r2 > 0")
        if min(self.I1, self.I2, self.m2) <= 0:
            raise ValueError("inertias and mass must be positive")
        if self.g < 0:
            raise ValueError("g must be non-negative")

    @property
    def r12(self):
        return self.r2 / (self.r1 + self.r2)

    def metric(self):
        return np.diag([self.I1] * 3 + [self.m2] * 3 + [self.I2] * 3)


@dataclass
class LyapunovSpec:
    """V = 1/2 p^T phi(R, e) p + v(R, e) with p = (pi, sigma, gamma) embedded.

    phi returns a 9x9 matrix; only its restriction to sigma tangent to the
    sphere matters. grad_config(R, e, p) -> (dV/d eta_R, dV/de) is optional;
    without it the configuration gradient is a finite difference.
    """
    phi: object
    v: object
    mu_rate: object
    grad_config: object = None


def default_lyapunov(p, c=0.1):
    I9 = np.eye(9)
    mg = p.m2 * p.g
    return LyapunovSpec(
        phi=lambda R, e: I9,
        v=lambda R, e: mg * (1.0 - e @ Z),
        mu_rate=lambda s: c * (s.pi @ s.pi + s.sigma @ s.sigma + s.gamma @ s.gamma),
        grad_config=lambda R, e, q: (np.zeros(3), -mg * Z),
    )


class BallHamiltonian(Hamiltonian):
    def __init__(self, p):
        self.p = p

    def value(self, s):
        p = self.p
        return (s.pi @ s.pi / (2 * p.I1) + s.sigma @ s.sigma / (2 * p.m2)
                + s.gamma @ s.gamma / (2 * p.I2) + p.m2 * p.g * (s.e @ Z))

    def fiber_derivative(self, s):
        p = self.p
        return np.concatenate((s.pi / p.I1, s.sigma / p.m2, s.gamma / p.I2))

    def base_derivative(self, s):
        mg = self.p.m2 * self.p.g
        return np.concatenate((np.zeros(3), mg * (Z - (s.e @ Z) * s.e), np.zeros(3)))


def ball_hamiltonian(p, s):
    return BallHamiltonian(p).value(s)


class RollingConstraint:
    """No slip at the contact point; differentiated once for the solve."""
    order = 1

    def __init__(self, p):
        self.p = p

    def residual(self, s):
        return rolling_residual(s, self.p)

    def rate_rows(self, s):
        p = self.p
        k = 1.0 / (p.r1 + p.r2)
        w = (p.r1 / p.I1) * s.pi + (p.r2 / p.I2) * s.gamma
        he = np.array([[0, -s.e[2], s.e[1]], [s.e[2], 0, -s.e[0]], [-s.e[1], s.e[0], 0]])
        hw = np.array([[0, -w[2], w[1]], [w[2], 0, -w[0]], [-w[1], w[0], 0]])
        K3 = np.zeros((3, 15))
        K3[:, 3:6] = -k * hw
        K3[:, 6:9] = k * (p.r1 / p.I1) * he
        K3[:, 9:12] = np.eye(3) / p.m2
        K3[:, 12:15] = k * (p.r2 / p.I2) * he
        T = sphere_frame(s.e)
        return T.T @ K3, np.zeros(2)

    def project(self, s):
        p = self.p
        w = (p.r1 / p.I1) * s.pi + (p.r2 / p.I2) * s.gamma
        return s.replace(sigma=p.m2 * np.cross(w, s.e) / (p.r1 + p.r2))


class LyapunovConstraint:
    """<dV, Gamma'> = -mu_rate, a condition on the rate only."""
    order = 2

    def __init__(self, spec):
        self.spec = spec

    def residual(self, s, s_dot):
        return np.array([lyapunov_residual(self.spec, s, s_dot)])

    def rate_rows(self, s):
        return lyapunov_gradient(self.spec, s)[None, :], np.array([-self.spec.mu_rate(s)])


def hocs_distribution(p):
    def gen(x, zeta):
        out = np.zeros((3, 9))
        for i in range(3):
            xi = np.eye(3)[i]
            out[i, 3:6] = p.r12 * np.cross(xi, x.e)
            out[i, 6:9] = xi
        return out
    return VariationalDistribution(gen, "hocs")


def rolling_distribution(p):
    """C_K^Rol: eta, xi free and e' = (r1 eta + r2 xi) x e / (r1 + r2)."""
    def gen(x, zeta):
        out = np.zeros((6, 9))
        k = 1.0 / (p.r1 + p.r2)
        for i in range(3):
            v = np.eye(3)[i]
            out[i, 0:3] = v
            out[i, 3:6] = k * p.r1 * np.cross(v, x.e)
            out[3 + i, 3:6] = k * p.r2 * np.cross(v, x.e)
            out[3 + i, 6:9] = v
        return out
    return VariationalDistribution(gen, "rolling")


def full_distribution():
    def gen(x, zeta):
        out = np.zeros((8, 9))
        out[0:3, 0:3] = np.eye(3)
        out[3:5, 3:6] = sphere_frame(x.e).T
        out[5:8, 6:9] = np.eye(3)
        return out
    return VariationalDistribution(gen, "all")


def hocs_connection(p):
    """Closed form A*(R, e)(eta, de) = -(1/r12) e x de."""
    k = 1.0 / p.r12

    def fn(x, zeta):
        a = np.zeros((3, 6))
        e = x.e
        a[:, 3:] = -k * np.array([[0, -e[2], e[1]], [e[2], 0, -e[0]], [-e[1], e[0], 0]])
        return a
    return ConnectionForm(fn, name="hocs-closed-form")


def dalembert_connection(p):
    """Closed form A*(R, e)(eta, de) = -(1/r12) e x de + (r1/r2) (eta - (e.eta) e)."""
    k = 1.0 / p.r12

    def fn(x, zeta):
        e = x.e
        a = np.zeros((3, 6))
        a[:, :3] = (p.r1 / p.r2) * (np.eye(3) - np.outer(e, e))
        a[:, 3:] = -k * np.array([[0, -e[2], e[1]], [e[2], 0, -e[0]], [-e[1], e[0], 0]])
        return a
    return ConnectionForm(fn, name="dalembert-closed-form")


@dataclass
class Scenario:
    name: str
    params: BallParams
    problem: HdpProblem
    dynamics: FullDynamics
    lyapunov: LyapunovSpec = None
    rolling: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def H(self):
        return self.dynamics.H

    def project_full(self, s):
        if self.rolling:
            return project_full(s, RollingConstraint(self.params).project)
        return project_full(s)

    def project_reduced(self, r):
        conn = self.problem.conn
        s = self.project_full(atiyah_cotangent_inverse(r, np.eye(3), conn))
        return atiyah_cotangent(s, conn)

    def initial_state(self, seed=0, scale=0.5, tilt=None, spin=0.0):
        """Random full state on the constraint manifold.

        tilt: if given, e is drawn within about tilt radians of the top;
        spin adds spin * e to pi (big ball spinning about the contact axis).
        """
        rng = np.random.default_rng(seed)
        if tilt is None:
            e = random_unit(rng) + 2.0 * Z
        else:
            e = Z + tilt * rng.normal(size=3)
        e = e / np.linalg.norm(e)
        pi = scale * rng.normal(size=3) + spin * e
        s = FullState(random_rotation(rng), pi, e, np.zeros(3),
                      random_rotation(rng), 0.1 * scale * rng.normal(size=3))
        if self.rolling:
            s = RollingConstraint(self.params).project(s)
        else:
            t = sphere_frame(e) @ (scale * rng.normal(size=2))
            s = s.replace(sigma=t)
        return s

    def near_top_state(self, seed=0):
        """Start used by the acceptance runs: close to the top with a spinning
        big ball, which keeps the Lyapunov row of the solve well conditioned."""
        return self.initial_state(seed, scale=0.2, tilt=0.02, spin=4.0)

    def reduced_initial_state(self, seed=0, scale=0.5, **kw):
        return atiyah_cotangent(self.initial_state(seed, scale, **kw), self.problem.conn)


def _problem(p, H, dist, constraints, dims, action_side, case, name):
    conn = trivial_connection()
    return HdpProblem(InducedHamiltonian(H, conn), conn, dist, p.metric(),
                      tuple(constraints), action_side=action_side, case=case,
                      name=name, nominal_dims=dims)


def ball_hocs(p=None, l=None, action_side="right", case="trivial-A"):
    p = p or BallParams()
    l = l or default_lyapunov(p)
    H = BallHamiltonian(p)
    dist = hocs_distribution(p)
    cons = (RollingConstraint(p), LyapunovConstraint(l))
    prob = _problem(p, H, dist, cons, (2, 1), action_side, case, "ball_hocs")
    return Scenario("ball_hocs", p, prob, FullDynamics(H, dist, cons, "ball_hocs"), l)


def ball_gnhs_dalembert(p=None, action_side="right", case="trivial-A"):
    p = p or BallParams()
    H = BallHamiltonian(p)
    dist = rolling_distribution(p)
    cons = (RollingConstraint(p),)
    prob = _problem(p, H, dist, cons, (5, 1), action_side, case, "ball_dalembert")
    return Scenario("ball_dalembert", p, prob,
                    FullDynamics(H, dist, cons, "ball_dalembert"))


def free(p=None, action_side="right", case="trivial-A"):
    p = p or BallParams()
    H = BallHamiltonian(p)
    dist = full_distribution()
    prob = _problem(p, H, dist, (), (5, 3), action_side, case, "free")
    return Scenario("free", p, prob, FullDynamics(H, dist, (), "free"), rolling=False)


SCENARIOS = {"ball_hocs": ball_hocs, "ball_dalembert": ball_gnhs_dalembert, "free": free}


def make_scenario(name, params=None, lyapunov=None, action_side="right",
                  case="trivial-A"):
    if name not in SCENARIOS:
        raise KeyError(name)
    if name == "ball_hocs":
        return ball_hocs(params, lyapunov, action_side, case)
    return SCENARIOS[name](params, action_side, case)


class ShiftedHamiltonian(Hamiltonian):
    """H plus a C-dependent term; breaks the symmetry (negative control)."""

    def __init__(self, H, eps=1e-3):
        self.H, self.eps = H, eps

    def value(self, s):
        return self.H.value(s) + self.eps * s.C[0, 0]


def invariance_check(system, B, s):
    """Largest change of H, kinematic data and C_V under C -> CB."""
    d = system.dynamics if hasattr(system, "dynamics") else system
    t = s.replace(C=s.C @ B)
    dev = abs(d.H.value(t) - d.H.value(s))
    for c in d.constraints:
        if c.order == 1:
            dev = max(dev, np.abs(c.residual(t) - c.residual(s)).max())
        k1, b1 = c.rate_rows(s)
        k2, b2 = c.rate_rows(t)
        dev = max(dev, np.abs(k1 - k2).max(), np.abs(b1 - b2).max())
    g1 = d.dist.generators(s.x, s)
    g2 = d.dist.generators(t.x, t)
    if not np.array_equal(g1, g2):
        dev = max(dev, _span_gap(g1, g2), _span_gap(g2, g1))
    return float(dev)


def _span_gap(a, b):
    """How far rows of a stick out of span(rows of b)."""
    if a.size == 0:
        return 0.0
    q = K.orth_basis(np.ascontiguousarray(b.T), 1e-10)
    return float(np.abs(a.T - q @ (q.T @ a.T)).max())
