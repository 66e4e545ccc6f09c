"""Built-in acceptance suite.

Ten numbered checks, each returning a Check(number, name, passed, value, tol).
Trajectories are computed once per scenario and cached for the process.
"""
import functools
from dataclasses import dataclass, field

import numpy as np

from . import algebra
from .bundle import atiyah_cotangent, sphere_frame
from .connection import (ConnectionForm, build_gnc, gnc_connection, phi_map,
                         reduced_curvature)
from .fullspace import (FullDynamics, fd_base_derivative, fd_fiber_derivative,
                        full_vector_field, lyapunov_gradient)
from .integrate import (IntegratorConfig, lift_trajectory, max_deviation,
                        project_trajectory, reconstruct_group, simulate_full,
                        simulate_reduced)
from .reduction import (ReducedRate, _Assembly, fd_dch_dx, fd_dh_dmu, fd_dh_dy,
                        solve_reduced_step)
from .scenarios import (LyapunovSpec, ShiftedHamiltonian, Z, hocs_connection,
                        invariance_check, make_scenario)

BALLS = ("ball_hocs", "ball_dalembert")
SEED = 20240611


@dataclass
class Check:
    number: int
    name: str
    passed: bool
    value: float
    tol: float
    skipped: bool = False
    detail: dict = field(default_factory=dict)

    def line(self):
        tag = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        out = f"[{tag}] {self.number:2d} {self.name}: value={self.value:.3e} tol={self.tol:.1e}"
        parts = [f"{k}={v:.2e}" if isinstance(v, float) else f"{k}={v}"
                 for k, v in self.detail.items()]
        return out + (f" ({', '.join(parts)})" if parts else "")


def _check(number, name, value, tol, **detail):
    value = float(value)
    return Check(number, name, bool(value <= tol), value, tol, detail=detail)


def _skip(number, name, tol):
    return Check(number, name, True, 0.0, tol, skipped=True)


def _rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), 1.0))


# ------------------------------------------------------------ cached runs

@functools.lru_cache(maxsize=None)
def scenario(name):
    return make_scenario(name)


@functools.lru_cache(maxsize=None)
def runs(name, T=1.0, dt=1e-3):
    """(full trajectory, reduced trajectory, initial full state) for a scenario."""
    sc = scenario(name)
    s0 = sc.near_top_state(0)
    r0 = atiyah_cotangent(s0, sc.problem.conn)
    cfg = IntegratorConfig(dt=dt, T=T)
    return simulate_full(sc, s0, cfg), simulate_reduced(sc, r0, cfg), s0


def _random_states(sc, n, seed=SEED):
    rng = np.random.default_rng(seed)
    return [sc.initial_state(int(rng.integers(1 << 31)), scale=1.0) for _ in range(n)]


# ------------------------------------------------------------------ checks

def check_algebra(n=1000, seed=SEED):
    rng = np.random.default_rng(seed)
    err = 0.0
    for _ in range(n):
        v, w, mu = rng.normal(size=(3, 3))
        g = algebra.random_rotation(rng)
        err = max(err,
                  np.abs(algebra.vee(algebra.hat(v)) - v).max(),
                  np.abs(algebra.hat(v) @ w - np.cross(v, w)).max(),
                  np.abs(algebra.hat(algebra.adjoint(g, v)) - g @ algebra.hat(v) @ g.T).max(),
                  abs(algebra.ad_star(v, mu) @ w - mu @ algebra.ad(v, w)))
    return _check(1, "algebra identities", err, 1e-12)


def check_connections(n=100):
    sc = scenario("ball_hocs")
    p = sc.params
    zero = ConnectionForm(lambda x, zeta: np.zeros((3, 6)), name="zero-generic")
    gnc_a = gnc_connection(sc.problem.dist, sc.problem.metric)
    gnc_b = gnc_connection(sc.problem.dist, sc.problem.metric)
    closed = hocs_connection(p)
    k = 1.0 / p.r12
    rng = np.random.default_rng(SEED + 1)
    curv = phi0 = forms = 0.0
    for s in _random_states(sc, n):
        x = s.x
        T = sphere_frame(x.e)
        u = np.concatenate((rng.normal(size=3), T @ rng.normal(size=2)))
        v = np.concatenate((rng.normal(size=3), T @ rng.normal(size=2)))
        curv = max(curv, np.abs(reduced_curvature(zero, x, u, v)).max())
        phi0 = max(phi0, np.abs(phi_map(gnc_a, gnc_b, x, u, s)).max())
        de = u[3:]
        Ab = build_gnc(sc.problem.dist, sc.problem.metric, x, s, warn=False).A6
        forms = max(forms,
                    np.abs(Ab @ u - closed.matrix(x) @ u).max(),
                    np.abs(Ab @ u + k * np.cross(x.e, de)).max(),
                    np.abs(phi_map(sc.problem.conn, gnc_a, x, u, s) - k * np.cross(x.e, de)).max())
        sig = atiyah_cotangent(s, gnc_a).sigma
        forms = max(forms, np.abs(sig - (s.sigma + k * np.cross(s.gamma, s.e))).max())
    value = max(curv / 1e-12, phi0 / 1e-14, forms / 1e-12)
    return _check(2, "connection suite", value, 1.0, curvature=curv, phi_same=phi0,
                  closed_forms=forms)


def check_specialization(n=100):
    sc = scenario("ball_hocs")
    p = sc.params
    k = 1.0 / p.r12
    mg = p.m2 * p.g
    rng = np.random.default_rng(SEED + 2)
    err = 0.0
    for s in _random_states(sc, n):
        r = atiyah_cotangent(s, sc.problem.conn)
        a = _Assembly(sc.problem, r)
        u = rng.normal(size=13)
        rate = ReducedRate.from_unknowns(r, u)
        hm, hc = a.horizontal()
        vm, vc = a.vertical()
        e = r.e
        ds = rate.dsigma
        disp = ds - (e @ ds) * e + mg * (Z - (e @ Z) * e) + k * np.cross(rate.dmu, e)
        err = max(err,
                  np.abs(hm @ u + hc - a.hor[3:].T @ disp).max(),
                  np.abs(np.abs(vm @ u + vc) - abs(rate.dmu @ e)).max(),
                  np.abs(a.hor[:3]).max(),
                  np.abs(np.abs(a.ver[:, 0]) - np.abs(e)).max())
    return _check(3, "equation specialization", err, 1e-12)


def check_oracle(names=BALLS):
    devs = {n: max_deviation(project_trajectory(runs(n)[0], scenario(n).problem.conn),
                             runs(n)[1]) for n in names}
    return _check(4, "full vs reduced oracle", max(devs.values()), 1e-6, **devs)


def check_reconstruction():
    sc = scenario("ball_hocs")
    full, red, s0 = runs("ball_hocs")
    C = reconstruct_group(red, s0.C, problem=sc.problem)
    orth = max(algebra.rotation_defect(c) for c in C)
    lifted = lift_trajectory(red, C, sc.problem.conn)
    round_trip = max_deviation(project_trajectory(lifted, sc.problem.conn), red)
    vs_full = float(np.abs(C.reshape(len(C), 9) - full.states[:, 18:27]).max())
    value = max(orth / 1e-9, round_trip / 1e-6, vs_full / 1e-6)
    return _check(5, "reconstruction round trip", value, 1.0, orthonormality=orth,
                  round_trip=round_trip, against_full=vs_full)


def check_constraints():
    full, red, _ = runs("ball_hocs")
    roll = max(np.nanmax(full.column("rolling")), np.nanmax(full.column("rolling_raw")[1:]))
    lyap = np.nanmax(full.column("lyapunov"))
    vert = np.nanmax(red.column("vertical"))
    value = max(roll / 1e-8, lyap / 1e-8, vert / 1e-12)
    return _check(6, "constraint maintenance", value, 1.0, rolling=roll,
                  lyapunov=lyap, vertical=vert)


def check_energy():
    full = runs("ball_dalembert")[0]
    E = full.column("energy")
    return _check(7, "d'Alembert energy conservation", np.abs(E - E[0]).max(), 1e-8)


def check_derivatives(n=100):
    worst = 0.0
    for name in BALLS:
        sc = scenario(name)
        H, h = sc.H, sc.problem.h
        for s in _random_states(sc, n):
            r = atiyah_cotangent(s, sc.problem.conn)
            worst = max(worst,
                        _rel(H.fiber_derivative(s), fd_fiber_derivative(H, s)),
                        _rel(H.base_derivative(s), fd_base_derivative(H, s)),
                        _rel(h.dh_dy(r), fd_dh_dy(h, r)),
                        _rel(h.dh_dmu(r), fd_dh_dmu(h, r)),
                        _rel(h.dch_dx(r), fd_dch_dx(h, r)))
            if sc.lyapunov is not None:
                l = sc.lyapunov
                plain = LyapunovSpec(l.phi, l.v, l.mu_rate)
                worst = max(worst, _rel(lyapunov_gradient(l, s), lyapunov_gradient(plain, s)))
    return _check(8, "derivative cross-checks", worst, 1e-5)


def check_symmetry(names=BALLS, n=50):
    rng = np.random.default_rng(SEED + 3)
    dev = 0.0
    caught = True
    for name in names:
        sc = scenario(name)
        d = sc.dynamics
        broken = FullDynamics(ShiftedHamiltonian(d.H), d.dist, d.constraints, "broken")
        for s in _random_states(sc, n, SEED + 4):
            B = algebra.random_rotation(rng)
            dev = max(dev, invariance_check(sc, B, s))
            caught = caught and invariance_check(broken, B, s) > 1e-8
    value = dev if caught else np.inf
    return _check(9, "symmetry", value, 1e-10, negative_control_detected=caught)


def check_count():
    sc = scenario("ball_hocs")
    s = sc.near_top_state(0)
    _, _, finfo = full_vector_field(sc.dynamics, s, with_info=True)
    _, rinfo = solve_reduced_step(sc.problem, atiyah_cotangent(s, sc.problem.conn),
                                  with_info=True)
    diff = finfo.n_unknowns - rinfo.n_unknowns
    return _check(10, "reduction count", abs(diff - 3), 0.0, full=finfo.n_unknowns,
                  reduced=rinfo.n_unknowns)


CHECKS = [
    (1, "algebra identities", 1e-12, None, check_algebra),
    (2, "connection suite", 1.0, None, check_connections),
    (3, "equation specialization", 1e-12, ("ball_hocs",), check_specialization),
    (4, "full vs reduced oracle", 1e-6, BALLS, check_oracle),
    (5, "reconstruction round trip", 1.0, ("ball_hocs",), check_reconstruction),
    (6, "constraint maintenance", 1.0, ("ball_hocs",), check_constraints),
    (7, "d'Alembert energy conservation", 1e-8, ("ball_dalembert",), check_energy),
    (8, "derivative cross-checks", 1e-5, None, check_derivatives),
    (9, "symmetry", 1e-10, BALLS, check_symmetry),
    (10, "reduction count", 0.0, ("ball_hocs",), check_count),
]


def run_suite(scenario_id=None, numbers=None):
    """Run the checks. With scenario_id, scenario-bound checks that do not
    involve it are skipped and multi-scenario checks are restricted to it."""
    out = []
    for number, name, tol, scen, fn in CHECKS:
        if numbers is not None and number not in numbers:
            continue
        if scenario_id is not None and scen is not None:
            if scenario_id not in scen:
                out.append(_skip(number, name, tol))
                continue
            if len(scen) > 1:
                out.append(fn((scenario_id,)))
                continue
        out.append(fn())
    return out
