"""Fixed-step time stepping with projection, and group reconstruction.

States are stepped as flat ambient vectors (FullState: 30, ReducedState: 21,
plain arrays as they are). Stage points are pulled back onto the manifold
before the field is evaluated, the accepted point is projected after the step.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import _kernels as K
from .bundle import FullState, ReducedState, atiyah_cotangent, atiyah_cotangent_inverse
from .errors import ConfigError, DriftAlarm, HdpError

METHODS = ("rk4", "euler")
RECON_REPAIR_TOL = 1e-6


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    T: float = 1.0
    method: str = "rk4"
    project: bool = True
    drift_alarm: float = 1e-6

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.T < self.dt * (1 - 1e-12):
            raise ConfigError("horizon T must be at least dt")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if not self.drift_alarm > 0:
            raise ConfigError("drift_alarm must be positive")

    @property
    def n_steps(self):
        return int(round(self.T / self.dt))


@dataclass
class Trajectory:
    """times (n,), states (n, d) flat rows, one diagnostics dict per row."""
    kind: str
    times: np.ndarray
    states: np.ndarray
    diagnostics: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def state(self, i):
        return _unflatten(self.kind, self.states[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self.times[i], self.state(i)

    @property
    def final(self):
        return self.state(-1)

    def column(self, key):
        return np.array([d.get(key, np.nan) for d in self.diagnostics])


def _kind(s):
    if isinstance(s, FullState):
        return "full"
    if isinstance(s, ReducedState):
        return "reduced"
    return "array"


def _flatten(s):
    if isinstance(s, (FullState, ReducedState)):
        return s.flat()
    return np.asarray(s, dtype=float).copy()


def _unflatten(kind, y):
    if kind == "full":
        return FullState.from_flat(y)
    if kind == "reduced":
        return ReducedState.from_flat(y)
    return np.array(y, dtype=float)


def retract(s):
    """Nearest point satisfying the type invariants (rotations, unit e,
    tangent sigma). Used on RK stage points."""
    if isinstance(s, FullState):
        e = s.e / np.linalg.norm(s.e)
        return FullState(K.polar(s.R), s.pi, e, s.sigma - (s.sigma @ e) * e,
                         K.polar(s.C), s.gamma)
    if isinstance(s, ReducedState):
        e = s.e / np.linalg.norm(s.e)
        return ReducedState(K.polar(s.R), s.pi, e, s.sigma - (s.sigma @ e) * e, s.mu)
    return s


def _derivative(rate, s):
    if hasattr(rate, "flat_derivative"):
        return rate.flat_derivative(s)
    return np.asarray(rate, dtype=float)


def integrate(field, s0, cfg=None, project=None, diagnose=None, stage_retract=retract,
              raw_diagnose=None):
    """Integrate field from s0 over [0, cfg.T].

    field(s) returns a rate object with flat_derivative(s) or a flat array.
    project(s) restores invariants after each step (skipped if cfg.project
    is off); its displacement is checked against cfg.drift_alarm.
    diagnose(s, rate) returns a dict recorded for every stored state;
    raw_diagnose(s) does the same for the step result before projection.

    On DriftAlarm or any solver error the exception carries the partial
    trajectory as .trajectory.
    """
    cfg = cfg or IntegratorConfig()
    kind = _kind(s0)
    n = cfg.n_steps
    dt = cfg.dt
    y = _flatten(s0)
    times = [0.0]
    rows = [y.copy()]
    diags = []
    s = s0
    ev = lambda st: _derivative(field(st), st)

    def record(st, rate, extra):
        d = dict(extra)
        if diagnose is not None:
            d.update(diagnose(st, rate))
        diags.append(d)

    def partial():
        m = len(diags)
        return Trajectory(kind, np.array(times[:m]), np.array(rows[:m]), list(diags))

    stage = lambda z: stage_retract(_unflatten(kind, z)) if stage_retract else _unflatten(kind, z)
    try:
        rate0 = field(s)
        record(s, rate0, {"drift": 0.0})
        for i in range(n):
            k1 = _derivative(rate0, s)
            if cfg.method == "rk4":
                k2 = ev(stage(y + 0.5 * dt * k1))
                k3 = ev(stage(y + 0.5 * dt * k2))
                k4 = ev(stage(y + dt * k3))
                yn = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            else:
                yn = y + dt * k1
            sn = _unflatten(kind, yn)
            raw = raw_diagnose(sn) if raw_diagnose is not None else {}
            drift = 0.0
            if cfg.project and project is not None:
                sp = project(sn)
                yp = _flatten(sp)
                drift = float(np.abs(yp - yn).max())
                sn, yn = sp, yp
            times.append((i + 1) * dt)
            rows.append(yn.copy())
            if drift > cfg.drift_alarm:
                diags.append({"drift": drift})
                raise DriftAlarm(f"projection moved the state by {drift:.3e} at "
                                 f"t={(i + 1) * dt:.6g}")
            y, s = yn, sn
            rate0 = field(s)
            record(s, rate0, dict(raw, drift=drift))
    except HdpError as exc:
        exc.trajectory = partial()
        raise
    return Trajectory(kind, np.array(times), np.array(rows), diags)


# -------------------------------------------------------------- reconstruction

def group_velocity(p, r, rate=None):
    """Right-trivialized C' C^-1 = dh/dmu - A(x) x' along a reduced state."""
    xi = p.h.dh_dmu(r)
    if not p.conn.is_trivial:
        xdot = p.h.dh_dy(r) if rate is None else rate.xdot
        xi = xi - p.conn.matrix(r.x) @ xdot
    return xi


def reconstruct_group(traj, h0, conn=None, h=None, problem=None, tol=RECON_REPAIR_TOL):
    """Group path C(t) over a reduced trajectory.

    Either pass problem (an HdpProblem) or conn together with h. The group
    velocity is interpolated with a cubic spline and stepped by the
    fourth-order Magnus increment exp(Omega) C at every sample interval.
    Returns an (n, 3, 3) array.
    """
    if problem is None:
        from .reduction import HdpProblem
        problem = HdpProblem(h, conn, None, np.eye(9))
    t = traj.times
    xi = np.array([group_velocity(problem, traj.state(i)) for i in range(len(t))])
    C = np.empty((len(t), 3, 3))
    C[0] = K.polar(np.asarray(h0, dtype=float))
    if np.abs(C[0] - np.asarray(h0, dtype=float)).max() > tol:
        raise DriftAlarm("initial group element is not a rotation")
    if len(t) == 1:
        return C
    spl = CubicSpline(t, xi, axis=0) if len(t) > 2 else None
    g = np.sqrt(3.0) / 6.0
    for i in range(len(t) - 1):
        dt = t[i + 1] - t[i]
        if spl is None:
            a, b = xi[i], xi[i + 1]
        else:
            a = spl(t[i] + (0.5 - g) * dt)
            b = spl(t[i] + (0.5 + g) * dt)
        om = 0.5 * dt * (a + b) + (np.sqrt(3.0) / 12.0) * dt * dt * np.cross(b, a)
        nxt = K.exp_so3(np.ascontiguousarray(om)) @ C[i]
        fixed = K.polar(nxt)
        rep = float(np.abs(fixed - nxt).max())
        if rep > tol:
            raise DriftAlarm(f"orthonormality repair {rep:.3e} at step {i}")
        C[i + 1] = fixed
    return C


def lift_trajectory(traj, C, conn):
    """Full trajectory from a reduced one and a reconstructed group path."""
    rows = [atiyah_cotangent_inverse(traj.state(i), C[i], conn).flat()
            for i in range(len(traj))]
    return Trajectory("full", traj.times.copy(), np.array(rows), [])


def project_trajectory(traj, conn):
    """Reduced trajectory from a full one through the Atiyah map."""
    rows = [atiyah_cotangent(traj.state(i), conn).flat() for i in range(len(traj))]
    return Trajectory("reduced", traj.times.copy(), np.array(rows), [])


# ----------------------------------------------------------------- simulation

def full_field(sc):
    from .fullspace import full_vector_field
    return lambda s: full_vector_field(sc.dynamics, s)[0]


def reduced_field(sc):
    from .reduction import solve_reduced_step
    return lambda r: solve_reduced_step(sc.problem, r)


def _full_diag(sc):
    from .fullspace import lyapunov_residual, rolling_residual

    def diag(s, rate):
        d = {"energy": sc.H.value(s)}
        if sc.rolling:
            d["rolling"] = float(np.abs(rolling_residual(s, sc.params)).max())
        if sc.lyapunov is not None:
            d["lyapunov"] = abs(float(lyapunov_residual(sc.lyapunov, s, rate)))
        return d
    return diag


def _reduced_diag(sc):
    from .reduction import residuals

    def diag(r, rate):
        res = residuals(sc.problem, r, rate)
        d = {"energy": sc.problem.h.value(r),
             "horizontal": float(np.abs(res.horizontal).max()) if res.horizontal.size else 0.0,
             "vertical": float(np.abs(res.vertical).max()) if res.vertical.size else 0.0,
             "kinematic": float(np.abs(res.kinematic).max()) if res.kinematic.size else 0.0}
        return d
    return diag


def _raw_rolling(sc):
    from .fullspace import rolling_residual
    if not sc.rolling:
        return None
    return lambda s: {"rolling_raw": float(np.abs(rolling_residual(s, sc.params)).max())}


def simulate_full(sc, s0, cfg=None, diagnose=True):
    return integrate(full_field(sc), s0, cfg, sc.project_full,
                     _full_diag(sc) if diagnose else None,
                     raw_diagnose=_raw_rolling(sc) if diagnose else None)


def simulate_reduced(sc, r0, cfg=None, diagnose=True):
    return integrate(reduced_field(sc), r0, cfg, sc.project_reduced,
                     _reduced_diag(sc) if diagnose else None)


def max_deviation(a, b):
    """Largest pointwise state difference between two trajectories on the same grid."""
    if a.states.shape != b.states.shape or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise ValueError("trajectories are not on the same grid")
    return float(np.abs(a.states - b.states).max())


def deviation_series(a, b):
    return np.abs(a.states - b.states).max(axis=1)
