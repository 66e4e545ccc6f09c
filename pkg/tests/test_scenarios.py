import numpy as np
import pytest

from hdpreduce import reduction as red
from hdpreduce.algebra import random_rotation
from hdpreduce.bundle import FullState, ReducedState, atiyah_cotangent
from hdpreduce.connection import build_gnc, phi_map, tangent_basis, trivial_connection
from hdpreduce.integrate import IntegratorConfig, simulate_full
from hdpreduce.scenarios import (BallParams, LyapunovSpec, ShiftedHamiltonian,
                                 ball_gnhs_dalembert, ball_hamiltonian, ball_hocs,
                                 hocs_connection,
                                 invariance_check, make_scenario, rolling_distribution)

Z = np.array([0.0, 0.0, 1.0])


def fstate(pi=(0, 0, 0), e=Z, sigma=(0, 0, 0), gamma=(0, 0, 0), C=None):
    return FullState(np.eye(3), pi, e, sigma, np.eye(3) if C is None else C, gamma)


def test_ball_hamiltonian_examples():
    p = BallParams()
    assert ball_hamiltonian(p, fstate()) == p.m2 * p.g
    assert ball_hamiltonian(p, fstate(e=(1, 0, 0))) == 0.0
    q = BallParams(g=0.0)
    assert ball_hamiltonian(q, fstate(pi=(q.I1, 0, 0))) == q.I1 / 2


def test_ball_hamiltonian_invariant(rng):
    p = BallParams()
    s = fstate(rng.normal(size=3), Z, (0.1, 0.2, 0), rng.normal(size=3), random_rotation(rng))
    for _ in range(20):
        assert ball_hamiltonian(p, s.replace(C=s.C @ random_rotation(rng))) == ball_hamiltonian(p, s)


@pytest.mark.parametrize("kw", [{"r1": 0.5, "r2": 0.5}, {"r2": 0.0}, {"I1": 0.0},
                                {"m2": -1.0}, {"g": -1.0}])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        BallParams(**kw)


def test_make_scenario():
    assert make_scenario("free").name == "free"
    assert make_scenario("ball_hocs", action_side="left").problem.action_side == "left"
    with pytest.raises(KeyError):
        make_scenario("tippe_top")


# ------------------------------------------------------------------ HOCS

def test_hocs_reduced_equations_match_final_displays(hocs, rng):
    p = hocs.params
    k, mg = 1.0 / p.r12, p.m2 * p.g
    for seed in range(100):
        r = hocs.reduced_initial_state(seed, 1.0)
        u = rng.normal(size=red.N_REDUCED)
        rr = red.ReducedRate.from_unknowns(r, u)
        a = red._Assembly(hocs.problem, r)
        hor = red.horizontal_residuals(hocs.problem, r, rr)
        ver = red.vertical_residuals(hocs.problem, r, rr)
        e, ds, dg = r.e, rr.dsigma, rr.dmu
        disp = ds - (e @ ds) * e + mg * (Z - (e @ Z) * e) + k * np.cross(dg, e)
        assert np.abs(a.hor[:3]).max() < 1e-14
        assert np.abs(hor - a.hor[3:].T @ disp).max() <= 1e-12
        v = a.ver[:, 0]
        assert np.abs(np.cross(v, e)).max() < 1e-14 and abs(abs(v @ e) - 1) < 1e-14
        assert abs(ver[0] - v @ dg) <= 1e-12
    assert a.hor.shape == (6, 2) and a.ver.shape == (3, 1)


def test_hocs_vertical_space_is_e(hocs):
    for seed in range(20):
        s = hocs.initial_state(seed, 1.0)
        g = build_gnc(hocs.problem.dist, hocs.problem.metric, s.x, s)
        S = g.S
        assert (S.shape[1], g.T.shape[1], g.R.shape[1]) == (1, 2, 3)
        assert np.abs(S[:6]).max() < 1e-12
        assert np.abs(np.cross(S[6:, 0], s.e)).max() < 1e-12


def test_hocs_closed_form_maps(hocs, rng):
    p = hocs.params
    conn = hocs_connection(p)
    for _ in range(20):
        e = rng.normal(size=3)
        e /= np.linalg.norm(e)
        x = ReducedState(random_rotation(rng), np.zeros(3), e, np.zeros(3), np.zeros(3)).x
        de = np.cross(rng.normal(size=3), e)
        dx = np.concatenate((rng.normal(size=3), de))
        got = phi_map(trivial_connection(), conn, x, dx)
        assert np.abs(got - np.cross(e, de) / p.r12).max() < 1e-14
        s = fstate(rng.normal(size=3), e, np.cross(rng.normal(size=3), e), rng.normal(size=3))
        r = atiyah_cotangent(s, conn)
        assert np.abs(r.sigma - (s.sigma + np.cross(s.gamma, e) / p.r12)).max() < 1e-14


def test_hocs_equilibrium_is_stationary():
    quiet = LyapunovSpec(phi=lambda R, e: np.eye(9), v=lambda R, e: 0.0, mu_rate=lambda s: 0.0)
    sc = ball_hocs(None, quiet)
    traj = simulate_full(sc, fstate(), IntegratorConfig(dt=1e-2, T=0.5))
    assert np.abs(traj.states - traj.states[0]).max() == 0


# ------------------------------------------------------------- d'Alembert

def test_dalembert_distribution_dim(dalembert, rng):
    dist = rolling_distribution(dalembert.params)
    for seed in range(10):
        s = dalembert.initial_state(seed, 1.0)
        g = dist.generators(s.x, s) @ tangent_basis(s.x)
        assert np.linalg.matrix_rank(g, 1e-10) == 6


def test_dalembert_equilibrium_stationary(dalembert):
    traj = simulate_full(dalembert, fstate(), IntegratorConfig(dt=1e-2, T=0.5))
    assert np.abs(traj.states - traj.states[0]).max() == 0


@pytest.mark.slow
def test_dalembert_energy_drift(dalembert):
    for seed in range(2):
        s = dalembert.initial_state(seed, 1.0)
        traj = simulate_full(dalembert, s, IntegratorConfig(dt=1e-3, T=1.0))
        E = traj.column("energy")
        assert np.abs(E - E[0]).max() <= 1e-8


# ------------------------------------------------------------- invariance

def test_invariance_check_examples(hocs, dalembert, rng):
    s = hocs.initial_state(0, 1.0)
    assert invariance_check(hocs, np.eye(3), s) == 0.0
    for sc in (hocs, dalembert):
        for _ in range(20):
            assert invariance_check(sc, random_rotation(rng), sc.initial_state(1, 1.0)) <= 1e-10
    broken = ball_gnhs_dalembert()
    broken.dynamics.H = ShiftedHamiltonian(broken.H)
    worst = max(invariance_check(broken, random_rotation(rng), s) for _ in range(10))
    assert worst > 1e-8
