import sys

import numpy as np
import pytest

from hdpreduce import reduction as red
from hdpreduce.bundle import FullState, atiyah_cotangent, sphere_frame
from hdpreduce.fullspace import Hamiltonian
from hdpreduce.scenarios import ball_gnhs_dalembert, ball_hocs, free


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def hocs():
    return ball_hocs()


@pytest.fixture(scope="session")
def dalembert():
    return ball_gnhs_dalembert()


@pytest.fixture(scope="session")
def freesys():
    return free()


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


def base_tangent(rng, e):
    return np.concatenate((rng.normal(size=3), sphere_frame(e) @ rng.normal(size=2)))


def projected_rate(s, rate, conn, eps=1e-6):
    """Derivative of the reduced curve t -> atiyah_cotangent(flow_t(s)) by
    central differences along the full rate; independent of the reduction code."""
    y = s.flat()
    dy = rate.flat_derivative(s)
    rp = atiyah_cotangent(FullState.from_flat(y + eps * dy), conn)
    rm = atiyah_cotangent(FullState.from_flat(y - eps * dy), conn)
    r = atiyah_cotangent(s, conn)
    return r, red.ReducedRate(rate.eta, rate.de, (rp.pi - rm.pi) / (2 * eps),
                              (rp.sigma - rm.sigma) / (2 * eps), (rp.mu - rm.mu) / (2 * eps))


def one_connection_problem(sc, conn, side="right", H=None):
    p0 = sc.problem
    H = H or sc.H
    return red.HdpProblem(red.InducedHamiltonian(H, conn), conn, p0.dist, p0.metric,
                          p0.constraints, action_side=side, case="general")


D1 = np.diag([1.0, 2.0, 3.5])
D2 = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, 0.2], [0.0, 0.2, 4.0]])


class Anisotropic(Hamiltonian):
    """Configuration-dependent, non-isotropic H; still invariant under C -> CB."""

    def __init__(self, potential=True):
        self.potential = potential

    def value(self, s):
        W = s.R @ D1 @ s.R.T
        v = (0.5 * s.pi @ W @ s.pi + 0.5 * s.sigma @ s.sigma * (1 + 0.3 * s.e[0])
             + 0.5 * s.gamma @ D2 @ s.gamma + 2.0 * s.e[2])
        if self.potential:
            v += 0.7 * (s.R[:, 0] @ s.e)
        return v
