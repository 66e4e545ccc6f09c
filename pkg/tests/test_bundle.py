from types import SimpleNamespace

import numpy as np
import pytest

from hdpreduce import bundle as B
from hdpreduce.algebra import random_rotation
from hdpreduce.connection import ConnectionForm, trivial_connection
from hdpreduce.errors import ProjectionFailure
from hdpreduce.scenarios import hocs_connection

from conftest import rot_z

Z = np.array([0.0, 0.0, 1.0])
HALF = SimpleNamespace(r12=0.5)  # connection closed forms only read r12


def state(R=None, pi=(0, 0, 0), e=Z, sigma=(0, 0, 0), C=None, gamma=(0, 0, 0)):
    return B.FullState(np.eye(3) if R is None else R, pi, e, sigma,
                       np.eye(3) if C is None else C, gamma)


def test_momentum_map_examples():
    assert np.array_equal(B.momentum_map(state(gamma=(1, 2, 3))), [1, 2, 3])
    assert np.array_equal(B.momentum_map(state(C=rot_z(0.4))), [0, 0, 0])
    got = B.momentum_map(state(C=rot_z(np.pi / 2), gamma=(1, 0, 0)))
    assert np.abs(got - [0, -1, 0]).max() < 1e-15


def test_atiyah_cotangent_trivial(rng):
    s = state(random_rotation(rng), rng.normal(size=3), Z, (0.3, -0.2, 0.0),
              random_rotation(rng), rng.normal(size=3))
    r = B.atiyah_cotangent(s, trivial_connection())
    for a, b in ((r.R, s.R), (r.pi, s.pi), (r.e, s.e), (r.sigma, s.sigma), (r.mu, s.gamma)):
        assert np.array_equal(a, b)


def test_atiyah_cotangent_closed_form_examples():
    conn = hocs_connection(HALF)
    r = B.atiyah_cotangent(state(gamma=(0, 0, 1)), conn)
    assert np.abs(r.sigma).max() == 0.0
    r = B.atiyah_cotangent(state(gamma=(1, 0, 0)), conn)
    assert np.abs(r.sigma - [0, -2, 0]).max() < 1e-15
    assert np.array_equal(r.mu, [1, 0, 0])


def test_atiyah_cotangent_round_trip(rng):
    conn = hocs_connection(HALF)
    e = rng.normal(size=3)
    e /= np.linalg.norm(e)
    s = state(random_rotation(rng), rng.normal(size=3), e,
              B.project_sphere_tangent(e, rng.normal(size=3)), random_rotation(rng),
              rng.normal(size=3))
    back = B.atiyah_cotangent_inverse(B.atiyah_cotangent(s, conn), s.C, conn)
    assert np.abs(back.flat() - s.flat()).max() < 1e-14


def test_atiyah_cotangent_equivariant(rng):
    conn = hocs_connection(HALF)
    s = state(random_rotation(rng), rng.normal(size=3), Z, (1.0, 2.0, 0.0),
              random_rotation(rng), rng.normal(size=3))
    r0 = B.atiyah_cotangent(s, conn)
    for _ in range(20):
        r1 = B.atiyah_cotangent(B.lifted_action(s, random_rotation(rng)), conn)
        assert np.array_equal(r0.flat(), r1.flat())


def test_atiyah_cotangent_rejects_normal_sigma():
    bad = ConnectionForm(lambda x, z: np.hstack((np.eye(3), np.zeros((3, 3)))))
    s = state(sigma=(0, 0, 1e-3))
    with pytest.raises(ProjectionFailure):
        B.atiyah_cotangent(s, bad)


def test_atiyah_forward_examples(rng):
    x = B.BasePoint(np.eye(3), Z)
    xi = rng.normal(size=3)
    xd = B.BaseTangent(x, rng.normal(size=3), (0.2, 0.1, 0.0))
    out = B.atiyah_forward(x, np.eye(3), xd, xi, trivial_connection())
    assert out[0] is xd and np.array_equal(out[1], xi)
    zero = B.BaseTangent(x, np.zeros(3), np.zeros(3))
    assert np.array_equal(B.atiyah_forward(x, np.eye(3), zero, xi, hocs_connection(HALF))[1], xi)
    xd = B.BaseTangent(x, np.zeros(3), (1, 0, 0))
    got = B.atiyah_forward(x, np.eye(3), xd, np.zeros(3), hocs_connection(HALF))[1]
    assert np.abs(got - [0, -2, 0]).max() < 1e-15


def test_project_sphere_tangent_examples(rng):
    assert np.array_equal(B.project_sphere_tangent(Z, [1, 2, 3]), [1, 2, 0])
    e = rng.normal(size=3)
    e /= np.linalg.norm(e)
    assert np.abs(B.project_sphere_tangent(e, e)).max() < 1e-15
    t = B.sphere_frame(e) @ rng.normal(size=2)
    assert np.abs(B.project_sphere_tangent(e, t) - t).max() < 1e-15


def test_projector_idempotent_self_adjoint(rng):
    for _ in range(20):
        e = rng.normal(size=3)
        e /= np.linalg.norm(e)
        v, w = rng.normal(size=(2, 3))
        pv = B.project_sphere_tangent(e, v)
        assert np.abs(B.project_sphere_tangent(e, pv) - pv).max() < 1e-15
        assert abs(pv @ w - v @ B.project_sphere_tangent(e, w)) < 1e-13
        assert abs(pv @ e) < 1e-15


def test_geodesic_and_transport(rng):
    e = rng.normal(size=3)
    e /= np.linalg.norm(e)
    T = B.sphere_frame(e)
    u, w = T @ rng.normal(size=2), T @ rng.normal(size=2)
    for t in (0.1, 0.7, 2.0):
        p = B.sphere_geodesic(e, u, t)
        q = B.sphere_transport(e, u, t, w)
        assert abs(p @ p - 1) < 1e-14
        assert abs(q @ p) < 1e-14
        assert abs(np.linalg.norm(q) - np.linalg.norm(w)) < 1e-14


def test_flat_round_trip(rng):
    s = state(random_rotation(rng), rng.normal(size=3), Z, (1.0, 0.0, 0.0),
              random_rotation(rng), rng.normal(size=3))
    assert np.array_equal(B.FullState.from_flat(s.flat()).flat(), s.flat())
    r = B.atiyah_cotangent(s, trivial_connection())
    assert np.array_equal(B.ReducedState.from_flat(r.flat()).flat(), r.flat())
    assert s.flat().size == B.FULL_SIZE and r.flat().size == B.REDUCED_SIZE


def test_check_state():
    B.check_state(state())
    with pytest.raises(ValueError):
        B.check_state(state(e=(0, 0, 2)))
    with pytest.raises(ValueError):
        B.check_state(state(sigma=(0, 0, 1)))
    with pytest.raises(ValueError):
        B.check_state(state(R=2 * np.eye(3)))
