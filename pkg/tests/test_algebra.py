import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hdpreduce import algebra as A
from hdpreduce.errors import Degenerate, NotSkew

from conftest import rot_z

vec = arrays(np.float64, 3, elements=st.floats(-10, 10, allow_nan=False))
quat = arrays(np.float64, 4, elements=st.floats(-1, 1, allow_nan=False)).filter(
    lambda q: np.linalg.norm(q) > 1e-3)


def _rot(q):
    return A.random_rotation(_Fixed(q))


class _Fixed:
    def __init__(self, q):
        self.q = q

    def normal(self, size=None):
        return np.array(self.q, dtype=float)


def test_hat_examples():
    assert np.array_equal(A.hat([0, 0, 1]), [[0, -1, 0], [1, 0, 0], [0, 0, 0]])
    assert np.array_equal(A.hat([0, 0, 0]), np.zeros((3, 3)))
    assert np.allclose(A.hat([1, 0, 0]) @ [0, 1, 0], [0, 0, 1], atol=0)


def test_vee_examples():
    assert np.array_equal(A.vee(A.hat([1, 2, 3])), [1, 2, 3])
    assert np.array_equal(A.vee(np.zeros((3, 3))), [0, 0, 0])
    assert np.array_equal(A.vee([[0, -1, 0], [1, 0, 0], [0, 0, 0]]), [0, 0, 1])


def test_vee_rejects_non_skew():
    with pytest.raises(NotSkew):
        A.vee(np.eye(3))


def test_exp_examples():
    assert np.array_equal(A.exp_so3([0, 0, 0]), np.eye(3))
    expect = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1.0]])
    assert np.abs(A.exp_so3([0, 0, np.pi / 2]) - expect).max() < 1e-15
    assert np.abs(A.exp_so3([0, 0, 2 * np.pi]) - np.eye(3)).max() < 1e-12


def test_exp_small_angle_branch():
    v = np.array([3e-7, -2e-7, 1e-7])
    assert np.abs(A.exp_so3(v) - (np.eye(3) + A.hat(v))).max() < 1e-13
    assert A.is_rotation(A.exp_so3(v), 1e-14)


def test_adjoint_examples():
    v = np.array([1.0, 2.0, 3.0])
    assert np.array_equal(A.adjoint(np.eye(3), v), v)
    assert np.array_equal(A.adjoint(rot_z(0.3), np.zeros(3)), np.zeros(3))
    assert np.abs(A.adjoint(rot_z(np.pi / 2), [1, 0, 0]) - [0, 1, 0]).max() < 1e-15


def test_ad_star_examples():
    assert np.array_equal(A.ad_star([1, 0, 0], [0, 1, 0]), [0, 0, -1])
    assert np.array_equal(A.ad_star([1, 2, 3], [1, 2, 3]), [0, 0, 0])
    assert np.array_equal(A.ad_star([0, 0, 1], [0, 0, 5]), [0, 0, 0])


def test_orthonormalize_examples():
    g = rot_z(0.7)
    assert np.abs(A.orthonormalize(g) - g).max() < 1e-12
    m = A.orthonormalize(np.eye(3) + 1e-6 * np.arange(9.0).reshape(3, 3))
    assert np.abs(m.T @ m - np.eye(3)).max() < 1e-12
    assert np.abs(A.orthonormalize(2 * np.eye(3)) - np.eye(3)).max() < 1e-15


def test_orthonormalize_polar_is_nearest(rng):
    m = rng.normal(size=(3, 3))
    if np.linalg.det(m) < 0:
        m[:, 0] *= -1
    q = A.orthonormalize(m)
    # polar factor oracle from scipy
    from scipy.linalg import polar
    u, _ = polar(m)
    assert np.abs(q - u).max() < 1e-12
    for _ in range(20):
        other = A.exp_so3(0.1 * rng.normal(size=3)) @ q
        assert np.linalg.norm(m - q) <= np.linalg.norm(m - other) + 1e-12


@pytest.mark.parametrize("m", [np.zeros((3, 3)), np.diag([1.0, 1.0, -1.0]),
                               np.diag([1.0, 1.0, 1e-14])])
def test_orthonormalize_degenerate(m):
    with pytest.raises(Degenerate):
        A.orthonormalize(m)


@settings(max_examples=200, deadline=None)
@given(vec, vec)
def test_hat_is_cross(v, w):
    assert np.abs(A.hat(v) @ w - np.cross(v, w)).max() <= 1e-12 * (1 + np.abs(v).max() * np.abs(w).max())
    assert np.abs(A.vee(A.hat(v)) - v).max() == 0.0


@settings(max_examples=200, deadline=None)
@given(vec, quat)
def test_conjugation(v, q):
    g = _rot(q)
    assert np.abs(A.hat(A.adjoint(g, v)) - g @ A.hat(v) @ g.T).max() <= 1e-12 * (1 + np.abs(v).max())


@settings(max_examples=200, deadline=None)
@given(vec, vec, vec)
def test_ad_star_is_transpose_of_ad(xi, mu, w):
    scale = 1 + np.abs(xi).max() * np.abs(mu).max() * np.abs(w).max()
    assert abs(A.ad_star(xi, mu) @ w - mu @ A.ad(xi, w)) <= 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(vec)
def test_exp_is_rotation_and_continuous(v):
    assert A.rotation_defect(A.exp_so3(v)) < 1e-12
    path = [A.exp_so3(t * v) for t in np.linspace(0, 1, 11)]
    assert np.array_equal(path[0], np.eye(3))
    step = np.linalg.norm(v) / 10
    for a, b in zip(path, path[1:]):
        assert np.abs(a - b).max() <= step + 1e-12


def test_exp_matches_scipy(rng):
    from scipy.spatial.transform import Rotation
    for _ in range(50):
        v = rng.normal(size=3) * 2
        assert np.abs(A.exp_so3(v) - Rotation.from_rotvec(v).as_matrix()).max() < 1e-13
