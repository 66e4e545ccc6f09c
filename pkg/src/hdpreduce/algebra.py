"""SO(3) kernel: hat/vee, exponential, (co)adjoint actions, rotation repair.

The algebra and its dual are both R^3, paired by the dot product, with the
bracket given by the cross product.
"""
import numpy as np

from . import _kernels as K
from .errors import Degenerate, NotSkew

SKEW_TOL = 1e-9


def _vec(v):
    return np.ascontiguousarray(v, dtype=float).reshape(3)


def hat(v):
    return K.hat(_vec(v))


def vee(m):
    m = np.ascontiguousarray(m, dtype=float)
    if np.max(np.abs(m + m.T)) > SKEW_TOL:
        raise NotSkew("matrix is not skew-symmetric")
    return K.vee(m)


def exp_so3(v):
    """Rodrigues formula, 2-term Taylor expansion for |v| < 1e-6."""
    return K.exp_so3(_vec(v))


def adjoint(g, v):
    return np.asarray(g, dtype=float) @ _vec(v)


def ad(xi, eta):
    return K.cross(_vec(xi), _vec(eta))


def ad_star(xi, mu):
    # transpose of ad: (mu x xi) . w == mu . (xi x w)
    return K.cross(_vec(mu), _vec(xi))


def orthonormalize(m):
    m = np.ascontiguousarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise Degenerate("non-finite matrix")
    d = np.linalg.det(m)
    if d <= 0.0 or np.linalg.cond(m) > 1e12:
        raise Degenerate(f"cannot repair matrix with det {d:.3g}")
    return K.polar(m)


def rotation_defect(m):
    """max(|M^T M - I|_max, |det M - 1|)."""
    return float(K.so3_defect(np.ascontiguousarray(m, dtype=float)))


def is_rotation(m, tol=1e-9):
    return rotation_defect(m) <= tol


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)]])
