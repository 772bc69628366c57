"""Quaternion algebra for S^3 identified with SU(2).

Points of the 3-sphere are unit quaternions stored as (w, x, y, z) arrays,
q = w + x i + y j + z k.  The identification with SU(2) sends i, j, k to the
su(2) basis matrices P1, P2, P3 and is fixed by the complex coordinates

    z1 = w + ix,   z2 = z + iy,

under which quaternion multiplication matches matrix multiplication and
right multiplication by i equals multiplication by the complex scalar i.
All functions broadcast over leading axes; quaternions live on the last one.
"""

from __future__ import annotations

import numpy as np

UNIT_TOL = 1e-12
TANGENT_TOL = 1e-9

QONE = np.array([1.0, 0.0, 0.0, 0.0])
QI = np.array([0.0, 1.0, 0.0, 0.0])
QJ = np.array([0.0, 0.0, 1.0, 0.0])
QK = np.array([0.0, 0.0, 0.0, 1.0])
IMAG_UNITS = (QI, QJ, QK)


def quat_mul(a, b):
    """Hamilton product, broadcasting over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w1, x1, y1, z1 = np.moveaxis(a, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def quat_conj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_norm(q):
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def quat_inv(q):
    q = np.asarray(q, dtype=float)
    return quat_conj(q) / np.sum(q * q, axis=-1, keepdims=True)


def normalize(q, tol: float = 1e-14):
    """Return q rescaled to unit norm whenever |1 - |q|^2| exceeds tol."""
    q = np.asarray(q, dtype=float)
    n2 = np.sum(q * q, axis=-1, keepdims=True)
    scale = np.where(np.abs(1.0 - n2) > tol, 1.0 / np.sqrt(n2), 1.0)
    return q * scale


def check_unit(q, tol: float = UNIT_TOL):
    dev = np.max(np.abs(np.sum(np.asarray(q, dtype=float) ** 2, axis=-1) - 1.0))
    if dev > tol:
        raise ValueError(f"quaternion not unit: |1-|q|^2| = {dev:.3e} > {tol:.1e}")


def quat_exp_imag(u, t):
    """exp(t u) for a unit imaginary quaternion u (3-vector axis)."""
    u = np.asarray(u, dtype=float)
    t = np.asarray(t, dtype=float)
    out_shape = np.broadcast_shapes(u.shape[:-1], t.shape) + (4,)
    out = np.zeros(out_shape)
    out[..., 0] = np.cos(t)
    out[..., 1:] = np.sin(t)[..., None] * u
    return out


def _mult_matrix(side: str, u) -> np.ndarray:
    """4x4 matrix of x -> x*u (side='right') or x -> u*x (side='left')."""
    cols = []
    for e in np.eye(4):
        cols.append(quat_mul(e, u) if side == "right" else quat_mul(u, e))
    return np.array(cols).T


RIGHT_MULT = np.array([_mult_matrix("right", e) for e in IMAG_UNITS])
LEFT_MULT = np.array([_mult_matrix("left", e) for e in IMAG_UNITS])


def right_mult_matrix(u) -> np.ndarray:
    return _mult_matrix("right", np.asarray(u, dtype=float))


def left_mult_matrix(u) -> np.ndarray:
    return _mult_matrix("left", np.asarray(u, dtype=float))


def frame_at(x):
    """Left-invariant orthonormal frame sigma_j(x) = x * e_j, stacked on axis 0.

    The first leg equals ix (complex-scalar multiplication on C^2).
    Raises for non-unit input.
    """
    x = np.asarray(x, dtype=float)
    check_unit(x)
    return np.stack([quat_mul(x, e) for e in IMAG_UNITS], axis=0)


def project_tangent(x, v):
    """Orthogonal projection of an ambient 4-vector onto the tangent space at x."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return v - np.sum(v * x, axis=-1, keepdims=True) * x


def check_tangent(x, v, tol: float = TANGENT_TOL):
    err = np.max(np.abs(np.sum(np.asarray(v) * np.asarray(x), axis=-1)))
    if err > tol:
        raise ValueError(f"vector not tangent: |<v,x>| = {err:.3e} > {tol:.1e}")


def mu_translate(x, v):
    """Left translation to the algebra: components of x^{-1} v on (P1, P2, P3)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    check_unit(x)
    check_tangent(x, v)
    return quat_mul(quat_conj(x), v)[..., 1:]


def eta_translate(x, v):
    """Right translation to the algebra: components of v x^{-1} on (P1, P2, P3)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    check_unit(x)
    check_tangent(x, v)
    return quat_mul(v, quat_conj(x))[..., 1:]


def adjoint_rotation(u) -> np.ndarray:
    """3x3 rotation matrix of Ad_u on the algebra, columns Ad_u(e_j)."""
    u = np.asarray(u, dtype=float)
    cols = [quat_mul(quat_mul(u, e), quat_inv(u))[1:] for e in IMAG_UNITS]
    return np.array(cols).T


def hopf_map(x):
    """Submersion S^3 -> S^2 whose fibers are the orbits x -> x exp(t i).

    Equal to the algebra coordinates of (x i x^{-1}) in the basis
    (P2, P3, -P1); in the complex chart, (2 z1 conj(z2), |z2|^2 - |z1|^2).
    """
    x = np.asarray(x, dtype=float)
    check_unit(x)
    w, xc, y, z = np.moveaxis(x, -1, 0)
    return np.stack(
        [
            2.0 * (w * z + xc * y),
            2.0 * (xc * z - w * y),
            y * y + z * z - w * w - xc * xc,
        ],
        axis=-1,
    )


def hopf_map_via_conjugation(x):
    """hopf_map computed from eta(sigma_1) = x i x^{-1}, for cross-checks."""
    x = np.asarray(x, dtype=float)
    sigma1 = quat_mul(x, QI)
    alg = eta_translate(x, sigma1)  # components on (P1, P2, P3)
    return np.stack([alg[..., 1], alg[..., 2], -alg[..., 0]], axis=-1)


def random_unit_quaternions(n: int, rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=-1, keepdims=True)
