"""Small dense kernel for 3-level quantum mechanics.

Matrices are plain complex ``numpy`` arrays of shape ``(..., 3, 3)`` and
states are arrays of shape ``(..., 3)``; every function here broadcasts over
leading axes so that a whole time grid can be handled in one call.
"""

import numpy as np

__all__ = [
    "NonHermitianError",
    "su2_generators",
    "commutator",
    "dagger",
    "max_abs",
    "hermiticity_error",
    "eigvalsh3",
    "eigh",
    "hermitian_expm",
    "unitarity_error",
]

HERMITIAN_TOL = 1e-10


class NonHermitianError(ValueError):
    """Raised when a matrix expected to be Hermitian is not."""

    def __init__(self, asymmetry, scale):
        self.asymmetry = float(asymmetry)
        self.scale = float(scale)
        super().__init__(
            f"matrix is not Hermitian: max |M - M^dagger| = {self.asymmetry:.3e} "
            f"(max |M| = {self.scale:.3e}, relative tolerance {HERMITIAN_TOL:g})"
        )


_KX = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
_KY = np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)
_KZ = np.array([[0, 0, -1j], [0, 0, 0], [1j, 0, 0]], dtype=complex)
for _k in (_KX, _KY, _KZ):
    _k.setflags(write=False)


def su2_generators():
    """Return the read-only triple ``(K_x, K_y, K_z)``.

    ``K_x`` couples levels 1-2, ``K_y`` couples 2-3 and ``K_z`` couples 1-3
    with a ``-i``/``+i`` pair, so that ``[K_x, K_y] = i K_z`` and cyclic.
    """
    return _KX, _KY, _KZ


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def commutator(a, b):
    return a @ b - b @ a


def max_abs(m, axis=(-2, -1)):
    """Max-absolute-entry norm over the trailing matrix axes."""
    return np.max(np.abs(m), axis=axis)


def hermiticity_error(m):
    return max_abs(np.asarray(m) - dagger(m))


def unitarity_error(u):
    """``max |U^dagger U - I|`` over the trailing matrix axes."""
    u = np.asarray(u)
    return max_abs(dagger(u) @ u - np.eye(u.shape[-1]))


def _check_hermitian(m, tol=HERMITIAN_TOL):
    asym = np.max(hermiticity_error(m)) if m.size else 0.0
    scale = np.max(max_abs(m)) if m.size else 0.0
    if not np.isfinite(asym) or asym > tol * scale:
        raise NonHermitianError(asym, scale)


def _jacobi_eigvalsh(m, sweeps=50):
    """Cyclic complex Jacobi iteration for one Hermitian matrix (ascending)."""
    a = 0.5 * (m + m.conj().T)
    n = a.shape[0]
    scale = np.max(np.abs(a))
    for _ in range(sweeps):
        off = max(abs(a[p, q]) for p in range(n) for q in range(p + 1, n))
        if off <= 1e-17 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) == 0.0:
                    continue
                # unitary u = diag-phase * real rotation, chosen so that (u^H a u)[p, q] = 0
                phase = apq / abs(apq)
                theta = 0.5 * np.arctan2(2.0 * abs(apq), np.real(a[q, q] - a[p, p]))
                c, s = np.cos(theta), np.sin(theta)
                u = np.eye(n, dtype=complex)
                u[p, p] = c
                u[p, q] = s * phase
                u[q, p] = -s * np.conj(phase)
                u[q, q] = c
                a = u.conj().T @ a @ u
    return np.sort(np.real(np.diag(a)))


def _det3(c):
    # cofactor expansion; LU-based det misbehaves on subnormal pivots
    return (
        c[..., 0, 0] * (c[..., 1, 1] * c[..., 2, 2] - c[..., 1, 2] * c[..., 2, 1])
        - c[..., 0, 1] * (c[..., 1, 0] * c[..., 2, 2] - c[..., 1, 2] * c[..., 2, 0])
        + c[..., 0, 2] * (c[..., 1, 0] * c[..., 2, 1] - c[..., 1, 1] * c[..., 2, 0])
    )


def eigvalsh3(m, degenerate_tol=1e-6):
    """Closed-form eigenvalues of Hermitian 3x3 matrices, ascending.

    Uses the trigonometric solution of the characteristic cubic of the
    traceless, normalised part ``C = (M - q I) / p``: its eigenvalues are
    ``2 cos(phi + 2 pi k / 3)`` with ``cos(3 phi) = det(C) / 2``.
    Near a double root the arccos loses about half the digits, so matrices
    whose roots lie closer than ``degenerate_tol * max|M|`` are re-solved
    by Jacobi rotations. Independent of LAPACK, which makes it a useful
    cross-check of :func:`eigh`.
    """
    m = np.asarray(m, dtype=complex)
    q = np.real(np.trace(m, axis1=-2, axis2=-1)) / 3.0
    b = m - q[..., None, None] * np.eye(3)
    p = np.sqrt(np.real(np.trace(b @ b, axis1=-2, axis2=-1)) / 6.0)
    safe_p = np.where(p > 0, p, 1.0)
    c = b / safe_p[..., None, None]
    r = np.clip(np.real(_det3(c)) / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    hi = q + 2.0 * p * np.cos(phi)
    lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    mid = 3.0 * q - hi - lo
    w = np.stack([lo, mid, hi], axis=-1)

    gap = np.minimum(mid - lo, hi - mid)
    near = (gap < degenerate_tol * max_abs(m)) & (p > 0)
    if np.any(near):
        flat_m = m.reshape(-1, 3, 3)
        flat_w = w.reshape(-1, 3)
        for k in np.flatnonzero(near.reshape(-1)):
            flat_w[k] = _jacobi_eigvalsh(flat_m[k])
    return w


def eigh(m):
    """Eigen-decomposition ``M = V diag(w) V^dagger`` of Hermitian matrices.

    Raises
    ------
    NonHermitianError
        If ``max |M - M^dagger|`` exceeds ``1e-10 * max |M|``.
    """
    m = np.asarray(m, dtype=complex)
    _check_hermitian(m)
    # symmetrise away roundoff so LAPACK sees an exactly Hermitian input
    return np.linalg.eigh(0.5 * (m + dagger(m)))


def hermitian_expm(m, s=1.0):
    """Return ``exp(-i s M)`` for Hermitian ``M`` (broadcasts over leading axes).

    Parameters
    ----------
    m : array_like, shape (..., 3, 3)
        Hermitian generator(s).
    s : float or array_like
        Real scale, e.g. a time step; broadcast against the leading axes of ``m``.

    Returns
    -------
    numpy.ndarray
        Unitary matrices with the shape of ``m``.
    """
    w, v = eigh(m)
    phases = np.exp(-1j * np.asarray(s, dtype=float)[..., None] * w)
    return (v * phases[..., None, :]) @ dagger(v)
