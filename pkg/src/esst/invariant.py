"""Lewis-Riesenfeld invariants of the SU(2) three-level Hamiltonian.

The invariant is parametrised by two auxiliary angles ``theta`` and ``psi``
(``gamma, beta`` for the left-handed molecule, ``xi, chi`` for the
right-handed one) and an arbitrary frequency scale ``omega0``::

    I = omega0/2 * (cos(theta) sin(psi) K_x + cos(theta) cos(psi) K_y + sin(theta) K_z)

Its spectrum is ``{-omega0/2, 0, +omega0/2}``. The eigenvector with
eigenvalue zero, ``phi_0``, is the transfer path.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .algebra import commutator, max_abs, su2_generators
from .model import Chirality, hamiltonian_grid

__all__ = [
    "AuxAngles",
    "InvariantSpec",
    "invariant_matrix",
    "invariant_eigenvalues",
    "invariant_eigensystem",
    "invariance_residual",
    "residual_profile",
    "lr_phase_rate",
    "lr_phase",
    "lr_phases",
    "lr_reconstruction",
    "BRANCHES",
]

# eigenvector ordering used throughout: (phi_0, phi_+, phi_-)
BRANCHES = (0, 1, -1)


@dataclass(frozen=True)
class AuxAngles:
    """Auxiliary angles and their time derivatives (scalars or equal-shape arrays)."""

    theta: np.ndarray
    psi: np.ndarray
    dtheta: np.ndarray = 0.0
    dpsi: np.ndarray = 0.0

    def __post_init__(self):
        for name in ("theta", "psi", "dtheta", "dpsi"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"auxiliary angle field {name!r} is not finite")


@dataclass(frozen=True)
class InvariantSpec:
    omega0: float
    angles: AuxAngles
    chirality: Chirality = Chirality.LEFT

    def __post_init__(self):
        if not (np.isfinite(self.omega0) and self.omega0 > 0):
            raise ValueError(f"omega0 must be a positive finite frequency, got {self.omega0!r}")


def invariant_matrix(spec: InvariantSpec) -> np.ndarray:
    """Invariant operator in the molecule's own basis, shape ``(..., 3, 3)``."""
    kx, ky, kz = su2_generators()
    a = spec.angles
    th = np.asarray(a.theta, dtype=float)[..., None, None]
    ps = np.asarray(a.psi, dtype=float)[..., None, None]
    return 0.5 * spec.omega0 * (
        np.cos(th) * np.sin(ps) * kx + np.cos(th) * np.cos(ps) * ky + np.sin(th) * kz
    )


def invariant_eigenvalues(omega0):
    """Eigenvalues ordered as :data:`BRANCHES`, i.e. ``(0, +omega0/2, -omega0/2)``."""
    return np.array([0.0, 0.5 * omega0, -0.5 * omega0])


def invariant_eigensystem(angles: AuxAngles):
    """Closed-form normalised eigenvectors ``(phi_0, phi_+, phi_-)``.

    Global phases follow the conventional closed form exactly, e.g.
    ``phi_0 = (cos th cos ps, -i sin th, -cos th sin ps)``; they are not
    re-phased because the transfer targets depend on them.
    """
    th = np.asarray(angles.theta, dtype=float)
    ps = np.asarray(angles.psi, dtype=float)
    ct, st, cp, sp = np.cos(th), np.sin(th), np.cos(ps), np.sin(ps)
    phi0 = np.stack([ct * cp + 0j, -1j * st, -ct * sp + 0j], axis=-1)
    r = 1.0 / np.sqrt(2.0)
    phip = r * np.stack([st * cp + 1j * sp, 1j * ct, -st * sp + 1j * cp], axis=-1)
    phim = r * np.stack([st * cp - 1j * sp, 1j * ct, -st * sp - 1j * cp], axis=-1)
    return phi0, phip, phim


def invariance_residual(
    spec_at: Callable[[np.ndarray], InvariantSpec],
    hamiltonian_at: Callable[[np.ndarray], np.ndarray],
    t,
    dt: float,
    interval=None,
):
    """Return ``max |dI/dt - i [I, H]|`` at time(s) ``t``.

    ``dI/dt`` is a central difference with step ``dt``. Both callables must
    accept arrays of times. ``interval = (t_start, t_end)`` bounds where the
    stencil may reach; a stencil leaving it raises ``ValueError``.
    """
    t = np.asarray(t, dtype=float)
    if dt <= 0:
        raise ValueError("finite-difference step must be positive")
    if interval is not None:
        lo, hi = interval
        if np.any(t - dt < lo - 1e-12 * abs(dt)) or np.any(t + dt > hi + 1e-12 * abs(dt)):
            raise ValueError(
                f"central-difference stencil t +/- {dt:g} leaves the interval [{lo:g}, {hi:g}]"
            )
    i_minus = invariant_matrix(spec_at(t - dt))
    i_plus = invariant_matrix(spec_at(t + dt))
    i_mid = invariant_matrix(spec_at(t))
    didt = (i_plus - i_minus) / (2.0 * dt)
    return max_abs(didt - 1j * commutator(i_mid, hamiltonian_at(t)))


def residual_profile(schedule, pulses, chirality, omega0=1.0, times=None):
    """Invariance residual at each time of ``times`` (default: the schedule grid).

    The difference step is the grid spacing; the two end points, where the
    central stencil does not fit, are reported as NaN.
    """
    chirality = Chirality.parse(chirality)
    times = schedule.t if times is None else np.asarray(times, dtype=float)
    dt = float(times[1] - times[0])
    out = np.full(times.shape, np.nan)

    def spec_at(t):
        return InvariantSpec(omega0, schedule.at(t), chirality)

    def hamiltonian_at(t):
        ox, oy, oz = (np.broadcast_to(w, np.shape(t)) for w in pulses.at(t))
        return hamiltonian_grid(ox, oy, oz, chirality)

    out[1:-1] = invariance_residual(spec_at, hamiltonian_at, times[1:-1], dt, (times[0], times[-1]))
    return out


def lr_phase_rate(angles: AuxAngles, omega_x, omega_y, omega_z, chirality):
    """Rate of the Lewis-Riesenfeld phase of ``phi_+``; ``phi_-`` has minus this.

    ``d alpha_+/dt = -(psi' sin th + Ox sin ps cos th + s Oy cos ps cos th + Oz sin th)``
    with ``s`` the chirality sign. The first term is the geometric part
    ``<phi_+| i d/dt |phi_+>``; ``phi_0`` has zero rate.
    """
    sign = Chirality.parse(chirality).sign
    th = np.asarray(angles.theta, dtype=float)
    ps = np.asarray(angles.psi, dtype=float)
    return -(
        np.asarray(angles.dpsi) * np.sin(th)
        + np.asarray(omega_x) * np.sin(ps) * np.cos(th)
        + sign * np.asarray(omega_y) * np.cos(ps) * np.cos(th)
        + np.asarray(omega_z) * np.sin(th)
    )


def _branch_factor(n):
    key = {0: 0, "0": 0, 1: 1, "+": 1, -1: -1, "-": -1}
    try:
        return key[n]
    except (KeyError, TypeError):
        raise ValueError(f"branch index must be one of 0, '+', '-', got {n!r}") from None


def lr_phase(n, schedule, pulses, chirality, t, points=4001):
    """Lewis-Riesenfeld phase ``alpha_n(t)`` by composite Simpson quadrature.

    ``schedule`` and ``pulses`` must expose ``at(t)`` closed-form evaluators
    (see :mod:`esst.design`) covering ``[start, t]``.
    """
    factor = _branch_factor(n)
    if factor == 0:
        return 0.0
    t0 = float(schedule.t[0])
    if t < t0 or t > float(schedule.t[-1]) + 1e-12 * abs(schedule.t[-1]):
        raise ValueError(f"time {t!r} is outside the schedule")
    if t == t0:
        return 0.0
    grid = np.linspace(t0, t, points)
    ox, oy, oz = pulses.at(grid)
    rate = lr_phase_rate(schedule.at(grid), ox, oy, oz, chirality)
    return float(factor * simpson(rate, x=grid))


def lr_phases(schedule, pulses, chirality):
    """Phases on the schedule grid, shape ``(N, 3)`` ordered as :data:`BRANCHES`.

    Uses cumulative Simpson on the schedule grid; ``pulses`` is re-evaluated
    there so the two grids need not coincide.
    """
    ox, oy, oz = pulses.at(schedule.t)
    rate = lr_phase_rate(schedule.angles, ox, oy, oz, chirality)
    alpha_plus = cumulative_simpson(rate, x=schedule.t, initial=0.0)
    return np.stack([np.zeros_like(alpha_plus), alpha_plus, -alpha_plus], axis=-1)


def lr_reconstruction(schedule, pulses, chirality, psi0):
    """State ``sum_n c_n exp(i alpha_n) |phi_n(t)>`` on the schedule grid.

    ``c_n = <phi_n(0)|psi0>``; shape ``(N, 3)``.
    """
    vecs = np.stack(invariant_eigensystem(schedule.angles), axis=-2)  # (N, branch, level)
    coeffs = np.conj(vecs[0]) @ np.asarray(psi0, dtype=complex)
    alphas = lr_phases(schedule, pulses, chirality)
    return np.einsum("b,nb,nbl->nl", coeffs, np.exp(1j * alphas), vecs)
