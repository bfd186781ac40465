"""Unitary time stepping of the three-level Schroedinger equation.

Each step applies ``exp(-i G)`` with ``G`` Hermitian, so the norm is exact up
to roundoff regardless of step size. Two Magnus integrators are provided:

``"midpoint"``
    second order, ``G = H(t + h/2) h``.
``"magnus4"`` (default)
    fourth order, two Gauss-Legendre nodes ``t_{1,2}``:
    ``G = h/2 (H1 + H2) - i sqrt(3) h^2 / 12 [H2, H1]``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._csvio import write_csv
from .algebra import commutator, hermitian_expm
from .model import Chirality, hamiltonian_grid

__all__ = [
    "Trajectory",
    "propagate",
    "step_unitaries",
    "convergence_check",
    "basis_state",
    "write_trajectory_csv",
    "METHODS",
    "DEFAULT_STEPS",
]

METHODS = ("magnus4", "midpoint")
DEFAULT_STEPS = 4000
MIN_STEPS = 100
NORM_TOL = 1e-9
_GAUSS = np.sqrt(3.0) / 6.0


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    chirality: Chirality
    invariant_residual: Optional[np.ndarray] = None

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.states) ** 2

    @property
    def norm_error(self) -> np.ndarray:
        return np.abs(np.sqrt(np.sum(self.populations, axis=-1)) - 1.0)

    @property
    def final_populations(self) -> np.ndarray:
        return self.populations[-1]


def basis_state(level: int) -> np.ndarray:
    """``|level>`` for ``level`` in 1..3."""
    if level not in (1, 2, 3):
        raise ValueError(f"basis level must be 1, 2 or 3, got {level!r}")
    v = np.zeros(3, dtype=complex)
    v[level - 1] = 1.0
    return v


def _hamiltonians(pulses, chirality, t):
    ox, oy, oz = (np.broadcast_to(np.asarray(w, dtype=float), np.shape(t)) for w in pulses.at(t))
    return hamiltonian_grid(ox, oy, oz, chirality)


def step_unitaries(pulses, chirality, steps, method="magnus4"):
    """Per-step propagators over ``[t_start, t_end]`` of ``pulses``.

    Returns ``(times, U)`` with ``times`` of length ``steps + 1`` and
    ``U[k]`` mapping the state at ``times[k]`` to ``times[k + 1]``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown integrator {method!r}; expected one of {METHODS}")
    t0, t1 = float(pulses.t[0]), float(pulses.t[-1])
    times = np.linspace(t0, t1, steps + 1)
    h = (t1 - t0) / steps
    left = times[:-1]
    if method == "midpoint":
        gen = _hamiltonians(pulses, chirality, left + 0.5 * h) * h
    else:
        h1 = _hamiltonians(pulses, chirality, left + (0.5 - _GAUSS) * h)
        h2 = _hamiltonians(pulses, chirality, left + (0.5 + _GAUSS) * h)
        gen = 0.5 * h * (h1 + h2) - 1j * (np.sqrt(3.0) * h * h / 12.0) * commutator(h2, h1)
    return times, hermitian_expm(gen, 1.0)


def _check_inputs(psi0, steps):
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (3,):
        raise ValueError(f"initial state must have 3 amplitudes, got shape {psi0.shape}")
    norm_dev = abs(np.linalg.norm(psi0) - 1.0)
    if not norm_dev <= NORM_TOL:
        raise ValueError(f"initial state is not normalised (| |psi0| - 1 | = {norm_dev:.3e})")
    if int(steps) != steps or steps < MIN_STEPS:
        raise ValueError(f"steps must be an integer >= {MIN_STEPS}, got {steps!r}")
    return psi0, int(steps)


def propagate(pulses, chirality, psi0, steps=DEFAULT_STEPS, method="magnus4") -> Trajectory:
    """Integrate ``i d psi/dt = H(t) psi`` for one enantiomer.

    Parameters
    ----------
    pulses : PulseSet
        Waveforms; the closed form is queried at the integrator nodes.
    chirality : Chirality or str
    psi0 : array_like
        Normalised initial amplitudes.
    steps : int
        Number of uniform steps over the pulse window (at least 100).
    method : {"magnus4", "midpoint"}

    Returns
    -------
    Trajectory
        States at all ``steps + 1`` grid times.
    """
    chirality = Chirality.parse(chirality)
    psi0, steps = _check_inputs(psi0, steps)
    times, unitaries = step_unitaries(pulses, chirality, steps, method)
    states = np.empty((steps + 1, 3), dtype=complex)
    states[0] = psi = psi0
    for k, u in enumerate(unitaries, start=1):
        psi = u @ psi
        states[k] = psi
    return Trajectory(times, states, chirality)


def convergence_check(pulses, chirality, psi0, steps=DEFAULT_STEPS, method="magnus4") -> float:
    """Max amplitude difference of the final state between ``steps`` and ``2 * steps``."""
    coarse = propagate(pulses, chirality, psi0, steps, method).states[-1]
    fine = propagate(pulses, chirality, psi0, 2 * steps, method).states[-1]
    return float(np.max(np.abs(coarse - fine)))


def write_trajectory_csv(traj: Trajectory, path):
    pops = traj.populations
    header = ["t", "P1", "P2", "P3", "norm_error"]
    cols = [traj.times, pops[:, 0], pops[:, 1], pops[:, 2], traj.norm_error]
    if traj.invariant_residual is not None:
        header.append("invariant_residual")
        cols.append(traj.invariant_residual)
    write_csv(path, header, cols)
