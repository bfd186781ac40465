"""Invariant-based inverse engineering of the three Rabi waveforms.

Given auxiliary-angle trajectories ``theta(t), psi(t)`` the Rabi frequencies
that make the invariant exact are fixed algebraically once ``Omega_x =
Omega_z`` is imposed (:func:`aux_to_rabi`). The closed-form design uses a
cubic ramp of one angle with the other held at zero:

* left-handed:  ``gamma = 0``, ``beta = 3 pi s^2 / 2 - pi s^3 + eta``
* right-handed: ``chi = 0``,   ``xi = -(3 pi s^2 / 2 - pi s^3) + eta'``

with ``s = t / tau``. Both branches yield the same fields when
``eta' = -eta``, which is what makes enantio-specific transfer possible with a
single set of pulses.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._csvio import write_csv
from .invariant import AuxAngles
from .model import Chirality

__all__ = [
    "SingularDesignError",
    "DesignParams",
    "AngleSchedule",
    "PulseSet",
    "aux_to_rabi",
    "angle_rates",
    "polynomial_schedule",
    "designed_pulses",
    "write_pulses_csv",
    "PULSES_HEADER",
]

SINGULAR_TOL = 1e-9
MAX_ETA = 0.2
PULSES_HEADER = ("t", "omega_x", "omega_y", "omega_z")


class SingularDesignError(ValueError):
    """The inverse-engineering denominator vanishes for the requested angles."""

    def __init__(self, message, t=None, theta=None, psi=None):
        self.t = t
        self.theta = theta
        self.psi = psi
        super().__init__(message)


@dataclass(frozen=True)
class DesignParams:
    """Duration, regularisation offset and sampling of a closed-form design.

    ``eta`` is the offset of whichever branch is being designed, so a
    right-handed design with ``eta=-0.02`` reproduces the left-handed field
    at ``eta=0.02``.
    """

    tau: float
    eta: float
    grid_points: int = 4001

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive and finite, got {self.tau!r}")
        if not math.isfinite(self.eta) or self.eta == 0 or abs(self.eta) > MAX_ETA:
            raise ValueError(
                f"eta must satisfy 0 < |eta| <= {MAX_ETA} (eta = 0 makes Omega_y diverge at t = 0), "
                f"got {self.eta!r}"
            )
        if int(self.grid_points) != self.grid_points or self.grid_points < 2:
            raise ValueError(f"grid_points must be an integer >= 2, got {self.grid_points!r}")

    @property
    def times(self):
        return np.linspace(0.0, self.tau, int(self.grid_points))


@dataclass(frozen=True)
class AngleSchedule:
    """Sampled auxiliary angles plus a closed-form evaluator ``at(t)``."""

    t: np.ndarray
    angles: AuxAngles
    func: Callable[[np.ndarray], AuxAngles] = field(repr=False)
    chirality: Chirality = Chirality.LEFT

    def at(self, t) -> AuxAngles:
        return self.func(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class PulseSet:
    """Sampled Rabi waveforms on a uniform grid.

    ``at(t)`` returns ``(omega_x, omega_y, omega_z)`` at arbitrary times:
    the closed form when ``func`` is set, linear interpolation otherwise.
    """

    t: np.ndarray
    omega_x: np.ndarray
    omega_y: np.ndarray
    omega_z: np.ndarray
    phi: float = math.pi / 2
    func: Optional[Callable[[np.ndarray], tuple]] = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.t)
        if n < 2 or any(len(w) != n for w in (self.omega_x, self.omega_y, self.omega_z)):
            raise ValueError("pulse waveforms must share a time grid of at least 2 samples")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("pulse time grid must be strictly increasing")

    @property
    def tau(self) -> float:
        return float(self.t[-1] - self.t[0])

    def at(self, t):
        t = np.asarray(t, dtype=float)
        if self.func is not None:
            return self.func(t)
        return tuple(np.interp(t, self.t, w) for w in (self.omega_x, self.omega_y, self.omega_z))

    @classmethod
    def from_function(cls, func, t, phi=math.pi / 2):
        """Sample ``func(t) -> (ox, oy, oz)`` on ``t`` and keep it for re-evaluation."""
        t = np.asarray(t, dtype=float)
        ox, oy, oz = (np.broadcast_to(np.asarray(w, dtype=float), t.shape).copy() for w in func(t))
        return cls(t, ox, oy, oz, phi, func)


def angle_rates(angles: AuxAngles, omega_x, omega_y, omega_z, chirality):
    """Angle velocities implied by given Rabi frequencies (the invariance ODE).

    Returns ``(dtheta, dpsi)`` with::

        dtheta = Ox cos(psi) - s Oy sin(psi)
        dpsi   = (Ox sin(psi) + s Oy cos(psi)) tan(theta) - Oz
    """
    sign = Chirality.parse(chirality).sign
    th = np.asarray(angles.theta, dtype=float)
    ps = np.asarray(angles.psi, dtype=float)
    dth = omega_x * np.cos(ps) - sign * omega_y * np.sin(ps)
    dps = (omega_x * np.sin(ps) + sign * omega_y * np.cos(ps)) * np.tan(th) - omega_z
    return dth, dps


def aux_to_rabi(angles: AuxAngles, chirality, t=None):
    """Invert the invariance ODE for ``(Omega_x, Omega_y)`` with ``Omega_z = Omega_x``.

    Raises
    ------
    SingularDesignError
        Where ``|tan(theta) - sin(psi)| <= 1e-9``.
    """
    sign = Chirality.parse(chirality).sign
    th = np.asarray(angles.theta, dtype=float)
    ps = np.asarray(angles.psi, dtype=float)
    dth = np.asarray(angles.dtheta, dtype=float)
    dps = np.asarray(angles.dpsi, dtype=float)
    tan_th = np.tan(th)
    den = tan_th - np.sin(ps)
    bad = np.abs(den) <= SINGULAR_TOL
    if np.any(bad):
        idx = np.flatnonzero(np.broadcast_to(bad, np.broadcast(th, ps).shape))[0]

        def pick(a):
            return float(np.broadcast_to(a, bad.shape).flat[idx])

        when = None if t is None else pick(t)
        raise SingularDesignError(
            f"singular design: tan(theta) - sin(psi) = {pick(den):.3e} at t={when}, "
            f"theta={pick(th):.6g}, psi={pick(ps):.6g}",
            t=when,
            theta=pick(th),
            psi=pick(ps),
        )
    omega_x = (dps * np.sin(ps) + dth * np.cos(ps) * tan_th) / den
    omega_y = sign * (dps * np.cos(ps) + dth * (1.0 - tan_th * np.sin(ps))) / den
    return omega_x, omega_y


def _ramp(t, tau):
    # cubic ramp 0 -> pi/2 with zero slope at both ends, and its time derivative
    s = t / tau
    return 1.5 * np.pi * s**2 - np.pi * s**3, 3.0 * np.pi * t / tau**2 * (1.0 - s)


def polynomial_schedule(p: DesignParams, chirality) -> AngleSchedule:
    """Closed-form cubic angle schedule for the requested enantiomer."""
    chirality = Chirality.parse(chirality)
    tau, eta = p.tau, p.eta

    if chirality is Chirality.LEFT:
        def func(t):
            ramp, rate = _ramp(t, tau)
            zero = np.zeros_like(ramp)
            return AuxAngles(theta=zero, psi=ramp + eta, dtheta=zero, dpsi=rate)
    else:
        def func(t):
            ramp, rate = _ramp(t, tau)
            zero = np.zeros_like(ramp)
            return AuxAngles(theta=eta - ramp, psi=zero, dtheta=-rate, dpsi=zero)

    t = p.times
    return AngleSchedule(t, func(t), func, chirality)


def designed_pulses(p: DesignParams, chirality) -> PulseSet:
    """Closed-form Rabi waveforms for the cubic schedule.

    ``Omega_x = Omega_z = 3 pi t / tau^2 (t/tau - 1)`` and ``Omega_y`` is the
    same prefactor times ``cot(ramp + eta)`` (left) or ``cot(ramp - eta')``
    (right). The cotangent argument must stay inside ``(0, pi)``, which
    requires ``eta > 0`` on the left branch and ``eta' < 0`` on the right.
    """
    chirality = Chirality.parse(chirality)
    tau = p.tau
    offset = p.eta if chirality is Chirality.LEFT else -p.eta
    if offset <= 0:
        raise SingularDesignError(
            f"{chirality.value}-handed design with eta={p.eta:g} drives the cot argument "
            "through zero inside (0, tau)"
        )

    def func(t):
        ramp, rate = _ramp(t, tau)
        omega_x = -rate
        return omega_x, omega_x / np.tan(ramp + offset), omega_x

    return PulseSet.from_function(func, p.times)


def write_pulses_csv(pulses: PulseSet, path):
    write_csv(path, PULSES_HEADER, [pulses.t, pulses.omega_x, pulses.omega_y, pulses.omega_z])
