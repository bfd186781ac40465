"""Cyclic three-level Hamiltonians for the two enantiomers."""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .algebra import su2_generators

__all__ = ["Chirality", "RabiSample", "build_hamiltonian", "hamiltonian_grid", "loop_hamiltonian"]


class Chirality(enum.Enum):
    """Handedness of the molecule; fixes the sign of the 2-3 coupling."""

    LEFT = "left"
    RIGHT = "right"

    @property
    def sign(self) -> int:
        return 1 if self is Chirality.LEFT else -1

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"chirality must be 'left' or 'right', got {value!r}") from None


@dataclass(frozen=True)
class RabiSample:
    """Instantaneous Rabi frequencies (rad per time unit) and the loop phase."""

    omega_x: float
    omega_y: float
    omega_z: float
    phi: float = math.pi / 2

    def __post_init__(self):
        for name in ("omega_x", "omega_y", "omega_z", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")


def loop_hamiltonian(omega_x, omega_y, omega_z, phi, chirality=Chirality.LEFT):
    """Cyclic-loop Hamiltonian with an explicit overall phase ``phi``.

    The 1-3 coupling carries ``exp(-i phi)`` above the diagonal; the 2-3
    coupling is multiplied by the chirality sign. Broadcasts over array inputs.
    """
    sign = Chirality.parse(chirality).sign
    ox, oy, oz, phi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (omega_x, omega_y, omega_z, phi)))
    h = np.zeros(ox.shape + (3, 3), dtype=complex)
    h[..., 0, 1] = h[..., 1, 0] = ox
    h[..., 1, 2] = h[..., 2, 1] = sign * oy
    h[..., 0, 2] = oz * np.exp(-1j * phi)
    h[..., 2, 0] = oz * np.exp(1j * phi)
    return h


def hamiltonian_grid(omega_x, omega_y, omega_z, chirality):
    """``Omega_x K_x + sign * Omega_y K_y + Omega_z K_z`` for arrays of samples.

    This is the ``phi = pi/2`` form used by all designs; result shape is
    ``broadcast(omega_*).shape + (3, 3)``.
    """
    if not all(np.all(np.isfinite(a)) for a in (omega_x, omega_y, omega_z)):
        raise ValueError("non-finite Rabi frequency in Hamiltonian samples")
    kx, ky, kz = su2_generators()
    sign = Chirality.parse(chirality).sign
    ox, oy, oz = (np.asarray(a, dtype=float)[..., None, None] for a in (omega_x, omega_y, omega_z))
    return ox * kx + sign * oy * ky + oz * kz


def build_hamiltonian(sample: RabiSample, chirality: Chirality) -> np.ndarray:
    """Return the 3x3 Hamiltonian for one enantiomer at one instant."""
    return loop_hamiltonian(sample.omega_x, sample.omega_y, sample.omega_z, sample.phi, chirality)
