"""Enantio-specific state transfer in cyclic three-level chiral molecules.

Invariant-based inverse engineering designs one set of three Rabi
waveforms that carries the left-handed enantiomer ``|1> -> |3>`` and the
right-handed one ``|1> -> |2>`` at the same time.
"""

from .algebra import NonHermitianError, hermitian_expm, su2_generators
from .design import (
    AngleSchedule,
    DesignParams,
    PulseSet,
    SingularDesignError,
    aux_to_rabi,
    designed_pulses,
    polynomial_schedule,
)
from .invariant import (
    AuxAngles,
    InvariantSpec,
    invariance_residual,
    invariant_eigensystem,
    invariant_matrix,
    lr_phase,
    lr_phases,
    lr_reconstruction,
)
from .metrics import SweepRow, enantiomeric_excess, omega_max, sweep_eta
from .model import Chirality, RabiSample, build_hamiltonian
from .propagate import Trajectory, basis_state, convergence_check, propagate

__version__ = "0.1.0"
