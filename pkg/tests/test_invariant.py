import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esst.algebra import eigvalsh3, su2_generators
from esst.design import designed_pulses, DesignParams
from esst.invariant import (
    AuxAngles,
    InvariantSpec,
    invariance_residual,
    invariant_eigensystem,
    invariant_eigenvalues,
    invariant_matrix,
    lr_phase,
    lr_phases,
    lr_phase_rate,
    residual_profile,
)
from esst.model import Chirality, hamiltonian_grid
from esst.propagate import basis_state, propagate

from .conftest import ETA, TAU

angle = st.floats(-1.5, 1.5, allow_nan=False)
omega0s = st.floats(0.1, 100, allow_nan=False)


def spec(theta, psi, omega0=2.0, c=Chirality.LEFT):
    return InvariantSpec(omega0, AuxAngles(theta, psi), c)


class TestInvariantMatrix:
    def test_reduces_to_ky(self):
        _, ky, _ = su2_generators()
        np.testing.assert_allclose(invariant_matrix(spec(0.0, 0.0)), ky, atol=0)

    def test_reduces_to_kx(self):
        kx, _, _ = su2_generators()
        np.testing.assert_allclose(invariant_matrix(spec(0.0, np.pi / 2)), kx, atol=1e-16)

    @settings(max_examples=200)
    @given(angle, angle, omega0s)
    def test_spectrum_is_zero_and_half_omega0(self, th, ps, w0):
        # numerical diagonalisation; the eigenvalues are +-omega0/2, not +-omega0
        w = np.linalg.eigvalsh(invariant_matrix(spec(th, ps, w0)))
        np.testing.assert_allclose(w, [-w0 / 2, 0.0, w0 / 2], atol=1e-12 * w0)
        np.testing.assert_allclose(eigvalsh3(invariant_matrix(spec(th, ps, w0))), w, atol=1e-12 * w0)

    def test_rejects_bad_omega0(self):
        with pytest.raises(ValueError, match="omega0"):
            spec(0.0, 0.0, omega0=0.0)


class TestEigensystem:
    def test_initial_left_state(self):
        phi0, _, _ = invariant_eigensystem(AuxAngles(0.0, 0.0))
        np.testing.assert_array_equal(phi0, [1, 0, 0])

    def test_final_left_state_is_minus_3(self):
        phi0, _, _ = invariant_eigensystem(AuxAngles(0.0, np.pi / 2))
        np.testing.assert_allclose(phi0, [0, 0, -1], atol=1e-16)

    def test_final_right_state(self):
        # the closed form at xi = -pi/2, chi = 0 gives (0, +i, 0); populations are unaffected
        phi0, _, _ = invariant_eigensystem(AuxAngles(-np.pi / 2, 0.0))
        np.testing.assert_allclose(phi0, [0, 1j, 0], atol=1e-16)

    @settings(max_examples=200)
    @given(angle, angle, omega0s)
    def test_eigen_equations(self, th, ps, w0):
        i_mat = invariant_matrix(spec(th, ps, w0))
        for vec, lam in zip(invariant_eigensystem(AuxAngles(th, ps)), invariant_eigenvalues(w0)):
            np.testing.assert_allclose(i_mat @ vec, lam * vec, atol=1e-12 * w0)

    @settings(max_examples=200)
    @given(angle, angle)
    def test_orthonormal(self, th, ps):
        v = np.stack(invariant_eigensystem(AuxAngles(th, ps)))
        np.testing.assert_allclose(v.conj() @ v.T, np.eye(3), atol=1e-12)

    def test_vectorised(self):
        th = np.linspace(-1, 1, 5)
        phi0, phip, _ = invariant_eigensystem(AuxAngles(th, 0.3 * th))
        assert phi0.shape == phip.shape == (5, 3)


def test_eigenvalues_constant_along_schedule(schedules):
    for c, sch in schedules.items():
        w = np.linalg.eigvalsh(invariant_matrix(InvariantSpec(1.0, sch.angles, c)))
        assert np.max(np.abs(w - w[0])) <= 1e-10


class TestResidual:
    def test_constant_invariant_zero_hamiltonian(self):
        const = AuxAngles(0.3, 0.4)
        r = invariance_residual(
            lambda t: InvariantSpec(1.0, const), lambda t: np.zeros((3, 3)), 0.5, 0.01, (0, 1)
        )
        assert r == 0.0

    @pytest.mark.parametrize("c", list(Chirality))
    def test_designed_trajectories(self, c, pulses, schedules):
        from esst.metrics import omega_max

        r = residual_profile(schedules[c], pulses, c, omega0=1.0)
        assert np.isnan(r[0]) and np.isnan(r[-1])
        assert np.nanmax(r) <= 1e-6 * omega_max(pulses) * 1.0

    def test_wrong_chirality_breaks_invariance(self, pulses, schedules):
        from esst.metrics import omega_max

        sch = schedules[Chirality.LEFT]
        r = residual_profile(sch, pulses, Chirality.RIGHT, times=np.array([TAU / 2 - 1e-4, TAU / 2, TAU / 2 + 1e-4]))
        max_oy = float(np.max(np.abs(pulses.omega_y)))
        assert r[1] > 0.1 * 1.0 * max_oy

    def test_stencil_outside_interval(self, pulses, schedules):
        sch = schedules[Chirality.LEFT]
        with pytest.raises(ValueError, match="stencil"):
            invariance_residual(lambda t: InvariantSpec(1.0, sch.at(t)), lambda t: 0, 0.0, 1e-3, (0.0, TAU))


def definition_phase(schedule, pulses, chirality, n_branch, t):
    """alpha_n = int <phi_n| i d/dt - H |phi_n> dt from finite-difference eigenvectors.

    Independent of the closed-form integrand: only the eigenvectors and the
    Hamiltonian enter.
    """
    h = 1e-7
    idx = {1: 1, -1: 2}[n_branch]
    ts = t[1:-1]
    vec = invariant_eigensystem(schedule.at(ts))[idx]
    dvec = (invariant_eigensystem(schedule.at(ts + h))[idx] - invariant_eigensystem(schedule.at(ts - h))[idx]) / (2 * h)
    ham = hamiltonian_grid(*pulses.at(ts), chirality)
    integrand = np.einsum("ni,ni->n", vec.conj(), 1j * dvec - np.einsum("nij,nj->ni", ham, vec))
    assert np.max(np.abs(integrand.imag)) < 1e-6
    from scipy.integrate import trapezoid

    # endpoints contribute zero-width slivers; integrate over the interior grid
    return trapezoid(integrand.real, ts)


class TestLRPhases:
    def test_zero_branch(self, pulses, schedules):
        sch = schedules[Chirality.LEFT]
        assert lr_phase(0, sch, pulses, Chirality.LEFT, TAU) == 0.0
        np.testing.assert_array_equal(lr_phases(sch, pulses, Chirality.LEFT)[:, 0], 0.0)

    def test_zero_field_constant_angles(self):
        from esst.design import AngleSchedule, PulseSet

        t = np.linspace(0, 1, 11)
        const = lambda t: AuxAngles(np.full_like(t, 0.2), np.full_like(t, 0.7), 0 * t, 0 * t)  # noqa: E731
        sch = AngleSchedule(t, const(t), const)
        pulses = PulseSet(t, 0 * t, 0 * t, 0 * t)
        assert lr_phase("+", sch, pulses, "left", 1.0) == 0.0
        np.testing.assert_array_equal(lr_phases(sch, pulses, "left"), 0.0)

    @pytest.mark.parametrize("c", list(Chirality))
    def test_plus_minus_antisymmetric(self, c, pulses, schedules):
        a = lr_phases(schedules[c], pulses, c)
        np.testing.assert_array_equal(a[:, 1], -a[:, 2])
        assert lr_phase("+", schedules[c], pulses, c, 0.3) == -lr_phase("-", schedules[c], pulses, c, 0.3)

    @pytest.mark.parametrize("c", list(Chirality))
    def test_against_definition(self, c, pulses, schedules):
        sch = schedules[c]
        grid = np.linspace(0, TAU, 20001)
        expected = definition_phase(sch, pulses, c, 1, grid)
        assert lr_phase("+", sch, pulses, c, TAU) == pytest.approx(expected, abs=1e-6)
        assert lr_phases(sch, pulses, c)[-1, 1] == pytest.approx(expected, abs=1e-6)

    def test_bad_branch(self, pulses, schedules):
        with pytest.raises(ValueError, match="branch"):
            lr_phase(2, schedules[Chirality.LEFT], pulses, "left", 0.1)

    def test_rate_zero_field(self):
        rate = lr_phase_rate(AuxAngles(0.1, 0.2, 0.0, 0.0), 0.0, 0.0, 0.0, "left")
        assert rate == 0.0


@pytest.mark.parametrize("c", list(Chirality))
def test_reconstruction_matches_propagation(c, pulses, schedules):
    from esst.invariant import lr_reconstruction

    traj = propagate(pulses, c, basis_state(1), steps=len(pulses.t) - 1)
    rec = lr_reconstruction(schedules[c], pulses, c, basis_state(1))
    assert np.max(np.abs(rec - traj.states)) <= 1e-6


def test_reconstruction_with_arbitrary_initial_state(pulses, schedules, rng):
    from esst.invariant import lr_reconstruction

    psi0 = rng.normal(size=3) + 1j * rng.normal(size=3)
    psi0 /= np.linalg.norm(psi0)
    for c in Chirality:
        traj = propagate(pulses, c, psi0, steps=len(pulses.t) - 1)
        rec = lr_reconstruction(schedules[c], pulses, c, psi0)
        assert np.max(np.abs(rec - traj.states)) <= 1e-6
