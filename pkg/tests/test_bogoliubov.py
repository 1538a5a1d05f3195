import math

import numpy as np
import pytest

from dce.bogoliubov import average_bogoliubov, particle_number_history, particle_numbers, project_bogoliubov
from dce.cavity import solve_spectrum
from dce.dynamics import ModeState, Trajectory
from dce.simulation import simulate
from error_handler import PreStaticRegion, WindowTooShort
from tests.conftest import make_run


@pytest.fixture
def two_modes(symmetric_cavity):
    return solve_spectrum(symmetric_cavity, 2)


def squeezed_state(k, t, alpha=0.8, beta=0.6):
    """Mode 1 carries α e^{-ikt} + β e^{ikt}; mode 2 stays in vacuum."""
    eps = np.diag(np.exp(-1j * k * t)).astype(complex)
    deps = np.diag(-1j * k * np.exp(-1j * k * t)).astype(complex)
    eps[0, 0] = alpha * np.exp(-1j * k[0] * t) + beta * np.exp(1j * k[0] * t)
    deps[0, 0] = -1j * k[0] * alpha * np.exp(-1j * k[0] * t) + 1j * k[0] * beta * np.exp(1j * k[0] * t)
    return ModeState(t=t, eps=eps, deps=deps)


def squeezed_trajectory(k, t_F, periods, samples):
    span = periods * 2 * math.pi / k[0]
    times = np.linspace(t_F, t_F + span, samples)
    states = [squeezed_state(k, t) for t in times]
    return Trajectory(times=times, eps=np.stack([s.eps for s in states]), deps=np.stack([s.deps for s in states]),
                      t_F=t_F, dt_drive=0.0, dt_static=times[1] - times[0], max_error_estimate=0.0)


class TestProjection:
    def test_vacuum_has_no_particles(self, two_modes):
        state = ModeState.initial(two_modes.k)
        result = project_bogoliubov(state, two_modes, t_F=0.0)
        np.testing.assert_allclose(result.alpha, np.eye(2), atol=1e-15)
        np.testing.assert_allclose(result.beta, 0.0, atol=1e-15)
        np.testing.assert_allclose(result.N, 0.0, atol=1e-15)
        assert result.unitarity_deviation < 1e-15

    def test_squeezed_mode(self, two_modes):
        result = project_bogoliubov(squeezed_state(two_modes.k, 7.3), two_modes, t_F=5.0)
        assert result.beta[0, 0] == pytest.approx(0.6, abs=1e-12)
        assert abs(result.alpha[0, 0]) == pytest.approx(0.8, abs=1e-12)
        np.testing.assert_allclose(result.N, [0.36, 0.0], atol=1e-12)
        assert result.t_eval == 7.3

    def test_inside_drive_window_raises(self, two_modes):
        with pytest.raises(PreStaticRegion):
            project_bogoliubov(squeezed_state(two_modes.k, 3.0), two_modes, t_F=5.0)

    def test_switch_off_allows_projection_inside_window(self, two_modes):
        result = project_bogoliubov(squeezed_state(two_modes.k, 3.0), two_modes, t_F=5.0, switch_off=True)
        assert result.N[0] == pytest.approx(0.36, abs=1e-12)

    def test_k_weighted_convention(self):
        k = np.array([1.0, 2.0])
        beta = np.array([[0.1, 0.2], [0.3, 0.4]])
        np.testing.assert_allclose(particle_numbers(beta, k), [0.05, 0.25])
        np.testing.assert_allclose(particle_numbers(beta, k, 'k-weighted'), [0.01 + 0.02, 0.18 + 0.16])

    def test_unknown_convention(self):
        with pytest.raises(ValueError):
            particle_numbers(np.zeros((2, 2)), np.ones(2), 'photons')


class TestAveraging:
    def test_leakage_corrected_average_is_exact(self, two_modes):
        trajectory = squeezed_trajectory(two_modes.k, 5.0, 20, 4001)
        result = average_bogoliubov(trajectory, two_modes)
        assert result.beta[0, 0] == pytest.approx(0.6, abs=1e-9)
        assert result.N[0] == pytest.approx(0.36, abs=1e-9)

    def test_plain_average_is_within_leakage_bound(self, two_modes):
        trajectory = squeezed_trajectory(two_modes.k, 5.0, 20, 4001)
        result = average_bogoliubov(trajectory, two_modes, correct_leakage=False)
        window = trajectory.times[-1] - trajectory.times[0]
        assert abs(result.beta[0, 0] - 0.6) <= 1.0 / (two_modes.k[0] * window)

    def test_short_window_raises(self, two_modes):
        trajectory = squeezed_trajectory(two_modes.k, 5.0, 5, 1001)
        with pytest.raises(WindowTooShort):
            average_bogoliubov(trajectory, two_modes)

    def test_window_inside_drive_raises(self, two_modes):
        trajectory = squeezed_trajectory(two_modes.k, 5.0, 20, 4001)
        with pytest.raises(PreStaticRegion):
            average_bogoliubov(trajectory, two_modes, window=(1.0, 80.0))


class TestDrivenRun:
    @pytest.fixture(scope='class')
    def simulation(self):
        t_F = 60.0
        run = make_run(t_F=t_F, t_max=t_F + 20 * 2 * math.pi / 1.2611, n_modes=4, record_stride=5)
        return simulate(run)

    def test_projection_matches_averaging(self, simulation):
        averaged = average_bogoliubov(simulation.trajectory, simulation.table)
        projected = simulation.result
        assert averaged.N[0] == pytest.approx(projected.N[0], rel=1e-4)
        np.testing.assert_allclose(averaged.beta, projected.beta, atol=1e-4)

    def test_projection_is_constant_after_drive(self, simulation):
        trajectory, table = simulation.trajectory, simulation.table
        at_end = project_bogoliubov(trajectory.at_or_after(trajectory.t_F), table, trajectory.t_F)
        np.testing.assert_allclose(at_end.N, simulation.result.N, rtol=1e-5, atol=1e-10)

    def test_resonant_mode_gains_particles(self, simulation):
        assert simulation.result.N[0] > 0.1
        assert simulation.result.N[0] == simulation.result.N.max()

    def test_weighted_unitarity(self, simulation):
        assert simulation.result.unitarity_deviation < 1e-5

    def test_history_starts_in_vacuum(self, simulation):
        times, history = particle_number_history(simulation.trajectory, simulation.table)
        assert history.shape == (len(times), 4)
        np.testing.assert_allclose(history[0], 0.0, atol=1e-15)
        assert history[-1, 0] == pytest.approx(simulation.result.N[0], rel=1e-12)
