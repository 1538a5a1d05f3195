import math

import numpy as np
import pytest

from dce.cavity import coupling_coefficients, solve_spectrum
from dce.dynamics import (ModeState, advance, coupling_at, default_step, drive_signals, instantaneous_frequency,
                          integrate, stability_limit, wronskian, wronskian_deviation)
from dce.simulation import simulate
from error_handler import NonFiniteState, StepTooLarge
from shared.schema import IntegratorConfig
from tests.conftest import make_drive, make_run, synthetic_coupling


@pytest.fixture
def two_modes(symmetric_cavity):
    return solve_spectrum(symmetric_cavity, 2)


class TestDriveSignals:
    def test_zero_outside_window(self, table):
        drive = make_drive(table, 2 * table.k[0], t_F=10.0, t_max=20.0)
        assert drive_signals(0.0, drive) == (0.0, 0.0)
        assert drive_signals(10.0, drive) == (0.0, 0.0)
        assert drive_signals(15.0, drive) == (0.0, 0.0)
        assert drive_signals(1.0, drive) != (0.0, 0.0)

    def test_instantaneous_frequency_at_crest(self, table):
        omega = 2 * table.k[0]
        drive = make_drive(table, omega, epsilon_R=0.0, phi_L=0.3)
        coupling = coupling_coefficients(table, drive)
        t = (math.pi / 2 - 0.3) / omega
        expected = table.k[0]**2 - coupling.alpha_L[0]
        assert instantaneous_frequency(1, t, coupling, drive) == pytest.approx(expected, rel=1e-12)

    def test_instantaneous_frequency_is_static_after_drive(self, table):
        drive = make_drive(table, 2 * table.k[0], t_F=10.0, t_max=20.0)
        coupling = coupling_coefficients(table, drive)
        assert instantaneous_frequency(2, 12.0, coupling, drive) == table.k[1]**2

    def test_coupling_at_is_symmetric_and_off_diagonal(self, table):
        drive = make_drive(table, 2 * table.k[0], phi_R=1.0)
        coupling = coupling_coefficients(table, drive)
        sigma = coupling_at(3.7, coupling, drive)
        np.testing.assert_allclose(sigma, sigma.T, atol=1e-15)
        np.testing.assert_array_equal(np.diag(sigma), 0.0)
        assert not coupling_at(500.0, coupling, drive).any()


class TestStepSize:
    def test_default_and_limit(self, table):
        assert default_step(table) == pytest.approx(2 * math.pi / (100 * table.k[-1]))
        assert stability_limit(table) == pytest.approx(2 * math.pi / (40 * table.k[-1]))

    def test_step_above_limit_raises(self, table):
        drive = make_drive(table, 2 * table.k[0])
        coupling = coupling_coefficients(table, drive)
        with pytest.raises(StepTooLarge):
            integrate(table, coupling, drive, IntegratorConfig(n_modes=6, dt=1.0))

    def test_mismatched_couplings_raise(self, table, two_modes):
        drive = make_drive(table, 2 * table.k[0])
        with pytest.raises(ValueError):
            integrate(table, coupling_coefficients(two_modes, drive), drive, IntegratorConfig(n_modes=6))


class TestIntegration:
    def test_undriven_cavity_follows_free_evolution(self, two_modes):
        drive = make_drive(two_modes, 2 * two_modes.k[0], epsilon=0.0, t_F=1.0, t_max=10.0)
        coupling = coupling_coefficients(two_modes, drive)
        trajectory = integrate(two_modes, coupling, drive, IntegratorConfig(n_modes=2, dt=0.005, record_stride=100))
        for state in trajectory.states():
            exact = np.diag(np.exp(-1j * two_modes.k * state.t))
            assert np.max(np.abs(state.eps - exact)) <= 1e-8 * max(state.t, 1.0)

    def test_drive_end_lies_on_a_step(self, table):
        drive = make_drive(table, 2 * table.k[0], t_F=10.3, t_max=12.0)
        coupling = coupling_coefficients(table, drive)
        trajectory = integrate(table, coupling, drive, IntegratorConfig(n_modes=6, record_stride=1))
        assert np.min(np.abs(trajectory.times - 10.3)) < 1e-9
        assert trajectory.times[0] == 0.0
        assert trajectory.times[-1] == pytest.approx(12.0, abs=1e-9)
        assert trajectory.dt_drive <= default_step(table)
        assert trajectory.max_error_estimate > 0.0

    def test_stop_before_end_of_drive(self, table):
        drive = make_drive(table, 2 * table.k[0], t_F=10.0, t_max=12.0)
        coupling = coupling_coefficients(table, drive)
        trajectory = integrate(table, coupling, drive, IntegratorConfig(n_modes=6), t_stop=4.0)
        assert trajectory.final.t == pytest.approx(4.0, abs=1e-9)

    def test_non_finite_state_raises(self, two_modes):
        drive = make_drive(two_modes, 2 * two_modes.k[0])
        coupling = synthetic_coupling(two_modes.k, alpha_L=[np.nan, 0.0])
        with pytest.raises(NonFiniteState):
            integrate(two_modes, coupling, drive, IntegratorConfig(n_modes=2, record_stride=1))

    def test_time_reversal(self, two_modes):
        """Forward then backward Merson steps return to the initial state."""
        drive = make_drive(two_modes, 2 * two_modes.k[0], epsilon=0.0)
        coupling = coupling_coefficients(two_modes, drive)
        h = default_step(two_modes)
        start = ModeState.initial(two_modes.k)
        forward, _ = advance(start, coupling, drive, h, 1000, driven=False)
        backward, _ = advance(forward[-1], coupling, drive, -h, 1000, driven=False)
        back = backward[-1]
        assert back.t == pytest.approx(0.0, abs=1e-9)
        np.testing.assert_allclose(back.eps, start.eps, atol=1e-8)
        np.testing.assert_allclose(back.deps, start.deps, atol=1e-8 * two_modes.k[-1])

    def test_advance_records_every_stride(self, two_modes):
        drive = make_drive(two_modes, 2 * two_modes.k[0])
        coupling = coupling_coefficients(two_modes, drive)
        states, _ = advance(ModeState.initial(two_modes.k), coupling, drive, 0.01, 25, True, record_stride=10)
        assert [round(s.t, 9) for s in states] == [0.1, 0.2, 0.25]


class TestWronskian:
    def test_vacuum_value(self, table):
        state = ModeState.initial(table.k)
        np.testing.assert_allclose(wronskian(state), -2j * np.diag(table.k), atol=1e-15)
        assert wronskian_deviation(state, table.k) == 0.0

    def test_conserved_under_resonant_drive(self):
        simulation = simulate(make_run(t_F=100.0, t_max=120.0, n_modes=6, record_stride=50))
        assert simulation.wronskian_deviation < 1e-6
        assert simulation.result.unitarity_deviation < 1e-5
