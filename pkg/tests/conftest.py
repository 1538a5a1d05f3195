import numpy as np
import pytest

from dce.cavity import CouplingSet, coupling_coefficients, solve_spectrum
from shared.schema import CavityConfig, DriveConfig, DriveSpec, IntegratorConfig, OutputConfig, RunConfig


@pytest.fixture
def symmetric_cavity():
    return CavityConfig(chi0=0.05, b0L=1.0, b0R=1.0)


@pytest.fixture
def stiff_cavity():
    return CavityConfig(chi0=0.05, b0L=500.0, b0R=500.0)


@pytest.fixture
def table(symmetric_cavity):
    return solve_spectrum(symmetric_cavity, 6)


def make_drive(table, omega_L, omega_R=None, epsilon=0.01, phi_R=0.0, t_F=100.0, t_max=120.0, **extra):
    """Resolved drive for explicit frequencies (floats, already in units of k)."""
    return DriveConfig(epsilon=epsilon, omega_L=omega_L, omega_R=omega_L if omega_R is None else omega_R,
                       phi_R=phi_R, t_F=t_F, t_max=t_max, **extra)


def make_run(omega_L='2*k1', omega_R=None, b0L=1.0, b0R=1.0, epsilon=0.01, phi_R=0.0, t_F=60.0, t_max=80.0,
             n_modes=4, record_stride=10, dt=None, directory='out', **cavity):
    return RunConfig(
        cavity=CavityConfig(chi0=0.05, b0L=b0L, b0R=b0R, **cavity),
        drive=DriveSpec(epsilon=epsilon, omega_L=omega_L, omega_R=omega_R or omega_L,
                        phi_R=phi_R, t_F=t_F, t_max=t_max),
        integrator=IntegratorConfig(n_modes=n_modes, record_stride=record_stride, dt=dt),
        output=OutputConfig(directory=directory),
    )


def synthetic_coupling(k, alpha_L=None, alpha_R=None, S_L=None, S_R=None) -> CouplingSet:
    k = np.asarray(k, dtype=float)
    n = len(k)
    zero_vec, zero_mat = np.zeros(n), np.zeros((n, n))
    return CouplingSet(
        k=k,
        alpha_L=np.asarray(alpha_L if alpha_L is not None else zero_vec, dtype=float),
        alpha_R=np.asarray(alpha_R if alpha_R is not None else zero_vec, dtype=float),
        S_L=np.asarray(S_L if S_L is not None else zero_mat, dtype=float),
        S_R=np.asarray(S_R if S_R is not None else zero_mat, dtype=float),
    )


def coupling_for(table, drive):
    return coupling_coefficients(table, drive)
