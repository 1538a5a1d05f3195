"""Full pipeline for one run: spectrum, couplings, integration and extraction."""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from dce.bogoliubov import BogoliubovResult, particle_number_history, project_bogoliubov
from dce.cavity import CouplingSet, ModeTable, cached_spectrum, coupling_coefficients
from dce.dynamics import Trajectory, integrate, trajectory_deviation
from error_handler import ConfigError
from shared.schema import DriveConfig, RunConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Simulation:
    config: RunConfig
    table: ModeTable
    coupling: CouplingSet
    drive: DriveConfig
    trajectory: Trajectory
    result: BogoliubovResult
    times: np.ndarray
    history: np.ndarray
    wronskian_deviation: float


def resolve_drive(run: RunConfig, table: ModeTable) -> DriveConfig:
    try:
        return run.drive.resolve(table.k)
    except ValueError as e:
        raise ConfigError(f"[drive] {e}") from e


def prepare(run: RunConfig) -> Tuple[ModeTable, DriveConfig, CouplingSet]:
    table = cached_spectrum(run.cavity, run.integrator.n_modes)
    drive = resolve_drive(run, table)
    return table, drive, coupling_coefficients(table, drive)


def drive_until(drive: DriveConfig, t: float) -> DriveConfig:
    """Same drive, kept on up to t."""
    return drive.model_copy(update={'t_F': t, 't_max': max(drive.t_max, 2.0 * t)})


def simulate(run: RunConfig, t_stop: Optional[float] = None, drive: Optional[DriveConfig] = None) -> Simulation:
    table, resolved, coupling = prepare(run)
    drive = drive or resolved
    logger.info(f"Simulating Ω_L={drive.omega_L:.6g}, Ω_R={drive.omega_R:.6g}, "
                f"φ_R-φ_L={drive.phi_R - drive.phi_L:.4g}, t_F={drive.t_F:g}")
    trajectory = integrate(table, coupling, drive, run.integrator, t_stop=t_stop)
    convention = run.output.convention
    final = trajectory.final
    result = project_bogoliubov(final, table, drive.t_F, convention, switch_off=final.t < drive.t_F)
    times, history = particle_number_history(trajectory, table, convention)
    return Simulation(
        config=run,
        table=table,
        coupling=coupling,
        drive=drive,
        trajectory=trajectory,
        result=result,
        times=times,
        history=history,
        wronskian_deviation=trajectory_deviation(trajectory, table.k),
    )


def particle_number_at(run: RunConfig, mode: int, t: float) -> Tuple[float, Simulation]:
    """N_mode with the drive on until t and switched off there."""
    table, drive, _ = prepare(run)
    simulation = simulate(run, t_stop=t, drive=drive_until(drive, t))
    return float(simulation.result.N[mode - 1]), simulation
