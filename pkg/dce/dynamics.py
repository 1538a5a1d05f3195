"""Time evolution of the coupled mode functions ε_nm(t).

The mode equations ε̈_nm + ω_n²(t) ε_nm = Σ_j σ_nj(t) ε_jm are advanced as the
first-order system (ε, U = ε̇) with a fixed-step Runge-Kutta-Merson scheme.
Complex matrices are carried as real arrays with the real and imaginary parts
side by side, so the state has shape (2, N, 2N).
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from dce.cavity import CouplingSet, ModeTable
from error_handler import NonFiniteState, StepTooLarge
from shared.schema import DriveConfig, IntegratorConfig

logger = logging.getLogger(__name__)

STEPS_PER_PERIOD = 100
MIN_STEPS_PER_PERIOD = 40


@dataclass(frozen=True, eq=False)
class ModeState:
    t: float
    eps: np.ndarray
    deps: np.ndarray

    @classmethod
    def initial(cls, k: np.ndarray) -> 'ModeState':
        """In-vacuum conditions ε_nm(0) = δ_nm, ε̇_nm(0) = -i k_n δ_nm."""
        return cls(t=0.0, eps=np.eye(len(k), dtype=complex), deps=np.diag(-1j * np.asarray(k)))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded states; eps and deps have shape (samples, N, N)."""
    times: np.ndarray
    eps: np.ndarray
    deps: np.ndarray
    t_F: float
    dt_drive: float
    dt_static: float
    max_error_estimate: float

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> ModeState:
        return ModeState(t=float(self.times[i]), eps=self.eps[i], deps=self.deps[i])

    def states(self) -> Iterator[ModeState]:
        for i in range(len(self)):
            yield self.state(i)

    @property
    def final(self) -> ModeState:
        return self.state(len(self) - 1)

    def at_or_after(self, t: float) -> ModeState:
        """First recorded state at time ≥ t."""
        index = int(np.searchsorted(self.times, t - 1e-12))
        if index >= len(self):
            raise ValueError(f"trajectory ends at t={self.times[-1]}, before t={t}")
        return self.state(index)


def default_step(table: ModeTable) -> float:
    return 2.0 * math.pi / (STEPS_PER_PERIOD * float(table.k[-1]))


def stability_limit(table: ModeTable) -> float:
    return 2.0 * math.pi / (MIN_STEPS_PER_PERIOD * float(table.k[-1]))


def drive_signals(t: float, drive: DriveConfig) -> Tuple[float, float]:
    """Sine factors of both drives, zero outside the open window (0, t_F)."""
    if not 0.0 < t < drive.t_F:
        return 0.0, 0.0
    return (math.sin(drive.omega_L * t + drive.phi_L),
            math.sin(drive.omega_R * t + drive.phi_R))


def instantaneous_frequency(n: int, t: float, coupling: CouplingSet, drive: DriveConfig) -> float:
    """ω_n²(t) for the 1-based mode index n."""
    s_L, s_R = drive_signals(t, drive)
    i = n - 1
    return float(coupling.k[i]**2 - (coupling.alpha_L[i] * s_L + coupling.alpha_R[i] * s_R))


def coupling_at(t: float, coupling: CouplingSet, drive: DriveConfig) -> np.ndarray:
    s_L, s_R = drive_signals(t, drive)
    return coupling.S_L * s_L + coupling.S_R * s_R


def _pack(eps: np.ndarray, deps: np.ndarray) -> np.ndarray:
    return np.stack([np.hstack([eps.real, eps.imag]), np.hstack([deps.real, deps.imag])])


def _unpack(y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = y.shape[1]
    return y[0, :, :n] + 1j * y[0, :, n:], y[1, :, :n] + 1j * y[1, :, n:]


class _ModeSystem:
    """Right-hand side y' = (U, K(t) ε) with K = -diag(k²) + s_L G_L + s_R G_R."""

    def __init__(self, coupling: CouplingSet, drive: DriveConfig):
        self.drive = drive
        self.static = -np.diag(coupling.k**2)
        self.G_L = coupling.generator_L
        self.G_R = coupling.generator_R

    def generator(self, t: float, driven: bool) -> np.ndarray:
        if not driven:
            return self.static
        s_L = math.sin(self.drive.omega_L * t + self.drive.phi_L)
        s_R = math.sin(self.drive.omega_R * t + self.drive.phi_R)
        return self.static + s_L * self.G_L + s_R * self.G_R

    def __call__(self, t: float, y: np.ndarray, driven: bool) -> np.ndarray:
        out = np.empty_like(y)
        out[0] = y[1]
        np.matmul(self.generator(t, driven), y[0], out=out[1])
        return out


def merson_step(system: _ModeSystem, t: float, y: np.ndarray, h: float, driven: bool,
                estimate: bool = False) -> Tuple[np.ndarray, float]:
    """One Runge-Kutta-Merson step; the error estimate is computed only on request."""
    k1 = system(t, y, driven)
    k2 = system(t + h / 3, y + (h / 3) * k1, driven)
    k3 = system(t + h / 3, y + (h / 6) * (k1 + k2), driven)
    k4 = system(t + h / 2, y + (h / 8) * (k1 + 3 * k3), driven)
    k5 = system(t + h, y + (h / 2) * (k1 - 3 * k3 + 4 * k4), driven)
    y_new = y + (h / 6) * (k1 + 4 * k4 + k5)
    error = 0.0
    if estimate:
        error = float(np.max(np.abs((h / 30) * (2 * k1 - 9 * k3 + 8 * k4 - k5))))
    return y_new, error


def advance(state: ModeState, coupling: CouplingSet, drive: DriveConfig, dt: float, n_steps: int,
            driven: bool, record_stride: Optional[int] = None) -> Tuple[List[ModeState], float]:
    """Take n_steps fixed steps of size dt (negative dt integrates backwards).

    Returns the states recorded every record_stride steps, always including
    the last one, and the largest Merson error estimate seen at those steps.
    """
    system = _ModeSystem(coupling, drive)
    stride = record_stride or n_steps or 1
    y = _pack(state.eps, state.deps)
    t0 = state.t
    recorded, worst = [], 0.0
    for step in range(1, n_steps + 1):
        is_record = step % stride == 0 or step == n_steps
        y, error = merson_step(system, t0 + (step - 1) * dt, y, dt, driven, estimate=is_record)
        if is_record:
            if not np.isfinite(y).all():
                raise NonFiniteState(f"state became non-finite at t={t0 + step * dt:.6g}")
            worst = max(worst, error)
            eps, deps = _unpack(y)
            recorded.append(ModeState(t=t0 + step * dt, eps=eps, deps=deps))
    return recorded, worst


def _segment_step(length: float, dt: float) -> Tuple[int, float]:
    if length <= 0:
        return 0, dt
    n_steps = max(1, math.ceil(length / dt - 1e-9))
    return n_steps, length / n_steps


def integrate(table: ModeTable, coupling: CouplingSet, drive: DriveConfig, icfg: IntegratorConfig,
              t_stop: Optional[float] = None) -> Trajectory:
    """Integrate from the vacuum initial state over [0, t_stop] (default t_max).

    The driven window [0, t_F] and the static tail are separate segments whose
    step sizes are shrunk so t_F falls on a step boundary.
    """
    if len(table) != len(coupling.k):
        raise ValueError(f"mode table has {len(table)} modes but couplings cover {len(coupling.k)}")
    dt = icfg.dt or default_step(table)
    limit = stability_limit(table)
    if dt > limit:
        raise StepTooLarge(f"dt={dt:.6g} exceeds the stability bound 2π/(40 k_N)={limit:.6g}")
    t_end = drive.t_max if t_stop is None else t_stop

    n_drive, h_drive = _segment_step(min(drive.t_F, t_end), dt)
    n_static, h_static = _segment_step(t_end - drive.t_F, dt)
    logger.info(f"Integrating {len(table)} modes to t={t_end:g}: {n_drive} driven + {n_static} static steps")

    state = ModeState.initial(table.k)
    states = [state]
    driven, error_drive = advance(state, coupling, drive, h_drive, n_drive, True, icfg.record_stride)
    states.extend(driven)
    error_static = 0.0
    if n_static:
        static, error_static = advance(states[-1], coupling, drive, h_static, n_static, False,
                                       icfg.record_stride)
        states.extend(static)
    worst = max(error_drive, error_static)
    logger.debug(f"max Merson error estimate {worst:.3e}")

    return Trajectory(
        times=np.array([s.t for s in states]),
        eps=np.stack([s.eps for s in states]),
        deps=np.stack([s.deps for s in states]),
        t_F=drive.t_F,
        dt_drive=h_drive,
        dt_static=h_static,
        max_error_estimate=worst,
    )


def wronskian(state: ModeState) -> np.ndarray:
    """W_mj = Σ_n (ε̇_nm ε*_nj - ε_nm ε̇*_nj)."""
    return state.deps.T @ state.eps.conj() - state.eps.T @ state.deps.conj()


def wronskian_deviation(state: ModeState, k: np.ndarray) -> float:
    """max_mj |W_mj + 2i k_m δ_mj| / (2 k_m)."""
    k = np.asarray(k)
    excess = wronskian(state) + 2j * np.diag(k)
    return float(np.max(np.abs(excess) / (2.0 * k[:, None])))


def trajectory_deviation(trajectory: Trajectory, k: np.ndarray) -> float:
    return max(wronskian_deviation(s, k) for s in trajectory.states())
