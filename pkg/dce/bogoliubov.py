"""Bogoliubov coefficients and particle numbers from mode functions.

In a static region ε_nm(t) = α_nm e^{-i k_n t} + β_nm e^{i k_n t}, and the
number of particles created in mode n is N_n = Σ_m |β_nm|².
"""
import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np

from dce.cavity import ModeTable
from dce.dynamics import ModeState, Trajectory
from error_handler import AnalysisError, PreStaticRegion, WindowTooShort

logger = logging.getLogger(__name__)

Convention = Literal['plain', 'k-weighted']

MIN_WINDOW_PERIODS = 10
STATIC_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class BogoliubovResult:
    alpha: np.ndarray
    beta: np.ndarray
    N: np.ndarray
    t_eval: float
    k: np.ndarray
    convention: Convention = 'plain'

    def unitarity_matrix(self) -> np.ndarray:
        """Σ_n k_n (α_nm α*_nj - β_nm β*_nj)."""
        weights = self.k[:, None]
        return (self.alpha * weights).T @ self.alpha.conj() - (self.beta * weights).T @ self.beta.conj()

    @property
    def unitarity_deviation(self) -> float:
        """Largest |Σ_n k_n(α α* - β β*)_mj - k_m δ_mj| / k_m."""
        excess = self.unitarity_matrix() - np.diag(self.k)
        return float(np.max(np.abs(excess) / self.k[:, None]))


def particle_numbers(beta: np.ndarray, k: np.ndarray, convention: Convention = 'plain') -> np.ndarray:
    weight = np.abs(beta)**2
    if convention == 'k-weighted':
        weight = weight * (k[:, None] / k[None, :])
    elif convention != 'plain':
        raise ValueError(f"unknown particle-number convention '{convention}'")
    return weight.sum(axis=1)


def project_bogoliubov(state: ModeState, table: ModeTable, t_F: Optional[float] = None,
                       convention: Convention = 'plain', switch_off: bool = False) -> BogoliubovResult:
    """Instantaneous projection onto e^{∓i k_n t}.

    Exact when state.t ≥ t_F. With switch_off the drive is taken to stop at
    state.t, which is how particle growth curves are read during the drive.
    """
    if not switch_off and t_F is not None and state.t < t_F - STATIC_TOLERANCE * max(1.0, t_F):
        raise PreStaticRegion(f"projection at t={state.t:g} lies inside the drive window ending at t_F={t_F:g}")
    k = table.k[:, None]
    t = state.t
    alpha = np.exp(1j * k * t) * (state.eps + 1j * state.deps / k) / 2
    beta = np.exp(-1j * k * t) * (state.eps - 1j * state.deps / k) / 2
    return BogoliubovResult(alpha=alpha, beta=beta, N=particle_numbers(beta, table.k, convention),
                            t_eval=t, k=table.k, convention=convention)


def average_bogoliubov(trajectory: Trajectory, table: ModeTable, window: Optional[Tuple[float, float]] = None,
                       convention: Convention = 'plain', correct_leakage: bool = True) -> BogoliubovResult:
    """Time-averaged extraction over a static window.

    The mean of ε e^{-ikt} gives β plus a leakage term α·mean(e^{-2ikt});
    with correct_leakage both means are solved jointly for α and β, which
    removes the leakage exactly for a two-term signal.
    """
    t_lo, t_hi = window if window is not None else (trajectory.t_F, float(trajectory.times[-1]))
    if t_lo < trajectory.t_F - STATIC_TOLERANCE * max(1.0, trajectory.t_F):
        raise PreStaticRegion(f"averaging window starts at t={t_lo:g}, before t_F={trajectory.t_F:g}")
    slowest = 2.0 * math.pi / float(table.k[0])
    if t_hi - t_lo < MIN_WINDOW_PERIODS * slowest:
        raise WindowTooShort(
            f"window [{t_lo:g}, {t_hi:g}] spans {(t_hi - t_lo) / slowest:.2f} periods of mode 1, "
            f"need {MIN_WINDOW_PERIODS}"
        )
    tol = STATIC_TOLERANCE * max(1.0, t_hi)
    mask = (trajectory.times >= t_lo - tol) & (trajectory.times <= t_hi + tol)
    times = trajectory.times[mask]
    eps = trajectory.eps[mask]
    if len(times) < 3:
        raise WindowTooShort(f"only {len(times)} recorded samples inside [{t_lo:g}, {t_hi:g}]")
    span = times[-1] - times[0]

    phase = np.exp(-1j * np.outer(times, table.k))[:, :, None]
    m1 = np.trapezoid(eps * phase, times, axis=0) / span
    m2 = np.trapezoid(eps * phase.conj(), times, axis=0) / span
    if correct_leakage:
        c = np.trapezoid(phase[:, :, 0]**2, times, axis=0)[:, None] / span
        denominator = 1.0 - np.abs(c)**2
        if np.min(denominator) < 1e-8:
            raise AnalysisError("recorded samples alias 2k_n to zero frequency; lower record_stride")
        alpha = (m2 - c.conj() * m1) / denominator
        beta = m1 - c * alpha
    else:
        alpha, beta = m2, m1
    logger.debug(f"averaged {len(times)} samples over [{times[0]:g}, {times[-1]:g}]")
    return BogoliubovResult(alpha=alpha, beta=beta, N=particle_numbers(beta, table.k, convention),
                            t_eval=float(times[-1]), k=table.k, convention=convention)


def particle_number_history(trajectory: Trajectory, table: ModeTable,
                            convention: Convention = 'plain') -> Tuple[np.ndarray, np.ndarray]:
    """N_n(t) at every recorded time, shape (samples, n_modes)."""
    history = np.empty((len(trajectory), len(table)))
    for i, state in enumerate(trajectory.states()):
        history[i] = project_bogoliubov(state, table, convention=convention, switch_off=True).N
    return trajectory.times.copy(), history
