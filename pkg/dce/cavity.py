"""Static cavity: transcendental spectrum, mode normalizations and drive couplings.

Units are d = v = 1 throughout, so k_n is the dimensionless k_n d.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Tuple

import numpy as np

from error_handler import ConvergenceFailure, InsufficientRoots
from shared.schema import CavityConfig, DriveConfig

logger = logging.getLogger(__name__)

GRID_STEP = math.pi / 200
ROOT_TOLERANCE = 1e-12
RESIDUAL_LIMIT = 1e-6
MAX_ITERATIONS = 100


@dataclass(frozen=True)
class Mode:
    index: int
    k: float
    phi: float
    M: float


@dataclass(frozen=True, eq=False)
class ModeTable:
    modes: Tuple[Mode, ...]
    config: CavityConfig

    def __len__(self):
        return len(self.modes)

    @cached_property
    def k(self) -> np.ndarray:
        return np.array([m.k for m in self.modes])

    @cached_property
    def phi(self) -> np.ndarray:
        return np.array([m.phi for m in self.modes])

    @cached_property
    def M(self) -> np.ndarray:
        return np.array([m.M for m in self.modes])

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.k)

    def truncated(self, n_modes: int) -> 'ModeTable':
        return ModeTable(modes=self.modes[:n_modes], config=self.config)


@dataclass(frozen=True, eq=False)
class CouplingSet:
    """Parametric amplitudes α_n^{L,R} and symmetric intermode couplings S^{L,R}_{mn}.

    S matrices carry a zero diagonal; the generators add α back on it, which
    is the full rank-one boundary coupling of each SQUID.
    """
    k: np.ndarray
    alpha_L: np.ndarray
    alpha_R: np.ndarray
    S_L: np.ndarray
    S_R: np.ndarray

    @property
    def generator_L(self) -> np.ndarray:
        return self.S_L + np.diag(self.alpha_L)

    @property
    def generator_R(self) -> np.ndarray:
        return self.S_R + np.diag(self.alpha_R)


def mode_phase(k, config: CavityConfig):
    """Phase φ on the principal branch from −k tan φ + χ0 k² = b0L."""
    k = np.asarray(k, dtype=float)
    return np.arctan((config.chi0 * k**2 - config.b0L) / k)


def spectrum_residual(k, config: CavityConfig):
    """Pole-free form of k tan(k + φ) + χ0 k² = b0R."""
    k = np.asarray(k, dtype=float)
    theta = k + mode_phase(k, config)
    return k * np.sin(theta) - (config.b0R - config.chi0 * k**2) * np.cos(theta)


def _residual_derivative(k: float, config: CavityConfig) -> float:
    u = (config.chi0 * k**2 - config.b0L) / k
    dphi = (config.chi0 + config.b0L / k**2) / (1.0 + u**2)
    theta = k + math.atan(u)
    dtheta = 1.0 + dphi
    edge = config.b0R - config.chi0 * k**2
    return (math.sin(theta) + k * math.cos(theta) * dtheta
            + 2.0 * config.chi0 * k * math.cos(theta) + edge * math.sin(theta) * dtheta)


def equation_residuals(k: float, phi: float, config: CavityConfig) -> Tuple[float, float]:
    """Both lines of the spectrum equations in their raw tangent form."""
    right = k * math.tan(k + phi) + config.chi0 * k**2 - config.b0R
    left = -k * math.tan(phi) + config.chi0 * k**2 - config.b0L
    return right, left


def _refine_root(lo: float, hi: float, config: CavityConfig) -> float:
    """Newton-Raphson kept inside the bracket, bisecting when a step leaves it."""
    f_lo = float(spectrum_residual(lo, config))
    x = 0.5 * (lo + hi)
    for iteration in range(MAX_ITERATIONS):
        fx = float(spectrum_residual(x, config))
        if fx == 0.0:
            return x
        if (fx > 0) == (f_lo > 0):
            lo, f_lo = x, fx
        else:
            hi = x
        slope = _residual_derivative(x, config)
        candidate = x - fx / slope if slope != 0.0 else math.nan
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - x) < ROOT_TOLERANCE * max(1.0, x) or hi - lo < ROOT_TOLERANCE * max(1.0, x):
            logger.debug(f"root {candidate:.12f} after {iteration + 1} iterations")
            return candidate
        x = candidate
    raise ConvergenceFailure(f"Bracket [{lo}, {hi}] did not converge in {MAX_ITERATIONS} iterations")


def mode_normalization(k: float, phi: float, config: CavityConfig) -> float:
    theta = k + phi
    return (1.0 + math.sin(2.0 * theta) / (2.0 * k) - math.sin(2.0 * phi) / (2.0 * k)
            + 2.0 * config.chi0 * math.cos(theta)**2)


def solve_spectrum(config: CavityConfig, n_modes: int, grid_step: float = GRID_STEP) -> ModeTable:
    """First n_modes eigenfrequencies, bracketed on a uniform grid and refined."""
    if n_modes < 1:
        raise ValueError(f"n_modes must be at least 1, got {n_modes}")
    ceiling = 4.0 * math.pi * n_modes
    grid = np.arange(1, int(ceiling / grid_step) + 1) * grid_step
    values = spectrum_residual(grid, config)
    brackets = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]

    modes = []
    for i in brackets:
        k = _refine_root(float(grid[i]), float(grid[i + 1]), config)
        phi = float(mode_phase(k, config))
        if abs(math.cos(k + phi)) < 1e-12:
            logger.debug(f"discarding spurious sign change at k={k}")
            continue
        right, left = equation_residuals(k, phi, config)
        scale = 1.0 + abs(config.b0R) + config.chi0 * k**2
        if abs(right) > RESIDUAL_LIMIT * scale or abs(left) > RESIDUAL_LIMIT * (1.0 + abs(config.b0L)):
            raise ConvergenceFailure(f"Root k={k} leaves residuals ({right:.3e}, {left:.3e})")
        modes.append(Mode(index=len(modes) + 1, k=k, phi=phi, M=mode_normalization(k, phi, config)))
        if len(modes) == n_modes:
            break

    if len(modes) < n_modes:
        raise InsufficientRoots(f"Found {len(modes)} of {n_modes} modes below k={ceiling:.3f}")
    return ModeTable(modes=tuple(modes), config=config)


@lru_cache(maxsize=256)
def cached_spectrum(config: CavityConfig, n_modes: int) -> ModeTable:
    return solve_spectrum(config, n_modes)


def coupling_coefficients(table: ModeTable, drive: DriveConfig) -> CouplingSet:
    config = table.config
    left_edge = np.cos(table.phi) / np.sqrt(table.M)
    right_edge = np.cos(table.k + table.phi) / np.sqrt(table.M)
    # sin f(0) taken at the static offset f0
    strength_L = 2.0 * config.V0L * drive.eps_L * math.sin(config.f0L)
    strength_R = 2.0 * config.V0R * drive.eps_R * math.sin(config.f0R)
    full_L = strength_L * np.outer(left_edge, left_edge)
    full_R = strength_R * np.outer(right_edge, right_edge)
    alpha_L = np.diag(full_L).copy()
    alpha_R = np.diag(full_R).copy()
    np.fill_diagonal(full_L, 0.0)
    np.fill_diagonal(full_R, 0.0)
    return CouplingSet(k=table.k.copy(), alpha_L=alpha_L, alpha_R=alpha_R, S_L=full_L, S_R=full_R)


def verify_static_boundary(table: ModeTable, config: CavityConfig = None) -> np.ndarray:
    """Boundary-condition residuals of each static mode, shape (n_modes, 2) as (left, right).

    With φ(x, t) = cos(kx + φ) e^{-ikt} the boundary equations read
    χ0 φ̈ + b0L φ - φ' = 0 at x = 0 and χ0 φ̈ + b0R φ + φ' = 0 at x = 1.
    Each residual is divided by |b0| + χ0 k² + k so that the Dirichlet limit
    b0 → ∞ stays finite.
    """
    config = config or table.config
    residuals = np.empty((len(table), 2))
    for row, mode in enumerate(table.modes):
        k, phi = mode.k, mode.phi
        theta = k + phi
        left = (config.b0L - config.chi0 * k**2) * math.cos(phi) + k * math.sin(phi)
        right = (config.b0R - config.chi0 * k**2) * math.cos(theta) - k * math.sin(theta)
        residuals[row, 0] = left / (abs(config.b0L) + config.chi0 * k**2 + k)
        residuals[row, 1] = right / (abs(config.b0R) + config.chi0 * k**2 + k)
    return np.abs(residuals)
