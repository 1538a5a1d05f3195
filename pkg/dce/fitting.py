"""Growth-curve fits for N_n(t) and the MSA-versus-numerics comparison."""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from error_handler import NoExponentialWindow

logger = logging.getLogger(__name__)

MIN_PARTICLES = 10.0
MIN_WINDOW_SAMPLES = 5
AGREEMENT = 0.10


@dataclass(frozen=True)
class QuadraticFit:
    coefficient: float
    r_squared: float


@dataclass(frozen=True)
class ExponentialFit:
    slope: float
    intercept: float
    r_squared: float
    window: Tuple[float, float]
    samples: int


@dataclass(frozen=True)
class Comparison:
    mode: int
    predicted_exponent: float
    fitted: Optional[ExponentialFit]
    growth_predicted: bool

    @property
    def fitted_exponent(self) -> Optional[float]:
        return None if self.fitted is None else self.fitted.slope

    @property
    def relative_deviation(self) -> Optional[float]:
        if self.fitted is None or not self.growth_predicted:
            return None
        return abs(self.fitted.slope - self.predicted_exponent) / self.predicted_exponent

    @property
    def consistent(self) -> bool:
        if not self.growth_predicted:
            return self.fitted is None
        return self.relative_deviation is not None and self.relative_deviation < AGREEMENT


def _r_squared(y: np.ndarray, model: np.ndarray) -> float:
    total = np.sum((y - y.mean())**2)
    if total == 0:
        return 1.0 if np.allclose(y, model) else 0.0
    return float(1.0 - np.sum((y - model)**2) / total)


def fit_quadratic(times: np.ndarray, values: np.ndarray) -> QuadraticFit:
    """Least-squares N = c t² through the origin."""
    times, values = np.asarray(times, dtype=float), np.asarray(values, dtype=float)
    basis = times**2
    denominator = np.dot(basis, basis)
    if denominator == 0:
        raise ValueError("quadratic fit needs at least one non-zero time")
    c = float(np.dot(basis, values) / denominator)
    return QuadraticFit(coefficient=c, r_squared=_r_squared(values, c * basis))


def exponential_window(times: np.ndarray, values: np.ndarray, t_end: Optional[float] = None,
                       min_particles: float = MIN_PARTICLES) -> np.ndarray:
    """Mask of the trailing run of samples with N ≥ min_particles up to t_end."""
    times, values = np.asarray(times), np.asarray(values)
    mask = values >= min_particles
    if t_end is not None:
        mask &= times <= t_end * (1 + 1e-12)
    indices = np.nonzero(mask)[0]
    if len(indices) == 0:
        return mask
    last = indices[-1]
    first = last
    while first > 0 and mask[first - 1]:
        first -= 1
    window = np.zeros_like(mask)
    window[first:last + 1] = True
    return window


def fit_exponential_window(times: np.ndarray, values: np.ndarray, t_end: Optional[float] = None,
                           min_particles: float = MIN_PARTICLES) -> Optional[ExponentialFit]:
    """Log-linear fit log N = a + s t over the exponential window, or None if it is too short."""
    times, values = np.asarray(times, dtype=float), np.asarray(values, dtype=float)
    window = exponential_window(times, values, t_end, min_particles)
    if window.sum() < MIN_WINDOW_SAMPLES:
        return None
    t, log_n = times[window], np.log(values[window])
    slope, intercept = np.polyfit(t, log_n, 1)
    fit = ExponentialFit(slope=float(slope), intercept=float(intercept),
                         r_squared=_r_squared(log_n, slope * t + intercept),
                         window=(float(t[0]), float(t[-1])), samples=int(window.sum()))
    logger.debug(f"exponential fit slope {fit.slope:.6g} over [{fit.window[0]:g}, {fit.window[1]:g}]")
    return fit


def compare(predicted_rate: float, times: np.ndarray, history: np.ndarray, mode: int,
            t_F: Optional[float] = None, min_particles: float = MIN_PARTICLES) -> Comparison:
    """Fit mode n's growth and set it against 2× the predicted amplitude rate.

    Raises NoExponentialWindow when growth is predicted but none is visible.
    """
    values = np.asarray(history)[:, mode - 1] if np.ndim(history) == 2 else np.asarray(history)
    fit = fit_exponential_window(times, values, t_F, min_particles)
    growth = bool(predicted_rate > 0)
    if growth and fit is None:
        raise NoExponentialWindow(
            f"mode {mode}: predicted exponent {2 * predicted_rate:.6g} but N never stays above "
            f"{min_particles:g} for {MIN_WINDOW_SAMPLES} samples"
        )
    return Comparison(mode=mode, predicted_exponent=2.0 * predicted_rate, fitted=fit, growth_predicted=growth)
