"""First-order multiple-scale analysis of the driven cavity.

The slow amplitudes in ε_n = A_n e^{-i k_n t} + B_n e^{i k_n t} obey a linear
system dX/dt = M X whose entries are non-zero only for drive frequencies that
hit 2k_n, k_n + k_m or |k_n - k_m|. Rates are growth rates of the amplitudes;
particle numbers grow at twice the rate.
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from dce.cavity import CouplingSet, ModeTable
from error_handler import CaseUnmatched, ClosedFormMismatch
from shared.schema import DriveConfig

logger = logging.getLogger(__name__)

Kind = Literal['diagonal', 'sum', 'difference']
Side = Literal['L', 'R']
Regime = Literal['single-mode', 'two-mode-sum', 'two-mode-difference', 'two-frequency', 'general', 'none']
Case = Literal['diagonal-difference', 'sum-difference']

CLASSIFY_TOLERANCE = 1e-9
CLOSED_FORM_TOLERANCE = 1e-10
DOUBLE_ROOT_SLACK = 100.0
SUPPORT_THRESHOLD = 1e-8


@dataclass(frozen=True)
class ResonanceCondition:
    kind: Kind
    side: Side
    modes: Tuple[int, ...]
    target: float


@dataclass(frozen=True)
class ResonanceReport:
    conditions: Tuple[ResonanceCondition, ...]
    tolerance: float

    def __bool__(self):
        return bool(self.conditions)

    def on_side(self, side: Side) -> List[ResonanceCondition]:
        return [c for c in self.conditions if c.side == side]


@dataclass(frozen=True)
class TwoFrequencySolution:
    eigenvalues: Tuple[complex, ...]
    closed_form: Optional[Tuple[complex, ...]] = None
    deviation: Optional[float] = None

    @property
    def growth_rate(self) -> float:
        return max(0.0, max(l.real for l in self.eigenvalues))

    @property
    def no_growth(self) -> bool:
        return all(l.real <= SUPPORT_THRESHOLD for l in self.eigenvalues)


@dataclass(frozen=True)
class MsaPrediction:
    regime: Regime
    rate: float
    report: ResonanceReport
    relative_phase: float
    oscillatory: bool = False
    no_growth: bool = False
    beat_frequency: Optional[float] = None
    eigenvalues: Optional[Tuple[complex, ...]] = None
    closed_form_deviation: Optional[float] = None
    mode_rates: Dict[int, float] = field(default_factory=dict)

    @property
    def particle_exponent(self) -> float:
        """Exponent of N_n(t) ∝ e^{2Γt}."""
        return 2.0 * self.rate


def relative_phase(drive: DriveConfig) -> float:
    """φ_R - φ_L folded into (-π, π]; MSA formulas take φ_L = 0."""
    phi = math.remainder(drive.phi_R - drive.phi_L, 2.0 * math.pi)
    return math.pi if math.isclose(phi, -math.pi) else phi


def default_tolerance(table: ModeTable) -> float:
    return CLASSIFY_TOLERANCE * float(table.k[0])


def classify_resonances(table: ModeTable, drive: DriveConfig, tol: Optional[float] = None) -> ResonanceReport:
    tol = default_tolerance(table) if tol is None else tol
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    k = table.k
    conditions = []
    for side, omega in (('L', drive.omega_L), ('R', drive.omega_R)):
        for n in range(len(k)):
            if abs(omega - 2 * k[n]) <= tol:
                conditions.append(ResonanceCondition('diagonal', side, (n + 1,), float(2 * k[n])))
            for m in range(n + 1, len(k)):
                if abs(omega - (k[n] + k[m])) <= tol:
                    conditions.append(ResonanceCondition('sum', side, (n + 1, m + 1), float(k[n] + k[m])))
                if abs(omega - (k[m] - k[n])) <= tol:
                    conditions.append(ResonanceCondition('difference', side, (n + 1, m + 1), float(k[m] - k[n])))
    logger.debug(f"{len(conditions)} resonance conditions at tolerance {tol:.3e}")
    return ResonanceReport(conditions=tuple(conditions), tolerance=tol)


def single_mode_rate(coupling: CouplingSet, n: int, phi_R: float) -> float:
    a_L, a_R = coupling.alpha_L[n - 1], coupling.alpha_R[n - 1]
    radicand = a_R**2 + a_L**2 + 2 * a_R * a_L * math.cos(phi_R)
    return math.sqrt(max(radicand, 0.0)) / (4.0 * coupling.k[n - 1])


def _pair_strength(coupling: CouplingSet, n: int, m: int, phi_R: float) -> float:
    """|S^L_mn + S^R_mn e^{-iφ_R}| / (4√(k_n k_m))."""
    i, j = n - 1, m - 1
    gamma = coupling.S_L[i, j] + coupling.S_R[i, j] * cmath.exp(-1j * phi_R)
    return abs(gamma) / (4.0 * math.sqrt(coupling.k[i] * coupling.k[j]))


def two_mode_sum_rate(coupling: CouplingSet, n: int, m: int, phi_R: float) -> float:
    if n == m:
        raise ValueError("the sum resonance couples two distinct modes")
    return _pair_strength(coupling, n, m, phi_R)


def two_mode_difference_behavior(coupling: CouplingSet, n: int, m: int, phi_R: float) -> Tuple[float, float]:
    """(rate, beat frequency); the difference resonance only exchanges energy between modes."""
    if n == m:
        raise ValueError("the difference resonance couples two distinct modes")
    return 0.0, _pair_strength(coupling, n, m, phi_R)


def slow_amplitude_matrix(coupling: CouplingSet, drive: DriveConfig, modes: Optional[Sequence[int]] = None,
                          tol: Optional[float] = None) -> np.ndarray:
    """First-order system over (A_p1, B_p1, A_p2, B_p2, ...) for the chosen 1-based modes.

    Each side contributes every resonance it hits among the chosen modes, so
    independent and overlapping conditions combine in one matrix.
    """
    k = coupling.k
    modes = list(range(1, len(k) + 1)) if modes is None else list(modes)
    tol = CLASSIFY_TOLERANCE * float(k[0]) if tol is None else tol
    matrix = np.zeros((2 * len(modes), 2 * len(modes)), dtype=complex)
    sides = (
        (drive.omega_L, drive.phi_L, coupling.alpha_L, coupling.S_L),
        (drive.omega_R, drive.phi_R, coupling.alpha_R, coupling.S_R),
    )
    for row, n in enumerate(modes):
        a, b = 2 * row, 2 * row + 1
        kn = k[n - 1]
        for omega, phi, alpha, S in sides:
            up, down = cmath.exp(1j * phi), cmath.exp(-1j * phi)
            if abs(omega - 2 * kn) <= tol:
                matrix[a, b] -= alpha[n - 1] * down
                matrix[b, a] -= alpha[n - 1] * up
            for col, m in enumerate(modes):
                if m == n:
                    continue
                km, s = k[m - 1], S[n - 1, m - 1]
                c, d = 2 * col, 2 * col + 1
                if abs(omega - (km - kn)) <= tol:
                    matrix[a, c] += s * up
                    matrix[b, d] += s * down
                if abs(omega - (kn - km)) <= tol:
                    matrix[a, c] -= s * down
                    matrix[b, d] -= s * up
                if abs(omega - (kn + km)) <= tol:
                    matrix[a, d] -= s * down
                    matrix[b, c] -= s * up
        matrix[a] /= 4.0 * kn
        matrix[b] /= 4.0 * kn
    return matrix


def mode_growth_rates(matrix: np.ndarray, modes: Sequence[int]) -> Dict[int, float]:
    """Largest growing eigenvalue whose eigenvector has support on each mode."""
    values, vectors = np.linalg.eig(matrix)
    rates = {m: 0.0 for m in modes}
    for value, vector in zip(values, vectors.T):
        if value.real <= 0:
            continue
        weight = np.abs(vector)**2
        weight = weight / weight.sum()
        for row, m in enumerate(modes):
            if weight[2 * row] + weight[2 * row + 1] > SUPPORT_THRESHOLD:
                rates[m] = max(rates[m], float(value.real))
    return rates


def _diagonal_difference_matrix(coupling: CouplingSet, n: int, m: int, phi_R: float) -> np.ndarray:
    i, j = n - 1, m - 1
    a, b, s = coupling.alpha_L[i], coupling.alpha_L[j], coupling.S_R[i, j]
    up, down = cmath.exp(1j * phi_R), cmath.exp(-1j * phi_R)
    matrix = np.array([
        [0, -a, s * up, 0],
        [-a, 0, 0, s * down],
        [-s * down, 0, 0, -b],
        [0, -s * up, -b, 0],
    ], dtype=complex)
    matrix[:2] /= 4.0 * coupling.k[i]
    matrix[2:] /= 4.0 * coupling.k[j]
    return matrix


def diagonal_difference_closed_form(coupling: CouplingSet, n: int, m: int, phi_R: float) -> Tuple[complex, ...]:
    """λ = ±√(X ± √(X_1 + X_2 cos 2φ_R)) for Ω_L = 2k_n, Ω_R = k_m - k_n."""
    i, j = n - 1, m - 1
    a = coupling.alpha_L[i] / (4.0 * coupling.k[i])
    b = coupling.alpha_L[j] / (4.0 * coupling.k[j])
    g = coupling.S_R[i, j]**2 / (16.0 * coupling.k[i] * coupling.k[j])
    X = (a**2 + b**2) / 2 - g
    X1 = ((a**2 - b**2) / 2)**2 - g * (a**2 + b**2)
    X2 = -2 * a * b * g
    inner = cmath.sqrt(X1 + X2 * math.cos(2 * phi_R))
    roots = []
    for square in (X + inner, X - inner):
        root = cmath.sqrt(square)
        roots.extend([root, -root])
    return tuple(roots)


def _match_roots(closed: Sequence[complex], numeric: Sequence[complex]) -> float:
    remaining = list(numeric)
    worst = 0.0
    for root in closed:
        nearest = min(remaining, key=lambda v: abs(v - root))
        worst = max(worst, abs(nearest - root))
        remaining.remove(nearest)
    return worst


def _check_case(coupling: CouplingSet, drive: DriveConfig, n: int, m: int, case: Case, tol: float):
    k_n, k_m = coupling.k[n - 1], coupling.k[m - 1]
    expected_L = 2 * k_n if case == 'diagonal-difference' else k_n + k_m
    if abs(drive.omega_L - expected_L) > tol or abs(drive.omega_R - (k_m - k_n)) > tol:
        raise CaseUnmatched(
            f"drive (Ω_L={drive.omega_L:.6g}, Ω_R={drive.omega_R:.6g}) does not fit case {case} "
            f"for modes ({n}, {m}): expected ({expected_L:.6g}, {k_m - k_n:.6g})"
        )


def two_frequency_eigenvalues(coupling: CouplingSet, n: int, m: int, phi_R: float, case: Case,
                              drive: Optional[DriveConfig] = None,
                              tol: Optional[float] = None) -> TwoFrequencySolution:
    """Four exponents of the two-frequency resonances (Ω_L, Ω_R) = (2k_n or k_n + k_m, k_m - k_n)."""
    if not coupling.k[m - 1] > coupling.k[n - 1]:
        raise CaseUnmatched(f"case {case} needs k_{m} > k_{n}")
    tol = CLASSIFY_TOLERANCE * float(coupling.k[0]) if tol is None else tol
    if drive is not None:
        _check_case(coupling, drive, n, m, case, tol)

    if case == 'diagonal-difference':
        numeric = tuple(complex(v) for v in np.linalg.eigvals(_diagonal_difference_matrix(coupling, n, m, phi_R)))
        closed = diagonal_difference_closed_form(coupling, n, m, phi_R)
        deviation = _match_roots(closed, numeric)
        if deviation > CLOSED_FORM_TOLERANCE:
            raise ClosedFormMismatch(f"closed-form exponents differ from the matrix eigenvalues by {deviation:.3e}")
        return TwoFrequencySolution(eigenvalues=numeric, closed_form=closed, deviation=deviation)

    if case != 'sum-difference':
        raise CaseUnmatched(f"unknown two-frequency case '{case}'")
    k_n, k_m = coupling.k[n - 1], coupling.k[m - 1]
    resolved = DriveConfig(epsilon=0.0, omega_L=k_n + k_m, omega_R=k_m - k_n,
                           phi_L=0.0, phi_R=phi_R, t_F=1.0, t_max=2.0)
    matrix = slow_amplitude_matrix(coupling, resolved, modes=(n, m), tol=tol)
    numeric = tuple(complex(v) for v in np.linalg.eigvals(matrix))
    closed = sum_difference_closed_form(coupling, n, m)
    deviation = _match_roots(closed, numeric)
    # double roots: eigvals resolves them only to ~sqrt(eps)·|M|
    bound = CLOSED_FORM_TOLERANCE + DOUBLE_ROOT_SLACK * math.sqrt(np.finfo(float).eps) * np.linalg.norm(matrix)
    if deviation > bound:
        raise ClosedFormMismatch(f"closed-form exponents differ from the matrix eigenvalues by {deviation:.3e}")
    return TwoFrequencySolution(eigenvalues=numeric, closed_form=closed, deviation=deviation)


def sum_difference_closed_form(coupling: CouplingSet, n: int, m: int) -> Tuple[complex, ...]:
    """M² = ((S^L)² - (S^R)²)/(16 k_n k_m)·I, so λ is a double pair independent of φ_R."""
    i, j = n - 1, m - 1
    square = (coupling.S_L[i, j]**2 - coupling.S_R[i, j]**2) / (16.0 * coupling.k[i] * coupling.k[j])
    root = cmath.sqrt(square)
    return (root, root, -root, -root)


def _single_condition_modes(conditions: Sequence[ResonanceCondition]) -> Optional[Tuple[Kind, Tuple[int, ...]]]:
    keys = {(c.kind, c.modes) for c in conditions}
    return next(iter(keys)) if len(keys) == 1 else None


def predict(table: ModeTable, coupling: CouplingSet, drive: DriveConfig,
            tol: Optional[float] = None) -> MsaPrediction:
    """Classify the drive and evaluate the matching closed-form rate."""
    report = classify_resonances(table, drive, tol)
    phi = relative_phase(drive)
    if not report:
        logger.info("no first-order resonance; MSA predicts no growth at this order")
        return MsaPrediction(regime='none', rate=0.0, report=report, relative_phase=phi, no_growth=True)

    modes = sorted({m for c in report.conditions for m in c.modes})
    rotated = drive.model_copy(update={'phi_L': 0.0, 'phi_R': phi})
    mode_rates = mode_growth_rates(slow_amplitude_matrix(coupling, rotated, modes, report.tolerance), modes)
    left, right = report.on_side('L'), report.on_side('R')
    same_frequency = abs(drive.omega_L - drive.omega_R) <= report.tolerance

    common = dict(report=report, relative_phase=phi, mode_rates=mode_rates)
    if same_frequency and _single_condition_modes(report.conditions):
        kind, pair = _single_condition_modes(report.conditions)
        if kind == 'diagonal':
            rate = single_mode_rate(coupling, pair[0], phi)
            return MsaPrediction(regime='single-mode', rate=rate, no_growth=bool(rate <= 0), **common)
        if kind == 'sum':
            rate = two_mode_sum_rate(coupling, *pair, phi)
            return MsaPrediction(regime='two-mode-sum', rate=rate, no_growth=bool(rate <= 0), **common)
        _, beat = two_mode_difference_behavior(coupling, *pair, phi)
        return MsaPrediction(regime='two-mode-difference', rate=0.0, oscillatory=True, no_growth=True,
                             beat_frequency=beat, **common)

    single_left, single_right = _single_condition_modes(left), _single_condition_modes(right)
    if single_left and single_right and single_right[0] == 'difference':
        n, m = single_right[1]
        case = None
        if single_left == ('diagonal', (n,)):
            case = 'diagonal-difference'
        elif single_left == ('sum', (n, m)):
            case = 'sum-difference'
        if case:
            solution = two_frequency_eigenvalues(coupling, n, m, phi, case)
            return MsaPrediction(regime='two-frequency', rate=solution.growth_rate, no_growth=solution.no_growth,
                                 eigenvalues=solution.eigenvalues, closed_form_deviation=solution.deviation,
                                 **common)

    rate = max(mode_rates.values(), default=0.0)
    logger.info(f"{len(report.conditions)} simultaneous conditions; rates from the full slow-amplitude matrix")
    return MsaPrediction(regime='general', rate=rate, no_growth=bool(rate <= 0), **common)
