"""Parameter sweeps: grids of independent runs, resumable through the sweep store."""
import hashlib
import itertools
import logging
import math
import os
import time
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import ValidationError
from tqdm import tqdm

from dce import __version__
from dce.cavity import cached_spectrum
from dce.simulation import particle_number_at
from error_handler import CasimirError, DegenerateWidth, PeakAtBoundary, PlanInvalid
from shared.database import SweepStore, database_url
from shared.schema import CavityConfig, RunConfig, SweepPlan
from utils.emit import read_csv, write_csv, write_json

logger = logging.getLogger(__name__)

# changing one side's cavity field frees the field derived from it
_DERIVED_PARTNER = {'b0': 'V0', 'V0': 'b0', 'f0': 'V0'}
SPECTRUM_OBSERVABLES = ('eigenfrequencies', 'phases', 'spectrum_gaps')


@dataclass(frozen=True)
class GridPoint:
    index: int
    coordinates: Dict[str, float]


@dataclass(frozen=True, eq=False)
class SweepResult:
    plan: SweepPlan
    plan_hash: str
    code_version: str
    records: List[Dict[str, Any]]
    elapsed: float

    @property
    def axis_names(self) -> List[str]:
        return [axis.name for axis in self.plan.axes]

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(axis.count for axis in self.plan.axes)

    @property
    def complete(self) -> bool:
        return len(self.records) == math.prod(self.shape)

    def values(self) -> np.ndarray:
        """Observable per point in index order, NaN for failed points."""
        out = np.full(math.prod(self.shape), np.nan)
        for record in self.records:
            if record['status'] == 'ok' and record['value'] is not None:
                out[record['index']] = record['value']
        return out

    def grid(self) -> np.ndarray:
        return self.values().reshape(self.shape)

    def axis_values(self, name: str) -> np.ndarray:
        axis = self.plan.axes[self.axis_names.index(name)]
        base = self.plan.base
        return np.array(axis.values(cached_spectrum(base.cavity, base.integrator.n_modes).k))


def plan_hash(plan: SweepPlan) -> str:
    return hashlib.sha256(plan.model_dump_json().encode()).hexdigest()[:16]


def expand_grid(plan: SweepPlan) -> List[GridPoint]:
    """Cartesian product of the axes, last axis fastest; bounds resolve against the base spectrum."""
    base_k = cached_spectrum(plan.base.cavity, plan.base.integrator.n_modes).k
    try:
        axes = [axis.values(base_k) for axis in plan.axes]
    except ValueError as e:
        raise PlanInvalid(str(e)) from e
    names = [axis.name for axis in plan.axes]
    return [
        GridPoint(index=i, coordinates=dict(zip(names, combo)))
        for i, combo in enumerate(itertools.product(*axes))
    ]


def apply_point(plan: SweepPlan, point: GridPoint) -> RunConfig:
    """Base configuration with the point's axis values written in."""
    cavity = plan.base.cavity.model_dump()
    drive = plan.base.drive.model_dump()
    for axis in plan.axes:
        value = point.coordinates[axis.name]
        section, key = axis.path.split('.')
        if section == 'cavity':
            cavity[key] = value
            partner = _DERIVED_PARTNER.get(key[:-1])
            if partner:
                cavity.pop(partner + key[-1], None)
        elif key == 'omega':
            drive['omega_L'] = drive['omega_R'] = value
        else:
            drive[key] = value
    try:
        return plan.base.model_copy(update={
            'cavity': CavityConfig(**cavity),
            'drive': type(plan.base.drive)(**drive),
        })
    except ValidationError as e:
        raise PlanInvalid(f"point {point.index} {point.coordinates}: {e}") from e


def evaluate_point(plan: SweepPlan, point: GridPoint) -> Dict[str, Any]:
    """Run one grid point; failures are captured in the record, never raised."""
    started = time.perf_counter()
    record = {'index': point.index, 'coordinates': point.coordinates, 'status': 'ok',
              'value': None, 'payload': None}
    mode = plan.sweep.mode
    observable = plan.sweep.observable
    try:
        run = apply_point(plan, point)
        if observable in SPECTRUM_OBSERVABLES:
            table = cached_spectrum(run.cavity, run.integrator.n_modes)
            series = {'eigenfrequencies': table.k, 'phases': table.phi, 'spectrum_gaps': table.gaps}[observable]
            if mode > len(series):
                raise PlanInvalid(f"{observable} has no entry for mode {mode}")
            record['value'] = float(series[mode - 1])
            record['payload'] = [float(v) for v in series]
        else:
            value, simulation = particle_number_at(run, mode, plan.observation_time)
            record['value'] = value
            if observable == 'particle_history':
                record['payload'] = {'t': simulation.times.tolist(), 'N': simulation.history[:, mode - 1].tolist()}
    except CasimirError as e:
        record.update(status='error', error=type(e).__name__, message=str(e))
    except (ValueError, ArithmeticError) as e:
        record.update(status='error', error=type(e).__name__, message=str(e))
    record['elapsed'] = time.perf_counter() - started
    return record


def resolve_workers(requested: Optional[int], plan: SweepPlan) -> int:
    env = os.getenv('DCE_WORKERS')
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise PlanInvalid(f"DCE_WORKERS must be an integer, got '{env}'")
    return max(1, requested or plan.sweep.workers)


def run_sweep(plan: SweepPlan, out_dir: str, workers: Optional[int] = None,
              max_points: Optional[int] = None, progress: bool = True) -> SweepResult:
    """Evaluate every pending grid point and write sweep.csv and manifest.json.

    Finished points are stored as they arrive, so a rerun of the same plan
    only evaluates what is missing. max_points caps how many pending points
    this call evaluates.
    """
    started = time.perf_counter()
    os.makedirs(out_dir, exist_ok=True)
    digest = plan_hash(plan)
    store = SweepStore(database_url(out_dir))
    try:
        store.register(digest, plan.model_dump_json(), __version__)
        points = expand_grid(plan)
        done = store.completed(digest)
        pending = [p for p in points if p.index not in done]
        if max_points is not None:
            pending = pending[:max_points]
        n_workers = resolve_workers(workers, plan)
        logger.info(f"Sweep {digest}: {len(points)} points, {len(done)} stored, "
                    f"{len(pending)} to run on {n_workers} worker(s)")

        if pending:
            jobs = Parallel(n_jobs=n_workers, return_as='generator_unordered')(
                delayed(evaluate_point)(plan, point) for point in pending
            )
            for record in tqdm(jobs, total=len(pending), desc='sweep', disable=not progress):
                store.add(digest, record)
                if record['status'] != 'ok':
                    logger.warning(f"point {record['index']} failed: {record['error']}: {record['message']}")

        result = SweepResult(plan=plan, plan_hash=digest, code_version=__version__,
                             records=store.records(digest), elapsed=time.perf_counter() - started)
    finally:
        store.close()
    write_sweep_outputs(result, out_dir)
    return result


def write_sweep_outputs(result: SweepResult, out_dir: str):
    names = result.axis_names
    header = ['index'] + names + [result.plan.sweep.observable, 'status', 'error']
    rows = ([r['index']] + [r['coordinates'][n] for n in names] + [r['value'], r['status'], r['error']]
            for r in result.records)
    write_csv(os.path.join(out_dir, 'sweep.csv'), header, rows)
    write_json(os.path.join(out_dir, 'manifest.json'), {
        'plan': result.plan.model_dump(),
        'plan_hash': result.plan_hash,
        'code_version': result.code_version,
        'points': math.prod(result.shape),
        'completed': len(result.records),
        'failed': sum(1 for r in result.records if r['status'] != 'ok'),
        'elapsed_seconds': result.elapsed,
    })


@dataclass(frozen=True)
class PeakProfile:
    axis: str
    coordinates: np.ndarray
    values: np.ndarray
    peak: float
    fwhm: float

    @property
    def relative_width(self) -> float:
        return self.fwhm / abs(self.peak)


def _half_crossing(x: np.ndarray, y: np.ndarray, start: int, step: int) -> float:
    i = start
    while 0 <= i + step < len(y):
        if y[i + step] < 0.5:
            j = i + step
            return float(x[i] + (0.5 - y[i]) * (x[j] - x[i]) / (y[j] - y[i]))
        i += step
    raise DegenerateWidth("profile never drops below half maximum on one side of the peak")


def profile_from_values(coordinates: Sequence[float], values: Sequence[float], axis: str = 'x') -> PeakProfile:
    """Normalized 1-D profile and its FWHM by linear interpolation."""
    x, y = np.asarray(coordinates, dtype=float), np.asarray(values, dtype=float)
    if not np.isfinite(y).all():
        raise DegenerateWidth("profile contains failed points")
    peak = int(np.argmax(y))
    if peak == 0 or peak == len(y) - 1:
        raise PeakAtBoundary(f"maximum of {axis} profile lies on the grid edge at {x[peak]:g}")
    if y[peak] <= 0:
        raise DegenerateWidth("profile maximum is not positive")
    normalized = y / y[peak]
    left = _half_crossing(x, normalized, peak, -1)
    right = _half_crossing(x, normalized, peak, 1)
    return PeakProfile(axis=axis, coordinates=x, values=normalized, peak=float(x[peak]), fwhm=right - left)


def grid_profile(names: Sequence[str], axes: Sequence[Sequence[float]], grid: np.ndarray, axis: str) -> PeakProfile:
    """Cut along one axis through the global maximum of an n-D grid."""
    if axis not in names:
        raise PlanInvalid(f"no axis named '{axis}' in sweep (axes: {list(names)})")
    if np.isnan(grid).all():
        raise DegenerateWidth("sweep has no successful points")
    location = np.unravel_index(np.nanargmax(grid), grid.shape)
    for position, (i, count) in enumerate(zip(location, grid.shape)):
        if count > 1 and (i == 0 or i == count - 1):
            raise PeakAtBoundary(f"maximum lies on the edge of axis '{names[position]}'")
    position = list(names).index(axis)
    cut = list(location)
    cut[position] = slice(None)
    return profile_from_values(axes[position], grid[tuple(cut)], axis)


def peak_profile(result: SweepResult, axis: str) -> PeakProfile:
    names = result.axis_names
    return grid_profile(names, [result.axis_values(n) for n in names], result.grid(), axis)


def load_sweep_csv(path: str) -> Tuple[List[str], List[np.ndarray], np.ndarray]:
    """Axis names, axis values and the observable grid of a written sweep.csv."""
    rows = read_csv(path)
    if not rows:
        raise PlanInvalid(f"{path} holds no sweep points")
    header = list(rows[0].keys())
    names = header[1:-3]
    observable = header[-3]
    axes = [np.array(sorted({float(r[n]) for r in rows})) for n in names]
    grid = np.full(tuple(len(a) for a in axes), np.nan)
    for r in rows:
        if r['status'] != 'ok' or not r[observable]:
            continue
        location = tuple(int(np.argmin(np.abs(a - float(r[n])))) for a, n in zip(axes, names))
        grid[location] = float(r[observable])
    return names, axes, grid
