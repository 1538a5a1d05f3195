"""CSV and JSON emitters. Floats carry 17 significant digits so values round-trip exactly."""
import csv
import json
import os
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np


def fmt(value: float) -> str:
    return f"{float(value):.17g}"


def _cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, (float, np.floating)):
        return fmt(value)
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, newline='') as f:
        return list(csv.DictReader(f))


def to_plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': float(value.real), 'im': float(value.imag)}
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_json(path: str, data: Dict[str, Any]):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w') as f:
        json.dump(to_plain(data), f, indent=2)


def read_json(path: str) -> Dict[str, Any]:
    with open(path) as f:
        return json.load(f)


def complex_matrix(matrix: np.ndarray) -> Dict[str, list]:
    return {'re': np.real(matrix).tolist(), 'im': np.imag(matrix).tolist()}


def spectrum_rows(table) -> List[list]:
    gaps = list(table.gaps) + [None]
    return [[m.index, m.k, m.phi, m.M, gap] for m, gap in zip(table.modes, gaps)]


SPECTRUM_HEADER = ['n', 'k', 'phi', 'M', 'gap']
HISTORY_HEADER = ['t', 'n', 'N']
TRAJECTORY_HEADER = ['t', 'n', 'm', 're_eps', 'im_eps', 're_deps', 'im_deps']


def history_rows(times: np.ndarray, history: np.ndarray):
    for t, row in zip(times, history):
        for n, value in enumerate(row, start=1):
            yield [float(t), n, float(value)]


def trajectory_rows(trajectory):
    for state in trajectory.states():
        size = state.eps.shape[0]
        for n in range(size):
            for m in range(size):
                e, d = state.eps[n, m], state.deps[n, m]
                yield [state.t, n + 1, m + 1, e.real, e.imag, d.real, d.imag]


def simulation_summary(simulation) -> Dict[str, Any]:
    result = simulation.result
    drive = simulation.drive
    return {
        'k': simulation.table.k,
        'drive': drive.model_dump(),
        't_eval': result.t_eval,
        'convention': result.convention,
        'N': result.N,
        'alpha': complex_matrix(result.alpha),
        'beta': complex_matrix(result.beta),
        'wronskian_deviation': simulation.wronskian_deviation,
        'unitarity_deviation': result.unitarity_deviation,
        'max_error_estimate': simulation.trajectory.max_error_estimate,
        'dt': {'drive': simulation.trajectory.dt_drive, 'static': simulation.trajectory.dt_static},
        'history': {'t': simulation.times, 'N': simulation.history},
    }


def prediction_summary(prediction) -> Dict[str, Any]:
    return {
        'regime': prediction.regime,
        'rate': prediction.rate,
        'particle_exponent': prediction.particle_exponent,
        'oscillatory': prediction.oscillatory,
        'no_growth': prediction.no_growth,
        'beat_frequency': prediction.beat_frequency,
        'relative_phase': prediction.relative_phase,
        'eigenvalues': list(prediction.eigenvalues) if prediction.eigenvalues is not None else None,
        'closed_form_deviation': prediction.closed_form_deviation,
        'mode_rates': prediction.mode_rates,
        'resonances': {
            'tolerance': prediction.report.tolerance,
            'conditions': [
                {'kind': c.kind, 'side': c.side, 'modes': list(c.modes), 'target': c.target}
                for c in prediction.report.conditions
            ],
        },
    }
