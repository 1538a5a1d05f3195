import json
import os

import pytest
from typer.testing import CliRunner

from cli import app
from error_handler import EXIT_COMPARISON, EXIT_CONFIG, EXIT_INTEGRATION
from shared.config import write_run_config
from tests.conftest import make_run

runner = CliRunner()
RECIPES = os.path.join(os.path.dirname(__file__), '..', 'recipes')


@pytest.fixture
def config_file(tmp_path):
    def write(**overrides):
        path = tmp_path / 'run.ini'
        write_run_config(make_run(directory=str(tmp_path / 'out'), **overrides), str(path))
        return str(path)
    return write


def test_spectrum(config_file, tmp_path):
    result = runner.invoke(app, ['spectrum', '--config', config_file(), '--out', str(tmp_path)])
    assert result.exit_code == 0, result.output
    with open(tmp_path / 'spectrum.csv') as f:
        rows = f.read().splitlines()
    assert rows[0] == 'n,k,phi,M,gap'
    assert float(rows[1].split(',')[1]) == pytest.approx(1.2611, abs=1e-3)
    assert len(rows) == 5


def test_modes_override(config_file, tmp_path):
    result = runner.invoke(app, ['spectrum', '-c', config_file(), '-o', str(tmp_path), '--modes', '7'])
    assert result.exit_code == 0, result.output
    with open(tmp_path / 'spectrum.csv') as f:
        assert len(f.read().splitlines()) == 8


def test_bad_config_exits_with_config_code(tmp_path):
    path = tmp_path / 'bad.ini'
    path.write_text("[cavity]\nb0L = 1\n")
    result = runner.invoke(app, ['spectrum', '--config', str(path)])
    assert result.exit_code == EXIT_CONFIG


def test_simulate_undriven(config_file, tmp_path):
    path = config_file(epsilon=0.0, t_F=5.0, t_max=10.0, n_modes=3)
    result = runner.invoke(app, ['simulate', '--config', path, '--out', str(tmp_path)])
    assert result.exit_code == 0, result.output
    with open(tmp_path / 'summary.json') as f:
        summary = json.load(f)
    assert max(summary['N']) < 1e-12
    assert summary['wronskian_deviation'] < 1e-9
    assert os.path.exists(tmp_path / 'history.csv')
    assert not os.path.exists(tmp_path / 'trajectory.csv')


def test_simulate_rejects_large_step(config_file):
    result = runner.invoke(app, ['simulate', '--config', config_file(dt=1.0, n_modes=3)])
    assert result.exit_code == EXIT_INTEGRATION


def test_msa_difference_resonance(config_file, tmp_path):
    result = runner.invoke(app, ['msa', '--config', config_file(omega_L='k2 - k1'), '--out', str(tmp_path)])
    assert result.exit_code == 0, result.output
    with open(tmp_path / 'msa.json') as f:
        prediction = json.load(f)
    assert prediction['regime'] == 'two-mode-difference'
    assert prediction['oscillatory'] is True
    assert prediction['rate'] == 0.0


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def flat_summary(tmp_path):
    times = [float(t) for t in range(50)]
    return write_json(tmp_path / 'summary.json', {
        'drive': {'t_F': 40.0},
        'history': {'t': times, 'N': [[0.01, 0.0] for _ in times]},
    })


def test_compare_without_growth(tmp_path):
    prediction = write_json(tmp_path / 'msa.json', {'regime': 'none', 'rate': 0.0, 'mode_rates': {}})
    result = runner.invoke(app, ['compare', flat_summary(tmp_path), prediction, '--out', str(tmp_path)])
    assert result.exit_code == 0, result.output
    with open(tmp_path / 'compare.json') as f:
        assert json.load(f)['consistent'] is True


def test_compare_missing_growth(tmp_path):
    prediction = write_json(tmp_path / 'msa.json', {'regime': 'single-mode', 'rate': 0.02, 'mode_rates': {}})
    result = runner.invoke(app, ['compare', flat_summary(tmp_path), prediction])
    assert result.exit_code == EXIT_COMPARISON


def test_compare_unreadable_input(tmp_path):
    result = runner.invoke(app, ['compare', str(tmp_path / 'none.json'), str(tmp_path / 'none.json')])
    assert result.exit_code == EXIT_CONFIG


def test_profile(tmp_path):
    rows = ['index,omega,particle_number,status,error']
    for i, x in enumerate([0.8, 0.9, 1.0, 1.1, 1.2]):
        rows.append(f'{i},{x},{[0.1, 0.4, 1.0, 0.4, 0.1][i]},ok,')
    csv_path = tmp_path / 'sweep.csv'
    csv_path.write_text('\n'.join(rows) + '\n')
    result = runner.invoke(app, ['profile', str(csv_path), '--axis', 'omega', '--out', str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert os.path.exists(tmp_path / 'profile_omega.csv')


@pytest.mark.parametrize("recipe", ['fig08_breathing.ini', 'fig14_breathing.ini', 'fig14_translational.ini'])
def test_msa_single_mode_recipe(recipe, tmp_path):
    result = runner.invoke(app, ['msa', '--config', os.path.join(RECIPES, recipe), '--out', str(tmp_path)])
    assert result.exit_code == 0, result.output
    with open(tmp_path / 'msa.json') as f:
        prediction = json.load(f)
    assert prediction['regime'] == 'single-mode'
    assert prediction['no_growth'] is False
    assert prediction['rate'] > 0
    assert prediction['particle_exponent'] == pytest.approx(2 * prediction['rate'])


def test_profile_without_peak_exits_with_comparison_code(tmp_path):
    rows = ['index,omega,particle_number,status,error']
    rows += [f'{i},{x},1.0,ok,' for i, x in enumerate([0.8, 0.9, 1.0])]
    csv_path = tmp_path / 'sweep.csv'
    csv_path.write_text('\n'.join(rows) + '\n')
    result = runner.invoke(app, ['profile', str(csv_path), '--axis', 'omega'])
    assert result.exit_code == EXIT_COMPARISON
