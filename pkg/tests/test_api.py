import pytest
from fastapi.testclient import TestClient

from app import app

client = TestClient(app)

CAVITY = {'chi0': 0.05, 'b0L': 1.0, 'b0R': 1.0}


def run_config(**drive):
    return {
        'cavity': CAVITY,
        'drive': {'epsilon': 0.01, 'omega_L': '2*k1', 'omega_R': '2*k1', 't_F': 10.0, 't_max': 15.0, **drive},
        'integrator': {'n_modes': 3},
    }


def test_root():
    response = client.get('/')
    assert response.status_code == 200
    assert 'version' in response.json()


def test_spectrum():
    response = client.post('/api/v1/spectrum', json={'cavity': CAVITY, 'n_modes': 4})
    assert response.status_code == 200
    modes = response.json()['modes']
    assert len(modes) == 4
    assert modes[0]['k'] == pytest.approx(1.2611, abs=1e-3)
    assert modes[-1]['gap'] is None
    assert max(m['boundary_residual'] for m in modes) < 1e-9
    assert 'X-Process-Time' in response.headers


def test_inconsistent_cavity_is_rejected():
    response = client.post('/api/v1/spectrum', json={'cavity': {'b0L': 1.0, 'V0L': 5.0, 'f0L': 0.46, 'b0R': 1.0}})
    assert response.status_code == 422


def test_msa():
    response = client.post('/api/v1/msa', json={'config': run_config()})
    assert response.status_code == 200
    body = response.json()
    assert body['regime'] == 'single-mode'
    assert body['rate'] > 0
    assert body['no_growth'] is False
    assert [c['side'] for c in body['resonances']['conditions']] == ['L', 'R']


def test_simulate():
    response = client.post('/api/v1/simulate', json={'config': run_config(), 'include_history': False})
    assert response.status_code == 200
    body = response.json()
    assert len(body['N']) == 3
    assert 'history' not in body
    assert body['wronskian_deviation'] < 1e-6


def test_simulate_time_limit():
    response = client.post('/api/v1/simulate', json={'config': run_config(t_F=2500.0, t_max=2600.0)})
    assert response.status_code == 422
    assert response.json()['error'] == 'ConfigError'


def test_simulate_step_too_large():
    config = run_config()
    config['integrator']['dt'] = 1.0
    response = client.post('/api/v1/simulate', json={'config': config})
    assert response.status_code == 422
    assert response.json()['error'] == 'StepTooLarge'
