from fastapi import APIRouter
from pydantic import BaseModel, Field
import logging
import time

from dce.simulation import simulate
from error_handler import ConfigError
from shared.schema import RunConfig
from utils.emit import simulation_summary, to_plain

logger = logging.getLogger(__name__)
simulate_api = APIRouter()

MAX_TIME = 2000.0


class SimulateRequest(BaseModel):
    config: RunConfig
    include_history: bool = Field(True, description="Return N_n(t) at every recorded time")


@simulate_api.post('/v1/simulate')
def run_simulation(payload: SimulateRequest):
    """
    Integrate one configuration and return the same summary the CLI writes:
    particle numbers, Bogoliubov matrices, Wronskian and unitarity deviations.
    """
    if payload.config.drive.t_max > MAX_TIME:
        raise ConfigError(f"t_max={payload.config.drive.t_max:g} exceeds the HTTP limit of {MAX_TIME:g}; use the CLI")
    start_time = time.time()
    simulation = simulate(payload.config)
    body = simulation_summary(simulation)
    if not payload.include_history:
        body.pop('history')
    body['processing_time'] = round(time.time() - start_time, 3)
    logger.info(f"simulation finished in {body['processing_time']}s")
    return to_plain(body)
