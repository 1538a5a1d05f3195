from fastapi import APIRouter
from pydantic import BaseModel
import logging
import time

from dce.msa import predict
from dce.simulation import prepare
from shared.schema import RunConfig
from utils.emit import prediction_summary, to_plain

logger = logging.getLogger(__name__)
msa_api = APIRouter()


class MsaRequest(BaseModel):
    config: RunConfig


@msa_api.post('/v1/msa')
def msa(payload: MsaRequest):
    """
    Multiple-scale prediction for a run configuration.
    Returns the regime, growth rate, matched resonances and, for two-frequency
    drives, the four slow-amplitude exponents.
    """
    start_time = time.time()
    table, drive, coupling = prepare(payload.config)
    prediction = predict(table, coupling, drive)
    body = prediction_summary(prediction)
    body['processing_time'] = round(time.time() - start_time, 3)
    return to_plain(body)
