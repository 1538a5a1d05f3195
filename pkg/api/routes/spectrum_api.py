from fastapi import APIRouter
from pydantic import BaseModel, Field
from typing import List, Optional
import logging
import time

from dce.cavity import cached_spectrum, verify_static_boundary
from shared.schema import CavityConfig

logger = logging.getLogger(__name__)
spectrum_api = APIRouter()


class SpectrumRequest(BaseModel):
    cavity: CavityConfig
    n_modes: int = Field(10, ge=1, le=200, description="Number of eigenfrequencies to return")


class ModeOut(BaseModel):
    n: int
    k: float
    phi: float
    M: float
    gap: Optional[float] = None
    boundary_residual: float


class SpectrumResponse(BaseModel):
    success: bool
    modes: List[ModeOut]
    processing_time: float


@spectrum_api.post('/v1/spectrum', response_model=SpectrumResponse)
def spectrum(payload: SpectrumRequest):
    """
    Static eigenfrequencies of the cavity.
    Request body (JSON):
    - cavity: chi0, b0L/b0R or V0L/V0R, f0L/f0R
    - n_modes: integer (optional, default=10)
    Returns k_n, φ_n, M_n, the gap to the next mode and the largest scaled boundary residual.
    """
    start_time = time.time()
    table = cached_spectrum(payload.cavity, payload.n_modes)
    residuals = verify_static_boundary(table).max(axis=1)
    gaps = list(table.gaps) + [None]
    modes = [
        ModeOut(n=m.index, k=m.k, phi=m.phi, M=m.M, gap=gap, boundary_residual=float(r))
        for m, gap, r in zip(table.modes, gaps, residuals)
    ]
    return SpectrumResponse(success=True, modes=modes, processing_time=round(time.time() - start_time, 3))
