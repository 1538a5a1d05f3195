from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from dotenv import load_dotenv
from typing import Callable
import logging
import os
import time

from dce import __version__
from error_handler import configure_error_handlers
import api.routes as routes

load_dotenv()
app = FastAPI(title="DCE simulator", version=__version__)

# Configure logging
logging.basicConfig(
    level=os.getenv('DCE_LOG_LEVEL', 'INFO').upper(),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
)
logger = logging.getLogger(__name__)


class LoggingMiddleware:
    def __init__(self, app: FastAPI):
        self.app = app

    async def __call__(self, request: Request, call_next: Callable) -> Response:
        start_time = time.time()
        response = await call_next(request)
        process_time = time.time() - start_time
        response.headers['X-Process-Time'] = f"{process_time:.3f}"
        logger.info(f"Request: {request.method} {request.url.path} - Status: {response.status_code} - Time: {process_time:.2f}s")
        return response


app.add_middleware(
    CORSMiddleware,
    allow_origins=['*'],
    allow_credentials=True,
    allow_methods=["GET", "POST", "OPTIONS"],
    allow_headers=["*"],
)
app.middleware('http')(LoggingMiddleware(app))

configure_error_handlers(app)

app.include_router(routes.spectrum_api, prefix="/api", tags=['Spectrum'])
app.include_router(routes.msa_api, prefix="/api", tags=['MSA'])
app.include_router(routes.simulate_api, prefix="/api", tags=['Simulation'])


@app.get("/", tags=['Root'])
def root():
    return {"message": "DCE simulator is running", "version": __version__}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=5000)
