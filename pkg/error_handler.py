import logging
import traceback
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.status import (
    HTTP_422_UNPROCESSABLE_ENTITY,
    HTTP_500_INTERNAL_SERVER_ERROR,
)


logger = logging.getLogger('error_handler')
logger.setLevel(logging.DEBUG)
handler = logging.StreamHandler()
formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
handler.setFormatter(formatter)
logger.addHandler(handler)
logger.propagate = False

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SPECTRUM = 3
EXIT_INTEGRATION = 4
EXIT_COMPARISON = 5


class CasimirError(Exception):
    """Root of every error raised by the simulator."""

    exit_code = 1
    http_status = HTTP_500_INTERNAL_SERVER_ERROR


class ConfigError(CasimirError):
    exit_code = EXIT_CONFIG
    http_status = HTTP_422_UNPROCESSABLE_ENTITY


class PlanInvalid(ConfigError):
    pass


class SpectrumError(CasimirError):
    exit_code = EXIT_SPECTRUM


class ConvergenceFailure(SpectrumError):
    pass


class InsufficientRoots(SpectrumError):
    pass


class IntegrationError(CasimirError):
    exit_code = EXIT_INTEGRATION


class StepTooLarge(IntegrationError):
    http_status = HTTP_422_UNPROCESSABLE_ENTITY


class NonFiniteState(IntegrationError):
    pass


class AnalysisError(CasimirError):
    exit_code = EXIT_COMPARISON
    http_status = HTTP_422_UNPROCESSABLE_ENTITY


class PreStaticRegion(AnalysisError):
    pass


class WindowTooShort(AnalysisError):
    pass


class CaseUnmatched(AnalysisError):
    pass


class ClosedFormMismatch(AnalysisError):
    pass


class PeakAtBoundary(AnalysisError):
    pass


class DegenerateWidth(AnalysisError):
    pass


class ComparisonError(CasimirError):
    exit_code = EXIT_COMPARISON


class NoExponentialWindow(ComparisonError):
    pass


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the documented process exit code."""
    if isinstance(exc, CasimirError):
        return exc.exit_code
    return 1


def configure_error_handlers(app: FastAPI):
    """Configure FastAPI error handlers for simulator errors and uncaught exceptions"""

    @app.exception_handler(CasimirError)
    def casimir_error_handler(request: Request, exc: CasimirError):
        status_code = exc.http_status
        if status_code >= HTTP_500_INTERNAL_SERVER_ERROR:
            logger.error(f"{type(exc).__name__} on {request.method} {request.url.path}: {exc}")
        else:
            logger.info(f"{type(exc).__name__} on {request.method} {request.url.path}: {exc}")
        return JSONResponse(
            status_code=status_code,
            content={
                'error': type(exc).__name__,
                'message': str(exc),
            }
        )

    @app.exception_handler(Exception)
    def handle_exception(request: Request, exc: Exception):
        """Global exception handler for uncaught exceptions (server errors)"""
        exception_traceback = ''.join(traceback.format_exception(type(exc), exc, exc.__traceback__))
        logger.error(f"Unhandled error on {request.method} {request.url.path}\n{exception_traceback}")
        return JSONResponse(
            status_code=HTTP_500_INTERNAL_SERVER_ERROR,
            content={
                'error': 'Internal Server Error',
                'message': str(exc) if app.debug else 'An unexpected error occurred'
            }
        )
