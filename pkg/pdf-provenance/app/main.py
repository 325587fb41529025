from __future__ import annotations

import logging
from uuid import uuid4

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError

from app.core.errors import ProvenanceError
from app.observability import bind_request_id, configure_logging, configure_observability, reset_request_id
from app.routers import health, scan
from app.settings import REQUEST_ID_HEADER, get_settings
from app.utils.problem_details import (
    ProblemDetailsException,
    from_exception,
    from_http_exception,
    from_provenance_error,
    from_validation_error,
    internal_server_error,
    problem_response,
)

try:  # pragma: no cover - optional dependency
    from opentelemetry import trace  # type: ignore[import]
except ImportError:  # pragma: no cover - optional dependency
    trace = None  # type: ignore[assignment]

log = logging.getLogger("pdf_provenance.http")

app = FastAPI(
    title="PDF Provenance Service",
    description="Producer detection from PDF coding style, with RFC 9457 errors and request ids.",
    version="1.0.0",
)

configure_observability(app)

app.include_router(health.router)
app.include_router(scan.router)


@app.on_event("startup")
async def startup_event() -> None:
    configure_logging(get_settings().log_level or "INFO")


@app.middleware("http")
async def request_id_middleware(request: Request, call_next):
    request_id = request.headers.get(REQUEST_ID_HEADER) or str(uuid4())
    request.state.request_id = request_id
    token = bind_request_id(request_id)
    try:
        response = await call_next(request)
    except ProblemDetailsException as exc:
        response = from_exception(request, exc)
    except ProvenanceError as exc:
        response = from_provenance_error(request, exc)
    except HTTPException as exc:
        response = from_http_exception(request, exc)
    except Exception:
        log.exception("Unhandled application error")
        response = internal_server_error(request)
    finally:
        reset_request_id(token)

    if response.status_code == 404 and request.scope.get("endpoint") is None:
        response = problem_response(request, status=404, title="Not Found", detail="Not Found", type_suffix="http-404")
    response.headers[REQUEST_ID_HEADER] = request_id
    if trace:
        span = trace.get_current_span()
        if span and span.is_recording():
            span.set_attribute("http.request_id", request_id)
    return response


@app.exception_handler(ProblemDetailsException)
async def problem_details_handler(request: Request, exc: ProblemDetailsException):
    return from_exception(request, exc)


@app.exception_handler(ProvenanceError)
async def provenance_error_handler(request: Request, exc: ProvenanceError):
    log.info("%s: %s", exc.type_suffix, exc.detail)
    return from_provenance_error(request, exc)


@app.exception_handler(RequestValidationError)
async def validation_error_handler(request: Request, exc: RequestValidationError):
    log.warning("Validation error: %s", exc.errors())
    return from_validation_error(request, exc)


@app.exception_handler(HTTPException)
async def http_exception_handler(request: Request, exc: HTTPException):
    if isinstance(exc, ProblemDetailsException):
        return from_exception(request, exc)
    return from_http_exception(request, exc)


@app.exception_handler(Exception)
async def generic_exception_handler(request: Request, exc: Exception):
    log.exception("Unhandled application error")
    return internal_server_error(request)
