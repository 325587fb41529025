from __future__ import annotations

import logging
import os
import sys
from contextvars import ContextVar, Token
from typing import Optional, TextIO
from uuid import uuid4

from fastapi import FastAPI

log = logging.getLogger("pdf_provenance")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s [file=%(scan_file)s request=%(request_id)s] %(message)s"

_INSTRUMENTED: bool = False
_HANDLER: Optional[logging.Handler] = None

try:  # pragma: no cover - optional dependency
    from opentelemetry import trace as otel_trace  # type: ignore[import]
except ImportError:  # pragma: no cover - optional dependency
    otel_trace = None  # type: ignore[assignment]

_REQUEST_ID_CTX: ContextVar[Optional[str]] = ContextVar("request_id", default=None)
_SCAN_FILE_CTX: ContextVar[Optional[str]] = ContextVar("scan_file", default=None)


def bind_request_id(request_id: Optional[str]) -> Token:
    return _REQUEST_ID_CTX.set(request_id)


def reset_request_id(token: Token) -> None:
    try:
        _REQUEST_ID_CTX.reset(token)
    except ValueError:  # pragma: no cover - token from another context
        _REQUEST_ID_CTX.set(None)


def bind_scan_context(path: Optional[str]) -> Token:
    """Attach the file under analysis to every log record emitted in this context."""

    return _SCAN_FILE_CTX.set(path)


def reset_scan_context(token: Token) -> None:
    try:
        _SCAN_FILE_CTX.reset(token)
    except ValueError:  # pragma: no cover - token from another context
        _SCAN_FILE_CTX.set(None)


def current_scan_file() -> Optional[str]:
    return _SCAN_FILE_CTX.get()


class ScanContextFilter(logging.Filter):
    """Inject the scanned file, request id and trace scope into log records."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.scan_file = _SCAN_FILE_CTX.get() or "-"
        record.request_id = _REQUEST_ID_CTX.get() or "-"

        record.trace_id = None
        record.span_id = None
        if otel_trace is not None:
            span = otel_trace.get_current_span()
            context = span.get_span_context() if span else None
            if context and context.trace_id:
                record.trace_id = f"{context.trace_id:032x}"
                record.span_id = f"{context.span_id:016x}"
        return True


def configure_logging(level: Optional[str] = None, stream: Optional[TextIO] = None) -> logging.Handler:
    """Install one stderr handler on the ``pdf_provenance`` logger; stdout stays free for reports."""

    global _HANDLER
    if _HANDLER is not None:
        log.removeHandler(_HANDLER)

    handler = logging.StreamHandler(stream or sys.stderr)
    handler.addFilter(ScanContextFilter())
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    log.addHandler(handler)
    log.setLevel((level or "WARNING").upper())
    log.propagate = False
    _HANDLER = handler
    return handler


def configure_observability(app: FastAPI) -> bool:
    """Attach OpenTelemetry instrumentation if the SDK is available."""

    global _INSTRUMENTED
    if _INSTRUMENTED:
        return True

    if os.getenv("PYTEST_CURRENT_TEST"):
        log.debug("Skipping OpenTelemetry instrumentation during test execution")
        return False

    try:
        from opentelemetry.instrumentation.fastapi import (  # type: ignore[import]
            FastAPIInstrumentor,
        )
        from opentelemetry.sdk.resources import Resource  # type: ignore[import]
        from opentelemetry.sdk.trace import TracerProvider  # type: ignore[import]
        from opentelemetry.sdk.trace.export import (  # type: ignore[import]
            BatchSpanProcessor,
            ConsoleSpanExporter,
        )
    except ImportError:
        log.info("OpenTelemetry not installed; skipping instrumentation")
        return False

    resource = Resource.create(
        {
            "service.name": os.getenv("OTEL_SERVICE_NAME", "pdf-provenance"),
            "service.instance.id": os.getenv("OTEL_SERVICE_INSTANCE_ID", os.getenv("HOSTNAME", str(uuid4()))),
        }
    )
    provider = TracerProvider(resource=resource)
    provider.add_span_processor(BatchSpanProcessor(ConsoleSpanExporter()))
    otel_trace.set_tracer_provider(provider)  # type: ignore[union-attr]
    FastAPIInstrumentor().instrument_app(app, tracer_provider=provider)

    _INSTRUMENTED = True
    log.info("OpenTelemetry instrumentation enabled")
    return True
