from __future__ import annotations

import io
import logging

import pytest
from fastapi import FastAPI

from app import observability
from app.services.batch import scan_file
from app.settings import REQUEST_ID_HEADER


@pytest.fixture
def log_stream():
    stream = io.StringIO()
    observability.configure_logging("DEBUG", stream)
    yield stream
    observability.configure_logging("WARNING")


def test_configure_observability_gracefully_handles_missing_sdk(monkeypatch):
    monkeypatch.setattr(observability, "_INSTRUMENTED", False)
    app = FastAPI()
    assert observability.configure_observability(app) is False


def test_log_records_carry_scan_context(log_stream):
    logger = logging.getLogger("pdf_provenance.tests")
    token = observability.bind_scan_context("a.pdf")
    try:
        logger.warning("inside")
    finally:
        observability.reset_scan_context(token)
    logger.warning("outside")

    first, second = log_stream.getvalue().splitlines()
    assert "[file=a.pdf request=-] inside" in first
    assert "[file=- request=-] outside" in second
    assert observability.current_scan_file() is None


def test_scan_file_logs_its_path(tmp_path, builtin_pack, fixture_files, log_stream):
    path = tmp_path / "cairo.pdf"
    path.write_bytes(fixture_files[("Cairo", 1)])
    scan_file(path, builtin_pack)

    assert f"file={path} request=-] verdict producer" in log_stream.getvalue()


def test_configure_logging_replaces_its_handler():
    logger = logging.getLogger("pdf_provenance")
    first = observability.configure_logging("INFO", io.StringIO())
    second = observability.configure_logging("WARNING", io.StringIO())
    try:
        assert first not in logger.handlers
        assert second in logger.handlers
        assert logger.level == logging.WARNING
        assert logger.propagate is False
    finally:
        observability.configure_logging("WARNING")


def test_problem_log_carries_request_id(client, log_stream):
    response = client.post("/v1/scan", content=b"GIF89a", headers={REQUEST_ID_HEADER: "req-log"})
    assert response.status_code == 415
    assert "request=req-log] not-a-pdf" in log_stream.getvalue()
