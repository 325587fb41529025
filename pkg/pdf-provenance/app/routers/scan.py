from __future__ import annotations

import logging
from typing import Any, Dict, List, Optional

from anyio import to_thread
from fastapi import APIRouter, Query, Request

from app.core.producers import SectionKind
from app.core.segmenter import segment
from app.data.rulepacks import load_pack
from app.observability import bind_scan_context, reset_scan_context
from app.schemas import AuditReport
from app.services.auditor import audit_sections
from app.services.batch import analyze
from app.settings import get_settings
from app.utils.problem_details import ProblemDetailsException

log = logging.getLogger("pdf_provenance.api")

router = APIRouter(prefix="/v1", tags=["scan"])


async def _read_upload(request: Request) -> bytes:
    limit = get_settings().max_upload_bytes
    declared = request.headers.get("content-length")
    if declared is not None and declared.isdigit() and int(declared) > limit:
        raise _too_large(limit)
    body = bytearray()
    async for chunk in request.stream():
        body.extend(chunk)
        if len(body) > limit:
            raise _too_large(limit)
    return bytes(body)


def _too_large(limit: int) -> ProblemDetailsException:
    return ProblemDetailsException(
        status_code=413,
        title="Payload Too Large",
        detail=f"uploads are limited to {limit} bytes",
        type_suffix="payload-too-large",
    )


def _scan(data: bytes, name: str, sections: Optional[List[SectionKind]]) -> Dict[str, Any]:
    token = bind_scan_context(name)
    try:
        report = analyze(data, load_pack(), name, sections)
    finally:
        reset_scan_context(token)
    return report.model_dump(mode="json", by_alias=True)


def _audit(data: bytes, name: str) -> Dict[str, Any]:
    token = bind_scan_context(name)
    try:
        report = AuditReport.build(name, audit_sections(segment(data), load_pack()))
    finally:
        reset_scan_context(token)
    return report.model_dump(mode="json", by_alias=True)


@router.post("/scan")
async def scan(
    request: Request,
    sections: Optional[List[SectionKind]] = Query(default=None),
    filename: str = Query(default="upload.pdf", max_length=255),
) -> Dict[str, Any]:
    """Detect the producer of the raw PDF sent as the request body."""

    data = await _read_upload(request)
    return await to_thread.run_sync(_scan, data, filename, sections)


@router.post("/audit")
async def audit(
    request: Request,
    filename: str = Query(default="upload.pdf", max_length=255),
) -> Dict[str, Any]:
    data = await _read_upload(request)
    return await to_thread.run_sync(_audit, data, filename)
