from __future__ import annotations

from http import HTTPStatus
from typing import Any, Dict, List, Optional

from fastapi import HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from app.core.errors import ProvenanceError

PROBLEM_TYPE_BASE = "urn:pdf-provenance:problem"


class ProblemDetailsException(HTTPException):
    def __init__(
        self,
        status_code: int,
        title: str,
        detail: str,
        type_suffix: str = "generic",
        errors: Optional[Dict[str, List[str]]] = None,
    ) -> None:
        self.errors = errors
        self.type_suffix = type_suffix
        super().__init__(status_code=status_code, detail=detail, headers=None)
        self.title = title


def _default_title(status: int) -> str:
    try:
        return HTTPStatus(status).phrase
    except ValueError:
        return "Error"


def problem_body(
    status: int,
    title: str,
    detail: str,
    type_suffix: str = "generic",
    instance: Optional[str] = None,
    errors: Optional[Dict[str, List[str]]] = None,
) -> Dict[str, Any]:
    body: Dict[str, Any] = {
        "type": f"{PROBLEM_TYPE_BASE}:{type_suffix}",
        "title": title,
        "status": status,
        "detail": detail,
        "instance": instance,
    }
    if errors:
        body["errors"] = errors
    return body


def provenance_problem(exc: ProvenanceError, instance: Optional[str] = None) -> Dict[str, Any]:
    return problem_body(exc.status, exc.title, exc.detail, exc.type_suffix, instance)


def problem_response(
    request: Request,
    status: int,
    title: str,
    detail: str,
    type_suffix: str = "generic",
    errors: Optional[Dict[str, List[str]]] = None,
) -> JSONResponse:
    body = problem_body(status, title, detail, type_suffix, request.url.path, errors)
    return JSONResponse(status_code=status, content=body, media_type="application/problem+json")


def from_exception(request: Request, exc: ProblemDetailsException) -> JSONResponse:
    return problem_response(request, exc.status_code, exc.title, str(exc.detail), exc.type_suffix, exc.errors)


def from_provenance_error(request: Request, exc: ProvenanceError) -> JSONResponse:
    return problem_response(request, exc.status, exc.title, exc.detail, exc.type_suffix)


def from_http_exception(request: Request, exc: HTTPException) -> JSONResponse:
    status = exc.status_code
    title = _default_title(status)
    detail = exc.detail if isinstance(exc.detail, str) else title
    return problem_response(request, status, title, detail, type_suffix=f"http-{status}")


def _map_validation_errors(errors: List[dict]) -> Dict[str, List[str]]:
    mapped: Dict[str, List[str]] = {}
    for error in errors:
        loc = error.get("loc", [])
        path = ".".join(str(part) for part in loc if part not in {"body", "query", "path"})
        if not path:
            path = ".".join(str(part) for part in loc) or "non_field_errors"
        mapped.setdefault(path, []).append(error.get("msg", "Invalid value"))
    return mapped


def from_validation_error(request: Request, exc: RequestValidationError) -> JSONResponse:
    return problem_response(
        request,
        status=422,
        title="Validation Failed",
        detail="Request parameters could not be validated.",
        type_suffix="validation",
        errors=_map_validation_errors(exc.errors()),
    )


def internal_server_error(request: Request) -> JSONResponse:
    return problem_response(
        request,
        status=500,
        title="Internal Server Error",
        detail="An unexpected error occurred.",
        type_suffix="internal",
    )
