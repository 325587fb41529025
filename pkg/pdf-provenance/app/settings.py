from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

DEFAULT_MIN_LEN = 8
DEFAULT_MAX_DISCRIMINACY = 0.0
DEFAULT_MAX_UPLOAD_BYTES = 64 * 1024 * 1024
DEFAULT_SERVICE_NAME = "pdf-provenance"


def _default_jobs() -> int:
    return max(1, os.cpu_count() or 1)


def _env_int(name: str, default: int, minimum: int = 0) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{name} must be an integer, got '{raw}'") from exc
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def _env_fraction(name: str, default: float) -> float:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = float(raw)
    except ValueError as exc:
        raise ValueError(f"{name} must be a number, got '{raw}'") from exc
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    rulepack: Optional[Path]
    jobs: int
    log_level: Optional[str]
    min_len: int
    max_discriminacy: float
    max_upload_bytes: int
    service_name: str


def load_settings() -> Settings:
    """Read ``PDFPROV_*`` variables; a ``.env`` file never overrides the real environment."""

    load_dotenv(override=False)
    rulepack = os.getenv("PDFPROV_RULEPACK", "").strip()
    log_level = os.getenv("PDFPROV_LOG_LEVEL", "").strip().upper()
    return Settings(
        rulepack=Path(rulepack) if rulepack else None,
        jobs=_env_int("PDFPROV_JOBS", _default_jobs(), minimum=1),
        log_level=log_level or None,
        min_len=_env_int("PDFPROV_MIN_LEN", DEFAULT_MIN_LEN, minimum=4),
        max_discriminacy=_env_fraction("PDFPROV_MAX_DISCRIMINACY", DEFAULT_MAX_DISCRIMINACY),
        max_upload_bytes=_env_int("PDFPROV_MAX_UPLOAD_BYTES", DEFAULT_MAX_UPLOAD_BYTES, minimum=1),
        service_name=os.getenv("SERVICE_NAME", "").strip() or DEFAULT_SERVICE_NAME,
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return load_settings()


REQUEST_ID_HEADER = "X-Request-ID"
