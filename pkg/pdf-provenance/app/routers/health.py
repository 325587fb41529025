from __future__ import annotations

import time
from datetime import datetime, timezone
from typing import Any, Dict

from fastapi import APIRouter

from app.data.rulepacks import load_pack
from app.settings import get_settings

router = APIRouter(tags=["system"])

_STARTED_AT = time.time()


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@router.get("/healthz")
async def healthz() -> Dict[str, Any]:
    """Liveness probe; also reports which rulepack the service matches with."""

    pack = load_pack()
    return {
        "status": "ok",
        "service": get_settings().service_name,
        "time": _utc_now(),
        "uptime_seconds": round(time.time() - _STARTED_AT, 3),
        "rulepack": {"name": pack.name, "version": pack.version, "rules": len(pack.rules)},
    }
