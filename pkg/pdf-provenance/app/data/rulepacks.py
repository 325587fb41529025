"""Locating and loading rulepacks: the embedded builtin pack or a user file."""
from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path
from typing import Optional

from app.core.rules import Rulepack, load_rulepack
from app.settings import get_settings

log = logging.getLogger("pdf_provenance.rulepacks")

BUILTIN_RULES_PATH = Path(__file__).resolve().parent / "builtin.rules"


def builtin_source() -> str:
    return BUILTIN_RULES_PATH.read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def builtin() -> Rulepack:
    return load_rulepack(builtin_source(), name="builtin", version="1")


@lru_cache(maxsize=32)
def _load_file(path: Path, mtime_ns: int) -> Rulepack:
    text = path.read_text(encoding="utf-8")
    pack = load_rulepack(text, name=path.stem)
    log.info("loaded rulepack %s (%d rules) from %s", pack.name, len(pack.rules), path)
    return pack


def load_pack(path: Optional[Path] = None) -> Rulepack:
    """Explicit ``path`` first, then ``PDFPROV_RULEPACK``, then the builtin pack."""

    resolved = path if path is not None else get_settings().rulepack
    if resolved is None:
        return builtin()
    resolved = Path(resolved)
    if not resolved.is_file():
        raise FileNotFoundError(f"Rulepack file not found: {resolved}")
    return _load_file(resolved.resolve(), resolved.stat().st_mtime_ns)
