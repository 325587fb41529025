from __future__ import annotations

from .pdfs import (
    FIXTURE_SEEDS,
    HELD_OUT_SEEDS,
    minimal_pdf,
    rewrite_info_strings,
    write_fixture_corpus,
    zero_metadata,
)

__all__ = [
    "FIXTURE_SEEDS",
    "HELD_OUT_SEEDS",
    "minimal_pdf",
    "rewrite_info_strings",
    "write_fixture_corpus",
    "zero_metadata",
]
