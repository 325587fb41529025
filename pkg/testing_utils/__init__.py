"""Shared testing utilities."""

from .fixtures import (
    FIXTURE_SEEDS,
    HELD_OUT_SEEDS,
    minimal_pdf,
    rewrite_info_strings,
    write_fixture_corpus,
    zero_metadata,
)
from .sync_client import Headers, Response, SyncASGIClient, create_client

__all__ = [
    "FIXTURE_SEEDS",
    "HELD_OUT_SEEDS",
    "Headers",
    "Response",
    "SyncASGIClient",
    "create_client",
    "minimal_pdf",
    "rewrite_info_strings",
    "write_fixture_corpus",
    "zero_metadata",
]
