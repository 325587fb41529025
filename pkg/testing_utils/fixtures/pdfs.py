"""Hand-built PDF fragments and metadata mutations shared by the test suites."""
from __future__ import annotations

import re
import sys
from pathlib import Path
from typing import Iterable, Optional

PROJECT_ROOT = Path(__file__).resolve().parents[2] / "pdf-provenance"
if str(PROJECT_ROOT) not in sys.path:
    sys.path.append(str(PROJECT_ROOT))

from app.core.segmenter import segment  # noqa: E402
from app.services.fixtures import BUILTIN_PROFILES, emit_corpus  # noqa: E402

FIXTURE_SEEDS = tuple(range(1, 11))
HELD_OUT_SEEDS = tuple(range(101, 106))

_LITERAL = re.compile(rb"\((?:[^()\\]|\\.)*\)", re.S)


def minimal_pdf(
    comment: Optional[bytes] = None,
    trailer: Optional[bytes] = None,
    classic_xref: bool = True,
    objects: Iterable[bytes] = (b"1 0 obj\n<< /Type /Catalog >>\nendobj\n",),
) -> bytes:
    """A small PDF whose binary comment and trailer dictionary are chosen by the caller."""

    parts = [b"%PDF-1.5\n"]
    if comment is not None:
        parts.append(b"%" + comment + b"\n")
    offsets = []
    for obj in objects:
        offsets.append(sum(len(part) for part in parts))
        parts.append(obj)
    xref_offset = sum(len(part) for part in parts)
    if classic_xref:
        entries = [b"0000000000 65535 f \n"] + [b"%010d 00000 n \n" % offset for offset in offsets]
        parts.append(b"xref\n0 %d\n" % len(entries) + b"".join(entries))
    if trailer is not None:
        parts.append(trailer + b"\n")
    parts.append(b"startxref\n%d\n%%%%EOF\n" % xref_offset)
    return b"".join(parts)


def _metadata_interiors(data: bytes):
    for obj in segment(data).objects:
        if not obj.is_metadata:
            continue
        start = obj.raw.find(b"obj") + len(b"obj")
        end = obj.raw.rfind(b"endobj")
        if 0 < start < end:
            yield obj.offset + start, obj.offset + end


def zero_metadata(data: bytes) -> bytes:
    """Overwrite every byte strictly inside the Info and XMP objects with NUL."""

    mutated = bytearray(data)
    for start, end in _metadata_interiors(data):
        mutated[start:end] = bytes(end - start)
    return bytes(mutated)


def rewrite_info_strings(data: bytes, filler: bytes = b"x") -> bytes:
    """Replace the contents of every literal string inside metadata objects, keeping lengths."""

    mutated = bytearray(data)
    for start, end in _metadata_interiors(data):
        for match in _LITERAL.finditer(data, start, end):
            inner_start, inner_end = match.start() + 1, match.end() - 1
            mutated[inner_start:inner_end] = filler * (inner_end - inner_start)
    return bytes(mutated)


def write_fixture_corpus(directory: Path, seeds: Iterable[int] = FIXTURE_SEEDS, profiles=BUILTIN_PROFILES) -> Path:
    return emit_corpus(directory, tuple(seeds), tuple(profiles))
