"""Immutable views of the four structural sections of a PDF file."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

from app.core.lexer import PdfDictionary

HEADER_REF = "header"
PRESENCE_REF = "xref:presence"


class XrefKind(str, Enum):
    IN_USE = "n"
    FREE = "f"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    detail: str
    offset: Optional[int] = None


@dataclass(frozen=True)
class HeaderInfo:
    version: str
    binary_comment: Optional[bytes]
    offset: int = 0
    length: int = 0
    comment_offset: Optional[int] = None


@dataclass(frozen=True)
class IndirectObject:
    obj_num: int
    gen_num: int
    raw: bytes
    dict_keys: Tuple[str, ...]
    has_stream: bool
    is_metadata: bool
    offset: int
    dictionary: Optional[PdfDictionary] = None
    is_xref_stream: bool = False
    truncated: bool = False

    @property
    def length(self) -> int:
        return len(self.raw)

    @property
    def ref(self) -> str:
        return f"obj:{self.obj_num}:{self.gen_num}@{self.offset}"

    @property
    def head(self) -> bytes:
        """Bytes through the ``stream`` keyword line, or the whole object."""

        if not self.has_stream or self.dictionary is None:
            return self.raw
        local = self.dictionary.end - self.offset
        keyword = self.raw.find(b"stream", local)
        if keyword < 0:
            return self.raw
        end = keyword + len(b"stream")
        if self.raw.startswith(b"\r\n", end):
            end += 2
        elif self.raw[end : end + 1] in (b"\n", b"\r"):
            end += 1
        return self.raw[:end]


@dataclass(frozen=True)
class XrefEntry:
    offset: int
    generation: int
    kind: XrefKind
    raw_len: int

    def render(self) -> bytes:
        return f"{self.offset:010d} {self.generation:05d} {self.kind.value}".encode("ascii")


@dataclass(frozen=True)
class XrefSubsection:
    first_obj: int
    count: int
    entries: Tuple[XrefEntry, ...]


@dataclass(frozen=True)
class XrefTable:
    subsections: Tuple[XrefSubsection, ...]
    start_offset: int
    raw: bytes

    @property
    def length(self) -> int:
        return len(self.raw)


@dataclass(frozen=True)
class TrailerDict:
    keys: Tuple[str, ...]
    raw: bytes
    offset: int
    startxref_value: Optional[int] = None
    from_xref_stream: bool = False
    dictionary: Optional[PdfDictionary] = None

    @property
    def length(self) -> int:
        return len(self.raw)


@dataclass(frozen=True)
class PdfSections:
    header: HeaderInfo
    objects: Tuple[IndirectObject, ...]
    xref_tables: Tuple[XrefTable, ...]
    trailers: Tuple[TrailerDict, ...]
    file_len: int
    info_ref: Optional[Tuple[int, int]] = None
    revisions: int = 0
    diagnostics: Tuple[Diagnostic, ...] = field(default_factory=tuple)

    @property
    def classic_xref_absent(self) -> bool:
        return not self.xref_tables

    @property
    def presence_token(self) -> bytes:
        return b"A" if self.classic_xref_absent else b"P"

    @property
    def spans(self) -> Dict[str, Tuple[int, int]]:
        spans: Dict[str, Tuple[int, int]] = {HEADER_REF: (self.header.offset, self.header.length)}
        for obj in self.objects:
            spans[obj.ref] = (obj.offset, obj.length)
        for index, table in enumerate(self.xref_tables):
            spans[f"xref:{index}"] = (table.start_offset, table.length)
        for index, trailer in enumerate(self.trailers):
            spans[f"trailer:{index}"] = (trailer.offset, trailer.length)
        return spans

    @property
    def metadata_spans(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((obj.offset, obj.length) for obj in self.objects if obj.is_metadata)

    def body_objects(self) -> Tuple[IndirectObject, ...]:
        """Objects eligible for body rules: no metadata, no xref streams."""

        return tuple(obj for obj in self.objects if not obj.is_metadata and not obj.is_xref_stream)
