"""Lexical segmentation of raw PDF bytes into header, body, xref and trailer."""
from __future__ import annotations

import bisect
import logging
import re
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Tuple

from app.core.errors import NotAPdf
from app.core.lexer import (
    PdfDictionary,
    read_dictionary,
    skip_composite,
    skip_literal_string,
    skip_whitespace,
)
from app.core.sections import (
    Diagnostic,
    HeaderInfo,
    IndirectObject,
    PdfSections,
    TrailerDict,
    XrefEntry,
    XrefKind,
    XrefSubsection,
    XrefTable,
)

log = logging.getLogger("pdf_provenance.segmenter")

MAGIC = b"%PDF"
MAGIC_WINDOW = 1024
MIN_BINARY_BYTES = 4

_VERSION = re.compile(rb"%PDF-([0-9]+\.[0-9]+)")
_OBJ_HEADER = re.compile(
    rb"(?<![^\x00\t\n\x0c\r ])([0-9]+)[\x00\t\n\x0c\r ]+([0-9]+)[\x00\t\n\x0c\r ]+obj(?![A-Za-z0-9])"
)
_SECTION_KEYWORD = re.compile(rb"(?<![A-Za-z])(?:xref|trailer|startxref)(?![A-Za-z])")
_XREF_KEYWORD = re.compile(rb"(?<![A-Za-z])xref(?![A-Za-z])")
_TRAILER_KEYWORD = re.compile(rb"(?<![A-Za-z])trailer(?![A-Za-z])")
_STARTXREF = re.compile(rb"startxref[\x00\t\n\x0c\r ]+([0-9]+)")
_SUBSECTION = re.compile(rb"([0-9]+)[ \t]+([0-9]+)[ \t]*(?:\r\n|\r|\n)")
_ENTRY = re.compile(rb"([0-9]{10}) ([0-9]{5}) ([nf])(\r\n| \n| \r|\n|\r| |)")
_LOOSE_ENTRY = re.compile(rb"([0-9]+)[ \t]+([0-9]+)[ \t]+([nf])[ \t]*(?:\r\n|\r|\n)?")
_EOL = (b"\r\n", b"\n", b"\r")


@dataclass(frozen=True)
class _RawObject:
    obj_num: int
    gen_num: int
    start: int
    end: int
    dictionary: Optional[PdfDictionary]
    has_stream: bool
    truncated: bool


def parse_header(data: bytes) -> HeaderInfo:
    """Locate ``%PDF`` in the first 1024 bytes and read the binary comment line."""

    return _parse_header(data, [])


def _parse_header(data: bytes, diagnostics: List[Diagnostic]) -> HeaderInfo:
    if not data:
        raise NotAPdf("input is empty")
    offset = data.find(MAGIC, 0, MAGIC_WINDOW + len(MAGIC) - 1)
    if offset < 0:
        raise NotAPdf(f"no %PDF magic within the first {MAGIC_WINDOW} bytes")
    if offset > 0:
        diagnostics.append(Diagnostic("header-offset", f"magic found at offset {offset}", offset))

    version_match = _VERSION.match(data, offset)
    version = version_match.group(1).decode("ascii") if version_match else ""
    if not version:
        diagnostics.append(Diagnostic("missing-version", "header line carries no m.n version", offset))

    line_end = _line_end(data, offset)
    next_line = _after_eol(data, line_end)
    end = line_end

    comment: Optional[bytes] = None
    comment_offset: Optional[int] = None
    if data.startswith(b"%", next_line) and not data.startswith(b"%%EOF", next_line):
        comment_end = _line_end(data, next_line)
        body = data[next_line + 1 : comment_end]
        if body:
            comment = body
            comment_offset = next_line + 1
            end = comment_end
            high = sum(1 for byte in body if byte >= 0x80)
            if high < MIN_BINARY_BYTES:
                diagnostics.append(
                    Diagnostic(
                        "short-binary-comment",
                        f"binary comment holds {high} high-bit bytes",
                        comment_offset,
                    )
                )

    return HeaderInfo(
        version=version,
        binary_comment=comment,
        offset=offset,
        length=end - offset,
        comment_offset=comment_offset,
    )


def _line_end(data: bytes, pos: int) -> int:
    length = len(data)
    while pos < length and data[pos] not in (0x0A, 0x0D):
        pos += 1
    return pos


def _after_eol(data: bytes, pos: int) -> int:
    for eol in _EOL:
        if data.startswith(eol, pos):
            return pos + len(eol)
    return pos


class _Scanner:
    """Single pass state shared by the section extractors.

    The scanner does not require a header so that isolated fragments (a bare
    xref table or trailer) can be parsed on their own.
    """

    def __init__(self, data: bytes, start: int = 0) -> None:
        self.data = data
        self.start = start
        self.diagnostics: List[Diagnostic] = []

    @cached_property
    def raw_objects(self) -> Tuple[_RawObject, ...]:
        data = self.data
        found: List[_RawObject] = []
        pos = self.start
        while True:
            match = _OBJ_HEADER.search(data, pos)
            if match is None:
                break
            raw = self._read_object(match)
            found.append(raw)
            pos = max(raw.end, match.end())
        return tuple(found)

    def _read_object(self, match: re.Match[bytes]) -> _RawObject:
        data = self.data
        obj_num, gen_num = int(match.group(1)), int(match.group(2))
        pos = skip_whitespace(data, match.end())
        dictionary: Optional[PdfDictionary] = None
        if data.startswith(b"<<", pos):
            dictionary = read_dictionary(data, pos)
            pos = dictionary.end
        elif data.startswith(b"(", pos):
            pos = skip_literal_string(data, pos)
        elif data.startswith(b"[", pos):
            pos = skip_composite(data, pos)

        has_stream = False
        keyword = skip_whitespace(data, pos, comments=False)
        if data.startswith(b"stream", keyword):
            has_stream = True
            pos = self._stream_end(keyword + len(b"stream"), dictionary)

        limit = self._next_boundary(pos)
        endobj = data.find(b"endobj", pos, limit)
        if endobj >= 0:
            return _RawObject(obj_num, gen_num, match.start(), endobj + len(b"endobj"), dictionary, has_stream, False)

        end = limit
        while end > match.end() and data[end - 1] in b"\x00\t\n\x0c\r ":
            end -= 1
        self.diagnostics.append(
            Diagnostic("truncated-object", f"object {obj_num} {gen_num} has no endobj", match.start())
        )
        log.debug("truncated object %s %s at %s", obj_num, gen_num, match.start())
        return _RawObject(obj_num, gen_num, match.start(), end, dictionary, has_stream, True)

    def _stream_end(self, pos: int, dictionary: Optional[PdfDictionary]) -> int:
        data = self.data
        content = _after_eol(data, pos)
        declared = dictionary.integer("/Length") if dictionary is not None else None
        if declared is not None and declared >= 0:
            candidate = skip_whitespace(data, content + declared, comments=False)
            if data.startswith(b"endstream", candidate):
                return candidate + len(b"endstream")
        found = data.find(b"endstream", content)
        if found < 0:
            return len(data)
        return found + len(b"endstream")

    def _next_boundary(self, pos: int) -> int:
        candidates = [len(self.data)]
        header = _OBJ_HEADER.search(self.data, pos)
        if header is not None:
            candidates.append(header.start())
        keyword = _SECTION_KEYWORD.search(self.data, pos)
        if keyword is not None:
            candidates.append(keyword.start())
        return min(candidates)

    @cached_property
    def _object_starts(self) -> List[int]:
        return [obj.start for obj in self.raw_objects]

    def outside_objects(self, pos: int) -> bool:
        index = bisect.bisect_right(self._object_starts, pos) - 1
        if index < 0:
            return True
        return pos >= self.raw_objects[index].end

    @cached_property
    def xref_tables(self) -> Tuple[XrefTable, ...]:
        tables: List[XrefTable] = []
        for match in _XREF_KEYWORD.finditer(self.data, self.start):
            if not self.outside_objects(match.start()):
                continue
            tables.append(self._read_xref(match.start(), match.end()))
        return tuple(tables)

    def _read_xref(self, start: int, pos: int) -> XrefTable:
        data = self.data
        pos = skip_whitespace(data, pos, comments=False)
        subsections: List[XrefSubsection] = []
        end = pos
        while True:
            head = _SUBSECTION.match(data, pos)
            if head is None:
                break
            first, count = int(head.group(1)), int(head.group(2))
            pos = head.end()
            entries: List[XrefEntry] = []
            for _ in range(count):
                pos = skip_whitespace(data, pos, comments=False)
                entry = _ENTRY.match(data, pos)
                if entry is not None:
                    entries.append(
                        XrefEntry(
                            offset=int(entry.group(1)),
                            generation=int(entry.group(2)),
                            kind=XrefKind(entry.group(3).decode("ascii")),
                            raw_len=entry.end() - entry.start(),
                        )
                    )
                    pos = entry.end()
                    continue
                loose = _LOOSE_ENTRY.match(data, pos)
                if loose is None:
                    self.diagnostics.append(
                        Diagnostic(
                            "xref-count-mismatch",
                            f"subsection {first} {count} ends after {len(entries)} entries",
                            pos,
                        )
                    )
                    break
                self.diagnostics.append(
                    Diagnostic("malformed-xref-entry", "entry violates the 10+5 digit widths", pos)
                )
                pos = loose.end()
            subsections.append(XrefSubsection(first_obj=first, count=count, entries=tuple(entries)))
            end = pos
            pos = skip_whitespace(data, pos, comments=False)
        if not subsections:
            end = start + len(b"xref")
        return XrefTable(subsections=tuple(subsections), start_offset=start, raw=data[start:end])

    @cached_property
    def trailers(self) -> Tuple[TrailerDict, ...]:
        found: List[TrailerDict] = []
        data = self.data
        for match in _TRAILER_KEYWORD.finditer(data, self.start):
            if not self.outside_objects(match.start()):
                continue
            pos = skip_whitespace(data, match.end())
            if not data.startswith(b"<<", pos):
                self.diagnostics.append(
                    Diagnostic("unparseable-trailer", "trailer keyword without dictionary", match.start())
                )
                found.append(TrailerDict(keys=(), raw=data[match.start() : match.end()], offset=match.start()))
                continue
            dictionary = read_dictionary(data, pos)
            found.append(
                TrailerDict(
                    keys=dictionary.keys,
                    raw=data[match.start() : dictionary.end],
                    offset=match.start(),
                    startxref_value=self._startxref_after(dictionary.end),
                    dictionary=dictionary,
                )
            )
        for raw in self.raw_objects:
            if raw.dictionary is None or raw.dictionary.name("/Type") != "/XRef":
                continue
            dictionary = raw.dictionary
            found.append(
                TrailerDict(
                    keys=dictionary.keys,
                    raw=data[dictionary.start : dictionary.end],
                    offset=dictionary.start,
                    startxref_value=self._startxref_after(raw.end),
                    from_xref_stream=True,
                    dictionary=dictionary,
                )
            )
        found.sort(key=lambda trailer: trailer.offset)
        return tuple(found)

    def _startxref_after(self, pos: int) -> Optional[int]:
        pos = skip_whitespace(self.data, pos)
        match = _STARTXREF.match(self.data, pos)
        return int(match.group(1)) if match else None

    @cached_property
    def info_ref(self) -> Optional[Tuple[int, int]]:
        for trailer in reversed(self.trailers):
            if trailer.dictionary is None:
                continue
            ref = trailer.dictionary.reference("/Info")
            if ref is not None:
                return ref
        return None

    @cached_property
    def objects(self) -> Tuple[IndirectObject, ...]:
        info = self.info_ref
        built: List[IndirectObject] = []
        for raw in self.raw_objects:
            dictionary = raw.dictionary
            type_name = dictionary.name("/Type") if dictionary is not None else None
            is_metadata = type_name == "/Metadata" or (raw.obj_num, raw.gen_num) == info
            built.append(
                IndirectObject(
                    obj_num=raw.obj_num,
                    gen_num=raw.gen_num,
                    raw=self.data[raw.start : raw.end],
                    dict_keys=dictionary.keys if dictionary is not None else (),
                    has_stream=raw.has_stream,
                    is_metadata=is_metadata,
                    offset=raw.start,
                    dictionary=dictionary,
                    is_xref_stream=type_name == "/XRef",
                    truncated=raw.truncated,
                )
            )
        return tuple(built)

    def sorted_diagnostics(self) -> Tuple[Diagnostic, ...]:
        unique = dict.fromkeys(self.diagnostics)
        return tuple(sorted(unique, key=lambda item: (item.offset if item.offset is not None else -1, item.code)))


def extract_objects(data: bytes) -> List[IndirectObject]:
    return list(_Scanner(data).objects)


def parse_xref(data: bytes) -> List[XrefTable]:
    return list(_Scanner(data).xref_tables)


def extract_trailers(data: bytes) -> List[TrailerDict]:
    return list(_Scanner(data).trailers)


def segment(data: bytes) -> PdfSections:
    """Split ``data`` into its four sections; deterministic for identical input."""

    diagnostics: List[Diagnostic] = []
    header = _parse_header(data, diagnostics)
    scanner = _Scanner(data, start=header.offset + header.length)
    scanner.diagnostics.extend(diagnostics)

    objects = scanner.objects
    xref_tables = scanner.xref_tables
    trailers = scanner.trailers
    revisions = data.count(b"%%EOF")
    if revisions > 1:
        scanner.diagnostics.append(
            Diagnostic("incremental-update", f"file carries {revisions} revisions", data.rfind(b"%%EOF"))
        )

    sections = PdfSections(
        header=header,
        objects=objects,
        xref_tables=xref_tables,
        trailers=trailers,
        file_len=len(data),
        info_ref=scanner.info_ref,
        revisions=revisions,
        diagnostics=scanner.sorted_diagnostics(),
    )
    log.debug(
        "segmented %d bytes: %d objects, %d xref tables, %d trailers",
        len(data),
        len(objects),
        len(xref_tables),
        len(trailers),
    )
    return sections
