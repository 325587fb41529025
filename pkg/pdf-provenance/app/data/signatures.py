"""Published producer signatures: header magic numbers and trailer key orders.

These tables are the reference the builtin rule file is checked against; the
rule file itself is what the engine loads.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Tuple

from app.core.producers import Distro, OperatingSystem, Producer

KEY_GAP = "(?:[^/A-Za-z0-9][^/]*)?"

_HEX_ESCAPE = re.compile(r"\\x([0-9A-Fa-f]{2})")
_KEY_TOKEN = re.compile(r"trailer|/[A-Za-z]+")

_WIN, _LINUX, _MAC = OperatingSystem.WINDOWS, OperatingSystem.LINUX, OperatingSystem.MACOS
_TL, _MK = Distro.TEXLIVE, Distro.MIKTEX


@dataclass(frozen=True)
class MagicClaim:
    producer: str
    os_tags: FrozenSet[OperatingSystem] = frozenset()
    distro_tags: FrozenSet[Distro] = frozenset()


@dataclass(frozen=True)
class MagicNumberEntry:
    magic: bytes
    producers: Tuple[MagicClaim, ...]

    @property
    def producer_names(self) -> FrozenSet[str]:
        return frozenset(claim.producer for claim in self.producers)


@dataclass(frozen=True)
class TrailerKeySignature:
    producer: str
    key_sequence: Tuple[str, ...]
    shared_with: FrozenSet[str] = frozenset()
    distro_tags: FrozenSet[Distro] = frozenset()


def _claim(producer: Producer, os_tags=(), distro_tags=()) -> MagicClaim:
    return MagicClaim(producer.value, frozenset(os_tags), frozenset(distro_tags))


MAGIC_NUMBERS: Tuple[MagicNumberEntry, ...] = (
    MagicNumberEntry(bytes.fromhex("E2E3CFD3"), (_claim(Producer.AcrobatDistiller),)),
    MagicNumberEntry(bytes.fromhex("B5B5B5B5"), (_claim(Producer.MicrosoftOfficeWord, [_WIN]),)),
    MagicNumberEntry(
        bytes.fromhex("D0D4C5D8"),
        (
            _claim(Producer.PdfTeX, (), [_TL, _MK]),
            _claim(Producer.LuaTeX, [_LINUX], [_TL]),
        ),
    ),
    MagicNumberEntry(
        bytes.fromhex("CCD5C1D4C5D8D0C4C6"),
        (
            _claim(Producer.LuaTeX, [_LINUX], [_MK]),
            _claim(Producer.LuaTeX, [_MAC, _WIN], [_TL, _MK]),
        ),
    ),
    MagicNumberEntry(bytes.fromhex("E4F0EDF8"), (_claim(Producer.XdviPDFmx, (), [_TL, _MK]),)),
    # Ghostscript is listed with LaTeX distributions as published.
    MagicNumberEntry(bytes.fromhex("C7EC8FA2"), (_claim(Producer.Ghostscript, (), [_TL, _MK]),)),
    MagicNumberEntry(bytes.fromhex("C3A4C3BCC3B6C39F"), (_claim(Producer.LibreOffice, [_LINUX]),)),
    MagicNumberEntry(bytes.fromhex("C4E5F2E5EBA7F3A0D0C4C6"), (_claim(Producer.MacOSXQuartz, [_MAC]),)),
    MagicNumberEntry(bytes.fromhex("B5EDAEFB"), (_claim(Producer.Cairo),)),
    MagicNumberEntry(bytes.fromhex("D3EBE9E1"), (_claim(Producer.SkiaPDF),)),
    MagicNumberEntry(bytes.fromhex("F6E4FCDF"), (_claim(Producer.PDFLaTeX),)),
)

_SHARED_FOUR = ("trailer", "/Size", "/Root", "/Info", "/ID")
_TEXLIVE_STREAM = (
    "/Type", "/XRef", "/Index", "/Size", "/W", "/Root", "/Info", "/ID", "/Length", "/Filter", "/FlateDecode",
)
_FOUR_WAY = frozenset(
    {Producer.LuaTeX.value, Producer.PdfTeX.value, Producer.Ghostscript.value, Producer.MacOSXQuartz.value}
)


def _shared(producer: Producer, group: FrozenSet[str]) -> FrozenSet[str]:
    return group - {producer.value}


TRAILER_KEY_ORDERS: Tuple[TrailerKeySignature, ...] = (
    TrailerKeySignature(
        Producer.AcrobatDistiller.value,
        (
            "/DecodeParms", "/Columns", "/Predictor", "/Filter", "/FlateDecode", "/ID", "/Info",
            "/Length", "/Root", "/Size", "/Type", "/XRef", "/W",
        ),
    ),
    TrailerKeySignature(
        Producer.LuaTeX.value,
        _TEXLIVE_STREAM,
        frozenset({Producer.PdfTeX.value}),
        frozenset({_TL}),
    ),
    TrailerKeySignature(
        Producer.PdfTeX.value,
        _TEXLIVE_STREAM,
        frozenset({Producer.LuaTeX.value}),
        frozenset({_TL}),
    ),
    TrailerKeySignature(Producer.LuaTeX.value, _SHARED_FOUR, _shared(Producer.LuaTeX, _FOUR_WAY), frozenset({_MK})),
    TrailerKeySignature(Producer.PdfTeX.value, _SHARED_FOUR, _shared(Producer.PdfTeX, _FOUR_WAY), frozenset({_MK})),
    TrailerKeySignature(Producer.Ghostscript.value, _SHARED_FOUR, _shared(Producer.Ghostscript, _FOUR_WAY)),
    TrailerKeySignature(
        Producer.XdviPDFmx.value,
        ("/Type", "/XRef", "/Root", "/Info", "/ID", "/Size", "/W", "/Filter", "/FlateDecode", "/Length"),
    ),
    TrailerKeySignature(
        Producer.MicrosoftOfficeWord.value,
        ("trailer", "/Size", "/Root", "/Info", "/ID", "/Prev", "/XRefStm"),
    ),
    TrailerKeySignature(
        Producer.LibreOffice.value,
        ("trailer", "/Size", "/Root", "/Info", "/ID", "/DocChecksum"),
    ),
    TrailerKeySignature(Producer.MacOSXQuartz.value, _SHARED_FOUR, _shared(Producer.MacOSXQuartz, _FOUR_WAY)),
    TrailerKeySignature(
        Producer.Cairo.value,
        ("trailer", "/Size", "/Root", "/Info"),
        frozenset({Producer.SkiaPDF.value}),
    ),
    TrailerKeySignature(
        Producer.SkiaPDF.value,
        ("trailer", "/Size", "/Root", "/Info"),
        frozenset({Producer.Cairo.value}),
    ),
    # Published with a lowercase "/info".
    TrailerKeySignature(Producer.PDFLaTeX.value, ("trailer", "/Root", "/Info", "/ID", "/Size")),
)

# Rules per producer in the complete (unpublished) pack.
PUBLISHED_RULE_COUNTS: Dict[str, int] = {
    Producer.AcrobatDistiller.value: 13,
    Producer.MicrosoftOfficeWord.value: 16,
    Producer.LibreOffice.value: 15,
    Producer.Ghostscript.value: 15,
    Producer.MacOSXQuartz.value: 30,
    Producer.PdfTeX.value: 31,
    Producer.SkiaPDF.value: 12,
    Producer.Cairo.value: 16,
    Producer.XdviPDFmx.value: 13,
    Producer.LuaTeX.value: 22,
    Producer.PDFLaTeX.value: 9,
}
PUBLISHED_RULE_TOTAL = 192

# Producers whose files carry a classic cross-reference table.
CLASSIC_XREF_PRODUCERS: FrozenSet[str] = frozenset(
    producer.value
    for producer in Producer
    if producer not in (Producer.AcrobatDistiller, Producer.XdviPDFmx)
)


def magic_bytes(pattern: str) -> bytes:
    """Decode a magic rule pattern written as ``\\xNN`` escapes back to bytes."""

    return bytes(int(value, 16) for value in _HEX_ESCAPE.findall(pattern))


def keyorder_tokens(pattern: str) -> List[str]:
    """Name tokens of a key-order pattern, in order, as they are published."""

    flat = pattern.replace(KEY_GAP, " ").replace("[Ii]nfo", "Info")
    return _KEY_TOKEN.findall(flat)


def magic_for(producer: str) -> Optional[bytes]:
    for entry in MAGIC_NUMBERS:
        if producer in entry.producer_names:
            return entry.magic
    return None


def key_order_for(producer: str, distro: Optional[Distro] = None) -> Tuple[str, ...]:
    """The published key order for ``producer``; TeX engines depend on the distribution."""

    fallback: Tuple[str, ...] = ()
    for signature in TRAILER_KEY_ORDERS:
        if signature.producer != producer:
            continue
        if not signature.distro_tags or distro in signature.distro_tags:
            return signature.key_sequence
        fallback = fallback or signature.key_sequence
    return fallback
