"""Skeletal PDF files carrying each producer's published coding style.

Every file has a header with the producer magic, a catalog, a page tree, one
page, one content stream written in the producer's stream style, a font and
an Info dictionary, followed by either a classic cross-reference table and
trailer or a cross-reference stream.
"""
from __future__ import annotations

import logging
import random
import zlib
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel

from app.core.producers import Distro, OperatingSystem, Producer, producer_slug
from app.data.signatures import key_order_for, magic_for
from app.services.corpus import ManifestEntry, render_manifest

log = logging.getLogger("pdf_provenance.fixtures")

DEFAULT_SEEDS = tuple(range(1, 11))
XREF_STREAM_WIDTHS = (1, 4, 2)

# Table-3 tokens that are values of the key before them, not keys.
_VALUE_TOKENS = {
    "/Filter": ("/FlateDecode",),
    "/Type": ("/XRef",),
    "/DecodeParms": ("/Columns", "/Predictor"),
}


class BodyStyle(str, Enum):
    NEUTRAL = "neutral"
    PDFTEX_SPACING = "pdftex-spacing"
    LUATEX_LINEBREAKS = "luatex-linebreaks"
    WORD_TEMPLATE = "word-template"


class DictStyle(str, Enum):
    COMPACT = "compact"
    SPACED = "spaced"
    LINES = "lines"


class ProducerProfile(BaseModel):
    producer: str
    header_magic: bytes
    trailer_keys: Tuple[str, ...]
    include_classic_xref: bool
    body_style: BodyStyle = BodyStyle.NEUTRAL
    double_trailer: bool = False
    os: Optional[OperatingSystem] = None
    distro: Optional[Distro] = None
    version: str = "1.5"
    eol: str = "\n"
    dict_style: DictStyle = DictStyle.SPACED
    space_after_array: bool = False
    free_head_offset: int = 0
    predictor: bool = False
    declared_producer: Optional[str] = None
    xmp_producer: Optional[str] = None

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }

    @property
    def slug(self) -> str:
        return producer_slug(self.producer)

    @property
    def uses_xref_stream(self) -> bool:
        return not self.include_classic_xref


def _profile(
    producer: Producer,
    *,
    os: Optional[OperatingSystem] = None,
    distro: Optional[Distro] = None,
    **fields,
) -> ProducerProfile:
    keys = key_order_for(producer.value, distro)
    magic = magic_for(producer.value)
    if magic is None or not keys:
        raise ValueError(f"no published signature for {producer.value}")
    return ProducerProfile(
        producer=producer.value,
        header_magic=magic,
        trailer_keys=keys,
        include_classic_xref=keys[0] == "trailer",
        os=os,
        distro=distro,
        **fields,
    )


BUILTIN_PROFILES: Tuple[ProducerProfile, ...] = (
    _profile(
        Producer.AcrobatDistiller,
        os=OperatingSystem.WINDOWS,
        version="1.6",
        dict_style=DictStyle.COMPACT,
        predictor=True,
        declared_producer="Acrobat Distiller 19.0 (Windows)",
    ),
    _profile(
        Producer.MicrosoftOfficeWord,
        os=OperatingSystem.WINDOWS,
        version="1.7",
        eol="\r\n",
        dict_style=DictStyle.COMPACT,
        space_after_array=True,
        free_head_offset=10,
        body_style=BodyStyle.WORD_TEMPLATE,
        double_trailer=True,
        declared_producer="Microsoft® Word 2016",
    ),
    _profile(
        Producer.LibreOffice,
        os=OperatingSystem.LINUX,
        version="1.6",
        declared_producer="LibreOffice 6.1",
    ),
    _profile(
        Producer.Ghostscript,
        os=OperatingSystem.LINUX,
        version="1.7",
        declared_producer="GPL Ghostscript 9.26",
    ),
    _profile(
        Producer.MacOSXQuartz,
        os=OperatingSystem.MACOS,
        version="1.3",
        declared_producer="Mac OS X 10.14.6 Quartz PDFContext",
    ),
    _profile(
        Producer.PdfTeX,
        os=OperatingSystem.WINDOWS,
        distro=Distro.MIKTEX,
        dict_style=DictStyle.COMPACT,
        body_style=BodyStyle.PDFTEX_SPACING,
        declared_producer="MiKTeX pdfTeX-1.40.21",
    ),
    _profile(
        Producer.SkiaPDF,
        os=OperatingSystem.LINUX,
        version="1.4",
        declared_producer="Skia/PDF m80",
    ),
    _profile(
        Producer.Cairo,
        os=OperatingSystem.LINUX,
        declared_producer="cairo 1.16.0 (https://cairographics.org)",
    ),
    _profile(
        Producer.XdviPDFmx,
        os=OperatingSystem.LINUX,
        distro=Distro.TEXLIVE,
        declared_producer="xdvipdfmx (20190503)",
    ),
    _profile(
        Producer.LuaTeX,
        os=OperatingSystem.LINUX,
        distro=Distro.TEXLIVE,
        dict_style=DictStyle.LINES,
        body_style=BodyStyle.LUATEX_LINEBREAKS,
        declared_producer="LuaTeX-1.10.0",
    ),
    _profile(
        Producer.PDFLaTeX,
        declared_producer="pdflatex online",
    ),
)


def profile_for(producer: object) -> ProducerProfile:
    name = producer.value if isinstance(producer, Producer) else str(producer)
    for profile in BUILTIN_PROFILES:
        if profile.producer == name:
            return profile
    raise KeyError(f"no builtin fixture profile for {name}")


# ---------------------------------------------------------------------------
# Rendering


def _literal(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace("(", "\\(").replace(")", "\\)")
    return f"({escaped})"


def _render_dict(entries: Sequence[Tuple[str, str]], profile: ProducerProfile) -> str:
    eol = profile.eol
    if profile.dict_style == DictStyle.LINES:
        body = "".join(f"{key} {value}{eol}" for key, value in entries)
        return f"<<{eol}{body}>>"
    if profile.dict_style == DictStyle.SPACED:
        return "<< " + " ".join(f"{key} {value}" for key, value in entries) + " >>"

    parts: List[str] = []
    previous = ""
    for key, value in entries:
        if profile.space_after_array and previous.endswith("]"):
            parts.append(" ")
        separator = "" if value[:1] in ("/", "[", "<", "(") else " "
        parts.append(f"{key}{separator}{value}")
        previous = value
    closing = " >>" if profile.space_after_array and previous.endswith("]") else ">>"
    return "<<" + "".join(parts) + closing


def _object(number: int, body: str, profile: ProducerProfile) -> bytes:
    eol = profile.eol
    return f"{number} 0 obj{eol}{body}{eol}endobj{eol}".encode("latin-1")


def _stream_object(number: int, dictionary: str, payload: bytes, profile: ProducerProfile) -> bytes:
    eol = profile.eol
    head = f"{number} 0 obj{eol}{dictionary}{eol}stream{eol}".encode("latin-1")
    tail = f"{eol}endstream{eol}endobj{eol}".encode("latin-1")
    return head + payload + tail


def _content_object(profile: ProducerProfile, rng: random.Random, seed: int) -> bytes:
    words = " ".join(rng.choice(("lorem", "ipsum", "dolor", "sit", "amet")) for _ in range(rng.randint(3, 90)))
    content = f"BT /F1 12 Tf 72 712 Td (Fixture {seed} {words}) Tj ET".encode("ascii")
    style = profile.body_style
    if style == BodyStyle.NEUTRAL:
        return _stream_object(4, _render_dict([("/Length", str(len(content)))], profile), content, profile)

    packed = zlib.compress(content)
    length = len(packed)
    if style == BodyStyle.WORD_TEMPLATE:
        head = f"4 0 obj\r\n<</Filter/FlateDecode/Length {length}>>\r\nstream\r\n"
        tail = "\r\nendstream\r\nendobj\r\n"
    elif style == BodyStyle.PDFTEX_SPACING:
        head = f"4 0 obj\n<</Length {length:<10d}/Filter/FlateDecode>>\nstream\n"
        tail = "\nendstream\nendobj\n"
    else:
        head = f"4 0 obj\n<<\n/Length {length}\n/Filter /FlateDecode\n>>\nstream\n"
        tail = "\nendstream\nendobj\n"
    return head.encode("ascii") + packed + tail.encode("ascii")


def _xmp_packet(producer: str) -> bytes:
    return (
        '<?xpacket begin="" id="W5M0MpCehiHzreSzNTczkc9d"?>\n'
        '<x:xmpmeta xmlns:x="adobe:ns:meta/">\n'
        ' <rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">\n'
        '  <rdf:Description rdf:about="" xmlns:pdf="http://ns.adobe.com/pdf/1.3/">\n'
        f"   <pdf:Producer>{producer}</pdf:Producer>\n"
        "  </rdf:Description>\n"
        " </rdf:RDF>\n"
        "</x:xmpmeta>\n"
        '<?xpacket end="w"?>'
    ).encode("utf-8")


def _id_value(first: str, second: str, profile: ProducerProfile) -> str:
    if profile.dict_style == DictStyle.COMPACT:
        return f"[<{first}><{second}>]"
    return f"[<{first}> <{second}>]"


def dictionary_entries(keys: Iterable[str], values: Dict[str, str]) -> List[Tuple[str, str]]:
    entries: List[Tuple[str, str]] = []
    skip: List[str] = []
    for token in keys:
        if token == "trailer":
            continue
        if skip and token == skip[0]:
            skip.pop(0)
            continue
        entries.append((token, values[token]))
        skip = list(_VALUE_TOKENS.get(token, ()))
    return entries


def _xref_table(offsets: Dict[int, int], size: int, profile: ProducerProfile) -> bytes:
    eol = profile.eol
    entry_eol = "\r\n" if eol == "\r\n" else " \n"
    lines = [f"xref{eol}0 {size}{eol}", f"{profile.free_head_offset:010d} 65535 f{entry_eol}"]
    for number in range(1, size):
        lines.append(f"{offsets[number]:010d} 00000 n{entry_eol}")
    return "".join(lines).encode("ascii")


def _xref_stream_rows(offsets: Dict[int, int], size: int) -> bytes:
    widths = XREF_STREAM_WIDTHS
    rows = [bytes([0]) + (0).to_bytes(widths[1], "big") + (0xFFFF).to_bytes(widths[2], "big")]
    for number in range(1, size):
        rows.append(bytes([1]) + offsets[number].to_bytes(widths[1], "big") + (0).to_bytes(widths[2], "big"))
    return b"".join(rows)


def _png_up(rows: bytes, columns: int) -> bytes:
    out = bytearray()
    previous = bytes(columns)
    for start in range(0, len(rows), columns):
        row = rows[start : start + columns]
        out.append(2)
        out.extend((value - above) & 0xFF for value, above in zip(row, previous))
        previous = row
    return bytes(out)


def generate(profile: ProducerProfile, seed: int) -> bytes:
    """Deterministic PDF bytes for ``profile``; ``seed`` varies lengths and IDs."""

    rng = random.Random(f"{profile.producer}:{seed}")
    eol = profile.eol
    id_first = f"{rng.getrandbits(128):032X}"
    id_second = f"{rng.getrandbits(128):032X}"
    checksum = f"{rng.getrandbits(128):032X}"

    buffer = bytearray(f"%PDF-{profile.version}{eol}%".encode("ascii") + profile.header_magic + eol.encode("ascii"))
    offsets: Dict[int, int] = {}

    def append(number: int, payload: bytes) -> None:
        offsets[number] = len(buffer)
        buffer.extend(payload)

    xmp_number = 7 if profile.xmp_producer is not None else None
    catalog = [("/Type", "/Catalog"), ("/Pages", "2 0 R")]
    if xmp_number is not None:
        catalog.append(("/Metadata", f"{xmp_number} 0 R"))
    append(1, _object(1, _render_dict(catalog, profile), profile))
    append(2, _object(2, _render_dict([("/Type", "/Pages"), ("/Kids", "[3 0 R]"), ("/Count", "1")], profile), profile))
    page = [
        ("/Type", "/Page"),
        ("/Parent", "2 0 R"),
        ("/MediaBox", "[0 0 612 792]"),
        ("/Resources", "<</Font <</F1 5 0 R>>>>"),
        ("/Contents", "4 0 R"),
    ]
    append(3, _object(3, _render_dict(page, profile), profile))
    append(4, _content_object(profile, rng, seed))
    font = [("/Type", "/Font"), ("/Subtype", "/Type1"), ("/BaseFont", "/Helvetica")]
    append(5, _object(5, _render_dict(font, profile), profile))
    info: List[Tuple[str, str]] = []
    if profile.declared_producer is not None:
        info.append(("/Producer", _literal(profile.declared_producer)))
    info.append(("/CreationDate", _literal(f"D:2020{rng.randint(1, 12):02d}{rng.randint(1, 28):02d}120000Z")))
    append(6, _object(6, _render_dict(info, profile), profile))
    if xmp_number is not None:
        packet = _xmp_packet(profile.xmp_producer or "")
        metadata = [("/Type", "/Metadata"), ("/Subtype", "/XML"), ("/Length", str(len(packet)))]
        append(xmp_number, _stream_object(xmp_number, _render_dict(metadata, profile), packet, profile))

    last = max(offsets)
    values = {
        "/Root": "1 0 R",
        "/Info": "6 0 R",
        "/ID": _id_value(id_first, id_second, profile),
        "/DocChecksum": f"/{checksum}",
    }

    if profile.include_classic_xref:
        size = last + 1
        values["/Size"] = str(size)
        xref_offset = len(buffer)
        buffer.extend(_xref_table(offsets, size, profile))
        keys = profile.trailer_keys
        if profile.double_trailer:
            keys = tuple(key for key in keys if key not in ("/Prev", "/XRefStm"))
        trailer = _render_dict(dictionary_entries(keys, values), profile)
        buffer.extend(f"trailer{eol}{trailer}{eol}startxref{eol}{xref_offset}{eol}".encode("latin-1"))
        startxref = xref_offset
        if profile.double_trailer:
            startxref = len(buffer)
            values["/Prev"] = str(xref_offset)
            values["/XRefStm"] = str(offsets[4])
            second = _render_dict(dictionary_entries(profile.trailer_keys, values), profile)
            buffer.extend(f"xref{eol}0 0{eol}trailer{eol}{second}{eol}startxref{eol}{startxref}{eol}".encode("latin-1"))
        buffer.extend(f"%%EOF{eol}".encode("ascii"))
        return bytes(buffer)

    number = last + 1
    size = number + 1
    offsets[number] = len(buffer)
    rows = _xref_stream_rows(offsets, size)
    columns = sum(XREF_STREAM_WIDTHS)
    values.update(
        {
            "/Size": str(size),
            "/W": "[" + " ".join(str(width) for width in XREF_STREAM_WIDTHS) + "]",
            "/Index": f"[0 {size}]",
            "/Type": "/XRef",
            "/Filter": "/FlateDecode",
        }
    )
    if profile.predictor:
        rows = _png_up(rows, columns)
        values["/DecodeParms"] = f"<</Columns {columns}/Predictor 12>>"
    packed = zlib.compress(rows)
    values["/Length"] = str(len(packed))
    dictionary = _render_dict(dictionary_entries(profile.trailer_keys, values), profile)
    buffer.extend(_stream_object(number, dictionary, packed, profile))
    buffer.extend(f"startxref{eol}{offsets[number]}{eol}%%EOF{eol}".encode("ascii"))
    return bytes(buffer)


def fixture_name(profile: ProducerProfile, seed: int) -> str:
    return f"{profile.slug}-{seed:03d}.pdf"


def emit_corpus(
    directory: Path,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    profiles: Sequence[ProducerProfile] = BUILTIN_PROFILES,
    manifest_name: str = "manifest.tsv",
) -> Path:
    """Write one file per (profile, seed) plus a miner-compatible manifest; returns the manifest path."""

    directory.mkdir(parents=True, exist_ok=True)
    entries: List[ManifestEntry] = []
    for profile in profiles:
        for seed in seeds:
            path = directory / fixture_name(profile, seed)
            path.write_bytes(generate(profile, seed))
            entries.append(ManifestEntry(path=path, producer=profile.producer, os=profile.os, distro=profile.distro))
    manifest = directory / manifest_name
    manifest.write_text(render_manifest(entries, base=directory), encoding="utf-8")
    log.info("wrote %d fixtures and %s", len(entries), manifest)
    return manifest
