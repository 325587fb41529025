"""Self-declared producer metadata and its agreement with the detected producer."""
from __future__ import annotations

import logging
import re
import zlib
from enum import Enum
from typing import Dict, Optional, Tuple
from xml.dom.minidom import Element, parseString
from xml.parsers.expat import ExpatError

from pydantic import BaseModel

from app.core.producers import Producer
from app.core.rules import Rulepack
from app.core.sections import IndirectObject, PdfSections
from app.core.segmenter import segment
from app.services.detector import Verdict, VerdictKind, detect
from app.utils.pdf_strings import decode_pdf_string, to_text

log = logging.getLogger("pdf_provenance.auditor")

RDF_NAMESPACE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XMP_NAMESPACE = "http://ns.adobe.com/xap/1.0/"
PDF_NAMESPACE = "http://ns.adobe.com/pdf/1.3/"

_OBJECT_BODY = re.compile(rb"obj(.*?)endobj", re.S)
_XMP_FALLBACK = {
    "producer": re.compile(rb"pdf:Producer(?:>|\s*=\s*[\"'])([^<\"']*)"),
    "creator": re.compile(rb"xmp:CreatorTool(?:>|\s*=\s*[\"'])([^<\"']*)"),
}

# Checked in order; every needle of an entry must occur.
_NEEDLES: Tuple[Tuple[Tuple[str, ...], Producer], ...] = (
    (("microsoft", "word"), Producer.MicrosoftOfficeWord),
    (("distiller",), Producer.AcrobatDistiller),
    (("libreoffice",), Producer.LibreOffice),
    (("ghostscript",), Producer.Ghostscript),
    (("quartz",), Producer.MacOSXQuartz),
    (("luatex",), Producer.LuaTeX),
    (("pdflatex",), Producer.PDFLaTeX),
    (("pdftex",), Producer.PdfTeX),
    (("xdvipdfm",), Producer.XdviPDFmx),
    (("skia",), Producer.SkiaPDF),
    (("cairo",), Producer.Cairo),
)

# Tools the rulepack cannot detect; a declaration naming one of them still
# contradicts any producer verdict.
_OTHER_TOOLS: Tuple[Tuple[str, str], ...] = (
    ("verypdf", "VeryPDF"),
    ("pdffiller", "PDFfiller"),
    ("3-heights", "3-Heights"),
    ("aspose", "Aspose.PDF"),
    ("abcpdf", "ABCpdf"),
    ("itext", "iText"),
    ("sambox", "SAMBox"),
    ("apache fop", "Apache FOP"),
    ("neevia", "Neevia PDFcompress"),
)


class MetadataSource(str, Enum):
    INFO = "InfoDict"
    XMP = "XmpStream"
    BOTH = "Both"


class ConsistencyStatus(str, Enum):
    CONSISTENT = "Consistent"
    INCONSISTENT = "Inconsistent"
    UNVERIFIABLE = "Unverifiable"


class DeclaredMetadata(BaseModel):
    producer: Optional[str] = None
    creator: Optional[str] = None
    source: Optional[MetadataSource] = None
    info_producer: Optional[str] = None
    xmp_producer: Optional[str] = None
    raw_spans: Tuple[Tuple[int, int], ...] = ()

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }

    @property
    def disagrees(self) -> bool:
        return bool(self.info_producer and self.xmp_producer and self.info_producer != self.xmp_producer)


class ConsistencyReport(BaseModel):
    declared: DeclaredMetadata
    detected: Verdict
    status: ConsistencyStatus
    normalized_declared: Optional[str] = None

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }


def normalize_producer_string(value: Optional[str]) -> Optional[str]:
    """Map a declared producer string to a producer name, ignoring versions.

    Strings naming a known tool outside the detectable set map to that tool's
    name; anything else maps to ``None``.
    """

    if not value:
        return None
    lowered = value.strip().lower()
    if not lowered:
        return None
    for producer in Producer:
        if lowered == producer.value.lower():
            return producer.value
    for needles, producer in _NEEDLES:
        if all(needle in lowered for needle in needles):
            return producer.value
    for needle, name in _OTHER_TOOLS:
        if needle in lowered:
            return name
    return None


def _find_object(sections: PdfSections, ref: Tuple[int, int]) -> Optional[IndirectObject]:
    found = None
    for obj in sections.objects:
        if (obj.obj_num, obj.gen_num) == ref:
            found = obj
    return found


def _object_value(obj: IndirectObject) -> bytes:
    match = _OBJECT_BODY.search(obj.raw)
    return match.group(1).strip() if match else b""


def _string_value(sections: PdfSections, raw: Optional[bytes]) -> Optional[str]:
    if raw is None:
        return None
    text = decode_pdf_string(raw)
    if text is None and raw.rstrip().endswith(b"R"):
        parts = raw.split()
        if len(parts) == 3 and parts[0].isdigit() and parts[1].isdigit():
            target = _find_object(sections, (int(parts[0]), int(parts[1])))
            if target is not None:
                text = decode_pdf_string(_object_value(target))
    if text is None:
        return None
    return text.strip() or None


def _stream_data(obj: IndirectObject) -> Optional[bytes]:
    head = obj.head
    if head is obj.raw or len(head) >= len(obj.raw):
        return None
    body = obj.raw[len(head) :]
    declared = obj.dictionary.integer("/Length") if obj.dictionary is not None else None
    if declared is not None and 0 <= declared <= len(body):
        body = body[:declared]
    else:
        end = body.rfind(b"endstream")
        body = body[:end] if end >= 0 else body
    if obj.dictionary is not None and b"/FlateDecode" in (obj.dictionary.get("/Filter") or b""):
        try:
            return zlib.decompress(body)
        except zlib.error:
            log.debug("undecodable metadata stream in object %s", obj.ref)
            return None
    return body


def _element_text(element: Element) -> str:
    parts = []
    for child in element.childNodes:
        if child.nodeType == child.TEXT_NODE:
            parts.append(child.data)
        elif child.nodeType == child.ELEMENT_NODE:
            parts.append(_element_text(child))
    return "".join(parts)


def _xmp_value(document, namespace: str, name: str) -> Optional[str]:
    for description in document.getElementsByTagNameNS(RDF_NAMESPACE, "Description"):
        if description.hasAttributeNS(namespace, name):
            value = description.getAttributeNS(namespace, name).strip()
            if value:
                return value
        for element in description.getElementsByTagNameNS(namespace, name):
            value = _element_text(element).strip()
            if value:
                return value
    return None


def xmp_fields(packet: bytes) -> Dict[str, Optional[str]]:
    """``producer`` (pdf:Producer) and ``creator`` (xmp:CreatorTool) of an XMP packet."""

    try:
        document = parseString(packet)
    except (ExpatError, ValueError):
        log.debug("XMP packet is not well-formed XML; falling back to pattern search")
        fields: Dict[str, Optional[str]] = {}
        for key, pattern in _XMP_FALLBACK.items():
            match = pattern.search(packet)
            fields[key] = (to_text(match.group(1)).strip() or None) if match else None
        return fields
    return {
        "producer": _xmp_value(document, PDF_NAMESPACE, "Producer"),
        "creator": _xmp_value(document, XMP_NAMESPACE, "CreatorTool"),
    }


def _metadata_stream(sections: PdfSections) -> Optional[IndirectObject]:
    found = None
    for obj in sections.objects:
        if obj.dictionary is not None and obj.dictionary.name("/Type") == "/Metadata" and obj.has_stream:
            found = obj
    return found


def declared_from_sections(sections: PdfSections) -> DeclaredMetadata:
    spans = []
    info_producer = info_creator = None
    if sections.info_ref is not None:
        info = _find_object(sections, sections.info_ref)
        if info is not None and info.dictionary is not None:
            spans.append((info.offset, info.length))
            info_producer = _string_value(sections, info.dictionary.get("/Producer"))
            info_creator = _string_value(sections, info.dictionary.get("/Creator"))

    xmp_producer = xmp_creator = None
    stream = _metadata_stream(sections)
    if stream is not None:
        spans.append((stream.offset, stream.length))
        packet = _stream_data(stream)
        if packet:
            fields = xmp_fields(packet)
            xmp_producer, xmp_creator = fields["producer"], fields["creator"]

    from_info = info_producer is not None or info_creator is not None
    from_xmp = xmp_producer is not None or xmp_creator is not None
    source: Optional[MetadataSource] = None
    if from_info and from_xmp:
        source = MetadataSource.BOTH
    elif from_info:
        source = MetadataSource.INFO
    elif from_xmp:
        source = MetadataSource.XMP

    return DeclaredMetadata(
        producer=info_producer or xmp_producer,
        creator=info_creator or xmp_creator,
        source=source,
        info_producer=info_producer,
        xmp_producer=xmp_producer,
        raw_spans=tuple(sorted(spans)),
    )


def extract_declared(data: bytes) -> DeclaredMetadata:
    return declared_from_sections(segment(data))


def _status(declared: DeclaredMetadata, verdict: Verdict) -> Tuple[ConsistencyStatus, Optional[str]]:
    normalized = normalize_producer_string(declared.info_producer)
    if normalized is None:
        normalized = normalize_producer_string(declared.xmp_producer)
    if verdict.kind != VerdictKind.PRODUCER or normalized is None:
        return ConsistencyStatus.UNVERIFIABLE, normalized
    if normalized == verdict.producer:
        return ConsistencyStatus.CONSISTENT, normalized
    return ConsistencyStatus.INCONSISTENT, normalized


def audit_sections(sections: PdfSections, pack: Rulepack, verdict: Optional[Verdict] = None) -> ConsistencyReport:
    detected = verdict if verdict is not None else detect(sections, pack)
    declared = declared_from_sections(sections)
    status, normalized = _status(declared, detected)
    return ConsistencyReport(
        declared=declared,
        detected=detected,
        status=status,
        normalized_declared=normalized,
    )


def consistency_check(data: bytes, pack: Rulepack) -> ConsistencyReport:
    """Detect from the bytes, read the declared producer, and compare the two.

    Detection never looks at the declared values.
    """

    return audit_sections(segment(data), pack)
