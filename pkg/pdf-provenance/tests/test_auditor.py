from __future__ import annotations

import pytest

from app.core.producers import Producer
from app.services.auditor import (
    ConsistencyStatus,
    MetadataSource,
    consistency_check,
    extract_declared,
    normalize_producer_string,
)
from app.services.detector import VerdictKind, detect_bytes
from app.services.fixtures import generate, profile_for
from app.utils.pdf_strings import decode_pdf_string
from testing_utils import minimal_pdf, rewrite_info_strings


@pytest.mark.parametrize(
    "declared, expected",
    [
        ("GPL Ghostscript 9.23", "Ghostscript"),
        ("GPL Ghostscript 9.26", "Ghostscript"),
        ("Microsoft Word 2013", "MicrosoftOfficeWord"),
        ("Microsoft® Word for Office 365", "MicrosoftOfficeWord"),
        ("LibreOffice 6.1", "LibreOffice"),
        ("Skia/PDF m76", "SkiaPDF"),
        ("Acrobat Distiller 19.0 (Windows)", "AcrobatDistiller"),
        ("MiKTeX pdfTeX-1.40.21", "PdfTeX"),
        ("LuaTeX-1.10.0", "LuaTeX"),
        ("xdvipdfmx (20190503)", "XdviPDFmx"),
        ("cairo 1.16.0 (https://cairographics.org)", "Cairo"),
        ("Mac OS X 10.14.6 Quartz PDFContext", "MacOSXQuartz"),
        ("http://www.verypdf.com", "VeryPDF"),
        ("3-Heights(TM) PDF Optimization Shell", "3-Heights"),
        ("Online2PDF.com", None),
        ("Same as original file", None),
        ("", None),
        ("   ", None),
        (None, None),
    ],
)
def test_normalize_producer_string(declared, expected):
    assert normalize_producer_string(declared) == expected


@pytest.mark.parametrize("producer", list(Producer))
def test_normalize_is_idempotent(producer):
    assert normalize_producer_string(normalize_producer_string(producer.value)) == producer.value


def test_extract_info_producer(fixture_files):
    declared = extract_declared(fixture_files[("Ghostscript", 1)])
    assert declared.producer == "GPL Ghostscript 9.26"
    assert declared.source == MetadataSource.INFO
    assert declared.xmp_producer is None
    assert len(declared.raw_spans) == 1


def test_extract_without_metadata():
    declared = extract_declared(minimal_pdf(trailer=b"trailer\n<< /Size 2 /Root 1 0 R >>"))
    assert declared.producer is None
    assert declared.creator is None
    assert declared.source is None
    assert declared.raw_spans == ()


def test_extract_keeps_disagreeing_sources():
    profile = profile_for("LibreOffice").model_copy(update={"declared_producer": "A", "xmp_producer": "B"})
    declared = extract_declared(generate(profile, 1))

    assert declared.source == MetadataSource.BOTH
    assert (declared.info_producer, declared.xmp_producer) == ("A", "B")
    assert declared.producer == "A"
    assert declared.disagrees
    assert len(declared.raw_spans) == 2


def test_extract_xmp_only():
    profile = profile_for("Cairo").model_copy(update={"declared_producer": None, "xmp_producer": "cairo 1.16.0"})
    declared = extract_declared(generate(profile, 2))
    assert declared.source == MetadataSource.XMP
    assert declared.producer == "cairo 1.16.0"


def test_extract_decodes_escaped_and_hex_strings():
    info = b"2 0 obj\n<< /Producer (Tool \\(beta\\) \\101) /Creator <FEFF0057006F00720064> >>\nendobj\n"
    catalog = b"1 0 obj\n<< /Type /Catalog >>\nendobj\n"
    data = minimal_pdf(trailer=b"trailer\n<< /Size 3 /Root 1 0 R /Info 2 0 R >>", objects=(catalog, info))

    declared = extract_declared(data)
    assert declared.producer == "Tool (beta) A"
    assert declared.creator == "Word"


def test_decode_pdf_string_rejects_other_objects():
    assert decode_pdf_string(b"<< /A 1 >>") is None
    assert decode_pdf_string(b"42") is None
    assert decode_pdf_string(b"<48 69>") == "Hi"


def test_three_fixture_consistency_suite(builtin_pack):
    ghostscript = profile_for("Ghostscript")
    consistent = consistency_check(generate(profile_for("LibreOffice"), 1), builtin_pack)
    inconsistent = consistency_check(
        generate(ghostscript.model_copy(update={"declared_producer": "VeryPDF"}), 1), builtin_pack
    )
    unverifiable = consistency_check(
        generate(ghostscript.model_copy(update={"declared_producer": None}), 1), builtin_pack
    )

    assert consistent.status == ConsistencyStatus.CONSISTENT
    assert consistent.normalized_declared == "LibreOffice"
    assert inconsistent.status == ConsistencyStatus.INCONSISTENT
    assert inconsistent.detected.producer == "Ghostscript"
    assert inconsistent.normalized_declared == "VeryPDF"
    assert unverifiable.status == ConsistencyStatus.UNVERIFIABLE
    assert unverifiable.normalized_declared is None


def test_word_declaration_is_consistent(builtin_pack):
    profile = profile_for("MicrosoftOfficeWord").model_copy(update={"declared_producer": "Microsoft Word 2013"})
    report = consistency_check(generate(profile, 3), builtin_pack)
    assert report.status == ConsistencyStatus.CONSISTENT


def test_ambiguous_detection_is_unverifiable(builtin_pack):
    catalog = b"1 0 obj\n<< /Type /Catalog >>\nendobj\n"
    info = b"2 0 obj\n<< /Producer (cairo 1.16.0) >>\nendobj\n"
    trailer = b"trailer\n<< /Size 3 /Root 1 0 R /Info 2 0 R >>"
    data = minimal_pdf(comment=bytes.fromhex("D0D4C5D8"), trailer=trailer, objects=(catalog, info))

    report = consistency_check(data, builtin_pack)
    assert report.detected.kind == VerdictKind.AMBIGUOUS
    assert report.status == ConsistencyStatus.UNVERIFIABLE
    assert report.normalized_declared == "Cairo"


def test_declared_metadata_never_steers_detection(builtin_pack, fixture_files):
    data = fixture_files[("PdfTeX", 5)]
    rewritten = rewrite_info_strings(data, b"z")

    assert extract_declared(rewritten).producer != extract_declared(data).producer
    assert detect_bytes(rewritten, builtin_pack) == detect_bytes(data, builtin_pack)
    assert consistency_check(rewritten, builtin_pack).detected == detect_bytes(data, builtin_pack)
