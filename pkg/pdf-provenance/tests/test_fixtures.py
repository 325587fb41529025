from __future__ import annotations

import zlib

import pytest

from app.core.producers import SectionKind
from app.core.rules import evaluate_file
from app.core.segmenter import segment
from app.services.auditor import ConsistencyStatus
from app.services.batch import analyze
from app.services.corpus import read_manifest
from app.services.detector import VerdictKind, detect_bytes
from app.services.fixtures import (
    BUILTIN_PROFILES,
    DEFAULT_SEEDS,
    XREF_STREAM_WIDTHS,
    fixture_name,
    generate,
    profile_for,
)
from testing_utils import FIXTURE_SEEDS, rewrite_info_strings, zero_metadata

PROFILE_IDS = [profile.slug for profile in BUILTIN_PROFILES]


def test_every_builtin_producer_has_a_profile():
    assert len(BUILTIN_PROFILES) == 11
    assert len({profile.producer for profile in BUILTIN_PROFILES}) == 11
    with pytest.raises(KeyError):
        profile_for("Nobody")


@pytest.mark.slow
def test_every_fixture_detects_its_own_producer(builtin_pack, fixture_files):
    wrong = {
        key: detect_bytes(data, builtin_pack).producer
        for key, data in fixture_files.items()
        if detect_bytes(data, builtin_pack).producer != key[0]
    }
    assert wrong == {}
    assert len(fixture_files) == len(BUILTIN_PROFILES) * len(FIXTURE_SEEDS)


@pytest.mark.parametrize("profile", BUILTIN_PROFILES, ids=PROFILE_IDS)
def test_generation_is_deterministic(profile):
    assert generate(profile, 7) == generate(profile, 7)
    assert generate(profile, 7) != generate(profile, 8)


@pytest.mark.parametrize("profile", BUILTIN_PROFILES, ids=PROFILE_IDS)
def test_fixtures_segment_without_diagnostics(profile):
    sections = segment(generate(profile, 1))

    assert sections.diagnostics == ()
    assert sections.header.binary_comment == profile.header_magic
    assert sections.header.version == profile.version
    assert sections.classic_xref_absent == profile.uses_xref_stream
    assert sections.info_ref == (6, 0)
    assert not any(obj.truncated for obj in sections.objects)


def test_acrobat_fixture_header_and_xref_stream():
    data = generate(profile_for("AcrobatDistiller"), 1)
    sections = segment(data)

    assert data.split(b"\n")[1] == b"%" + bytes.fromhex("E2E3CFD3")
    assert sections.xref_tables == ()
    (trailer,) = sections.trailers
    assert trailer.from_xref_stream
    assert trailer.keys[0] == "/DecodeParms"


def test_xref_stream_rows_point_at_objects():
    data = generate(profile_for("XdviPDFmx"), 2)
    sections = segment(data)
    stream = next(obj for obj in sections.objects if obj.is_xref_stream)

    start = stream.raw.index(b"stream\n") + len(b"stream\n")
    end = stream.raw.rindex(b"\nendstream")
    rows = zlib.decompress(stream.raw[start:end])
    width = sum(XREF_STREAM_WIDTHS)
    offsets = {
        index: int.from_bytes(rows[index * width + 1 : index * width + 5], "big")
        for index in range(1, len(rows) // width)
    }
    for obj in sections.objects:
        assert offsets[obj.obj_num] == obj.offset


def test_word_fixture_has_double_trailer():
    sections = segment(generate(profile_for("MicrosoftOfficeWord"), 1))

    assert len(sections.trailers) == 2
    assert "/Prev" in sections.trailers[1].keys
    assert "/XRefStm" in sections.trailers[1].keys
    assert sections.xref_tables[0].raw.startswith(b"xref\r\n0 7\r\n0000000010 65535 f\r\n")


def test_libreoffice_trailer_ends_with_checksum():
    (trailer,) = segment(generate(profile_for("LibreOffice"), 1)).trailers
    assert trailer.keys[-1] == "/DocChecksum"


def test_emitted_corpus_and_manifest(corpus_dir):
    entries = read_manifest(corpus_dir / "manifest.tsv")

    assert len(entries) == len(BUILTIN_PROFILES) * len(DEFAULT_SEEDS)
    first = entries[0]
    assert first.path == corpus_dir / fixture_name(BUILTIN_PROFILES[0], DEFAULT_SEEDS[0])
    assert first.producer == BUILTIN_PROFILES[0].producer
    assert first.os == BUILTIN_PROFILES[0].os
    assert first.path.read_bytes() == generate(BUILTIN_PROFILES[0], DEFAULT_SEEDS[0])


def _without_metadata(report):
    return report.model_dump(exclude={"declared", "consistency"})


@pytest.mark.slow
@pytest.mark.parametrize("mutate", [zero_metadata, rewrite_info_strings], ids=["zeroed", "rewritten"])
def test_metadata_bytes_never_change_detection(builtin_pack, fixture_files, mutate):
    for key, data in fixture_files.items():
        mutated = mutate(data)
        assert len(mutated) == len(data)
        assert evaluate_file(builtin_pack, mutated) == evaluate_file(builtin_pack, data), key
        original = analyze(data, builtin_pack)
        changed = analyze(mutated, builtin_pack)
        assert _without_metadata(changed) == _without_metadata(original), key


def test_zeroed_metadata_is_unverifiable(builtin_pack, fixture_files):
    report = analyze(zero_metadata(fixture_files[("LibreOffice", 1)]), builtin_pack)
    assert report.declared.producer is None
    assert report.consistency == ConsistencyStatus.UNVERIFIABLE
    assert report.verdict.kind == VerdictKind.PRODUCER
    assert report.section(SectionKind.TRAILER).candidates == ("LibreOffice",)
