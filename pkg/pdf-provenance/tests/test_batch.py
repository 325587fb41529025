from __future__ import annotations

import json
from pathlib import Path

import pytest

from app.core.producers import OperatingSystem, SectionKind
from app.schemas import BatchStats
from app.services.batch import TruthSource, collect_entries, render_csv, run_batch
from app.services.corpus import ManifestEntry
from app.services.fixtures import emit_corpus, fixture_name, generate, profile_for


@pytest.fixture
def pdftex_entries(tmp_path: Path):
    profile = profile_for("PdfTeX")
    entries = []
    for seed in (1, 2, 3):
        path = tmp_path / fixture_name(profile, seed)
        path.write_bytes(generate(profile, seed))
        entries.append(ManifestEntry(path=path, producer="PdfTeX", os=OperatingSystem.WINDOWS))
    return entries


def test_header_only_batch_counts_confused_pairs(builtin_pack, pdftex_entries):
    stats = run_batch(pdftex_entries, builtin_pack, only=[SectionKind.HEADER]).stats

    assert (stats.files, stats.correct, stats.wrong, stats.ambiguous) == (3, 0, 3, 3)
    header = stats.section(SectionKind.HEADER)
    assert (header.wrong, header.confused, header.error) == (3, 3, 0)
    assert stats.section(SectionKind.TRAILER).no_result == 3
    assert stats.percentages["ambiguous"] == 100.0


def test_full_batch_is_correct(builtin_pack, pdftex_entries):
    result = run_batch(pdftex_entries, builtin_pack, jobs=3)

    assert result.stats.correct == 3
    assert [row.model_dump() for row in result.stats.producers] == [
        {"producer": "PdfTeX", "files": 3, "detected": 3, "percentage": 100.0}
    ]
    assert [item.outcome.outcome.value for item in result.results] == ["correct"] * 3


def test_stats_json_carries_percentages(builtin_pack, pdftex_entries):
    stats = run_batch(pdftex_entries[:2], builtin_pack, only=[SectionKind.HEADER]).stats
    body = json.loads(stats.model_dump_json(by_alias=True))

    assert body["percentages"] == {"correct": 0.0, "wrong": 100.0, "ambiguous": 100.0, "no_result": 0.0}
    assert body["producers"][0]["percentage"] == 0.0
    assert (body["os"]["over_files"], body["os"]["over_correct"]) == (stats.os.over_files, 0.0)


def test_empty_stats_percentages_are_zero():
    body = json.loads(BatchStats().model_dump_json(by_alias=True))
    assert body["percentages"] == {"correct": 0.0, "wrong": 0.0, "ambiguous": 0.0, "no_result": 0.0}
    assert (body["os"]["over_files"], body["os"]["over_correct"]) == (0.0, 0.0)

def test_wrong_label_is_counted_wrong(builtin_pack, pdftex_entries):
    relabelled = [ManifestEntry(path=entry.path, producer="Cairo") for entry in pdftex_entries]
    stats = run_batch(relabelled, builtin_pack).stats
    assert (stats.files, stats.wrong, stats.ambiguous) == (3, 3, 0)
    assert stats.producers[0].percentage == 0.0


def test_csv_rows_follow_path_order(builtin_pack, pdftex_entries):
    result = run_batch(list(reversed(pdftex_entries)), builtin_pack, jobs=2)
    lines = render_csv(result.results).splitlines()

    assert lines[0].startswith("file,verdict,producer,candidates,votes,header,body,xref,trailer,os")
    assert [line.split(",")[0] for line in lines[1:]] == sorted(str(entry.path) for entry in pdftex_entries)
    assert all(",correct," in line for line in lines[1:])


def test_errors_and_unlabelled_files(builtin_pack, tmp_path: Path):
    broken = tmp_path / "broken.pdf"
    broken.write_bytes(b"")
    missing = tmp_path / "missing.pdf"
    cairo = tmp_path / "cairo.pdf"
    cairo.write_bytes(generate(profile_for("Cairo"), 1))
    entries = [
        ManifestEntry(path=broken, producer="Cairo"),
        ManifestEntry(path=missing, producer="Cairo"),
        ManifestEntry(path=cairo, producer=""),
    ]

    result = run_batch(entries, builtin_pack)
    assert (result.stats.files, result.stats.errors, result.stats.unlabelled) == (0, 2, 1)
    errors = {Path(item.path).name: item.error["type"] for item in result.results if item.error}
    assert errors["broken.pdf"].endswith(":not-a-pdf")
    assert errors["missing.pdf"].endswith(":unreadable")


def test_metadata_truth_uses_declared_producer(builtin_pack, tmp_path: Path):
    emit_corpus(tmp_path, (1,), (profile_for("Ghostscript"),), manifest_name="labels.tsv")
    entries = collect_entries(tmp_path)
    assert [entry.producer for entry in entries] == [""]

    result = run_batch(entries, builtin_pack, truth_source=TruthSource.METADATA)
    (item,) = result.results
    assert item.truth == "Ghostscript"
    assert result.stats.correct == 1


def test_os_counts_over_both_denominators(builtin_pack, tmp_path: Path):
    word = profile_for("MicrosoftOfficeWord")
    path = tmp_path / "word.pdf"
    path.write_bytes(generate(word, 1))
    agreeing = ManifestEntry(path=path, producer=word.producer, os=OperatingSystem.WINDOWS)
    contradicting = ManifestEntry(path=path, producer=word.producer, os=OperatingSystem.LINUX)

    assert run_batch([agreeing], builtin_pack).stats.os.over_files == 100.0
    stats = run_batch([contradicting], builtin_pack).stats
    assert (stats.os.identified, stats.os.contradicted, stats.os.over_correct) == (0, 1, 0.0)


def test_jobs_must_be_positive(builtin_pack):
    with pytest.raises(ValueError):
        run_batch([], builtin_pack, jobs=0)
