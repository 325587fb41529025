from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Tuple

import pytest

from app.cli import EXIT_AMBIGUOUS, EXIT_ERROR, EXIT_NO_RESULT, EXIT_OK, main
from app.schemas import AUDIT_CSV_COLUMNS, ScanReport
from app.services.fixtures import BUILTIN_PROFILES, emit_corpus, fixture_name, generate, profile_for
from testing_utils import zero_metadata


def run(*argv: str) -> Tuple[int, str]:
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def _write_fixture(directory: Path, producer: str, seed: int = 1) -> Path:
    profile = profile_for(producer)
    path = directory / fixture_name(profile, seed)
    path.write_bytes(generate(profile, seed))
    return path


def test_scan_word_fixture(tmp_path: Path):
    path = _write_fixture(tmp_path, "MicrosoftOfficeWord")
    code, output = run("scan", str(path))

    assert code == EXIT_OK
    report = json.loads(output)
    assert report["schema"] == 1
    assert report["file"] == str(path)
    assert report["verdict"] == {"kind": "producer", "producer": "MicrosoftOfficeWord", "candidates": ["MicrosoftOfficeWord"]}
    assert report["votes"]["MicrosoftOfficeWord"] == 4
    assert [section["kind"] for section in report["sections"]] == ["header", "body", "xref", "trailer"]
    assert report["os"] == [{"os": "Windows", "distro": None}]


def test_scan_zero_byte_file_is_a_problem(tmp_path: Path):
    path = tmp_path / "empty.pdf"
    path.write_bytes(b"")
    code, output = run("scan", str(path))

    assert code == EXIT_ERROR
    problem = json.loads(output)
    assert problem["schema"] == 1
    assert problem["type"].endswith(":not-a-pdf")
    assert problem["instance"] == str(path)


def test_scan_missing_file_is_unreadable(tmp_path: Path):
    code, output = run("scan", str(tmp_path / "absent.pdf"))
    assert code == EXIT_ERROR
    assert json.loads(output)["type"].endswith(":unreadable")


def test_scan_header_only_is_ambiguous_for_shared_magic(tmp_path: Path):
    path = _write_fixture(tmp_path, "PdfTeX")
    code, output = run("scan", str(path), "--sections", "header")

    assert code == EXIT_AMBIGUOUS
    report = json.loads(output)
    assert report["verdict"]["kind"] == "ambiguous"
    assert report["verdict"]["candidates"] == ["LuaTeX", "PdfTeX"]


def test_scan_rejects_unknown_section(tmp_path: Path, capsys):
    path = _write_fixture(tmp_path, "Cairo")
    with pytest.raises(SystemExit) as excinfo:
        run("scan", str(path), "--sections", "footer")
    assert excinfo.value.code == 2
    assert "unknown section 'footer'" in capsys.readouterr().err


@pytest.mark.parametrize("fmt", ["table", "csv"])
def test_scan_other_formats(tmp_path: Path, fmt):
    path = _write_fixture(tmp_path, "LibreOffice")
    code, output = run("scan", str(path), "--format", fmt)

    assert code == EXIT_OK
    assert "LibreOffice" in output
    if fmt == "csv":
        (row,) = list(csv.DictReader(io.StringIO(output)))
        assert row["producer"] == "LibreOffice"
        assert row["consistency"] == "Consistent"


def test_batch_csv_is_independent_of_worker_count(corpus_dir: Path):
    _, single = run("batch", str(corpus_dir), "--format", "csv", "--jobs", "1")
    _, parallel = run("batch", str(corpus_dir), "--format", "csv", "--jobs", "8")

    assert single == parallel
    rows = list(csv.DictReader(io.StringIO(single)))
    assert len(rows) == len(BUILTIN_PROFILES) * 10
    assert [row["file"] for row in rows] == sorted(row["file"] for row in rows)


@pytest.mark.slow
def test_batch_over_fixture_corpus_is_fully_correct(corpus_dir: Path, tmp_path: Path):
    csv_path = tmp_path / "results.csv"
    code, output = run("batch", str(corpus_dir / "manifest.tsv"), "--format", "json", "--csv", str(csv_path))

    assert code == EXIT_OK
    stats = json.loads(output)
    assert stats["files"] == len(BUILTIN_PROFILES) * 10
    assert stats["correct"] == stats["files"]
    assert (stats["wrong"], stats["ambiguous"], stats["no_result"], stats["errors"]) == (0, 0, 0, 0)
    assert all(row["detected"] == row["files"] for row in stats["producers"])
    assert stats["os"]["contradicted"] == 0
    assert csv_path.read_text(encoding="utf-8").startswith("file,verdict,producer,")


def test_batch_table_over_empty_directory(tmp_path: Path):
    code, output = run("batch", str(tmp_path))

    assert code == EXIT_OK
    assert "Detection by section (0 labelled files)" in output
    assert "0.00%" in output


def test_batch_bare_directory_counts_unlabelled(tmp_path: Path):
    _write_fixture(tmp_path, "Cairo")
    (tmp_path / "broken.pdf").write_bytes(b"GIF89a")
    code, output = run("batch", str(tmp_path), "--format", "json")

    assert code == EXIT_OK
    stats = json.loads(output)
    assert (stats["files"], stats["unlabelled"], stats["errors"]) == (0, 1, 1)


def test_batch_with_metadata_truth(tmp_path: Path):
    emit_corpus(tmp_path, (1, 2), (profile_for("LibreOffice"), profile_for("Ghostscript")), manifest_name="labels.tsv")
    code, output = run("batch", str(tmp_path), "--format", "json", "--truth", "metadata")

    assert code == EXIT_OK
    stats = json.loads(output)
    assert (stats["files"], stats["correct"]) == (4, 4)


def test_fixtures_emit_then_batch(tmp_path: Path):
    code, output = run("fixtures", "emit", "--dir", str(tmp_path), "--seeds", "2", "--first-seed", "50")

    assert code == EXIT_OK
    manifest = Path(output.strip())
    assert manifest == tmp_path / "manifest.tsv"
    assert (tmp_path / fixture_name(BUILTIN_PROFILES[0], 51)).is_file()

    code, output = run("batch", str(manifest), "--format", "json")
    stats = json.loads(output)
    assert stats["files"] == len(BUILTIN_PROFILES) * 2


def test_mine_then_scan_with_mined_pack(tmp_path: Path):
    corpus = tmp_path / "corpus"
    manifest = emit_corpus(corpus, (1, 2, 3), (profile_for("Cairo"), profile_for("MicrosoftOfficeWord")))
    pack = tmp_path / "mined.rules"

    code, output = run("mine", str(manifest), "--name", "tiny", "--output", str(pack))
    assert (code, output) == (EXIT_OK, "")
    assert pack.read_text(encoding="utf-8").startswith("# rulepack: tiny 1\n")

    sample = _write_fixture(tmp_path, "MicrosoftOfficeWord", seed=9)
    code, output = run("scan", str(sample), "--pack", str(pack))
    assert code == EXIT_OK
    assert json.loads(output)["verdict"]["producer"] == "MicrosoftOfficeWord"


def test_mine_empty_manifest_is_an_empty_group(tmp_path: Path):
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("# nothing here\n", encoding="utf-8")
    code, output = run("mine", str(manifest))

    assert code == EXIT_ERROR
    assert json.loads(output)["type"].endswith(":empty-group")


def test_mine_bad_manifest_line(tmp_path: Path):
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("only-a-path.pdf\n", encoding="utf-8")
    code, output = run("mine", str(manifest))

    problem = json.loads(output)
    assert code == EXIT_ERROR
    assert problem["type"].endswith(":manifest")
    assert "line 1" in problem["detail"]


def test_audit_single_file_json(tmp_path: Path):
    path = _write_fixture(tmp_path, "LibreOffice")
    code, output = run("audit", str(path))

    report = json.loads(output)
    assert code == EXIT_OK
    assert report["status"] == "Consistent"
    assert report["declared"]["producer"] == "LibreOffice 6.1"
    assert report["declared"]["normalized"] == "LibreOffice"
    assert report["detected"]["producer"] == "LibreOffice"


def test_audit_directory_collects_errors(tmp_path: Path):
    _write_fixture(tmp_path, "Ghostscript")
    _write_fixture(tmp_path, "Cairo")
    (tmp_path / "broken.pdf").write_bytes(b"not a pdf")
    code, output = run("audit", str(tmp_path))

    summary = json.loads(output)
    assert code == EXIT_OK
    assert len(summary["reports"]) == 2
    assert summary["counts"]["Consistent"] == 2
    (error,) = summary["errors"]
    assert error["type"].endswith(":not-a-pdf")


def test_audit_table(tmp_path: Path):
    _write_fixture(tmp_path, "SkiaPDF")
    code, output = run("audit", str(tmp_path), "--format", "table")
    assert code == EXIT_OK
    assert "SkiaPDF" in output


def test_rules_json_summary():
    code, output = run("rules", "--format", "json")
    body = json.loads(output)

    assert code == EXIT_OK
    assert (body["schema"], body["name"]) == (1, "builtin")
    rows = {row["producer"]: row for row in body["producers"]}
    assert rows["AcrobatDistiller"]["by_section"][0] == 1
    assert dict(rows["MicrosoftOfficeWord"]["by_os"])["Windows"] >= 1
    assert sum(sum(row["by_section"]) for row in rows.values()) == 42


def test_rules_table():
    code, output = run("rules")
    assert code == EXIT_OK
    assert "AcrobatDistiller" in output


def test_missing_pack_file_is_unreadable(tmp_path: Path):
    code, output = run("rules", "--pack", str(tmp_path / "absent.rules"))
    assert code == EXIT_ERROR
    assert json.loads(output)["type"].endswith(":unreadable")


def test_scan_without_matching_rules_is_no_result(tmp_path: Path):
    pack = tmp_path / "empty.rules"
    pack.write_text("# rulepack: empty 1\n", encoding="utf-8")
    path = tmp_path / "stripped.pdf"
    path.write_bytes(zero_metadata(generate(profile_for("MicrosoftOfficeWord"), 1)))

    code, output = run("scan", str(path), "--pack", str(pack))

    assert code == EXIT_NO_RESULT
    report = json.loads(output)
    assert report["verdict"] == {"kind": "no-result", "producer": None, "candidates": []}
    assert report["consistency"] == "Unverifiable"


def test_scan_json_validates_back_into_a_report(tmp_path: Path):
    path = _write_fixture(tmp_path, "XdviPDFmx")
    _, output = run("scan", str(path))

    report = ScanReport.model_validate_json(output)
    assert report.verdict.producer == "XdviPDFmx"
    assert ScanReport.model_validate_json(report.to_json()) == report


def test_audit_csv_lists_reports_and_errors(tmp_path: Path):
    _write_fixture(tmp_path, "LibreOffice")
    (tmp_path / "broken.pdf").write_bytes(b"GIF89a")
    code, output = run("audit", str(tmp_path), "--format", "csv")

    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(output)))
    assert list(rows[0]) == list(AUDIT_CSV_COLUMNS)
    by_name = {Path(row["file"]).name: row for row in rows}
    assert by_name["broken.pdf"]["error"].endswith(":not-a-pdf")
    (good,) = [row for name, row in by_name.items() if name != "broken.pdf"]
    assert (good["status"], good["normalized"], good["detected_producer"]) == ("Consistent", "LibreOffice", "LibreOffice")
    assert good["declared_source"] == "InfoDict"
