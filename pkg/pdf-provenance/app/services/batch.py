"""Single-file analysis and corpus-wide batch statistics."""
from __future__ import annotations

import csv
import io
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from pathlib import Path
from typing import Any, Collection, Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel

from app.core.errors import ProvenanceError
from app.core.producers import SECTION_ORDER, OperatingSystem, SectionKind
from app.core.rules import Rulepack
from app.core.segmenter import segment
from app.observability import bind_scan_context, reset_scan_context
from app.schemas import CSV_COLUMNS, BatchStats, OsCounts, ProducerRow, ScanReport, SectionCounts
from app.services.auditor import audit_sections
from app.services.corpus import MANIFEST_NAME, ManifestEntry, read_manifest
from app.services.detector import (
    Outcome,
    OutcomeClass,
    PairOutcome,
    SectionVerdict,
    Verdict,
    classify,
    detect,
)
from app.utils.problem_details import problem_body, provenance_problem

log = logging.getLogger("pdf_provenance.batch")


class TruthSource(str, Enum):
    MANIFEST = "manifest"
    METADATA = "metadata"


def analyze(
    data: bytes,
    pack: Rulepack,
    file: str = "-",
    only: Optional[Collection[SectionKind]] = None,
) -> ScanReport:
    """Segment, detect and audit ``data``; raises ``NotAPdf`` for non-PDF input."""

    sections = segment(data)
    verdict = detect(sections, pack, only)
    audit = audit_sections(sections, pack, verdict)
    return ScanReport.build(file, verdict, audit, sections.diagnostics)


def scan_file(path: Path, pack: Rulepack, only: Optional[Collection[SectionKind]] = None) -> ScanReport:
    token = bind_scan_context(str(path))
    try:
        report = analyze(path.read_bytes(), pack, str(path), only)
        log.debug("verdict %s", report.verdict.kind.value)
        return report
    finally:
        reset_scan_context(token)


def report_verdict(report: ScanReport) -> Verdict:
    """The candidate-level view of a report, enough for ``classify``."""

    return Verdict(
        kind=report.verdict.kind,
        producer=report.verdict.producer,
        candidates=report.verdict.candidates,
        votes=report.votes,
        section_verdicts=tuple(
            SectionVerdict(section=kind, candidates=report.section(kind).candidates) for kind in SECTION_ORDER
        ),
    )


class FileResult(BaseModel):
    path: str
    truth: Optional[str] = None
    truth_os: Optional[OperatingSystem] = None
    report: Optional[ScanReport] = None
    error: Optional[Dict[str, Any]] = None
    outcome: Optional[OutcomeClass] = None

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }

    def csv_row(self) -> Dict[str, str]:
        row = {column: "" for column in CSV_COLUMNS}
        row["file"] = self.path
        if self.report is not None:
            row.update(self.report.csv_fields())
        else:
            row["verdict"] = "error"
        row["truth"] = self.truth or ""
        if self.outcome is not None:
            row["outcome"] = "ambiguous" if self.outcome.ambiguous else self.outcome.outcome.value
        if self.error is not None:
            row["error"] = str(self.error.get("type", ""))
        return row


class BatchResult(BaseModel):
    results: Tuple[FileResult, ...] = ()
    stats: BatchStats = BatchStats()

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }


def collect_entries(target: Path) -> List[ManifestEntry]:
    """Manifest entries for ``target``: a manifest file, a directory holding one, or a bare directory."""

    if target.is_dir():
        manifest = target / MANIFEST_NAME
        if manifest.is_file():
            return read_manifest(manifest)
        return [ManifestEntry(path=path, producer="") for path in sorted(target.rglob("*.pdf"))]
    return read_manifest(target)


def _scan_entry(
    entry: ManifestEntry,
    pack: Rulepack,
    only: Optional[Collection[SectionKind]],
    truth_source: TruthSource,
) -> FileResult:
    path = str(entry.path)
    try:
        report = scan_file(entry.path, pack, only)
    except ProvenanceError as exc:
        log.warning("%s: %s", path, exc.detail)
        return FileResult(path=path, truth=entry.producer or None, error=provenance_problem(exc, path))
    except OSError as exc:
        log.warning("%s: %s", path, exc)
        return FileResult(
            path=path,
            truth=entry.producer or None,
            error=problem_body(422, "File Unreadable", str(exc), "unreadable", path),
        )

    if truth_source == TruthSource.METADATA:
        truth = report.declared.normalized
        truth_os = None
    else:
        truth = entry.producer or None
        truth_os = entry.os
    outcome = classify(report_verdict(report), truth) if truth else None
    return FileResult(path=path, truth=truth, truth_os=truth_os, report=report, outcome=outcome)


def summarize(results: Iterable[FileResult]) -> BatchStats:
    """Aggregate per-file results; ambiguous verdicts count as wrong and are also broken out."""

    files = correct = wrong = ambiguous = no_result = unlabelled = errors = 0
    sections: Dict[SectionKind, Counter[str]] = {kind: Counter() for kind in SECTION_ORDER}
    per_producer: Dict[str, List[int]] = {}
    os_identified = os_contradicted = 0

    for result in results:
        if result.error is not None:
            errors += 1
            continue
        if result.outcome is None or result.truth is None or result.report is None:
            unlabelled += 1
            continue

        files += 1
        outcome = result.outcome
        row = per_producer.setdefault(result.truth, [0, 0])
        row[0] += 1
        if outcome.outcome == Outcome.CORRECT:
            correct += 1
            row[1] += 1
        elif outcome.outcome == Outcome.NO_RESULT:
            no_result += 1
        else:
            wrong += 1
            ambiguous += int(outcome.ambiguous)

        for item in outcome.sections:
            counter = sections[item.section]
            counter[item.outcome.value] += 1
            if item.pair == PairOutcome.CONFUSED:
                counter["confused"] += 1
            elif item.pair == PairOutcome.ERROR:
                counter["error"] += 1

        claimed = {candidate.os for candidate in result.report.os}
        if claimed:
            if result.truth_os is None or result.truth_os in claimed:
                os_identified += 1
            else:
                os_contradicted += 1

    return BatchStats(
        files=files,
        correct=correct,
        wrong=wrong,
        ambiguous=ambiguous,
        no_result=no_result,
        unlabelled=unlabelled,
        errors=errors,
        sections={
            kind: SectionCounts(
                correct=counter[Outcome.CORRECT.value],
                wrong=counter[Outcome.WRONG.value],
                no_result=counter[Outcome.NO_RESULT.value],
                confused=counter["confused"],
                error=counter["error"],
            )
            for kind, counter in sections.items()
        },
        producers=tuple(
            ProducerRow(producer=name, files=counts[0], detected=counts[1])
            for name, counts in sorted(per_producer.items())
        ),
        os=OsCounts(
            identified=os_identified,
            contradicted=os_contradicted,
            files=files,
            correct_files=correct,
        ),
    )


def run_batch(
    entries: Sequence[ManifestEntry],
    pack: Rulepack,
    *,
    jobs: int = 1,
    only: Optional[Collection[SectionKind]] = None,
    truth_source: TruthSource = TruthSource.MANIFEST,
) -> BatchResult:
    """Scan ``entries`` with ``jobs`` workers; results come back sorted by path."""

    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        results = list(executor.map(lambda entry: _scan_entry(entry, pack, only, truth_source), entries))
    results.sort(key=lambda item: item.path)
    log.info("batch of %d files with %d workers", len(results), jobs)
    return BatchResult(results=tuple(results), stats=summarize(results))


def render_csv(results: Iterable[FileResult]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for result in results:
        writer.writerow(result.csv_row())
    return buffer.getvalue()
