from __future__ import annotations

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, computed_field

from app.core.producers import SECTION_ORDER, Distro, OperatingSystem, SectionKind
from app.core.sections import Diagnostic
from app.services.auditor import ConsistencyReport, ConsistencyStatus, DeclaredMetadata, MetadataSource
from app.services.detector import Verdict, VerdictKind

SCHEMA_VERSION = 1

CSV_COLUMNS = (
    "file",
    "verdict",
    "producer",
    "candidates",
    "votes",
    "header",
    "body",
    "xref",
    "trailer",
    "os",
    "declared_producer",
    "consistency",
    "truth",
    "outcome",
    "error",
)

AUDIT_CSV_COLUMNS = (
    "file",
    "status",
    "declared_producer",
    "declared_source",
    "normalized",
    "verdict",
    "detected_producer",
    "candidates",
    "error",
)

def _joined(values) -> str:
    return ";".join(values)


class _Frozen(BaseModel):
    model_config = {
        "extra": "forbid",
        "frozen": True,
        "populate_by_name": True,
    }


class ReportVerdict(_Frozen):
    kind: VerdictKind
    producer: Optional[str] = None
    candidates: Tuple[str, ...] = ()


class ReportSection(_Frozen):
    kind: SectionKind
    candidates: Tuple[str, ...] = ()
    rules: Tuple[str, ...] = ()


class ReportOs(_Frozen):
    os: OperatingSystem
    distro: Optional[Distro] = None

    def render(self) -> str:
        return f"{self.os.value}/{self.distro.value}" if self.distro else self.os.value


class ReportDeclared(_Frozen):
    producer: Optional[str] = None
    creator: Optional[str] = None
    source: Optional[MetadataSource] = None
    info_producer: Optional[str] = None
    xmp_producer: Optional[str] = None
    normalized: Optional[str] = None


class ReportDiagnostic(_Frozen):
    code: str
    detail: str
    offset: Optional[int] = None


def _declared(declared: DeclaredMetadata, normalized: Optional[str]) -> ReportDeclared:
    return ReportDeclared(
        producer=declared.producer,
        creator=declared.creator,
        source=declared.source,
        info_producer=declared.info_producer,
        xmp_producer=declared.xmp_producer,
        normalized=normalized,
    )


class ScanReport(_Frozen):
    """JSON document printed by ``scan`` and returned by ``POST /v1/scan``."""

    schema_version: Literal[1] = Field(SCHEMA_VERSION, alias="schema")
    file: str
    verdict: ReportVerdict
    votes: Dict[str, int] = {}
    sections: Tuple[ReportSection, ...] = ()
    os: Tuple[ReportOs, ...] = ()
    distros: Tuple[Distro, ...] = ()
    declared: ReportDeclared = ReportDeclared()
    consistency: ConsistencyStatus = ConsistencyStatus.UNVERIFIABLE
    diagnostics: Tuple[ReportDiagnostic, ...] = ()

    @classmethod
    def build(
        cls,
        file: str,
        verdict: Verdict,
        audit: ConsistencyReport,
        diagnostics: Tuple[Diagnostic, ...] = (),
    ) -> "ScanReport":
        return cls(
            file=file,
            verdict=ReportVerdict(kind=verdict.kind, producer=verdict.producer, candidates=verdict.candidates),
            votes=verdict.votes,
            sections=tuple(
                ReportSection(kind=kind, candidates=verdict.section(kind).candidates, rules=verdict.section(kind).rule_ids)
                for kind in SECTION_ORDER
            ),
            os=tuple(ReportOs(os=item.os, distro=item.distro) for item in verdict.os_candidates),
            distros=verdict.distro_candidates,
            declared=_declared(audit.declared, audit.normalized_declared),
            consistency=audit.status,
            diagnostics=tuple(
                ReportDiagnostic(code=item.code, detail=item.detail, offset=item.offset) for item in diagnostics
            ),
        )

    def section(self, kind: SectionKind) -> ReportSection:
        for item in self.sections:
            if item.kind == kind:
                return item
        return ReportSection(kind=kind)

    def to_json(self, indent: Optional[int] = 2) -> str:
        return self.model_dump_json(by_alias=True, indent=indent)

    def csv_fields(self) -> Dict[str, str]:
        return {
            "file": self.file,
            "verdict": self.verdict.kind.value,
            "producer": self.verdict.producer or "",
            "candidates": _joined(self.verdict.candidates),
            "votes": _joined(f"{name}={count}" for name, count in sorted(self.votes.items())),
            **{kind.value: _joined(self.section(kind).candidates) for kind in SECTION_ORDER},
            "os": _joined(item.render() for item in self.os),
            "declared_producer": self.declared.producer or "",
            "consistency": self.consistency.value,
        }


class AuditReport(_Frozen):
    schema_version: Literal[1] = Field(SCHEMA_VERSION, alias="schema")
    file: str
    declared: ReportDeclared
    detected: ReportVerdict
    status: ConsistencyStatus

    @classmethod
    def build(cls, file: str, report: ConsistencyReport) -> "AuditReport":
        verdict = report.detected
        return cls(
            file=file,
            declared=_declared(report.declared, report.normalized_declared),
            detected=ReportVerdict(kind=verdict.kind, producer=verdict.producer, candidates=verdict.candidates),
            status=report.status,
        )

    def csv_fields(self) -> Dict[str, str]:
        return {
            "file": self.file,
            "status": self.status.value,
            "declared_producer": self.declared.producer or "",
            "declared_source": self.declared.source.value if self.declared.source else "",
            "normalized": self.declared.normalized or "",
            "verdict": self.detected.kind.value,
            "detected_producer": self.detected.producer or "",
            "candidates": _joined(self.detected.candidates),
            "error": "",
        }


class AuditSummary(_Frozen):
    schema_version: Literal[1] = Field(SCHEMA_VERSION, alias="schema")
    reports: Tuple[AuditReport, ...] = ()
    errors: Tuple[Dict[str, object], ...] = ()
    counts: Dict[ConsistencyStatus, int] = {}

    @classmethod
    def build(cls, reports: List[AuditReport], errors: List[Dict[str, object]]) -> "AuditSummary":
        counts = {status: 0 for status in ConsistencyStatus}
        for report in reports:
            counts[report.status] += 1
        return cls(reports=tuple(reports), errors=tuple(errors), counts=counts)

    def csv_rows(self) -> List[Dict[str, str]]:
        rows = [report.csv_fields() for report in self.reports]
        for error in self.errors:
            row = {column: "" for column in AUDIT_CSV_COLUMNS}
            row.update(file=str(error.get("instance", "")), error=str(error.get("type", "")))
            rows.append(row)
        return sorted(rows, key=lambda row: row["file"])


# ---------------------------------------------------------------------------
# Batch statistics


def percentage(part: int, whole: int) -> float:
    return round(100.0 * part / whole, 2) if whole else 0.0


class SectionCounts(_Frozen):
    correct: int = 0
    wrong: int = 0
    no_result: int = 0
    confused: int = 0
    error: int = 0

    @property
    def total(self) -> int:
        return self.correct + self.wrong + self.no_result


class ProducerRow(_Frozen):
    producer: str
    files: int
    detected: int

    @computed_field
    @property
    def percentage(self) -> float:
        return percentage(self.detected, self.files)


class OsCounts(_Frozen):
    """Files whose OS claim agrees with their label, over both denominators."""

    identified: int = 0
    contradicted: int = 0
    files: int = 0
    correct_files: int = 0

    @computed_field
    @property
    def over_files(self) -> float:
        return percentage(self.identified, self.files)

    @computed_field
    @property
    def over_correct(self) -> float:
        return percentage(self.identified, self.correct_files)


class BatchStats(_Frozen):
    schema_version: Literal[1] = Field(SCHEMA_VERSION, alias="schema")
    files: int = 0
    correct: int = 0
    wrong: int = 0
    ambiguous: int = 0
    no_result: int = 0
    unlabelled: int = 0
    errors: int = 0
    sections: Dict[SectionKind, SectionCounts] = {}
    producers: Tuple[ProducerRow, ...] = ()
    os: OsCounts = OsCounts()

    def section(self, kind: SectionKind) -> SectionCounts:
        return self.sections.get(kind, SectionCounts())

    @computed_field
    @property
    def percentages(self) -> Dict[str, float]:
        return {
            "correct": percentage(self.correct, self.files),
            "wrong": percentage(self.wrong, self.files),
            "ambiguous": percentage(self.ambiguous, self.files),
            "no_result": percentage(self.no_result, self.files),
        }
