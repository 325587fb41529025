"""Plain-text renderings of scan, audit, batch and rulepack results."""
from __future__ import annotations

import csv
import io
from collections import Counter
from functools import lru_cache
from pathlib import Path
from typing import Dict, List

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from app.core.producers import SECTION_ORDER
from app.core.rules import Rulepack
from app.data.signatures import PUBLISHED_RULE_COUNTS, PUBLISHED_RULE_TOTAL
from app.schemas import AUDIT_CSV_COLUMNS, AuditSummary, BatchStats, ScanReport, percentage

BASE_DIR = Path(__file__).resolve().parent.parent
TEMPLATES_DIR = BASE_DIR / "templates"

_BATCH_ROWS = (
    ("correct", "correct", "correct"),
    ("wrong", "wrong", "wrong"),
    ("no result", "no_result", "no_result"),
)


@lru_cache(maxsize=1)
def environment() -> Environment:
    return Environment(
        loader=FileSystemLoader(str(TEMPLATES_DIR)),
        undefined=StrictUndefined,
        trim_blocks=True,
        keep_trailing_newline=True,
        autoescape=False,
    )


def _cell(count: int, total: int) -> str:
    return f"{count:6d} ({percentage(count, total):6.2f}%)".rjust(16)


def render_scan_table(report: ScanReport) -> str:
    return environment().get_template("scan.txt.j2").render(report=report)


def render_audit_table(summary: AuditSummary) -> str:
    return environment().get_template("audit.txt.j2").render(summary=summary)


def render_audit_csv(summary: AuditSummary) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=AUDIT_CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(summary.csv_rows())
    return buffer.getvalue()


def render_batch_table(stats: BatchStats) -> str:
    """Section table (ambiguous folded into wrong), two-candidate table and per-producer table."""

    rows = [(label, field, getattr(stats, overall)) for label, field, overall in _BATCH_ROWS]
    return environment().get_template("batch.txt.j2").render(
        stats=stats,
        sections=SECTION_ORDER,
        rows=rows,
        cell=_cell,
    )


def rules_summary_rows(pack: Rulepack) -> List[Dict[str, object]]:
    """Per-producer counts by section, the common/OS-tagged split and the published total."""

    rows = []
    producers = sorted({rule.producer for rule in pack.rules} | set(PUBLISHED_RULE_COUNTS))
    for producer in producers:
        rules = [rule for rule in pack.rules if rule.producer == producer]
        by_os: Counter[str] = Counter()
        for rule in rules:
            for os_value in rule.os_tags:
                by_os[os_value.value] += 1
        rows.append(
            {
                "producer": producer,
                "by_section": [sum(1 for rule in rules if rule.section == kind) for kind in SECTION_ORDER],
                "total": len(rules),
                "published": PUBLISHED_RULE_COUNTS.get(producer),
                "common": sum(1 for rule in rules if not rule.os_tags),
                "by_os": sorted(by_os.items()),
            }
        )
    return rows


def render_rules_summary(pack: Rulepack) -> str:
    return environment().get_template("rules.txt.j2").render(
        pack=pack,
        sections=SECTION_ORDER,
        rows=rules_summary_rows(pack),
        totals=[len(pack.rules_for(kind)) for kind in SECTION_ORDER],
        published_total=PUBLISHED_RULE_TOTAL,
    )
