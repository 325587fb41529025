"""Command-line frontend.

Exit codes: 0 for a producer verdict (and for successful non-scan commands),
2 for an ambiguous verdict, 3 for no result, 1 for any error. Errors are
printed on stdout as a problem-details JSON object carrying ``schema: 1``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO

from app.core.errors import ProvenanceError
from app.core.producers import SECTION_ORDER, SectionKind
from app.core.segmenter import segment
from app.data.rulepacks import load_pack
from app.observability import bind_scan_context, configure_logging, reset_scan_context
from app.schemas import SCHEMA_VERSION, AuditReport, AuditSummary
from app.services.auditor import audit_sections
from app.services.batch import FileResult, TruthSource, collect_entries, render_csv, run_batch, scan_file
from app.services.corpus import load_corpus
from app.services.detector import VerdictKind
from app.services.fixtures import emit_corpus
from app.services.miner import emit_rulepack, mine_sections
from app.services.reporting import (
    render_audit_csv,
    render_audit_table,
    render_batch_table,
    render_rules_summary,
    render_scan_table,
    rules_summary_rows,
)
from app.settings import get_settings
from app.utils.problem_details import problem_body, provenance_problem

log = logging.getLogger("pdf_provenance.cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_AMBIGUOUS = 2
EXIT_NO_RESULT = 3

VERDICT_EXIT_CODES = {
    VerdictKind.PRODUCER: EXIT_OK,
    VerdictKind.AMBIGUOUS: EXIT_AMBIGUOUS,
    VerdictKind.NO_RESULT: EXIT_NO_RESULT,
}


def parse_sections(value: str) -> List[SectionKind]:
    sections = []
    for item in value.split(","):
        item = item.strip().lower()
        if not item:
            continue
        try:
            sections.append(SectionKind(item))
        except ValueError:
            choices = ", ".join(kind.value for kind in SECTION_ORDER)
            raise argparse.ArgumentTypeError(f"unknown section '{item}' (choose from {choices})") from None
    if not sections:
        raise argparse.ArgumentTypeError("at least one section is required")
    return sections


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return number


def _fraction(value: str) -> float:
    number = float(value)
    if not 0.0 <= number <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return number


def _write(text: str, out: TextIO) -> None:
    out.write(text if text.endswith("\n") else text + "\n")


def _emit_problem(body: Dict[str, Any], out: TextIO) -> int:
    _write(json.dumps({"schema": SCHEMA_VERSION, **body}, indent=2), out)
    return EXIT_ERROR


# ---------------------------------------------------------------------------
# Commands


def cmd_scan(args: argparse.Namespace, out: TextIO) -> int:
    pack = load_pack(args.pack)
    report = scan_file(args.path, pack, args.sections)
    if args.format == "table":
        _write(render_scan_table(report), out)
    elif args.format == "csv":
        _write(render_csv([FileResult(path=report.file, report=report)]), out)
    else:
        _write(report.to_json(), out)
    return VERDICT_EXIT_CODES[report.verdict.kind]


def cmd_batch(args: argparse.Namespace, out: TextIO) -> int:
    pack = load_pack(args.pack)
    entries = collect_entries(args.target)
    jobs = args.jobs or get_settings().jobs
    result = run_batch(entries, pack, jobs=jobs, only=args.sections, truth_source=TruthSource(args.truth))
    csv_text = render_csv(result.results)
    if args.csv is not None:
        args.csv.write_text(csv_text, encoding="utf-8")
    if args.format == "csv":
        _write(csv_text, out)
    elif args.format == "json":
        _write(result.stats.model_dump_json(by_alias=True, indent=2), out)
    else:
        _write(render_batch_table(result.stats), out)
    return EXIT_OK


def cmd_audit(args: argparse.Namespace, out: TextIO) -> int:
    pack = load_pack(args.pack)
    target: Path = args.target
    single = not target.is_dir()
    paths = [target] if single else sorted(target.rglob("*.pdf"))

    reports: List[AuditReport] = []
    errors: List[Dict[str, Any]] = []
    for path in paths:
        token = bind_scan_context(str(path))
        try:
            reports.append(AuditReport.build(str(path), audit_sections(segment(path.read_bytes()), pack)))
        except ProvenanceError as exc:
            if single:
                raise
            errors.append(provenance_problem(exc, str(path)))
        finally:
            reset_scan_context(token)

    summary = AuditSummary.build(reports, errors)
    if args.format == "table":
        _write(render_audit_table(summary), out)
    elif args.format == "csv":
        _write(render_audit_csv(summary), out)
    elif single:
        _write(reports[0].model_dump_json(by_alias=True, indent=2), out)
    else:
        _write(summary.model_dump_json(by_alias=True, indent=2), out)
    return EXIT_OK


def cmd_mine(args: argparse.Namespace, out: TextIO) -> int:
    settings = get_settings()
    corpus = load_corpus(args.manifest)
    candidates = mine_sections(
        corpus,
        args.sections or SECTION_ORDER,
        min_len=args.min_len if args.min_len is not None else settings.min_len,
        max_discriminacy=(
            args.max_discriminacy if args.max_discriminacy is not None else settings.max_discriminacy
        ),
    )
    text = emit_rulepack(candidates, name=args.name)
    if args.output is not None:
        args.output.write_text(text, encoding="utf-8")
        log.info("wrote %s", args.output)
    else:
        _write(text, out)
    return EXIT_OK


def cmd_fixtures(args: argparse.Namespace, out: TextIO) -> int:
    seeds = range(args.first_seed, args.first_seed + args.seeds)
    manifest = emit_corpus(args.dir, seeds)
    _write(str(manifest), out)
    return EXIT_OK


def cmd_rules(args: argparse.Namespace, out: TextIO) -> int:
    pack = load_pack(args.pack)
    if args.format == "json":
        body = {
            "schema": SCHEMA_VERSION,
            "name": pack.name,
            "version": pack.version,
            "producers": rules_summary_rows(pack),
        }
        _write(json.dumps(body, indent=2), out)
    else:
        _write(render_rules_summary(pack), out)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, out: TextIO) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port, log_level=(args.log_level or "info").lower())
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_pack(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pack", type=Path, default=None, help="rule file to use instead of the builtin pack")


def _add_sections(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--sections",
        type=parse_sections,
        default=None,
        help="comma-separated subset of header,body,xref,trailer",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdf-provenance",
        description="Identify the software that produced a PDF from the coding style of its sections.",
    )
    parser.add_argument("--log-level", default=None, help="log level for stderr diagnostics (default WARNING)")
    commands = parser.add_subparsers(dest="command", required=True)

    scan = commands.add_parser("scan", help="detect the producer of one file")
    scan.add_argument("path", type=Path)
    _add_pack(scan)
    _add_sections(scan)
    scan.add_argument("--format", choices=("json", "csv", "table"), default="json")
    scan.set_defaults(handler=cmd_scan)

    batch = commands.add_parser("batch", help="scan a corpus and print detection statistics")
    batch.add_argument("target", type=Path, help="manifest file, or directory (with or without manifest.tsv)")
    _add_pack(batch)
    _add_sections(batch)
    batch.add_argument("--format", choices=("json", "csv", "table"), default="table")
    batch.add_argument("--truth", choices=[item.value for item in TruthSource], default=TruthSource.MANIFEST.value)
    batch.add_argument("--jobs", type=_positive_int, default=None, help="worker threads (default: CPU count)")
    batch.add_argument("--csv", type=Path, default=None, help="also write the per-file CSV to this path")
    batch.set_defaults(handler=cmd_batch)

    audit = commands.add_parser("audit", help="compare declared and detected producers")
    audit.add_argument("target", type=Path, help="a PDF file or a directory of PDF files")
    _add_pack(audit)
    audit.add_argument("--format", choices=("json", "csv", "table"), default="json")
    audit.set_defaults(handler=cmd_audit)

    mine = commands.add_parser("mine", help="derive a rulepack from a labelled corpus")
    mine.add_argument("manifest", type=Path)
    _add_sections(mine)
    mine.add_argument("--min-len", type=int, default=None)
    mine.add_argument("--max-discriminacy", type=_fraction, default=None)
    mine.add_argument("--name", default="mined")
    mine.add_argument("--output", type=Path, default=None)
    mine.set_defaults(handler=cmd_mine)

    fixtures = commands.add_parser("fixtures", help="synthetic producer fixtures")
    fixture_commands = fixtures.add_subparsers(dest="fixtures_command", required=True)
    emit = fixture_commands.add_parser("emit", help="write the fixture corpus and its manifest")
    emit.add_argument("--dir", type=Path, required=True)
    emit.add_argument("--seeds", type=_positive_int, default=10, help="files per producer profile")
    emit.add_argument("--first-seed", type=int, default=1)
    emit.set_defaults(handler=cmd_fixtures)

    rules = commands.add_parser("rules", help="summarize a rulepack")
    _add_pack(rules)
    rules.add_argument("--format", choices=("json", "table"), default="table")
    rules.set_defaults(handler=cmd_rules)

    serve = commands.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(handler=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level or get_settings().log_level)

    handler: Callable[[argparse.Namespace, TextIO], int] = args.handler
    try:
        return handler(args, out)
    except ProvenanceError as exc:
        log.debug("command failed", exc_info=True)
        return _emit_problem(provenance_problem(exc, _instance(args)), out)
    except OSError as exc:
        return _emit_problem(problem_body(422, "File Unreadable", str(exc), "unreadable", _instance(args)), out)
    except ValueError as exc:
        return _emit_problem(problem_body(422, "Invalid Argument", str(exc), "invalid-argument", _instance(args)), out)


def _instance(args: argparse.Namespace) -> Optional[str]:
    for name in ("path", "target", "manifest", "dir"):
        value = getattr(args, name, None)
        if value is not None:
            return str(value)
    return None


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
