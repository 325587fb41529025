from __future__ import annotations

from typing import Optional


class ProvenanceError(ValueError):
    """Base class for failures surfaced to callers as problem details."""

    type_suffix = "provenance-error"
    title = "Provenance Error"
    status = 422

    def __init__(self, detail: str) -> None:
        super().__init__(detail)
        self.detail = detail


class NotAPdf(ProvenanceError):
    type_suffix = "not-a-pdf"
    title = "Not a PDF"
    status = 415


class RuleParseError(ProvenanceError):
    type_suffix = "rule-parse"
    title = "Rule File Invalid"

    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class PatternCompileError(ProvenanceError):
    type_suffix = "pattern-compile"
    title = "Rule Pattern Invalid"

    def __init__(self, rule_id: str, reason: str) -> None:
        super().__init__(f"rule {rule_id}: {reason}")
        self.rule_id = rule_id
        self.reason = reason


class EmptyGroup(ProvenanceError):
    type_suffix = "empty-group"
    title = "Empty Corpus Group"

    def __init__(self, producer: Optional[str] = None) -> None:
        if producer is None:
            detail = "corpus contains no labelled files"
        else:
            detail = f"corpus group for {producer} is empty"
        super().__init__(detail)
        self.producer = producer


class SectionAbsentEverywhere(ProvenanceError):
    type_suffix = "section-absent"
    title = "Section Absent"

    def __init__(self, producer: str, section: str) -> None:
        super().__init__(f"no file of {producer} carries a {section} section")
        self.producer = producer
        self.section = section


class ManifestError(ProvenanceError):
    type_suffix = "manifest"
    title = "Manifest Invalid"

    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"manifest line {line}: {reason}")
        self.line = line
        self.reason = reason
