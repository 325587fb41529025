"""Declarative byte-pattern rules: loading, rendering and matching."""
from __future__ import annotations

import logging
import re
from collections import Counter
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, field_validator

from app.core.errors import PatternCompileError, RuleParseError
from app.core.producers import (
    SECTION_ORDER,
    Distro,
    OperatingSystem,
    RuleKind,
    SectionKind,
    distro_token,
    os_token,
    parse_distro,
    parse_os,
    producer_name,
)
from app.core.sections import HEADER_REF, PRESENCE_REF, PdfSections
from app.core.segmenter import segment

log = logging.getLogger("pdf_provenance.rules")

RULE_ID_PATTERN = re.compile(r"[A-Za-z0-9][A-Za-z0-9_.-]*\Z")
PRODUCER_PATTERN = re.compile(r"[A-Za-z][A-Za-z0-9_.-]*\Z")
_PACK_COMMENT = re.compile(r"#\s*rulepack:\s*(\S+)\s+(\S+)")
_RULE_OPEN = re.compile(r"rule\s+(\S+)\s*\{\Z")
_ASSIGNMENT = re.compile(r"([a-z]+)\s*=\s*(.*)\Z")
_REQUIRED_KEYS = ("producer", "section", "kind", "pattern")
_KNOWN_KEYS = frozenset(_REQUIRED_KEYS) | {"os", "distro"}


def dialect_violation(pattern: str) -> Optional[str]:
    """Return why ``pattern`` leaves the supported byte-regex subset, if it does.

    Lookarounds, named groups, inline flags and backreferences are rejected;
    everything else is left to ``re`` to validate.
    """

    pos = 0
    in_class = False
    length = len(pattern)
    while pos < length:
        char = pattern[pos]
        if char == "\\":
            nxt = pattern[pos + 1 : pos + 2]
            if not in_class and nxt and (nxt in "123456789" or nxt in "gk"):
                return f"backreference '\\{nxt}' at column {pos}"
            pos += 2
            continue
        if in_class:
            if char == "]":
                in_class = False
        elif char == "[":
            in_class = True
            # a leading ']' or '^]' is literal inside the class
            if pattern[pos + 1 : pos + 2] == "^":
                pos += 1
            if pattern[pos + 1 : pos + 2] == "]":
                pos += 1
        elif char == "(" and pattern[pos + 1 : pos + 2] == "?":
            if pattern[pos + 2 : pos + 3] != ":":
                return f"unsupported group construct at column {pos}"
        pos += 1
    return None


@lru_cache(maxsize=4096)
def compile_pattern(pattern: str) -> re.Pattern[bytes]:
    return re.compile(pattern.encode("utf-8"))


class Rule(BaseModel):
    id: str = Field(min_length=1)
    producer: str
    section: SectionKind
    kind: RuleKind
    pattern: str
    os_tags: FrozenSet[OperatingSystem] = frozenset()
    distro_tags: FrozenSet[Distro] = frozenset()

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }

    @field_validator("id")
    @classmethod
    def _validate_id(cls, value: str) -> str:
        if not RULE_ID_PATTERN.match(value):
            raise ValueError(f"invalid rule id '{value}'")
        return value

    @field_validator("producer", mode="before")
    @classmethod
    def _normalize_producer(cls, value: object) -> str:
        name = producer_name(value)
        if not PRODUCER_PATTERN.match(name):
            raise ValueError(f"invalid producer name '{name}'")
        return name

    @property
    def compiled(self) -> re.Pattern[bytes]:
        return compile_pattern(self.pattern)


class RuleMatch(BaseModel):
    rule_id: str
    producer: str
    section: SectionKind
    match_offset: int = Field(ge=0)
    match_length: int = Field(ge=0)
    element_ref: str
    os_tags: FrozenSet[OperatingSystem] = frozenset()
    distro_tags: FrozenSet[Distro] = frozenset()

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }


class Rulepack(BaseModel):
    name: str = "custom"
    version: str = "0"
    rules: Tuple[Rule, ...] = ()

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }

    @field_validator("rules")
    @classmethod
    def _unique_ids(cls, value: Tuple[Rule, ...]) -> Tuple[Rule, ...]:
        seen: set[str] = set()
        for rule in value:
            if rule.id in seen:
                raise ValueError(f"duplicate rule id '{rule.id}'")
            seen.add(rule.id)
        return value

    @property
    def counts_by_producer(self) -> Dict[str, int]:
        counts = Counter(rule.producer for rule in self.rules)
        return dict(sorted(counts.items()))

    def rules_for(self, section: SectionKind) -> List[Rule]:
        return sorted((rule for rule in self.rules if rule.section == section), key=lambda rule: rule.id)

    def with_rules(self, extra: Iterable[Rule]) -> "Rulepack":
        return Rulepack(name=self.name, version=self.version, rules=self.rules + tuple(extra))


# ---------------------------------------------------------------------------
# Rule-file format


def _parse_pattern(value: str, line: int) -> str:
    if not value.startswith('"'):
        raise RuleParseError(line, "pattern must be a double-quoted string")
    chars: List[str] = []
    pos = 1
    while pos < len(value):
        char = value[pos]
        if char == "\\" and value[pos + 1 : pos + 2] == '"':
            chars.append('"')
            pos += 2
            continue
        if char == "\\" and pos + 1 < len(value):
            chars.append(value[pos : pos + 2])
            pos += 2
            continue
        if char == '"':
            rest = value[pos + 1 :].strip()
            if rest and not rest.startswith("#"):
                raise RuleParseError(line, f"unexpected text after pattern: {rest!r}")
            return "".join(chars)
        chars.append(char)
        pos += 1
    raise RuleParseError(line, "unterminated pattern string")


def _strip_comment(text: str) -> str:
    index = text.find("#")
    return text if index < 0 else text[:index]


def _parse_list(value: str, line: int) -> List[str]:
    value = _strip_comment(value).strip()
    if not (value.startswith("[") and value.endswith("]")):
        raise RuleParseError(line, f"expected a [..] list, got {value!r}")
    return [item.strip() for item in value[1:-1].split(",") if item.strip()]


def _build_rule(rule_id: str, fields: Mapping[str, Tuple[str, int]], opened_at: int) -> Rule:
    for key in _REQUIRED_KEYS:
        if key not in fields:
            raise RuleParseError(opened_at, f"rule {rule_id} is missing '{key}'")

    def scalar(key: str) -> str:
        return _strip_comment(fields[key][0]).strip()

    try:
        section = SectionKind(scalar("section"))
    except ValueError:
        raise RuleParseError(fields["section"][1], f"unknown section {scalar('section')!r}") from None
    try:
        kind = RuleKind(scalar("kind"))
    except ValueError:
        raise RuleParseError(fields["kind"][1], f"unknown kind {scalar('kind')!r}") from None
    if kind == RuleKind.PRESENCE and section != SectionKind.XREF:
        raise RuleParseError(fields["kind"][1], "presence rules belong to the xref section")

    os_tags: set[OperatingSystem] = set()
    if "os" in fields:
        value, line = fields["os"]
        try:
            os_tags = {parse_os(item) for item in _parse_list(value, line)}
        except ValueError as exc:
            raise RuleParseError(line, str(exc)) from None
    distro_tags: set[Distro] = set()
    if "distro" in fields:
        value, line = fields["distro"]
        try:
            distro_tags = {parse_distro(item) for item in _parse_list(value, line)}
        except ValueError as exc:
            raise RuleParseError(line, str(exc)) from None

    pattern_value, pattern_line = fields["pattern"]
    pattern = _parse_pattern(pattern_value, pattern_line)
    violation = dialect_violation(pattern)
    if violation is not None:
        raise PatternCompileError(rule_id, violation)
    try:
        compile_pattern(pattern)
    except re.error as exc:
        raise PatternCompileError(rule_id, str(exc)) from None

    producer = scalar("producer")
    if not PRODUCER_PATTERN.match(producer):
        raise RuleParseError(fields["producer"][1], f"invalid producer name {producer!r}")
    return Rule(
        id=rule_id,
        producer=producer,
        section=section,
        kind=kind,
        pattern=pattern,
        os_tags=frozenset(os_tags),
        distro_tags=frozenset(distro_tags),
    )


def load_rulepack(source: str, *, name: str = "custom", version: str = "0") -> Rulepack:
    """Parse rule-file text into a compiled, validated :class:`Rulepack`."""

    rules: List[Rule] = []
    seen: Dict[str, int] = {}
    current: Optional[str] = None
    opened_at = 0
    fields: Dict[str, Tuple[str, int]] = {}

    for number, raw_line in enumerate(source.splitlines(), start=1):
        line = raw_line.strip()
        if current is None:
            if not line:
                continue
            if line.startswith("#"):
                header = _PACK_COMMENT.match(line)
                if header is not None:
                    name, version = header.group(1), header.group(2)
                continue
            opening = _RULE_OPEN.match(_strip_comment(line).strip())
            if opening is None:
                raise RuleParseError(number, f"expected 'rule <id> {{', got {line!r}")
            rule_id = opening.group(1)
            if not RULE_ID_PATTERN.match(rule_id):
                raise RuleParseError(number, f"invalid rule id {rule_id!r}")
            if rule_id in seen:
                raise RuleParseError(number, f"duplicate rule id {rule_id!r} (first defined on line {seen[rule_id]})")
            seen[rule_id] = number
            current, opened_at, fields = rule_id, number, {}
            continue

        if not line or line.startswith("#"):
            continue
        if _strip_comment(line).strip() == "}":
            rules.append(_build_rule(current, fields, opened_at))
            current = None
            continue
        assignment = _ASSIGNMENT.match(line)
        if assignment is None:
            raise RuleParseError(number, f"expected 'key = value', got {line!r}")
        key, value = assignment.group(1), assignment.group(2)
        if key not in _KNOWN_KEYS:
            raise RuleParseError(number, f"unknown key {key!r}")
        if key in fields:
            raise RuleParseError(number, f"duplicate key {key!r} in rule {current}")
        fields[key] = (value, number)

    if current is not None:
        raise RuleParseError(opened_at, f"rule {current} is not closed")

    log.debug("loaded rulepack %s %s with %d rules", name, version, len(rules))
    return Rulepack(name=name, version=version, rules=tuple(rules))


def render_rule(rule: Rule) -> str:
    lines = [
        f"rule {rule.id} {{",
        f"  producer = {rule.producer}",
        f"  section  = {rule.section.value}",
        f"  kind     = {rule.kind.value}",
    ]
    if rule.os_tags:
        tokens = sorted(os_token(tag) for tag in rule.os_tags)
        lines.append(f"  os       = [{', '.join(tokens)}]")
    if rule.distro_tags:
        tokens = sorted(distro_token(tag) for tag in rule.distro_tags)
        lines.append(f"  distro   = [{', '.join(tokens)}]")
    escaped = rule.pattern.replace('"', '\\"')
    lines.append(f'  pattern  = "{escaped}"')
    lines.append("}")
    return "\n".join(lines)


def render_rulepack(pack: Rulepack, comments: Sequence[str] = ()) -> str:
    out = [f"# rulepack: {pack.name} {pack.version}"]
    out.extend(f"# {comment}" if comment else "#" for comment in comments)
    for rule in pack.rules:
        out.append("")
        out.append(render_rule(rule))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Matching


def section_elements(sections: PdfSections, section: SectionKind) -> List[Tuple[str, bytes]]:
    """The (element ref, bytes) pairs a rule of ``section`` is tested against."""

    if section == SectionKind.HEADER:
        comment = sections.header.binary_comment
        return [(HEADER_REF, comment)] if comment else []
    if section == SectionKind.BODY:
        return [(obj.ref, obj.raw) for obj in sections.body_objects()]
    if section == SectionKind.XREF:
        return [(f"xref:{index}", table.raw) for index, table in enumerate(sections.xref_tables)]
    return [(f"trailer:{index}", trailer.raw) for index, trailer in enumerate(sections.trailers)]


def match_section(pack: Rulepack, sections: PdfSections, section: SectionKind) -> List[RuleMatch]:
    elements = section_elements(sections, section)
    presence = [(PRESENCE_REF, sections.presence_token)] if section == SectionKind.XREF else []
    matches: List[RuleMatch] = []
    for rule in pack.rules_for(section):
        targets = presence if rule.kind == RuleKind.PRESENCE else elements
        compiled = rule.compiled
        for ref, content in targets:
            for found in compiled.finditer(content):
                if found.end() == found.start():
                    continue
                matches.append(
                    RuleMatch(
                        rule_id=rule.id,
                        producer=rule.producer,
                        section=section,
                        match_offset=found.start(),
                        match_length=found.end() - found.start(),
                        element_ref=ref,
                        os_tags=rule.os_tags,
                        distro_tags=rule.distro_tags,
                    )
                )
    return matches


def evaluate_sections(pack: Rulepack, sections: PdfSections) -> Dict[SectionKind, List[RuleMatch]]:
    return {kind: match_section(pack, sections, kind) for kind in SECTION_ORDER}


def evaluate_file(pack: Rulepack, data: bytes) -> Dict[SectionKind, List[RuleMatch]]:
    return evaluate_sections(pack, segment(data))
