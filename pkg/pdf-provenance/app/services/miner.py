"""Derive producer signatures from a labelled corpus.

Each section element is turned into a token string in which a decimal run
and a long hex string each count as one token. Substrings common to every
file of a producer are found by pairwise dynamic programming, folded across
the group, and reduced to maximal ones. Volatile tokens become character
classes; tokens with one value across the group stay literal.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, Field

from app.core.errors import EmptyGroup, SectionAbsentEverywhere
from app.core.producers import (
    SECTION_ORDER,
    Distro,
    OperatingSystem,
    RuleKind,
    SectionKind,
    producer_slug,
)
from app.core.rules import Rule, Rulepack, compile_pattern, render_rulepack, section_elements
from app.core.sections import PdfSections
from app.core.segmenter import segment
from app.services.corpus import LabeledCorpus

log = logging.getLogger("pdf_provenance.miner")

DECIMAL_SLOT = "\u0100"
HEX_SLOT = "\u0101"
MIN_HEX_RUN = 16
HEADER_MIN_LEN = 4

_DIGITS = frozenset(b"0123456789")
_HEX = frozenset(b"0123456789abcdefABCDEF")
_META = frozenset(".^$*+?{}[]\\|()")
_NAMED_ESCAPES = {0x0D: "\\r", 0x0A: "\\n", 0x09: "\\t"}
_KIND_FOR_SECTION = {
    SectionKind.HEADER: RuleKind.MAGIC,
    SectionKind.BODY: RuleKind.TEMPLATE,
    SectionKind.XREF: RuleKind.TEMPLATE,
    SectionKind.TRAILER: RuleKind.TEMPLATE,
}


class CandidatePattern(BaseModel):
    producer: str
    section: SectionKind
    kind: RuleKind = RuleKind.TEMPLATE
    template: str
    support: float = Field(ge=0.0, le=1.0)
    discriminacy: float = Field(ge=0.0, le=1.0)
    length: int = Field(ge=0)
    os_tags: FrozenSet[OperatingSystem] = frozenset()
    distro_tags: FrozenSet[Distro] = frozenset()

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }


@dataclass(frozen=True)
class _Unit:
    shape: str
    values: Tuple[bytes, ...]


def tokenize(data: bytes) -> _Unit:
    """Shape string of ``data`` plus the byte value behind every shape character."""

    shape: List[str] = []
    values: List[bytes] = []
    pos, length = 0, len(data)
    while pos < length:
        byte = data[pos]
        if byte == 0x3C and data[pos + 1 : pos + 2] != b"<":
            end = pos + 1
            while end < length and data[end] in _HEX:
                end += 1
            if end - pos - 1 >= MIN_HEX_RUN and data[end : end + 1] == b">":
                shape += ["<", HEX_SLOT]
                values += [b"<", data[pos + 1 : end]]
                pos = end
                continue
        if byte in _DIGITS:
            end = pos
            while end < length and data[end] in _DIGITS:
                end += 1
            shape.append(DECIMAL_SLOT)
            values.append(data[pos:end])
            pos = end
            continue
        shape.append(chr(byte))
        values.append(data[pos : pos + 1])
        pos += 1
    return _Unit("".join(shape), tuple(values))


def common_substrings(left: str, right: str, min_len: int) -> Set[str]:
    """Maximal common substrings of at least ``min_len`` characters."""

    if len(left) < min_len or len(right) < min_len:
        return set()
    if left in right:
        return {left}
    found: Set[str] = set()
    n, m = len(left), len(right)
    previous = [0] * (m + 1)
    for i in range(n):
        current = [0] * (m + 1)
        char = left[i]
        for j in range(m):
            if char != right[j]:
                continue
            run = previous[j] + 1
            current[j + 1] = run
            if run >= min_len and (i + 1 == n or j + 1 == m or left[i + 1] != right[j + 1]):
                found.add(left[i + 1 - run : i + 1])
        previous = current
    return found


def maximal(strings: Iterable[str]) -> Set[str]:
    kept: List[str] = []
    for item in sorted(set(strings), key=lambda value: (-len(value), value)):
        if not any(item in other for other in kept):
            kept.append(item)
    return set(kept)


def common_to_all(files: Sequence[Sequence[str]], min_len: int) -> Set[str]:
    """Maximal strings of ``min_len``+ characters occurring in some unit of every file."""

    if not files:
        return set()
    current = maximal(unit for unit in files[0] if len(unit) >= min_len)
    for units in files[1:]:
        if not current:
            break
        folded: Set[str] = set()
        for candidate in current:
            for unit in units:
                folded |= common_substrings(candidate, unit, min_len)
        current = maximal(folded)
    return current


def escape_byte(byte: int) -> str:
    if byte in _NAMED_ESCAPES:
        return _NAMED_ESCAPES[byte]
    if 0x20 <= byte < 0x7F and byte != 0x22:
        char = chr(byte)
        return "\\" + char if char in _META else char
    return f"\\x{byte:02X}"


def escape_bytes(data: bytes) -> str:
    return "".join(escape_byte(byte) for byte in data)


class _Group:
    """Segmented files of one producer, cached per section."""

    def __init__(self, producer: str, sections: Sequence[PdfSections]) -> None:
        self.producer = producer
        self.sections = tuple(sections)
        self._units: Dict[SectionKind, Tuple[Tuple[_Unit, ...], ...]] = {}

    def mining_units(self, section: SectionKind) -> Tuple[Tuple[_Unit, ...], ...]:
        if section not in self._units:
            self._units[section] = tuple(
                tuple(tokenize(raw) for raw in _mining_bytes(item, section)) for item in self.sections
            )
        return self._units[section]

    def matches(self, pattern: str, section: SectionKind) -> int:
        compiled = compile_pattern(pattern)
        hits = 0
        for item in self.sections:
            if any(compiled.search(content) for _, content in section_elements(item, section)):
                hits += 1
        return hits

    def presence_matches(self, token: bytes) -> int:
        return sum(1 for item in self.sections if item.presence_token == token)


def _mining_bytes(sections: PdfSections, section: SectionKind) -> List[bytes]:
    if section == SectionKind.BODY:
        return [obj.head for obj in sections.body_objects()]
    return [content for _, content in section_elements(sections, section)]


def _slot_values(group: _Group, section: SectionKind, shape: str) -> List[Set[bytes]]:
    seen: List[Set[bytes]] = [set() for _ in shape]
    for units in group.mining_units(section):
        for unit in units:
            start = unit.shape.find(shape)
            while start >= 0:
                for index, char in enumerate(shape):
                    if char in (DECIMAL_SLOT, HEX_SLOT):
                        seen[index].add(unit.values[start + index])
                start = unit.shape.find(shape, start + 1)
    return seen


def _template(shape: str, values: List[Set[bytes]]) -> Tuple[str, int]:
    pieces: List[str] = []
    volatile: List[bool] = []
    for index, char in enumerate(shape):
        if char == DECIMAL_SLOT:
            if len(values[index]) == 1:
                pieces.append(escape_bytes(next(iter(values[index]))))
                volatile.append(False)
            else:
                pieces.append("[0-9]*")
                volatile.append(True)
        elif char == HEX_SLOT:
            lower = any(value != value.upper() for value in values[index])
            pieces.append("[0-9A-Fa-f]*" if lower else "[0-9A-F]*")
            volatile.append(True)
        else:
            pieces.append(escape_byte(ord(char)))
            volatile.append(False)
    # a class at either end constrains nothing
    start, end = 0, len(pieces)
    while start < end and volatile[start]:
        start += 1
    while end > start and volatile[end - 1]:
        end -= 1
    return "".join(pieces[start:end]), end - start


class _Miner:
    def __init__(self, corpus: LabeledCorpus) -> None:
        self.corpus = corpus
        self.groups = {
            producer: _Group(producer, [segment(item.data) for item in corpus.files[producer]])
            for producer in corpus.producers
        }

    def tags(self, producer: str) -> Tuple[FrozenSet[OperatingSystem], FrozenSet[Distro]]:
        os_value = self.corpus.unanimous_os(producer)
        distro_value = self.corpus.unanimous_distro(producer)
        return (
            frozenset({os_value}) if os_value else frozenset(),
            frozenset({distro_value}) if distro_value else frozenset(),
        )

    def discriminacy(self, producer: str, score) -> float:
        worst = 0.0
        for other, group in self.groups.items():
            if other == producer:
                continue
            worst = max(worst, score(group) / len(group.sections))
        return worst

    def shapes(self, producer: str, section: SectionKind, min_len: int) -> Set[str]:
        group = self.groups[producer]
        units = group.mining_units(section)
        if not any(units):
            raise SectionAbsentEverywhere(producer, section.value)
        threshold = min(min_len, HEADER_MIN_LEN) if section == SectionKind.HEADER else min_len
        return common_to_all([[unit.shape for unit in file_units] for file_units in units], threshold)

    def templates(self, producer: str, section: SectionKind, min_len: int) -> List[CandidatePattern]:
        group = self.groups[producer]
        os_tags, distro_tags = self.tags(producer)
        threshold = min(min_len, HEADER_MIN_LEN) if section == SectionKind.HEADER else min_len
        found: Dict[str, CandidatePattern] = {}
        for shape in self.shapes(producer, section, min_len):
            template, length = _template(shape, _slot_values(group, section, shape))
            if length < threshold or template in found:
                continue
            support = group.matches(template, section) / len(group.sections)
            if support < 1.0:
                log.warning("dropping %s %s template with support %.2f", producer, section.value, support)
                continue
            found[template] = CandidatePattern(
                producer=producer,
                section=section,
                kind=_KIND_FOR_SECTION[section],
                template=template,
                support=support,
                discriminacy=self.discriminacy(producer, lambda other: other.matches(template, section)),
                length=length,
                os_tags=os_tags,
                distro_tags=distro_tags,
            )
        return list(found.values())

    def presence(self, producer: str) -> Optional[CandidatePattern]:
        group = self.groups[producer]
        for token in (b"A", b"P"):
            if group.presence_matches(token) != len(group.sections):
                continue
            os_tags, distro_tags = self.tags(producer)
            return CandidatePattern(
                producer=producer,
                section=SectionKind.XREF,
                kind=RuleKind.PRESENCE,
                template=token.decode("ascii"),
                support=1.0,
                discriminacy=self.discriminacy(producer, lambda other: other.presence_matches(token)),
                length=1,
                os_tags=os_tags,
                distro_tags=distro_tags,
            )
        return None


def _sort_key(candidate: CandidatePattern) -> Tuple[float, int, str]:
    return (candidate.discriminacy, -candidate.length, candidate.template)


def mine_producer(
    corpus: LabeledCorpus,
    producer: str,
    section: SectionKind,
    min_len: int = 8,
) -> List[CandidatePattern]:
    """Every scored candidate of one producer and section, unfiltered.

    Raises :class:`SectionAbsentEverywhere` when no file of the group has the
    section at all.
    """

    if producer not in corpus.files:
        raise EmptyGroup(producer)
    miner = _Miner(corpus)
    return sorted(miner.templates(producer, section, min_len), key=_sort_key)


def mine(
    corpus: LabeledCorpus,
    section: SectionKind,
    min_len: int = 8,
    max_discriminacy: float = 0.0,
) -> Dict[str, List[CandidatePattern]]:
    if min_len < 4:
        raise ValueError("min_len must be at least 4")
    if not 0.0 <= max_discriminacy <= 1.0:
        raise ValueError("max_discriminacy must lie in [0, 1]")

    miner = _Miner(corpus)
    results: Dict[str, List[CandidatePattern]] = {}
    for producer in corpus.producers:
        candidates: List[CandidatePattern] = []
        try:
            candidates.extend(miner.templates(producer, section, min_len))
        except SectionAbsentEverywhere as exc:
            if section != SectionKind.XREF:
                log.warning("%s", exc.detail)
        if section == SectionKind.XREF:
            fact = miner.presence(producer)
            if fact is not None:
                candidates.append(fact)
        kept = [item for item in candidates if item.support == 1.0 and item.discriminacy <= max_discriminacy]
        results[producer] = sorted(kept, key=_sort_key)
        log.info(
            "mined %s/%s: %d of %d candidates kept",
            producer,
            section.value,
            len(kept),
            len(candidates),
        )
    return results


def mine_sections(
    corpus: LabeledCorpus,
    sections: Iterable[SectionKind] = SECTION_ORDER,
    min_len: int = 8,
    max_discriminacy: float = 0.0,
) -> Dict[str, List[CandidatePattern]]:
    merged: Dict[str, List[CandidatePattern]] = {}
    for section in sections:
        for producer, candidates in mine(corpus, section, min_len, max_discriminacy).items():
            merged.setdefault(producer, []).extend(candidates)
    return merged


def candidates_to_rules(candidates: Mapping[str, Sequence[CandidatePattern]]) -> List[Rule]:
    rules: List[Rule] = []
    for producer in sorted(candidates):
        counters: Dict[SectionKind, int] = {}
        ordered = sorted(candidates[producer], key=lambda item: SECTION_ORDER.index(item.section))
        for candidate in ordered:
            index = counters.get(candidate.section, 0)
            counters[candidate.section] = index + 1
            rules.append(
                Rule(
                    id=f"{producer_slug(producer)}-{candidate.section.value}-{index}",
                    producer=producer,
                    section=candidate.section,
                    kind=candidate.kind,
                    pattern=candidate.template,
                    os_tags=candidate.os_tags,
                    distro_tags=candidate.distro_tags,
                )
            )
    return rules


def emit_rulepack(candidates: Mapping[str, Sequence[CandidatePattern]], name: str = "mined") -> str:
    """Rule-file text for ``candidates``; loads back through ``load_rulepack``."""

    rules = candidates_to_rules(candidates)
    pack = Rulepack(name=name, version="1", rules=tuple(rules))
    comments = [f"mined: {len(rules)} rules over {len(candidates)} producers"]
    return render_rulepack(pack, comments)
