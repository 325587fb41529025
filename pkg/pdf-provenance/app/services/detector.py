"""Per-section candidate sets, majority voting, outcome classification and OS inference."""
from __future__ import annotations

import logging
from collections import Counter, defaultdict
from enum import Enum
from itertools import product
from typing import Collection, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel, field_validator

from app.core.producers import (
    ALL_DISTRO,
    ALL_OS,
    SECTION_ORDER,
    Distro,
    OperatingSystem,
    SectionKind,
    producer_name,
)
from app.core.rules import RuleMatch, Rulepack, evaluate_sections
from app.core.sections import PdfSections
from app.core.segmenter import segment

log = logging.getLogger("pdf_provenance.detector")

OsClaim = FrozenSet[Tuple[OperatingSystem, Optional[Distro]]]


class VerdictKind(str, Enum):
    PRODUCER = "producer"
    AMBIGUOUS = "ambiguous"
    NO_RESULT = "no-result"


class Outcome(str, Enum):
    CORRECT = "correct"
    WRONG = "wrong"
    NO_RESULT = "no-result"


class PairOutcome(str, Enum):
    CONFUSED = "confused"
    ERROR = "error"


def _sorted_names(value: Iterable[object]) -> Tuple[str, ...]:
    return tuple(sorted({producer_name(item) for item in value}))


class SectionVerdict(BaseModel):
    section: SectionKind
    candidates: Tuple[str, ...] = ()
    supporting_matches: Tuple[RuleMatch, ...] = ()

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }

    @field_validator("candidates", mode="before")
    @classmethod
    def _normalize_candidates(cls, value: Iterable[object]) -> Tuple[str, ...]:
        return _sorted_names(value)

    @property
    def rule_ids(self) -> Tuple[str, ...]:
        return tuple(dict.fromkeys(match.rule_id for match in self.supporting_matches))


class OsCandidate(BaseModel):
    os: OperatingSystem
    distro: Optional[Distro] = None

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }


class Verdict(BaseModel):
    kind: VerdictKind
    producer: Optional[str] = None
    candidates: Tuple[str, ...] = ()
    votes: Dict[str, int] = {}
    section_verdicts: Tuple[SectionVerdict, ...] = ()
    os_candidates: Tuple[OsCandidate, ...] = ()
    distro_candidates: Tuple[Distro, ...] = ()

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }

    @property
    def evidence(self) -> Dict[SectionKind, Tuple[str, ...]]:
        return {item.section: item.rule_ids for item in self.section_verdicts}

    def section(self, kind: SectionKind) -> SectionVerdict:
        for item in self.section_verdicts:
            if item.section == kind:
                return item
        return SectionVerdict(section=kind)


class SectionOutcome(BaseModel):
    section: SectionKind
    outcome: Outcome
    pair: Optional[PairOutcome] = None

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }


class OutcomeClass(BaseModel):
    outcome: Outcome
    ambiguous: bool = False
    sections: Tuple[SectionOutcome, ...] = ()

    model_config = {
        "extra": "forbid",
        "frozen": True,
    }

    def section(self, kind: SectionKind) -> SectionOutcome:
        for item in self.sections:
            if item.section == kind:
                return item
        raise KeyError(kind)


def section_verdict(matches: Sequence[RuleMatch], section: SectionKind) -> SectionVerdict:
    foreign = [match.rule_id for match in matches if match.section != section]
    if foreign:
        raise ValueError(f"matches from other sections passed for {section.value}: {foreign}")
    return SectionVerdict(
        section=section,
        candidates=[match.producer for match in matches],
        supporting_matches=tuple(matches),
    )


def tally(sections: Iterable[SectionVerdict]) -> Dict[str, int]:
    votes: Counter[str] = Counter()
    for item in sections:
        votes.update(set(item.candidates))
    return dict(sorted(votes.items()))


def majority_vote(sections: Sequence[SectionVerdict]) -> Verdict:
    """Combine the four section verdicts.

    Every candidate of a section receives one vote. A unique maximum wins when
    it holds at least two votes or is the only producer voted for at all; any
    other maximum is reported as ambiguous.
    """

    by_kind = {item.section: item for item in sections}
    if len(by_kind) != len(sections) or set(by_kind) != set(SECTION_ORDER):
        raise ValueError("majority_vote needs exactly one verdict per section")
    ordered = tuple(by_kind[kind] for kind in SECTION_ORDER)
    votes = tally(ordered)

    if not votes:
        return Verdict(kind=VerdictKind.NO_RESULT, section_verdicts=ordered)

    best = max(votes.values())
    leaders = tuple(sorted(name for name, count in votes.items() if count == best))
    if len(leaders) == 1 and (best >= 2 or len(votes) == 1):
        return Verdict(
            kind=VerdictKind.PRODUCER,
            producer=leaders[0],
            candidates=leaders,
            votes=votes,
            section_verdicts=ordered,
        )
    return Verdict(kind=VerdictKind.AMBIGUOUS, candidates=leaders, votes=votes, section_verdicts=ordered)


def classify(verdict: Verdict, ground_truth: object) -> OutcomeClass:
    truth = producer_name(ground_truth)
    if verdict.kind == VerdictKind.PRODUCER and verdict.producer == truth:
        outcome = Outcome.CORRECT
    elif verdict.kind == VerdictKind.NO_RESULT:
        outcome = Outcome.NO_RESULT
    else:
        outcome = Outcome.WRONG

    per_section: List[SectionOutcome] = []
    for kind in SECTION_ORDER:
        candidates = verdict.section(kind).candidates
        if not candidates:
            label = Outcome.NO_RESULT
        elif candidates == (truth,):
            label = Outcome.CORRECT
        else:
            label = Outcome.WRONG
        pair: Optional[PairOutcome] = None
        if len(candidates) == 2:
            pair = PairOutcome.CONFUSED if truth in candidates else PairOutcome.ERROR
        per_section.append(SectionOutcome(section=kind, outcome=label, pair=pair))

    return OutcomeClass(
        outcome=outcome,
        ambiguous=verdict.kind == VerdictKind.AMBIGUOUS,
        sections=tuple(per_section),
    )


def _match_claim(match: RuleMatch) -> OsClaim:
    oses = match.os_tags or ALL_OS
    distros: Collection[Optional[Distro]] = match.distro_tags or ALL_DISTRO
    return frozenset(product(oses, distros))


def _winner_claim(section_verdicts: Iterable[SectionVerdict], producer: str) -> Optional[OsClaim]:
    # Matches covering the same bytes are alternatives: union inside a group,
    # intersection across groups.
    groups: Dict[Tuple[str, str, int, int], OsClaim] = defaultdict(frozenset)
    tagged = False
    for item in section_verdicts:
        for match in item.supporting_matches:
            if match.producer != producer:
                continue
            key = (match.section.value, match.element_ref, match.match_offset, match.match_length)
            groups[key] = groups[key] | _match_claim(match)
            tagged = tagged or bool(match.os_tags or match.distro_tags)
    if not tagged:
        return None

    claim: OsClaim = frozenset(product(ALL_OS, ALL_DISTRO))
    for group in groups.values():
        claim &= group
    return claim


def _os_key(candidate: OsCandidate) -> Tuple[str, str]:
    return (candidate.os.value, candidate.distro.value if candidate.distro else "")


def detect_os(
    section_verdicts: Sequence[SectionVerdict], producer: Optional[str]
) -> Tuple[Tuple[OsCandidate, ...], Tuple[Distro, ...]]:
    """OS and distribution claims of the winning producer's tagged matches.

    Returns ``(os_candidates, distro_candidates)``; both are empty when nothing
    narrows the answer.
    """

    if producer is None:
        return (), ()
    claim = _winner_claim(section_verdicts, producer)
    if not claim:
        return (), ()

    oses = {os_value for os_value, _ in claim}
    os_candidates: List[OsCandidate] = []
    if oses != set(ALL_OS):
        for os_value in oses:
            distros = {distro for claimed_os, distro in claim if claimed_os == os_value}
            if distros >= set(ALL_DISTRO) or distros == {None}:
                os_candidates.append(OsCandidate(os=os_value))
                continue
            os_candidates.extend(OsCandidate(os=os_value, distro=distro) for distro in distros)

    distros_claimed = {distro for _, distro in claim}
    distro_candidates: Tuple[Distro, ...] = ()
    if None not in distros_claimed:
        distro_candidates = tuple(sorted((d for d in distros_claimed if d is not None), key=lambda d: d.value))

    return tuple(sorted(os_candidates, key=_os_key)), distro_candidates


def verdict_from_matches(
    matches: Mapping[SectionKind, Sequence[RuleMatch]],
    only: Optional[Collection[SectionKind]] = None,
) -> Verdict:
    per_section = [
        section_verdict(matches.get(kind, ()) if only is None or kind in only else (), kind)
        for kind in SECTION_ORDER
    ]
    verdict = majority_vote(per_section)
    os_candidates, distro_candidates = detect_os(verdict.section_verdicts, verdict.producer)
    if os_candidates or distro_candidates:
        verdict = verdict.model_copy(
            update={"os_candidates": os_candidates, "distro_candidates": distro_candidates}
        )
    log.debug("verdict %s %s votes=%s", verdict.kind.value, verdict.producer or "-", verdict.votes)
    return verdict


def detect(
    sections: PdfSections,
    pack: Rulepack,
    only: Optional[Collection[SectionKind]] = None,
) -> Verdict:
    """Detect the producer of already segmented ``sections``.

    ``only`` restricts voting to a subset of sections; the others contribute
    empty candidate sets.
    """

    return verdict_from_matches(evaluate_sections(pack, sections), only)


def detect_bytes(
    data: bytes,
    pack: Rulepack,
    only: Optional[Collection[SectionKind]] = None,
) -> Verdict:
    return detect(segment(data), pack, only)
