from __future__ import annotations

from collections import Counter
from itertools import combinations, permutations, product
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import pytest

from app.core.producers import Distro, OperatingSystem, SectionKind, SECTION_ORDER
from app.core.rules import RuleMatch
from app.services.detector import (
    Outcome,
    PairOutcome,
    SectionVerdict,
    VerdictKind,
    classify,
    detect_bytes,
    detect_os,
    majority_vote,
    section_verdict,
    tally,
)

ALPHABET = ("A", "B", "C")
CANDIDATE_SETS: Tuple[FrozenSet[str], ...] = tuple(
    frozenset(chosen) for size in range(3) for chosen in combinations(ALPHABET, size)
)


def _verdicts(*candidate_sets: Sequence[str]) -> List[SectionVerdict]:
    return [SectionVerdict(section=kind, candidates=list(items)) for kind, items in zip(SECTION_ORDER, candidate_sets)]


def _match(producer: str, section: SectionKind, ref: str = "header", offset: int = 0, os=(), distro=()) -> RuleMatch:
    return RuleMatch(
        rule_id=f"{producer.lower()}-{section.value}-{offset}",
        producer=producer,
        section=section,
        match_offset=offset,
        match_length=4,
        element_ref=ref,
        os_tags=frozenset(os),
        distro_tags=frozenset(distro),
    )


def _oracle(configuration: Sequence[FrozenSet[str]]) -> Tuple[VerdictKind, Optional[str], Dict[str, int]]:
    votes: Dict[str, int] = {}
    for candidates in configuration:
        for name in candidates:
            votes[name] = votes.get(name, 0) + 1
    if not votes:
        return VerdictKind.NO_RESULT, None, {}
    ranked = sorted(votes.items(), key=lambda item: -item[1])
    top_name, top_count = ranked[0]
    runner_up = ranked[1][1] if len(ranked) > 1 else 0
    if top_count > runner_up and (top_count >= 2 or len(votes) == 1):
        return VerdictKind.PRODUCER, top_name, votes
    return VerdictKind.AMBIGUOUS, None, votes


def test_vote_rule_agrees_with_brute_force_oracle():
    configurations = list(product(CANDIDATE_SETS, repeat=4))
    assert len(configurations) == 7**4

    for configuration in configurations:
        verdict = majority_vote(_verdicts(*configuration))
        kind, producer, votes = _oracle(configuration)
        assert (verdict.kind, verdict.producer, verdict.votes) == (kind, producer, votes), configuration


def test_strict_majority_wins():
    verdict = majority_vote(_verdicts(["PdfTeX"], ["PdfTeX"], ["PdfTeX"], ["Ghostscript"]))
    assert verdict.kind == VerdictKind.PRODUCER
    assert verdict.producer == "PdfTeX"
    assert verdict.votes == {"Ghostscript": 1, "PdfTeX": 3}


def test_two_two_tie_is_ambiguous():
    word, libreoffice = "MicrosoftOfficeWord", "LibreOffice"
    verdict = majority_vote(_verdicts([word], [word], [libreoffice], [libreoffice]))
    assert verdict.kind == VerdictKind.AMBIGUOUS
    assert verdict.candidates == (libreoffice, word)
    assert verdict.producer is None


def test_no_candidates_is_no_result():
    verdict = majority_vote(_verdicts([], [], [], []))
    assert verdict.kind == VerdictKind.NO_RESULT
    assert verdict.votes == {}


def test_shared_sections_still_elect_pdftex():
    verdict = majority_vote(_verdicts(["PdfTeX", "LuaTeX"], ["PdfTeX"], [], ["PdfTeX", "LuaTeX"]))
    assert verdict.producer == "PdfTeX"
    assert verdict.votes == {"LuaTeX": 2, "PdfTeX": 3}


def test_single_vote_wins_only_when_unopposed():
    alone = majority_vote(_verdicts(["Cairo"], [], [], []))
    opposed = majority_vote(_verdicts(["Cairo"], [], [], ["SkiaPDF"]))
    assert alone.producer == "Cairo"
    assert opposed.kind == VerdictKind.AMBIGUOUS
    assert opposed.candidates == ("Cairo", "SkiaPDF")


def test_vote_ignores_section_order():
    sets = (["A", "B"], ["A"], [], ["C"])
    baseline = majority_vote(_verdicts(*sets))
    for order in permutations(sets):
        verdict = majority_vote(_verdicts(*order))
        assert (verdict.kind, verdict.producer, verdict.votes) == (baseline.kind, baseline.producer, baseline.votes)


def test_majority_vote_needs_every_section():
    with pytest.raises(ValueError):
        majority_vote(_verdicts(["A"], ["A"], ["A"]))


def test_section_verdict_collects_distinct_producers():
    matches = [
        _match("PdfTeX", SectionKind.HEADER),
        _match("LuaTeX", SectionKind.HEADER),
        _match("PdfTeX", SectionKind.HEADER, offset=4),
    ]
    verdict = section_verdict(matches, SectionKind.HEADER)
    assert verdict.candidates == ("LuaTeX", "PdfTeX")
    assert section_verdict([], SectionKind.BODY).candidates == ()


def test_section_verdict_refuses_foreign_matches():
    with pytest.raises(ValueError):
        section_verdict([_match("PdfTeX", SectionKind.HEADER)], SectionKind.BODY)


def test_tally_counts_each_section_once():
    assert tally(_verdicts(["A", "A"], ["A"], [], ["B"])) == {"A": 2, "B": 1}


def test_classify_file_and_section_outcomes():
    verdict = majority_vote(_verdicts(["Ghostscript"], ["Ghostscript"], [], ["Ghostscript", "MacOSXQuartz"]))
    result = classify(verdict, "Ghostscript")

    assert result.outcome == Outcome.CORRECT
    assert not result.ambiguous
    assert result.section(SectionKind.HEADER).outcome == Outcome.CORRECT
    assert result.section(SectionKind.XREF).outcome == Outcome.NO_RESULT
    trailer = result.section(SectionKind.TRAILER)
    assert (trailer.outcome, trailer.pair) == (Outcome.WRONG, PairOutcome.CONFUSED)


def test_classify_pair_without_truth_is_error():
    verdict = majority_vote(_verdicts(["Cairo", "SkiaPDF"], [], [], []))
    result = classify(verdict, "MicrosoftOfficeWord")
    assert result.outcome == Outcome.WRONG
    assert result.ambiguous
    assert result.section(SectionKind.HEADER).pair == PairOutcome.ERROR


def test_classify_no_result():
    result = classify(majority_vote(_verdicts([], [], [], [])), "Cairo")
    assert result.outcome == Outcome.NO_RESULT
    assert classify(majority_vote(_verdicts([], [], [], [])), "Cairo") == result


def test_os_from_windows_tagged_magic():
    header = section_verdict(
        [_match("MicrosoftOfficeWord", SectionKind.HEADER, os=[OperatingSystem.WINDOWS])], SectionKind.HEADER
    )
    empty = [SectionVerdict(section=kind) for kind in SECTION_ORDER[1:]]
    oses, distros = detect_os([header, *empty], "MicrosoftOfficeWord")
    assert [(item.os, item.distro) for item in oses] == [(OperatingSystem.WINDOWS, None)]
    assert distros == ()


def test_untagged_matches_make_no_os_claim():
    header = section_verdict([_match("PdfTeX", SectionKind.HEADER)], SectionKind.HEADER)
    empty = [SectionVerdict(section=kind) for kind in SECTION_ORDER[1:]]
    assert detect_os([header, *empty], "PdfTeX") == ((), ())


def test_disagreeing_tags_make_no_os_claim():
    header = section_verdict(
        [_match("LuaTeX", SectionKind.HEADER, os=[OperatingSystem.LINUX])], SectionKind.HEADER
    )
    trailer = section_verdict(
        [_match("LuaTeX", SectionKind.TRAILER, ref="trailer:0", os=[OperatingSystem.MACOS])], SectionKind.TRAILER
    )
    sections = [header, SectionVerdict(section=SectionKind.BODY), SectionVerdict(section=SectionKind.XREF), trailer]
    assert detect_os(sections, "LuaTeX") == ((), ())


def test_alternatives_on_one_span_are_united():
    span = dict(ref="header", offset=0)
    header = section_verdict(
        [
            _match("LuaTeX", SectionKind.HEADER, os=[OperatingSystem.LINUX], distro=[Distro.MIKTEX], **span),
            _match(
                "LuaTeX",
                SectionKind.HEADER,
                os=[OperatingSystem.MACOS, OperatingSystem.WINDOWS],
                distro=[Distro.TEXLIVE, Distro.MIKTEX],
                **span,
            ),
        ],
        SectionKind.HEADER,
    )
    empty = [SectionVerdict(section=kind) for kind in SECTION_ORDER[1:]]
    oses, distros = detect_os([header, *empty], "LuaTeX")
    # Linux/MikTeX or any of the other two systems: every OS remains possible.
    assert oses == ()
    assert distros == (Distro.MIKTEX, Distro.TEXLIVE)


def test_fixture_os_claims(builtin_pack, fixture_files):
    word = detect_bytes(fixture_files[("MicrosoftOfficeWord", 1)], builtin_pack)
    luatex = detect_bytes(fixture_files[("LuaTeX", 1)], builtin_pack)
    pdftex = detect_bytes(fixture_files[("PdfTeX", 1)], builtin_pack)
    cairo = detect_bytes(fixture_files[("Cairo", 1)], builtin_pack)

    assert [(item.os, item.distro) for item in word.os_candidates] == [(OperatingSystem.WINDOWS, None)]
    assert [(item.os, item.distro) for item in luatex.os_candidates] == [(OperatingSystem.LINUX, Distro.TEXLIVE)]
    assert luatex.distro_candidates == (Distro.TEXLIVE,)
    assert pdftex.os_candidates == ()
    assert pdftex.distro_candidates == (Distro.MIKTEX,)
    assert (cairo.os_candidates, cairo.distro_candidates) == ((), ())


def test_word_fixture_votes(builtin_pack, fixture_files):
    verdict = detect_bytes(fixture_files[("MicrosoftOfficeWord", 1)], builtin_pack)
    assert verdict.producer == "MicrosoftOfficeWord"
    assert verdict.votes["MicrosoftOfficeWord"] == 4
    assert max(count for name, count in verdict.votes.items() if name != "MicrosoftOfficeWord") <= 2
    assert "word-body-1" in verdict.evidence[SectionKind.BODY]


def test_restricting_sections_keeps_only_their_votes(builtin_pack, fixture_files):
    verdict = detect_bytes(fixture_files[("PdfTeX", 1)], builtin_pack, [SectionKind.HEADER])
    assert verdict.kind == VerdictKind.AMBIGUOUS
    assert set(verdict.candidates) == {"LuaTeX", "PdfTeX"}
    assert Counter(verdict.votes) == Counter({"LuaTeX": 1, "PdfTeX": 1})
    assert verdict.section(SectionKind.BODY).candidates == ()
