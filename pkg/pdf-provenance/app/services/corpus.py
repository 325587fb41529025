"""Labelled corpora: manifest parsing and grouping of files by producer."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from app.core.errors import EmptyGroup, ManifestError
from app.core.producers import Distro, OperatingSystem, distro_token, os_token, parse_distro, parse_os
from app.core.rules import PRODUCER_PATTERN

log = logging.getLogger("pdf_provenance.corpus")

MANIFEST_NAME = "manifest.tsv"
_UNSET = ("", "-")


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    producer: str
    os: Optional[OperatingSystem] = None
    distro: Optional[Distro] = None

    def render(self, base: Optional[Path] = None) -> str:
        path = self.path
        if base is not None:
            try:
                path = path.relative_to(base)
            except ValueError:
                pass
        os_field = os_token(self.os) if self.os else "-"
        distro_field = distro_token(self.distro) if self.distro else "-"
        return f"{path.as_posix()}\t{self.producer}\t{os_field}\t{distro_field}"


@dataclass(frozen=True)
class CorpusFile:
    name: str
    data: bytes
    os: Optional[OperatingSystem] = None
    distro: Optional[Distro] = None


@dataclass(frozen=True)
class LabeledCorpus:
    """Files grouped by their manifest producer label; every group is non-empty."""

    files: Mapping[str, Tuple[CorpusFile, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.files:
            raise EmptyGroup()
        for producer, members in self.files.items():
            if not members:
                raise EmptyGroup(producer)

    @property
    def producers(self) -> Tuple[str, ...]:
        return tuple(sorted(self.files))

    @property
    def groups(self) -> Dict[str, Tuple[bytes, ...]]:
        return {producer: tuple(item.data for item in self.files[producer]) for producer in self.producers}

    def __len__(self) -> int:
        return sum(len(members) for members in self.files.values())

    def unanimous_os(self, producer: str) -> Optional[OperatingSystem]:
        labels = {item.os for item in self.files[producer]}
        return labels.pop() if len(labels) == 1 else None

    def unanimous_distro(self, producer: str) -> Optional[Distro]:
        labels = {item.distro for item in self.files[producer]}
        return labels.pop() if len(labels) == 1 else None


def _optional(value: str, parser, line: int, what: str):
    value = value.strip()
    if value.lower() in _UNSET:
        return None
    try:
        return parser(value)
    except ValueError as exc:
        raise ManifestError(line, f"{what}: {exc}") from None


def parse_manifest(text: str, base: Path) -> List[ManifestEntry]:
    """Parse ``path<TAB>producer[<TAB>os[<TAB>distro]]`` lines; relative paths resolve against ``base``."""

    entries: List[ManifestEntry] = []
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 2 or len(fields) > 4:
            raise ManifestError(number, f"expected 2 to 4 tab-separated fields, got {len(fields)}")
        path_text, producer = fields[0].strip(), fields[1].strip()
        if not path_text:
            raise ManifestError(number, "empty path")
        if not PRODUCER_PATTERN.match(producer):
            raise ManifestError(number, f"invalid producer name {producer!r}")
        os_value = _optional(fields[2], parse_os, number, "os") if len(fields) > 2 else None
        distro_value = _optional(fields[3], parse_distro, number, "distro") if len(fields) > 3 else None
        path = Path(path_text)
        if not path.is_absolute():
            path = base / path
        entries.append(ManifestEntry(path=path, producer=producer, os=os_value, distro=distro_value))
    return entries


def read_manifest(path: Path) -> List[ManifestEntry]:
    return parse_manifest(path.read_text(encoding="utf-8"), path.resolve().parent)


def render_manifest(entries: Iterable[ManifestEntry], base: Optional[Path] = None) -> str:
    lines = [entry.render(base) for entry in entries]
    return "\n".join(lines) + ("\n" if lines else "")


def corpus_from_entries(entries: Sequence[ManifestEntry]) -> LabeledCorpus:
    if not entries:
        raise EmptyGroup()
    grouped: Dict[str, List[CorpusFile]] = {}
    for entry in sorted(entries, key=lambda item: str(item.path)):
        data = entry.path.read_bytes()
        grouped.setdefault(entry.producer, []).append(
            CorpusFile(name=str(entry.path), data=data, os=entry.os, distro=entry.distro)
        )
    log.info("loaded corpus of %d files over %d producers", len(entries), len(grouped))
    return LabeledCorpus({producer: tuple(members) for producer, members in grouped.items()})


def load_corpus(manifest: Path) -> LabeledCorpus:
    return corpus_from_entries(read_manifest(manifest))
