from __future__ import annotations

from enum import Enum
from typing import FrozenSet, Optional, Tuple


class Producer(str, Enum):
    """The eleven producer tools the builtin signatures cover.

    Member names equal their values so members and plain strings hash and
    compare interchangeably; extension packs may name producers outside this
    enumeration and those travel as plain strings.
    """

    AcrobatDistiller = "AcrobatDistiller"
    MicrosoftOfficeWord = "MicrosoftOfficeWord"
    LibreOffice = "LibreOffice"
    Ghostscript = "Ghostscript"
    MacOSXQuartz = "MacOSXQuartz"
    PdfTeX = "PdfTeX"
    SkiaPDF = "SkiaPDF"
    Cairo = "Cairo"
    XdviPDFmx = "XdviPDFmx"
    LuaTeX = "LuaTeX"
    PDFLaTeX = "PDFLaTeX"


class SectionKind(str, Enum):
    HEADER = "header"
    BODY = "body"
    XREF = "xref"
    TRAILER = "trailer"


class RuleKind(str, Enum):
    MAGIC = "magic"
    KEYORDER = "keyorder"
    TEMPLATE = "template"
    PRESENCE = "presence"


class OperatingSystem(str, Enum):
    WINDOWS = "Windows"
    LINUX = "Linux"
    MACOS = "MacOS"


class Distro(str, Enum):
    TEXLIVE = "TeXLive"
    MIKTEX = "MikTeX"


SECTION_ORDER: Tuple[SectionKind, ...] = (
    SectionKind.HEADER,
    SectionKind.BODY,
    SectionKind.XREF,
    SectionKind.TRAILER,
)

ALL_OS: FrozenSet[OperatingSystem] = frozenset(OperatingSystem)
# None stands for "no LaTeX distribution involved".
ALL_DISTRO: FrozenSet[Optional[Distro]] = frozenset({Distro.TEXLIVE, Distro.MIKTEX, None})

PRODUCER_SLUGS = {
    Producer.AcrobatDistiller: "acrobat",
    Producer.MicrosoftOfficeWord: "word",
    Producer.LibreOffice: "libreoffice",
    Producer.Ghostscript: "ghostscript",
    Producer.MacOSXQuartz: "quartz",
    Producer.PdfTeX: "pdftex",
    Producer.SkiaPDF: "skia",
    Producer.Cairo: "cairo",
    Producer.XdviPDFmx: "xdvipdfmx",
    Producer.LuaTeX: "luatex",
    Producer.PDFLaTeX: "pdflatex",
}

_OS_ALIASES = {
    "windows": OperatingSystem.WINDOWS,
    "linux": OperatingSystem.LINUX,
    "macos": OperatingSystem.MACOS,
}
_DISTRO_ALIASES = {
    "texlive": Distro.TEXLIVE,
    "miktex": Distro.MIKTEX,
}


def producer_name(value: object) -> str:
    """Plain-string form of a producer; enum members collapse to their value."""

    if isinstance(value, Producer):
        return value.value
    return str(value).strip()


def producer_slug(producer: str) -> str:
    slug = PRODUCER_SLUGS.get(producer)  # type: ignore[call-overload]
    if slug is not None:
        return slug
    return "".join(ch if ch.isalnum() else "-" for ch in producer.lower()).strip("-") or "unknown"


def parse_os(value: str) -> OperatingSystem:
    key = value.strip().lower()
    if key not in _OS_ALIASES:
        raise ValueError(f"Unknown operating system '{value}'")
    return _OS_ALIASES[key]


def parse_distro(value: str) -> Distro:
    key = value.strip().lower()
    if key not in _DISTRO_ALIASES:
        raise ValueError(f"Unknown distribution '{value}'")
    return _DISTRO_ALIASES[key]


def os_token(value: OperatingSystem) -> str:
    return value.value.lower()


def distro_token(value: Distro) -> str:
    return value.value.lower()
