"""Byte-level helpers for walking PDF dictionaries without interpreting them."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Tuple

WHITESPACE = b"\x00\t\n\x0c\r "
DELIMITERS = b"()<>[]{}/%"

_REFERENCE = re.compile(rb"([0-9]+)[\x00\t\n\x0c\r ]+([0-9]+)[\x00\t\n\x0c\r ]+R\Z")
_INTEGER = re.compile(rb"[+-]?[0-9]+\Z")


@dataclass(frozen=True)
class PdfDictionary:
    """Top-level entries of one ``<< ... >>`` dictionary.

    Values are the raw bytes between a key and the next key (or the closing
    delimiter), stripped of surrounding whitespace. ``start``/``end`` are
    absolute offsets of ``<<`` and one past ``>>``.
    """

    entries: Tuple[Tuple[str, bytes], ...]
    start: int
    end: int
    terminated: bool = True

    @property
    def keys(self) -> Tuple[str, ...]:
        return tuple(key for key, _ in self.entries)

    def get(self, key: str) -> Optional[bytes]:
        for name, value in self.entries:
            if name == key:
                return value
        return None

    def name(self, key: str) -> Optional[str]:
        value = self.get(key)
        if value is None or not value.startswith(b"/"):
            return None
        return value[: _name_end(value, 1)].decode("latin-1")

    def integer(self, key: str) -> Optional[int]:
        value = self.get(key)
        if value is None or not _INTEGER.match(value):
            return None
        return int(value)

    def reference(self, key: str) -> Optional[Tuple[int, int]]:
        value = self.get(key)
        if value is None:
            return None
        match = _REFERENCE.match(value)
        if match is None:
            return None
        return int(match.group(1)), int(match.group(2))


def skip_whitespace(data: bytes, pos: int, *, comments: bool = True) -> int:
    length = len(data)
    while pos < length:
        byte = data[pos]
        if byte in WHITESPACE:
            pos += 1
        elif comments and byte == 0x25:
            pos = skip_comment(data, pos)
        else:
            break
    return pos


def skip_comment(data: bytes, pos: int) -> int:
    length = len(data)
    while pos < length and data[pos] not in (0x0A, 0x0D):
        pos += 1
    return pos


def skip_literal_string(data: bytes, pos: int) -> int:
    depth = 0
    length = len(data)
    while pos < length:
        byte = data[pos]
        if byte == 0x5C:
            pos += 2
            continue
        if byte == 0x28:
            depth += 1
        elif byte == 0x29:
            depth -= 1
            if depth == 0:
                return pos + 1
        pos += 1
    return length


def skip_hex_string(data: bytes, pos: int) -> int:
    end = data.find(b">", pos + 1)
    return len(data) if end < 0 else end + 1


def skip_composite(data: bytes, pos: int) -> int:
    """Skip a nested dictionary or array starting at ``pos``."""

    depth = 0
    length = len(data)
    while pos < length:
        byte = data[pos]
        if byte == 0x28:
            pos = skip_literal_string(data, pos)
            continue
        if byte == 0x25:
            pos = skip_comment(data, pos)
            continue
        if data.startswith(b"<<", pos):
            depth += 1
            pos += 2
            continue
        if data.startswith(b">>", pos):
            depth -= 1
            pos += 2
            if depth == 0:
                return pos
            continue
        if byte == 0x3C:
            pos = skip_hex_string(data, pos)
            continue
        if byte == 0x5B:
            depth += 1
        elif byte == 0x5D:
            depth -= 1
            if depth == 0:
                return pos + 1
        pos += 1
    return length


def _name_end(data: bytes, pos: int) -> int:
    length = len(data)
    while pos < length and data[pos] not in WHITESPACE and data[pos] not in DELIMITERS:
        pos += 1
    return pos


def _token_end(data: bytes, pos: int) -> int:
    end = _name_end(data, pos)
    # stray delimiters such as ')' or '}' still have to advance
    return end if end > pos else pos + 1


def read_dictionary(data: bytes, start: int) -> PdfDictionary:
    """Read the dictionary opening at ``start`` and record its top-level keys.

    A name counts as a key whenever the previous top-level token completed a
    value; composite values (strings, arrays, nested dictionaries) are skipped
    as a unit, so keys of nested dictionaries never surface.
    """

    if not data.startswith(b"<<", start):
        raise ValueError(f"no dictionary at offset {start}")

    entries: list[tuple[str, bytes]] = []
    key: Optional[str] = None
    value_start = 0
    expecting_key = True
    pos = start + 2
    length = len(data)

    def close_entry(at: int) -> None:
        if key is not None:
            entries.append((key, data[value_start:at].strip(WHITESPACE)))

    while pos < length:
        byte = data[pos]
        if byte in WHITESPACE:
            pos += 1
            continue
        if byte == 0x25:
            pos = skip_comment(data, pos)
            continue
        if data.startswith(b">>", pos):
            close_entry(pos)
            return PdfDictionary(tuple(entries), start, pos + 2)
        if byte == 0x2F:
            end = _name_end(data, pos + 1)
            if expecting_key:
                close_entry(pos)
                key = data[pos:end].decode("latin-1")
                value_start = end
                expecting_key = False
            else:
                expecting_key = True
            pos = end
            continue
        if byte == 0x3C:
            end = skip_composite(data, pos) if data.startswith(b"<<", pos) else skip_hex_string(data, pos)
        elif byte == 0x28:
            end = skip_literal_string(data, pos)
        elif byte == 0x5B:
            end = skip_composite(data, pos)
        else:
            end = _token_end(data, pos)
        expecting_key = True
        pos = end

    close_entry(length)
    return PdfDictionary(tuple(entries), start, length, terminated=False)
