from __future__ import annotations

import codecs
from typing import Optional

_ESCAPES = {
    ord("n"): b"\n",
    ord("r"): b"\r",
    ord("t"): b"\t",
    ord("b"): b"\b",
    ord("f"): b"\f",
    ord("("): b"(",
    ord(")"): b")",
    ord("\\"): b"\\",
}
_OCTAL = b"01234567"
_HEX_DIGITS = b"0123456789abcdefABCDEF"


def decode_literal(raw: bytes) -> bytes:
    """Unescape the body of a ``( ... )`` string (delimiters removed)."""

    out = bytearray()
    pos = 0
    length = len(raw)
    while pos < length:
        byte = raw[pos]
        if byte != 0x5C or pos + 1 >= length:
            out.append(byte)
            pos += 1
            continue
        nxt = raw[pos + 1]
        if nxt in _ESCAPES:
            out += _ESCAPES[nxt]
            pos += 2
        elif nxt in _OCTAL:
            end = pos + 1
            while end < length and end < pos + 4 and raw[end] in _OCTAL:
                end += 1
            out.append(int(raw[pos + 1 : end], 8) & 0xFF)
            pos = end
        elif nxt == 0x0D:
            pos += 3 if raw[pos + 2 : pos + 3] == b"\n" else 2
        elif nxt == 0x0A:
            pos += 2
        else:
            out.append(nxt)
            pos += 2
    return bytes(out)


def decode_hex(raw: bytes) -> bytes:
    digits = bytes(b for b in raw if b in _HEX_DIGITS)
    if len(digits) % 2:
        digits += b"0"
    return bytes.fromhex(digits.decode("ascii"))


def to_text(data: bytes) -> str:
    if data.startswith(codecs.BOM_UTF16_BE):
        return data[2:].decode("utf-16-be", errors="replace")
    if data.startswith(codecs.BOM_UTF8):
        return data[3:].decode("utf-8", errors="replace")
    # PDFDocEncoding agrees with latin-1 on everything producers emit in practice
    return data.decode("latin-1")


def decode_pdf_string(value: bytes) -> Optional[str]:
    """Decode a literal or hex string object; ``None`` when ``value`` is neither."""

    value = value.strip()
    if value.startswith(b"(") and value.endswith(b")"):
        return to_text(decode_literal(value[1:-1]))
    if value.startswith(b"<") and value.endswith(b">") and not value.startswith(b"<<"):
        return to_text(decode_hex(value[1:-1]))
    return None
