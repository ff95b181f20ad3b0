"""Printable-string extraction from raw binaries.

Finds maximal runs of printable ASCII and of UTF-16LE-encoded printable
ASCII, returned in order of appearance in the file.  The scan is capped at
10 MiB to bound worst-case cost on oversized inputs.
"""

from __future__ import annotations

import re

SCAN_CAP_BYTES = 10 * 1024 * 1024

_ASCII_RUN = re.compile(rb"[\x20-\x7e]+")
_UTF16LE_RUN = re.compile(rb"(?:[\x20-\x7e]\x00)+")


def extract_strings(
    binary: bytes, min_len: int = 5, warnings: list[str] | None = None
) -> list[str]:
    """All printable runs of at least ``min_len`` characters, file order.

    ASCII and UTF-16LE runs are merged and ordered by their byte offset.
    """
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    data = binary
    if len(data) > SCAN_CAP_BYTES:
        if warnings is not None:
            warnings.append(
                f"string scan capped at {SCAN_CAP_BYTES} of {len(data)} bytes"
            )
        data = data[:SCAN_CAP_BYTES]

    found: list[tuple[int, str]] = []
    for match in _ASCII_RUN.finditer(data):
        if match.end() - match.start() >= min_len:
            found.append((match.start(), match.group().decode("ascii")))
    for match in _UTF16LE_RUN.finditer(data):
        text = match.group().decode("utf-16-le")
        if len(text) >= min_len:
            found.append((match.start(), text))
    found.sort(key=lambda pair: pair[0])
    return [text for _, text in found]
