"""Per-section report entries and structural anomaly flags.

Irregularities in section naming and characteristics (an executable .rsrc,
writable+executable sections, packer-style names) are classic red flags, so
each section entry carries its decoded flags and any anomaly codes.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .globalinfo import shannon_entropy
from .pe import ParsedPe, SectionHeaderInfo

# Flag vocabulary, mask-ascending; this is also the canonical output order.
SECTION_FLAGS: tuple[tuple[str, int], ...] = (
    ("CNT_CODE", 0x00000020),
    ("CNT_INITIALIZED_DATA", 0x00000040),
    ("CNT_UNINITIALIZED_DATA", 0x00000080),
    ("MEM_EXECUTE", 0x20000000),
    ("MEM_READ", 0x40000000),
    ("MEM_WRITE", 0x80000000),
)
SECTION_FLAG_MASKS = {name: mask for name, mask in SECTION_FLAGS}

# Names the PE/COFF specification treats as conventional; anything else is
# a nonstandard_name anomaly.
STANDARD_SECTION_NAMES = frozenset(
    {".text", ".data", ".rdata", ".rsrc", ".reloc",
     ".idata", ".edata", ".bss", ".tls", ".pdata"}
)

# Packed/encrypted data heuristic (configurable at call sites).
HIGH_ENTROPY_THRESHOLD = 7.0
HIGH_ENTROPY_MIN_RAW_SIZE = 256

ANOMALY_NONSTANDARD_NAME = "nonstandard_name"
ANOMALY_EXECUTABLE_RESOURCE = "executable_resource_section"
ANOMALY_WRITABLE_EXECUTABLE = "writable_executable"
ANOMALY_HIGH_ENTROPY = "high_entropy_section"
ANOMALY_ENTRY_NONSTANDARD = "entry_in_nonstandard_section"
ANOMALY_ZERO_RAW = "zero_raw_nonzero_virtual"
# Extra per-section code for raw data cut off by end-of-file; build_section_infos
# hashes whatever bytes exist and records this.
ANOMALY_TRUNCATED_RAW = "truncated_raw_data"


@dataclass(frozen=True)
class SectionInfo:
    name: str
    raw_size: int
    virtual_size: int
    sha256: str | None
    entropy: float
    characteristics: tuple[str, ...]
    anomalies: tuple[str, ...]


def decode_section_flags(characteristics: int) -> list[str]:
    """Decode a characteristics word into flag names, canonical order.

    Unknown bits are ignored; OR-ing the masks of the returned names back
    together reproduces exactly the recognized bits of the input.
    """
    return [name for name, mask in SECTION_FLAGS if characteristics & mask]


def _per_section_anomalies(
    header: SectionHeaderInfo,
    flags: list[str],
    entropy: float,
    truncated: bool,
    high_entropy_threshold: float,
) -> tuple[str, ...]:
    codes = []
    if header.name not in STANDARD_SECTION_NAMES:
        codes.append(ANOMALY_NONSTANDARD_NAME)
    if header.name == ".rsrc" and "MEM_EXECUTE" in flags:
        codes.append(ANOMALY_EXECUTABLE_RESOURCE)
    if "MEM_WRITE" in flags and "MEM_EXECUTE" in flags:
        codes.append(ANOMALY_WRITABLE_EXECUTABLE)
    if (
        entropy > high_entropy_threshold
        and header.raw_size >= HIGH_ENTROPY_MIN_RAW_SIZE
    ):
        codes.append(ANOMALY_HIGH_ENTROPY)
    if header.raw_size == 0 and header.virtual_size > 0:
        codes.append(ANOMALY_ZERO_RAW)
    if truncated:
        codes.append(ANOMALY_TRUNCATED_RAW)
    return tuple(codes)


def build_section_infos(
    pe: ParsedPe,
    binary: bytes,
    high_entropy_threshold: float = HIGH_ENTROPY_THRESHOLD,
) -> list[SectionInfo]:
    """One SectionInfo per section header, in table order.

    Zero-raw sections get entropy 0 and the empty-input digest; sections
    whose raw data runs past end of file are hashed over the available bytes
    with a truncated_raw_data anomaly.
    """
    infos = []
    for header in pe.sections:
        start = header.raw_offset
        end = start + header.raw_size
        truncated = end > len(binary)
        raw = binary[start : min(end, len(binary))] if header.raw_size else b""
        flags = decode_section_flags(header.characteristics)
        entropy = shannon_entropy(raw)
        infos.append(
            SectionInfo(
                name=header.name,
                raw_size=header.raw_size,
                virtual_size=header.virtual_size,
                sha256=hashlib.sha256(raw).hexdigest(),
                entropy=entropy,
                characteristics=tuple(flags),
                anomalies=_per_section_anomalies(
                    header, flags, entropy, truncated, high_entropy_threshold
                ),
            )
        )
    return infos


def entry_section(
    sections: tuple[SectionHeaderInfo, ...], entry_point_rva: int
) -> SectionHeaderInfo | None:
    """The section containing the entry point, or None."""
    if entry_point_rva == 0:
        return None
    for sec in sections:
        extent = max(sec.virtual_size, sec.raw_size)
        if extent and sec.virtual_address <= entry_point_rva < sec.virtual_address + extent:
            return sec
    return None


def section_anomalies(
    infos: list[SectionInfo],
    entry_point_rva: int,
    sections: tuple[SectionHeaderInfo, ...],
) -> list[str]:
    """File-level anomaly codes, deduplicated, discovery order.

    Aggregates the per-section codes and adds entry_in_nonstandard_section
    when the entry point lands in a section outside the standard name set.
    """
    codes: list[str] = []
    for info in infos:
        for code in info.anomalies:
            if code != ANOMALY_TRUNCATED_RAW and code not in codes:
                codes.append(code)
    sec = entry_section(sections, entry_point_rva)
    if sec is not None and sec.name not in STANDARD_SECTION_NAMES:
        codes.append(ANOMALY_ENTRY_NONSTANDARD)
    return codes
