"""Packer-signature detector ensemble and the weighted packing label.

Four built-in detectors each vote 0/1 (section-name signatures, entry point
in a nonstandard section, high-entropy sections, suspiciously sparse
imports).  Their votes are combined as a weight-normalized mean: with
detector labels l_i and weights w_i, the aggregate is

    label = sum(w_i * l_i) / sum(w_i)

so the result always lies in [0, 1] and equals the vote share for equal
weights.  Weights default to 1.0 and are configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .imports import ImportInfo
from .pe import ParsedPe
from .sections import (
    HIGH_ENTROPY_MIN_RAW_SIZE,
    HIGH_ENTROPY_THRESHOLD,
    STANDARD_SECTION_NAMES,
    SectionInfo,
    entry_section,
)

DETECTOR_SECTION_SIGNATURE = "section_signature"
DETECTOR_ENTRY_SECTION = "entry_in_nonstandard_section"
DETECTOR_HIGH_ENTROPY = "high_entropy"
DETECTOR_SPARSE_IMPORTS = "sparse_imports"

DETECTOR_IDS = (
    DETECTOR_SECTION_SIGNATURE,
    DETECTOR_ENTRY_SECTION,
    DETECTOR_HIGH_ENTROPY,
    DETECTOR_SPARSE_IMPORTS,
)

DEFAULT_LIKELY_PACKED_THRESHOLD = 0.5
SPARSE_IMPORT_LIMIT = 5


class EmptyEnsembleError(ValueError):
    """No detector verdicts to aggregate."""


class NonPositiveWeightError(ValueError):
    """Detector weights must be > 0."""


@dataclass(frozen=True)
class DetectorVerdict:
    detector_id: str
    label: int  # 0 or 1
    weight: float
    packer_names: tuple[str, ...]
    evidence: str


@dataclass(frozen=True)
class PackingVerdict:
    label: float
    verdicts: tuple[DetectorVerdict, ...]
    packers: tuple[str, ...]
    likely_packed: bool


def _load_signatures() -> tuple[tuple[str, str], ...]:
    text = (
        resources.files("pereport.data")
        .joinpath("packer_signatures.txt")
        .read_text("utf-8")
    )
    records = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        prefix, packer = line.split(",", 1)
        records.append((prefix.lower(), packer))
    return tuple(records)


_SIGNATURES = _load_signatures()


def run_detectors(
    pe: ParsedPe,
    sections: list[SectionInfo],
    imports: ImportInfo,
    weights: dict[str, float] | None = None,
) -> list[DetectorVerdict]:
    """Run the built-in detector ensemble; exactly one verdict per detector."""
    weights = weights or {}

    def weight(detector_id: str) -> float:
        return float(weights.get(detector_id, 1.0))

    verdicts = []

    hits: list[tuple[str, str]] = []  # (section name, packer)
    for info in sections:
        lowered = info.name.lower()
        for prefix, packer in _SIGNATURES:
            if lowered.startswith(prefix):
                hits.append((info.name, packer))
                break
    verdicts.append(
        DetectorVerdict(
            detector_id=DETECTOR_SECTION_SIGNATURE,
            label=1 if hits else 0,
            weight=weight(DETECTOR_SECTION_SIGNATURE),
            packer_names=tuple(packer for _, packer in hits),
            evidence=(
                "; ".join(f"section {n} matches {p} signature" for n, p in hits)
                if hits
                else "no section-name signature matched"
            ),
        )
    )

    sec = entry_section(pe.sections, pe.optional.entry_point_rva)
    entry_odd = sec is not None and sec.name not in STANDARD_SECTION_NAMES
    verdicts.append(
        DetectorVerdict(
            detector_id=DETECTOR_ENTRY_SECTION,
            label=1 if entry_odd else 0,
            weight=weight(DETECTOR_ENTRY_SECTION),
            packer_names=(),
            evidence=(
                f"entry point 0x{pe.optional.entry_point_rva:x} inside {sec.name}"
                if entry_odd
                else "entry point in a standard section"
            ),
        )
    )

    hot = [
        info
        for info in sections
        if info.entropy > HIGH_ENTROPY_THRESHOLD
        and info.raw_size >= HIGH_ENTROPY_MIN_RAW_SIZE
    ]
    verdicts.append(
        DetectorVerdict(
            detector_id=DETECTOR_HIGH_ENTROPY,
            label=1 if hot else 0,
            weight=weight(DETECTOR_HIGH_ENTROPY),
            packer_names=(),
            evidence=(
                "; ".join(f"section {i.name} entropy {i.entropy:.4f}" for i in hot)
                if hot
                else f"no section entropy above {HIGH_ENTROPY_THRESHOLD}"
            ),
        )
    )

    total_imports = imports.named_count + imports.ordinal_count
    code_bytes = sum(
        info.raw_size
        for info in sections
        if "CNT_CODE" in info.characteristics or "MEM_EXECUTE" in info.characteristics
    )
    sparse = total_imports < SPARSE_IMPORT_LIMIT and code_bytes > 0
    verdicts.append(
        DetectorVerdict(
            detector_id=DETECTOR_SPARSE_IMPORTS,
            label=1 if sparse else 0,
            weight=weight(DETECTOR_SPARSE_IMPORTS),
            packer_names=(),
            evidence=(
                f"only {total_imports} imports with 0x{code_bytes:x} code bytes"
                if sparse
                else f"{total_imports} imports"
            ),
        )
    )
    return verdicts


def aggregate_packing_label(verdicts: list[DetectorVerdict]) -> float:
    """Weight-normalized mean of the detector labels (see module doc)."""
    if not verdicts:
        raise EmptyEnsembleError("no detector verdicts")
    for v in verdicts:
        if v.weight <= 0:
            raise NonPositiveWeightError(
                f"detector {v.detector_id} has weight {v.weight}"
            )
    total = sum(v.weight for v in verdicts)
    return sum(v.weight * v.label for v in verdicts) / total


def build_packing_info(
    verdicts: list[DetectorVerdict],
    label: float,
    likely_packed_threshold: float = DEFAULT_LIKELY_PACKED_THRESHOLD,
) -> PackingVerdict:
    """Fold verdicts and their aggregate into the report's packing section.

    likely_packed binarizes the label for rule-engine consumption; the
    threshold is configuration (default 0.5).
    """
    packers = sorted(
        {name for v in verdicts if v.label == 1 for name in v.packer_names}
    )
    return PackingVerdict(
        label=label,
        verdicts=tuple(verdicts),
        packers=tuple(packers),
        likely_packed=label >= likely_packed_threshold,
    )
