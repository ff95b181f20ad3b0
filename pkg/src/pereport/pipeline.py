"""End-to-end analysis: raw PE bytes in, report out.

This is the library's main entry point; the CLI and the batch generators
are thin wrappers around :func:`analyze`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .globalinfo import build_global_info
from .imports import build_import_info
from .packing import (
    DEFAULT_LIKELY_PACKED_THRESHOLD,
    aggregate_packing_label,
    build_packing_info,
    run_detectors,
)
from .pe import parse_pe
from .report import Report, TokenBudget, build_report, capabilities_from_matches, fit_to_budget
from .rules import FeatureContext, RuleMatch, RulePack, evaluate_rules, load_default_rule_pack
from .sections import build_section_infos
from .strings import extract_strings


@dataclass(frozen=True)
class AnalysisConfig:
    rule_pack: RulePack | None = None
    detector_weights: dict[str, float] = field(default_factory=dict)
    likely_packed_threshold: float = DEFAULT_LIKELY_PACKED_THRESHOLD
    token_budget: TokenBudget | None = None
    min_string_length: int = 5
    high_entropy_threshold: float = 7.0


@dataclass(frozen=True)
class AnalysisResult:
    report: Report
    matches: tuple[RuleMatch, ...]
    warnings: tuple[str, ...]


def analyze(
    binary: bytes,
    name: str,
    config: AnalysisConfig | None = None,
    _now: float | None = None,
) -> AnalysisResult:
    """Run the full extraction pass over one binary.

    Parse failures (not a PE, truncated mandatory headers, unsupported
    machine) raise; everything recoverable lands in the result's warnings.
    """
    config = config or AnalysisConfig()
    pe = parse_pe(binary)
    warnings = list(pe.warnings)

    global_info = build_global_info(pe, binary, name, warnings=warnings, _now=_now)
    section_infos = build_section_infos(
        pe, binary, high_entropy_threshold=config.high_entropy_threshold
    )
    import_info = build_import_info(pe.imports)

    verdicts = run_detectors(
        pe, section_infos, import_info, weights=config.detector_weights
    )
    label = aggregate_packing_label(verdicts)
    packing = build_packing_info(
        verdicts, label, likely_packed_threshold=config.likely_packed_threshold
    )

    strings = extract_strings(
        binary, min_len=config.min_string_length, warnings=warnings
    )
    pack = config.rule_pack if config.rule_pack is not None else load_default_rule_pack()
    ctx = FeatureContext(
        global_info=global_info,
        sections=tuple(section_infos),
        imports=import_info,
        packing=packing,
        strings=tuple(strings),
    )
    matches = evaluate_rules(pack, ctx)

    report = build_report(
        global_info,
        section_infos,
        import_info,
        packing,
        capabilities_from_matches(matches),
    )
    if config.token_budget is not None:
        report = fit_to_budget(report, config.token_budget)
    return AnalysisResult(
        report=report, matches=tuple(matches), warnings=tuple(warnings)
    )
