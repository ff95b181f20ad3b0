"""pereport: semantic preprocessing for Windows PE binaries.

Turns raw PE bytes into an analyst-readable five-section JSON report
(global info, sections, imports, packing verdict, ATT&CK/MBC capabilities)
and ships a desk-scale classification harness that demonstrates the reports
carry malware-category signal.
"""

from .classify import (
    CLASSES,
    ClassificationReport,
    ManifestEntry,
    classification_metrics,
    featurize,
    load_manifest,
    predict,
    stratified_split,
    train_classifier,
)
from .globalinfo import GlobalInfo, build_global_info, shannon_entropy
from .imports import ImportInfo, RiskTag, build_import_info, compute_imphash, resolve_ordinal, tag_risky_apis
from .packing import (
    DetectorVerdict,
    PackingVerdict,
    aggregate_packing_label,
    build_packing_info,
    run_detectors,
)
from .pe import (
    ImportEntry,
    ImportTable,
    ImportedLibrary,
    NotPeError,
    ParsedPe,
    PeError,
    TruncatedError,
    UnmappedRvaError,
    UnsupportedMachineError,
    extract_imports,
    parse_pe,
    rva_to_offset,
)
from .pipeline import AnalysisConfig, AnalysisResult, analyze
from .report import (
    Report,
    TokenBudget,
    approximate_tokens,
    build_report,
    fit_to_budget,
    serialize_report,
)
from .rules import (
    FeatureContext,
    RuleMatch,
    RulePack,
    evaluate_rules,
    load_default_rule_pack,
    load_rule_pack,
)
from .sections import SectionInfo, build_section_infos, decode_section_flags, section_anomalies
from .strings import extract_strings

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "AnalysisResult",
    "CLASSES",
    "ClassificationReport",
    "DetectorVerdict",
    "FeatureContext",
    "GlobalInfo",
    "ImportEntry",
    "ImportInfo",
    "ImportTable",
    "ImportedLibrary",
    "ManifestEntry",
    "NotPeError",
    "PackingVerdict",
    "ParsedPe",
    "PeError",
    "Report",
    "RiskTag",
    "RuleMatch",
    "RulePack",
    "SectionInfo",
    "TokenBudget",
    "TruncatedError",
    "UnmappedRvaError",
    "UnsupportedMachineError",
    "aggregate_packing_label",
    "analyze",
    "approximate_tokens",
    "build_global_info",
    "build_import_info",
    "build_packing_info",
    "build_report",
    "build_section_infos",
    "classification_metrics",
    "compute_imphash",
    "decode_section_flags",
    "evaluate_rules",
    "extract_imports",
    "extract_strings",
    "featurize",
    "fit_to_budget",
    "load_default_rule_pack",
    "load_manifest",
    "load_rule_pack",
    "parse_pe",
    "predict",
    "resolve_ordinal",
    "run_detectors",
    "rva_to_offset",
    "section_anomalies",
    "serialize_report",
    "shannon_entropy",
    "stratified_split",
    "tag_risky_apis",
    "train_classifier",
    "__version__",
]
