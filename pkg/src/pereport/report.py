"""Report assembly, canonical serialization and token-budget fitting.

The report is a five-section JSON document (global, sections, imports,
packing, capabilities) plus a schema_version, written with a fixed key
order, fixed float formatting (4 decimal places for entropies and the
packing label) and 2-space indentation, so identical report values always
produce identical bytes.  Files are named <sha256>.json.

Token counts approximate a wordpiece tokenizer: alphanumeric runs count one
token per started 6-character chunk, and every other printable
non-whitespace character counts one token.  fit_to_budget drops report
parts lowest-priority-first until the approximation fits the budget; the
global section is never dropped.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from typing import Any

from .globalinfo import GlobalInfo
from .imports import ImportInfo
from .packing import PackingVerdict
from .rules import RuleMatch
from .sections import SectionInfo

SCHEMA_VERSION = "1.0"

# Report parts orderable under a token budget, most important first.  The
# tail of this list is dropped first when a report exceeds its budget;
# "global" must stay first and is never dropped.
DEFAULT_PRIORITY: tuple[str, ...] = (
    "global",
    "packing",
    "capabilities",
    "import_summary",
    "section_summary",
    "import_lists",
    "section_digests",
)

WORD_CHUNK = 6

_TOKEN_RE = re.compile(r"[0-9A-Za-z]+|[^\s0-9A-Za-z]")


@dataclass(frozen=True)
class TokenBudget:
    limit: int
    priority: tuple[str, ...] = DEFAULT_PRIORITY

    def __post_init__(self) -> None:
        if self.limit <= 0:
            raise ValueError("budget limit must be > 0")
        if not self.priority or self.priority[0] != "global":
            raise ValueError("priority must keep 'global' first")


@dataclass(frozen=True)
class TruncationInfo:
    """Budget-fit bookkeeping; never serialized into the report."""

    limit: int
    dropped: tuple[str, ...]
    irreducible: bool


@dataclass(frozen=True)
class Report:
    schema_version: str
    global_info: GlobalInfo
    sections: tuple[SectionInfo, ...]
    imports: ImportInfo | None
    packing: PackingVerdict | None
    capabilities: dict[str, list[dict[str, Any]]] | None
    truncation: TruncationInfo | None = field(default=None, compare=False)


def capabilities_from_matches(matches: list[RuleMatch]) -> dict[str, list[dict[str, Any]]]:
    """Fold rule matches into the report's capabilities section.

    References are deduplicated by technique/behavior id; each entry lists
    the rules that contributed it, in match order.
    """
    attack: dict[str, dict[str, Any]] = {}
    mbc: dict[str, dict[str, Any]] = {}
    for match in matches:
        for ref in match.attack_refs:
            entry = attack.setdefault(ref.technique_id, {
                "technique_id": ref.technique_id,
                "tactic": ref.tactic,
                "technique": ref.technique,
                "rules": [],
            })
            if match.rule_id not in entry["rules"]:
                entry["rules"].append(match.rule_id)
        for ref in match.mbc_refs:
            entry = mbc.setdefault(ref.behavior_id, {
                "behavior_id": ref.behavior_id,
                "objective": ref.objective,
                "behavior": ref.behavior,
                "rules": [],
            })
            if match.rule_id not in entry["rules"]:
                entry["rules"].append(match.rule_id)
    return {"attack": list(attack.values()), "mbc": list(mbc.values())}


def build_report(
    global_info: GlobalInfo,
    sections: list[SectionInfo],
    imports: ImportInfo,
    packing: PackingVerdict,
    capabilities: dict[str, list[dict[str, Any]]],
) -> Report:
    """Assemble the five report sections in their fixed order."""
    return Report(
        schema_version=SCHEMA_VERSION,
        global_info=global_info,
        sections=tuple(sections),
        imports=imports,
        packing=packing,
        capabilities=capabilities,
    )


class _Fixed4(float):
    """Marker for numbers rendered with exactly 4 decimal places."""


def _report_tree(report: Report) -> dict[str, Any]:
    g = report.global_info
    tree: dict[str, Any] = {
        "schema_version": report.schema_version,
        "global": {
            "file_name": g.file_name,
            "sha256": g.sha256,
            "md5": g.md5,
            "file_type": g.file_type,
            "target_os": g.target_os,
            "compile_timestamp": g.compile_timestamp,
            "file_size": g.file_size,
            "entropy": _Fixed4(g.entropy),
        },
    }

    sections = []
    for info in report.sections:
        entry: dict[str, Any] = {
            "name": info.name,
            "raw_size": info.raw_size,
            "virtual_size": info.virtual_size,
        }
        if info.sha256 is not None:
            entry["sha256"] = info.sha256
        entry["entropy"] = _Fixed4(info.entropy)
        entry["characteristics"] = list(info.characteristics)
        entry["anomalies"] = list(info.anomalies)
        sections.append(entry)
    tree["sections"] = sections

    if report.imports is None:
        tree["imports"] = {}
    else:
        imp = report.imports
        tree["imports"] = {
            "imphash": imp.imphash,
            "named_count": imp.named_count,
            "ordinal_count": imp.ordinal_count,
            "libraries": {dll: list(names) for dll, names in imp.libraries.items()},
            "risk_tags": [
                {
                    "exploit": tag.exploit,
                    "matched_apis": list(tag.matched_apis),
                    "required": tag.required,
                }
                for tag in imp.risk_tags
            ],
        }

    if report.packing is None:
        tree["packing"] = {}
    else:
        packing = report.packing
        tree["packing"] = {
            "label": _Fixed4(packing.label),
            "likely_packed": packing.likely_packed,
            "packers": list(packing.packers),
            "detectors": [
                {
                    "detector_id": v.detector_id,
                    "label": v.label,
                    "weight": _Fixed4(v.weight),
                    "packer_names": list(v.packer_names),
                    "evidence": v.evidence,
                }
                for v in packing.verdicts
            ],
        }

    tree["capabilities"] = report.capabilities if report.capabilities is not None else {}
    return tree


def _write_json(value: Any, indent: int) -> str:
    pad = " " * indent
    child_pad = " " * (indent + 2)
    if isinstance(value, _Fixed4):
        return f"{float(value):.4f}"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, str)) or value is None:
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, float):
        raise TypeError("bare floats must be wrapped for fixed formatting")
    if isinstance(value, dict):
        if not value:
            return "{}"
        parts = [
            f"{child_pad}{json.dumps(str(k), ensure_ascii=False)}: "
            f"{_write_json(v, indent + 2)}"
            for k, v in value.items()
        ]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        parts = [f"{child_pad}{_write_json(v, indent + 2)}" for v in value]
        return "[\n" + ",\n".join(parts) + f"\n{pad}]"
    raise TypeError(f"unserializable value of type {type(value)!r}")


def serialize_report(report: Report) -> bytes:
    """Deterministic UTF-8 JSON bytes for a report (see module doc)."""
    return (_write_json(_report_tree(report), 0) + "\n").encode("utf-8")


def tokenize_text(text: str) -> list[str]:
    """Subword-approximating tokens of a serialized report.

    Alphanumeric runs are cut into 6-character chunks (ceil(len/6) tokens
    per run); every other printable non-whitespace character is one token.
    featurize() hashes exactly this token stream, so feature mass always
    equals the approximate token count.
    """
    tokens: list[str] = []
    for piece in _TOKEN_RE.findall(text):
        if len(piece) <= WORD_CHUNK:
            tokens.append(piece)
        else:
            tokens.extend(
                piece[i : i + WORD_CHUNK] for i in range(0, len(piece), WORD_CHUNK)
            )
    return tokens


def approximate_tokens(report: Report) -> int:
    return len(tokenize_text(serialize_report(report).decode("utf-8")))


def _drop_part(report: Report, part: str) -> Report:
    if part == "section_digests":
        return replace(
            report,
            sections=tuple(replace(s, sha256=None) for s in report.sections),
        )
    if part == "import_lists":
        if report.imports is None:
            return report
        return replace(report, imports=replace(report.imports, libraries={}))
    if part == "section_summary":
        return replace(report, sections=())
    if part == "import_summary":
        return replace(report, imports=None)
    if part == "capabilities":
        return replace(report, capabilities=None)
    if part == "packing":
        return replace(report, packing=None)
    raise ValueError(f"unknown report part {part!r}")


def fit_to_budget(report: Report, budget: TokenBudget) -> Report:
    """Drop content lowest-priority-first until it fits.

    The returned report records what was dropped in ``truncation``; when
    even the irreducible minimum (global section plus empty shells) exceeds
    the budget the report is flagged irreducible instead of losing global.
    """
    fitted = report
    dropped: list[str] = []
    for part in reversed(budget.priority):
        if approximate_tokens(fitted) <= budget.limit:
            break
        if part == "global":
            continue
        shrunk = _drop_part(fitted, part)
        if shrunk != fitted:
            dropped.append(part)
            fitted = shrunk
    irreducible = approximate_tokens(fitted) > budget.limit
    if not dropped and not irreducible:
        return report
    return replace(
        fitted,
        truncation=TruncationInfo(
            limit=budget.limit, dropped=tuple(dropped), irreducible=irreducible
        ),
    )
