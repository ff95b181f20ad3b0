"""Declarative capability rules mapping extracted features to MITRE ATT&CK
techniques and Malware Behavior Catalog (MBC) behaviors.

A rule is a boolean condition tree over eight leaf kinds (imports, strings,
section flags, entropy, packing verdict, risky-API tags, plus all/any/not
combinators).  Rule packs are JSON; see docs/schemas/rulepack.schema.json
for the exact format and the regular-expression subset string_match accepts.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from .globalinfo import GlobalInfo
from .imports import RISK_EXPLOITS, ImportInfo
from .packing import PackingVerdict
from .sections import SECTION_FLAG_MASKS, SectionInfo

CONDITION_KINDS = (
    "all",
    "any",
    "not",
    "import_present",
    "string_match",
    "section_flag",
    "entropy_gt",
    "packed",
    "risk_tag",
)

_STRIPPED_EXTENSIONS = (".dll", ".ocx", ".sys")

# Python re is a superset of the POSIX-extended dialect rule packs are
# allowed to use; backreferences are rejected outright at load time.
_BACKREFERENCE = re.compile(r"\\[1-9]")


class RulePackError(ValueError):
    """Base class for rule-pack load failures."""


class SchemaError(RulePackError):
    """Structurally invalid pack, rule or condition."""


class DuplicateRuleIdError(RulePackError):
    """Two rules share an id."""


@dataclass(frozen=True)
class AttackRef:
    technique_id: str
    tactic: str
    technique: str


@dataclass(frozen=True)
class MbcRef:
    behavior_id: str
    objective: str
    behavior: str


@dataclass(frozen=True)
class Condition:
    kind: str
    children: tuple["Condition", ...] = ()
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Rule:
    id: str
    name: str
    attack_refs: tuple[AttackRef, ...]
    mbc_refs: tuple[MbcRef, ...]
    condition: Condition


@dataclass(frozen=True)
class RulePack:
    version: str
    rules: tuple[Rule, ...]


@dataclass(frozen=True)
class RuleMatch:
    rule_id: str
    attack_refs: tuple[AttackRef, ...]
    mbc_refs: tuple[MbcRef, ...]
    evidence: tuple[str, ...]


@dataclass(frozen=True)
class FeatureContext:
    """Everything one file's extraction pass feeds the rule engine."""

    global_info: GlobalInfo | None
    sections: tuple[SectionInfo, ...]
    imports: ImportInfo
    packing: PackingVerdict
    strings: tuple[str, ...]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError(message)


def parse_condition(obj: Any, where: str) -> Condition:
    """Validate and build a condition node from its single-key JSON form."""
    _require(isinstance(obj, dict) and len(obj) == 1,
             f"{where}: condition must be a single-key object")
    kind, body = next(iter(obj.items()))
    _require(kind in CONDITION_KINDS, f"{where}: unknown condition kind {kind!r}")

    if kind in ("all", "any"):
        _require(isinstance(body, list) and body,
                 f"{where}: {kind} needs a non-empty child list")
        children = tuple(
            parse_condition(child, f"{where}.{kind}[{i}]")
            for i, child in enumerate(body)
        )
        return Condition(kind=kind, children=children)
    if kind == "not":
        return Condition(kind=kind, children=(parse_condition(body, f"{where}.not"),))

    _require(isinstance(body, dict), f"{where}: {kind} needs an object body")
    if kind == "import_present":
        name = body.get("name")
        _require(isinstance(name, str) and name, f"{where}: import_present needs a name")
        dll = body.get("dll")
        _require(dll is None or (isinstance(dll, str) and dll),
                 f"{where}: import_present dll must be a non-empty string")
        return Condition(kind=kind, params={"name": name, "dll": dll})
    if kind == "string_match":
        pattern = body.get("pattern")
        _require(isinstance(pattern, str) and pattern,
                 f"{where}: string_match needs a pattern")
        _require(not _BACKREFERENCE.search(pattern),
                 f"{where}: backreferences are not supported")
        try:
            compiled = re.compile(pattern)
        except re.error as exc:
            raise SchemaError(f"{where}: bad pattern {pattern!r}: {exc}") from exc
        return Condition(kind=kind, params={"pattern": pattern, "_re": compiled})
    if kind == "section_flag":
        flag = body.get("flag")
        _require(flag in SECTION_FLAG_MASKS, f"{where}: unknown section flag {flag!r}")
        section_name = body.get("section_name")
        _require(section_name is None or isinstance(section_name, str),
                 f"{where}: section_name must be a string")
        return Condition(kind=kind, params={"flag": flag, "section_name": section_name})
    if kind == "entropy_gt":
        threshold = body.get("threshold")
        _require(isinstance(threshold, (int, float)) and 0 <= threshold <= 8,
                 f"{where}: entropy_gt threshold must be in [0, 8]")
        return Condition(kind=kind, params={"threshold": float(threshold)})
    if kind == "packed":
        expected = body.get("expected")
        _require(isinstance(expected, bool), f"{where}: packed needs a boolean")
        return Condition(kind=kind, params={"expected": expected})
    # risk_tag
    exploit = body.get("exploit")
    _require(exploit in RISK_EXPLOITS, f"{where}: unknown exploit {exploit!r}")
    return Condition(kind="risk_tag", params={"exploit": exploit})


def _parse_refs(rule_obj: dict, rule_id: str) -> tuple[tuple[AttackRef, ...], tuple[MbcRef, ...]]:
    attack = []
    for i, ref in enumerate(rule_obj.get("attack", [])):
        _require(isinstance(ref, dict), f"rule {rule_id}: attack[{i}] must be an object")
        try:
            attack.append(AttackRef(
                technique_id=ref["technique_id"],
                tactic=ref["tactic"],
                technique=ref["technique"],
            ))
        except KeyError as exc:
            raise SchemaError(f"rule {rule_id}: attack[{i}] missing {exc}") from exc
    mbc = []
    for i, ref in enumerate(rule_obj.get("mbc", [])):
        _require(isinstance(ref, dict), f"rule {rule_id}: mbc[{i}] must be an object")
        try:
            mbc.append(MbcRef(
                behavior_id=ref["behavior_id"],
                objective=ref["objective"],
                behavior=ref["behavior"],
            ))
        except KeyError as exc:
            raise SchemaError(f"rule {rule_id}: mbc[{i}] missing {exc}") from exc
    _require(bool(attack or mbc), f"rule {rule_id}: needs at least one attack or mbc ref")
    return tuple(attack), tuple(mbc)


def load_rule_pack(text: str) -> RulePack:
    """Parse and validate a JSON rule pack; duplicate rule ids are rejected."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    _require(isinstance(obj, dict), "pack must be a JSON object")
    version = obj.get("version")
    _require(isinstance(version, str) and version, "pack needs a version string")
    raw_rules = obj.get("rules")
    _require(isinstance(raw_rules, list), "pack needs a rules array")

    rules = []
    seen: set[str] = set()
    for i, rule_obj in enumerate(raw_rules):
        _require(isinstance(rule_obj, dict), f"rules[{i}] must be an object")
        rule_id = rule_obj.get("id")
        _require(isinstance(rule_id, str) and rule_id, f"rules[{i}] needs an id")
        if rule_id in seen:
            raise DuplicateRuleIdError(f"duplicate rule id {rule_id!r}")
        seen.add(rule_id)
        name = rule_obj.get("name")
        _require(isinstance(name, str) and name, f"rule {rule_id}: needs a name")
        _require("condition" in rule_obj, f"rule {rule_id}: needs a condition")
        attack_refs, mbc_refs = _parse_refs(rule_obj, rule_id)
        condition = parse_condition(rule_obj["condition"], f"rule {rule_id}")
        rules.append(Rule(
            id=rule_id,
            name=name,
            attack_refs=attack_refs,
            mbc_refs=mbc_refs,
            condition=condition,
        ))
    return RulePack(version=version, rules=tuple(rules))


def load_default_rule_pack() -> RulePack:
    """The rule pack bundled with the package."""
    text = resources.files("pereport.data").joinpath("rules.json").read_text("utf-8")
    return load_rule_pack(text)


def _dll_stem(dll: str) -> str:
    lower = dll.lower()
    for ext in _STRIPPED_EXTENSIONS:
        if lower.endswith(ext):
            return lower[: -len(ext)]
    return lower


def _import_candidates(wanted: str) -> tuple[str, ...]:
    base = wanted.lower()
    return (base, base + "a", base + "w")


def _eval(cond: Condition, ctx: FeatureContext) -> tuple[bool, list[str]]:
    kind = cond.kind
    if kind == "all":
        evidence: list[str] = []
        for child in cond.children:
            ok, ev = _eval(child, ctx)
            if not ok:
                return False, []
            evidence.extend(ev)
        return True, evidence
    if kind == "any":
        for child in cond.children:
            ok, ev = _eval(child, ctx)
            if ok:
                return True, ev
        return False, []
    if kind == "not":
        ok, _ = _eval(cond.children[0], ctx)
        if ok:
            return False, []
        return True, [f"negated condition held: not {cond.children[0].kind}"]

    if kind == "import_present":
        wanted = cond.params["name"]
        dll = cond.params["dll"]
        candidates = _import_candidates(wanted)
        for lib_name, names in ctx.imports.libraries.items():
            if dll is not None and _dll_stem(lib_name) != _dll_stem(dll):
                continue
            for name in names:
                if name.lower() in candidates:
                    return True, [f"import {lib_name}!{name}"]
        return False, []
    if kind == "string_match":
        pattern: re.Pattern = cond.params["_re"]
        for text in ctx.strings:
            if pattern.search(text):
                shown = text if len(text) <= 80 else text[:77] + "..."
                return True, [f"string {shown!r} matches /{cond.params['pattern']}/"]
        return False, []
    if kind == "section_flag":
        flag = cond.params["flag"]
        section_name = cond.params["section_name"]
        for info in ctx.sections:
            if section_name is not None and info.name != section_name:
                continue
            if flag in info.characteristics:
                return True, [f"section {info.name} has {flag}"]
        return False, []
    if kind == "entropy_gt":
        threshold = cond.params["threshold"]
        for info in ctx.sections:
            if info.entropy > threshold:
                return True, [
                    f"section {info.name} entropy {info.entropy:.4f} > {threshold}"
                ]
        return False, []
    if kind == "packed":
        expected = cond.params["expected"]
        if ctx.packing.likely_packed == expected:
            return True, [
                f"packing label {ctx.packing.label:.4f} -> "
                f"likely_packed={ctx.packing.likely_packed}"
            ]
        return False, []
    # risk_tag
    exploit = cond.params["exploit"]
    for tag in ctx.imports.risk_tags:
        if tag.exploit == exploit:
            return True, [f"risk tag {exploit}: {', '.join(tag.matched_apis)}"]
    return False, []


def evaluate_rules(pack: RulePack, ctx: FeatureContext) -> list[RuleMatch]:
    """A RuleMatch per rule whose condition holds, in pack order."""
    matches = []
    for rule in pack.rules:
        ok, evidence = _eval(rule.condition, ctx)
        if ok:
            matches.append(RuleMatch(
                rule_id=rule.id,
                attack_refs=rule.attack_refs,
                mbc_refs=rule.mbc_refs,
                evidence=tuple(evidence),
            ))
    return matches
