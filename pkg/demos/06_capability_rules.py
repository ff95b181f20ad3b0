"""Mapping extracted features to ATT&CK techniques and MBC behaviors.

The bundled rule pack evaluates declarative condition trees over imports,
strings, section traits and the packing verdict; every match carries the
evidence that produced it, so findings stay explainable.
"""

from pereport import analyze, extract_strings, load_default_rule_pack
from pereport.synth import build_pe, fixture_specs

pack = load_default_rule_pack()
print(f"bundled pack: version {pack.version}, {len(pack.rules)} rules\n")

binary = build_pe(fixture_specs()["injector"])
print("strings scraped from the injector sample:")
for text in extract_strings(binary, 5)[:6]:
    print(f"  {text!r}")

result = analyze(binary, "injector_demo.exe")
print("\nrule matches:")
for match in result.matches:
    attack = ", ".join(ref.technique_id for ref in match.attack_refs)
    mbc = ", ".join(ref.behavior_id for ref in match.mbc_refs)
    print(f"  {match.rule_id}  (attack: {attack or '-'}; mbc: {mbc or '-'})")
    for line in match.evidence:
        print(f"      evidence: {line}")

caps = result.report.capabilities
print("\nreport capabilities section (deduplicated by technique):")
for entry in caps["attack"]:
    print(f"  {entry['technique_id']:10s} {entry['technique']}")
for entry in caps["mbc"]:
    print(f"  {entry['behavior_id']:10s} {entry['behavior']}")
