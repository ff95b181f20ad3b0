"""The packer-detector ensemble and its weighted aggregate label.

Four detectors vote 0/1; the packing label is the weight-normalized mean of
the votes, so it stays in [0, 1], hits 0 only when every detector is quiet
and 1 only on a unanimous alarm.  Weights are configuration.
"""

from pereport import (
    aggregate_packing_label,
    build_import_info,
    build_packing_info,
    build_section_infos,
    parse_pe,
    run_detectors,
)
from pereport.synth import build_pe, fixture_specs

for label in ("plain", "upxish", "noimp"):
    binary = build_pe(fixture_specs()[label])
    pe = parse_pe(binary)
    sections = build_section_infos(pe, binary)
    imports = build_import_info(pe.imports)
    verdicts = run_detectors(pe, sections, imports)
    value = aggregate_packing_label(verdicts)
    packing = build_packing_info(verdicts, value)
    print(f"=== {label} ===")
    for v in verdicts:
        print(f"  [{v.label}] w={v.weight:.1f} {v.detector_id:28s} {v.evidence}")
    print(f"  aggregate label = {value:.4f}, likely_packed = {packing.likely_packed}"
          f", candidates = {list(packing.packers) or '-'}\n")

print("custom weights change the aggregate, not the votes:")
binary = build_pe(fixture_specs()["noimp"])
pe = parse_pe(binary)
sections = build_section_infos(pe, binary)
imports = build_import_info(pe.imports)
for weights in ({}, {"sparse_imports": 5.0}):
    verdicts = run_detectors(pe, sections, imports, weights=weights)
    print(f"  weights={weights or 'defaults'}:"
          f" label={aggregate_packing_label(verdicts):.4f}")
