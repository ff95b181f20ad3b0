"""Section-level features and the structural red flags they expose.

Compares a clean build against a UPX-styled one: packer section names,
writable+executable mappings, high entropy, and an entry point that lands
outside any standard section.
"""

from pereport import build_section_infos, parse_pe, section_anomalies
from pereport.synth import build_pe, fixture_specs

specs = fixture_specs()

for label in ("plain", "upxish", "rsrcx"):
    binary = build_pe(specs[label])
    pe = parse_pe(binary)
    infos = build_section_infos(pe, binary)
    print(f"=== {label} ===")
    for info in infos:
        flags = ",".join(info.characteristics) or "-"
        print(f"  {info.name:8s} raw={info.raw_size:5d} H={info.entropy:6.4f} [{flags}]")
        for code in info.anomalies:
            print(f"           !! {code}")
    codes = section_anomalies(infos, pe.optional.entry_point_rva, pe.sections)
    print(f"  file-level anomalies: {codes or 'none'}\n")
