"""Import-table features: imphash, ordinal resolution and risky-API tags.

The imphash digests the normalized, ordered import list, so builds of one
family cluster together while a reordered or different IAT breaks the hash.
By-ordinal imports (an obfuscation tactic) are resolved back to names where
the bundled tables allow.
"""

from pereport import build_import_info, compute_imphash, parse_pe, resolve_ordinal
from pereport.pe import ImportEntry, ImportTable, ImportedLibrary
from pereport.synth import build_pe, fixture_specs

binary = build_pe(fixture_specs()["ordimp"])
info = build_import_info(parse_pe(binary).imports)

print(f"imphash:       {info.imphash}")
print(f"named:         {info.named_count}, by ordinal: {info.ordinal_count}")
for dll, names in info.libraries.items():
    print(f"  {dll}: {', '.join(names)}")

print("\nordinal resolution against the bundled tables:")
for dll, ordinal in [("ws2_32.dll", 115), ("ws2_32.dll", 23),
                     ("oleaut32.dll", 8), ("unknown.dll", 7)]:
    print(f"  {dll} ordinal {ordinal:3d} -> {resolve_ordinal(dll, ordinal)}")

print("\norder sensitivity of the imphash:")
forward = ImportTable((ImportedLibrary("kernel32.dll", (
    ImportEntry(name="CreateFileA"), ImportEntry(name="WriteFile"))),))
backward = ImportTable((ImportedLibrary("kernel32.dll", (
    ImportEntry(name="WriteFile"), ImportEntry(name="CreateFileA"))),))
print(f"  CreateFileA,WriteFile -> {compute_imphash(forward)}")
print(f"  WriteFile,CreateFileA -> {compute_imphash(backward)}")

print("\nrisky-API clusters on an injector-shaped import set:")
injector = build_pe(fixture_specs()["injector"])
tags = build_import_info(parse_pe(injector).imports).risk_tags
for tag in tags:
    print(f"  {tag.exploit}: {', '.join(tag.matched_apis)}"
          f" (needs >= {tag.required})")
