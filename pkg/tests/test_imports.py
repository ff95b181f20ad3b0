import hashlib
import random

from pereport.imports import (
    build_import_info,
    compute_imphash,
    resolve_ordinal,
    tag_risky_apis,
)
from pereport.pe import ImportEntry, ImportTable, ImportedLibrary, parse_pe


def table(*libs: tuple[str, list]) -> ImportTable:
    return ImportTable(
        libraries=tuple(
            ImportedLibrary(
                dll_name=dll,
                entries=tuple(
                    ImportEntry(ordinal=e) if isinstance(e, int) else ImportEntry(name=e)
                    for e in entries
                ),
            )
            for dll, entries in libs
        )
    )


def reference_imphash(pairs: list[tuple[str, str]]) -> str:
    """Independent implementation of the imphash convention."""
    rendered = []
    for dll, func in pairs:
        lib = dll.lower()
        if lib.rsplit(".", 1)[-1] in ("dll", "ocx", "sys"):
            lib = lib.rsplit(".", 1)[0]
        rendered.append(lib + "." + func.lower())
    return hashlib.md5(",".join(rendered).encode()).hexdigest()


def test_empty_table_is_md5_of_empty_string():
    assert compute_imphash(table()) == "d41d8cd98f00b204e9800998ecf8427e"
    assert compute_imphash(table()) == hashlib.md5(b"").hexdigest()


def test_single_import_matches_reference():
    t = table(("kernel32.dll", ["CreateFileA"]))
    assert compute_imphash(t) == hashlib.md5(b"kernel32.createfilea").hexdigest()
    assert compute_imphash(t) == reference_imphash([("kernel32.dll", "CreateFileA")])


def test_order_sensitivity():
    a = table(("kernel32.dll", ["CreateFileA", "WriteFile"]))
    b = table(("kernel32.dll", ["WriteFile", "CreateFileA"]))
    assert compute_imphash(a) != compute_imphash(b)


def test_case_and_extension_invariance():
    variants = [
        table(("KERNEL32.DLL", ["CreateFileA"])),
        table(("kernel32.dll", ["createfilea"])),
        table(("Kernel32.Dll", ["CREATEFILEA"])),
    ]
    digests = {compute_imphash(t) for t in variants}
    assert len(digests) == 1


def test_randomized_tables_match_reference():
    rng = random.Random(42)
    apis = ["CreateFileA", "ReadFile", "Sleep", "VirtualAlloc", "ExitProcess",
            "GetTickCount", "HeapFree", "lstrlenW"]
    dlls = ["kernel32.dll", "USER32.dll", "advapi32.DLL", "custom.ocx", "weird.bin"]
    for _ in range(100):
        pairs = [
            (rng.choice(dlls), rng.choice(apis))
            for _ in range(rng.randrange(0, 12))
        ]
        t = table(*[(dll, [func]) for dll, func in pairs])
        assert compute_imphash(t) == reference_imphash(pairs)


def test_ordinal_enters_hash_after_resolution():
    # ws2_32 ordinal 115 resolves to WSAStartup and is hashed by name,
    # matching the convention.
    t = table(("ws2_32.dll", [115]))
    assert compute_imphash(t) == hashlib.md5(b"ws2_32.wsastartup").hexdigest()
    unknown = table(("foo.dll", [9]))
    assert compute_imphash(unknown) == hashlib.md5(b"foo.ord9").hexdigest()


def test_resolve_ws2_32():
    assert resolve_ordinal("ws2_32.dll", 115) == "WSAStartup"
    assert resolve_ordinal("WS2_32.dll", 23) == "socket"
    assert resolve_ordinal("ws2_32", 4) == "connect"


def test_resolve_unknown_dll_and_bad_ordinals():
    assert resolve_ordinal("unknown.dll", 7) is None
    assert resolve_ordinal("ws2_32.dll", 0) is None
    assert resolve_ordinal("ws2_32.dll", -3) is None
    assert resolve_ordinal("ws2_32.dll", 99999) is None


def test_oleaut32_subset():
    assert resolve_ordinal("oleaut32.dll", 6) == "SysFreeString"
    assert resolve_ordinal("oleaut32.dll", 8) == "VariantInit"


def test_code_injection_tag():
    t = table(("kernel32.dll", ["CreateRemoteThread", "WriteProcessMemory",
                                "VirtualAllocEx"]))
    tags = tag_risky_apis(t)
    assert [t.exploit for t in tags] == ["code_injection"]
    assert set(tags[0].matched_apis) == {
        "CreateRemoteThread", "WriteProcessMemory", "VirtualAllocEx"
    }


def test_dynamic_dll_loading_needs_one():
    tags = tag_risky_apis(table(("kernel32.dll", ["LoadLibraryA"])))
    assert [t.exploit for t in tags] == ["dynamic_dll_loading"]


def test_below_threshold_no_tag():
    assert tag_risky_apis(table(("kernel32.dll", ["CreateFileA"]))) == []


def test_suffix_tolerance():
    tags = tag_risky_apis(table(("user32.dll", ["FindWindowW"]),
                                ("kernel32.dll", ["CreateMutexA"])))
    assert [t.exploit for t in tags] == ["query_artifact"]


def test_matched_apis_are_actually_imported():
    t = table(("kernel32.dll", ["OpenProcess", "WriteProcessMemory", "Sleep"]))
    info = build_import_info(t)
    imported = {n.lower() for names in info.libraries.values() for n in names}
    for tag in info.risk_tags:
        for api in tag.matched_apis:
            assert api.lower() in imported


def test_counts_add_up():
    t = table(("a.dll", ["X", "Y"]), ("b.dll", [7]))
    info = build_import_info(t)
    assert info.named_count == 2
    assert info.ordinal_count == 1
    assert info.named_count + info.ordinal_count == t.total_entries()


def test_unresolved_ordinal_rendering():
    info = build_import_info(table(("foo.dll", [9])))
    assert info.libraries["foo.dll"] == ["ord9"]


def test_fixture_library_order(fixture_bytes):
    pe = parse_pe(fixture_bytes["ordimp"])
    info = build_import_info(pe.imports)
    assert list(info.libraries) == ["ws2_32.dll", "kernel32.dll", "foo.dll"]
    assert info.libraries["ws2_32.dll"] == ["WSAStartup", "socket", "connect"]
    assert info.libraries["kernel32.dll"][0] == "CreateFileA"
