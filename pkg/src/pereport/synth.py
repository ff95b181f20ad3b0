"""Synthetic PE construction.

Byte-exact builder for small but structurally faithful PE32/PE32+ images:
real DOS/COFF/optional headers, section table, and an import directory with
named and by-ordinal entries.  Used for the committed test fixtures, the
demo scripts and the synthetic classification corpora; none of the emitted
bytes contain executable logic (sections are filled with inert padding and
strings).
"""

from __future__ import annotations

import csv
import random
import struct
from dataclasses import dataclass
from pathlib import Path

FILE_ALIGN = 0x200
SECTION_ALIGN = 0x1000
IMAGE_BASE = 0x400000

CODE_RX = 0x60000020  # CNT_CODE | MEM_EXECUTE | MEM_READ
DATA_RW = 0xC0000040  # CNT_INITIALIZED_DATA | MEM_READ | MEM_WRITE
DATA_R = 0x40000040  # CNT_INITIALIZED_DATA | MEM_READ
RSRC_R = 0x40000040
BSS_RWX = 0xE0000080  # CNT_UNINITIALIZED_DATA | MEM_EXECUTE | MEM_READ | MEM_WRITE
PACKED_RWX = 0xE0000040  # CNT_INITIALIZED_DATA | MEM_EXECUTE | MEM_READ | MEM_WRITE

EXE_CHARACTERISTICS = 0x0102  # EXECUTABLE_IMAGE | 32BIT_MACHINE
DLL_CHARACTERISTICS = EXE_CHARACTERISTICS | 0x2000


def _align(value: int, alignment: int) -> int:
    return (value + alignment - 1) // alignment * alignment


@dataclass
class SynthSection:
    name: str
    characteristics: int
    data: bytes = b""
    virtual_size: int | None = None


@dataclass
class SynthSpec:
    sections: list[SynthSection]
    imports: list[tuple[str, list[str | int]]] | None = None
    machine: int = 0x14C
    timestamp: int = 0x5EE00000  # 2020-06-09T21:32:48Z
    is_dll: bool = False
    subsystem: int = 3
    entry: tuple[str, int] | None = None  # (section name, intra-section delta)


def _build_import_blob(
    imports: list[tuple[str, list[str | int]]], idata_rva: int, is_64bit: bool
) -> bytes:
    """Assemble descriptors, ILT+IAT thunk arrays, hint/name and dll-name
    blobs for an import directory placed at idata_rva."""
    thunk_size = 8 if is_64bit else 4
    thunk_fmt = "<Q" if is_64bit else "<I"
    ordinal_flag = 1 << 63 if is_64bit else 1 << 31

    desc_bytes = (len(imports) + 1) * 20
    thunks_per_lib = [len(entries) + 1 for _, entries in imports]
    ilt_base = idata_rva + desc_bytes
    iat_base = ilt_base + sum(thunks_per_lib) * thunk_size
    names_base = iat_base + sum(thunks_per_lib) * thunk_size

    # Hint/name entries first, then dll name strings.
    name_blob = bytearray()
    name_rvas: dict[tuple[int, int], int] = {}
    for i, (_, entries) in enumerate(imports):
        for j, entry in enumerate(entries):
            if isinstance(entry, str):
                name_rvas[(i, j)] = names_base + len(name_blob)
                name_blob += struct.pack("<H", 0) + entry.encode("ascii") + b"\x00"
    dll_rvas = []
    for dll, _ in imports:
        dll_rvas.append(names_base + len(name_blob))
        name_blob += dll.encode("ascii") + b"\x00"

    descriptors = bytearray()
    ilt_blob = bytearray()
    ilt_rvas = []
    offset = 0
    for i, (_, entries) in enumerate(imports):
        ilt_rvas.append(ilt_base + offset)
        for j, entry in enumerate(entries):
            if isinstance(entry, int):
                ilt_blob += struct.pack(thunk_fmt, ordinal_flag | entry)
            else:
                ilt_blob += struct.pack(thunk_fmt, name_rvas[(i, j)])
        ilt_blob += struct.pack(thunk_fmt, 0)
        offset += thunks_per_lib[i] * thunk_size

    for i in range(len(imports)):
        iat_rva = iat_base + (ilt_rvas[i] - ilt_base)
        descriptors += struct.pack(
            "<IIIII", ilt_rvas[i], 0, 0, dll_rvas[i], iat_rva
        )
    descriptors += struct.pack("<IIIII", 0, 0, 0, 0, 0)

    return bytes(descriptors) + bytes(ilt_blob) * 2 + bytes(name_blob)


def build_pe(spec: SynthSpec) -> bytes:
    """Serialize a SynthSpec to PE bytes."""
    is_64bit = spec.machine == 0x8664
    opt_size = 0xF0 if is_64bit else 0xE0

    sections = list(spec.sections)
    import_dir = (0, 0)
    if spec.imports is not None:
        sections = sections + [SynthSection(name=".idata", characteristics=DATA_RW)]

    headers_size = 0x40 + 4 + 20 + opt_size + len(sections) * 40
    size_of_headers = _align(headers_size, FILE_ALIGN)

    # First pass: assign virtual addresses so the import blob can be built.
    vaddr = SECTION_ALIGN
    vaddrs = []
    for sec in sections:
        vaddrs.append(vaddr)
        vsize = sec.virtual_size if sec.virtual_size is not None else len(sec.data)
        span = max(vsize, _align(len(sec.data), FILE_ALIGN) if sec.data else 0, 1)
        vaddr += _align(span, SECTION_ALIGN)

    if spec.imports is not None:
        idata_rva = vaddrs[-1]
        blob = _build_import_blob(spec.imports, idata_rva, is_64bit)
        sections[-1].data = blob
        import_dir = (idata_rva, (len(spec.imports) + 1) * 20)
        # The blob length was unknown during layout; idata is last, so only
        # the image size needs its real extent.
        vaddr = idata_rva + _align(max(len(blob), 1), SECTION_ALIGN)
    size_of_image = vaddr

    entry_rva = 0
    if spec.entry is not None:
        entry_name, delta = spec.entry
        for sec, sec_vaddr in zip(sections, vaddrs):
            if sec.name == entry_name:
                entry_rva = sec_vaddr + delta
                break
        else:
            raise ValueError(f"entry section {entry_name!r} not in spec")

    raw_offset = size_of_headers
    headers = []
    raw_parts = []
    size_of_code = 0
    size_of_idata = 0
    base_of_code = 0
    for sec, sec_vaddr in zip(sections, vaddrs):
        raw_len = _align(len(sec.data), FILE_ALIGN) if sec.data else 0
        vsize = sec.virtual_size if sec.virtual_size is not None else len(sec.data)
        name_bytes = sec.name.encode("ascii")[:8].ljust(8, b"\x00")
        headers.append(
            name_bytes
            + struct.pack(
                "<IIIIIIHHI",
                vsize,
                sec_vaddr,
                raw_len,
                raw_offset if raw_len else 0,
                0,
                0,
                0,
                0,
                sec.characteristics,
            )
        )
        if raw_len:
            raw_parts.append(sec.data.ljust(raw_len, b"\x00"))
        if sec.characteristics & 0x20:  # CNT_CODE
            size_of_code += raw_len
            if base_of_code == 0:
                base_of_code = sec_vaddr
        if sec.characteristics & 0x40:  # CNT_INITIALIZED_DATA
            size_of_idata += raw_len
        raw_offset += raw_len

    dirs = [(0, 0)] * 16
    dirs[1] = import_dir
    dir_blob = b"".join(struct.pack("<II", rva, size) for rva, size in dirs)

    if is_64bit:
        optional = struct.pack(
            "<HBBIIIII",
            0x20B, 14, 0,
            size_of_code, size_of_idata, 0,
            entry_rva, base_of_code,
        ) + struct.pack(
            "<QIIHHHHHHIIIIHHQQQQII",
            IMAGE_BASE, SECTION_ALIGN, FILE_ALIGN,
            6, 0, 0, 0, 6, 0, 0,
            size_of_image, size_of_headers, 0,
            spec.subsystem, 0,
            0x100000, 0x1000, 0x100000, 0x1000,
            0, 16,
        ) + dir_blob
    else:
        optional = struct.pack(
            "<HBBIIIIII",
            0x10B, 14, 0,
            size_of_code, size_of_idata, 0,
            entry_rva, base_of_code, 0,
        ) + struct.pack(
            "<IIIHHHHHHIIIIHHIIIIII",
            IMAGE_BASE, SECTION_ALIGN, FILE_ALIGN,
            6, 0, 0, 0, 6, 0, 0,
            size_of_image, size_of_headers, 0,
            spec.subsystem, 0,
            0x100000, 0x1000, 0x100000, 0x1000,
            0, 16,
        ) + dir_blob
    assert len(optional) == opt_size

    coff = struct.pack(
        "<HHIIIHH",
        spec.machine,
        len(sections),
        spec.timestamp,
        0,
        0,
        opt_size,
        DLL_CHARACTERISTICS if spec.is_dll else EXE_CHARACTERISTICS,
    )

    dos = bytearray(0x40)
    dos[0:2] = b"MZ"
    struct.pack_into("<I", dos, 0x3C, 0x40)

    image = bytes(dos) + b"PE\x00\x00" + coff + optional + b"".join(headers)
    image = image.ljust(size_of_headers, b"\x00")
    return image + b"".join(raw_parts)


def _strings_blob(strings: list[str], wide: bool = False) -> bytes:
    out = bytearray()
    for text in strings:
        encoded = text.encode("utf-16-le") if wide else text.encode("ascii")
        out += encoded + (b"\x00\x00\x00" if wide else b"\x00\x00")
    return bytes(out)


_INERT_CODE = bytes.fromhex("558bec83ec1053565733c08945fc") * 4 + b"\xc3"


def plain_code_section(strings: list[str] | None = None) -> SynthSection:
    data = _INERT_CODE + (b"\x00" + _strings_blob(strings) if strings else b"")
    return SynthSection(name=".text", characteristics=CODE_RX, data=data)


# ---------------------------------------------------------------------------
# Named fixtures (committed under tests/data/fixtures; regenerate with
# scripts/generate_fixtures.py)
# ---------------------------------------------------------------------------

def _seeded_high_entropy(n: int, seed: int = 1234) -> bytes:
    rng = random.Random(seed)
    return bytes(rng.randrange(0, 256) for _ in range(n))


def fixture_specs() -> dict[str, SynthSpec]:
    kernel32_base: tuple[str, list[str | int]] = (
        "kernel32.dll",
        ["CreateFileA", "ReadFile", "WriteFile", "CloseHandle",
         "ExitProcess", "GetLastError"],
    )
    return {
        "plain": SynthSpec(
            sections=[
                plain_code_section(["plain demo build", "config.ini"]),
                SynthSection(
                    name=".data", characteristics=DATA_RW,
                    data=_strings_blob(["initialized data here"]),
                ),
                SynthSection(
                    name=".rsrc", characteristics=RSRC_R,
                    data=_strings_blob(["VS_VERSION_INFO"]),
                ),
            ],
            imports=[kernel32_base, ("user32.dll", ["MessageBoxA"])],
            entry=(".text", 0x0),
        ),
        "twosec": SynthSpec(
            sections=[
                plain_code_section(),
                SynthSection(
                    name=".rsrc", characteristics=RSRC_R,
                    data=_strings_blob(["resource payload"]),
                ),
            ],
            imports=None,
            entry=(".text", 0x0),
        ),
        "libsample": SynthSpec(
            sections=[
                plain_code_section(["exported helper"]),
                SynthSection(
                    name=".data", characteristics=DATA_RW,
                    data=_strings_blob(["shared state"]),
                ),
                SynthSection(name=".reloc", characteristics=DATA_R,
                             data=b"\x00" * 32),
            ],
            imports=[kernel32_base],
            is_dll=True,
            subsystem=2,
            entry=(".text", 0x0),
        ),
        "upxish": SynthSpec(
            sections=[
                SynthSection(name="UPX0", characteristics=BSS_RWX,
                             virtual_size=0x5000),
                SynthSection(name="UPX1", characteristics=PACKED_RWX,
                             data=_seeded_high_entropy(1024)),
                SynthSection(
                    name=".rsrc", characteristics=RSRC_R,
                    data=_strings_blob(["icon"]),
                ),
            ],
            imports=[("kernel32.dll", ["LoadLibraryA", "GetProcAddress"])],
            entry=("UPX1", 0x10),
        ),
        "rsrcx": SynthSpec(
            sections=[
                plain_code_section(["legit looking"]),
                SynthSection(
                    name=".rsrc", characteristics=RSRC_R | 0x20000000,
                    data=_strings_blob(["hidden payload stub"]),
                ),
            ],
            imports=[kernel32_base, ("user32.dll", ["FindWindowA"])],
            entry=(".text", 0x0),
        ),
        "ordimp": SynthSpec(
            sections=[
                plain_code_section(["socket client"]),
                SynthSection(
                    name=".data", characteristics=DATA_RW,
                    data=_strings_blob(["198.51.100.23:4444"]),
                ),
            ],
            imports=[
                ("ws2_32.dll", [115, 23, 4]),
                kernel32_base,
                ("foo.dll", [9]),
            ],
            entry=(".text", 0x0),
        ),
        "noimp": SynthSpec(
            sections=[
                plain_code_section(["standalone stub"]),
                SynthSection(
                    name=".data", characteristics=DATA_RW,
                    data=_strings_blob(["no imports at all"]),
                ),
            ],
            imports=None,
            entry=(".text", 0x0),
        ),
        "injector": SynthSpec(
            sections=[
                plain_code_section(["target.exe"]),
                SynthSection(
                    name=".data", characteristics=DATA_RW,
                    data=_strings_blob(["cmd.exe /c whoami"]),
                ),
            ],
            imports=[
                ("kernel32.dll",
                 ["OpenProcess", "VirtualAllocEx", "WriteProcessMemory",
                  "CreateRemoteThread", "CreateFileA", "CloseHandle"]),
            ],
            entry=(".text", 0x0),
        ),
        "wide64": SynthSpec(
            sections=[
                plain_code_section(),
                SynthSection(
                    name=".data", characteristics=DATA_RW,
                    data=_strings_blob(["https://update.example/check"], wide=True),
                ),
            ],
            imports=[kernel32_base],
            machine=0x8664,
            entry=(".text", 0x0),
        ),
    }


def write_fixtures(out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for name, spec in fixture_specs().items():
        path = out / f"{name}.bin"
        path.write_bytes(build_pe(spec))
        written[name] = path
    return written


# ---------------------------------------------------------------------------
# Synthetic classification corpus: one import/string signature per category,
# emitted through the real analysis pipeline.
# ---------------------------------------------------------------------------

CLASS_PROFILES: dict[str, tuple[list[tuple[str, list[str | int]]], list[str]]] = {
    "trojan": (
        [("advapi32.dll", ["RegSetValueExA", "RegCreateKeyExA", "RegOpenKeyExA"])],
        ["Software\\Microsoft\\Windows\\CurrentVersion\\Run", "winhost32"],
    ),
    "worm": (
        [("netapi32.dll", ["NetShareEnum"]),
         ("kernel32.dll", ["CopyFileA", "GetLogicalDrives"])],
        ["autorun.inf", "\\\\NETSHARE\\in"],
    ),
    "ransomware": (
        [("advapi32.dll", ["CryptEncrypt", "CryptAcquireContextA", "CryptGenKey"])],
        ["Your files have been encrypted", "send 0.5 BTC for the decryption key"],
    ),
    "backdoor": (
        [("ws2_32.dll", ["socket", "bind", "listen", "accept"])],
        ["0.0.0.0", "remote shell session"],
    ),
    "infostealer": (
        [("wininet.dll", ["InternetOpenA", "InternetOpenUrlA", "HttpSendRequestA"])],
        ["https://collect.example/upload", "wallet.dat"],
    ),
    "downloader": (
        [("urlmon.dll", ["URLDownloadToFileA"]),
         ("wininet.dll", ["InternetReadFile"]),
         ("kernel32.dll", ["WinExec"])],
        ["http://cdn.example/stage2.bin"],
    ),
    "dropper": (
        [("kernel32.dll", ["WriteFile", "CreateProcessA", "GetTempPathA"])],
        ["C:\\Windows\\Temp\\update_svc.exe"],
    ),
    "virus": (
        [("kernel32.dll", ["FindFirstFileA", "FindNextFileA", "SetFileAttributesA"])],
        ["*.exe", "generation counter"],
    ),
}

_NOISE_APIS: list[tuple[str, str]] = [
    ("user32.dll", "MessageBoxA"),
    ("user32.dll", "wsprintfA"),
    ("kernel32.dll", "GetTickCount"),
    ("kernel32.dll", "Sleep"),
    ("kernel32.dll", "GetVersionExA"),
    ("kernel32.dll", "lstrlenA"),
    ("gdi32.dll", "TextOutA"),
]

_NOISE_STRINGS = [
    "Mozilla/5.0 (Windows NT 10.0)",
    "C:\\Program Files\\Common",
    "config.ini",
    "runtime error %d",
    "unexpected token",
    "session closed",
]

_BASE_IMPORTS: list[str | int] = [
    "ExitProcess", "GetLastError", "CloseHandle", "ReadFile", "HeapAlloc",
]


def sample_spec(category: str, rng: random.Random) -> SynthSpec:
    """One randomized synthetic sample of the given category."""
    profile_imports, profile_strings = CLASS_PROFILES[category]

    imports: list[tuple[str, list[str | int]]] = [
        ("kernel32.dll", list(_BASE_IMPORTS))
    ]
    for dll, names in profile_imports:
        for existing_dll, existing in imports:
            if existing_dll == dll:
                existing.extend(names)
                break
        else:
            imports.append((dll, list(names)))
    for dll, name in rng.sample(_NOISE_APIS, rng.randint(0, 4)):
        for existing_dll, existing in imports:
            if existing_dll == dll:
                existing.append(name)
                break
        else:
            imports.append((dll, [name]))

    strings = list(profile_strings)
    strings.extend(rng.sample(_NOISE_STRINGS, rng.randint(1, 3)))
    padding = "".join(
        rng.choice("abcdefghijklmnopqrstuvwxyz0123456789 .") for _ in range(rng.randint(40, 160))
    )
    strings.append(padding)

    return SynthSpec(
        sections=[
            plain_code_section(),
            SynthSection(
                name=".data", characteristics=DATA_RW, data=_strings_blob(strings)
            ),
            SynthSection(
                name=".rsrc", characteristics=RSRC_R,
                data=_strings_blob(["VS_VERSION_INFO"]),
            ),
        ],
        imports=imports,
        timestamp=rng.randrange(1546300800, 1609459200),  # 2019..2020
        entry=(".text", 0x0),
    )


def generate_corpus(
    out_dir: str | Path,
    per_class: int,
    seed: int,
    classes: tuple[str, ...] | None = None,
) -> Path:
    """Write per-sample reports plus a manifest.csv; returns the manifest path.

    Every sample flows through the full analysis pipeline, so reports carry
    the same structure real binaries would produce.
    """
    from .pipeline import analyze  # local import to avoid a cycle

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    rows = []
    for category in classes or tuple(CLASS_PROFILES):
        for i in range(per_class):
            binary = build_pe(sample_spec(category, rng))
            result = analyze(binary, f"{category}_{i:04d}.exe")
            sha256 = result.report.global_info.sha256
            from .report import serialize_report

            (out / f"{sha256}.json").write_bytes(serialize_report(result.report))
            rows.append((sha256, category))
    manifest = out / "manifest.csv"
    with manifest.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sha256", "category"])
        writer.writerows(rows)
    return manifest
