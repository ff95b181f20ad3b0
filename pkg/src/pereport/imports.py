"""Import-table features: imphash, ordinal resolution, per-library function
lists and risky-API cluster tags.

The imphash follows the de-facto community convention: lowercase dll name
with a .dll/.ocx/.sys extension stripped, a dot, the lowercase function
name; entries joined by commas in import order and digested with md5.
By-ordinal entries enter the hash by resolved name when the bundled tables
know them, otherwise as "ordN".
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources

from .pe import ImportTable

_STRIPPED_EXTENSIONS = (".dll", ".ocx", ".sys")

# Clusters of Windows API calls whose joint presence suggests an exploit
# pattern; a tag fires once `required` distinct entries of a cluster are
# imported.  Matching is case-insensitive and tolerates an A/W suffix.
RISKY_API_CLUSTERS: dict[str, tuple[tuple[str, ...], int]] = {
    "code_injection": (
        ("CreateRemoteThread", "OpenProcess", "VirtualAllocEx",
         "WriteProcessMemory", "EnumProcesses"),
        2,
    ),
    "dynamic_dll_loading": (("LoadLibrary", "GetProcAddress"), 1),
    "memory_scraping": (
        ("CreateToolhelp32Snapshot", "OpenProcess", "ReadProcessMemory",
         "EnumProcesses"),
        2,
    ),
    "unpacking_self_injection": (("VirtualAlloc", "VirtualProtect"), 2),
    "execute_program": (("WinExec", "ShellExecute", "CreateProcess"), 1),
    "query_artifact": (
        ("CreateMutex", "CreateFile", "FindWindow", "GetModuleHandle",
         "RegOpenKeyEx"),
        2,
    ),
}

RISK_EXPLOITS = tuple(RISKY_API_CLUSTERS)


@dataclass(frozen=True)
class RiskTag:
    exploit: str
    matched_apis: tuple[str, ...]
    required: int


@dataclass(frozen=True)
class ImportInfo:
    imphash: str
    named_count: int
    ordinal_count: int
    libraries: dict[str, list[str]]
    risk_tags: tuple[RiskTag, ...]


def _dll_stem(dll: str) -> str:
    lower = dll.lower()
    for ext in _STRIPPED_EXTENSIONS:
        if lower.endswith(ext):
            return lower[: -len(ext)]
    return lower


def _load_ordinal_tables() -> dict[str, dict[int, str]]:
    tables: dict[str, dict[int, str]] = {}
    text = resources.files("pereport.data").joinpath("ordinals.txt").read_text("utf-8")
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        dll, ordinal, name = line.split(",", 2)
        tables.setdefault(_dll_stem(dll), {})[int(ordinal)] = name
    return tables


_ORDINAL_TABLES = _load_ordinal_tables()


def resolve_ordinal(dll: str, ordinal: int) -> str | None:
    """Best-effort name for a by-ordinal import, from the bundled tables."""
    if ordinal < 1:
        return None
    return _ORDINAL_TABLES.get(_dll_stem(dll), {}).get(ordinal)


def _rendered_name(dll: str, entry) -> str:
    if entry.name is not None:
        return entry.name
    resolved = resolve_ordinal(dll, entry.ordinal)
    return resolved if resolved is not None else f"ord{entry.ordinal}"


def compute_imphash(imports: ImportTable) -> str:
    """Order-sensitive md5 over the normalized import list (see module doc)."""
    parts = []
    for lib in imports.libraries:
        stem = _dll_stem(lib.dll_name)
        for entry in lib.entries:
            parts.append(f"{stem}.{_rendered_name(lib.dll_name, entry).lower()}")
    return hashlib.md5(",".join(parts).encode("ascii", errors="replace")).hexdigest()


def tag_risky_apis(imports: ImportTable) -> list[RiskTag]:
    """Tags for API clusters with at least `required` members imported.

    Ordinal imports participate through their resolved names; an import
    matches a cluster entry when it equals the entry or the entry plus an
    A/W suffix, case-insensitively.
    """
    rendered = [
        _rendered_name(lib.dll_name, entry)
        for lib in imports.libraries
        for entry in lib.entries
    ]
    by_lower = {name.lower(): name for name in reversed(rendered)}

    tags = []
    for exploit, (apis, required) in RISKY_API_CLUSTERS.items():
        matched = []
        for api in apis:
            base = api.lower()
            for candidate in (base, base + "a", base + "w"):
                if candidate in by_lower:
                    matched.append(by_lower[candidate])
                    break
        if len(matched) >= required:
            tags.append(
                RiskTag(exploit=exploit, matched_apis=tuple(matched), required=required)
            )
    return tags


def build_import_info(imports: ImportTable) -> ImportInfo:
    """Assemble the IAT report section from a parsed import table."""
    named = 0
    ordinals = 0
    libraries: dict[str, list[str]] = {}
    for lib in imports.libraries:
        names = libraries.setdefault(lib.dll_name, [])
        for entry in lib.entries:
            if entry.is_ordinal:
                ordinals += 1
            else:
                named += 1
            names.append(_rendered_name(lib.dll_name, entry))
    return ImportInfo(
        imphash=compute_imphash(imports),
        named_count=named,
        ordinal_count=ordinals,
        libraries=libraries,
        risk_tags=tuple(tag_risky_apis(imports)),
    )
