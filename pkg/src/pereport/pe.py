"""Struct-based PE/COFF parser.

Parses raw PE bytes (PE32 and PE32+) into an immutable structured view of
the COFF header, optional header, section table and import directory, using
only :mod:`struct`.  The parser is deliberately forgiving: malware is often
malformed on purpose, so anything that does not prevent locating sections
and imports is recorded as a warning instead of failing the parse.

Layout reference: Microsoft PE Format, MZ magic at offset 0, e_lfanew at
offset 0x3C, "PE\\0\\0" signature, 20-byte COFF header, PE32/PE32+ optional
header, 40-byte section headers.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

MZ_MAGIC = b"MZ"
PE_SIGNATURE = b"PE\x00\x00"

PE32_MAGIC = 0x10B
PE32PLUS_MAGIC = 0x20B

IMAGE_FILE_MACHINE_I386 = 0x14C
IMAGE_FILE_MACHINE_AMD64 = 0x8664

# COFF characteristics
IMAGE_FILE_EXECUTABLE_IMAGE = 0x0002
IMAGE_FILE_DLL = 0x2000

# Data directory indices (positional semantics per the PE layout)
DIRECTORY_EXPORT = 0
DIRECTORY_IMPORT = 1
DIRECTORY_RESOURCE = 2

IMAGE_SUBSYSTEM_WINDOWS_GUI = 2
IMAGE_SUBSYSTEM_WINDOWS_CUI = 3

SUBSYSTEM_NAMES = {
    0: "unknown",
    1: "native",
    2: "gui",
    3: "console",
    5: "os2",
    7: "posix",
    9: "windows_ce",
    10: "efi_application",
    11: "efi_boot_driver",
    12: "efi_runtime_driver",
    13: "efi_rom",
    14: "xbox",
}

# Adversarial-loop bounds for the import walk
MAX_IMPORT_DESCRIPTORS = 4096
MAX_ENTRIES_PER_LIBRARY = 65536

_COFF_FMT = "<HHIIIHH"
_COFF_SIZE = struct.calcsize(_COFF_FMT)
_SECTION_HEADER_SIZE = 40
_IMPORT_DESCRIPTOR_SIZE = 20


class PeError(Exception):
    """Base class for fatal parse failures."""


class NotPeError(PeError):
    """Missing MZ magic or PE signature."""


class TruncatedError(PeError):
    """File ends inside a mandatory header."""


class UnsupportedMachineError(PeError):
    """Machine type outside x86/x64."""


class UnmappedRvaError(PeError):
    """RVA falls inside no section."""


class Machine(enum.IntEnum):
    X86 = IMAGE_FILE_MACHINE_I386
    X64 = IMAGE_FILE_MACHINE_AMD64


@dataclass(frozen=True)
class CoffHeaderInfo:
    machine: Machine
    num_sections: int
    timestamp: int
    characteristics: int


@dataclass(frozen=True)
class OptionalHeaderInfo:
    entry_point_rva: int
    image_base: int
    subsystem: int
    is_64bit: bool
    data_directories: tuple[tuple[int, int], ...]

    @property
    def subsystem_name(self) -> str:
        return SUBSYSTEM_NAMES.get(self.subsystem, f"unknown_{self.subsystem}")


@dataclass(frozen=True)
class SectionHeaderInfo:
    name: str
    virtual_size: int
    virtual_address: int
    raw_size: int
    raw_offset: int
    characteristics: int


@dataclass(frozen=True)
class ImportEntry:
    """One imported symbol: named, or by ordinal when ``name`` is None."""

    name: str | None = None
    ordinal: int | None = None

    def __post_init__(self) -> None:
        if (self.name is None) == (self.ordinal is None):
            raise ValueError("ImportEntry must be named xor ordinal")

    @property
    def is_ordinal(self) -> bool:
        return self.ordinal is not None


@dataclass(frozen=True)
class ImportedLibrary:
    dll_name: str
    entries: tuple[ImportEntry, ...]


@dataclass(frozen=True)
class ImportTable:
    libraries: tuple[ImportedLibrary, ...] = ()

    def total_entries(self) -> int:
        return sum(len(lib.entries) for lib in self.libraries)


@dataclass(frozen=True)
class ParsedPe:
    coff: CoffHeaderInfo
    optional: OptionalHeaderInfo
    sections: tuple[SectionHeaderInfo, ...]
    imports: ImportTable
    warnings: tuple[str, ...] = ()


def render_section_name(raw: bytes) -> str:
    """Render an 8-byte section name losslessly.

    Trailing NULs (padding) are stripped; every other byte outside printable
    ASCII is escaped as ``\\xNN`` so odd names survive into reports.
    """
    trimmed = raw.rstrip(b"\x00")
    out = []
    for b in trimmed:
        if 0x20 <= b <= 0x7E:
            out.append(chr(b))
        else:
            out.append(f"\\x{b:02x}")
    return "".join(out)


def _read_cstring(data: bytes, offset: int, limit: int = 1024) -> str | None:
    """Read a NUL-terminated ASCII string; None if offset is out of range."""
    if offset < 0 or offset >= len(data):
        return None
    end = data.find(b"\x00", offset, offset + limit)
    if end == -1:
        end = min(offset + limit, len(data))
    return data[offset:end].decode("ascii", errors="replace")


def rva_to_offset(pe: ParsedPe, rva: int) -> int:
    """Map a relative virtual address to its file offset via the section table.

    Raises UnmappedRvaError when the rva falls inside no section.  A section
    spans max(virtual_size, raw_size) bytes from its virtual address, which
    tolerates the common packer trick of raw data shorter than the mapping.
    """
    for sec in pe.sections:
        extent = max(sec.virtual_size, sec.raw_size)
        if extent and sec.virtual_address <= rva < sec.virtual_address + extent:
            return sec.raw_offset + (rva - sec.virtual_address)
    raise UnmappedRvaError(f"rva 0x{rva:x} falls in no section")


def _parse_sections(
    data: bytes, table_offset: int, count: int, warnings: list[str]
) -> tuple[SectionHeaderInfo, ...]:
    end = table_offset + count * _SECTION_HEADER_SIZE
    if end > len(data):
        raise TruncatedError("file ends inside the section table")
    sections = []
    for i in range(count):
        off = table_offset + i * _SECTION_HEADER_SIZE
        name = render_section_name(data[off : off + 8])
        vsize, vaddr, rsize, roff = struct.unpack_from("<IIII", data, off + 8)
        characteristics = struct.unpack_from("<I", data, off + 36)[0]
        if roff + rsize > len(data):
            warnings.append(
                f"section {name!r} raw data extends past end of file "
                f"(offset 0x{roff:x} size 0x{rsize:x})"
            )
        sections.append(
            SectionHeaderInfo(
                name=name,
                virtual_size=vsize,
                virtual_address=vaddr,
                raw_size=rsize,
                raw_offset=roff,
                characteristics=characteristics,
            )
        )
    return tuple(sections)


def _walk_imports(
    pe: ParsedPe, data: bytes, warnings: list[str]
) -> ImportTable:
    directories = pe.optional.data_directories
    imp_rva, imp_size = directories[DIRECTORY_IMPORT]
    if imp_rva == 0 or imp_size == 0:
        warnings.append("no import directory")
        return ImportTable()
    try:
        dir_offset = rva_to_offset(pe, imp_rva)
    except UnmappedRvaError:
        warnings.append(f"import directory rva 0x{imp_rva:x} unmapped")
        return ImportTable()

    ordinal_flag = 1 << 63 if pe.optional.is_64bit else 1 << 31
    thunk_size = 8 if pe.optional.is_64bit else 4
    thunk_fmt = "<Q" if pe.optional.is_64bit else "<I"

    libraries: list[ImportedLibrary] = []
    for index in range(MAX_IMPORT_DESCRIPTORS):
        off = dir_offset + index * _IMPORT_DESCRIPTOR_SIZE
        if off + _IMPORT_DESCRIPTOR_SIZE > len(data):
            warnings.append("import descriptor table runs past end of file")
            break
        orig_thunk, _ts, _fwd, name_rva, first_thunk = struct.unpack_from(
            "<IIIII", data, off
        )
        if name_rva == 0 and orig_thunk == 0 and first_thunk == 0:
            break  # null terminator descriptor
        try:
            name_off = rva_to_offset(pe, name_rva)
        except UnmappedRvaError:
            warnings.append(f"import descriptor {index}: dll name rva unmapped")
            break
        dll_name = _read_cstring(data, name_off, limit=256)
        if not dll_name:
            warnings.append(f"import descriptor {index}: empty dll name")
            break

        ilt_rva = orig_thunk or first_thunk
        entries: list[ImportEntry] = []
        if ilt_rva:
            try:
                ilt_off = rva_to_offset(pe, ilt_rva)
            except UnmappedRvaError:
                warnings.append(f"import thunks for {dll_name} unmapped")
                ilt_off = None
            if ilt_off is not None:
                for j in range(MAX_ENTRIES_PER_LIBRARY):
                    toff = ilt_off + j * thunk_size
                    if toff + thunk_size > len(data):
                        warnings.append(f"import thunks for {dll_name} truncated")
                        break
                    value = struct.unpack_from(thunk_fmt, data, toff)[0]
                    if value == 0:
                        break
                    if value & ordinal_flag:
                        entries.append(ImportEntry(ordinal=value & 0xFFFF))
                        continue
                    try:
                        hint_off = rva_to_offset(pe, value & 0x7FFFFFFF)
                    except UnmappedRvaError:
                        warnings.append(
                            f"import name rva 0x{value:x} in {dll_name} unmapped"
                        )
                        break
                    func = _read_cstring(data, hint_off + 2, limit=512)
                    if not func:
                        warnings.append(f"unreadable import name in {dll_name}")
                        break
                    entries.append(ImportEntry(name=func))
                else:
                    warnings.append(
                        f"import walk for {dll_name} stopped at entry bound"
                    )
        libraries.append(ImportedLibrary(dll_name=dll_name, entries=tuple(entries)))
    else:
        warnings.append("import walk stopped at descriptor bound")
    return ImportTable(libraries=tuple(libraries))


def extract_imports(
    pe: ParsedPe, binary: bytes, warnings: list[str] | None = None
) -> ImportTable:
    """Walk the import directory of an already-parsed file.

    Order of libraries and entries is exactly the file order.  Malformed
    descriptors terminate the walk with a warning appended to ``warnings``
    (when given) rather than raising.
    """
    sink: list[str] = [] if warnings is None else warnings
    return _walk_imports(pe, binary, sink)


def parse_pe(binary: bytes) -> ParsedPe:
    """Parse raw PE bytes into a ParsedPe.

    Raises NotPeError, TruncatedError or UnsupportedMachineError for inputs
    that cannot be analyzed at all; anything recoverable is a warning on the
    returned value.
    """
    data = binary
    if len(data) < 2 or data[:2] != MZ_MAGIC:
        raise NotPeError("missing MZ magic")
    if len(data) < 0x40:
        raise TruncatedError("file ends inside the DOS header")
    e_lfanew = struct.unpack_from("<I", data, 0x3C)[0]
    if e_lfanew + 4 > len(data):
        raise TruncatedError("file ends before the PE signature")
    if data[e_lfanew : e_lfanew + 4] != PE_SIGNATURE:
        raise NotPeError("missing PE signature")

    coff_offset = e_lfanew + 4
    if coff_offset + _COFF_SIZE > len(data):
        raise TruncatedError("file ends inside the COFF header")
    machine, num_sections, timestamp, _symtab, _nsyms, opt_size, characteristics = (
        struct.unpack_from(_COFF_FMT, data, coff_offset)
    )
    if machine not in (IMAGE_FILE_MACHINE_I386, IMAGE_FILE_MACHINE_AMD64):
        raise UnsupportedMachineError(f"machine 0x{machine:04x} not x86/x64")

    warnings: list[str] = []
    opt_offset = coff_offset + _COFF_SIZE
    if opt_size < 2 or opt_offset + opt_size > len(data):
        raise TruncatedError("file ends inside the optional header")
    magic = struct.unpack_from("<H", data, opt_offset)[0]
    if magic == PE32PLUS_MAGIC:
        is_64bit = True
    elif magic == PE32_MAGIC:
        is_64bit = False
    else:
        raise TruncatedError(f"unrecognized optional header magic 0x{magic:x}")
    if is_64bit != (machine == IMAGE_FILE_MACHINE_AMD64):
        warnings.append(
            f"machine 0x{machine:04x} does not match optional header magic 0x{magic:x}"
        )

    # Standard fields: entry point at +16 in both formats; image base and
    # subsystem shift with the missing BaseOfData in PE32+.
    need = opt_offset + (112 if is_64bit else 96)
    if need > len(data):
        raise TruncatedError("file ends inside the optional header")
    entry_point = struct.unpack_from("<I", data, opt_offset + 16)[0]
    if is_64bit:
        image_base = struct.unpack_from("<Q", data, opt_offset + 24)[0]
        subsystem = struct.unpack_from("<H", data, opt_offset + 68)[0]
        num_dirs = struct.unpack_from("<I", data, opt_offset + 108)[0]
        dirs_offset = opt_offset + 112
    else:
        image_base = struct.unpack_from("<I", data, opt_offset + 28)[0]
        subsystem = struct.unpack_from("<H", data, opt_offset + 68)[0]
        num_dirs = struct.unpack_from("<I", data, opt_offset + 92)[0]
        dirs_offset = opt_offset + 96

    if num_dirs > 16:
        warnings.append(f"data directory count {num_dirs} clamped to 16")
        num_dirs = 16
    directories = []
    for i in range(16):
        off = dirs_offset + i * 8
        if i < num_dirs and off + 8 <= len(data):
            directories.append(struct.unpack_from("<II", data, off))
        else:
            directories.append((0, 0))

    coff = CoffHeaderInfo(
        machine=Machine(machine),
        num_sections=num_sections,
        timestamp=timestamp,
        characteristics=characteristics,
    )
    optional = OptionalHeaderInfo(
        entry_point_rva=entry_point,
        image_base=image_base,
        subsystem=subsystem,
        is_64bit=is_64bit,
        data_directories=tuple(directories),
    )

    table_offset = opt_offset + opt_size
    sections = _parse_sections(data, table_offset, num_sections, warnings)

    partial = ParsedPe(
        coff=coff,
        optional=optional,
        sections=sections,
        imports=ImportTable(),
        warnings=(),
    )
    if entry_point:
        try:
            rva_to_offset(partial, entry_point)
        except UnmappedRvaError:
            warnings.append(f"entry point rva 0x{entry_point:x} falls in no section")
    imports = _walk_imports(partial, data, warnings)
    return ParsedPe(
        coff=coff,
        optional=optional,
        sections=sections,
        imports=imports,
        warnings=tuple(warnings),
    )
