"""Global file information: identity, digests, type, target OS, timestamp,
size and whole-file entropy.  First section of the report."""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .pe import (
    IMAGE_FILE_DLL,
    IMAGE_FILE_EXECUTABLE_IMAGE,
    IMAGE_SUBSYSTEM_WINDOWS_CUI,
    IMAGE_SUBSYSTEM_WINDOWS_GUI,
    ParsedPe,
)


@dataclass(frozen=True)
class GlobalInfo:
    file_name: str
    sha256: str
    md5: str
    file_type: str  # exe | dll | other
    target_os: str
    compile_timestamp: str  # ISO-8601 or "invalid"
    file_size: int
    entropy: float


def shannon_entropy(data: bytes) -> float:
    """Byte-level Shannon entropy in bits per byte, in [0, 8].

    Empty input returns 0 by convention.
    """
    if not data:
        return 0.0
    counts = np.bincount(np.frombuffer(data, dtype=np.uint8), minlength=256)
    probs = counts[counts > 0] / len(data)
    h = float(-np.sum(probs * np.log2(probs)))
    return h if h > 0.0 else 0.0


def _render_timestamp(ts: int, now: float) -> tuple[str, str | None]:
    """Render a COFF timestamp; 0 or future timestamps are 'invalid'."""
    if ts == 0:
        return "invalid", "compilation timestamp is zero"
    if ts > now:
        return "invalid", f"compilation timestamp {ts} lies in the future"
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ"), None


def build_global_info(
    pe: ParsedPe,
    binary: bytes,
    name: str,
    warnings: list[str] | None = None,
    _now: float | None = None,
) -> GlobalInfo:
    """Assemble the global-information section for one file.

    A zero or in-the-future compilation timestamp renders as "invalid" and
    appends a warning to ``warnings`` (a weird compilation date is itself a
    signal worth surfacing).  ``_now`` overrides the wall clock in tests.
    """
    chars = pe.coff.characteristics
    if chars & IMAGE_FILE_DLL:
        file_type = "dll"
    elif chars & IMAGE_FILE_EXECUTABLE_IMAGE:
        file_type = "exe"
    else:
        file_type = "other"

    subsystem = pe.optional.subsystem
    if subsystem == IMAGE_SUBSYSTEM_WINDOWS_GUI:
        target_os = "windows (gui)"
    elif subsystem == IMAGE_SUBSYSTEM_WINDOWS_CUI:
        target_os = "windows (console)"
    else:
        target_os = "windows"

    now = time.time() if _now is None else _now
    stamp, warning = _render_timestamp(pe.coff.timestamp, now)
    if warning is not None and warnings is not None:
        warnings.append(warning)

    return GlobalInfo(
        file_name=name,
        sha256=hashlib.sha256(binary).hexdigest(),
        md5=hashlib.md5(binary).hexdigest(),
        file_type=file_type,
        target_os=target_os,
        compile_timestamp=stamp,
        file_size=len(binary),
        entropy=shannon_entropy(binary),
    )
