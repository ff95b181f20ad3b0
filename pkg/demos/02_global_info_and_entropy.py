"""Global file information: digests, type, timestamp and entropy.

Entropy is the first thing an analyst glances at: near 8 bits/byte means
compressed or encrypted content, orderly code and text sit much lower.
"""

import random

from pereport import build_global_info, parse_pe, shannon_entropy
from pereport.synth import build_pe, fixture_specs

binary = build_pe(fixture_specs()["plain"])
info = build_global_info(parse_pe(binary), binary, "plain_demo.exe")

print(f"file_name:         {info.file_name}")
print(f"sha256:            {info.sha256}")
print(f"md5:               {info.md5}")
print(f"file_type:         {info.file_type}")
print(f"target_os:         {info.target_os}")
print(f"compile_timestamp: {info.compile_timestamp}")
print(f"file_size:         {info.file_size}")
print(f"entropy:           {info.entropy:.4f}")

print("\nentropy intuition, same length different content:")
rng = random.Random(1)
samples = {
    "all zeroes": bytes(4096),
    "ascii text": (b"the quick brown fox jumps over the lazy dog " * 92)[:4096],
    "random bytes": rng.randbytes(4096),
    "every byte once x16": bytes(range(256)) * 16,
}
for label, data in samples.items():
    print(f"  {label:20s} H = {shannon_entropy(data):.4f}")

print("\na zero or future compilation timestamp is flagged instead of trusted:")
weird = bytearray(binary)
weird[0x48:0x4C] = b"\x00\x00\x00\x00"  # COFF timestamp field
warnings: list[str] = []
flagged = build_global_info(parse_pe(bytes(weird)), bytes(weird), "weird.exe",
                            warnings=warnings)
print(f"  compile_timestamp = {flagged.compile_timestamp!r}, warnings = {warnings}")
