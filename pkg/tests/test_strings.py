import pytest

from pereport.strings import SCAN_CAP_BYTES, extract_strings


def test_ascii_run_surrounded_by_zeros():
    data = b"\x00" * 8 + b"http://evil.example" + b"\x00" * 8
    assert extract_strings(data, 5) == ["http://evil.example"]


def test_all_zero_buffer():
    assert extract_strings(b"\x00" * 64, 5) == []


def test_utf16le_run():
    assert extract_strings(b"A\x00B\x00C\x00D\x00E\x00", 5) == ["ABCDE"]


def test_min_len_filters_short_runs():
    data = b"ab\x00cdef\x00ghijk"
    assert extract_strings(data, 5) == ["ghijk"]
    assert extract_strings(data, 4) == ["cdef", "ghijk"]


def test_order_of_appearance_mixed_encodings():
    data = b"first-string\x00\x00" + b"w\x00i\x00d\x00e\x00o\x00n\x00e\x00\x00\x00" + b"last-string\x00"
    assert extract_strings(data, 5) == ["first-string", "wideone", "last-string"]


def test_min_len_must_be_positive():
    with pytest.raises(ValueError):
        extract_strings(b"abc", 0)


def test_scan_cap_warns():
    data = b"A" * (SCAN_CAP_BYTES + 10)
    warnings: list[str] = []
    result = extract_strings(data, 5, warnings=warnings)
    assert len(result) == 1 and len(result[0]) == SCAN_CAP_BYTES
    assert any("capped" in w for w in warnings)
