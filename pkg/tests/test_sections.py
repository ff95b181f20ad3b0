import hashlib

from hypothesis import given, strategies as st

from pereport.pe import parse_pe
from pereport.sections import (
    SECTION_FLAG_MASKS,
    build_section_infos,
    decode_section_flags,
    section_anomalies,
)


def test_decode_no_flags():
    assert decode_section_flags(0x00000000) == []


def test_decode_code_rx():
    assert decode_section_flags(0x60000020) == ["CNT_CODE", "MEM_EXECUTE", "MEM_READ"]


def test_decode_data_rw():
    assert decode_section_flags(0xC0000040) == [
        "CNT_INITIALIZED_DATA",
        "MEM_READ",
        "MEM_WRITE",
    ]


def test_decode_ignores_unknown_bits():
    # alignment and discardable bits are outside the vocabulary
    assert decode_section_flags(0x02500000) == []


@given(st.integers(min_value=0, max_value=0xFFFFFFFF))
def test_reencoding_flags_is_lossless(word):
    names = decode_section_flags(word)
    recognized = 0
    for name in names:
        recognized |= SECTION_FLAG_MASKS[name]
    expected = word & sum(SECTION_FLAG_MASKS.values())
    assert recognized == expected


def test_fixture_text_section_flags(fixture_bytes):
    infos = build_section_infos(parse_pe(fixture_bytes["plain"]), fixture_bytes["plain"])
    assert infos[0].name == ".text"
    assert infos[0].characteristics == ("CNT_CODE", "MEM_EXECUTE", "MEM_READ")


def test_zero_raw_section(fixture_bytes):
    data = fixture_bytes["upxish"]
    infos = build_section_infos(parse_pe(data), data)
    upx0 = infos[0]
    assert upx0.raw_size == 0
    assert upx0.entropy == 0.0
    assert upx0.sha256 == hashlib.sha256(b"").hexdigest()
    assert "zero_raw_nonzero_virtual" in upx0.anomalies


def test_executable_rsrc_anomaly(fixture_bytes):
    data = fixture_bytes["rsrcx"]
    infos = build_section_infos(parse_pe(data), data)
    rsrc = next(i for i in infos if i.name == ".rsrc")
    assert "executable_resource_section" in rsrc.anomalies


def test_upx_name_and_wx_anomalies(fixture_bytes):
    data = fixture_bytes["upxish"]
    pe = parse_pe(data)
    infos = build_section_infos(pe, data)
    codes = section_anomalies(infos, pe.optional.entry_point_rva, pe.sections)
    assert "nonstandard_name" in codes
    assert "writable_executable" in codes
    assert "high_entropy_section" in codes
    assert "entry_in_nonstandard_section" in codes


def test_all_standard_fixture_is_clean(fixture_bytes):
    data = fixture_bytes["plain"]
    pe = parse_pe(data)
    infos = build_section_infos(pe, data)
    assert section_anomalies(infos, pe.optional.entry_point_rva, pe.sections) == []


def test_anomalies_monotone_under_added_section(fixture_bytes):
    data = fixture_bytes["plain"]
    pe = parse_pe(data)
    infos = build_section_infos(pe, data)
    before = section_anomalies(infos, pe.optional.entry_point_rva, pe.sections)

    upx_data = fixture_bytes["upxish"]
    upx_pe = parse_pe(upx_data)
    extra = build_section_infos(upx_pe, upx_data)[1]  # UPX1
    after = section_anomalies(
        infos + [extra], pe.optional.entry_point_rva, pe.sections
    )
    for code in before:
        assert code in after


def test_section_order_preserved(fixture_bytes):
    for data in fixture_bytes.values():
        pe = parse_pe(data)
        infos = build_section_infos(pe, data)
        assert [i.name for i in infos] == [s.name for s in pe.sections]


def test_truncated_section_hashes_available_bytes(fixture_bytes):
    data = fixture_bytes["plain"]
    cut = data[:-256]
    pe = parse_pe(cut)
    infos = build_section_infos(pe, cut)
    last = infos[-1]
    assert "truncated_raw_data" in last.anomalies
    header = pe.sections[-1]
    available = cut[header.raw_offset :]
    assert last.sha256 == hashlib.sha256(available).hexdigest()
