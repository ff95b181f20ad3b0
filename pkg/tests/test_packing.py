import random

import pytest

from pereport.imports import build_import_info
from pereport.packing import (
    DetectorVerdict,
    EmptyEnsembleError,
    NonPositiveWeightError,
    aggregate_packing_label,
    build_packing_info,
    run_detectors,
)
from pereport.pe import parse_pe
from pereport.sections import build_section_infos


def verdicts(labels, weights):
    return [
        DetectorVerdict(
            detector_id=f"d{i}",
            label=label,
            weight=weight,
            packer_names=(),
            evidence="",
        )
        for i, (label, weight) in enumerate(zip(labels, weights))
    ]


def run_all(fixture_bytes, name):
    data = fixture_bytes[name]
    pe = parse_pe(data)
    sections = build_section_infos(pe, data)
    info = build_import_info(pe.imports)
    return run_detectors(pe, sections, info)


def by_id(results):
    return {v.detector_id: v for v in results}


def test_upx_signature_detector(fixture_bytes):
    results = by_id(run_all(fixture_bytes, "upxish"))
    sig = results["section_signature"]
    assert sig.label == 1
    assert "UPX" in sig.packer_names


def test_plain_fixture_all_zero(fixture_bytes):
    results = run_all(fixture_bytes, "plain")
    assert [v.label for v in results] == [0, 0, 0, 0]


def test_entry_in_weird_section_detector(fixture_bytes):
    results = by_id(run_all(fixture_bytes, "upxish"))
    assert results["entry_in_nonstandard_section"].label == 1
    assert "UPX1" in results["entry_in_nonstandard_section"].evidence


def test_entry_in_dot_weird_section():
    from pereport.synth import DATA_RW, SynthSection, SynthSpec, build_pe, plain_code_section

    spec = SynthSpec(
        sections=[
            plain_code_section(),
            SynthSection(name=".weird", characteristics=0x60000020,
                         data=b"\xc3" * 64),
        ],
        imports=[("kernel32.dll", ["CreateFileA", "ReadFile", "WriteFile",
                                   "CloseHandle", "ExitProcess"])],
        entry=(".weird", 0x4),
    )
    data = build_pe(spec)
    pe = parse_pe(data)
    results = by_id(
        run_detectors(pe, build_section_infos(pe, data),
                      build_import_info(pe.imports))
    )
    assert results["entry_in_nonstandard_section"].label == 1
    assert ".weird" in results["entry_in_nonstandard_section"].evidence


def test_high_entropy_detector(fixture_bytes):
    assert by_id(run_all(fixture_bytes, "upxish"))["high_entropy"].label == 1
    assert by_id(run_all(fixture_bytes, "plain"))["high_entropy"].label == 0


def test_sparse_import_detector(fixture_bytes):
    assert by_id(run_all(fixture_bytes, "noimp"))["sparse_imports"].label == 1
    assert by_id(run_all(fixture_bytes, "plain"))["sparse_imports"].label == 0


def test_detector_weights_are_configurable(fixture_bytes):
    data = fixture_bytes["plain"]
    pe = parse_pe(data)
    sections = build_section_infos(pe, data)
    info = build_import_info(pe.imports)
    results = run_detectors(pe, sections, info, weights={"high_entropy": 2.5})
    assert by_id(results)["high_entropy"].weight == 2.5


def test_aggregate_all_zero():
    assert aggregate_packing_label(verdicts([0, 0, 0, 0], [1, 2, 3, 4])) == 0.0


def test_aggregate_unanimous():
    assert aggregate_packing_label(verdicts([1, 1], [3, 1])) == 1.0


def test_aggregate_worked_examples():
    assert aggregate_packing_label(verdicts([1, 0, 1, 0], [1, 1, 1, 1])) == 0.5
    assert aggregate_packing_label(verdicts([1, 0, 1], [2, 1, 1])) == 0.75


def test_aggregate_empty_raises():
    with pytest.raises(EmptyEnsembleError):
        aggregate_packing_label([])


def test_aggregate_nonpositive_weight_raises():
    with pytest.raises(NonPositiveWeightError):
        aggregate_packing_label(verdicts([1], [0.0]))
    with pytest.raises(NonPositiveWeightError):
        aggregate_packing_label(verdicts([1, 0], [1.0, -2.0]))


def test_label_bounds_and_extremes_random():
    rng = random.Random(7)
    for _ in range(500):
        n = rng.randrange(1, 8)
        labels = [rng.randrange(2) for _ in range(n)]
        weights = [rng.uniform(0.01, 10) for _ in range(n)]
        label = aggregate_packing_label(verdicts(labels, weights))
        assert 0.0 <= label <= 1.0
        assert (label == 0.0) == all(l == 0 for l in labels)
        assert (label == 1.0) == all(l == 1 for l in labels)


def test_flip_monotonicity():
    rng = random.Random(8)
    for _ in range(200):
        n = rng.randrange(2, 8)
        labels = [rng.randrange(2) for _ in range(n)]
        weights = [rng.uniform(0.01, 10) for _ in range(n)]
        if all(labels):
            labels[0] = 0
        zero_positions = [i for i, l in enumerate(labels) if l == 0]
        i = rng.choice(zero_positions)
        before = aggregate_packing_label(verdicts(labels, weights))
        labels[i] = 1
        after = aggregate_packing_label(verdicts(labels, weights))
        assert after > before


def test_weight_scale_invariance():
    rng = random.Random(9)
    for _ in range(200):
        n = rng.randrange(1, 8)
        labels = [rng.randrange(2) for _ in range(n)]
        weights = [rng.uniform(0.01, 10) for _ in range(n)]
        c = rng.uniform(0.1, 100)
        a = aggregate_packing_label(verdicts(labels, weights))
        b = aggregate_packing_label(verdicts(labels, [w * c for w in weights]))
        assert a == pytest.approx(b, abs=1e-12)


def test_build_packing_info_dedups_and_sorts():
    vs = [
        DetectorVerdict("a", 1, 1.0, ("UPX", "Themida"), ""),
        DetectorVerdict("b", 1, 1.0, ("UPX",), ""),
        DetectorVerdict("c", 0, 1.0, ("MPRESS",), ""),
    ]
    info = build_packing_info(vs, aggregate_packing_label(vs))
    assert info.packers == ("Themida", "UPX")  # firing detectors only, deduped


def test_no_hits_empty_packers():
    vs = verdicts([0, 0], [1, 1])
    info = build_packing_info(vs, 0.0)
    assert info.packers == ()
    assert info.label == 0.0
    assert not info.likely_packed


def test_likely_packed_threshold():
    vs = verdicts([1, 0], [1, 1])
    assert build_packing_info(vs, 0.5).likely_packed
    assert not build_packing_info(vs, 0.5, likely_packed_threshold=0.75).likely_packed
