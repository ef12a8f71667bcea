"""Bias audit reports: group stats, age bins, extremes, emotion counts."""
from __future__ import annotations

import math

import numpy as np
import pytest

from builders import emotion_rows, make_record, make_series
from traitfusion.audit import (
    AGE_BIN_LABELS,
    age_bin_index,
    age_trend,
    attractiveness_extremes,
    decile_sets,
    emotion_frequencies,
    format_mean_std,
    group_stats,
)
from traitfusion.consensus import age_consensus, attractiveness_consensus
from traitfusion.synthetic import SynthConfig, generate_synthetic
from traitfusion.types import (
    TRAIT_LETTERS,
    TRAITS,
    SubjectMetadata,
    ValidationError,
)


def _flat_records(scores, ids=None, **meta):
    """One record per score; all five traits share that score."""
    ids = ids or [f"v{i}" for i in range(len(scores))]
    return [make_record(vid, labels=(s,) * 5, **meta) for vid, s in zip(ids, scores)]


def test_format_mean_std() -> None:
    assert format_mean_std(0.456, 0.789) == "0.46±0.79"
    assert format_mean_std(0.5, 0.0) == "0.50±0.00"


def test_group_stats_single_group_matches_global() -> None:
    records = _flat_records([0.2, 0.4, 0.6], gender="female", ethnicity="caucasian")
    table = group_stats(records)
    rows = table.family("gender")
    assert len(rows) == 1
    row = rows[0]
    assert (row.name, row.count, row.share) == ("female", 3, 100.0)
    assert np.allclose(row.mean, 0.4, atol=1e-15)
    # population std: sqrt(((0.2)^2 + 0 + (0.2)^2) / 3)
    assert np.allclose(row.std, math.sqrt(0.08 / 3.0), atol=1e-15)


def test_group_stats_families_shares_and_exclusions() -> None:
    records = [
        make_record("v0", labels=(0.2,) * 5, gender="female", ethnicity="caucasian"),
        make_record("v1", labels=(0.8,) * 5, gender="male", ethnicity="asian"),
        make_record("v2", labels=(0.5,) * 5, gender="female"),
    ]
    table = group_stats(records)
    assert [(r.family, r.name, r.count) for r in table.rows] == [
        ("gender", "female", 2),
        ("gender", "male", 1),
        ("ethnicity", "asian", 1),
        ("ethnicity", "caucasian", 1),
        ("ethnicity_gender", "asian male", 1),
        ("ethnicity_gender", "caucasian female", 1),
    ]
    female = table.family("gender")[0]
    assert female.share == pytest.approx(200.0 / 3.0)
    assert np.allclose(female.mean, 0.35)
    # shares renormalize over resolvable records only
    assert table.family("ethnicity")[0].share == 50.0
    assert table.excluded == {"gender": 0, "ethnicity": 1, "ethnicity_gender": 1}


def test_group_stats_predicted_source() -> None:
    records = _flat_records([0.3, 0.7])
    predicted = {
        "v0": SubjectMetadata(gender="male", ethnicity=None),
        "v1": SubjectMetadata(gender="male", ethnicity=None),
    }
    table = group_stats(records, predicted=predicted, source="predicted")
    assert table.source == "predicted"
    row = table.family("gender")[0]
    assert (row.name, row.count) == ("male", 2)
    assert np.allclose(row.mean, 0.5)
    assert table.family("ethnicity") == ()
    assert table.excluded["ethnicity"] == 2

    with pytest.raises(ValidationError, match="source must be one of"):
        group_stats(records, source="guesswork")
    with pytest.raises(ValidationError, match="requires predicted group assignments"):
        group_stats(records, source="predicted")
    with pytest.raises(ValidationError, match="records must be non-empty"):
        group_stats([])


def test_group_stats_format_layout() -> None:
    records = _flat_records([0.25, 0.75], gender="female", ethnicity="asian")
    text = group_stats(records).format()
    lines = text.split("\n")
    assert lines[0] == "\t".join(["family", "group", "share_pct", "count"] + list(TRAIT_LETTERS))
    cells = lines[1].split("\t")
    assert cells[:4] == ["gender", "female", "100.0", "2"]
    assert cells[4:] == ["0.50±0.25"] * 5
    assert text.endswith("\n")


def test_age_bin_index_boundaries() -> None:
    expected = {
        5.0: 0,
        18.9: 0,
        19.0: 1,
        24.9: 1,
        25.0: 2,
        32.0: 2,
        32.9: 2,
        33.0: 3,
        45.0: 3,
        46.0: 4,
        60.0: 4,
        60.7: 4,
        61.0: 5,
        200.0: 5,
    }
    for age, bin_i in expected.items():
        assert age_bin_index(age) == bin_i, age


def test_age_trend_counts_means_and_exclusions() -> None:
    records = _flat_records([0.2, 0.4, 0.6, 0.9, 0.1])
    ages = {"v0": 17.0, "v1": 30.0, "v2": 30.9, "v3": float("nan")}
    report = age_trend(records, ages)  # v3 nan and v4 missing are excluded
    assert report.excluded == 2
    assert report.counts.tolist() == [1, 0, 2, 0, 0, 0]
    assert int(report.counts.sum()) + report.excluded == len(records)
    assert np.allclose(report.means[0], 0.2)
    assert np.allclose(report.means[2], 0.5)
    assert np.all(np.isnan(report.means[1]))
    lines = report.format().split("\n")
    assert lines[0].split("\t") == ["age_bin", "count"] + list(TRAITS)
    assert lines[1].split("\t")[:2] == ["<19", "1"]
    assert lines[2].split("\t") == ["19-24", "0", "", "", "", "", ""]
    assert lines[3].split("\t")[2:] == ["0.5000"] * 5
    assert len(lines) == 2 + len(AGE_BIN_LABELS)  # header + 6 bins + trailing newline


def test_decile_sets_hand_ranking() -> None:
    records = _flat_records([i / 10 for i in range(10)])
    sets = decile_sets(records, 0.1)
    assert set(sets) == set(TRAITS)
    assert sets["openness"] == (("v9",), ("v0",))
    top, bottom = decile_sets(records, 0.3)["extraversion"]
    assert bottom == ("v0", "v1", "v2")
    assert top == ("v9", "v8", "v7")


def test_decile_sets_disjoint_under_ties() -> None:
    # all scores equal: ids alone decide, and the two ends stay disjoint
    records = _flat_records([0.5] * 6)
    top, bottom = decile_sets(records, 0.5)["openness"]
    assert bottom == ("v0", "v1", "v2")
    assert top == ("v5", "v4", "v3")
    assert not set(top) & set(bottom)


def test_decile_sets_validation() -> None:
    records = _flat_records([0.1, 0.9, 0.5])
    with pytest.raises(ValidationError, match="cannot supply disjoint top/bottom sets"):
        decile_sets(records, 0.5)  # k=2 but n=3
    with pytest.raises(ValidationError, match=r"fraction must be in \(0, 0.5\]"):
        decile_sets(records, 0.0)
    with pytest.raises(ValidationError, match=r"fraction must be in \(0, 0.5\]"):
        decile_sets(records, 0.6)
    with pytest.raises(ValidationError, match="records must be non-empty"):
        decile_sets([], 0.1)


def test_attractiveness_extremes_hand_case() -> None:
    records = _flat_records([i / 10 for i in range(10)])
    histograms = {f"v{i}": np.array([0.0, 0.0, 1.0, 0.0, 0.0]) for i in range(10)}
    histograms["v0"] = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
    histograms["v9"] = np.array([0.0, 0.0, 0.0, 0.0, 1.0])
    report = attractiveness_extremes(records, histograms, fraction=0.1)
    assert report.set_size == 1 and report.excluded == 0
    assert np.array_equal(report.top[TRAITS.index("openness")], [0, 0, 0, 0, 1])
    assert np.array_equal(report.bottom[TRAITS.index("openness")], [1, 0, 0, 0, 0])
    assert report.expected_bin("openness", "top") == 4.0
    assert report.expected_bin("openness", "bottom") == 0.0
    lines = report.format().split("\n")
    assert lines[0] == "\t".join(["trait", "side"] + [f"bin{i}" for i in range(5)])
    assert lines[1].split("\t") == ["openness", "top", *(f"{v:.6f}" for v in [0, 0, 0, 0, 1])]
    assert len(lines) == 1 + 10 + 1  # header, 5 traits x 2 sides, trailing newline


def test_attractiveness_extremes_excludes_empty_histograms() -> None:
    records = _flat_records([i / 10 for i in range(10)])
    histograms = {f"v{i}": np.full(5, 0.2) for i in range(10)}
    histograms["v9"] = np.zeros(5)  # unusable: no face frames produced mass
    del histograms["v8"]  # missing entirely
    report = attractiveness_extremes(records, histograms, fraction=0.1)
    assert report.excluded == 2
    assert report.set_size == math.ceil(0.1 * 8)
    # top decile now comes from v7, the best remaining video
    assert np.array_equal(report.top[0], np.full(5, 0.2))


def test_attractiveness_extremes_mean_is_elementwise() -> None:
    records = _flat_records([0.0, 0.25, 0.75, 1.0])
    histograms = {
        "v0": np.array([1.0, 0.0, 0.0, 0.0, 0.0]),
        "v1": np.array([0.0, 1.0, 0.0, 0.0, 0.0]),
        "v2": np.array([0.0, 0.0, 0.0, 1.0, 0.0]),
        "v3": np.array([0.0, 0.0, 0.0, 0.0, 1.0]),
    }
    report = attractiveness_extremes(records, histograms, fraction=0.5)
    assert np.array_equal(report.top[0], [0.0, 0.0, 0.0, 0.5, 0.5])
    assert np.array_equal(report.bottom[0], [0.5, 0.5, 0.0, 0.0, 0.0])


def test_extremes_reflect_attractiveness_extraversion_coupling() -> None:
    ds = generate_synthetic(SynthConfig(n_videos=120, frames_per_video=20, seed=13))
    histograms = {
        vid: attractiveness_consensus(s, "orderless")[0] for vid, s in ds.series.items()
    }
    report = attractiveness_extremes(ds.records, histograms, fraction=0.10)
    top = report.expected_bin("extraversion", "top")
    bottom = report.expected_bin("extraversion", "bottom")
    assert top > bottom


def test_emotion_frequencies_hand_counts() -> None:
    records = _flat_records([i / 10 for i in range(10)])
    series = {r.video_id: make_series(r.video_id, frame_count=6) for r in records}
    series["v9"] = make_series("v9", frame_count=6, emotion=emotion_rows({0: 0.8}, 6))
    report = emotion_frequencies(records, series, threshold=0.7, fraction=0.1)
    assert report.count("openness", "top", "anger") == 6
    assert report.count("openness", "top", "neutral") == 0
    assert report.count("openness", "bottom", "neutral") == 6
    assert report.count("openness", "bottom", "anger") == 0
    lines = report.format().split("\n")
    assert lines[0].split("\t")[:2] == ["trait", "side"]
    assert len(lines[0].split("\t")) == 9
    assert len(lines) == 1 + 10 + 1


def test_emotion_frequencies_threshold_and_faces() -> None:
    # threshold is inclusive, zero counts every face frame for every emotion,
    # and faceless frames never count
    face = np.array([True, True, False, False])
    records = _flat_records([0.9, 0.1], ids=["hi", "lo"])
    series = {
        "hi": make_series("hi", frames=np.arange(4), face=face, emotion=emotion_rows({1: 0.7}, 4)),
        "lo": make_series("lo", frames=np.arange(4), face=face),
    }
    at_threshold = emotion_frequencies(records, series, threshold=0.7, fraction=0.5)
    assert at_threshold.count("openness", "top", "disgust") == 2
    everything = emotion_frequencies(records, series, threshold=0.0, fraction=0.5)
    assert np.all(everything.top[0] == 2) and np.all(everything.bottom[0] == 2)
    with pytest.raises(ValidationError, match=r"threshold must be in \[0, 1\]"):
        emotion_frequencies(records, series, threshold=1.5)


def test_emotion_frequencies_missing_series_counts_zero() -> None:
    records = _flat_records([0.2, 0.8], ids=["va", "vb"])
    series = {"vb": make_series("vb", frame_count=3)}
    report = emotion_frequencies(records, series, fraction=0.5)
    assert np.all(report.bottom[0] == 0)
    assert report.count("openness", "top", "neutral") == 3


def test_emotion_frequencies_happy_extraversion_coupling() -> None:
    ds = generate_synthetic(SynthConfig(n_videos=120, frames_per_video=20, seed=14))
    report = emotion_frequencies(ds.records, ds.series, threshold=0.7, fraction=0.10)
    assert report.count("extraversion", "top", "happy") > report.count(
        "extraversion", "bottom", "happy"
    )


def test_age_trend_on_synthetic_population() -> None:
    ds = generate_synthetic(SynthConfig(n_videos=150, frames_per_video=5, seed=15))
    ages = {vid: age_consensus(s) for vid, s in ds.series.items()}
    report = age_trend(ds.records, ages)
    # ages center on 32 with sd 6: the middle bins hold nearly everyone
    assert int(report.counts.sum()) == 150 - report.excluded
    assert report.counts[2] + report.counts[3] > 100
    # conscientiousness rises with age in the generator
    c = TRAITS.index("conscientiousness")
    assert report.means[3][c] > report.means[1][c]
