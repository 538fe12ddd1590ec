from __future__ import annotations

import xml.etree.ElementTree as ET
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lecture_director.core import Camera, EditConfig, EditDecisionList, EditError, Scenario, ValidationError
from lecture_director.metrics import MetricsReport, compare, compute_metrics, mean_report, timeline_svg
from lecture_director.scoring import ScoreMatrix, semantic_scores, transition_matrix


def hand_case():
    """lb/rb pair, only lb -> rb forbidden, no length terms."""
    s = Scenario(6, (Camera("a", "lb", [1, 1, 0, 0, 1, 0]), Camera("b", "rb", [0, 0, 1, 1, 0, 1])))
    cfg = EditConfig(violation_sets={"lb": {"rb"}}, c_sw=0.0, c_broll=0.0, lambda_e=1.0)
    return s, cfg


def test_hand_computed_report():
    s, cfg = hand_case()
    scores = semantic_scores(s, cfg)
    edl = EditDecisionList.from_sequence(list("aabbaa"))
    rep = compute_metrics(edl, scores, transition_matrix(cfg), cfg)
    # rewards 1.6, 1.6, -1.6 (lb -> rb), 1.6, 1.6 (rb -> lb), 0.8
    assert rep.R_avg == pytest.approx(5.6 / 6, abs=1e-9)
    assert rep.r_max == 5 / 6
    assert rep.r_trans == 0.5
    assert rep.n_sw == 2
    assert rep.L_avg == 2
    assert rep.T == 6


def test_single_segment_conventions():
    s, cfg = hand_case()
    scores = semantic_scores(s, cfg)
    rep = compute_metrics(EditDecisionList.from_sequence(["a"] * 6), scores, transition_matrix(cfg), cfg)
    assert (rep.n_sw, rep.L_avg, rep.r_trans) == (0, 6, 1.0)


def test_argmax_sequence_has_full_r_max():
    s, cfg = hand_case()
    scores = semantic_scores(s, cfg)
    seq = [scores.camera_ids[c] for c in scores.argmax_cameras()]
    rep = compute_metrics(EditDecisionList.from_sequence(seq), scores, transition_matrix(cfg), cfg)
    assert rep.r_max == 1.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=60), st.integers(0, 1000))
def test_report_identities(seq, seed):
    T = len(seq)
    rng = np.random.default_rng(seed)
    ids = ("a", "b", "c")
    scores = ScoreMatrix(ids, ("lb", "sl", "ol"), rng.uniform(0, 2, (3, T)))
    cfg = EditConfig()
    edl = EditDecisionList.from_sequence([ids[c] for c in seq])
    rep = compute_metrics(edl, scores, transition_matrix(cfg), cfg)
    assert rep.L_avg * (rep.n_sw + 1) == T
    assert isinstance(rep.L_avg, Fraction)
    assert rep.n_sw == sum(a != b for a, b in zip(seq, seq[1:]))
    assert 0 <= rep.r_max <= 1 and 0 <= rep.r_trans <= 1


def test_metrics_shape_mismatch():
    s, cfg = hand_case()
    scores = semantic_scores(s, cfg)
    with pytest.raises(ValidationError):
        compute_metrics(EditDecisionList.from_sequence(list("aab")), scores, transition_matrix(cfg), cfg)
    with pytest.raises(ValidationError, match="unknown camera"):
        compute_metrics(EditDecisionList.from_sequence(list("aaazzz")), scores, transition_matrix(cfg), cfg)


def report(R, rm, rt, n, T=100):
    return MetricsReport(R, rm, rt, n, Fraction(T, n + 1), T)


def test_compare_one_row_is_best():
    c = compare([("only", report(0.1, 0.2, 0.3, 4))])
    assert all(c.is_best("only", m) for m in ("R_avg", "r_max", "r_trans"))
    assert "only" in c.to_text()


def test_compare_marks_column_maxima():
    c = compare([("x", report(0.5, 0.2, 1.0, 4)), ("y", report(0.4, 0.9, 1.0, 9))])
    assert c.best == {"R_avg": ("x",), "r_max": ("y",), "r_trans": ("x", "y")}
    lines = c.to_csv().splitlines()
    assert lines[0] == "method,R_avg,r_max,r_trans,n_sw,L_avg,best"
    assert lines[1] == "x,0.5,0.2,1.0,4.0,20.0,R_avg;r_trans"
    assert lines[2].endswith(",r_max;r_trans")
    text = c.to_text()
    assert "0.5000*" in text and "90.0%*" in text


def test_compare_failed_row_and_errors():
    c = compare([("ok", report(0.5, 0.2, 1.0, 4)), ("bad", None)])
    assert "failed" in c.to_text()
    assert c.to_csv().splitlines()[2] == "bad,,,,,,"
    with pytest.raises(EditError):
        compare([])
    with pytest.raises(EditError):
        mean_report([])


def test_mean_report():
    m = mean_report([report(0.5, 0.2, 1.0, 4), report(0.3, 0.4, 0.0, 9)])
    assert m["R_avg"] == pytest.approx(0.4) and m["n_sw"] == 6.5 and m["L_avg"] == 15.0


def test_timeline_svg_parses():
    edl = EditDecisionList.from_sequence(list("aabbba"))
    svg = timeline_svg(edl, ["a", "b", "<c>"])
    root = ET.fromstring(svg)
    rects = [e for e in root.iter("{http://www.w3.org/2000/svg}rect")]
    assert len(rects) == 1 + 3  # background + one per segment
    assert "&lt;c&gt;" in svg
    assert timeline_svg(edl, ["a", "b", "<c>"]) == svg
