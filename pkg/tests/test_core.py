from __future__ import annotations

import pickle

import numpy as np
import pytest

from lecture_director.core import (
    DEFAULT_SCORES,
    DEFAULT_VIOLATIONS,
    DEFAULT_WEIGHTS,
    Camera,
    EditConfig,
    EditDecisionList,
    Scenario,
    Segment,
    ShotKind,
    ValidationError,
    check_scenario,
    validate_scenario,
)


def two_camera(T: int = 10) -> Scenario:
    return Scenario(T, (Camera("a", "lb", np.zeros(T)), Camera("b", "sc", np.ones(T))))


def test_exactly_seven_kinds():
    assert [k.value for k in ShotKind] == ["lb", "rb", "sc", "sl", "lm", "rm", "ol"]


def test_parse_kind():
    assert ShotKind.parse("ol") is ShotKind.OVERVIEW_LONG
    assert ShotKind.parse(ShotKind.SLIDE_CLOSEUP) is ShotKind.SLIDE_CLOSEUP
    with pytest.raises(ValueError, match="unknown shot kind"):
        ShotKind.parse("xx")


def test_default_vectors():
    expected = {"lb": 0.8, "rb": 0.8, "sc": 1.0, "sl": 0.4, "lm": 0.6, "rm": 0.6, "ol": 0.2}
    assert {k.value: v for k, v in DEFAULT_WEIGHTS.items()} == expected
    assert {k.value: v for k, v in DEFAULT_SCORES.items()} == expected


def test_default_rule_lengths_and_lambdas():
    cfg = EditConfig()
    assert (cfg.l_min, cfg.l_max) == (20.0, 60.0)
    assert (cfg.lambda_sw, cfg.lambda_e, cfg.lambda_b) == (0.4, 0.3, 0.3)
    assert cfg.mean_length == 40.0
    assert cfg.cap_length == 100


def test_default_violations_cover_line_of_action():
    assert ShotKind.RIGHT_BLACKBOARD_CLOSEUP in DEFAULT_VIOLATIONS[ShotKind.LEFT_BLACKBOARD_CLOSEUP]
    assert ShotKind.LEFT_BLACKBOARD_CLOSEUP in DEFAULT_VIOLATIONS[ShotKind.RIGHT_BLACKBOARD_CLOSEUP]
    assert not DEFAULT_VIOLATIONS[ShotKind.LEFT_MEDIUM]


def test_well_formed_scenario_has_no_violations():
    assert validate_scenario(two_camera()) == []


def test_length_mismatch_is_one_violation():
    s = Scenario(10, (Camera("a", "lb", np.zeros(9)), Camera("b", "sc", np.ones(10))))
    v = validate_scenario(s)
    assert len(v) == 1
    assert v[0].camera == "a" and "length" in v[0].message


def test_domain_violation_names_camera_and_time():
    ind = np.zeros(10)
    ind[4] = 2
    s = Scenario(10, (Camera("a", "lb", ind), Camera("b", "sc", np.ones(10))))
    v = validate_scenario(s)
    assert len(v) == 1
    assert (v[0].camera, v[0].t) == ("a", 4)
    assert "camera 'a', t=4" in str(v[0])


def test_duplicate_ids_and_empty():
    s = Scenario(3, (Camera("a", "lb", np.zeros(3)), Camera("a", "rb", np.zeros(3))))
    assert any("duplicate" in v.message for v in validate_scenario(s))
    assert any("no cameras" in v.message for v in validate_scenario(Scenario(3, ())))
    assert validate_scenario(Scenario(0, ()))[0].message.startswith("T must be")


def test_feature_violations():
    bad = Camera("a", "sc", np.zeros(4), {"frames": np.zeros((3, 2, 2, 1))})
    assert "expected T=4" in validate_scenario(Scenario(4, (bad,)))[0].message
    nan = Camera("a", "ol", np.zeros(4), {"positions": [0.5, np.nan, 0.5, 0.5]})
    v = validate_scenario(Scenario(4, (nan,)))
    assert (v[0].t, "non-finite" in v[0].message) == (1, True)
    flow = Camera("a", "sl", np.zeros(2), {"flow": np.zeros((2, 3, 3, 3))})
    assert "2 channels" in validate_scenario(Scenario(2, (flow,)))[0].message


def test_check_scenario_raises_with_violations():
    s = Scenario(10, (Camera("a", "lb", np.zeros(9)),))
    with pytest.raises(ValidationError) as info:
        check_scenario(s)
    assert len(info.value.violations) == 1


def test_types_are_immutable_and_picklable():
    s = two_camera()
    with pytest.raises(ValueError):
        s.cameras[0].indicator[0] = 1
    with pytest.raises(TypeError):
        s.cameras[0].features["x"] = np.zeros(1)
    cfg = EditConfig(c_sw=2.0)
    assert pickle.loads(pickle.dumps(cfg)) == cfg
    assert pickle.loads(pickle.dumps(s)) == s


@pytest.mark.parametrize(
    "kw",
    [
        {"l_min": 60.0, "l_max": 20.0},
        {"epsilon": 0.0},
        {"lambda_e": -1.0},
        {"c_sw": float("nan")},
        {"look_ahead": 0},
        {"tie_break": "random"},
        {"weights": {"lb": 1.0}},
    ],
)
def test_config_invariants(kw):
    with pytest.raises(ValidationError):
        EditConfig(**kw)


def test_resolve_seconds_to_instances():
    cfg = EditConfig(l_min=2.0, l_max=6.0, look_ahead=3, length_unit="seconds").resolve(10)
    assert (cfg.l_min, cfg.l_max, cfg.look_ahead, cfg.length_unit) == (20.0, 60.0, 30, "instances")
    same = EditConfig()
    assert same.resolve(25) is same


def test_edl_from_sequence_round_trip():
    seq = ["a", "a", "b", "b", "b", "a"]
    edl = EditDecisionList.from_sequence(seq)
    assert edl.segments == (Segment("a", 0, 2), Segment("b", 2, 5), Segment("a", 5, 6))
    assert edl.to_sequence() == seq
    assert (edl.T, edl.n_cuts) == (6, 2)
    assert edl.check(6, ["a", "b"]) is edl


@pytest.mark.parametrize(
    "segs, needle",
    [
        ((Segment("a", 0, 3), Segment("b", 2, 5)), "overlap"),
        ((Segment("a", 0, 3), Segment("b", 4, 5)), "gap"),
        ((Segment("a", 0, 3), Segment("a", 3, 5)), "repeats"),
        ((Segment("a", 0, 0),), "empty"),
    ],
)
def test_edl_invariants(segs, needle):
    with pytest.raises(ValidationError, match=needle):
        EditDecisionList(segs).check()


def test_edl_coverage_and_unknown_camera():
    edl = EditDecisionList((Segment("a", 0, 4),))
    with pytest.raises(ValidationError, match="T=5"):
        edl.check(5)
    with pytest.raises(ValidationError, match="unknown camera"):
        edl.check(4, ["b"])
