from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lecture_director.core import Camera, EditConfig, Scenario, ShotKind
from lecture_director.scoring import (
    KIND_ORDER,
    REWARD_SCALE,
    RewardTables,
    ScoreMatrix,
    broll_incentive,
    build_transition_matrix,
    length_units,
    semantic_scores,
    step_reward,
    step_units,
    switch_penalty,
    to_units,
    transition_matrix,
)

LB, RB, SC, SL, LM, RM, OL = KIND_ORDER
QUANTUM = 1 / REWARD_SCALE


def one_camera(kind: str, indicator) -> Scenario:
    return Scenario(len(indicator), (Camera("x", kind, indicator),))


@pytest.mark.parametrize("kind, bit, expected", [("sc", 1, 2.0), ("sc", 0, 1.0), ("ol", 1, 0.4)])
def test_semantic_score_examples(kind, bit, expected):
    r = semantic_scores(one_camera(kind, [bit]), EditConfig())
    assert r.values[0, 0] == pytest.approx(expected, abs=1e-15)


def test_semantic_scores_shape_and_csv():
    s = Scenario(3, (Camera("a", "lb", [0, 1, 0]), Camera("b", "ol", [1, 1, 0])))
    r = semantic_scores(s, EditConfig())
    assert r.values.shape == (2, 3)
    assert r.to_csv() == "camera,0,1,2\na,0.8,1.6,0.8\nb,0.4,0.4,0.2\n"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([k.value for k in ShotKind]), min_size=1, max_size=7),
       st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_flipping_one_bit_changes_one_entry_by_weight(kinds, T, seed):
    rng = np.random.default_rng(seed)
    cams = [Camera(f"c{i}", k, rng.integers(0, 2, T)) for i, k in enumerate(kinds)]
    s = Scenario(T, tuple(cams))
    cfg = EditConfig()
    base = semantic_scores(s, cfg).values
    for c, cam in enumerate(cams):
        assert set(np.unique(base[c])) <= {cfg.defaults[cam.kind], cfg.defaults[cam.kind] + cfg.weights[cam.kind]}
    c, t = int(rng.integers(len(cams))), int(rng.integers(T))
    ind = cams[c].indicator.copy()
    ind[t] = 1 - ind[t]
    flipped = semantic_scores(s.replace_cameras(cams[:c] + [cams[c].with_indicator(ind)] + cams[c + 1:]), cfg).values
    diff = flipped - base
    assert np.count_nonzero(diff) == 1
    assert abs(diff[c, t]) == pytest.approx(cfg.weights[cams[c].kind])


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 10), st.integers(0, 2**32 - 1))
def test_scaling_scores_preserves_semantic_argmax(alpha, seed):
    rng = np.random.default_rng(seed)
    kinds = [ShotKind(k) for k in rng.choice([k.value for k in ShotKind], 4)]
    s = Scenario(5, tuple(Camera(f"c{i}", k, rng.integers(0, 2, 5)) for i, k in enumerate(kinds)))
    cfg = EditConfig()
    scaled = EditConfig(weights={k: alpha * v for k, v in cfg.weights.items()},
                        defaults={k: alpha * v for k, v in cfg.defaults.items()})
    a, b = semantic_scores(s, cfg).values, semantic_scores(s, scaled).values
    np.testing.assert_allclose(b, alpha * a, rtol=1e-12)
    tm = transition_matrix(cfg).for_cameras(kinds)
    k = int(rng.integers(4))
    for t in range(5):
        assert np.argmax(tm[k] * a[:, t]) == np.argmax(tm[k] * b[:, t])


def test_transition_matrix_entries():
    tm = transition_matrix(EditConfig(epsilon=0.7))
    assert set(np.unique(tm.values)) == {-0.7, 0.7}
    assert tm[LB, RB] == -0.7
    assert all(tm[k, k] == 0.7 for k in ShotKind)
    assert tm.is_favorable(LM, SC) and not tm.is_favorable(SC, SL)


def test_empty_violations_all_favorable():
    tm = build_transition_matrix({}, 2.0)
    assert (tm.values == 2.0).all()


def test_self_violation_is_ignored():
    tm = build_transition_matrix({LB: frozenset({LB, RB})}, 1.0)
    assert tm[LB, LB] == 1.0 and tm[LB, RB] == -1.0


def test_transition_matrix_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        build_transition_matrix({}, 0.0)


def test_switch_penalty_midpoints():
    cfg = EditConfig(c_sw=3.0)
    assert abs(switch_penalty(60, False, cfg) + 1.5) <= 1e-12
    assert abs(switch_penalty(20, True, cfg) + 1.5) <= 1e-12


def test_switch_penalty_saturates():
    cfg = EditConfig()
    assert switch_penalty(80, False, cfg) == pytest.approx(-1.0, abs=1e-8)
    assert -1.0 < switch_penalty(80, False, cfg) < 0


def test_switch_penalty_monotone_and_bounded():
    cfg = EditConfig(c_sw=2.0)
    stay = [switch_penalty(L, False, cfg) for L in range(1, 201)]
    switch = [switch_penalty(L, True, cfg) for L in range(1, 201)]
    assert all(a >= b for a, b in zip(stay, stay[1:]))
    assert all(a <= b for a, b in zip(switch, switch[1:]))
    assert all(-2.0 <= v <= 0 for v in stay + switch)
    assert all(-2.0 < v < 0 for v in stay[:60] + switch[:40])


def test_switch_penalty_rejects_zero_length():
    with pytest.raises(ValueError):
        switch_penalty(0, True, EditConfig())


@pytest.mark.parametrize("L, target, expected", [(21, OL, 1.5), (21, LM, 0.0), (200, LM, 0.0), (5, OL, 0.0),
                                                 (20, SC, 0.0), (21, SL, 1.5)])
def test_broll_incentive(L, target, expected):
    assert broll_incentive(L, target, EditConfig(c_broll=1.5)) == expected


def test_broll_threshold_follows_mean_length():
    cfg = EditConfig(l_mean=10.0)
    assert broll_incentive(6, OL, cfg) == 1.0 and broll_incentive(5, OL, cfg) == 0.0


def test_step_reward_stay_example():
    # 0.3 * (+1) * 2 + 0.3 * 1 (slide is a B-roll target and 60 > 20) + 0.4 * (-1/2)
    scores = ScoreMatrix(("s",), (SC,), [[2.0]])
    assert step_reward(0, 0, 0, 60, scores, EditConfig()) == pytest.approx(0.7, abs=2 * QUANTUM)


def test_step_reward_zero_lambdas():
    scores = ScoreMatrix(("a", "b"), (LB, RB), [[1.3, 0.2], [2.0, 0.9]])
    cfg = EditConfig(lambda_e=0.0, lambda_sw=0.0, lambda_b=0.0)
    assert all(step_reward(k, c, t, L, scores, cfg) == 0.0
               for k in (0, 1) for c in (0, 1) for t in (0, 1) for L in (1, 30, 90))


def test_step_reward_violating_transition_single_term():
    scores = ScoreMatrix(("a", "b"), (LB, RB), [[1.0], [1.6]])
    cfg = EditConfig(lambda_b=0.0, lambda_sw=0.0, epsilon=0.5)
    assert step_reward(0, 1, 0, 7, scores, cfg) == pytest.approx(-0.3 * 0.5 * 1.6, abs=QUANTUM)


@settings(max_examples=80, deadline=None)
@given(st.floats(0, 3), st.floats(0, 3), st.floats(0, 3), st.integers(1, 120), st.booleans())
def test_step_reward_is_affine_in_each_lambda(le, lsw, lb, L, switch):
    scores = ScoreMatrix(("a", "b"), (SC, OL), [[2.0], [0.4]])
    c = 1 if switch else 0

    def f(**kw) -> float:
        base = {"lambda_e": le, "lambda_sw": lsw, "lambda_b": lb}
        base.update(kw)
        return step_reward(0, c, 0, L, scores, EditConfig(**base))

    for name, value in (("lambda_e", le), ("lambda_sw", lsw), ("lambda_b", lb)):
        f0, f1 = f(**{name: 0.0}), f(**{name: 1.0})
        assert f(**{name: value}) == pytest.approx(f0 + value * (f1 - f0), abs=8 * QUANTUM)


def test_units_round_once_per_term():
    assert to_units(0.5) == 2**31
    assert to_units(-QUANTUM / 2) == 0  # half to even
    cfg = EditConfig()
    scores = ScoreMatrix(("a", "b"), (LM, OL), [[1.2, 0.6], [0.4, 0.2]])
    assert step_units(0, 1, 1, 25, scores, cfg) == (
        to_units(0.3 * 1.0 * 0.2) + to_units(0.3 * 1.0) + to_units(0.4 * switch_penalty(25, True, cfg)))


def test_reward_tables_match_scalar_terms():
    rng = np.random.default_rng(3)
    kinds = (LB, RB, SL, OL)
    scores = ScoreMatrix(tuple("abcd"), kinds, rng.uniform(0, 2, (4, 5)))
    cfg = EditConfig(l_min=3, l_max=9, c_broll=0.7)
    tab = RewardTables(scores, cfg, 60)
    for L in range(1, 61):
        assert tab.stay[L] == length_units(L, False, cfg)
        assert tab.switch[L] == length_units(L, True, cfg)
    for t in range(5):
        L_prev = rng.integers(1, 61, 4)
        D = tab.step_matrix(t, L_prev)
        for k in range(4):
            for c in range(4):
                assert D[k, c] == step_units(k, c, t, int(L_prev[k]), scores, cfg)


def test_reward_tables_horizon_guard():
    scores = ScoreMatrix(("a",), (LB,), [[1e9]])
    tab = RewardTables(scores, EditConfig(), 10)
    with pytest.raises(ValueError, match="too large"):
        tab.check_horizon(10**6)
    RewardTables(ScoreMatrix(("a",), (LB,), [[1.0]]), EditConfig(), 10).check_horizon(10**6)


def test_score_matrix_validation():
    with pytest.raises(ValueError):
        ScoreMatrix(("a",), (LB,), [[math.nan]])
    with pytest.raises(ValueError):
        ScoreMatrix(("a", "b"), (LB, RB), [[1.0]])
