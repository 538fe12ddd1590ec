"""Semantic focus scores and the soft cinematographic reward terms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import EditConfig, Scenario, ShotKind, ValidationError

KIND_ORDER: tuple[ShotKind, ...] = tuple(ShotKind)


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """Per-camera, per-instance focus scores ``values[c, t]``."""

    camera_ids: tuple[str, ...]
    kinds: tuple[ShotKind, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] != len(self.camera_ids) or len(self.kinds) != len(self.camera_ids):
            raise ValidationError(f"score matrix shape {vals.shape} does not match {len(self.camera_ids)} cameras")
        if not np.isfinite(vals).all():
            raise ValidationError("score matrix has non-finite entries")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "camera_ids", tuple(self.camera_ids))
        object.__setattr__(self, "kinds", tuple(ShotKind.parse(k) for k in self.kinds))

    @property
    def n_cameras(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> int:
        return self.values.shape[1]

    def window(self, start: int, stop: int) -> ScoreMatrix:
        return ScoreMatrix(self.camera_ids, self.kinds, self.values[:, start:stop])

    def argmax_cameras(self) -> np.ndarray:
        """Best camera index at every instance; ties go to the lowest index."""
        return np.argmax(self.values, axis=0)

    def to_csv(self) -> str:
        header = "camera," + ",".join(str(t) for t in range(self.T))
        rows = [header]
        for cam, row in zip(self.camera_ids, self.values):
            rows.append(cam + "," + ",".join(_fmt(v) for v in row))
        return "\n".join(rows) + "\n"


def _fmt(x: float) -> str:
    return repr(round(float(x), 6) + 0.0)


def semantic_scores(s: Scenario, cfg: EditConfig) -> ScoreMatrix:
    """``r_e[c, t] = default[kind(c)] + indicator[c, t] * weight[kind(c)]``."""
    rows = []
    for cam in s.cameras:
        rows.append(cfg.defaults[cam.kind] + cam.indicator.astype(np.float64) * cfg.weights[cam.kind])
    values = np.vstack(rows) if rows else np.zeros((0, s.T))
    return ScoreMatrix(tuple(s.camera_ids), tuple(s.kinds), values)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Suitability of cutting from one shot kind to another (``+eps`` / ``-eps``)."""

    values: np.ndarray  # indexed by KIND_ORDER position
    epsilon: float

    def __getitem__(self, key: tuple[ShotKind, ShotKind]) -> float:
        a, b = key
        return float(self.values[KIND_ORDER.index(a), KIND_ORDER.index(b)])

    def for_cameras(self, kinds: Sequence[ShotKind]) -> np.ndarray:
        """Camera-level ``(C, C)`` matrix for cameras of the given kinds."""
        idx = [KIND_ORDER.index(k) for k in kinds]
        return self.values[np.ix_(idx, idx)]

    def is_favorable(self, a: ShotKind, b: ShotKind) -> bool:
        return self[a, b] > 0


def build_transition_matrix(
    violations: Mapping[ShotKind, frozenset[ShotKind]], epsilon: float
) -> TransitionMatrix:
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise ValidationError("epsilon must be > 0")
    n = len(KIND_ORDER)
    mat = np.full((n, n), float(epsilon))
    for src, targets in violations.items():
        i = KIND_ORDER.index(ShotKind.parse(src))
        for dst in targets:
            dst = ShotKind.parse(dst)
            if dst == src:
                continue  # staying on a shot violates nothing
            mat[i, KIND_ORDER.index(dst)] = -float(epsilon)
    mat.setflags(write=False)
    return TransitionMatrix(mat, float(epsilon))


def transition_matrix(cfg: EditConfig) -> TransitionMatrix:
    return build_transition_matrix(cfg.violation_sets, cfg.epsilon)


def _expit(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def switch_penalty(L: int, switch: bool, cfg: EditConfig) -> float:
    """Soft length penalty in ``(-c_sw, 0)`` for the view that has run ``L`` instances.

    ``c_sw * (1 / (1 + e^x) - 1)`` equals ``-c_sw * expit(x)``; the latter never
    rounds to exactly zero for very negative ``x``.
    """
    if L < 1:
        raise ValueError(f"run length must be >= 1, got {L}")
    x = (cfg.l_min - L) if switch else (L - cfg.l_max)
    return -cfg.c_sw * _expit(x)


def broll_incentive(L: int, target: ShotKind, cfg: EditConfig) -> float:
    if L < 1:
        raise ValueError(f"run length must be >= 1, got {L}")
    if L > cfg.mean_length / 2 and ShotKind.parse(target) in cfg.broll_set:
        return cfg.c_broll
    return 0.0


# Rewards are accumulated as integers in units of 2**-32. Each of the three
# terms of a step is rounded once, by the same expression everywhere, so
# every solver and the rescorer add identical integers and ties are exact.
REWARD_SCALE = 2.0**32
UNIT_LIMIT = 2**62


def to_units(x: float) -> int:
    return int(round(x * REWARD_SCALE))


def from_units(u: int) -> float:
    return u / REWARD_SCALE


def semantic_units(k: int, c: int, t: int, scores: ScoreMatrix, cfg: EditConfig, tmat: TransitionMatrix) -> int:
    return to_units(cfg.lambda_e * tmat[scores.kinds[k], scores.kinds[c]] * float(scores.values[c, t]))


def broll_units(L: int, target: ShotKind, cfg: EditConfig) -> int:
    return to_units(cfg.lambda_b * broll_incentive(L, target, cfg))


def length_units(L: int, switch: bool, cfg: EditConfig) -> int:
    return to_units(cfg.lambda_sw * switch_penalty(L, switch, cfg))


def step_units(
    k: int,
    c: int,
    t: int,
    L_prev: int,
    scores: ScoreMatrix,
    cfg: EditConfig,
    tmat: TransitionMatrix | None = None,
) -> int:
    if tmat is None:
        tmat = transition_matrix(cfg)
    return (semantic_units(k, c, t, scores, cfg, tmat)
            + broll_units(L_prev, scores.kinds[c], cfg)
            + length_units(L_prev, k != c, cfg))


def step_reward(
    k: int,
    c: int,
    t: int,
    L_prev: int,
    scores: ScoreMatrix,
    cfg: EditConfig,
    tmat: TransitionMatrix | None = None,
) -> float:
    """Reward for showing camera ``c`` at instance ``t`` after camera ``k`` ran ``L_prev``.

    ``lambda_e * T[k, c] * r_e[c, t] + lambda_b * broll(L_prev, c) + lambda_sw * sw(L_prev, k != c)``,
    each term rounded to a multiple of ``2**-32``.
    """
    return from_units(step_units(k, c, t, L_prev, scores, cfg, tmat))


class RewardTables:
    """Integer-unit reward terms for one score matrix, shared by the DP solvers.

    Length-dependent terms are tabulated for run lengths ``0 .. max_len``
    (index 0 is unused) from the scalar definitions above.
    """

    def __init__(self, scores: ScoreMatrix, cfg: EditConfig, max_len: int):
        self.cfg = cfg
        self.scores = scores
        self.max_len = int(max_len)
        self.r = scores.values
        self.C = scores.n_cameras
        self.trans = transition_matrix(cfg).for_cameras(scores.kinds)
        self.semantic_coef = cfg.lambda_e * self.trans  # (C_prev, C_next), same rounding as the scalar path
        self.is_broll = np.array([k in cfg.broll_set for k in scores.kinds], dtype=bool)
        Ls = range(1, max_len + 1)
        self.stay = np.array([0] + [length_units(L, False, cfg) for L in Ls], dtype=np.int64)
        self.switch = np.array([0] + [length_units(L, True, cfg) for L in Ls], dtype=np.int64)
        bonus = to_units(cfg.lambda_b * cfg.c_broll)
        self.broll = np.array([0] + [bonus if L > cfg.mean_length / 2 else 0 for L in Ls], dtype=np.int64)
        sem_max = float(np.abs(self.semantic_coef).max(initial=0.0) * np.abs(self.r).max(initial=0.0))
        self.step_bound = (to_units(sem_max) + abs(bonus)
                           + max(int(np.abs(self.stay).max()), int(np.abs(self.switch).max())) + 3)

    def covers(self, scores: ScoreMatrix, cfg: EditConfig, max_len: int) -> bool:
        return self.scores is scores and self.cfg is cfg and self.max_len >= max_len

    def check_horizon(self, H: int) -> None:
        if self.step_bound * (H + 1) >= UNIT_LIMIT:
            raise ValidationError("reward magnitudes too large for exact accumulation over this horizon")

    def semantic(self, t: int) -> np.ndarray:
        """``(C_prev, C_next)`` semantic units at instance ``t``."""
        return np.rint(self.semantic_coef * self.r[:, t][None, :] * REWARD_SCALE).astype(np.int64)

    def step_matrix(self, t: int, L_prev: np.ndarray) -> np.ndarray:
        """``D[k, c]`` in units; ``L_prev[k]`` is camera ``k``'s run length entering instance ``t``."""
        L_prev = np.asarray(L_prev)
        D = self.semantic(t) + self.broll[L_prev][:, None] * self.is_broll[None, :]
        pen = np.repeat(self.switch[L_prev][:, None], self.C, axis=1)
        np.fill_diagonal(pen, self.stay[L_prev])
        return D + pen
