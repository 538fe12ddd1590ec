"""Camera-sequence optimizers over the trellis of (camera, instance) nodes.

All solvers maximize the same objective: for every instance in the horizon,
the step reward of moving from the previous camera (with its current run
length) to the next one. Step rewards are integers in units of ``2**-32``
(see :mod:`.scoring`), so sums and comparisons are exact and every solver
agrees bit for bit on the value of a sequence. :func:`rescore` is the
reference evaluation; every ``SolveResult.total_reward`` is computed with it.

Three solvers are provided:

* :func:`solve_paper_dp` keeps one (reward, predecessor, run length) triple per
  node. It is Theta(C^2 l) but not always optimal, because the best path into
  a node may carry a run length that is worse for the future.
* :func:`solve_exact_dp` expands the state to (camera, run length capped at
  ``cfg.cap_length``) and is optimal: the cap is only accepted where every
  length-dependent term has stopped changing.
* :func:`brute_force` enumerates every sequence.

Among optimal sequences, the exact DP and the brute-force enumeration both
return the lexicographically smallest one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import EditConfig, EditDecisionList, EditError, ValidationError
from .scoring import (
    RewardTables,
    ScoreMatrix,
    broll_units,
    from_units,
    length_units,
    semantic_units,
    step_units,
    to_units,
    transition_matrix,
)

BRUTE_FORCE_LIMIT = 10**7

State = tuple[int, int]  # (camera index, run length)


@dataclass(frozen=True)
class SolveResult:
    sequence: tuple[int, ...]
    total_reward: float
    mode: str
    node_updates: int = 0
    total_units: int = 0  # exact total in units of 2**-32

    def cameras(self, scores: ScoreMatrix) -> list[str]:
        return [scores.camera_ids[c] for c in self.sequence]

    def to_edl(self, scores: ScoreMatrix) -> EditDecisionList:
        return EditDecisionList.from_sequence(self.cameras(scores))


def initial_state(scores: ScoreMatrix, cfg: EditConfig, start: int = 0) -> State:
    """Camera shown just before ``start`` and how long it has been on.

    Defaults to the best-scoring camera at ``start`` with a run length of
    ``cfg.initial_run_length``.
    """
    if cfg.initial_camera is not None:
        try:
            cam = scores.camera_ids.index(cfg.initial_camera)
        except ValueError:
            raise ValidationError(f"initial_camera {cfg.initial_camera!r} is not in the scenario") from None
    else:
        cam = int(np.argmax(scores.values[:, start]))
    return cam, int(cfg.initial_run_length)


def advance(state: State, c: int) -> State:
    k, L = state
    return (c, L + 1) if c == k else (c, 1)


def _horizon(scores: ScoreMatrix, start: int, horizon: int | None) -> int:
    H = scores.T - start if horizon is None else horizon
    if H < 1:
        raise EditError("empty horizon")
    if start < 0 or start + H > scores.T:
        raise EditError(f"horizon [{start}, {start + H}) exceeds the {scores.T}-instance score matrix")
    return H


def _check_init(init: State, C: int) -> None:
    k, L = init
    if not 0 <= k < C or L < 1:
        raise EditError(f"invalid initial state {init}")


def rescore_units(
    sequence: Sequence[int],
    scores: ScoreMatrix,
    cfg: EditConfig,
    init: State | None = None,
    start: int = 0,
    horizon: int | None = None,
) -> int:
    """Exact objective of ``sequence`` in reward units, walking true run lengths."""
    if horizon is not None and len(sequence) != horizon:
        raise EditError(f"sequence has {len(sequence)} entries, horizon is {horizon}")
    if start < 0 or start + len(sequence) > scores.T:
        raise EditError("sequence runs past the end of the score matrix")
    if init is None:
        init = initial_state(scores, cfg, start)
    _check_init(init, scores.n_cameras)
    tmat = transition_matrix(cfg)
    state = init
    total = 0
    for i, c in enumerate(sequence):
        c = int(c)
        if not 0 <= c < scores.n_cameras:
            raise EditError(f"camera index {c} out of range")
        k, L = state
        total += step_units(k, c, start + i, L, scores, cfg, tmat)
        state = advance(state, c)
    return total


def rescore(
    sequence: Sequence[int],
    scores: ScoreMatrix,
    cfg: EditConfig,
    init: State | None = None,
    start: int = 0,
    horizon: int | None = None,
) -> float:
    """Objective value of ``sequence`` over ``[start, start + len)``."""
    return from_units(rescore_units(sequence, scores, cfg, init, start, horizon))


def _result(seq: Sequence[int], scores: ScoreMatrix, cfg: EditConfig, init: State, start: int,
            mode: str, updates: int) -> SolveResult:
    seq_t = tuple(int(c) for c in seq)
    units = rescore_units(seq_t, scores, cfg, init, start)
    return SolveResult(seq_t, from_units(units), mode, updates, units)


def solve_paper_dp(
    scores: ScoreMatrix,
    cfg: EditConfig,
    init: State | None = None,
    start: int = 0,
    horizon: int | None = None,
    tables: RewardTables | None = None,
) -> SolveResult:
    """Forward pass keeping one (R, P, L) triple per node, then backtrack.

    ``node_updates`` counts predecessor evaluations: ``C`` for the first
    instance and ``C * C`` for every later one.
    """
    H = _horizon(scores, start, horizon)
    C = scores.n_cameras
    if init is None:
        init = initial_state(scores, cfg, start)
    _check_init(init, C)
    k0, L0 = init
    tables = _tables(tables, scores, cfg, L0 + H)
    tables.check_horizon(H)
    cams = np.arange(C)

    R = tables.step_matrix(start, np.full(C, L0))[k0]
    L = np.where(cams == k0, L0 + 1, 1)
    pred = np.empty((H, C), dtype=np.int64)
    pred[0] = k0
    updates = C
    for i in range(1, H):
        cand = R[:, None] + tables.step_matrix(start + i, L)
        best_k = np.argmax(cand, axis=0)  # first maximum = lowest index
        R = cand[best_k, cams]
        L = np.where(best_k == cams, L[best_k] + 1, 1)
        pred[i] = best_k
        updates += C * C

    seq = np.empty(H, dtype=np.int64)
    seq[-1] = int(np.argmax(R))
    for i in range(H - 1, 0, -1):
        seq[i - 1] = pred[i, seq[i]]
    return _result(seq, scores, cfg, init, start, "paper_dp", updates)


def _tables(tables: RewardTables | None, scores: ScoreMatrix, cfg: EditConfig, max_len: int) -> RewardTables:
    if tables is not None and tables.covers(scores, cfg, max_len):
        return tables
    return RewardTables(scores, cfg, max_len)


_NEG = np.iinfo(np.int64).min // 4


def solve_exact_dp(
    scores: ScoreMatrix,
    cfg: EditConfig,
    init: State | None = None,
    start: int = 0,
    horizon: int | None = None,
    L_cap: int | None = None,
    tables: RewardTables | None = None,
) -> SolveResult:
    """Optimal sequence via DP over (camera, min(run length, L_cap)) states.

    Runs a backward value-to-go pass, then rebuilds the lexicographically
    smallest optimal sequence forward. Work is Theta(C * (C + L_cap) * l).
    """
    H = _horizon(scores, start, horizon)
    C = scores.n_cameras
    cap = cfg.cap_length if L_cap is None else int(L_cap)
    _check_cap(cap, cfg)
    if init is None:
        init = initial_state(scores, cfg, start)
    _check_init(init, C)
    tables = _tables(tables, scores, cfg, cap)
    tables.check_horizon(H)

    stay_pen = tables.stay[1 : cap + 1]
    switch_pen = tables.switch[1 : cap + 1]
    broll = tables.broll[1 : cap + 1]  # bonus for a B-roll target, by run length
    has_broll = broll != 0
    bonus = int(broll.max(initial=0))
    nxt = np.minimum(np.arange(2, cap + 2), cap) - 1  # index of the stay successor
    broll_c = bonus * tables.is_broll
    self_mask = np.eye(C, dtype=bool)

    # W[i][k, l-1]: best reward for instances start+i .. start+H-1 entering with state (k, l)
    W = np.zeros((H + 1, C, cap), dtype=np.int64)
    for i in range(H - 1, -1, -1):
        Wn = W[i + 1]
        sem = tables.semantic(start + i)
        stay = np.diag(sem)[:, None] + broll[None, :] * tables.is_broll[:, None]
        stay = stay + stay_pen[None, :] + Wn[:, nxt]
        if C > 1:
            A = sem + Wn[:, 0][None, :]
            S0 = np.where(self_mask, _NEG, A).max(axis=1)
            S1 = np.where(self_mask, _NEG, A + broll_c[None, :]).max(axis=1)
            switch = switch_pen[None, :] + np.where(has_broll[None, :], S1[:, None], S0[:, None])
            W[i] = np.maximum(stay, switch)
        else:
            W[i] = stay

    k, L = init
    remaining = int(W[0][k, min(L, cap) - 1])
    seq = []
    for i in range(H):
        lc = min(L, cap) - 1
        Wn = W[i + 1]
        step = tables.semantic(start + i)[k] + broll[lc] * tables.is_broll + switch_pen[lc]
        step[k] = step[k] - switch_pen[lc] + stay_pen[lc]
        follow = Wn[:, 0].copy()
        follow[k] = Wn[k, nxt[lc]]
        ok = np.flatnonzero(step + follow == remaining)
        if ok.size == 0:  # unreachable: the backward pass produced `remaining` from these same terms
            raise AssertionError("exact DP reconstruction lost the optimum")
        c = int(ok[0])
        remaining -= int(step[c])
        seq.append(c)
        k, L = advance((k, L), c)

    return _result(seq, scores, cfg, init, start, "exact_dp", int(H * C * (C + cap)))


def _check_cap(cap: int, cfg: EditConfig) -> None:
    """Run lengths >= cap must all score alike: both penalties and the B-roll test settled in units."""
    problems = []
    if cap < 1:
        problems.append("must be >= 1")
    else:
        if length_units(cap, False, cfg) != to_units(cfg.lambda_sw * -cfg.c_sw):
            problems.append(f"stay penalty still changing beyond {cap} (l_max={cfg.l_max})")
        if length_units(cap, True, cfg) != 0:
            problems.append(f"switch penalty still changing beyond {cap} (l_min={cfg.l_min})")
        if not cap > cfg.mean_length / 2:
            problems.append(f"B-roll threshold {cfg.mean_length / 2} not passed")
    if problems:
        raise EditError(f"L_cap={cap} invalid: " + "; ".join(problems))


def brute_force(
    scores: ScoreMatrix,
    cfg: EditConfig,
    init: State | None = None,
    start: int = 0,
    horizon: int | None = None,
) -> SolveResult:
    """Score every one of the ``C ** horizon`` sequences and keep the best."""
    H = _horizon(scores, start, horizon)
    C = scores.n_cameras
    if C**H > BRUTE_FORCE_LIMIT:
        raise EditError(f"brute force over {C}^{H} sequences exceeds the {BRUTE_FORCE_LIMIT} limit")
    if init is None:
        init = initial_state(scores, cfg, start)
    _check_init(init, C)
    k0, L0 = init

    # Term lookups straight from the scalar definitions, indexed by run length (0 unused).
    Ls = range(1, L0 + H + 1)
    stay_tab = np.array([0] + [length_units(L, False, cfg) for L in Ls], dtype=np.int64)
    switch_tab = np.array([0] + [length_units(L, True, cfg) for L in Ls], dtype=np.int64)
    kinds = scores.kinds
    broll_tab = np.array([[0] * C] + [[broll_units(L, kd, cfg) for kd in kinds] for L in Ls], dtype=np.int64)
    tmat = transition_matrix(cfg)
    sem_tab = np.array([[[semantic_units(k, c, start + j, scores, cfg, tmat) for j in range(H)]
                         for c in range(C)] for k in range(C)], dtype=np.int64)

    N = C**H
    idx = np.arange(N, dtype=np.int64)
    seqs = np.empty((N, H), dtype=np.int64)
    for j in range(H):
        seqs[:, j] = (idx // C ** (H - 1 - j)) % C  # lexicographic order

    total = np.zeros(N, dtype=np.int64)
    prev = np.full(N, k0, dtype=np.int64)
    L = np.full(N, L0, dtype=np.int64)
    for j in range(H):
        cur = seqs[:, j]
        same = cur == prev
        total += sem_tab[prev, cur, j] + broll_tab[L, cur] + np.where(same, stay_tab[L], switch_tab[L])
        L = np.where(same, L + 1, 1)
        prev = cur

    winner = int(np.argmax(total))  # first maximum = lexicographically smallest
    return _result(seqs[winner], scores, cfg, init, start, "brute_force", N * H)


SOLVERS = {"paper": solve_paper_dp, "exact": solve_exact_dp, "brute": brute_force}


def run_online(
    scores: ScoreMatrix,
    cfg: EditConfig,
    look_ahead: int | None = None,
    solver: str = "exact",
    init: State | None = None,
) -> SolveResult:
    """Solve consecutive chunks of ``look_ahead`` instances, committing each chunk.

    The (camera, run length) state is carried across chunk boundaries, so the
    first instance of a chunk pays its transition terms against the last
    committed one. ``look_ahead=None`` (or >= T) is a single offline solve.
    """
    if solver not in SOLVERS:
        raise EditError(f"unknown solver {solver!r}; choose from {sorted(SOLVERS)}")
    if look_ahead is not None and look_ahead < 1:
        raise EditError("look_ahead must be >= 1")
    solve = SOLVERS[solver]
    T = scores.T
    step = T if look_ahead is None else min(int(look_ahead), T)
    if init is None:
        init = initial_state(scores, cfg)
    kw = {}
    if solver != "brute":
        kw["tables"] = RewardTables(scores, cfg, max(cfg.cap_length, init[1] + T))
    state = init
    seq: list[int] = []
    updates = 0
    for s in range(0, T, step):
        h = min(step, T - s)
        res = solve(scores, cfg, init=state, start=s, horizon=h, **kw)
        for c in res.sequence:
            state = advance(state, c)
        seq.extend(res.sequence)
        updates += res.node_updates
    return _result(seq, scores, cfg, init, 0, solve.__name__.replace("solve_", ""), updates)
