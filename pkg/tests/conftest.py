from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import Problem  # noqa: E402

from lecture_director.core import EditConfig, ShotKind  # noqa: E402
from lecture_director.scoring import ScoreMatrix  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


def to_package(p: Problem) -> tuple[ScoreMatrix, EditConfig, tuple[int, int]]:
    """The same instance expressed with package types."""
    ids = tuple(f"{k}{i}" for i, k in enumerate(p.kinds))
    scores = ScoreMatrix(ids, tuple(p.kinds), np.array(p.scores, dtype=float))
    cfg = EditConfig(
        epsilon=p.eps, c_sw=p.c_sw, c_broll=p.c_broll, l_min=p.l_min, l_max=p.l_max,
        lambda_e=p.lam_e, lambda_sw=p.lam_sw, lambda_b=p.lam_b,
        violation_sets={ShotKind(a): frozenset(ShotKind(b) for b in bs) for a, bs in p.violations.items()},
        broll_set=frozenset(ShotKind(k) for k in p.broll),
    )
    return scores, cfg, p.init


@pytest.fixture(scope="session")
def suite():
    from lecture_director.simgen import benchmark_suite

    return benchmark_suite(0)


@pytest.fixture(scope="session")
def suite_results(suite):
    """Offline, look-ahead and baseline rewards on the default suite, computed once."""
    from lecture_director.baselines import BaselineParams, fsm, randseg, ranking
    from lecture_director.pipeline import half_l_min
    from lecture_director.scoring import semantic_scores
    from lecture_director.solver import rescore, run_online

    cfg = EditConfig()
    out = []
    for i, s in enumerate(suite):
        sc = semantic_scores(s, cfg)
        idx = {c: j for j, c in enumerate(sc.camera_ids)}
        r = {
            "offline": run_online(sc, cfg, None, "exact").total_reward,
            "paper": run_online(sc, cfg, None, "paper").total_reward,
            "l1": run_online(sc, cfg, 1, "exact").total_reward,
            "l_half": run_online(sc, cfg, half_l_min(cfg), "exact").total_reward,
            "l_min": run_online(sc, cfg, int(cfg.l_min), "exact").total_reward,
        }
        bp = BaselineParams.for_config(cfg, rng_seed=i)
        for name, edl in (("randseg", randseg(s, bp)), ("ranking", ranking(s, sc, bp)), ("fsm", fsm(s, bp, cfg))):
            r[name] = rescore([idx[c] for c in edl.to_sequence()], sc, cfg)
        out.append(r)
    return out
