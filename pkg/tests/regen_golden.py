"""Rewrite the golden files under tests/golden.

Run by hand (``python tests/regen_golden.py``) only after a deliberate change
to generated output; the tests compare against the committed files.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from lecture_director.baselines import BaselineParams, randseg
from lecture_director.core import Camera, EditConfig, Scenario
from lecture_director.io import dumps, edl_to_dict, scenario_fingerprint
from lecture_director.pipeline import run_pipeline
from lecture_director.simgen import benchmark_suite

GOLDEN = Path(__file__).parent / "golden"
RANDSEG_SEED = 7  # first seed whose three draws give three segments


def randseg_scenario() -> Scenario:
    return Scenario(90, tuple(Camera(k, k, np.zeros(90)) for k in ("lb", "sc", "ol")))


def suite_names(n: int) -> list[str]:
    return [f"s{i:02d}" for i in range(n)]


def main() -> int:
    GOLDEN.mkdir(exist_ok=True)
    edl = randseg(randseg_scenario(), BaselineParams(randseg_n=30, rng_seed=RANDSEG_SEED))
    (GOLDEN / "randseg_c3_t90.json").write_text(dumps(edl_to_dict(edl)))
    suite = benchmark_suite(0)
    (GOLDEN / "suite_seed0.json").write_text(dumps([scenario_fingerprint(s) for s in suite]))
    result = run_pipeline(list(zip(suite_names(len(suite)), suite)), EditConfig(), root_seed=0)
    (GOLDEN / "benchmark_seed0.csv").write_text(result.table().to_csv())
    print(result.table().to_text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
