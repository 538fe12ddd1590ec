"""End-to-end benchmark: every method on every scenario, then one averaged table.

Each (scenario, method) cell is independent. A cell that raises is recorded
as failed and the rest still run. All randomness comes from a single root
seed: cell seeds are derived from ``(root_seed, scenario index, method index)``.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .baselines import BaselineParams, fsm, randseg, ranking
from .core import EditConfig, EditDecisionList, EditError, Scenario
from .io import config_digest, dumps, edl_to_dict
from .metrics import METRIC_NAMES, Comparison, MetricsReport, compare, compute_metrics, mean_report
from .scoring import semantic_scores, transition_matrix
from .solver import run_online

TOOL_NAME = "lecture-director"


@dataclass(frozen=True)
class RunManifest:
    """What produced an output file.

    ``timings`` (seconds per stage) are kept out of :meth:`to_dict` unless
    asked for, so that reruns write byte-identical files.
    """

    command: str
    inputs: tuple[str, ...] = ()
    config_hash: str = ""
    seed: int | None = None
    options: dict[str, Any] = field(default_factory=dict)
    version: str = __version__
    timings: dict[str, float] = field(default_factory=dict, compare=False)

    def to_dict(self, include_timings: bool = False) -> dict[str, Any]:
        d: dict[str, Any] = {
            "tool": TOOL_NAME,
            "version": self.version,
            "command": self.command,
            "inputs": list(self.inputs),
            "config_hash": self.config_hash,
            "seed": self.seed,
            "options": dict(self.options),
        }
        if include_timings:
            d["timings"] = dict(self.timings)
        return d

    def csv_header(self, include_timings: bool = False) -> str:
        """Single comment line (no trailing newline) carrying the manifest."""
        return "# manifest " + dumps(self.to_dict(include_timings)).rstrip("\n")


@dataclass(frozen=True)
class Method:
    name: str
    kind: str  # "randseg" | "ranking" | "fsm" | "optim"
    solver: str = "exact"
    look_ahead: int | None = None  # None: offline

    @property
    def slug(self) -> str:
        return "".join(ch if ch.isalnum() else "_" for ch in self.name).strip("_").lower()


def half_l_min(cfg: EditConfig) -> int:
    return max(1, int(round(cfg.l_min / 2)))


def default_methods(cfg: EditConfig) -> list[Method]:
    """The eight comparison rows: three baselines, the single-state DP offline,
    and the exact optimizer at look-ahead 1, L_min/2, L_min and unbounded."""
    return [
        Method("Randseg(30)", "randseg"),
        Method("FSM", "fsm"),
        Method("Ranking", "ranking"),
        Method("PaperDP(inf)", "optim", "paper", None),
        Method("Optim(1)", "optim", "exact", 1),
        Method("Optim(L_min/2)", "optim", "exact", half_l_min(cfg)),
        Method("Optim(L_min)", "optim", "exact", max(1, int(round(cfg.l_min)))),
        Method("Optim(inf)", "optim", "exact", None),
    ]


MODE_KEYS = ("randseg", "fsm", "ranking", "paper", "optim_1", "optim_half", "optim_lmin", "offline")


def select_methods(cfg: EditConfig, modes: Sequence[str] | None) -> list[Method]:
    """Subset of :func:`default_methods` by key (see ``MODE_KEYS``), in table order."""
    methods = default_methods(cfg)
    if modes is None:
        return methods
    unknown = [m for m in modes if m not in MODE_KEYS]
    if unknown:
        raise EditError(f"unknown modes {unknown}; choose from {list(MODE_KEYS)}")
    wanted = set(modes)
    return [m for key, m in zip(MODE_KEYS, methods) if key in wanted]


def cell_seed(root_seed: int, scenario_index: int, method_index: int) -> int:
    ss = np.random.SeedSequence([root_seed, scenario_index, method_index])
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class CellResult:
    scenario: str
    method: str
    status: str  # "ok" | "failed"
    report: MetricsReport | None = None
    edl: EditDecisionList | None = None
    error: str = ""
    seconds: float = 0.0


def run_cell(scenario: Scenario, cfg: EditConfig, method: Method, seed: int,
             baseline: BaselineParams | None = None) -> tuple[EditDecisionList, MetricsReport]:
    scores = semantic_scores(scenario, cfg)
    if method.kind == "optim":
        edl = run_online(scores, cfg, method.look_ahead, method.solver).to_edl(scores)
    else:
        base = baseline or BaselineParams.for_config(cfg)
        params = BaselineParams(base.randseg_n, base.ranking_mean, base.ranking_std, base.fsm_spec, seed)
        if method.kind == "randseg":
            edl = randseg(scenario, params)
        elif method.kind == "ranking":
            edl = ranking(scenario, scores, params)
        elif method.kind == "fsm":
            edl = fsm(scenario, params, cfg)
        else:
            raise EditError(f"unknown method kind {method.kind!r}")
    return edl, compute_metrics(edl, scores, transition_matrix(cfg), cfg)


def _run_cell_safe(args: tuple) -> CellResult:
    name, scenario, cfg, method, seed, baseline = args
    t0 = time.perf_counter()
    try:
        edl, rep = run_cell(scenario, cfg, method, seed, baseline)
    except Exception as exc:  # a failing cell must not abort the table
        return CellResult(name, method.name, "failed", error=f"{type(exc).__name__}: {exc}",
                          seconds=time.perf_counter() - t0)
    return CellResult(name, method.name, "ok", rep, edl, seconds=time.perf_counter() - t0)


def _strip_features(s: Scenario) -> Scenario:
    return s.replace_cameras(replace(c, features={}) for c in s.cameras)


@dataclass(frozen=True)
class BenchmarkResult:
    methods: tuple[Method, ...]
    scenarios: tuple[str, ...]
    cells: tuple[CellResult, ...]
    manifest: RunManifest

    @property
    def ok(self) -> bool:
        return all(c.status == "ok" for c in self.cells)

    def rows(self) -> list[tuple[str, dict[str, float] | None]]:
        """Per-method means across scenarios; a method with any failed cell has no row values."""
        out = []
        for m in self.methods:
            cells = [c for c in self.cells if c.method == m.name]
            if any(c.status != "ok" for c in cells) or not cells:
                out.append((m.name, None))
            else:
                out.append((m.name, mean_report([c.report for c in cells])))
        return out

    def table(self) -> Comparison:
        return compare(self.rows())

    def cells_csv(self) -> str:
        lines = ["scenario,method,status," + ",".join(METRIC_NAMES) + ",error"]
        for c in self.cells:
            vals = [""] * len(METRIC_NAMES) if c.report is None else [
                repr(round(float(getattr(c.report, m)), 6) + 0.0) for m in METRIC_NAMES]
            err = c.error.replace("\n", " ").replace(",", ";")
            lines.append(",".join([c.scenario, c.method, c.status, *vals, err]))
        return "\n".join(lines) + "\n"


def run_pipeline(
    scenarios: Sequence[tuple[str, Scenario]],
    cfg: EditConfig,
    methods: Sequence[Method] | None = None,
    root_seed: int = 0,
    jobs: int = 1,
    baseline: BaselineParams | None = None,
    inputs: Sequence[str] = (),
) -> BenchmarkResult:
    """Run every method on every scenario; cells run on up to ``jobs`` processes."""
    if not scenarios:
        raise EditError("no scenarios to benchmark")
    if jobs < 1:
        raise EditError("jobs must be >= 1")
    methods = list(default_methods(cfg) if methods is None else methods)
    t0 = time.perf_counter()
    tasks = []
    for i, (name, s) in enumerate(scenarios):
        light = _strip_features(s)
        for j, m in enumerate(methods):
            tasks.append((name, light, cfg, m, cell_seed(root_seed, i, j), baseline))
    if jobs == 1:
        cells = [_run_cell_safe(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell_safe, tasks))
    timings = {"cells": time.perf_counter() - t0}
    for m in methods:
        timings[m.name] = sum(c.seconds for c in cells if c.method == m.name)
    options = {"methods": [m.name for m in methods]}
    manifest = RunManifest("benchmark", tuple(inputs), config_digest(cfg), root_seed, options, timings=timings)
    return BenchmarkResult(tuple(methods), tuple(n for n, _ in scenarios), tuple(cells), manifest)


def write_benchmark(result: BenchmarkResult, out_dir: str | Path, include_timings: bool = False) -> list[Path]:
    """Write the table (CSV and text), per-cell statuses, per-cell EDLs and the manifest."""
    out = Path(out_dir)
    (out / "edls").mkdir(parents=True, exist_ok=True)
    head = result.manifest.csv_header(include_timings) + "\n"
    manifest = result.manifest.to_dict(include_timings)
    files = {
        out / "table.csv": head + result.table().to_csv(),
        out / "table.txt": result.table().to_text(),
        out / "cells.csv": head + result.cells_csv(),
        out / "manifest.json": dumps(manifest),
    }
    slugs = {m.name: m.slug for m in result.methods}
    for c in result.cells:
        if c.edl is not None:
            files[out / "edls" / f"{c.scenario}__{slugs[c.method]}.json"] = dumps(edl_to_dict(c.edl, manifest))
    for path, text in files.items():
        path.write_text(text)
    return sorted(files)
