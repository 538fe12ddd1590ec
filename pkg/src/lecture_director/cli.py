"""``lecture-director`` command line.

Every file written records the manifest (command, inputs, config hash, seed,
options, version) that produced it: as a ``"manifest"`` key in JSON outputs
and as a leading ``# manifest`` comment line in CSV outputs. Environment
variables are never consulted.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .baselines import BaselineParams, fsm, params_from_dict, randseg, ranking
from .core import EditConfig, EditError
from .detectors import DetectorParams, detect_scenario, params_to_dict, with_params
from .detectors import params_from_dict as detector_params_from_dict
from .io import (
    _read_json,
    config_digest,
    config_to_dict,
    dumps,
    edl_to_dict,
    load_config,
    load_edl,
    load_scenario,
    save_scenario,
    scenario_to_dict,
)
from .metrics import METRIC_NAMES, compare, compute_metrics, timeline_svg
from .pipeline import MODE_KEYS, RunManifest, run_pipeline, select_methods, write_benchmark
from .scoring import semantic_scores, transition_matrix
from .simgen import SIM_DETECTOR_PARAMS, NoiseLevels, generate, script_from_dict, script_to_dict, suite_scripts
from .solver import run_online

EXIT_OK, EXIT_FAILED_CELLS, EXIT_ERROR = 0, 1, 2


# --- helpers ----------------------------------------------------------------


def _config(args: argparse.Namespace, instances_per_second: float = 1.0) -> EditConfig:
    cfg = load_config(args.config) if args.config else EditConfig()
    return cfg.resolve(instances_per_second)


def _manifest(args: argparse.Namespace, inputs: Sequence[str], cfg: EditConfig | None = None,
              seed: int | None = None, **options: Any) -> RunManifest:
    return RunManifest(
        command=args.command,
        inputs=tuple(str(p) for p in inputs),
        config_hash=config_digest(cfg) if cfg is not None else "",
        seed=seed,
        options=options,
    )


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    p = Path(out)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _add_common(p: argparse.ArgumentParser, config: bool = True, seed: bool = False,
                formats: Sequence[str] | None = None, out_help: str = "output file (default: standard output)") -> None:
    if config:
        p.add_argument("--config", metavar="FILE", help="EditConfig JSON file (default: built-in defaults)")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="root random seed (default: 0)")
    p.add_argument("--out", metavar="PATH", help=out_help)
    if formats:
        p.add_argument("--format", choices=formats, default=formats[0], help=f"output format (default: {formats[0]})")


# --- subcommands ------------------------------------------------------------


def cmd_detect(args: argparse.Namespace) -> int:
    s = load_scenario(args.scenario)
    base = SIM_DETECTOR_PARAMS if args.preset == "sim" else DetectorParams()
    if args.params:
        doc = _read_json(args.params)
        if not isinstance(doc, dict):
            raise EditError(f"{args.params}: top level must be an object")
        base = detector_params_from_dict(params_to_dict(base) | doc, args.params)
    lo_hi = tuple(args.position_bounds) if args.position_bounds else None
    try:
        p = with_params(base, ar_window=args.ar_window, ar_threshold=args.ar_threshold, drop_window=args.drop_window,
                        drop_threshold=args.drop_threshold, count_min=args.count_min, position_bounds=lo_hi,
                        prob_threshold=args.prob_threshold, entropy_bins=args.entropy_bins)
    except ValueError as exc:
        raise EditError(f"invalid detector parameters: {exc}") from None
    detected = detect_scenario(s, p)
    if args.strip_features:
        detected = detected.replace_cameras(replace(c, features={}) for c in detected.cameras)
    manifest = _manifest(args, [args.scenario], detector=params_to_dict(p), preset=args.preset)
    _emit(dumps(scenario_to_dict(detected, manifest.to_dict())), args.out)
    for a, b in zip(s.cameras, detected.cameras):
        print(f"{b.id}: {int(b.indicator.sum())} marks (was {int(a.indicator.sum())})", file=sys.stderr)
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    s = load_scenario(args.scenario)
    cfg = _config(args, s.instances_per_second)
    scores = semantic_scores(s, cfg)
    manifest = _manifest(args, [args.scenario], cfg)
    if args.format == "json":
        doc = {"camera_ids": list(scores.camera_ids), "kinds": [k.value for k in scores.kinds],
               "values": scores.values, "manifest": manifest.to_dict()}
        _emit(dumps(doc), args.out)
    else:
        _emit(manifest.csv_header() + "\n" + scores.to_csv(), args.out)
    return EXIT_OK


def _look_ahead(args: argparse.Namespace, cfg: EditConfig) -> int | None:
    if args.mode == "online":
        return 1
    if args.mode == "offline":
        return None
    l = args.look_ahead if args.look_ahead is not None else cfg.look_ahead
    if l is None:
        raise EditError("--mode lookahead needs --look-ahead N (or look_ahead in the config)")
    return l


def cmd_edit(args: argparse.Namespace) -> int:
    s = load_scenario(args.scenario)
    cfg = _config(args, s.instances_per_second)
    l = _look_ahead(args, cfg)
    scores = semantic_scores(s, cfg)
    res = run_online(scores, cfg, l, args.solver)
    manifest = _manifest(args, [args.scenario], cfg, mode=args.mode, look_ahead=l, solver=args.solver)
    doc = edl_to_dict(res.to_edl(scores), manifest.to_dict()) | {"total_reward": res.total_reward}
    _emit(dumps(doc), args.out)
    # with the EDL on standard output, keep that stream valid JSON
    print(f"total_reward {res.total_reward!r}", file=sys.stdout if args.out else sys.stderr)
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace) -> int:
    s = load_scenario(args.scenario)
    cfg = _config(args, s.instances_per_second)
    doc = _read_json(args.params) if args.params else {}
    params = params_from_dict(doc, args.params or "<params>")
    if "ranking_mean" not in doc:
        params = BaselineParams(params.randseg_n, (cfg.l_min + cfg.l_max) / 2, params.ranking_std, params.fsm_spec,
                                params.rng_seed)
    if args.seed is not None:
        params = BaselineParams(params.randseg_n, params.ranking_mean, params.ranking_std, params.fsm_spec, args.seed)
    if args.method == "randseg":
        edl = randseg(s, params)
    elif args.method == "ranking":
        edl = ranking(s, semantic_scores(s, cfg), params)
    else:
        edl = fsm(s, params, cfg)
    inputs = [args.scenario] + ([args.params] if args.params else [])
    manifest = _manifest(args, inputs, cfg, params.rng_seed, method=args.method)
    _emit(dumps(edl_to_dict(edl, manifest.to_dict())), args.out)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    s = load_scenario(args.scenario)
    cfg = _config(args, s.instances_per_second)
    edl = load_edl(args.edl)
    scores = semantic_scores(s, cfg)
    rep = compute_metrics(edl, scores, transition_matrix(cfg), cfg)
    name = args.name or Path(args.edl).stem
    manifest = _manifest(args, [args.edl, args.scenario], cfg)
    metrics = rep.as_dict()
    if args.format == "csv":
        lines = [manifest.csv_header(), "name," + ",".join([*METRIC_NAMES, "T"])]
        lines.append(",".join([name] + [repr(round(float(metrics[m]), 6) + 0.0) for m in METRIC_NAMES] + [str(rep.T)]))
        _emit("\n".join(lines) + "\n", args.out)
    else:
        doc = {"name": name, "metrics": metrics, "L_avg_exact": f"{rep.L_avg.numerator}/{rep.L_avg.denominator}",
               "manifest": manifest.to_dict()}
        _emit(dumps(doc), args.out)
    if args.svg:
        svg = timeline_svg(edl, scores.camera_ids)
        _emit(f"<!-- manifest {dumps(manifest.to_dict()).strip()} -->\n" + svg, args.svg)
    return EXIT_OK


def _read_report(path: str) -> tuple[str, dict[str, float]]:
    text = Path(path).read_text()
    if path.endswith(".csv"):
        rows = list(csv.DictReader(line for line in text.splitlines() if not line.startswith("#")))
        if len(rows) != 1:
            raise EditError(f"{path}: expected one report row, found {len(rows)}")
        row = rows[0]
        try:
            return row.get("name") or Path(path).stem, {m: float(row[m]) for m in METRIC_NAMES}
        except (KeyError, ValueError) as exc:
            raise EditError(f"{path}: malformed report ({exc})") from None
    try:
        doc = json.loads(text)
        return doc.get("name") or Path(path).stem, {m: float(doc["metrics"][m]) for m in METRIC_NAMES}
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise EditError(f"{path}: malformed report ({exc})") from None


def cmd_compare(args: argparse.Namespace) -> int:
    rows = [_read_report(p) for p in args.reports]
    if args.names:
        if len(args.names) != len(rows):
            raise EditError(f"--names has {len(args.names)} entries for {len(rows)} reports")
        rows = [(n, r) for n, (_, r) in zip(args.names, rows)]
    table = compare(rows)
    manifest = _manifest(args, args.reports)
    if args.format == "csv":
        _emit(manifest.csv_header() + "\n" + table.to_csv(), args.out)
    else:
        _emit(table.to_text(), args.out)
    return EXIT_OK


def _noise(args: argparse.Namespace) -> NoiseLevels | None:
    return NoiseLevels.zero() if args.zero_noise else None


def cmd_simulate(args: argparse.Namespace) -> int:
    if bool(args.script) == bool(args.suite):
        raise EditError("give exactly one of --script FILE or --suite")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.script:
        script = script_from_dict(_read_json(args.script), args.script)
        if args.zero_noise:
            script = replace(script, noise=NoiseLevels.zero())
        jobs = [(Path(args.script).stem, script)]
        inputs, seed = [args.script], script.rng_seed
    else:
        scripts = suite_scripts(args.seed, noise=_noise(args))
        jobs = [(f"scenario_{i:02d}", sc) for i, sc in enumerate(scripts)]
        inputs, seed = [], args.seed
    manifest = _manifest(args, inputs, seed=seed, suite=bool(args.suite), zero_noise=args.zero_noise,
                         features=not args.no_features).to_dict()
    for name, script in jobs:
        s = generate(script)
        if args.no_features:
            s = s.replace_cameras(replace(c, features={}) for c in s.cameras)
        save_scenario(s, out / f"{name}.json", manifest)
        (out / "scripts").mkdir(exist_ok=True)
        (out / "scripts" / f"{name}.json").write_text(dumps(script_to_dict(script) | {"manifest": manifest}))
        print(f"wrote {out / (name + '.json')}", file=sys.stderr)
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace) -> int:
    if bool(args.scenarios) == bool(args.suite):
        raise EditError("give exactly one of --scenarios DIR or --suite")
    if args.scenarios:
        paths = sorted(Path(args.scenarios).glob("*.json"))
        if not paths:
            raise EditError(f"no scenario files in {args.scenarios}")
        scenarios = [(p.stem, load_scenario(p)) for p in paths]
        inputs = [str(p) for p in paths]
    else:
        scenarios = [(f"scenario_{i:02d}", generate(sc)) for i, sc in enumerate(suite_scripts(args.seed))]
        inputs = [f"suite:seed={args.seed}"]
    ips = {s.instances_per_second for _, s in scenarios}
    if len(ips) != 1:
        raise EditError("all benchmark scenarios must share one instances_per_second")
    cfg = _config(args, ips.pop())
    modes = args.modes.split(",") if args.modes else None
    result = run_pipeline(scenarios, cfg, select_methods(cfg, modes), args.seed, args.jobs, inputs=inputs)
    table = result.table()
    if args.out:
        write_benchmark(result, args.out, include_timings=args.timings)
    if args.format == "csv":
        sys.stdout.write(result.manifest.csv_header(args.timings) + "\n" + table.to_csv())
    else:
        sys.stdout.write(table.to_text())
    failed = [c for c in result.cells if c.status != "ok"]
    for c in failed:
        print(f"failed: {c.scenario} / {c.method}: {c.error}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_FAILED_CELLS


def cmd_default_config(args: argparse.Namespace) -> int:
    _emit(dumps(config_to_dict(EditConfig())), args.out)
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lecture-director",
        description="Semantics-driven multi-camera lecture editing.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("detect", help="recompute indicators from a scenario's feature streams")
    p.add_argument("scenario", help="scenario JSON with feature streams")
    p.add_argument("--preset", choices=("default", "sim"), default="default",
                   help="starting detector parameters: general defaults or those tuned for simulated scenarios")
    p.add_argument("--params", metavar="FILE", help="detector parameter JSON (overrides the preset)")
    p.add_argument("--ar-window", type=int, help="AR fit window (instances)")
    p.add_argument("--ar-threshold", type=float, help="AR residual threshold (multiples of sigma)")
    p.add_argument("--drop-window", type=int, help="window-drop half width (instances)")
    p.add_argument("--drop-threshold", type=float, help="window-drop threshold (default: half the series std)")
    p.add_argument("--entropy-bins", type=int, help="orientation histogram bins")
    p.add_argument("--count-min", type=int, help="minimum person count for a medium-shot mark")
    p.add_argument("--position-bounds", type=float, nargs=2, metavar=("LOW", "HIGH"), help="podium band")
    p.add_argument("--prob-threshold", type=float, help="writing probability threshold")
    p.add_argument("--strip-features", action="store_true", help="drop feature streams from the output")
    _add_common(p, config=False, out_help="output scenario JSON (default: standard output)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("score", help="semantic focus scores as a camera x instance matrix")
    p.add_argument("scenario")
    _add_common(p, formats=("csv", "json"))
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("edit", help="optimize the camera sequence and write an EDL")
    p.add_argument("scenario")
    p.add_argument("--mode", choices=("online", "lookahead", "offline"), default="offline",
                   help="online = look-ahead 1, offline = whole lecture (default: offline)")
    p.add_argument("--look-ahead", type=int, metavar="N", help="look-ahead in instances for --mode lookahead")
    p.add_argument("--solver", choices=("paper", "exact"), default="exact",
                   help="single-state DP or exact expanded-state DP (default: exact)")
    _add_common(p, out_help="output EDL JSON (default: standard output)")
    p.set_defaults(func=cmd_edit)

    p = sub.add_parser("baseline", help="produce an EDL with a comparison editor")
    p.add_argument("scenario")
    p.add_argument("--method", choices=("randseg", "ranking", "fsm"), required=True)
    p.add_argument("--params", metavar="FILE", help="baseline parameter JSON")
    p.add_argument("--seed", type=int, help="random seed (overrides rng_seed in --params)")
    _add_common(p, out_help="output EDL JSON (default: standard output)")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("evaluate", help="metrics report of an EDL")
    p.add_argument("edl")
    p.add_argument("scenario")
    p.add_argument("--name", help="row name used by compare (default: EDL file stem)")
    p.add_argument("--svg", metavar="FILE", help="also write a selection-timeline SVG")
    _add_common(p, formats=("json", "csv"))
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="tabulate several evaluate reports")
    p.add_argument("reports", nargs="+", help="report files (JSON or CSV from evaluate)")
    p.add_argument("--names", nargs="+", help="row names, one per report")
    _add_common(p, config=False, formats=("text", "csv"))
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="generate synthetic scenarios")
    p.add_argument("--script", metavar="FILE", help="event script JSON")
    p.add_argument("--suite", action="store_true", help="the 10-scenario benchmark suite")
    p.add_argument("--seed", type=int, default=0, help="suite seed (default: 0)")
    p.add_argument("--zero-noise", action="store_true", help="disable all stream noise")
    p.add_argument("--no-features", action="store_true", help="write indicators only")
    p.add_argument("--out", metavar="DIR", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("benchmark", help="all methods on all scenarios, averaged into one table")
    p.add_argument("--scenarios", metavar="DIR", help="directory of scenario JSON files")
    p.add_argument("--suite", action="store_true", help="generate the synthetic suite in memory")
    p.add_argument("--modes", metavar="LIST", help=f"comma-separated subset of {','.join(MODE_KEYS)}")
    p.add_argument("--jobs", type=int, default=1, help="concurrent (scenario, method) cells (default: 1)")
    p.add_argument("--timings", action="store_true", help="record per-stage timings in the manifest")
    _add_common(p, seed=True, formats=("text", "csv"), out_help="output directory for tables, cell EDLs and manifest")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("default-config", help="print the default EditConfig JSON")
    _add_common(p, config=False)
    p.set_defaults(func=cmd_default_config)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EditError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
