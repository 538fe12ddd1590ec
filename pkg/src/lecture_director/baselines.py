"""Comparison editors: fixed-length random segments, greedy ranking, and a
rule-driven finite state machine."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .core import EditConfig, EditDecisionList, ParseError, Scenario, ShotKind, ValidationError
from .scoring import ScoreMatrix


@dataclass(frozen=True)
class FsmRule:
    """Enter ``target`` whenever camera ``when``'s indicator is 1."""

    when: str
    target: str


@dataclass(frozen=True)
class FsmSpec:
    """States are camera ids.

    Each instance, the first firing rule (in list order) picks the state; if
    none fires and the current state has been held for ``max_dwell`` instances,
    ``default_next`` is taken. A rule can only pull the machine out of a state
    held for at least ``min_dwell`` instances.
    """

    initial: str
    rules: tuple[FsmRule, ...] = ()
    default_next: Mapping[str, str] = field(default_factory=dict)
    max_dwell: Mapping[str, int] = field(default_factory=dict)
    min_dwell: Mapping[str, int] = field(default_factory=dict)

    def problems(self, camera_ids: Sequence[str]) -> list[str]:
        known = set(camera_ids)
        out = []
        if self.initial not in known:
            out.append(f"initial state {self.initial!r} is not a camera")
        for r in self.rules:
            for name in (r.when, r.target):
                if name not in known:
                    out.append(f"rule {r.when!r}->{r.target!r} references unknown camera {name!r}")
        for src, dst in self.default_next.items():
            if src not in known or dst not in known:
                out.append(f"default transition {src!r}->{dst!r} references an unknown camera")
        for name, table in (("max_dwell", self.max_dwell), ("min_dwell", self.min_dwell)):
            for state, v in table.items():
                if state not in known:
                    out.append(f"{name} names unknown state {state!r}")
                if v < 1:
                    out.append(f"{name}[{state}] must be >= 1")
        return out


@dataclass(frozen=True)
class BaselineParams:
    randseg_n: int = 30
    ranking_mean: float = 40.0
    ranking_std: float = 10.0
    fsm_spec: FsmSpec | None = None  # None: derived from the scenario's shot kinds
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.randseg_n < 1:
            raise ValidationError("randseg_n must be >= 1")
        if not self.ranking_mean > 0:
            raise ValidationError("ranking_mean must be > 0")
        if self.ranking_std < 0:
            raise ValidationError("ranking_std must be >= 0")

    @classmethod
    def for_config(cls, cfg: EditConfig, **kw: Any) -> BaselineParams:
        """Ranking lengths centred on the midpoint of ``[l_min, l_max]`` with std 10."""
        kw.setdefault("ranking_mean", (cfg.l_min + cfg.l_max) / 2)
        return cls(**kw)


def randseg(scenario: Scenario, params: BaselineParams) -> EditDecisionList:
    T, ids = scenario.T, scenario.camera_ids
    rng = np.random.default_rng(params.rng_seed)
    n_segs = -(-T // params.randseg_n)
    draws = rng.integers(0, len(ids), size=n_segs)
    seq = [ids[draws[t // params.randseg_n]] for t in range(T)]
    return EditDecisionList.from_sequence(seq)


def _sample_length(rng: np.random.Generator, params: BaselineParams, T: int) -> int:
    d = rng.normal(params.ranking_mean, params.ranking_std) if params.ranking_std > 0 else params.ranking_mean
    return int(min(max(round(d), 1), T))


def ranking(scenario: Scenario, scores: ScoreMatrix, params: BaselineParams) -> EditDecisionList:
    """Hold a camera for a normally distributed duration, then jump to the top-scoring one."""
    T = scenario.T
    rng = np.random.default_rng(params.rng_seed)
    best = scores.argmax_cameras()
    seq = np.empty(T, dtype=np.int64)
    t = 0
    cam = int(best[0])
    while t < T:
        cam = int(best[t])  # equals the current camera when it is still the best: keep it
        d = _sample_length(rng, params, T)
        seq[t : t + d] = cam
        t += d
    return EditDecisionList.from_sequence([scenario.camera_ids[c] for c in seq])


def default_fsm_spec(scenario: Scenario, cfg: EditConfig | None = None) -> FsmSpec:
    """A lecture-hall machine: each camera's own event pulls to it, in close-up-first
    priority; with nothing happening, cameras are cycled every ``l_max`` instances."""
    cfg = cfg or EditConfig()
    priority = [ShotKind.LEFT_BLACKBOARD_CLOSEUP, ShotKind.RIGHT_BLACKBOARD_CLOSEUP, ShotKind.SLIDE_CLOSEUP,
                ShotKind.STUDENT_LONG, ShotKind.LEFT_MEDIUM, ShotKind.RIGHT_MEDIUM, ShotKind.OVERVIEW_LONG]
    ids = scenario.camera_ids
    ordered = sorted(range(len(ids)), key=lambda i: (priority.index(scenario.cameras[i].kind), i))
    rules = tuple(FsmRule(ids[i], ids[i]) for i in ordered)
    initial = next((c.id for c in scenario.cameras if c.kind is ShotKind.SLIDE_CLOSEUP), ids[0])
    cycle = {ids[i]: ids[(i + 1) % len(ids)] for i in range(len(ids))} if len(ids) > 1 else {}
    max_dwell = {i: int(round(cfg.l_max)) for i in ids}
    min_dwell = {i: max(1, int(round(cfg.l_min / 4))) for i in ids}
    return FsmSpec(initial, rules, cycle, max_dwell, min_dwell)


def fsm(scenario: Scenario, params: BaselineParams, cfg: EditConfig | None = None) -> EditDecisionList:
    spec = params.fsm_spec or default_fsm_spec(scenario, cfg)
    ids = scenario.camera_ids
    problems = spec.problems(ids)
    if problems:
        raise ValidationError("invalid FSM spec: " + "; ".join(problems), problems)
    ind = {c.id: c.indicator for c in scenario.cameras}
    state, dwell = spec.initial, 0
    seq = []
    for t in range(scenario.T):
        wanted = next((r.target for r in spec.rules if ind[r.when][t]), None)
        nxt = state
        if wanted is not None:
            if wanted != state and dwell >= spec.min_dwell.get(state, 1):
                nxt = wanted
        elif state in spec.max_dwell and dwell >= spec.max_dwell[state] and state in spec.default_next:
            nxt = spec.default_next[state]
        if nxt != state:
            state, dwell = nxt, 0
        seq.append(state)
        dwell += 1
    return EditDecisionList.from_sequence(seq)


def fsm_spec_from_dict(doc: Mapping[str, Any], source: str = "<fsm>") -> FsmSpec:
    try:
        rules = tuple(FsmRule(str(r["when"]), str(r["target"])) for r in doc.get("rules", []))
        return FsmSpec(
            initial=str(doc["initial"]),
            rules=rules,
            default_next={str(k): str(v) for k, v in doc.get("default_next", {}).items()},
            max_dwell={str(k): int(v) for k, v in doc.get("max_dwell", {}).items()},
            min_dwell={str(k): int(v) for k, v in doc.get("min_dwell", {}).items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{source}: malformed FSM spec ({exc})") from None


def fsm_spec_to_dict(spec: FsmSpec) -> dict[str, Any]:
    return {
        "initial": spec.initial,
        "rules": [{"when": r.when, "target": r.target} for r in spec.rules],
        "default_next": dict(spec.default_next),
        "max_dwell": dict(spec.max_dwell),
        "min_dwell": dict(spec.min_dwell),
    }


_PARAM_KEYS = {"randseg_n", "ranking_mean", "ranking_std", "fsm_spec", "rng_seed"}


def params_from_dict(doc: Mapping[str, Any], source: str = "<params>") -> BaselineParams:
    if not isinstance(doc, Mapping):
        raise ParseError(f"{source}: top level must be an object")
    unknown = set(doc) - _PARAM_KEYS
    if unknown:
        raise ParseError(f"{source}: unknown fields {sorted(unknown)}")
    kw: dict[str, Any] = {k: doc[k] for k in ("randseg_n", "ranking_mean", "ranking_std", "rng_seed") if k in doc}
    if doc.get("fsm_spec") is not None:
        kw["fsm_spec"] = fsm_spec_from_dict(doc["fsm_spec"], f"{source}: fsm_spec")
    return BaselineParams(**kw)
