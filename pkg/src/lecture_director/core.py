"""Domain types shared by every stage of the editing pipeline.

Time is measured in abstract *instances* (frames or clips). A scenario
carries ``instances_per_second`` so that lengths configured in seconds can
be mapped onto the instance grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


class EditError(Exception):
    """Base class for errors raised by this package."""


class ParseError(EditError, ValueError):
    """A file could not be parsed; the message carries line/field context."""


class ValidationError(EditError, ValueError):
    """An object violates one of its invariants."""

    def __init__(self, message: str, violations: Sequence[Any] = ()):
        super().__init__(message)
        self.violations = list(violations)


class ShotKind(str, Enum):
    LEFT_BLACKBOARD_CLOSEUP = "lb"
    RIGHT_BLACKBOARD_CLOSEUP = "rb"
    SLIDE_CLOSEUP = "sc"
    STUDENT_LONG = "sl"
    LEFT_MEDIUM = "lm"
    RIGHT_MEDIUM = "rm"
    OVERVIEW_LONG = "ol"

    @classmethod
    def parse(cls, value: str | ShotKind) -> ShotKind:
        if isinstance(value, ShotKind):
            return value
        try:
            return cls(value)
        except ValueError:
            names = "|".join(k.value for k in cls)
            raise ValueError(f"unknown shot kind {value!r} (expected one of {names})") from None

    def __str__(self) -> str:
        return self.value


LB, RB, SC, SL, LM, RM, OL = (
    ShotKind.LEFT_BLACKBOARD_CLOSEUP,
    ShotKind.RIGHT_BLACKBOARD_CLOSEUP,
    ShotKind.SLIDE_CLOSEUP,
    ShotKind.STUDENT_LONG,
    ShotKind.LEFT_MEDIUM,
    ShotKind.RIGHT_MEDIUM,
    ShotKind.OVERVIEW_LONG,
)

# Close-ups and the insert shots a long-held view may cut away to.
CLOSE_UPS = frozenset({LB, RB, SC})
DEFAULT_BROLL = frozenset({SL, OL, SC})

# The blackboard close-ups share a value, so the two plausible orderings of the
# published vector give the same per-kind assignment.
DEFAULT_WEIGHTS: Mapping[ShotKind, float] = MappingProxyType(
    {LB: 0.8, RB: 0.8, SC: 1.0, SL: 0.4, LM: 0.6, RM: 0.6, OL: 0.2}
)
DEFAULT_SCORES: Mapping[ShotKind, float] = DEFAULT_WEIGHTS

# Blackboard close-up <-> blackboard close-up crosses the line of action;
# close-up <-> student long skips the medium shot in the order of shot sizes.
DEFAULT_VIOLATIONS: Mapping[ShotKind, frozenset[ShotKind]] = MappingProxyType(
    {
        LB: frozenset({RB, SL}),
        RB: frozenset({LB, SL}),
        SC: frozenset({SL}),
        SL: frozenset({LB, RB, SC}),
        LM: frozenset(),
        RM: frozenset(),
        OL: frozenset(),
    }
)

FEATURE_KEYS = ("frames", "flow", "scalar", "counts", "positions")


def _frozen_array(values: Any, dtype: Any) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Camera:
    """One synchronized stream: its id, shot kind, indicator and raw features.

    Construction does not enforce invariants; :func:`validate_scenario` reports
    them so that malformed inputs can be inspected instead of rejected blindly.
    """

    id: str
    kind: ShotKind
    indicator: np.ndarray
    features: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ShotKind.parse(self.kind))
        object.__setattr__(self, "indicator", _frozen_array(self.indicator, np.int64))
        feats = {}
        for key, value in dict(self.features).items():
            dtype = np.int64 if key == "counts" else np.float64
            feats[key] = _frozen_array(value, dtype)
        object.__setattr__(self, "features", MappingProxyType(feats))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Camera):
            return NotImplemented
        return (
            self.id == other.id
            and self.kind == other.kind
            and np.array_equal(self.indicator, other.indicator)
            and self.features.keys() == other.features.keys()
            and all(
                self.features[k].shape == other.features[k].shape
                and np.array_equal(self.features[k], other.features[k])
                for k in self.features
            )
        )

    def __reduce__(self):
        return (Camera, (self.id, self.kind, self.indicator, dict(self.features)))

    def with_indicator(self, indicator: Iterable[int]) -> Camera:
        return replace(self, indicator=np.fromiter(indicator, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class Scenario:
    T: int
    cameras: tuple[Camera, ...]
    instances_per_second: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "cameras", tuple(self.cameras))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.T == other.T
            and self.instances_per_second == other.instances_per_second
            and self.cameras == other.cameras
        )

    @property
    def n_cameras(self) -> int:
        return len(self.cameras)

    @property
    def camera_ids(self) -> list[str]:
        return [c.id for c in self.cameras]

    @property
    def kinds(self) -> list[ShotKind]:
        return [c.kind for c in self.cameras]

    def indicator_matrix(self) -> np.ndarray:
        """Indicators stacked as a ``(C, T)`` integer array."""
        return np.vstack([c.indicator for c in self.cameras])

    def index_of(self, camera_id: str) -> int:
        for i, cam in enumerate(self.cameras):
            if cam.id == camera_id:
                return i
        raise KeyError(f"no camera with id {camera_id!r}")

    def camera(self, camera_id: str) -> Camera:
        return self.cameras[self.index_of(camera_id)]

    def replace_cameras(self, cameras: Iterable[Camera]) -> Scenario:
        return replace(self, cameras=tuple(cameras))


@dataclass(frozen=True)
class Violation:
    camera: str | None
    t: int | None
    message: str

    def __str__(self) -> str:
        where = []
        if self.camera is not None:
            where.append(f"camera {self.camera!r}")
        if self.t is not None:
            where.append(f"t={self.t}")
        prefix = ", ".join(where)
        return f"{prefix}: {self.message}" if prefix else self.message


def validate_scenario(s: Scenario) -> list[Violation]:
    """Return every invariant breach in ``s``; an empty list means valid.

    Never raises on a structurally loaded scenario.
    """
    out: list[Violation] = []
    if not isinstance(s.T, (int, np.integer)) or isinstance(s.T, bool) or s.T < 1:
        out.append(Violation(None, None, f"T must be an integer >= 1, got {s.T!r}"))
        return out
    ips = s.instances_per_second
    if not (isinstance(ips, (int, float)) and math.isfinite(ips) and ips > 0):
        out.append(Violation(None, None, f"instances_per_second must be > 0, got {ips!r}"))
    if len(s.cameras) == 0:
        out.append(Violation(None, None, "scenario has no cameras"))
    seen: set[str] = set()
    for cam in s.cameras:
        if cam.id in seen:
            out.append(Violation(cam.id, None, "duplicate camera id"))
        seen.add(cam.id)
        ind = cam.indicator
        if ind.ndim != 1 or ind.shape[0] != s.T:
            out.append(Violation(cam.id, None, f"indicator length {ind.size} != T={s.T}"))
        bad = np.flatnonzero((ind.ravel() != 0) & (ind.ravel() != 1))
        for t in bad:
            out.append(Violation(cam.id, int(t), f"indicator entry {int(ind.ravel()[t])} not in {{0, 1}}"))
        for key, arr in cam.features.items():
            if key not in FEATURE_KEYS:
                out.append(Violation(cam.id, None, f"unknown feature stream {key!r}"))
                continue
            if arr.ndim == 0 or arr.shape[0] != s.T:
                n = arr.shape[0] if arr.ndim else 0
                out.append(Violation(cam.id, None, f"feature {key!r} has {n} entries, expected T={s.T}"))
                continue
            expected_ndim = {"frames": 4, "flow": 4}.get(key, 1)
            if arr.ndim != expected_ndim:
                out.append(Violation(cam.id, None, f"feature {key!r} has {arr.ndim} dims, expected {expected_ndim}"))
            elif key == "flow" and arr.shape[-1] != 2:
                out.append(Violation(cam.id, None, "flow grids must have 2 channels"))
            elif key == "frames" and arr.shape[-1] not in (1, 3):
                out.append(Violation(cam.id, None, "frame grids must have 1 or 3 channels"))
            nonfinite = np.flatnonzero(~np.isfinite(arr.reshape(arr.shape[0], -1)).all(axis=1))
            if nonfinite.size:
                out.append(Violation(cam.id, int(nonfinite[0]), f"feature {key!r} has non-finite values"))
    return out


def check_scenario(s: Scenario) -> Scenario:
    violations = validate_scenario(s)
    if violations:
        head = "; ".join(str(v) for v in violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        raise ValidationError(f"invalid scenario: {head}{more}", violations)
    return s


def _freeze_kind_map(m: Mapping[Any, float]) -> Mapping[ShotKind, float]:
    return MappingProxyType({ShotKind.parse(k): float(v) for k, v in m.items()})


@dataclass(frozen=True)
class EditConfig:
    """Scoring weights, rule parameters and solver options.

    Lengths (``l_min``, ``l_max``, ``l_mean``, ``look_ahead``, ``l_cap``) are in
    instances unless ``length_unit == "seconds"``; call :meth:`resolve` with
    the scenario's rate before use.
    """

    weights: Mapping[ShotKind, float] = DEFAULT_WEIGHTS
    defaults: Mapping[ShotKind, float] = DEFAULT_SCORES
    epsilon: float = 1.0
    c_sw: float = 1.0
    c_broll: float = 1.0
    l_min: float = 20.0
    l_max: float = 60.0
    l_mean: float | None = None
    broll_set: frozenset[ShotKind] = DEFAULT_BROLL
    violation_sets: Mapping[ShotKind, frozenset[ShotKind]] = DEFAULT_VIOLATIONS
    lambda_e: float = 0.3
    lambda_sw: float = 0.4
    lambda_b: float = 0.3
    look_ahead: int | None = None  # None means unbounded (offline)
    initial_camera: str | None = None
    initial_run_length: int = 1
    l_cap: int | None = None
    tie_break: str = "lowest_index"
    length_unit: str = "instances"

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _freeze_kind_map(self.weights))
        object.__setattr__(self, "defaults", _freeze_kind_map(self.defaults))
        object.__setattr__(self, "broll_set", frozenset(ShotKind.parse(k) for k in self.broll_set))
        viol = {k: frozenset() for k in ShotKind}
        for k, targets in self.violation_sets.items():
            viol[ShotKind.parse(k)] = frozenset(ShotKind.parse(t) for t in targets)
        object.__setattr__(self, "violation_sets", MappingProxyType(viol))
        problems = self.problems()
        if problems:
            raise ValidationError("invalid config: " + "; ".join(problems), problems)

    def __reduce__(self):
        args = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, MappingProxyType):
                v = dict(v)
            args.append(v)
        return (EditConfig, tuple(args))

    def problems(self) -> list[str]:
        out = []
        for name in ("weights", "defaults"):
            m = getattr(self, name)
            missing = [k.value for k in ShotKind if k not in m]
            if missing:
                out.append(f"{name} missing kinds {missing}")
            for k, v in m.items():
                if not (math.isfinite(v) and v >= 0):
                    out.append(f"{name}[{k.value}] must be finite and >= 0")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            out.append("epsilon must be > 0")
        for name in ("c_sw", "c_broll", "lambda_e", "lambda_sw", "lambda_b"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                out.append(f"{name} must be finite and >= 0")
        if not (0 < self.l_min < self.l_max and math.isfinite(self.l_max)):
            out.append("require 0 < l_min < l_max")
        if self.l_mean is not None and not (math.isfinite(self.l_mean) and self.l_mean > 0):
            out.append("l_mean must be > 0")
        if self.look_ahead is not None and self.look_ahead < 1:
            out.append("look_ahead must be >= 1 or null")
        if self.initial_run_length < 1:
            out.append("initial_run_length must be >= 1")
        if self.tie_break != "lowest_index":
            out.append(f"unsupported tie_break {self.tie_break!r}")
        if self.length_unit not in ("instances", "seconds"):
            out.append("length_unit must be 'instances' or 'seconds'")
        return out

    @property
    def mean_length(self) -> float:
        return self.l_mean if self.l_mean is not None else (self.l_min + self.l_max) / 2

    @property
    def cap_length(self) -> int:
        if self.l_cap is not None:
            return int(self.l_cap)
        return int(math.ceil(self.l_max)) + 40

    def resolve(self, instances_per_second: float = 1.0) -> EditConfig:
        """Return a copy with all lengths expressed in instances."""
        if self.length_unit == "instances":
            return self
        r = instances_per_second
        return replace(
            self,
            l_min=self.l_min * r,
            l_max=self.l_max * r,
            l_mean=None if self.l_mean is None else self.l_mean * r,
            look_ahead=None if self.look_ahead is None else max(1, round(self.look_ahead * r)),
            l_cap=None if self.l_cap is None else int(math.ceil(self.l_cap * r)),
            length_unit="instances",
        )


@dataclass(frozen=True)
class Segment:
    camera: str
    start: int
    end: int  # exclusive

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class EditDecisionList:
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))

    @classmethod
    def from_sequence(cls, cameras: Sequence[str]) -> EditDecisionList:
        """Run-length encode a per-instance camera sequence."""
        segs: list[Segment] = []
        start = 0
        for t in range(1, len(cameras) + 1):
            if t == len(cameras) or cameras[t] != cameras[start]:
                segs.append(Segment(str(cameras[start]), start, t))
                start = t
        return cls(tuple(segs))

    def to_sequence(self) -> list[str]:
        out: list[str] = []
        for seg in self.segments:
            out.extend([seg.camera] * seg.length)
        return out

    @property
    def T(self) -> int:
        return self.segments[-1].end if self.segments else 0

    @property
    def n_cuts(self) -> int:
        return max(len(self.segments) - 1, 0)

    def problems(self, T: int | None = None) -> list[str]:
        out = []
        if not self.segments:
            return ["EDL has no segments"]
        expected = 0
        for i, seg in enumerate(self.segments):
            if seg.start != expected:
                kind = "overlap" if seg.start < expected else "gap"
                out.append(f"segments[{i}] starts at {seg.start}, expected {expected} ({kind})")
            if seg.end <= seg.start:
                out.append(f"segments[{i}] is empty or reversed ({seg.start}, {seg.end})")
            if i and seg.camera == self.segments[i - 1].camera:
                out.append(f"segments[{i}] repeats camera {seg.camera!r} of the previous segment")
            expected = seg.end
        if T is not None and expected != T:
            out.append(f"EDL covers [0, {expected}) but the timeline has T={T}")
        return out

    def check(self, T: int | None = None, camera_ids: Iterable[str] | None = None) -> EditDecisionList:
        problems = self.problems(T)
        if camera_ids is not None:
            known = set(camera_ids)
            problems += [f"unknown camera {s.camera!r}" for s in self.segments if s.camera not in known]
        if problems:
            raise ValidationError("invalid EDL: " + "; ".join(problems), problems)
        return self
