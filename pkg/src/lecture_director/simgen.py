"""Seeded synthetic lecture scenarios.

An :class:`EventScript` lists classroom events; :func:`generate` turns it into a
seven-camera :class:`~lecture_director.core.Scenario` whose indicators mark the
events and whose feature streams are built so that the detectors, run with
:data:`SIM_DETECTOR_PARAMS`, recover those indicators:

* writing (lb/rb): writing-event probabilities, high during the event;
* slide_change (sc): slide frames whose content changes at the event start
  (only the start instant is marked);
* student_motion (sl): optical flow of a block moving upward, scaled so the
  motion entropy drops by ``SLS_DROP`` at onset and then keeps falling by
  ``SLS_SLOPE`` per instance, which the two-window detector flags throughout;
* visitor_in_ms (lm and rm): person counts of 2 instead of 1;
* presenter_off_podium (ol): presenter position outside the podium band.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .core import Camera, ParseError, Scenario, ShotKind, ValidationError
from .detectors import DetectorParams, orientation_histogram, softmax_entropy


class EventKind(str, Enum):
    WRITING_LB = "writing_lb"
    WRITING_RB = "writing_rb"
    SLIDE_CHANGE = "slide_change"
    STUDENT_MOTION = "student_motion"
    VISITOR_IN_MS = "visitor_in_ms"
    PRESENTER_OFF_PODIUM = "presenter_off_podium"


EVENT_CAMERAS: Mapping[EventKind, tuple[str, ...]] = {
    EventKind.WRITING_LB: ("lb",),
    EventKind.WRITING_RB: ("rb",),
    EventKind.SLIDE_CHANGE: ("sc",),
    EventKind.STUDENT_MOTION: ("sl",),
    EventKind.VISITOR_IN_MS: ("lm", "rm"),
    EventKind.PRESENTER_OFF_PODIUM: ("ol",),
}
CAMERA_ORDER = ("lb", "rb", "sc", "sl", "lm", "rm", "ol")

SLS_DROP = 0.1  # nats at event onset
SLS_SLOPE = 0.015  # nats per instance afterwards
SLS_MAX_DURATION = 60

SIM_DETECTOR_PARAMS = DetectorParams(
    ar_window=50,
    ar_threshold=4.0,
    entropy_bins=9,
    drop_window=2,
    drop_threshold=0.02,
    count_min=1,
    position_bounds=(0.2, 0.8),
    prob_threshold=0.5,
)


@dataclass(frozen=True)
class Event:
    kind: EventKind
    start: int
    duration: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", EventKind(self.kind))

    @property
    def end(self) -> int:
        return self.start + self.duration


@dataclass(frozen=True)
class NoiseLevels:
    frames: float = 0.02  # pixel std, slide intensities in [0, 1]
    illumination: float = 0.05  # amplitude of global brightness drift
    flow: float = 0.005  # px/instance std
    probability: float = 0.05
    position: float = 0.02  # std, and amplitude of the presenter's wander
    count_flicker: float = 0.005  # chance a person count is off by one

    @classmethod
    def zero(cls) -> NoiseLevels:
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class EventScript:
    T: int
    events: tuple[Event, ...] = ()
    noise: NoiseLevels = field(default_factory=NoiseLevels)
    rng_seed: int = 0
    grid: int = 32
    instances_per_second: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))

    def problems(self) -> list[str]:
        out = []
        if self.T < 1:
            out.append("T must be >= 1")
        if self.grid < 5:
            out.append("grid must be >= 5 (the student block needs a one-pixel border)")
        for i, ev in enumerate(self.events):
            if ev.duration < 1:
                out.append(f"events[{i}]: duration must be >= 1")
            if ev.start < 0 or ev.end > self.T:
                out.append(f"events[{i}]: [{ev.start}, {ev.end}) is outside [0, {self.T})")
            if ev.kind is EventKind.STUDENT_MOTION and ev.duration > SLS_MAX_DURATION:
                out.append(f"events[{i}]: student_motion lasts at most {SLS_MAX_DURATION} instances")
        for kind in EventKind:
            spans = sorted((e.start, e.end) for e in self.events if e.kind is kind)
            for (s0, e0), (s1, _) in zip(spans, spans[1:]):
                if s1 < e0:
                    out.append(f"overlapping {kind.value} events at {s0} and {s1}")
        for name, v in vars(self.noise).items():
            if v < 0:
                out.append(f"noise.{name} must be >= 0")
        return out


def scripted_indicators(script: EventScript) -> dict[str, np.ndarray]:
    ind = {cam: np.zeros(script.T, dtype=np.int64) for cam in CAMERA_ORDER}
    for ev in script.events:
        for cam in EVENT_CAMERAS[ev.kind]:
            if ev.kind is EventKind.SLIDE_CHANGE:
                ind[cam][ev.start] = 1
            else:
                ind[cam][ev.start : ev.end] = 1
    return ind


def _slide(rng: np.random.Generator, g: int) -> np.ndarray:
    """A light page with a few dark text bars."""
    img = np.full((g, g), 0.9)
    for _ in range(int(rng.integers(2, 5))):
        r = int(rng.integers(1, g - 2))
        c0 = int(rng.integers(1, g // 2))
        c1 = int(rng.integers(c0 + 2, g))
        img[r : r + 1 + int(rng.integers(0, 2)), c0:c1] = 0.1 + 0.2 * rng.random()
    return img


def _slide_frames(script: EventScript, rng: np.random.Generator) -> np.ndarray:
    T, g, nz = script.T, script.grid, script.noise
    changes = sorted(e.start for e in script.events if e.kind is EventKind.SLIDE_CHANGE)
    page = _slide(rng, g)
    pages = np.empty((T, g, g))
    ci = 0
    for t in range(T):
        while ci < len(changes) and changes[ci] == t:
            new = _slide(rng, g)
            while np.array_equal(new, page):
                new = _slide(rng, g)
            page = new
            ci += 1
        pages[t] = page
    drift = nz.illumination * np.sin(np.linspace(0, 6 * np.pi, T) + rng.uniform(0, 2 * np.pi))
    frames = pages + drift[:, None, None] + nz.frames * rng.standard_normal((T, g, g))
    return frames[..., None]


def _student_pattern(g: int, rng: np.random.Generator) -> np.ndarray:
    """Unit upward flow over one student-sized block."""
    h, w = max(2, g * 3 // 8), max(2, g * 3 // 8)
    r = int(rng.integers(1, g - h - 1))
    c = int(rng.integers(1, g - w - 1))
    pat = np.zeros((g, g, 2))
    pat[r : r + h, c : c + w, 1] = -1.0
    return pat


def _scale_for_entropy(hist: np.ndarray, n_bins: int, target: float) -> float:
    """Amplitude ``a`` with ``ln(n) + H(softmax(a * hist)) == target``."""
    base = np.log(n_bins)
    f = lambda a: base + softmax_entropy(a * hist) - target  # noqa: E731
    hi = 1.0
    while f(hi) > 0:
        hi *= 2
        if hi > 1e6:
            raise ValidationError(f"motion entropy {target} is below what the flow pattern can reach")
    return brentq(f, 0.0, hi, xtol=1e-13, rtol=1e-13)


def _student_flow(script: EventScript, rng: np.random.Generator, n_bins: int) -> np.ndarray:
    T, g = script.T, script.grid
    flow = np.zeros((T, g, g, 2))
    top = 2 * np.log(n_bins)
    for ev in sorted((e for e in script.events if e.kind is EventKind.STUDENT_MOTION), key=lambda e: e.start):
        pat = _student_pattern(g, rng)
        hist = orientation_histogram(pat[:, :, 1], n_bins)
        for j in range(ev.duration):
            a = _scale_for_entropy(hist, n_bins, top - SLS_DROP - SLS_SLOPE * j)
            flow[ev.start + j] = a * pat
    return flow + script.noise.flow * rng.standard_normal(flow.shape)


def _probabilities(script: EventScript, ind: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    p = np.where(ind == 1, 0.9, 0.1) + script.noise.probability * rng.standard_normal(script.T)
    return np.clip(p, 0.0, 1.0)


def _counts(script: EventScript, ind: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    counts = np.where(ind == 1, 2, 1)
    flicker = rng.random(script.T) < script.noise.count_flicker
    step = rng.choice([-1, 1], size=script.T)
    return np.maximum(counts + flicker * step, 0).astype(np.int64)


def _positions(script: EventScript, ind: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    T, nz = script.T, script.noise
    wander = nz.position * 3 * np.sin(np.linspace(0, 8 * np.pi, T) + rng.uniform(0, 2 * np.pi))
    pos = 0.5 + wander
    for ev in script.events:
        if ev.kind is EventKind.PRESENTER_OFF_PODIUM:
            pos[ev.start : ev.end] = 0.9 if rng.random() < 0.5 else 0.1
    return np.clip(pos + nz.position * rng.standard_normal(T), 0.0, 1.0)


def generate(script: EventScript) -> Scenario:
    problems = script.problems()
    if problems:
        raise ValidationError("invalid event script: " + "; ".join(problems), problems)
    rng = np.random.default_rng(script.rng_seed)
    ind = scripted_indicators(script)
    feats: dict[str, dict[str, np.ndarray]] = {
        "lb": {"scalar": _probabilities(script, ind["lb"], rng)},
        "rb": {"scalar": _probabilities(script, ind["rb"], rng)},
        "sc": {"frames": _slide_frames(script, rng)},
        "sl": {"flow": _student_flow(script, rng, SIM_DETECTOR_PARAMS.entropy_bins)},
        "lm": {"counts": _counts(script, ind["lm"], rng)},
        "rm": {"counts": _counts(script, ind["rm"], rng)},
        "ol": {"positions": _positions(script, ind["ol"], rng)},
    }
    cams = tuple(Camera(cid, ShotKind(cid), ind[cid], feats[cid]) for cid in CAMERA_ORDER)
    return Scenario(T=script.T, cameras=cams, instances_per_second=script.instances_per_second)


def mark_agreement(scripted: Sequence[int], detected: Sequence[int], tol: int = 2) -> tuple[float, float]:
    """(recall, precision) of marks, matching marks up to ``tol`` instances apart.

    Empty sides count as fully matched.
    """
    a = np.flatnonzero(np.asarray(scripted))
    b = np.flatnonzero(np.asarray(detected))

    def covered(src: np.ndarray, ref: np.ndarray) -> float:
        if src.size == 0:
            return 1.0
        if ref.size == 0:
            return 0.0
        pos = np.searchsorted(ref, src)
        left = np.abs(src - ref[np.clip(pos - 1, 0, ref.size - 1)])
        right = np.abs(ref[np.clip(pos, 0, ref.size - 1)] - src)
        return float(np.mean(np.minimum(left, right) <= tol))

    return covered(a, b), covered(b, a)


# --- benchmark suite --------------------------------------------------------

SUITE_T = 3000
SUITE_SIZE = 10
SUITE_GRID = 16
# kind -> ((min count, max count), (min duration, max duration), min gap between same-kind events)
SUITE_EVENT_RANGES: Mapping[EventKind, tuple[tuple[int, int], tuple[int, int], int]] = {
    EventKind.WRITING_LB: ((8, 20), (20, 120), 10),
    EventKind.WRITING_RB: ((8, 20), (20, 120), 10),
    EventKind.SLIDE_CHANGE: ((15, 40), (1, 1), 10),
    EventKind.STUDENT_MOTION: ((3, 8), (8, SLS_MAX_DURATION), 10),
    EventKind.VISITOR_IN_MS: ((2, 6), (10, 60), 10),
    EventKind.PRESENTER_OFF_PODIUM: ((3, 10), (5, 40), 10),
}
SUITE_MARGIN = 60  # no events before this instance (the slide detector needs history)


def _place(rng: np.random.Generator, kind: EventKind, T: int) -> list[Event]:
    (n_lo, n_hi), (d_lo, d_hi), gap = SUITE_EVENT_RANGES[kind]
    n = int(rng.integers(n_lo, n_hi + 1))
    durations = rng.integers(d_lo, d_hi + 1, size=n)
    slack = T - 2 * SUITE_MARGIN - int(durations.sum()) - gap * n
    if slack < 0:
        raise ValidationError(f"cannot fit {n} {kind.value} events into T={T}")
    offsets = np.sort(rng.integers(0, slack + 1, size=n))
    events, cursor = [], SUITE_MARGIN
    for off, d in zip(offsets, durations):
        start = cursor + int(off)
        events.append(Event(kind, start, int(d)))
        cursor += int(d) + gap
    return events


def suite_scripts(seed: int, T: int = SUITE_T, n: int = SUITE_SIZE, grid: int = SUITE_GRID,
                  noise: NoiseLevels | None = None) -> list[EventScript]:
    noise = NoiseLevels() if noise is None else noise
    scripts = []
    for child in np.random.SeedSequence(seed).spawn(n):
        rng = np.random.default_rng(child)
        events = [ev for kind in EventKind for ev in _place(rng, kind, T)]
        events.sort(key=lambda e: (e.start, e.kind.value))
        scripts.append(EventScript(T, tuple(events), noise, int(rng.integers(0, 2**31 - 1)), grid))
    return scripts


def benchmark_suite(seed: int, noise: NoiseLevels | None = None, **kw: Any) -> list[Scenario]:
    """Ten seeded 3000-instance scenarios with event counts drawn from ``SUITE_EVENT_RANGES``."""
    return [generate(s) for s in suite_scripts(seed, noise=noise, **kw)]


# --- script files -----------------------------------------------------------


def script_to_dict(script: EventScript) -> dict[str, Any]:
    return {
        "T": script.T,
        "events": [{"kind": e.kind.value, "start": e.start, "duration": e.duration} for e in script.events],
        "noise": dict(vars(script.noise)),
        "rng_seed": script.rng_seed,
        "grid": script.grid,
        "instances_per_second": script.instances_per_second,
    }


def script_from_dict(doc: Mapping[str, Any], source: str = "<script>") -> EventScript:
    if not isinstance(doc, Mapping):
        raise ParseError(f"{source}: top level must be an object")
    unknown = set(doc) - {"T", "events", "noise", "rng_seed", "grid", "instances_per_second", "manifest"}
    if unknown:
        raise ParseError(f"{source}: unknown fields {sorted(unknown)}")
    try:
        events = tuple(Event(EventKind(e["kind"]), int(e["start"]), int(e.get("duration", 1)))
                       for e in doc.get("events", []))
        noise = NoiseLevels()
        if "noise" in doc:
            noise = replace(noise, **{k: float(v) for k, v in doc["noise"].items()})
        return EventScript(
            T=int(doc["T"]),
            events=events,
            noise=noise,
            rng_seed=int(doc.get("rng_seed", 0)),
            grid=int(doc.get("grid", 32)),
            instances_per_second=float(doc.get("instances_per_second", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{source}: {exc}") from None
