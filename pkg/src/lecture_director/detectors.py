"""Signal-level event detectors producing binary indicator vectors.

Every detector is a pure function of its input stream and
:class:`DetectorParams`. Comparisons against thresholds are strict.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Any, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from .core import Camera, EditError, ParseError, Scenario, ShotKind


@dataclass(frozen=True)
class DetectorParams:
    ar_window: int = 50
    ar_threshold: float = 4.0
    ar_sigma_floor: float = 1e-6
    entropy_bins: int = 9
    drop_window: int = 25
    drop_threshold: float | None = None  # None: half the series' standard deviation
    count_min: int = 1
    position_bounds: tuple[float, float] = (0.2, 0.8)
    prob_threshold: float = 0.5

    def __post_init__(self) -> None:
        lo, hi = self.position_bounds
        checks = [
            (self.ar_window >= 2, "ar_window must be >= 2"),
            (self.ar_threshold > 0, "ar_threshold must be > 0"),
            (self.ar_sigma_floor > 0, "ar_sigma_floor must be > 0"),
            (self.entropy_bins >= 2, "entropy_bins must be >= 2"),
            (self.drop_window >= 1, "drop_window must be >= 1"),
            (self.drop_threshold is None or self.drop_threshold > 0, "drop_threshold must be > 0"),
            (self.count_min >= 1, "count_min must be >= 1"),
            (0.0 <= lo <= hi <= 1.0, "position_bounds must satisfy 0 <= low <= high <= 1"),
            (0.0 < self.prob_threshold < 1.0, "prob_threshold must lie in (0, 1)"),
        ]
        bad = [msg for ok, msg in checks if not ok]
        if bad:
            raise ValueError("; ".join(bad))


def _grid(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 2:
        a = a[:, :, None]
    if a.ndim != 3 or a.shape[0] < 2 or a.shape[1] < 2:
        raise EditError(f"{name} must be a rows x cols [x channels] grid with rows, cols >= 2; got shape {a.shape}")
    if not np.isfinite(a).all():
        raise EditError(f"{name} has non-finite values")
    return a


def central_gradients(img: np.ndarray, axes: tuple[int, int] = (0, 1)) -> tuple[np.ndarray, np.ndarray]:
    """Central differences along ``axes`` (rows, cols) with replicated borders."""
    a = np.moveaxis(img, axes, (0, 1))
    p = np.pad(a, [(1, 1), (1, 1)] + [(0, 0)] * (a.ndim - 2), mode="edge")
    gx = (p[1:-1, 2:] - p[1:-1, :-2]) / 2.0
    gy = (p[2:, 1:-1] - p[:-2, 1:-1]) / 2.0
    return np.moveaxis(gx, (0, 1), axes), np.moveaxis(gy, (0, 1), axes)


def gradient_magnitude(img: np.ndarray, axes: tuple[int, int] = (0, 1)) -> np.ndarray:
    gx, gy = central_gradients(img, axes)
    return np.hypot(gx, gy)


def grad_diff_score(a: np.ndarray, b: np.ndarray) -> float:
    """Channel-averaged L2 norm of the difference of gradient-magnitude maps."""
    a, b = _grid(a, "a"), _grid(b, "b")
    if a.shape != b.shape:
        raise EditError(f"frame shapes differ: {a.shape} vs {b.shape}")
    if a.shape[2] not in (1, 3):
        raise EditError(f"frames must have 1 or 3 channels, got {a.shape[2]}")
    diff = gradient_magnitude(a) - gradient_magnitude(b)
    per_channel = np.sqrt((diff**2).sum(axis=(0, 1)))
    return float(per_channel.mean())


def grad_diff_series(frames: np.ndarray) -> np.ndarray:
    """Score between each frame and its predecessor; the first entry is 0."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim == 3:
        frames = frames[..., None]
    out = np.zeros(len(frames))
    if len(frames) < 2:
        return out
    if frames.ndim != 4 or frames.shape[1] < 2 or frames.shape[2] < 2 or not np.isfinite(frames).all():
        raise EditError(f"frames must be T x rows x cols x channels with finite values, got shape {frames.shape}")
    mags = gradient_magnitude(frames, axes=(1, 2))
    diff = mags[1:] - mags[:-1]
    out[1:] = np.sqrt((diff**2).sum(axis=(1, 2))).mean(axis=1)
    return out


def ar_anomaly_detect(series: Sequence[float], p: DetectorParams = DetectorParams()) -> np.ndarray:
    """Flag instances whose value departs from an order-2 autoregressive forecast.

    At each ``t >= ar_window`` the AR(2) model is least-squares fitted to the
    mean-centred window ``history[t - ar_window : t]`` and ``s[t]`` is flagged
    when ``|s[t] - forecast| > ar_threshold * max(resid_std, ar_sigma_floor)``.
    An isolated flagged value is replaced by its forecast in the history, so a
    single spike does not distort the next fits; consecutive flags are kept
    as observed so that level shifts are absorbed.
    """
    s = np.asarray(series, dtype=np.float64)
    tau = p.ar_window
    if s.ndim != 1 or len(s) <= tau:
        raise EditError(f"series of length {len(s)} is too short for ar_window={tau}")
    if not np.isfinite(s).all():
        raise EditError("series has non-finite values")
    hist = s.copy()
    out = np.zeros(len(s), dtype=np.int64)
    for t in range(tau, len(s)):
        w = hist[t - tau : t]
        m = w.mean()
        x = w - m
        X = np.column_stack([x[1:-1], x[:-2]])
        y = x[2:]
        beta, *_ = np.linalg.lstsq(X, y, rcond=None)
        sigma = max(float((y - X @ beta).std()), p.ar_sigma_floor)
        forecast = m + beta[0] * (hist[t - 1] - m) + beta[1] * (hist[t - 2] - m)
        if abs(s[t] - forecast) > p.ar_threshold * sigma:
            out[t] = 1
            if not out[t - 1]:
                hist[t] = forecast
    return out


def orientation_histogram(channel: np.ndarray, n_bins: int) -> np.ndarray:
    """Magnitude-weighted histogram of unsigned gradient orientations in [0, pi)."""
    gx, gy = central_gradients(channel)
    mag = np.hypot(gx, gy)
    theta = np.mod(np.arctan2(gy, gx), np.pi)
    bins = np.minimum((theta * n_bins / np.pi).astype(np.int64), n_bins - 1)
    return np.bincount(bins.ravel(), weights=mag.ravel(), minlength=n_bins)


def softmax_entropy(h: np.ndarray) -> float:
    """Shannon entropy (nats) of ``softmax(h)``."""
    h = np.asarray(h, dtype=np.float64)
    return float(logsumexp(h) - np.dot(softmax(h), h))


def motion_entropy_score(flow: np.ndarray, n_bins: int = 9) -> float:
    """Sum of the softmax entropies of the u- and v-channel orientation histograms."""
    f = np.asarray(flow, dtype=np.float64)
    if f.ndim != 3 or f.shape[2] != 2:
        raise EditError(f"flow must be rows x cols x 2, got shape {f.shape}")
    if f.shape[0] < 2 or f.shape[1] < 2:
        raise EditError(f"flow grid {f.shape[:2]} is smaller than 2x2")
    if not np.isfinite(f).all():
        raise EditError("flow has non-finite values")
    if n_bins < 2:
        raise EditError("need at least 2 orientation bins")
    return sum(softmax_entropy(orientation_histogram(f[:, :, ch], n_bins)) for ch in (0, 1))


def motion_entropy_series(flows: np.ndarray, n_bins: int = 9) -> np.ndarray:
    """:func:`motion_entropy_score` for every flow field in a ``(T, rows, cols, 2)`` stack."""
    f = np.asarray(flows, dtype=np.float64)
    if f.ndim != 4 or f.shape[3] != 2 or f.shape[1] < 2 or f.shape[2] < 2:
        raise EditError(f"flow stack must be T x rows x cols x 2 with rows, cols >= 2, got {f.shape}")
    if not np.isfinite(f).all():
        raise EditError("flow has non-finite values")
    T = f.shape[0]
    gx, gy = central_gradients(f, axes=(1, 2))
    mag = np.hypot(gx, gy)
    theta = np.mod(np.arctan2(gy, gx), np.pi)
    bins = np.minimum((theta * n_bins / np.pi).astype(np.int64), n_bins - 1)
    slot = (np.arange(T)[:, None, None, None] * 2 + np.arange(2)) * n_bins + bins
    h = np.bincount(slot.ravel(), weights=mag.ravel(), minlength=T * 2 * n_bins).reshape(T, 2, n_bins)
    ent = logsumexp(h, axis=-1) - (softmax(h, axis=-1) * h).sum(axis=-1)
    return ent.sum(axis=1)


def window_drop_detect(scores: Sequence[float], p: DetectorParams = DetectorParams()) -> np.ndarray:
    """Flag ``t`` when the mean of ``scores[t-w : t+1]`` is more than ``delta``
    below the mean of the preceding window ``scores[t-2w : t-w]``."""
    s = np.asarray(scores, dtype=np.float64)
    w = p.drop_window
    if s.ndim != 1 or len(s) < 2 * w:
        raise EditError(f"series of length {len(s)} is shorter than 2 * drop_window = {2 * w}")
    delta = p.drop_threshold if p.drop_threshold is not None else 0.5 * float(s.std())
    out = np.zeros(len(s), dtype=np.int64)
    if delta <= 0:
        return out  # a flat series has no drops
    csum = np.concatenate([[0.0], np.cumsum(s)])
    t = np.arange(2 * w, len(s))
    lead = (csum[t - w] - csum[t - 2 * w]) / w
    trail = (csum[t + 1] - csum[t - w]) / (w + 1)
    out[t] = (lead - trail > delta).astype(np.int64)
    return out


def count_indicator(counts: Sequence[int], p: DetectorParams = DetectorParams()) -> np.ndarray:
    c = np.asarray(counts)
    if (c < 0).any():
        raise EditError("person counts must be >= 0")
    return (c > p.count_min).astype(np.int64)


def position_indicator(positions: Sequence[float], p: DetectorParams = DetectorParams()) -> np.ndarray:
    x = np.asarray(positions, dtype=np.float64)
    if not np.isfinite(x).all():
        raise EditError("positions must be finite")
    lo, hi = p.position_bounds
    return ((x < lo) | (x > hi)).astype(np.int64)


def prob_indicator(probs: Sequence[float], p: DetectorParams = DetectorParams()) -> np.ndarray:
    x = np.asarray(probs, dtype=np.float64)
    if not ((x >= 0) & (x <= 1)).all():
        raise EditError("event probabilities must lie in [0, 1]")
    return (x > p.prob_threshold).astype(np.int64)


def detect_camera(cam: Camera, p: DetectorParams = DetectorParams()) -> np.ndarray | None:
    """Regenerate one camera's indicator from its feature streams.

    Returns ``None`` when the camera carries no stream its shot kind can use.
    """
    f = cam.features
    kind = cam.kind
    if kind in (ShotKind.LEFT_BLACKBOARD_CLOSEUP, ShotKind.RIGHT_BLACKBOARD_CLOSEUP):
        return prob_indicator(f["scalar"], p) if "scalar" in f else None
    if kind is ShotKind.SLIDE_CLOSEUP:
        if "frames" in f:
            return ar_anomaly_detect(grad_diff_series(f["frames"]), p)
        return ar_anomaly_detect(f["scalar"], p) if "scalar" in f else None
    if kind is ShotKind.STUDENT_LONG:
        if "flow" in f:
            return window_drop_detect(motion_entropy_series(f["flow"], p.entropy_bins), p)
        return window_drop_detect(f["scalar"], p) if "scalar" in f else None
    if kind in (ShotKind.LEFT_MEDIUM, ShotKind.RIGHT_MEDIUM):
        return count_indicator(f["counts"], p) if "counts" in f else None
    if kind is ShotKind.OVERVIEW_LONG:
        return position_indicator(f["positions"], p) if "positions" in f else None
    return None


def detect_scenario(s: Scenario, p: DetectorParams = DetectorParams()) -> Scenario:
    """Copy of ``s`` with indicators recomputed for every camera that has usable features."""
    cams = []
    for cam in s.cameras:
        ind = detect_camera(cam, p)
        cams.append(cam if ind is None else replace(cam, indicator=ind))
    return s.replace_cameras(cams)


def with_params(p: DetectorParams, **changes) -> DetectorParams:
    return replace(p, **{k: v for k, v in changes.items() if v is not None})


def params_from_dict(doc: Any, source: str = "<detector params>") -> DetectorParams:
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    known = {f.name for f in fields(DetectorParams)}
    unknown = set(doc) - known
    if unknown:
        raise ParseError(f"{source}: unknown fields {sorted(unknown)}")
    kw = dict(doc)
    if "position_bounds" in kw:
        kw["position_bounds"] = tuple(kw["position_bounds"])
    try:
        return DetectorParams(**kw)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{source}: {exc}") from None


def params_to_dict(p: DetectorParams) -> dict[str, Any]:
    return {f.name: getattr(p, f.name) for f in fields(DetectorParams)}
