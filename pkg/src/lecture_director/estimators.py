"""scikit-learn style wrappers.

Indicator data enters as an array of shape ``(T, C)`` (one row per instance,
one column per camera), the usual ``(n_samples, n_features)`` layout. The
camera kinds are a constructor parameter, so estimators can be cloned,
grid-searched and placed in pipelines like any other.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import EditConfig, ShotKind, ValidationError
from .detectors import DetectorParams, ar_anomaly_detect, window_drop_detect
from .metrics import compute_metrics
from .scoring import ScoreMatrix, transition_matrix
from .solver import run_online

_CONFIG_OVERRIDES = ("lambda_e", "lambda_sw", "lambda_b", "l_min", "l_max", "epsilon")


def check_indicators(X, n_cameras: int | None = None) -> np.ndarray:
    """Validate a ``(T, C)`` 0/1 indicator array and return it as int64."""
    X = check_array(X, dtype=None, ensure_min_samples=1)
    if not np.isin(X, (0, 1)).all():
        raise ValueError("indicator entries must be 0 or 1")
    if n_cameras is not None and X.shape[1] != n_cameras:
        raise ValueError(f"X has {X.shape[1]} columns; the estimator was fitted with {n_cameras}")
    return X.astype(np.int64)


def check_kinds(kinds: Sequence[str | ShotKind]) -> tuple[ShotKind, ...]:
    if kinds is None or len(kinds) == 0:
        raise ValueError("kinds must list one shot kind per camera column")
    return tuple(ShotKind.parse(k) for k in kinds)


def _camera_ids(kinds: Sequence[ShotKind]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for k in kinds:
        n = seen.get(k.value, 0)
        seen[k.value] = n + 1
        out.append(k.value if n == 0 else f"{k.value}{n}")
    return out


class SemanticScorer(TransformerMixin, BaseEstimator):
    """Maps indicators to semantic focus scores ``default + indicator * weight``."""

    def __init__(self, kinds: Sequence[str] = (), config: EditConfig | None = None):
        self.kinds = kinds
        self.config = config

    def fit(self, X, y=None):
        self.kinds_ = check_kinds(self.kinds)
        X = check_indicators(X)
        if X.shape[1] != len(self.kinds_):
            raise ValueError(f"X has {X.shape[1]} columns but {len(self.kinds_)} kinds were given")
        self.config_ = self.config or EditConfig()
        self.n_features_in_ = X.shape[1]
        self.default_ = np.array([self.config_.defaults[k] for k in self.kinds_])
        self.weight_ = np.array([self.config_.weights[k] for k in self.kinds_])
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self)
        X = check_indicators(X, self.n_features_in_)
        return self.default_ + X * self.weight_

    def score_matrix(self, X) -> ScoreMatrix:
        values = self.transform(X).T
        return ScoreMatrix(tuple(_camera_ids(self.kinds_)), self.kinds_, values)


class CameraDirector(BaseEstimator):
    """Picks one camera per instance by maximizing the editing objective.

    ``predict`` returns camera column indices; ``score`` returns the mean
    per-instance reward of that selection. ``look_ahead=None`` edits offline.
    Any of ``lambda_e``, ``lambda_sw``, ``lambda_b``, ``l_min``, ``l_max``,
    ``epsilon`` left as ``None`` is taken from ``config``.
    """

    def __init__(
        self,
        kinds: Sequence[str] = (),
        config: EditConfig | None = None,
        solver: str = "exact",
        look_ahead: int | None = None,
        lambda_e: float | None = None,
        lambda_sw: float | None = None,
        lambda_b: float | None = None,
        l_min: float | None = None,
        l_max: float | None = None,
        epsilon: float | None = None,
    ):
        self.kinds = kinds
        self.config = config
        self.solver = solver
        self.look_ahead = look_ahead
        self.lambda_e = lambda_e
        self.lambda_sw = lambda_sw
        self.lambda_b = lambda_b
        self.l_min = l_min
        self.l_max = l_max
        self.epsilon = epsilon

    def _resolved_config(self) -> EditConfig:
        base = self.config or EditConfig()
        changes = {k: getattr(self, k) for k in _CONFIG_OVERRIDES if getattr(self, k) is not None}
        if not changes:
            return base
        d = {f: getattr(base, f) for f in base.__dataclass_fields__}
        d.update(changes)
        try:
            return EditConfig(**d)
        except ValidationError as exc:
            raise ValueError(str(exc)) from None

    def fit(self, X, y=None):
        if self.solver not in ("paper", "exact"):
            raise ValueError(f"solver must be 'paper' or 'exact', got {self.solver!r}")
        if self.look_ahead is not None and self.look_ahead < 1:
            raise ValueError("look_ahead must be >= 1 or None")
        self.config_ = self._resolved_config()
        self.scorer_ = SemanticScorer(self.kinds, self.config_).fit(X)
        self.n_features_in_ = self.scorer_.n_features_in_
        return self

    def _solve(self, X):
        check_is_fitted(self)
        scores = self.scorer_.score_matrix(X)
        return scores, run_online(scores, self.config_, self.look_ahead, self.solver)

    def predict(self, X) -> np.ndarray:
        _, res = self._solve(X)
        return np.asarray(res.sequence, dtype=np.int64)

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).predict(X)

    def score(self, X, y=None) -> float:
        scores, res = self._solve(X)
        return res.total_reward / scores.T

    def report(self, X):
        """Full metrics report of the predicted edit."""
        scores, res = self._solve(X)
        return compute_metrics(res.to_edl(scores), scores, transition_matrix(self.config_), self.config_)


class _SeriesDetector(TransformerMixin, BaseEstimator):
    """Applies a 1-D detector to every column of a ``(T, k)`` array."""

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2)
        self.params_ = self._params()
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self)
        X = check_array(X, ensure_min_samples=2)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        return np.column_stack([self._detect(X[:, j]) for j in range(X.shape[1])])


class AnomalyDetector(_SeriesDetector):
    """Autoregressive residual detector (1 where a value breaks from its AR(2) forecast)."""

    def __init__(self, window: int = 50, threshold: float = 4.0):
        self.window = window
        self.threshold = threshold

    def _params(self) -> DetectorParams:
        return DetectorParams(ar_window=self.window, ar_threshold=self.threshold)

    def _detect(self, col: np.ndarray) -> np.ndarray:
        return ar_anomaly_detect(col, self.params_)


class DropDetector(_SeriesDetector):
    """Flags instances where the trailing window mean falls below the leading one by more than ``threshold``."""

    def __init__(self, window: int = 25, threshold: float | None = None):
        self.window = window
        self.threshold = threshold

    def _params(self) -> DetectorParams:
        return DetectorParams(drop_window=self.window, drop_threshold=self.threshold)

    def _detect(self, col: np.ndarray) -> np.ndarray:
        return window_drop_detect(col, self.params_)


__all__ = [
    "AnomalyDetector",
    "CameraDirector",
    "DropDetector",
    "SemanticScorer",
    "check_indicators",
    "check_kinds",
]
