"""JSON readers and writers for scenarios, configs and edit decision lists.

Serialization is canonical: keys are sorted, floats are rounded to
``FLOAT_DECIMALS`` places, and separators are fixed, so equal objects give
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .core import (
    FEATURE_KEYS,
    Camera,
    EditConfig,
    EditDecisionList,
    ParseError,
    Scenario,
    Segment,
    ShotKind,
    ValidationError,
    check_scenario,
)

FLOAT_DECIMALS = 6


def _canon(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        if obj.dtype.kind in "iub":
            return obj.astype(np.int64).tolist()
        return np.round(obj.astype(np.float64), FLOAT_DECIMALS).tolist()
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"cannot serialize non-finite number {x!r}")
        return round(x, FLOAT_DECIMALS) + 0.0  # +0.0 folds -0.0
    if isinstance(obj, ShotKind):
        return obj.value
    if isinstance(obj, Mapping):
        return {str(k.value if isinstance(k, ShotKind) else k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(_canon(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    """Canonical JSON text (sorted keys, rounded floats, trailing newline)."""
    return json.dumps(_canon(obj), sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def digest(obj: Any) -> str:
    return hashlib.sha256(dumps(obj).encode()).hexdigest()


def _read_json(path: str | Path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _write(path: str | Path, text: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _require(doc: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in doc:
        raise ParseError(f"{where}: missing required field {key!r}")
    return doc[key]


def _number(value: Any, where: str, integer: bool = False) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    if integer and not isinstance(value, int):
        raise ParseError(f"{where}: expected an integer, got {value!r}")
    return value


# --- scenario ---------------------------------------------------------------


def scenario_to_dict(s: Scenario, manifest: Mapping[str, Any] | None = None) -> dict[str, Any]:
    cams = []
    for cam in s.cameras:
        entry: dict[str, Any] = {"id": cam.id, "kind": cam.kind.value, "indicator": cam.indicator}
        if cam.features:
            entry["features"] = dict(cam.features)
        cams.append(entry)
    doc: dict[str, Any] = {"instances_per_second": float(s.instances_per_second), "T": int(s.T), "cameras": cams}
    if manifest is not None:
        doc["manifest"] = dict(manifest)
    return doc


def _array(value: Any, where: str, integer: bool) -> np.ndarray:
    try:
        arr = np.array(value, dtype=object if integer else np.float64)
    except (ValueError, TypeError):
        raise ParseError(f"{where}: ragged or non-numeric array") from None
    if integer:
        flat = arr.ravel()
        for i, v in enumerate(flat):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ParseError(f"{where}[{i}]: expected an integer, got {v!r}")
        return arr.astype(np.int64)
    return arr


def scenario_from_dict(doc: Any, source: str = "<scenario>") -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    unknown = set(doc) - {"instances_per_second", "T", "cameras", "manifest"}
    if unknown:
        raise ParseError(f"{source}: unknown fields {sorted(unknown)}")
    T = _number(_require(doc, "T", source), f"{source}: T", integer=True)
    ips = _number(doc.get("instances_per_second", 1.0), f"{source}: instances_per_second")
    raw_cams = _require(doc, "cameras", source)
    if not isinstance(raw_cams, list):
        raise ParseError(f"{source}: cameras must be a list")
    cams = []
    for i, rc in enumerate(raw_cams):
        where = f"{source}: cameras[{i}]"
        if not isinstance(rc, dict):
            raise ParseError(f"{where}: must be an object")
        extra = set(rc) - {"id", "kind", "indicator", "features"}
        if extra:
            raise ParseError(f"{where}: unknown fields {sorted(extra)}")
        cam_id = _require(rc, "id", where)
        if not isinstance(cam_id, str):
            raise ParseError(f"{where}.id: expected a string")
        try:
            kind = ShotKind.parse(_require(rc, "kind", where))
        except ValueError as exc:
            raise ParseError(f"{where}.kind: {exc}") from None
        indicator = _array(_require(rc, "indicator", where), f"{where}.indicator", integer=True)
        feats = {}
        for key, value in (rc.get("features") or {}).items():
            if key not in FEATURE_KEYS:
                raise ParseError(f"{where}.features: unknown stream {key!r}")
            feats[key] = _array(value, f"{where}.features.{key}", integer=(key == "counts"))
        cams.append(Camera(cam_id, kind, indicator, feats))
    return Scenario(T=T, cameras=tuple(cams), instances_per_second=float(ips))


def scenario_fingerprint(s: Scenario) -> str:
    """SHA-256 over the raw values of a scenario (much faster than hashing its JSON)."""
    h = hashlib.sha256()
    h.update(f"{int(s.T)}|{float(s.instances_per_second)!r}".encode())
    for cam in s.cameras:
        h.update(f"|{cam.id}|{cam.kind.value}".encode())
        h.update(np.ascontiguousarray(cam.indicator, dtype="<i8").tobytes())
        for key in sorted(cam.features):
            arr = cam.features[key]
            dtype = "<i8" if key == "counts" else "<f8"
            h.update(f"|{key}{arr.shape}".encode())
            h.update(np.ascontiguousarray(arr, dtype=dtype).tobytes())
    return h.hexdigest()


def load_scenario(path: str | Path) -> Scenario:
    return check_scenario(scenario_from_dict(_read_json(path), str(path)))


def save_scenario(s: Scenario, path: str | Path, manifest: Mapping[str, Any] | None = None) -> None:
    _write(path, dumps(scenario_to_dict(s, manifest)))


# --- config -----------------------------------------------------------------

_REQUIRED_CONFIG = (
    "weights", "defaults", "epsilon", "c_sw", "c_broll", "l_min", "l_max",
    "broll_set", "violation_sets", "lambda_e", "lambda_sw", "lambda_b",
)
_OPTIONAL_CONFIG = (
    "l_mean", "look_ahead", "initial_camera", "initial_run_length", "l_cap",
    "tie_break", "length_unit",
)


def config_to_dict(cfg: EditConfig) -> dict[str, Any]:
    return {name: getattr(cfg, name) for name in _REQUIRED_CONFIG + _OPTIONAL_CONFIG}


def config_from_dict(doc: Any, source: str = "<config>") -> EditConfig:
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    unknown = set(doc) - set(_REQUIRED_CONFIG) - set(_OPTIONAL_CONFIG)
    if unknown:
        raise ParseError(f"{source}: unknown fields {sorted(unknown)}")
    for key in _REQUIRED_CONFIG:
        _require(doc, key, source)
    kwargs: dict[str, Any] = {}
    for key in ("weights", "defaults", "violation_sets"):
        if not isinstance(doc[key], dict):
            raise ParseError(f"{source}: {key} must be an object keyed by shot kind")
    try:
        kwargs["weights"] = {ShotKind.parse(k): _number(v, f"{source}: weights.{k}") for k, v in doc["weights"].items()}
        kwargs["defaults"] = {ShotKind.parse(k): _number(v, f"{source}: defaults.{k}") for k, v in doc["defaults"].items()}
        kwargs["broll_set"] = frozenset(ShotKind.parse(k) for k in doc["broll_set"])
        kwargs["violation_sets"] = {
            ShotKind.parse(k): frozenset(ShotKind.parse(t) for t in v) for k, v in doc["violation_sets"].items()
        }
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{source}: {exc}") from None
    for key in ("epsilon", "c_sw", "c_broll", "l_min", "l_max", "lambda_e", "lambda_sw", "lambda_b"):
        kwargs[key] = float(_number(doc[key], f"{source}: {key}"))
    if doc.get("l_mean") is not None:
        kwargs["l_mean"] = float(_number(doc["l_mean"], f"{source}: l_mean"))
    for key in ("look_ahead", "l_cap", "initial_run_length"):
        if doc.get(key) is not None:
            kwargs[key] = _number(doc[key], f"{source}: {key}", integer=True)
    for key in ("initial_camera", "tie_break", "length_unit"):
        if doc.get(key) is not None:
            if not isinstance(doc[key], str):
                raise ParseError(f"{source}: {key} must be a string")
            kwargs[key] = doc[key]
    try:
        return EditConfig(**kwargs)
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}", exc.violations) from None


def load_config(path: str | Path) -> EditConfig:
    return config_from_dict(_read_json(path), str(path))


def save_config(cfg: EditConfig, path: str | Path) -> None:
    _write(path, dumps(config_to_dict(cfg)))


def config_digest(cfg: EditConfig) -> str:
    return digest(config_to_dict(cfg))


# --- edit decision list -----------------------------------------------------


def edl_to_dict(edl: EditDecisionList, manifest: Mapping[str, Any] | None = None) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "segments": [{"camera": s.camera, "start": s.start, "end": s.end} for s in edl.segments]
    }
    if manifest is not None:
        doc["manifest"] = dict(manifest)
    return doc


def edl_from_dict(doc: Any, source: str = "<edl>") -> EditDecisionList:
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object")
    unknown = set(doc) - {"segments", "manifest", "total_reward"}
    if unknown:
        raise ParseError(f"{source}: unknown fields {sorted(unknown)}")
    raw = _require(doc, "segments", source)
    if not isinstance(raw, list):
        raise ParseError(f"{source}: segments must be a list")
    segs = []
    for i, rs in enumerate(raw):
        where = f"{source}: segments[{i}]"
        if not isinstance(rs, dict):
            raise ParseError(f"{where}: must be an object")
        cam = _require(rs, "camera", where)
        if not isinstance(cam, str):
            raise ParseError(f"{where}.camera: expected a string")
        start = _number(_require(rs, "start", where), f"{where}.start", integer=True)
        end = _number(_require(rs, "end", where), f"{where}.end", integer=True)
        segs.append(Segment(cam, start, end))
    edl = EditDecisionList(tuple(segs))
    problems = edl.problems()
    if problems:
        raise ValidationError(f"{source}: invalid EDL: " + "; ".join(problems), problems)
    return edl


def load_edl(path: str | Path) -> EditDecisionList:
    return edl_from_dict(_read_json(path), str(path))


def save_edl(edl: EditDecisionList, path: str | Path, manifest: Mapping[str, Any] | None = None) -> None:
    edl.check()
    _write(path, dumps(edl_to_dict(edl, manifest)))
