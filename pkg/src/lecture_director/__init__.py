"""Semantics-driven multi-camera lecture editing."""

from .core import (
    Camera,
    EditConfig,
    EditDecisionList,
    EditError,
    ParseError,
    Scenario,
    Segment,
    ShotKind,
    ValidationError,
    validate_scenario,
)
from .estimators import AnomalyDetector, CameraDirector, DropDetector, SemanticScorer
from .io import load_config, load_edl, load_scenario, save_config, save_edl, save_scenario
from .metrics import MetricsReport, compute_metrics
from .scoring import ScoreMatrix, build_transition_matrix, semantic_scores, transition_matrix
from .solver import SolveResult, brute_force, rescore, rescore_units, run_online, solve_exact_dp, solve_paper_dp

__version__ = "0.1.0"

__all__ = [
    "AnomalyDetector",
    "Camera",
    "CameraDirector",
    "EditConfig",
    "EditDecisionList",
    "DropDetector",
    "EditError",
    "MetricsReport",
    "ParseError",
    "Scenario",
    "ScoreMatrix",
    "Segment",
    "SemanticScorer",
    "ShotKind",
    "SolveResult",
    "ValidationError",
    "brute_force",
    "build_transition_matrix",
    "compute_metrics",
    "load_config",
    "load_edl",
    "load_scenario",
    "rescore",
    "rescore_units",
    "run_online",
    "save_config",
    "save_edl",
    "save_scenario",
    "semantic_scores",
    "solve_exact_dp",
    "solve_paper_dp",
    "transition_matrix",
    "validate_scenario",
]
