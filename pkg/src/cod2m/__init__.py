"""Cooperative multi-sensor detection: local decisions, fusion, and trainers."""

from .dataset import (
    DEFAULT_REGION_BOUNDARY,
    SENSOR_ORDER,
    Condition,
    Dataset,
    DatasetError,
    DatasetHeader,
    Sample,
    SensorKind,
    SplitCase,
    load_dataset,
    save_dataset,
    split,
)
from .estimators import FuzzyGaClassifier, NeatClassifier
from .experiment import (
    AgentConfig,
    CaseResult,
    Evaluation,
    MetricSet,
    ModelBundle,
    StudyConfig,
    TrainedAgent,
    build_agents,
    enumerate_configs,
    evaluate,
    load_results,
    load_study_config,
    report,
    run_study,
    run_unit,
    save_results,
    train_agents,
    train_models,
)
from .fusion import (
    DECISION_THRESHOLD,
    AggKind,
    BetaSet,
    OmegaMethod,
    aggregate,
    binarize,
    omega,
    system_decision,
    vote,
)
from .fuzzyga import FgaConfig, FuzzyChromosome
from .fuzzyga import evolve as fga_evolve
from .metrics import ConfusionMatrix, RocCurve, auc, confusion, rates, rmse, roc
from .models import (
    AlphaPolicy,
    FuzzySystem,
    NetGenome,
    alpha_decide,
    ann_forward,
    compile_network,
    fuzzy_infer,
    load_model,
    save_model,
    triangular_membership,
)
from .neuroevo import NeatConfig
from .neuroevo import evolve as neat_evolve
from .synthgen import GenConfig, SensorModel, Terrain, default_config, generate_dataset

__version__ = "0.1.0"

__all__ = [
    "AgentConfig",
    "AggKind",
    "AlphaPolicy",
    "BetaSet",
    "CaseResult",
    "Condition",
    "ConfusionMatrix",
    "DECISION_THRESHOLD",
    "DEFAULT_REGION_BOUNDARY",
    "Dataset",
    "DatasetError",
    "DatasetHeader",
    "Evaluation",
    "FgaConfig",
    "FuzzyChromosome",
    "FuzzyGaClassifier",
    "FuzzySystem",
    "GenConfig",
    "MetricSet",
    "ModelBundle",
    "NeatClassifier",
    "NeatConfig",
    "NetGenome",
    "OmegaMethod",
    "RocCurve",
    "SENSOR_ORDER",
    "Sample",
    "SensorKind",
    "SensorModel",
    "SplitCase",
    "StudyConfig",
    "Terrain",
    "TrainedAgent",
    "aggregate",
    "alpha_decide",
    "ann_forward",
    "auc",
    "binarize",
    "build_agents",
    "compile_network",
    "confusion",
    "default_config",
    "enumerate_configs",
    "evaluate",
    "fga_evolve",
    "fuzzy_infer",
    "generate_dataset",
    "load_dataset",
    "load_model",
    "load_results",
    "load_study_config",
    "neat_evolve",
    "omega",
    "rates",
    "report",
    "rmse",
    "roc",
    "run_study",
    "run_unit",
    "save_dataset",
    "save_model",
    "save_results",
    "split",
    "system_decision",
    "train_agents",
    "train_models",
    "triangular_membership",
    "vote",
]
