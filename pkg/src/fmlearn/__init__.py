"""Feature-model-guided exploration of adaptation spaces.

The package models the adaptation space of a self-adaptive system as the set
of valid configurations of a feature model, explores it with several
strategies (random, structure-guided and evolution-aware) and measures how
quickly each finds a configuration that meets a quality requirement.
"""

from .analysis import ModelDelta, conf_deg, delta
from .environment import (
    Metric,
    QualityDataset,
    Requirement,
    effective,
    load_dataset,
    sample_target,
    save_dataset,
    synthesize,
)
from .errors import (
    ConfigError,
    DatasetError,
    FmlearnError,
    InvalidConfigurationError,
    ModelVoidError,
    OracleIncompleteError,
    ProtocolError,
    StructuralError,
)
from .evolution import (
    EvolutionScenario,
    bundled_model,
    cloudrm_scenario,
    load_scenario,
    mutate,
    optional_restoration_scenario,
    save_scenario,
)
from .harness import ConvergenceReport, ExperimentConfig, run_rq1, run_rq2
from .model import (
    Configuration,
    CrossTreeConstraint,
    Feature,
    FeatureModel,
    configuration,
    enumerate_configurations,
    feature_combinations,
    leaves,
    load_model,
    parent,
    remove_subtrees,
    save_model,
    siblings,
    validate,
)
from .rng import Rng, derive_seed
from .strategies import (
    EvoContext,
    ExplorationState,
    Knowledge,
    StrategyKind,
    run_episode,
    start_episode,
)

__version__ = "0.1.0"
