"""
Configuration loader with environment variable and command-line overrides.
"""

import copy
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import yaml
from dotenv import load_dotenv

from ..corpus.io import FORMATS
from ..corpus.models import CorpusError, TagsetVariant
from ..eval.experiment import DICTIONARY_SCOPES, ExperimentSpec
from ..eval.folds import Granularity
from ..features.ngrams import FeatureConfigError, NGramSpec
from ..features.tokenizer import MarkupMode
from ..features.vectorizer import ContextKind, ContextMode, FeatureConfig
from ..svm.solver import SolverParams
from .validator import ConfigValidator, ValidationError

logger = logging.getLogger(__name__)

EXPERIMENT_KINDS = ("influence", "cascade")


class ConfigurationError(Exception):
    """Raised when configuration is invalid or missing required values."""

    pass


# Default configuration values
DEFAULT_CONFIG: Dict[str, Any] = {
    "seed": None,  # Must be provided for any run
    "jobs": 1,
    "corpus": {
        "root": None,
        "paths": [],
        "format": "switchboard",  # switchboard, lego, dialogbank, segments
        "variant": None,  # SWDA44..SWDA41; None keeps the parsed variant
        "mapping": None,  # LEGO label mapping; None uses the bundled one
        "target_speakers": None,
    },
    "features": {
        "markup": "split",  # 'split' or 'atomic'
        "ngram_max": 2,
        "cumulative": True,
        "dictionary": "fold",  # 'fold' or 'global'
    },
    "solver": {
        "cost": 0.1,
        "stop_tol": 0.01,
        "max_epochs": 1000,
        "bias": 1.0,
    },
    "experiment": {
        "kind": "influence",
        "context_modes": ["untagged", "tagged", "labels"],
        "n_prev": [0, 1, 2, 3, 4, 5],
        "folds": 10,
        "granularity": "dialog",
    },
    "output": {"dir": "results"},
    "logging": {"level": "INFO", "format": "text", "file": None},  # 'text' or 'json'
}


def as_list(value: Any) -> list:
    """A YAML list, a comma-separated string or None as a list."""
    if value is None:
        return []
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return list(value)


def _deep_merge(base: Dict[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(base.get(key), dict):
            _deep_merge(base[key], value)
        else:
            base[key] = value
    return base


class ConfigLoader:
    """
    Configuration loader that:
    1. Starts from DEFAULT_CONFIG
    2. Merges the YAML configuration file
    3. Overrides with environment variables
    4. Overrides with command-line values (dot paths)
    5. Validates the result
    """

    # Environment variable mappings to config paths
    ENV_MAPPINGS = {
        "DACT_CORPUS_ROOT": "corpus.root",
        "DACT_SEED": "seed",
        "DACT_JOBS": "jobs",
        "DACT_OUTPUT_DIR": "output.dir",
        "LOG_LEVEL": "logging.level",
        "LOG_FORMAT": "logging.format",
    }

    def __init__(
        self,
        config_path: Optional[str] = None,
        env_file: Optional[str] = None,
        overrides: Optional[Mapping[str, Any]] = None,
    ):
        """
        Initialize configuration loader.

        Args:
            config_path: Path to YAML configuration file
            env_file: Path to .env file (defaults to .env in current directory)
            overrides: Dot-path settings from the command line, applied last
        """
        if env_file:
            load_dotenv(env_file)
        else:
            load_dotenv()

        self.config_path = config_path
        self.config = _deep_merge(copy.deepcopy(DEFAULT_CONFIG), self._load_base_config(config_path))

        self._override_with_env()

        for key_path, value in (overrides or {}).items():
            if value is not None:
                self._set_nested_value(key_path, value)

        self._validate_config()

    def _load_base_config(self, config_path: Optional[str]) -> Dict[str, Any]:
        """Load base configuration from YAML file."""
        if config_path and not Path(config_path).exists():
            raise ConfigurationError(f"Configuration file not found: {config_path}")

        if not config_path:
            # Try default locations
            for path in ["config.yaml", "config/config.yaml"]:
                if Path(path).exists():
                    config_path = path
                    break

        if not config_path:
            return {}

        try:
            with open(config_path, "r", encoding="utf-8") as f:
                config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML in {config_path}: {e}")
        if not isinstance(config, dict):
            raise ConfigurationError(f"{config_path} must contain a mapping at top level")
        self.config_path = config_path
        return config

    def _override_with_env(self):
        """Override configuration values with environment variables."""
        for env_key, config_path in self.ENV_MAPPINGS.items():
            value = os.getenv(env_key)
            if value is not None:
                self._set_nested_value(config_path, self._convert_env_value(value))

    @staticmethod
    def _convert_env_value(value: str) -> Any:
        """Convert environment variable string to appropriate type."""
        # Numbers first: DACT_JOBS=1 is a count, not a flag
        if value.lstrip("-").isdigit():
            return int(value)

        if value.lower() in ("true", "yes", "on"):
            return True
        elif value.lower() in ("false", "no", "off"):
            return False

        try:
            return float(value)
        except ValueError:
            pass

        return value

    def _validate_config(self):
        """Validate configuration values; raises ConfigurationError."""
        v = ConfigValidator
        try:
            seed = self.get("seed")
            if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
                raise ValidationError(f"Seed must be an integer, got: {seed}")
            v.validate_positive(self.get("jobs"), "jobs", integer=True)

            v.validate_choice(self.get("corpus.format"), FORMATS, "corpus.format")
            variant = self.get("corpus.variant")
            if variant is not None:
                TagsetVariant.parse(str(variant))

            v.validate_choice(self.get("features.markup"), [m.value for m in MarkupMode], "features.markup")
            NGramSpec(int(self.get("features.ngram_max")), bool(self.get("features.cumulative")))
            v.validate_choice(self.get("features.dictionary"), DICTIONARY_SCOPES, "features.dictionary")

            v.validate_cost(self.get("solver.cost"))
            v.validate_positive(self.get("solver.stop_tol"), "solver.stop_tol")
            v.validate_positive(self.get("solver.max_epochs"), "solver.max_epochs", integer=True)
            if float(self.get("solver.bias")) < 0:
                raise ValidationError("solver.bias cannot be negative")

            v.validate_choice(self.get("experiment.kind"), EXPERIMENT_KINDS, "experiment.kind")
            for name in as_list(self.get("experiment.context_modes")):
                ContextMode.parse(name)
            v.validate_n_prev(self.get("experiment.n_prev"))
            v.validate_folds(self.get("experiment.folds"))
            v.validate_choice(self.get("experiment.granularity"), [g.value for g in Granularity], "experiment.granularity")

            v.validate_log_level(self.get("logging.level"))
            v.validate_log_format(self.get("logging.format"))
        except (ValidationError, CorpusError, FeatureConfigError, TypeError, ValueError) as e:
            raise ConfigurationError(str(e))

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation.

        Args:
            key_path: Dot-separated path (e.g., 'solver.cost')
            default: Default value if key not found
        """
        keys = key_path.split(".")
        value = self.config

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default

        return value

    def _set_nested_value(self, key_path: str, value: Any):
        """Set nested dictionary value using dot notation."""
        keys = key_path.split(".")
        current = self.config

        for key in keys[:-1]:
            if not isinstance(current.get(key), dict):
                current[key] = {}
            current = current[key]

        current[keys[-1]] = value

    def corpus_paths(self) -> List[Path]:
        """Configured corpus paths, relative ones resolved against corpus.root."""
        root = self.get("corpus.root")
        return [
            Path(root) / p if root and not Path(p).is_absolute() else Path(p)
            for p in as_list(self.get("corpus.paths"))
        ]

    def as_dict(self) -> Dict[str, Any]:
        """The resolved configuration tree."""
        return copy.deepcopy(self.config)


@dataclass(frozen=True)
class RunConfig:
    """Validated, typed view of a configuration for one command."""

    seed: int
    jobs: int
    corpus_paths: Tuple[Path, ...]
    corpus_format: str
    variant: Optional[TagsetVariant]
    mapping: Optional[Path]
    target_speakers: Optional[Tuple[str, ...]]
    features: FeatureConfig
    dictionary_scope: str
    solver: SolverParams
    experiment_kind: str
    context_modes: Tuple[ContextMode, ...]
    n_prev: Tuple[int, ...]
    folds: int
    granularity: Granularity
    output_dir: Path

    @classmethod
    def from_loader(cls, loader: ConfigLoader, require_corpus: bool = True) -> "RunConfig":
        """
        Raises:
            ConfigurationError: missing seed or corpus, or paths that do not exist
        """
        seed = loader.get("seed")
        if seed is None:
            raise ConfigurationError("A seed is required (set 'seed', DACT_SEED or --seed)")

        paths = loader.corpus_paths()
        if require_corpus and not paths:
            raise ConfigurationError("No corpus paths configured (corpus.paths or --corpus)")
        mapping = loader.get("corpus.mapping")
        try:
            ConfigValidator.validate_paths(paths + ([Path(mapping)] if mapping else []))
        except ValidationError as e:
            raise ConfigurationError(str(e))

        speakers = loader.get("corpus.target_speakers")
        variant = loader.get("corpus.variant")
        n_prev = loader.get("experiment.n_prev")
        modes = as_list(loader.get("experiment.context_modes"))
        try:
            features = FeatureConfig(
                markup=MarkupMode(str(loader.get("features.markup")).lower()),
                ngrams=NGramSpec(int(loader.get("features.ngram_max")), bool(loader.get("features.cumulative"))),
            )
            solver = SolverParams(
                cost=float(loader.get("solver.cost")),
                stop_tol=float(loader.get("solver.stop_tol")),
                max_epochs=int(loader.get("solver.max_epochs")),
                seed=int(seed),
                bias=float(loader.get("solver.bias")),
            )
            context_modes = tuple(ContextMode.parse(name) for name in modes)
        except (FeatureConfigError, ValueError) as e:
            raise ConfigurationError(str(e))

        if any(mode.kind is ContextKind.NONE for mode in context_modes):
            raise ConfigurationError("experiment.context_modes lists context modes; 'none' is implied by n_prev 0")

        return cls(
            seed=int(seed),
            jobs=int(loader.get("jobs")),
            corpus_paths=tuple(paths),
            corpus_format=str(loader.get("corpus.format")).lower(),
            variant=TagsetVariant.parse(str(variant)) if variant is not None else None,
            mapping=Path(mapping) if mapping else None,
            target_speakers=tuple(as_list(speakers)) if speakers else None,
            features=features,
            dictionary_scope=str(loader.get("features.dictionary")).lower(),
            solver=solver,
            experiment_kind=str(loader.get("experiment.kind")).lower(),
            context_modes=context_modes,
            n_prev=tuple(n_prev if isinstance(n_prev, (list, tuple)) else [n_prev]),
            folds=int(loader.get("experiment.folds")),
            granularity=Granularity(str(loader.get("experiment.granularity")).lower()),
            output_dir=Path(loader.get("output.dir")),
        )

    def experiment_spec(self, corpus) -> ExperimentSpec:
        return ExperimentSpec(
            corpus=corpus,
            features=self.features,
            solver=self.solver,
            modes=self.context_modes,
            n_prev_values=self.n_prev,
            k=self.folds,
            seed=self.seed,
            granularity=self.granularity,
            target_speakers=self.target_speakers,
            dictionary_scope=self.dictionary_scope,
            jobs=self.jobs,
        )
