"""Configuration management for Top-DP experiments."""

from __future__ import annotations

import logging
import os
import types
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Union, get_args, get_origin, get_type_hints

import yaml

from .exceptions import ConfigurationError
from .logging import JSONFormatter

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "TOPDP_CONFIG"

TOPOLOGIES = {"random", "ring", "star", "tree", "mesh", "complete"}
PROTOCOLS = {"sync", "async"}
ALGORITHMS = {"topdp", "topdp_no_decay", "full_noise", "no_noise"}
DATASETS = {"synthetic", "mnist"}
MODEL_KINDS = {"logistic", "mlp"}
LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}
LOG_FORMATS = {"text", "json"}
MNIST_KEYS = ("train_images", "train_labels", "test_images", "test_labels")


@dataclass
class ExperimentConfig:
    """Flat experiment configuration.

    Defaults are the reference experiment settings where one exists
    (30 agents, connection rate 0.2, budget (1.0, 1e-5), decay 0.9 every 1000
    iterations, clipping at 4.0, initial learning rate 0.05) and small
    choices elsewhere.
    """

    # topology
    topology: str = "random"
    n_agents: int = 30
    connection_rate: float = 0.2
    star_hubs: int = 2
    tree_branching: int = 2
    mesh_density: float = 0.1
    topology_seed: int | None = None
    # protocol
    protocol: str = "sync"
    algorithm: str = "topdp"
    dropout: float = 0.1
    # learning
    alpha: float = 0.25
    lambda0: float = 0.05
    lr_fade: int | None = None
    clip_c: float = 4.0
    batch_size: int = 1
    iterations: int = 2000
    model: str = "logistic"
    hidden: int = 100
    # privacy
    epsilon: float = 1.0
    delta: float = 1e-5
    gamma: float = 0.9
    period: int = 1000
    # data
    dataset: str = "synthetic"
    samples_per_class: int = 1000
    test_samples_per_class: int = 250
    classes: int = 2
    input_dim: int = 2
    spread: float = 0.5
    train_images: str | None = None
    train_labels: str | None = None
    test_images: str | None = None
    test_labels: str | None = None
    # execution and output
    eval_every: int | None = None
    seed: int = 0
    workers: int = 1
    message_log: bool = False
    output_dir: str = "runs"
    run_name: str = "run"
    # logging
    log_level: str = "INFO"
    log_format: str = "text"
    log_file: str | None = None

    def to_dict(self) -> dict[str, Any]:
        """Convert configuration to a plain dictionary."""
        return asdict(self)

    def replace(self, **changes: Any) -> ExperimentConfig:
        """Return a validated copy with some keys changed."""
        data = self.to_dict()
        for key, value in changes.items():
            if key not in data:
                raise ConfigurationError(f"Unknown configuration key: {key}", key=key)
            data[key] = value
        config = build_config(data)
        validate_config(config)
        return config


_FIELD_TYPES: dict[str, Any] = get_type_hints(ExperimentConfig)


def _coerce(key: str, value: Any) -> Any:
    """Coerce a raw file or flag value to the declared type of ``key``."""
    annotation = _FIELD_TYPES[key]
    optional = False
    if get_origin(annotation) in (Union, types.UnionType):
        args = [a for a in get_args(annotation) if a is not type(None)]
        optional = len(args) < len(get_args(annotation))
        annotation = args[0]
    if value is None or (optional and isinstance(value, str) and value.lower() in {"", "none", "null"}):
        if optional:
            return None
        raise ConfigurationError(f"Missing value for {key}", key=key)
    try:
        if annotation is bool:
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in {"true", "yes", "1", "on"}:
                return True
            if text in {"false", "no", "0", "off"}:
                return False
            raise ValueError(value)
        if annotation is int:
            if isinstance(value, bool):
                raise ValueError(value)
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if annotation is float:
            if isinstance(value, bool):
                raise ValueError(value)
            return float(value)
        return str(value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(
            f"Invalid value for {key}: {value!r}", key=key
        ) from e


def build_config(data: dict[str, Any]) -> ExperimentConfig:
    """Build a configuration from a flat mapping, filling defaults.

    Raises:
        ConfigurationError: On unknown keys or uncoercible values
    """
    known = {f.name for f in fields(ExperimentConfig)}
    values: dict[str, Any] = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigurationError(f"Unknown configuration key: {key}", key=key)
        values[key] = _coerce(key, value)
    return ExperimentConfig(**values)


def _require(condition: bool, key: str, message: str) -> None:
    if not condition:
        raise ConfigurationError(f"{key}: {message}", key=key)


def _require_choice(config: ExperimentConfig, key: str, choices: set[str]) -> None:
    value = getattr(config, key)
    _require(value in choices, key, f"must be one of {sorted(choices)}, got {value!r}")


def validate_config(config: ExperimentConfig) -> None:
    """Validate configuration values.

    Raises:
        ConfigurationError: Naming the first offending key
    """
    _require_choice(config, "topology", TOPOLOGIES)
    _require_choice(config, "protocol", PROTOCOLS)
    _require_choice(config, "algorithm", ALGORITHMS)
    _require_choice(config, "dataset", DATASETS)
    _require_choice(config, "model", MODEL_KINDS)
    _require_choice(config, "log_format", LOG_FORMATS)
    _require(config.log_level in LOG_LEVELS, "log_level", f"invalid level {config.log_level!r}")

    _require(config.n_agents >= 2, "n_agents", "must be at least 2")
    _require(0 < config.connection_rate <= 1, "connection_rate", "must be in (0, 1]")
    _require(1 <= config.star_hubs < config.n_agents, "star_hubs", "must be in [1, n_agents)")
    _require(config.tree_branching >= 1, "tree_branching", "must be positive")
    _require(0 <= config.mesh_density <= 1, "mesh_density", "must be in [0, 1]")
    _require(0 <= config.dropout <= 1, "dropout", "must be in [0, 1]")

    _require(0 <= config.alpha <= 1, "alpha", "must be in [0, 1]")
    _require(config.lambda0 > 0, "lambda0", "must be positive")
    _require(config.lr_fade is None or config.lr_fade >= 1, "lr_fade", "must be positive")
    _require(config.clip_c > 0, "clip_c", "must be positive")
    _require(config.batch_size >= 1, "batch_size", "must be positive")
    _require(config.iterations >= 1, "iterations", "must be positive")
    _require(config.hidden >= 1, "hidden", "must be positive")

    _require(config.epsilon > 0, "epsilon", "must be positive")
    _require(0 < config.delta < 1, "delta", "must be in (0, 1)")
    _require(0 < config.gamma <= 1, "gamma", "must be in (0, 1]")
    _require(config.period >= 1, "period", "must be positive")

    _require(config.samples_per_class >= 1, "samples_per_class", "must be positive")
    _require(config.test_samples_per_class >= 1, "test_samples_per_class", "must be positive")
    _require(config.classes >= 1, "classes", "must be positive")
    _require(config.input_dim >= 1, "input_dim", "must be positive")
    _require(config.spread > 0, "spread", "must be positive")
    if config.dataset == "mnist":
        for key in MNIST_KEYS:
            path = getattr(config, key)
            _require(path is not None, key, "required when dataset is mnist")
            _require(Path(path).exists(), key, f"file not found: {path}")

    _require(config.eval_every is None or config.eval_every >= 1, "eval_every", "must be positive")
    _require(config.seed >= 0, "seed", "must be non-negative")
    _require(config.workers >= 1, "workers", "must be positive")
    _require(bool(config.run_name), "run_name", "must not be empty")
    logger.debug("Configuration validation passed")


class ConfigManager:
    """Configuration manager for loading and validating configuration."""

    def __init__(self, config_path: str | Path | None = None):
        """Initialize configuration manager.

        Args:
            config_path: Path to configuration file. If None, uses the
                ``TOPDP_CONFIG`` environment variable when set.
        """
        self.config_path = self._resolve_config_path(config_path)

    def _resolve_config_path(self, config_path: str | Path | None) -> Path | None:
        if config_path:
            return Path(config_path)
        env_path = os.getenv(CONFIG_ENV_VAR)
        if env_path:
            return Path(env_path)
        return None

    def read_file(self) -> dict[str, Any]:
        """Read the flat key-value file, returning an empty mapping if absent.

        Raises:
            ConfigurationError: If the file is missing, not valid YAML or not
                a flat mapping
        """
        if self.config_path is None:
            return {}
        if not self.config_path.exists():
            raise ConfigurationError(
                f"Config file not found: {self.config_path}",
                config_path=str(self.config_path),
            )
        logger.info(f"Loading configuration from {self.config_path}")
        try:
            with open(self.config_path, encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(
                f"Invalid config file: {e}", config_path=str(self.config_path)
            ) from e
        if not data:
            logger.info("Empty configuration file, using defaults")
            return {}
        if not isinstance(data, dict):
            raise ConfigurationError(
                "Config file must contain a flat key: value mapping",
                config_path=str(self.config_path),
            )
        for key, value in data.items():
            if isinstance(value, dict | list):
                raise ConfigurationError(
                    f"Nested value for {key}; config is flat", key=str(key)
                )
        return {str(k): v for k, v in data.items()}

    def load_config(self, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
        """Load the file, apply flag overrides, and validate.

        Args:
            overrides: Values given on the command line; they win over the file

        Returns:
            Validated configuration
        """
        data = self.read_file()
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        config = build_config(data)
        validate_config(config)
        return config


def parse_config(
    path: str | Path | None = None, overrides: dict[str, Any] | None = None
) -> ExperimentConfig:
    """Load a validated experiment configuration from a file and flags."""
    return ConfigManager(path).load_config(overrides)


def dump_config(config: ExperimentConfig, path: Path) -> None:
    """Write the resolved configuration echo with stable key order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(config.to_dict(), f, sort_keys=True, default_flow_style=False)


def setup_logging(config: ExperimentConfig) -> None:
    """Set up logging based on configuration."""
    root_logger = logging.getLogger()
    root_logger.setLevel(config.log_level)
    # Remove existing handlers
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
    handler: logging.Handler
    if config.log_file:
        log_path = Path(config.log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(log_path, encoding="utf-8")
    else:
        handler = logging.StreamHandler()
    formatter: logging.Formatter
    if config.log_format == "json":
        formatter = JSONFormatter()
    else:
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )
    handler.setFormatter(formatter)
    root_logger.addHandler(handler)
