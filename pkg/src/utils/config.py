"""
Experiment configuration

Sources in increasing priority: model defaults, per-experiment defaults,
.env / environment (ENTLAB_*), a JSON config file, then CLI flags.
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from ..modules.classdyn import ToralAutomorphism
from ..modules.qpartitions import DEFAULT_WEIGHT_CAP, support_diameter
from ..pipeline.errors import ConfigError

# Load environment variables
load_dotenv()

EXPERIMENTS = (
    "egorov",
    "eup-fuzz",
    "maassen-uffink",
    "norm-decay",
    "entropy-sweep",
    "classical-ks",
    "ruelle",
    "saturation",
    "af-curve",
    "subadd",
    "qe-sweep",
    "corollary",
)

# Per-experiment defaults sized to the acceptance runs
EXPERIMENT_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "egorov": {"N_values": [8, 16, 32, 64, 128, 256, 512]},
    "eup-fuzz": {"instances": 1000, "samples": 100},
    "maassen-uffink": {"N_values": [8, 16, 32, 64, 128], "samples": 1000},
    "norm-decay": {"N_values": [128, 256], "eigenstates": 20},
    "entropy-sweep": {"N_values": [64, 128, 256], "eigenstates": 8, "n_max": 8},
    "classical-ks": {"K": 8, "width": 1.0 / 32, "n_max": 11, "grid_size": 4096},
    "ruelle": {"K": 8, "width": 1.0 / 32, "n_max": 11, "grid_size": 4096},
    "saturation": {"K": 8, "width": 1.0 / 32, "n_max": 11, "grid_size": 4096},
    "af-curve": {"N_values": [128], "eigenstates": 4, "n_extra": 3},
    "subadd": {"N_values": [64, 128, 256], "eigenstates": 8, "n_o": 2, "grid_size": 2048},
    "qe-sweep": {"N_values": [16, 32, 64, 128]},
    "corollary": {"N_values": [32], "K": 2, "n_E": 3, "weights": "both"},
}

ENV_FIELDS = {
    "output_dir": "ENTLAB_OUT_DIR",
    "workers": "ENTLAB_WORKERS",
    "eig_method": "ENTLAB_EIG_METHOD",
}


class ExperimentConfig(BaseModel):
    """Declarative description of one run"""
    model_config = ConfigDict(extra="forbid")

    experiment: str
    seed: int
    N_values: List[int] = [64, 128, 256]
    K: int = 4
    epsilon: Optional[float] = None
    width: float = 1.0 / 16
    n_E: Optional[int] = None
    delta_prime: float = 0.05
    grid_size: int = 512
    samples: int = 1000
    n_max: Optional[int] = None
    n_o: int = 2
    n_extra: int = 3
    eigenstates: int = 20
    instances: int = 1000
    weights: Literal["unit", "jacobian", "both"] = "both"
    matrix: List[int] = [2, 1, 1, 1]
    R_factor: float = 20.0
    weight_cap: int = DEFAULT_WEIGHT_CAP
    output_dir: str = "output"
    workers: int = 1
    plot: bool = False
    eig_method: Literal["jacobi", "lapack"] = "jacobi"

    @field_validator("experiment")
    @classmethod
    def known_experiment(cls, value: str) -> str:
        if value not in EXPERIMENTS:
            raise ValueError(f"unknown experiment '{value}'")
        return value

    @field_validator("N_values")
    @classmethod
    def even_dimensions(cls, values: List[int]) -> List[int]:
        if not values:
            raise ValueError("at least one N is required")
        odd = [N for N in values if N < 2 or N % 2]
        if odd:
            raise ValueError(f"every N must be even and >= 2, got {odd}")
        return sorted(set(values))

    @field_validator("matrix")
    @classmethod
    def hyperbolic_matrix(cls, entries: List[int]) -> List[int]:
        ToralAutomorphism.from_list(entries)
        return entries

    @field_validator("K", "grid_size", "samples", "eigenstates", "instances", "workers", "weight_cap")
    @classmethod
    def positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be >= 1, got {value}")
        return value

    @model_validator(mode="after")
    def consistent(self) -> "ExperimentConfig":
        if self.K > 1 and not 0 < self.width < 1.0 / (2 * self.K):
            raise ValueError(f"width must lie in (0, 1/(2K)) = (0, {1.0 / (2 * self.K):.4g}), got {self.width}")
        diameter = support_diameter(self.K, self.width)
        if self.epsilon is None:
            self.epsilon = diameter
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if diameter > self.epsilon + 1e-12:
            raise ValueError(
                f"epsilon={self.epsilon} is below the support diameter 1/K + 2*width = {diameter:.4g}"
            )
        if not 0 <= self.delta_prime < 1:
            raise ValueError(f"delta_prime must lie in [0, 1), got {self.delta_prime}")
        if self.n_E is not None and self.n_E < 1:
            raise ValueError(f"n_E override must be >= 1, got {self.n_E}")
        if self.n_o < 1:
            raise ValueError(f"n_o must be >= 1, got {self.n_o}")
        return self

    @property
    def automorphism(self) -> ToralAutomorphism:
        return ToralAutomorphism.from_list(self.matrix)

    @property
    def run_dir(self) -> Path:
        return Path(self.output_dir) / self.experiment


class ConfigLoader:
    """Merge configuration sources into a validated ExperimentConfig"""

    @staticmethod
    def env_values() -> Dict[str, Any]:
        """ENTLAB_* environment values (after .env loading)"""
        values: Dict[str, Any] = {}
        for field, var in ENV_FIELDS.items():
            raw = os.getenv(var)
            if raw:
                values[field] = int(raw) if field == "workers" else raw
        return values

    @staticmethod
    def read_file(config_path: str) -> Dict[str, Any]:
        """
        Read a JSON config file

        Raises:
            ConfigError: If the file is missing or not a JSON object
        """
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"Config file not found: {config_path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("Config file must contain a JSON object")
        return data

    @staticmethod
    def load(
        experiment: str,
        config_path: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> ExperimentConfig:
        """
        Build the configuration of one run

        Args:
            experiment: Subcommand name
            config_path: Optional JSON file
            overrides: CLI values; None entries are ignored

        Returns:
            Validated ExperimentConfig

        Raises:
            ConfigError: On unknown keys, invalid values or a conflicting experiment name
        """
        merged: Dict[str, Any] = {"seed": 1}
        merged.update(EXPERIMENT_DEFAULTS.get(experiment, {}))
        try:
            merged.update(ConfigLoader.env_values())
        except ValueError as e:
            raise ConfigError(f"Invalid ENTLAB_* environment value: {e}") from e

        if config_path:
            data = ConfigLoader.read_file(config_path)
            if data.get("experiment", experiment) != experiment:
                raise ConfigError(
                    f"Config file is for '{data['experiment']}', not '{experiment}'"
                )
            merged.update(data)

        merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
        merged["experiment"] = experiment

        try:
            return ExperimentConfig(**merged)
        except ValidationError as e:
            raise ConfigError(str(e)) from e
