"""
Unit tests for configuration loading
"""

import json
import os
import sys
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.pipeline.errors import EXIT_CONFIG, ConfigError
from src.utils.config import EXPERIMENT_DEFAULTS, EXPERIMENTS, ConfigLoader, ExperimentConfig

CLEAN_ENV = {"ENTLAB_OUT_DIR": "", "ENTLAB_WORKERS": "", "ENTLAB_EIG_METHOD": ""}


@patch.dict(os.environ, CLEAN_ENV)
class TestConfigLoader(unittest.TestCase):
    """Test the merge order defaults < environment < file < CLI"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write_config(self, data) -> str:
        path = Path(self.tmp.name) / "config.json"
        path.write_text(json.dumps(data))
        return str(path)

    def test_experiment_defaults(self):
        config = ConfigLoader.load("egorov")
        self.assertEqual(config.N_values, EXPERIMENT_DEFAULTS["egorov"]["N_values"])
        self.assertEqual(config.seed, 1)
        self.assertEqual(config.run_dir, Path("output") / "egorov")

    def test_every_experiment_loads(self):
        for name in EXPERIMENTS:
            self.assertEqual(ConfigLoader.load(name).experiment, name)

    def test_environment_overrides_defaults(self):
        with patch.dict(os.environ, {"ENTLAB_WORKERS": "3", "ENTLAB_EIG_METHOD": "lapack"}):
            config = ConfigLoader.load("egorov")
        self.assertEqual(config.workers, 3)
        self.assertEqual(config.eig_method, "lapack")

    def test_bad_environment_value(self):
        with patch.dict(os.environ, {"ENTLAB_WORKERS": "many"}):
            with self.assertRaises(ConfigError):
                ConfigLoader.load("egorov")

    def test_file_then_cli(self):
        path = self.write_config({"N_values": [16, 8], "K": 2, "epsilon": 0.5})
        config = ConfigLoader.load("subadd", path, {"K": 4, "epsilon": None, "seed": 9})
        self.assertEqual(config.N_values, [8, 16])
        self.assertEqual(config.K, 4)
        self.assertEqual(config.seed, 9)
        self.assertEqual(config.epsilon, 0.5)

    def test_conflicting_experiment_name(self):
        path = self.write_config({"experiment": "ruelle"})
        with self.assertRaises(ConfigError):
            ConfigLoader.load("egorov", path)

    def test_matching_experiment_name(self):
        path = self.write_config({"experiment": "egorov", "N_values": [8]})
        self.assertEqual(ConfigLoader.load("egorov", path).N_values, [8])

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            ConfigLoader.load("egorov", str(Path(self.tmp.name) / "absent.json"))

    def test_malformed_file(self):
        path = Path(self.tmp.name) / "bad.json"
        path.write_text("{not json")
        with self.assertRaises(ConfigError):
            ConfigLoader.load("egorov", str(path))
        path.write_text("[1, 2]")
        with self.assertRaises(ConfigError):
            ConfigLoader.load("egorov", str(path))

    def test_unknown_key(self):
        path = self.write_config({"budget": 25})
        with self.assertRaises(ConfigError):
            ConfigLoader.load("egorov", path)

    def test_config_error_exit_code(self):
        self.assertEqual(ConfigError("x").exit_code, EXIT_CONFIG)


class TestExperimentConfig(unittest.TestCase):
    """Test field validation"""

    def test_rejects_odd_N(self):
        with self.assertRaises(ValueError):
            ExperimentConfig(experiment="egorov", seed=1, N_values=[8, 9])

    def test_rejects_unknown_experiment(self):
        with self.assertRaises(ValueError):
            ExperimentConfig(experiment="spectral-gap", seed=1)

    def test_rejects_wide_ramps(self):
        with self.assertRaises(ValueError):
            ExperimentConfig(experiment="egorov", seed=1, K=4, width=0.2)

    def test_rejects_non_hyperbolic_matrix(self):
        with self.assertRaises(ValueError):
            ExperimentConfig(experiment="egorov", seed=1, matrix=[1, 1, 0, 1])

    def test_rejects_bad_epsilon(self):
        with self.assertRaises(ValueError):
            ExperimentConfig(experiment="egorov", seed=1, epsilon=0.0)

    def test_epsilon_defaults_to_support_diameter(self):
        config = ExperimentConfig(experiment="egorov", seed=1)
        self.assertAlmostEqual(config.epsilon, 0.25 + 2 / 16)
        self.assertAlmostEqual(ExperimentConfig(experiment="corollary", seed=1, K=2).epsilon, 0.5 + 2 / 16)

    def test_rejects_epsilon_below_support_diameter(self):
        with self.assertRaises(ValueError):
            ExperimentConfig(experiment="egorov", seed=1, K=4, width=1 / 16, epsilon=0.25)

    def test_automorphism(self):
        config = ExperimentConfig(experiment="egorov", seed=1)
        self.assertAlmostEqual(config.automorphism.log_lambda, 0.9624236501, places=9)


if __name__ == "__main__":
    unittest.main()
