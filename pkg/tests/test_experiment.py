"""Tests for single-experiment orchestration."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml

from src.experiment import (
    CONFIG_FILE,
    GRAPH_FILE,
    MESSAGES_FILE,
    SUMMARY_FILE,
    TRACE_FILE,
    ExperimentRunner,
    run_experiment,
)
from src.learning import write_idx
from src.learning.data import Dataset
from src.privacy import PrivacyBudget, calibrate_sigma0
from src.protocol import audit_messages
from src.topology import read_edge_list
from src.utils.config import ExperimentConfig
from src.utils.exceptions import ConfigurationError, ProtocolError
from src.utils.output_formatter import FAILURE_MARKER, summarize_trace


@pytest.fixture
def small_config(tmp_path):
    return ExperimentConfig(
        topology="ring",
        n_agents=4,
        iterations=10,
        samples_per_class=20,
        test_samples_per_class=10,
        eval_every=5,
        output_dir=str(tmp_path / "runs"),
        run_name="small",
        seed=3,
    )


class TestExperimentRunner:
    """Tests for ExperimentRunner."""

    def test_writes_all_outputs(self, small_config):
        result = run_experiment(small_config)
        run_dir = result.run_dir
        for name in (TRACE_FILE, SUMMARY_FILE, CONFIG_FILE, GRAPH_FILE):
            assert (run_dir / name).exists()
        assert not (run_dir / MESSAGES_FILE).exists()

        trace = pd.read_csv(run_dir / TRACE_FILE)
        assert trace["iteration"].unique().tolist() == [5, 10]
        assert len(trace) == 2 * 4
        assert result.trace_path == run_dir / TRACE_FILE
        assert result.performance["items_processed"] == 10

    def test_config_echo(self, small_config):
        result = run_experiment(small_config)
        echoed = yaml.safe_load((result.run_dir / CONFIG_FILE).read_text())
        assert echoed == small_config.to_dict()

    def test_graph_file_matches_run(self, small_config):
        result = run_experiment(small_config)
        g = read_edge_list(result.run_dir / GRAPH_FILE)
        assert g.edges() == [(0, 1), (0, 3), (1, 2), (2, 3)]

    def test_sigma0_calibrated_per_shard(self, small_config):
        result = run_experiment(small_config)
        expected = calibrate_sigma0(PrivacyBudget(1.0, 1e-5), 10, 10)
        assert result.sigma0 == [expected] * 4

    def test_spend_monotone_and_capped(self, small_config):
        result = run_experiment(small_config)
        trace = pd.read_csv(result.trace_path)
        for _, group in trace.groupby("agent_id"):
            spent = group["spent_epsilon"].tolist()
            assert spent == sorted(spent)
            assert spent[-1] <= 1.0 + 1e-9

    def test_summary_recomputable(self, small_config):
        result = run_experiment(small_config)
        recomputed = summarize_trace(result.trace_path)
        assert len(recomputed) == len(result.metrics)
        for a, b in zip(recomputed, result.metrics):
            assert abs(a.mean_accuracy - b.mean_accuracy) <= 1e-12
            assert abs(a.std_accuracy - b.std_accuracy) <= 1e-12

    def test_identical_reruns_are_byte_identical(self, small_config, tmp_path):
        first = run_experiment(small_config)
        second = run_experiment(small_config.replace(output_dir=str(tmp_path / "again")))
        assert first.trace_path.read_bytes() == second.trace_path.read_bytes()

    def test_message_log(self, small_config):
        config = small_config.replace(message_log=True, topology="star", n_agents=6)
        result = run_experiment(config)
        messages = pd.read_csv(result.run_dir / MESSAGES_FILE)
        assert len(messages) == len(result.trace.messages)
        g = read_edge_list(result.run_dir / GRAPH_FILE)
        assert audit_messages(g, result.trace.messages) == []

    def test_async_protocol(self, small_config):
        config = small_config.replace(protocol="async", dropout=0.25)
        result = run_experiment(config)
        assert len(result.trace.participation) == 10
        assert result.trace.metadata["protocol"] == "async"

    def test_algorithm_sets_mode(self, small_config):
        result = run_experiment(small_config.replace(algorithm="no_noise"))
        assert result.trace.metadata["mode"] == "no_noise"
        assert all(r.mean_sigma == 0.0 for r in result.trace.records)

    def test_topology_seed_overrides_master_seed(self, small_config):
        config = small_config.replace(topology="random", n_agents=8, connection_rate=0.4)
        a = ExperimentRunner(config.replace(topology_seed=5, seed=1)).build_graph()
        b = ExperimentRunner(config.replace(topology_seed=5, seed=2)).build_graph()
        assert a.edges() == b.edges()

    def test_learning_rate_fade_defaults_to_iterations(self, small_config):
        assert ExperimentRunner(small_config).learning_config().lr_fade == 10
        assert ExperimentRunner(small_config.replace(lr_fade=3)).learning_config().lr_fade == 3

    def test_failure_leaves_marked_trace(self, small_config, mocker):
        mocker.patch(
            "src.protocol.base.RoundEngine._check_finite",
            side_effect=[None] * 8 + [ProtocolError("Estimate became non-finite", agent_id=0)],
        )
        with pytest.raises(ProtocolError):
            run_experiment(small_config)
        trace_path = Path(small_config.output_dir) / small_config.run_name / TRACE_FILE
        lines = trace_path.read_text().splitlines()
        assert lines[-1] == f"{FAILURE_MARKER} PROTOCOL_ERROR"

    def test_mlp_on_mnist_files(self, small_config, tmp_path):
        """Test the MNIST path with tiny IDX fixtures."""
        rng = np.random.default_rng(0)
        paths = {}
        for split, count in (("train", 20), ("test", 6)):
            data = Dataset(rng.integers(0, 256, size=(count, 4)) / 255.0,
                           np.arange(count) % 10, 10)
            images, labels = tmp_path / f"{split}-images", tmp_path / f"{split}-labels"
            write_idx(data, images, labels)
            paths[f"{split}_images"], paths[f"{split}_labels"] = str(images), str(labels)
        config = small_config.replace(dataset="mnist", model="mlp", hidden=5, **paths)
        result = run_experiment(config)
        assert result.trace.final_records()

    def test_missing_mnist_path(self, small_config):
        runner = ExperimentRunner(small_config)
        runner.config = ExperimentConfig(dataset="mnist")
        with pytest.raises(ConfigurationError) as e:
            runner.load_data()
        assert e.value.key == "train_images"
