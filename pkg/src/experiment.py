"""Single-experiment orchestration: graph, data, agents, protocol, outputs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .learning.data import MNIST_CLASSES, Dataset, load_idx, partition_iid, synth_blobs
from .learning.models import Model, build_model
from .learning.updates import LearningConfig
from .models.trace import MetricsRecord, TrainingTrace
from .privacy.budget import PrivacyBudget, per_iteration_epsilon
from .protocol.agent import AgentState, Mode, build_agents
from .protocol.asynchronous import run_asynchronous
from .protocol.synchronous import run_synchronous
from .topology.generators import generate_named
from .topology.graph import Graph, write_edge_list
from .utils.config import MNIST_KEYS, ExperimentConfig, dump_config
from .utils.error_handler import error_context
from .utils.exceptions import ConfigurationError
from .utils.logging import get_audit_logger
from .utils.output_formatter import TraceWriter, summarize, write_messages, write_summary
from .utils.performance import PerformanceMonitor
from .utils.seeding import child_rng, child_seed

logger = logging.getLogger(__name__)

TRACE_FILE = "trace.csv"
SUMMARY_FILE = "summary.csv"
CONFIG_FILE = "config.yaml"
MESSAGES_FILE = "messages.csv"
GRAPH_FILE = "graph.edges"


@dataclass
class ExperimentResult:
    """Outputs of one completed run."""

    config: ExperimentConfig
    trace: TrainingTrace
    metrics: list[MetricsRecord]
    run_dir: Path
    sigma0: list[float]
    performance: dict[str, Any] = field(default_factory=dict)

    @property
    def trace_path(self) -> Path:
        return self.run_dir / TRACE_FILE

    @property
    def final_mean_accuracy(self) -> float:
        return self.metrics[-1].mean_accuracy if self.metrics else float("nan")


class ExperimentRunner:
    """Builds every component of a run from its config and executes it."""

    def __init__(self, config: ExperimentConfig, monitor: PerformanceMonitor | None = None):
        self.config = config
        self.monitor = monitor or PerformanceMonitor()
        self.run_dir = Path(config.output_dir) / config.run_name

    def build_graph(self) -> Graph:
        cfg = self.config
        seed = cfg.topology_seed if cfg.topology_seed is not None else child_seed(cfg.seed, "graph")
        return generate_named(
            cfg.topology,
            cfg.n_agents,
            hubs=cfg.star_hubs,
            branching=cfg.tree_branching,
            density=cfg.mesh_density,
            connection_rate=cfg.connection_rate,
            seed=seed,
        )

    def load_data(self) -> tuple[Dataset, Dataset]:
        """Return (train, test) for the configured dataset."""
        cfg = self.config
        if cfg.dataset == "mnist":
            paths = [getattr(cfg, key) for key in MNIST_KEYS]
            missing = [key for key, path in zip(MNIST_KEYS, paths) if not path]
            if missing:
                raise ConfigurationError(f"{missing[0]}: required when dataset is mnist", key=missing[0])
            train = load_idx(paths[0], paths[1], MNIST_CLASSES)
            test = load_idx(paths[2], paths[3], MNIST_CLASSES)
            return train, test
        train = synth_blobs(
            cfg.samples_per_class,
            cfg.classes,
            cfg.input_dim,
            cfg.spread,
            child_seed(cfg.seed, "data", 0),
        )
        test = synth_blobs(
            cfg.test_samples_per_class,
            cfg.classes,
            cfg.input_dim,
            cfg.spread,
            child_seed(cfg.seed, "data", 1),
        )
        return train, test

    def learning_config(self) -> LearningConfig:
        cfg = self.config
        return LearningConfig(
            alpha=cfg.alpha,
            lambda0=cfg.lambda0,
            clip_c=cfg.clip_c,
            batch_size=cfg.batch_size,
            lr_fade=cfg.lr_fade or cfg.iterations,
        )

    def build_agents(
        self, g: Graph, train: Dataset, model: Model
    ) -> list[AgentState]:
        cfg = self.config
        shards = partition_iid(train, cfg.n_agents, child_seed(cfg.seed, "partition"))
        x0 = model.init_params(child_rng(cfg.seed, "init"))
        return build_agents(
            g,
            shards,
            x0,
            PrivacyBudget(cfg.epsilon, cfg.delta),
            cfg.iterations,
            gamma=cfg.gamma,
            period=cfg.period,
            master_seed=cfg.seed,
            mode=Mode(cfg.algorithm),
        )

    def run(self) -> ExperimentResult:
        """Execute the run and write its output files.

        Returns:
            ExperimentResult with the trace and per-evaluation metrics

        Raises:
            TopDPError: Propagated from the component that failed; the trace
                file keeps the rows written so far plus a failure marker
        """
        cfg = self.config
        context = {"run_name": cfg.run_name, "protocol": cfg.protocol, "algorithm": cfg.algorithm}
        with error_context(context):
            op_id = self.monitor.start_operation("experiment", context)
            logger.info(
                f"Starting run {cfg.run_name}: {cfg.protocol}/{cfg.algorithm} on "
                f"{cfg.topology}({cfg.n_agents}), T={cfg.iterations}",
                extra={"run_id": cfg.run_name},
            )
            self.run_dir.mkdir(parents=True, exist_ok=True)
            dump_config(cfg, self.run_dir / CONFIG_FILE)

            g = self.build_graph()
            write_edge_list(g, self.run_dir / GRAPH_FILE)
            train, test = self.load_data()
            model = build_model(cfg.model, train.input_dim, train.num_classes, cfg.hidden)
            agents = self.build_agents(g, train, model)
            self._audit_calibration(agents)

            with TraceWriter(self.run_dir / TRACE_FILE) as writer:
                trace = self._run_protocol(g, agents, model, test, writer)

            metrics = summarize(trace.records)
            write_summary(metrics, self.run_dir / SUMMARY_FILE)
            if cfg.message_log:
                write_messages(trace.messages, self.run_dir / MESSAGES_FILE)

            perf = self.monitor.end_operation(op_id, items_processed=cfg.iterations)
            self._audit_spend(agents, Mode(cfg.algorithm))
            final = metrics[-1]
            logger.info(
                f"Run {cfg.run_name} finished: mean accuracy {final.mean_accuracy:.4f} "
                f"(std {final.std_accuracy:.4f}), max epsilon {final.max_spent_epsilon:.4f}, "
                f"{perf.duration:.2f}s, rss {perf.peak_memory_mb} MB",
                extra={"run_id": cfg.run_name},
            )
        return ExperimentResult(
            config=cfg,
            trace=trace,
            metrics=metrics,
            run_dir=self.run_dir,
            sigma0=[a.sigma0 for a in agents],
            performance=perf.to_dict(),
        )

    def _run_protocol(
        self,
        g: Graph,
        agents: list[AgentState],
        model: Model,
        test: Dataset,
        writer: TraceWriter,
    ) -> TrainingTrace:
        cfg = self.config
        options: dict[str, Any] = {
            "eval_every": cfg.eval_every,
            "workers": cfg.workers,
            "record_messages": cfg.message_log,
            "on_record": writer.write,
        }
        learning = self.learning_config()
        mode = Mode(cfg.algorithm)
        if cfg.protocol == "async":
            return run_asynchronous(
                g,
                agents,
                model,
                learning,
                cfg.iterations,
                cfg.dropout,
                mode,
                test,
                master_seed=cfg.seed,
                **options,
            )
        return run_synchronous(g, agents, model, learning, cfg.iterations, mode, test, **options)

    def _audit_calibration(self, agents: list[AgentState]) -> None:
        cfg = self.config
        budget = PrivacyBudget(cfg.epsilon, cfg.delta)
        get_audit_logger().info(
            f"Run {cfg.run_name}: budget ({cfg.epsilon}, {cfg.delta}), "
            f"per-iteration epsilon {per_iteration_epsilon(budget, cfg.iterations)!r}, "
            f"sigma0 range [{min(a.sigma0 for a in agents)!r}, {max(a.sigma0 for a in agents)!r}]",
            extra={"run_id": cfg.run_name},
        )

    def _audit_spend(self, agents: list[AgentState], mode: Mode) -> None:
        audit = get_audit_logger()
        if not mode.adds_noise:
            audit.warning(
                f"Run {self.config.run_name} released estimates without noise",
                extra={"run_id": self.config.run_name},
            )
            return
        for agent in agents:
            if agent.accountant.exhausted:
                audit.warning(
                    f"Agent {agent.id} spent {agent.spent_epsilon!r} over budget",
                    extra={"run_id": self.config.run_name, "agent_id": agent.id},
                )
        audit.info(
            f"Run {self.config.run_name}: max spent epsilon "
            f"{max(a.spent_epsilon for a in agents)!r}",
            extra={"run_id": self.config.run_name},
        )


def run_experiment(
    config: ExperimentConfig, monitor: PerformanceMonitor | None = None
) -> ExperimentResult:
    """Run one experiment end to end."""
    return ExperimentRunner(config, monitor).run()
