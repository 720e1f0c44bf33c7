"""One-factor sweeps over an experiment template."""

from __future__ import annotations

import logging
import threading
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import pandas as pd

from .experiment import ExperimentResult, run_experiment
from .utils.config import ExperimentConfig
from .utils.exceptions import ConfigurationError, TopDPError
from .utils.output_formatter import TRACE_COLUMNS
from .utils.performance import PerformanceMonitor

logger = logging.getLogger(__name__)

SWEEP_AXES = (
    "alpha",
    "epsilon",
    "connection_rate",
    "topology",
    "n_agents",
    "gamma",
    "period",
    "algorithm",
    "delta",
)
SWEEP_COLUMNS = ["axis", "value", *TRACE_COLUMNS]


@dataclass
class SweepRun:
    """One value of the swept axis."""

    value: str
    config: ExperimentConfig
    status: str = "pending"  # pending, completed, failed
    result: ExperimentResult | None = None
    error: str | None = None


@dataclass
class SweepProgress:
    total_runs: int
    completed_runs: int = 0
    failed_runs: int = 0

    @property
    def is_complete(self) -> bool:
        return self.completed_runs + self.failed_runs == self.total_runs


@dataclass
class SweepResult:
    axis: str
    runs: list[SweepRun]
    combined_path: Path | None = None
    errors: list[str] = field(default_factory=list)

    @property
    def succeeded(self) -> bool:
        return all(run.status == "completed" for run in self.runs)


def parse_axis_values(raw: str) -> list[str]:
    """Split a comma-separated ``--values`` list, dropping blanks."""
    values = [v.strip() for v in raw.split(",") if v.strip()]
    if not values:
        raise ConfigurationError("values: at least one sweep value is required", key="values")
    return values


class SweepRunner:
    """Runs one experiment per axis value, optionally in parallel.

    Graph, data split, initial estimate and agent streams come from the
    template's master seed, so only the swept factor changes between runs
    (a topology or agent-count sweep necessarily changes the graph).
    """

    def __init__(
        self,
        template: ExperimentConfig,
        axis: str,
        values: Sequence[Any],
        max_workers: int | None = None,
        progress_callback: Callable[[SweepProgress], None] | None = None,
    ):
        if axis not in SWEEP_AXES:
            raise ConfigurationError(
                f"axis: must be one of {list(SWEEP_AXES)}, got {axis!r}", key="axis"
            )
        self.template = template
        self.axis = axis
        self.max_workers = max_workers or template.workers
        self.progress_callback = progress_callback
        self.monitor = PerformanceMonitor()
        self.runs = [self._make_run(str(v)) for v in values]
        self.progress = SweepProgress(len(self.runs))
        self._lock = threading.Lock()
        logger.info(f"Prepared {axis} sweep over {[r.value for r in self.runs]}")

    def _make_run(self, value: str) -> SweepRun:
        run_name = f"{self.template.run_name}_{self.axis}_{value}"
        config = self.template.replace(**{self.axis: value, "run_name": run_name})
        return SweepRun(value=value, config=config)

    def run(self) -> SweepResult:
        """Execute every run and merge the traces in value order."""
        op_id = self.monitor.start_operation("sweep", {"axis": self.axis})
        if self.max_workers > 1:
            with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                futures = {executor.submit(self._execute, run): run for run in self.runs}
                for future in as_completed(futures):
                    future.result()
        else:
            for run in self.runs:
                self._execute(run)
        self.monitor.end_operation(op_id, items_processed=len(self.runs))

        result = SweepResult(
            axis=self.axis,
            runs=self.runs,
            errors=[f"{r.value}: {r.error}" for r in self.runs if r.error],
        )
        completed = [r for r in self.runs if r.result is not None]
        if completed:
            result.combined_path = self._write_combined(completed)
        logger.info(
            f"Sweep over {self.axis} finished: {self.progress.completed_runs} completed, "
            f"{self.progress.failed_runs} failed"
        )
        return result

    def _execute(self, run: SweepRun) -> None:
        try:
            run.result = run_experiment(run.config, self.monitor)
            run.status = "completed"
        except TopDPError as e:
            run.status = "failed"
            run.error = f"[{e.error_code}] {e.message}"
            logger.error(f"Sweep run {run.config.run_name} failed: {run.error}")
        except Exception as e:
            run.status = "failed"
            run.error = f"[{type(e).__name__}] {e}"
            logger.exception(f"Sweep run {run.config.run_name} failed unexpectedly")
        with self._lock:
            if run.status == "completed":
                self.progress.completed_runs += 1
            else:
                self.progress.failed_runs += 1
            if self.progress_callback:
                self.progress_callback(self.progress)

    def _write_combined(self, runs: list[SweepRun]) -> Path:
        frames = []
        for run in runs:
            assert run.result is not None
            frame = pd.DataFrame(
                [r.to_dict() for r in run.result.trace.records], columns=TRACE_COLUMNS
            )
            frame.insert(0, "value", run.value)
            frame.insert(0, "axis", self.axis)
            frames.append(frame)
        combined = pd.concat(frames, ignore_index=True)[SWEEP_COLUMNS]
        path = Path(self.template.output_dir) / f"{self.template.run_name}_{self.axis}_sweep.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        combined.to_csv(path, index=False, lineterminator="\n")
        logger.info(f"Combined sweep trace written to {path}")
        return path


def sweep(
    template: ExperimentConfig,
    axis: str,
    values: Sequence[Any],
    max_workers: int | None = None,
) -> SweepResult:
    """Run ``template`` once per value of ``axis``."""
    return SweepRunner(template, axis, values, max_workers=max_workers).run()
