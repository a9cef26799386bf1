"""
Pipeline nodes for the LangGraph run graph
"""

import logging
import time
from functools import wraps

from ..modules.numkernel import set_default_eig_method
from ..storage.file_manager import OutputManager, RunManifest, library_versions
from ..utils.config import ConfigLoader
from ..utils.progress import get_progress_tracker
from ..workflows import get_experiment
from .state import RunState

logger = logging.getLogger(__name__)


def track_node(func):
    """
    Decorator to track node execution progress.
    Failures are recorded in the state before being re-raised.
    """
    @wraps(func)
    def wrapper(state: RunState) -> RunState:
        tracker = get_progress_tracker()
        node_name = func.__name__.replace('_node', '')

        tracker.node_start(node_name)
        try:
            result = func(state)
        except Exception as e:
            state["errors"].append(f"{node_name} failed: {e}")
            logger.debug("Node %s failed", node_name, exc_info=True)
            raise
        tracker.node_end(node_name, result)
        return result

    return wrapper


@track_node
def load_config_node(state: RunState) -> RunState:
    """
    Merge defaults, environment, config file and CLI overrides

    Raises:
        ConfigError: If the merged configuration is invalid
    """
    config = ConfigLoader.load(state["experiment"], state["config_path"], state["overrides"])
    set_default_eig_method(config.eig_method)
    state["config"] = config
    state["messages"].append(
        f"{config.experiment}: N={config.N_values}, K={config.K}, seed={config.seed}, workers={config.workers}"
    )
    return state


@track_node
def run_experiment_node(state: RunState) -> RunState:
    """Dispatch to the experiment workflow"""
    config = state["config"]
    experiment = get_experiment(config.experiment)
    result = experiment.run(config)
    state["result"] = result
    state["messages"].append(result.summary or f"{config.experiment} finished")
    return state


@track_node
def check_invariants_node(state: RunState) -> RunState:
    """Collect the workflow's checks; a run with no checks does not pass"""
    tracker = get_progress_tracker()
    checks = state["result"].checks
    for c in checks:
        tracker.record_check(c.name, c.passed, c.detail)
    state["checks"] = [c.to_dict() for c in checks]
    state["passed"] = bool(checks) and all(c.passed for c in checks)
    failed = sum(not c.passed for c in checks)
    state["messages"].append(f"{len(checks) - failed}/{len(checks)} checks passed")
    return state


@track_node
def emit_outputs_node(state: RunState) -> RunState:
    """
    Write CSV tables, JSON documents and (with --plot) SVG figures.
    Output writing is single-threaded.
    """
    config = state["config"]
    result = state["result"]
    out = OutputManager(config.run_dir)

    for table in result.tables:
        state["files"].append(out.write_csv(table.name, table.rows, table.columns))
    for name, document in sorted(result.documents.items()):
        state["files"].append(out.write_json(name, document))
    if config.plot:
        for plot in result.plots:
            state["files"].append(out.write_line_plot(plot.name, plot.series, plot.xlabel, plot.ylabel, plot.title))

    state["checksums"].update(out.checksums)
    state["messages"].append(f"Wrote {len(state['files'])} files to {config.run_dir}")
    return state


@track_node
def write_manifest_node(state: RunState) -> RunState:
    """Record config, library versions, wall clock, checksums and checks"""
    config = state["config"]
    if state["dry_run"]:
        state["passed"] = True
    manifest = RunManifest(
        experiment=config.experiment,
        config=config.model_dump(),
        versions=library_versions(),
        wall_clock_seconds=round(time.time() - state["started_at"], 3),
        checksums=dict(sorted(state["checksums"].items())),
        checks=state["checks"],
        passed=bool(state["passed"]),
    )
    state["manifest_path"] = OutputManager(config.run_dir).write_manifest(manifest)
    state["messages"].append(f"Manifest: {state['manifest_path']}")
    return state
