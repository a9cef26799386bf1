"""
LangGraph assembly of an experiment run
"""

from typing import Any, Dict, Optional

from langgraph.graph import END, StateGraph

from ..utils.progress import get_progress_tracker
from .errors import Check, InvariantFailure
from .nodes import (
    check_invariants_node,
    emit_outputs_node,
    load_config_node,
    run_experiment_node,
    write_manifest_node,
)
from .router import get_next_node, router_node
from .state import RunState, create_initial_state


def create_run_pipeline():
    """
    Create and compile the run graph

    load_config -> router -> run_experiment -> check_invariants
    -> emit_outputs -> write_manifest, with dry runs routed straight
    to write_manifest

    Returns:
        Compiled LangGraph workflow
    """
    workflow = StateGraph(RunState)

    workflow.add_node("load_config", load_config_node)
    workflow.add_node("router", router_node)
    workflow.add_node("run_experiment", run_experiment_node)
    workflow.add_node("check_invariants", check_invariants_node)
    workflow.add_node("emit_outputs", emit_outputs_node)
    workflow.add_node("write_manifest", write_manifest_node)

    workflow.set_entry_point("load_config")
    workflow.add_edge("load_config", "router")

    workflow.add_conditional_edges(
        "router",
        get_next_node,
        {
            "run_experiment": "run_experiment",
            "write_manifest": "write_manifest",
        },
    )

    workflow.add_edge("run_experiment", "check_invariants")
    # outputs are written even when a check fails, so the failure can be inspected
    workflow.add_edge("check_invariants", "emit_outputs")
    workflow.add_edge("emit_outputs", "write_manifest")
    workflow.add_edge("write_manifest", END)

    return workflow.compile()


# Create singleton instance
_pipeline = None


def get_run_pipeline():
    """
    Get or create the run pipeline

    Returns:
        Compiled LangGraph workflow
    """
    global _pipeline
    if _pipeline is None:
        _pipeline = create_run_pipeline()
    return _pipeline


def run(
    experiment: str,
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    dry_run: bool = False,
) -> RunState:
    """
    Run one experiment end to end

    Args:
        experiment: Subcommand name
        config_path: Optional JSON config file
        overrides: CLI overrides
        dry_run: Resolve the config and write the manifest only

    Returns:
        Final run state (manifest_path, checksums, checks, passed)

    Raises:
        ConfigError: Invalid configuration
        InvariantFailure: An asserted check failed; outputs and manifest are still written
    """
    tracker = get_progress_tracker()
    tracker.start(f"entlab {experiment}")
    state = create_initial_state(experiment, config_path, overrides, dry_run)
    final_state = get_run_pipeline().invoke(state)
    tracker.finish(bool(final_state.get("passed")))

    failed = [Check(**c) for c in final_state["checks"] if not c["passed"]]
    if failed:
        raise InvariantFailure(failed)
    if not final_state.get("passed"):
        raise InvariantFailure([Check("checks present", False, "workflow reported no checks")])
    return final_state
