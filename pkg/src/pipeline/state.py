"""
Run state definitions for LangGraph
"""

import time
from typing import Any, Dict, List, Optional, TypedDict


class RunState(TypedDict):
    """
    Complete state of one experiment run.
    This state flows through all nodes in the LangGraph.
    """

    # ===== Request =====
    experiment: str
    config_path: Optional[str]
    overrides: Dict[str, Any]
    dry_run: bool

    # ===== Resolved Configuration =====
    config: Optional[Any]  # ExperimentConfig once load_config has run

    # ===== Workflow Output =====
    result: Optional[Any]  # WorkflowResult
    checks: List[Dict[str, Any]]
    passed: Optional[bool]

    # ===== Artifacts =====
    files: List[str]
    checksums: Dict[str, str]
    manifest_path: Optional[str]

    # ===== Timing =====
    started_at: float

    # ===== Errors & Messages =====
    errors: List[str]
    messages: List[str]


def create_initial_state(
    experiment: str,
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
    dry_run: bool = False,
) -> RunState:
    """
    Create the initial state for a new run

    Args:
        experiment: Subcommand name
        config_path: Optional JSON config file
        overrides: Command-line overrides; None values are ignored later
        dry_run: Resolve config and write the manifest without running

    Returns:
        Initial RunState
    """
    return RunState(
        experiment=experiment,
        config_path=config_path,
        overrides=dict(overrides or {}),
        dry_run=dry_run,
        config=None,
        result=None,
        checks=[],
        passed=None,
        files=[],
        checksums={},
        manifest_path=None,
        started_at=time.time(),
        errors=[],
        messages=[],
    )
