"""
Routing between resolving the configuration and running the experiment
"""

from .nodes import track_node
from .state import RunState


@track_node
def router_node(state: RunState) -> RunState:
    """
    Decide whether the experiment runs.
    A dry run only resolves the configuration and writes the manifest.
    """
    if state["dry_run"]:
        state["messages"].append("Dry run: skipping the experiment")
    else:
        state["messages"].append(f"Routing to {state['config'].experiment}")
    return state


def get_next_node(state: RunState) -> str:
    """
    Args:
        state: Run state after the router

    Returns:
        Next node name
    """
    if state["dry_run"]:
        return "write_manifest"
    return "run_experiment"
