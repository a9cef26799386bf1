"""
Console progress of an experiment run: graph nodes, work items with an ETA,
check outcomes and a closing summary
"""

import time
from typing import Any, Dict, List, Optional, Tuple


class Colors:
    """ANSI color codes for terminal output"""
    RESET = '\033[0m'
    BOLD = '\033[1m'
    DIM = '\033[2m'
    RED = '\033[91m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    BLUE = '\033[94m'
    CYAN = '\033[96m'
    GRAY = '\033[90m'


LEVEL_STYLE = {
    "info": (Colors.RESET, "ℹ"),
    "success": (Colors.GREEN, "✓"),
    "warning": (Colors.YELLOW, "⚠"),
    "error": (Colors.RED, "✗"),
    "debug": (Colors.GRAY, "•"),
}

RULE_WIDTH = 72


class ProgressTracker:
    """
    Track one run through the pipeline graph

    Node durations and check outcomes are recorded even when output is
    suppressed, so the closing summary stays available to callers.
    """

    def __init__(self, verbose: bool = True):
        self.verbose = verbose
        self.title = "entlab run"
        self.start_time: Optional[float] = None
        self.node_timings: List[Tuple[str, float]] = []
        self.checks_passed = 0
        self.checks_failed = 0
        self._node_started: Optional[float] = None
        self._items_started: Optional[float] = None

    def _emit(self, text: str, color: str = Colors.RESET):
        if self.verbose:
            print(f"{color}{text}{Colors.RESET}")

    def _rule(self):
        self._emit("=" * RULE_WIDTH, Colors.CYAN + Colors.BOLD)

    def start(self, title: Optional[str] = None):
        """Reset counters and print the run header"""
        self.start_time = time.time()
        self.node_timings = []
        self.checks_passed = self.checks_failed = 0
        if title:
            self.title = title
        if self.verbose:
            print()
        self._rule()
        self._emit(f"  {self.title}", Colors.CYAN + Colors.BOLD)
        self._rule()

    def node_start(self, node_name: str):
        self._node_started = time.time()
        self._items_started = None
        label = node_name.replace('_', ' ').title()
        if self.verbose:
            print()
        self._emit(f"[{len(self.node_timings) + 1}] {label}", Colors.BLUE + Colors.BOLD)
        self._emit('─' * RULE_WIDTH, Colors.GRAY)

    def node_end(self, node_name: str, result: Optional[Dict[str, Any]] = None):
        """
        Args:
            node_name: Node that finished
            result: Run state after the node; its last message is echoed
        """
        if self._node_started is None:
            return
        duration = time.time() - self._node_started
        self.node_timings.append((node_name, duration))
        self._node_started = None
        self._emit(f"✓ {duration:.2f}s", Colors.GREEN)
        if result and result.get("messages"):
            self._emit(f"  → {result['messages'][-1]}", Colors.DIM)

    def step(self, label: str, current: int, total: int):
        """
        One finished work item inside a node (an N, a state, an instance)

        Args:
            label: Item description, e.g. "N=128"
            current: Items finished so far (1-based)
            total: Item count
        """
        now = time.time()
        if self._items_started is None or current <= 1:
            self._items_started = now
        eta = ""
        elapsed = now - self._items_started
        if 1 < current < total and elapsed > 0:
            eta = f", ~{elapsed / (current - 1) * (total - current):.0f}s left"
        self._emit(f"  [{current}/{total}] {label}{eta}", Colors.GRAY)

    def log_message(self, message: str, level: str = "info"):
        """
        Args:
            message: Text to show
            level: info, success, warning, error or debug
        """
        color, icon = LEVEL_STYLE.get(level, LEVEL_STYLE["debug"])
        self._emit(f"  {icon} {message}", color)

    def record_check(self, name: str, passed: bool, detail: str = ""):
        """Count a check outcome and show it"""
        if passed:
            self.checks_passed += 1
        else:
            self.checks_failed += 1
        self.log_message(f"{name}: {detail}" if detail else name, "success" if passed else "error")

    def slowest_node(self) -> Optional[Tuple[str, float]]:
        return max(self.node_timings, key=lambda item: item[1], default=None)

    def finish(self, passed: bool = True):
        """Print the closing summary"""
        if self.start_time is None:
            return
        total = time.time() - self.start_time
        if self.verbose:
            print()
        self._rule()
        if passed:
            self._emit("  ✓ All checks passed", Colors.GREEN + Colors.BOLD)
        else:
            self._emit("  ✗ Checks failed", Colors.RED + Colors.BOLD)
        self._emit(f"  Checks: {self.checks_passed} passed, {self.checks_failed} failed", Colors.GRAY)
        self._emit(f"  Total time: {total:.2f}s over {len(self.node_timings)} nodes", Colors.GRAY)
        slowest = self.slowest_node()
        if slowest:
            self._emit(f"  Slowest node: {slowest[0]} ({slowest[1]:.2f}s)", Colors.GRAY)
        self._rule()
        if self.verbose:
            print()


# Global progress tracker instance
_progress_tracker: Optional[ProgressTracker] = None


def get_progress_tracker() -> ProgressTracker:
    global _progress_tracker
    if _progress_tracker is None:
        _progress_tracker = ProgressTracker(verbose=True)
    return _progress_tracker


def set_verbose(verbose: bool):
    """Show or suppress console progress"""
    get_progress_tracker().verbose = verbose
