"""
Run-level exceptions and check records
"""

from dataclasses import dataclass
from typing import List

from ..modules.numkernel import EntlabError

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


class ConfigError(EntlabError):
    """Invalid configuration or usage"""
    exit_code = EXIT_CONFIG


class InvariantFailure(EntlabError):
    """An asserted invariant of a run did not hold"""
    exit_code = EXIT_INVARIANT

    def __init__(self, failed: List["Check"]):
        self.failed = failed
        names = ", ".join(check.name for check in failed)
        super().__init__(f"Invariant check failed: {names}")


@dataclass(frozen=True)
class Check:
    """
    Named assertion evaluated by a workflow

    Attributes:
        name: Assertion name shown on failure
        passed: Outcome
        detail: Measured value against its tolerance
    """
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def check(name: str, passed, detail: str = "") -> Check:
    return Check(name=name, passed=bool(passed), detail=detail)
