"""
Experiment workflows, one per CLI subcommand
"""

from dataclasses import dataclass
from typing import Callable, Dict, List

from ..utils.config import EXPERIMENTS, ExperimentConfig
from . import (
    af_curve,
    classical,
    corollary,
    egorov,
    entropy_sweep,
    eup_fuzz,
    maassen_uffink,
    norm_decay,
    qe_sweep,
    subadd,
)
from .common import WorkflowResult


@dataclass(frozen=True)
class Experiment:
    name: str
    run: Callable[[ExperimentConfig], WorkflowResult]
    help: str
    columns: Dict[str, List[str]]

    def columns_epilog(self) -> str:
        """CSV columns per output file, for the subcommand --help"""
        lines = ["CSV columns:"]
        for file_name, columns in self.columns.items():
            lines.append(f"  {file_name}: {', '.join(columns)}")
        return "\n".join(lines)


REGISTRY: Dict[str, Experiment] = {
    e.name: e
    for e in (
        Experiment("egorov", egorov.run, egorov.HELP, egorov.COLUMNS),
        Experiment("eup-fuzz", eup_fuzz.run, eup_fuzz.HELP, eup_fuzz.COLUMNS),
        Experiment("maassen-uffink", maassen_uffink.run, maassen_uffink.HELP, maassen_uffink.COLUMNS),
        Experiment("norm-decay", norm_decay.run, norm_decay.HELP, norm_decay.COLUMNS),
        Experiment("entropy-sweep", entropy_sweep.run, entropy_sweep.HELP, entropy_sweep.COLUMNS),
        Experiment("classical-ks", classical.run_classical_ks, classical.KS_HELP, classical.KS_COLUMNS),
        Experiment("ruelle", classical.run_ruelle, classical.RUELLE_HELP, classical.RUELLE_COLUMNS),
        Experiment("saturation", classical.run_saturation, classical.SATURATION_HELP, classical.SATURATION_COLUMNS),
        Experiment("af-curve", af_curve.run, af_curve.HELP, af_curve.COLUMNS),
        Experiment("subadd", subadd.run, subadd.HELP, subadd.COLUMNS),
        Experiment("qe-sweep", qe_sweep.run, qe_sweep.HELP, qe_sweep.COLUMNS),
        Experiment("corollary", corollary.run, corollary.HELP, corollary.COLUMNS),
    )
}

assert set(REGISTRY) == set(EXPERIMENTS)


def get_experiment(name: str) -> Experiment:
    """
    Raises:
        KeyError: If no workflow is registered under name
    """
    return REGISTRY[name]


__all__ = ["Experiment", "REGISTRY", "WorkflowResult", "get_experiment"]
