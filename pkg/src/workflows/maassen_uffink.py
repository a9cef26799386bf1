"""
Maassen-Uffink special case with the unitary DFT: h(psi) + h(F psi) >= log N,
with equality on position basis states
"""

import math

import numpy as np

from ..modules.eup import SLACK_TOL, dft_matrix, maassen_uffink_report
from ..modules.quantization import QuantumTorusSpace
from ..pipeline.errors import check
from ..utils.config import ExperimentConfig
from ..utils.progress import get_progress_tracker
from .common import Table, WorkflowResult, run_keyed

HELP = "Entropic uncertainty for the DFT: random states and basis states"
COLUMNS = {
    "maassen_uffink.csv": ["N", "kind", "index", "entropy_psi", "entropy_Fpsi", "bound", "slack"],
    "summary.csv": ["N", "random_states", "min_random_slack", "max_basis_gap", "log_N"],
}

EQUALITY_TOL = 1e-9


def _sweep(N: int, samples: int, seed: int):
    F = dft_matrix(N)
    space = QuantumTorusSpace(N)
    rng = np.random.default_rng([seed, N])
    rows = []
    for i in range(samples):
        psi = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        psi /= np.linalg.norm(psi)
        rows.append(_row(N, "random", i, maassen_uffink_report(F, psi)))
    for k in range(N):
        rows.append(_row(N, "basis", k, maassen_uffink_report(F, space.basis_state(k))))
    return rows


def _row(N: int, kind: str, index: int, report) -> dict:
    return {
        "N": N,
        "kind": kind,
        "index": index,
        "entropy_psi": report.pressure_pi,
        "entropy_Fpsi": report.pressure_tau_of_Upsi,
        "bound": report.rhs,
        "slack": report.slack,
    }


def run(config: ExperimentConfig) -> WorkflowResult:
    tracker = get_progress_tracker()
    tasks = {N: (lambda N=N: _sweep(N, config.samples, config.seed)) for N in config.N_values}
    results = run_keyed(
        tasks, config.workers, lambda key, i, total: tracker.step(f"N={key}", i, total)
    )

    rows = []
    summary = []
    for N, part in results:
        rows.extend(part)
        random_slack = [r["slack"] for r in part if r["kind"] == "random"]
        basis_gap = [abs(r["slack"]) for r in part if r["kind"] == "basis"]
        summary.append({
            "N": N,
            "random_states": len(random_slack),
            "min_random_slack": min(random_slack, default=0.0),
            "max_basis_gap": max(basis_gap),
            "log_N": math.log(N),
        })

    worst_slack = min(s["min_random_slack"] for s in summary)
    worst_gap = max(s["max_basis_gap"] for s in summary)
    checks = [
        check("random-state slack", worst_slack >= -SLACK_TOL, f"min slack {worst_slack:.3e}"),
        check("basis-state equality", worst_gap <= EQUALITY_TOL, f"max |slack| {worst_gap:.3e} <= {EQUALITY_TOL:g}"),
    ]
    return WorkflowResult(
        tables=[
            Table("maassen_uffink.csv", rows, COLUMNS["maassen_uffink.csv"]),
            Table("summary.csv", summary, COLUMNS["summary.csv"]),
        ],
        checks=checks,
        summary=f"N in {config.N_values}, min random slack {worst_slack:.2e}",
    )
