"""
Propagator certificate: unitarity, exact intertwining of U^t with the Weyl
translations, and the Egorov defect of cos(2 pi x) up to the Ehrenfest time
"""

import math

import numpy as np

from ..modules.numkernel import unitarity_defect
from ..modules.quantization import EGOROV_TOL, Observable, egorov_certificate, egorov_defect
from ..pipeline.errors import check
from ..utils.config import ExperimentConfig
from ..utils.progress import get_progress_tracker
from .common import Plot, Table, WorkflowResult, build_system, run_keyed

HELP = "Certify the propagator: unitarity and exact Egorov up to n_E"
COLUMNS = {
    "egorov.csv": ["N", "t", "unitarity_defect", "intertwining_defect", "observable_defect"],
}

UNITARITY_TOL = 1e-10
INTERTWINING_TOL = EGOROV_TOL
OBSERVABLE_TOL = EGOROV_TOL
MAX_INDEX = 3
# operator-norm defects need dense products; skip them above this N
OBSERVABLE_MAX_N = 128


def _certify(config: ExperimentConfig, N: int):
    system = build_system(config, N)
    observable = Observable.cosine_position()
    rows = []
    Ut = np.eye(N, dtype=np.complex128)
    for t in range(1, system.n_E + 1):
        Ut = system.U @ Ut
        rows.append({
            "N": N,
            "t": t,
            "unitarity_defect": unitarity_defect(Ut),
            "intertwining_defect": egorov_certificate(system.space, system.A, Ut, MAX_INDEX, t),
            "observable_defect": (
                egorov_defect(system.space, system.U, system.A, observable, t)
                if N <= OBSERVABLE_MAX_N else math.nan
            ),
        })
    return rows


def run(config: ExperimentConfig) -> WorkflowResult:
    tracker = get_progress_tracker()
    tasks = {N: (lambda N=N: _certify(config, N)) for N in config.N_values}
    results = run_keyed(
        tasks, config.workers, lambda key, i, total: tracker.step(f"N={key}", i, total)
    )
    rows = [row for _, part in results for row in part]

    worst_unitarity = max(r["unitarity_defect"] for r in rows if r["t"] == 1)
    worst_intertwining = max(r["intertwining_defect"] for r in rows)
    observable = [r["observable_defect"] for r in rows if not math.isnan(r["observable_defect"])]
    worst_observable = max(observable) if observable else 0.0

    checks = [
        check("unitarity", worst_unitarity <= UNITARITY_TOL, f"max ||U^dagger U - I|| = {worst_unitarity:.3e} <= {UNITARITY_TOL:g}"),
        check(
            "exact Egorov intertwining",
            worst_intertwining <= INTERTWINING_TOL,
            f"max {worst_intertwining:.3e} <= {INTERTWINING_TOL:g} for |n|,|m| <= {MAX_INDEX}",
        ),
        check(
            "Egorov defect of cos(2 pi x)",
            worst_observable <= OBSERVABLE_TOL,
            f"max {worst_observable:.3e} <= {OBSERVABLE_TOL:g}",
        ),
    ]
    plot = Plot(
        name="egorov.svg",
        series={
            f"N={N}": (
                [r["t"] for r in rows if r["N"] == N],
                [math.log10(max(r["intertwining_defect"], 1e-18)) for r in rows if r["N"] == N],
            )
            for N in config.N_values
        },
        xlabel="t",
        ylabel="log10 intertwining defect",
    )
    return WorkflowResult(
        tables=[Table("egorov.csv", rows, COLUMNS["egorov.csv"])],
        checks=checks,
        plots=[plot],
        summary=f"{len(config.N_values)} dimensions, worst intertwining defect {worst_intertwining:.2e}",
    )
