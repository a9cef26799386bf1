"""
Subadditivity of quantum pressures below the Ehrenfest time, with unit and
Jacobian weights, next to the exact classical counterpart
"""

import numpy as np

from ..modules.classdyn import ArcPartition, JacobianContext, Lebesgue, half_lebesgue_half_origin
from ..modules.entropy import classical_subadditivity_defect
from ..modules.eup import jacobian_weight_table, subadditivity_check
from ..pipeline.errors import check
from ..utils.config import ExperimentConfig
from ..utils.progress import get_progress_tracker
from .common import Table, WorkflowResult, build_system, run_keyed, select_eigenstates

HELP = "Pressure defects p_{n_o+n} - p_{n_o} - p_n across N, quantum and classical"
COLUMNS = {
    "defects.csv": ["N", "eigenstate", "weights", "n_o", "n", "defect"],
    "summary.csv": ["N", "n_E", "weights", "mean_defect", "max_defect", "fitted_R", "bound"],
    "classical.csv": ["measure", "weights", "n_o", "n", "defect"],
}

DEFAULT_SECOND_BLOCK = 3
BOUND_MARGIN = 0.1
# Lebesgue cylinder weights are sampled
SAMPLING_TOL = 1e-3


def _defects(system, index, psi, n_o, n, context):
    tables = {k: jacobian_weight_table(context, k) for k in (n_o, n, n_o + n)}
    rows = []
    for label, v in (("unit", None), ("jacobian", tables.__getitem__)):
        rows.append({
            "N": system.N,
            "eigenstate": index,
            "weights": label,
            "n_o": n_o,
            "n": n,
            "defect": subadditivity_check(psi, system.qp, system.U, n_o, n, v, n_E=system.n_E),
        })
    return rows


def run(config: ExperimentConfig) -> WorkflowResult:
    tracker = get_progress_tracker()
    n_o = config.n_o
    n = config.n_max or DEFAULT_SECOND_BLOCK

    systems = {}
    tasks = {}
    for N in config.N_values:
        system = build_system(config, N)
        if n_o + n > system.n_E:
            tracker.log_message(f"N={N}: n_o + n = {n_o + n} exceeds n_E = {system.n_E}, skipped", "warning")
            continue
        systems[N] = system
        context = system.jacobian_context(config.R_factor)
        for index, psi in select_eigenstates(system, config.eigenstates, config.seed):
            tasks[(N, index)] = lambda s=system, j=index, v=psi, c=context: _defects(s, j, v, n_o, n, c)
    results = run_keyed(
        tasks, config.workers, lambda key, i, total: tracker.step(f"N={key[0]} eigenstate {key[1]}", i, total)
    )
    rows = [row for _, part in results for row in part]

    summary = []
    checks = []
    for label in ("unit", "jacobian"):
        means = {}
        for N in systems:
            values = [r["defect"] for r in rows if r["N"] == N and r["weights"] == label]
            means[N] = (float(np.mean(values)), float(np.max(values)))
        if not means:
            continue
        # R is fitted at the smallest N and must bound the others
        fitted = means[min(means)][0]
        for N, (mean, top) in means.items():
            summary.append({
                "N": N,
                "n_E": systems[N].n_E,
                "weights": label,
                "mean_defect": mean,
                "max_defect": top,
                "fitted_R": fitted,
                "bound": fitted + BOUND_MARGIN,
            })
        worst = max(mean for mean, _ in means.values())
        checks.append(check(
            f"{label}-weight defects bounded across N",
            worst <= fitted + BOUND_MARGIN,
            f"max mean defect {worst:.4f} <= R {fitted:.4f} + {BOUND_MARGIN}",
        ))
    if not systems:
        checks.append(check("quantum defects measured", False, f"n_o + n = {n_o + n} exceeds n_E for every N"))

    context = JacobianContext(
        config.automorphism, ArcPartition.uniform_arcs(config.K), R=config.R_factor * config.automorphism.log_lambda
    )
    classical = []
    for name, mu in (("lebesgue", Lebesgue()), ("half_leb_half_origin", half_lebesgue_half_origin())):
        classical.append({
            "measure": name,
            "weights": "jacobian",
            "n_o": n_o,
            "n": n,
            "defect": classical_subadditivity_defect(mu, context, n_o, n, config.grid_size, config.seed),
        })
    worst_classical = max(r["defect"] for r in classical)
    checks.append(check(
        "classical pressure subadditivity",
        worst_classical <= 1e-9 + SAMPLING_TOL,
        f"max defect {worst_classical:.3e}",
    ))

    return WorkflowResult(
        tables=[
            Table("defects.csv", rows, COLUMNS["defects.csv"]),
            Table("summary.csv", summary, COLUMNS["summary.csv"]),
            Table("classical.csv", classical, COLUMNS["classical.csv"]),
        ],
        checks=checks,
        summary=f"n_o={n_o}, n={n} over N in {sorted(systems)}",
    )
