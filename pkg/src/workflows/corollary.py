"""
Uncertainty principle instantiated on refined quantum partitions at the
Ehrenfest time, for every eigenstate, with unit and Jacobian weights
"""

from ..modules.eup import SLACK_TOL, corollary_instance, jacobian_weight_table, tempered_exponent
from ..pipeline.errors import check
from ..utils.config import ExperimentConfig
from ..utils.progress import get_progress_tracker
from .common import Table, WorkflowResult, build_system, run_keyed, select_eigenstates

HELP = "Pressure sum >= -2 log c over all eigenstates at n = n_E"
COLUMNS = {
    "corollary.csv": [
        "N", "eigenstate", "weights", "n_E", "pressure_pi", "pressure_tau_of_Upsi",
        "c", "rhs", "slack", "c_exhaustive",
    ],
    "weights.csv": ["N", "n_E", "weights", "max_weight", "tempered_exponent"],
}


def run(config: ExperimentConfig) -> WorkflowResult:
    tracker = get_progress_tracker()
    choices = ["unit", "jacobian"] if config.weights == "both" else [config.weights]

    tasks = {}
    weight_rows = []
    n_es = {}
    for N in config.N_values:
        system = build_system(config, N)
        context = system.jacobian_context(config.R_factor)
        n_es[N] = system.n_E
        for choice in choices:
            table = jacobian_weight_table(context, system.n_E) if choice == "jacobian" else None
            weight_rows.append({
                "N": N,
                "n_E": system.n_E,
                "weights": choice,
                "max_weight": float(table.max()) if table is not None else 1.0,
                "tempered_exponent": tempered_exponent(table, N) if table is not None else 0.0,
            })
        # every eigenstate, not a sample
        for index, psi in select_eigenstates(system, N, config.seed):
            for choice in choices:
                tasks[(N, index, choice)] = lambda s=system, v=psi, w=choice, c=context: corollary_instance(
                    v, s.qp, s.U, s.n_E, weights=w, context=c, seed=config.seed
                )

    results = run_keyed(
        tasks, config.workers, lambda key, i, total: tracker.step(f"N={key[0]} eigenstate {key[1]} {key[2]}", i, total)
    )

    rows = []
    reports = []
    for (N, index, choice), report in results:
        row = {"N": N, "eigenstate": index, "weights": choice, "n_E": n_es[N]}
        row.update(report.model_dump(include={
            "pressure_pi", "pressure_tau_of_Upsi", "c", "rhs", "slack", "c_exhaustive",
        }))
        rows.append(row)
        reports.append({"N": N, "eigenstate": index, "weights": choice, **report.model_dump()})

    checks = []
    for choice in choices:
        subset = [r for r in rows if r["weights"] == choice]
        worst = min(r["slack"] for r in subset)
        checks.append(check(
            f"pressure sum >= -2 log c ({choice} weights)",
            worst >= -SLACK_TOL,
            f"min slack {worst:.3e} over {len(subset)} eigenstates",
        ))
    if any(not r["c_exhaustive"] for r in rows):
        tracker.log_message("Some contraction coefficients were sampled; their slack is not certified", "warning")

    return WorkflowResult(
        tables=[
            Table("corollary.csv", rows, COLUMNS["corollary.csv"]),
            Table("weights.csv", weight_rows, COLUMNS["weights.csv"]),
        ],
        checks=checks,
        documents={"corollary_reports.json": reports},
        summary=f"{len(rows)} reports, min slack {min(r['slack'] for r in rows):.2e}",
    )
