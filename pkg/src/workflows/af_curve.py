"""
AF entropy of eigenstates against n: near-linear growth until the Ehrenfest
time, then flattening
"""

import math

import numpy as np

from ..modules.entropy import af_entropy_curve, fit_linear
from ..pipeline.errors import check
from ..utils.config import ExperimentConfig
from ..utils.progress import get_progress_tracker
from .common import Plot, Table, WorkflowResult, build_system, run_keyed, select_eigenstates

HELP = "AF entropy curve n -> h^AF_n of eigenstates up to n_E + n_extra"
COLUMNS = {
    "af_curve.csv": ["N", "eigenstate", "n", "af_entropy", "n_log_K"],
    "slopes.csv": ["N", "n_E", "early_slope", "late_slope", "saturation_level"],
}

BOUND_TOL = 1e-9
LATE_SPAN = 3


def run(config: ExperimentConfig) -> WorkflowResult:
    tracker = get_progress_tracker()
    log_K = math.log(config.K)

    tasks = {}
    systems = {}
    for N in config.N_values:
        system = build_system(config, N)
        systems[N] = system
        n_max = system.n_E + config.n_extra
        for index, psi in select_eigenstates(system, config.eigenstates, config.seed):
            tasks[(N, index)] = lambda s=system, v=psi, n=n_max: af_entropy_curve(v, s.qp, s.U, n)
    results = run_keyed(
        tasks, config.workers, lambda key, i, total: tracker.step(f"N={key[0]} eigenstate {key[1]}", i, total)
    )

    rows = [
        {"N": N, "eigenstate": index, "n": n, "af_entropy": h, "n_log_K": n * log_K}
        for (N, index), curve in results
        for n, h in enumerate(curve, start=1)
    ]

    slopes = []
    checks = []
    series = {}
    for N, system in systems.items():
        n_E = system.n_E
        n_max = n_E + config.n_extra
        ns = list(range(1, n_max + 1))
        mean_curve = [float(np.mean([r["af_entropy"] for r in rows if r["N"] == N and r["n"] == n])) for n in ns]
        series[f"N={N}"] = (ns, mean_curve)

        early = list(range(1, n_E))
        late = list(range(n_E + 1, min(n_E + LATE_SPAN, n_max) + 1))
        if len(early) < 2 or len(late) < 2:
            tracker.log_message(f"N={N}: n_E={n_E} leaves too few points for both slope fits", "warning")
            continue
        early_slope, _ = fit_linear(early, [mean_curve[n - 1] for n in early])
        late_slope, _ = fit_linear(late, [mean_curve[n - 1] for n in late])
        slopes.append({
            "N": N,
            "n_E": n_E,
            "early_slope": early_slope,
            "late_slope": late_slope,
            "saturation_level": mean_curve[-1],
        })
        checks.append(check(
            f"AF curve flattens after n_E (N={N})",
            early_slope > late_slope,
            f"slope {early_slope:.4f} on [1, {n_E - 1}] vs {late_slope:.4f} on [{late[0]}, {late[-1]}]",
        ))

    series["n log K"] = (series[next(iter(series))][0], [n * log_K for n in series[next(iter(series))][0]])
    bound_ok = all(-BOUND_TOL <= r["af_entropy"] <= r["n_log_K"] + BOUND_TOL for r in rows)
    checks.append(check("0 <= h^AF_n <= n log K", bound_ok, f"{len(rows)} rows"))
    if not slopes:
        checks.append(check("AF slopes fitted", False, "no N had enough points on both sides of n_E"))

    return WorkflowResult(
        tables=[
            Table("af_curve.csv", rows, COLUMNS["af_curve.csv"]),
            Table("slopes.csv", slopes, COLUMNS["slopes.csv"]),
        ],
        checks=checks,
        plots=[Plot("af_curve.svg", series, "n", "h^AF_n")],
        summary=", ".join(f"N={s['N']}: slopes {s['early_slope']:.3f} -> {s['late_slope']:.3f}" for s in slopes),
    )
