"""
Quantum ergodicity sweep: eigenbasis variance of Wigner matrix elements
of cos(2 pi x) shrinking with N
"""

import math

from ..modules.entropy import fit_linear
from ..modules.quantization import Observable, QuantumTorusSpace, cat_propagator, quantum_ergodicity_average
from ..pipeline.errors import check
from ..utils.config import ExperimentConfig
from ..utils.progress import get_progress_tracker
from .common import Plot, Table, WorkflowResult, run_keyed

HELP = "Eigenbasis variance of <Op(cos 2 pi x) psi_j, psi_j> against N"
COLUMNS = {
    "qe_sweep.csv": ["N", "observable", "variance"],
    "fit.csv": ["observable", "loglog_slope", "intercept"],
}

OBSERVABLES = {
    "cos_2pi_x": Observable.cosine_position(),
    "exp_2pi_i_x": Observable.exp_position(),
}


def _variances(N: int, config: ExperimentConfig):
    space = QuantumTorusSpace(N)
    U = cat_propagator(space, config.automorphism)
    return {name: quantum_ergodicity_average(space, U, a, config.seed) for name, a in OBSERVABLES.items()}


def run(config: ExperimentConfig) -> WorkflowResult:
    tracker = get_progress_tracker()
    tasks = {N: (lambda N=N: _variances(N, config)) for N in config.N_values}
    results = run_keyed(tasks, config.workers, lambda key, i, total: tracker.step(f"N={key}", i, total))

    rows = [
        {"N": N, "observable": name, "variance": value}
        for N, variances in results
        for name, value in variances.items()
    ]

    fits = []
    checks = []
    series = {}
    for name in OBSERVABLES:
        ns = [r["N"] for r in rows if r["observable"] == name]
        values = [r["variance"] for r in rows if r["observable"] == name]
        series[name] = (ns, values)
        positive = [(N, v) for N, v in zip(ns, values) if v > 0]
        if len(positive) >= 2:
            slope, intercept = fit_linear([math.log(N) for N, _ in positive], [math.log(v) for _, v in positive])
            fits.append({"observable": name, "loglog_slope": slope, "intercept": intercept})
        if len(values) >= 2:
            checks.append(check(
                f"variance decreases with N ({name})",
                values[-1] < values[0],
                f"{values[0]:.3e} at N={ns[0]} -> {values[-1]:.3e} at N={ns[-1]}",
            ))
    if not checks:
        checks.append(check("quantum ergodicity trend", False, "needs at least two values of N"))

    return WorkflowResult(
        tables=[
            Table("qe_sweep.csv", rows, COLUMNS["qe_sweep.csv"]),
            Table("fit.csv", fits, COLUMNS["fit.csv"]),
        ],
        checks=checks,
        plots=[Plot("qe_sweep.svg", series, "N", "eigenbasis variance")],
        summary=", ".join(f"{f['observable']}: slope {f['loglog_slope']:.3f}" for f in fits),
    )
