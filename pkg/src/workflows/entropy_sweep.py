"""
Quantum refined entropies of eigenstates against n, their classical limit
through the smoothed partition, the naive lower-bound fit, and the
partition-of-unity invariants
"""

import math

import numpy as np

from ..modules.entropy import fit_lower_hn, shannon_entropy, smoothed_lebesgue_weights
from ..modules.qpartitions import refined_weights
from ..pipeline.errors import check
from ..utils.config import ExperimentConfig
from ..utils.progress import get_progress_tracker
from .common import Plot, Table, WorkflowResult, build_system, largest_depth, run_keyed, select_eigenstates

HELP = "Quantum entropies h_n of eigenstates, convergence to the classical limit and lower-bound fit"
COLUMNS = {
    "entropies.csv": ["N", "eigenstate", "n", "entropy_forward", "entropy_reversed", "weight_total"],
    "averages.csv": ["N", "n", "mean_entropy", "classical_entropy", "gap", "n_log_K"],
    "fits.csv": ["N", "eigenstate", "n_from", "n_to", "slope", "intercept", "shifted_intercept"],
    "resolution.csv": ["N", "n", "states", "max_total_drift"],
}

BOUND_TOL = 1e-9
RESOLUTION_TOL = 1e-12
WEIGHT_TOL = 1e-9
CLASSICAL_DEPTH = 4
RESOLUTION_POINTS = 10_000
RESOLUTION_STATES = 100


def _state_entropies(system, index, psi, n_max, cap):
    rows = []
    for n in range(1, n_max + 1):
        forward = refined_weights(psi, system.qp, system.U, n, "forward", cap)
        reversed_ = refined_weights(psi, system.qp, system.U, n, "reversed", cap)
        rows.append({
            "N": system.N,
            "eigenstate": index,
            "n": n,
            "entropy_forward": shannon_entropy(forward.weights),
            "entropy_reversed": shannon_entropy(reversed_.weights),
            "weight_total": forward.total(),
        })
    return rows


def _resolution_rows(system, states, seed, cap):
    """Sum of refined weights of random states for n <= n_E"""
    rng = np.random.default_rng([seed, system.N])
    psis = [system.space.random_state(rng) for _ in range(states)]
    rows = []
    for n in range(1, min(system.n_E, largest_depth(system.qp.K, cap)) + 1):
        drift = max(abs(refined_weights(psi, system.qp, system.U, n, "forward", cap).total() - 1.0) for psi in psis)
        rows.append({"N": system.N, "n": n, "states": states, "max_total_drift": drift})
    return rows


def run(config: ExperimentConfig) -> WorkflowResult:
    tracker = get_progress_tracker()
    cap = config.weight_cap
    K = config.K
    depth_cap = largest_depth(K, cap)

    systems = {N: build_system(config, N) for N in config.N_values}
    depths = {
        N: min(config.n_max or 2 * s.n_E, depth_cap) for N, s in systems.items()
    }
    tasks = {}
    for N, system in systems.items():
        for index, psi in select_eigenstates(system, config.eigenstates, config.seed):
            tasks[(N, index)] = lambda s=system, j=index, v=psi, d=depths[N]: _state_entropies(s, j, v, d, cap)
    results = run_keyed(
        tasks, config.workers, lambda key, i, total: tracker.step(f"N={key[0]} eigenstate {key[1]}", i, total)
    )
    rows = [row for _, part in results for row in part]

    tracker.log_message("Classical smoothed-partition weights", "info")
    sp = next(iter(systems.values())).sp
    classical = {
        n: shannon_entropy(smoothed_lebesgue_weights(sp, config.automorphism, n, config.grid_size, config.seed))
        for n in range(1, min(CLASSICAL_DEPTH, max(depths.values())) + 1)
    }

    averages = []
    fits = []
    for N, system in systems.items():
        for n in range(1, depths[N] + 1):
            values = [r["entropy_forward"] for r in rows if r["N"] == N and r["n"] == n]
            mean = float(np.mean(values))
            ref = classical.get(n, math.nan)
            averages.append({
                "N": N,
                "n": n,
                "mean_entropy": mean,
                "classical_entropy": ref,
                "gap": abs(mean - ref) if not math.isnan(ref) else math.nan,
                "n_log_K": n * math.log(K),
            })
        n_from = system.n_E if depths[N] - system.n_E >= 1 else 1
        for index in sorted({r["eigenstate"] for r in rows if r["N"] == N}):
            ns = list(range(n_from, depths[N] + 1))
            hs = [r["entropy_forward"] for r in rows if r["N"] == N and r["eigenstate"] == index and r["n"] >= n_from]
            if len(ns) >= 2:
                fits.append({"N": N, "eigenstate": index, "n_from": n_from, "n_to": depths[N], **fit_lower_hn(ns, hs, N)})

    smallest = systems[config.N_values[0]]
    grid = np.linspace(0.0, 1.0, RESOLUTION_POINTS, endpoint=False)
    resolution_defect = float(np.max(np.abs(np.sum(smallest.sp.values(grid) ** 2, axis=0) - 1.0)))
    resolution = _resolution_rows(smallest, min(config.samples, RESOLUTION_STATES), config.seed, cap)
    worst_drift = max((r["max_total_drift"] for r in resolution), default=0.0)

    bound_ok = all(
        -BOUND_TOL <= r[key] <= r["n"] * math.log(K) + BOUND_TOL
        for r in rows
        for key in ("entropy_forward", "entropy_reversed")
    )
    checks = [
        check("0 <= h_n <= n log K", bound_ok, f"{len(rows)} entropy rows"),
        check(
            "smoothed partition sums to one",
            resolution_defect <= RESOLUTION_TOL,
            f"max |sum f_k^2 - 1| = {resolution_defect:.3e} at {RESOLUTION_POINTS} points",
        ),
        check(
            "refined weights sum to one",
            worst_drift <= WEIGHT_TOL,
            f"max drift {worst_drift:.3e} for n <= n_E (N={smallest.N})",
        ),
    ]
    # Compare N only over depths every N reached
    gap_depths = [n for n in classical if n <= min(depths.values())]
    if len(systems) >= 2 and gap_depths:
        gaps = [
            float(np.mean([a["gap"] for a in averages if a["N"] == N and a["n"] in gap_depths]))
            for N in config.N_values
        ]
        checks.append(check(
            "classical gap decreases in N",
            all(later < earlier for earlier, later in zip(gaps, gaps[1:])),
            f"mean |h_n - h_n(smoothed Leb)| over n <= {max(gap_depths)}: "
            + ", ".join(f"N={N}: {g:.4f}" for N, g in zip(config.N_values, gaps)),
        ))
    series = {
        f"N={N}": (
            [a["n"] for a in averages if a["N"] == N],
            [a["mean_entropy"] for a in averages if a["N"] == N],
        )
        for N in config.N_values
    }
    series["classical"] = (list(classical.keys()), list(classical.values()))
    return WorkflowResult(
        tables=[
            Table("entropies.csv", rows, COLUMNS["entropies.csv"]),
            Table("averages.csv", averages, COLUMNS["averages.csv"]),
            Table("fits.csv", fits, COLUMNS["fits.csv"]),
            Table("resolution.csv", resolution, COLUMNS["resolution.csv"]),
        ],
        checks=checks,
        plots=[Plot("entropies.svg", series, "n", "h_n")],
        summary=f"{len(tasks)} eigenstates over N in {config.N_values}",
    )
