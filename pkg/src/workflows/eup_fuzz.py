"""
Randomized instances of the weighted entropic uncertainty principle: plain
instances (O = Id, eps = 0) and localized ones with a random contraction O
"""

import numpy as np

from ..modules.eup import SLACK_TOL, check_eup, random_instance
from ..pipeline.errors import check
from ..utils.config import ExperimentConfig
from ..utils.progress import get_progress_tracker
from .common import Table, WorkflowResult, run_keyed

HELP = "Fuzz the weighted uncertainty inequality over random instances"
COLUMNS = {
    "eup_fuzz.csv": [
        "instance", "kind", "d", "cardinality", "pressure_pi", "pressure_tau_of_Upsi",
        "c", "rhs", "slack", "localization_defect", "epsilon", "hypothesis_holds",
    ],
}

DIM_RANGE = (2, 64)
CARDINALITY_RANGE = (2, 5)
WEIGHT_RANGE = (1.0, 10.0)


def _fuzz_one(seed: int, index: int, localized: bool):
    rng = np.random.default_rng([seed, index, int(localized)])
    d = int(rng.integers(DIM_RANGE[0], DIM_RANGE[1] + 1))
    cardinality = int(rng.integers(CARDINALITY_RANGE[0], CARDINALITY_RANGE[1] + 1))
    inst, psi = random_instance(d, cardinality, rng, WEIGHT_RANGE, with_O=localized)
    return d, cardinality, check_eup(inst, psi)


def run(config: ExperimentConfig) -> WorkflowResult:
    """
    config.instances plain instances followed by config.samples localized ones
    """
    tracker = get_progress_tracker()
    tasks = {}
    for i in range(config.instances):
        tasks[(0, i)] = lambda i=i: _fuzz_one(config.seed, i, False)
    for i in range(config.samples):
        tasks[(1, i)] = lambda i=i: _fuzz_one(config.seed, i, True)

    total = len(tasks)
    step = max(1, total // 10)

    def progress(key, done, total):
        if done % step == 0 or done == total:
            tracker.step(f"{done} instances", done, total)

    rows = []
    reports = []
    for (kind, i), (d, cardinality, report) in run_keyed(tasks, config.workers, progress):
        label = "localized" if kind else "plain"
        row = {"instance": i, "kind": label, "d": d, "cardinality": cardinality}
        row.update(report.model_dump(exclude={"c_exhaustive", "pairs_evaluated"}))
        rows.append(row)
        reports.append({"instance": i, "kind": label, **report.model_dump()})

    plain = [r for r in rows if r["kind"] == "plain"]
    localized = [r for r in rows if r["kind"] == "localized"]
    min_plain = min((r["slack"] for r in plain), default=0.0)
    min_localized = min((r["slack"] for r in localized), default=0.0)
    hypothesis_ok = all(r["hypothesis_holds"] for r in localized)

    checks = [
        check("plain instances slack", min_plain >= -SLACK_TOL, f"min slack {min_plain:.3e} over {len(plain)}"),
        check("localization hypothesis holds", hypothesis_ok, f"{len(localized)} localized instances"),
        check(
            "localized instances slack",
            min_localized >= -SLACK_TOL,
            f"min slack {min_localized:.3e} over {len(localized)}",
        ),
    ]
    return WorkflowResult(
        tables=[Table("eup_fuzz.csv", rows, COLUMNS["eup_fuzz.csv"])],
        checks=checks,
        documents={"eup_reports.json": reports},
        summary=f"{len(plain)} plain and {len(localized)} localized instances, min slack {min(min_plain, min_localized):.2e}",
    )
