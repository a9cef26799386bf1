"""
Shared pieces of the experiment workflows: result records, the quantized
torus system for one N, eigenstate selection and the keyed worker pool
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Hashable, List, Optional, Tuple, TypeVar

import numpy as np

from ..modules.classdyn import ArcPartition, JacobianContext, ToralAutomorphism
from ..modules.numkernel import unitary_eig
from ..modules.qpartitions import QuantumPartition, SmoothPartition, build_smooth_partition, quantize_partition
from ..modules.quantization import QuantumTorusSpace, cat_propagator, ehrenfest_time
from ..pipeline.errors import Check
from ..utils.config import ExperimentConfig

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass
class Table:
    """CSV table: file name, records and column order"""
    name: str
    rows: List[Dict[str, Any]]
    columns: List[str]


@dataclass
class Plot:
    """SVG line plot: label -> (x, y)"""
    name: str
    series: Dict[str, Tuple[List[float], List[float]]]
    xlabel: str
    ylabel: str
    title: str = ""


@dataclass
class WorkflowResult:
    tables: List[Table] = field(default_factory=list)
    checks: List[Check] = field(default_factory=list)
    plots: List[Plot] = field(default_factory=list)
    documents: Dict[str, Any] = field(default_factory=dict)
    summary: str = ""


@dataclass(frozen=True, eq=False)
class TorusSystem:
    """Everything a quantum workflow needs at one N"""
    N: int
    space: QuantumTorusSpace
    A: ToralAutomorphism
    U: np.ndarray
    sp: SmoothPartition
    qp: QuantumPartition
    n_E: int

    def jacobian_context(self, R_factor: float) -> JacobianContext:
        return JacobianContext(self.A, ArcPartition.uniform_arcs(self.sp.K), R=R_factor * self.A.log_lambda)


def build_system(config: ExperimentConfig, N: int) -> TorusSystem:
    """Propagator, quantum partition and Ehrenfest time at dimension N"""
    A = config.automorphism
    space = QuantumTorusSpace(N)
    U = cat_propagator(space, A)
    sp = build_smooth_partition(config.K, config.epsilon, config.width)
    qp = quantize_partition(space, sp)
    n_E = config.n_E if config.n_E is not None else ehrenfest_time(N, A, config.delta_prime)
    return TorusSystem(N=N, space=space, A=A, U=U, sp=sp, qp=qp, n_E=n_E)


def select_eigenstates(system: TorusSystem, count: int, seed: int) -> List[Tuple[int, np.ndarray]]:
    """
    Up to count normalized eigenvectors, evenly spaced in eigenphase order

    Returns:
        (eigenphase index, vector) pairs
    """
    vectors = unitary_eig(system.U, seed).eigenvectors
    N = system.N
    indices = sorted(set(np.linspace(0, N - 1, min(count, N)).round().astype(int).tolist()))
    return [(j, vectors[:, j] / np.linalg.norm(vectors[:, j])) for j in indices]


def run_keyed(
    tasks: Dict[Hashable, Callable[[], T]],
    workers: int = 1,
    on_done: Optional[Callable[[Hashable, int, int], None]] = None,
) -> List[Tuple[Hashable, T]]:
    """
    Run independent tasks on a bounded thread pool

    Args:
        tasks: key -> zero-argument callable
        workers: Pool size; 1 runs in the calling thread
        on_done: Progress callback (key, completed count, total)

    Returns:
        (key, result) pairs sorted by key, independent of completion order
    """
    results: Dict[Hashable, T] = {}
    total = len(tasks)
    if workers <= 1:
        for i, (key, fn) in enumerate(tasks.items(), start=1):
            results[key] = fn()
            if on_done:
                on_done(key, i, total)
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            future_to_key = {executor.submit(fn): key for key, fn in tasks.items()}
            for i, future in enumerate(as_completed(future_to_key), start=1):
                key = future_to_key[future]
                results[key] = future.result()
                if on_done:
                    on_done(key, i, total)
    return sorted(results.items(), key=lambda item: item[0])


def largest_depth(K: int, cap: int) -> int:
    """Largest n with K^n <= cap"""
    if K == 1:
        return 64
    n = 0
    while K ** (n + 1) <= cap:
        n += 1
    return n
