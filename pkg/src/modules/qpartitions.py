"""
Smoothed partitions of unity on the position circle, their quantization into
multiplication operators, and refined products P_alpha / P*_alpha.

Conventions:
    P_alpha  = P_{a(n-1)}(n-1) ... P_{a1}(1) P_{a0},     A(t) = U^-t A U^t   ("forward")
    P*_alpha = P_{a0} P_{a1}(1) ... P_{a(n-1)}(n-1) = P_alpha^dagger        ("reversed")

Weight tables are dense arrays indexed by the base-K code of alpha with a_0
the most significant digit; symbols are 0-based.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .classdyn import decode_codes, encode_symbols
from .numkernel import CapExceededError, operator_norm
from .quantization import QuantumTorusSpace

logger = logging.getLogger(__name__)

Ordering = Literal["forward", "reversed"]

DEFAULT_WEIGHT_CAP = 4 ** 10
DEFAULT_NODE_BUDGET = 20000
_CHUNK_ENTRIES = 1 << 22


def _flat_exp(t: np.ndarray) -> np.ndarray:
    """exp(-1/t) for t > 0, 0 otherwise; every derivative vanishes at 0"""
    out = np.zeros_like(t)
    positive = t > 0
    out[positive] = np.exp(-1.0 / t[positive])
    return out


def _ramp(t: np.ndarray) -> np.ndarray:
    """C-infinity transition from 0 (t <= 0) to 1 (t >= 1)"""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    rise, fall = _flat_exp(t), _flat_exp(1.0 - t)
    return rise / (rise + fall)


@dataclass(frozen=True)
class SmoothPartition:
    """
    K functions f_k on the circle with sum f_k^2 = 1 everywhere.

    f_k is a C-infinity bump over [k/K - w, (k+1)/K + w], normalized
    pointwise by the square root of the sum of squares of all bumps.
    Every support arc has diameter 1/K + 2w <= epsilon.
    """
    K: int
    epsilon: float
    width: float

    @property
    def arc_length(self) -> float:
        return 1.0 / self.K

    @property
    def diameter(self) -> float:
        """Length of the support arcs Omega_k"""
        return support_diameter(self.K, self.width)

    def support(self, k: int) -> Tuple[float, float]:
        """Support arc Omega_k as (start, length); start taken mod 1"""
        if self.K == 1:
            return 0.0, 1.0
        return (k / self.K - self.width) % 1.0, self.diameter

    def _bumps(self, x: np.ndarray) -> np.ndarray:
        L, w = self.arc_length, self.width
        out = np.empty((self.K, x.size))
        for k in range(self.K):
            u = np.mod(x - (k * L - w), 1.0)
            if w == 0.0:
                out[k] = (u < L).astype(float)
                continue
            rising = _ramp(u / (2 * w))
            falling = 1.0 - _ramp((u - L) / (2 * w))
            out[k] = np.where(u < L, rising, np.where(u < L + 2 * w, falling, 0.0))
        return out

    def values(self, x: np.ndarray) -> np.ndarray:
        """(K, len(x)) array of f_k(x)"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.K == 1:
            return np.ones((1, x.size))
        g = self._bumps(x)
        return g / np.sqrt(np.sum(g * g, axis=0))

    def grid_values(self, N: int) -> np.ndarray:
        """f_k(j/N) for j = 0..N-1"""
        return self.values(np.arange(N) / N)


def support_diameter(K: int, width: float) -> float:
    """Diameter of each support arc: the core arc 1/K plus a ramp on either side"""
    return 1.0 if K == 1 else min(1.0, 1.0 / K + 2 * width)


def build_smooth_partition(K: int, epsilon: Optional[float], width: float) -> SmoothPartition:
    """
    Smooth partition of unity subordinate to K equal arcs

    Args:
        K: Number of arcs (>= 1)
        epsilon: Diameter bound on the support arcs; requires 1/K + 2 w <= epsilon.
            None takes the support diameter itself.
        width: Half-width w of each smoothing ramp; 0 gives sharp indicators

    Returns:
        SmoothPartition

    Raises:
        ValueError: If a support arc is longer than epsilon or 2 w >= 1/K
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if width < 0:
        raise ValueError(f"Smoothing width must be >= 0, got {width}")
    if K > 1 and 2 * width >= 1.0 / K:
        raise ValueError(
            f"Smoothing width {width} too large for K={K}: ramps of non-adjacent arcs would overlap"
        )
    diameter = support_diameter(K, width)
    if epsilon is None:
        epsilon = diameter
    if diameter > epsilon + 1e-12:
        raise ValueError(f"Support arcs of length 1/{K} + 2*{width:g} = {diameter:g} exceed epsilon={epsilon}")
    return SmoothPartition(K=K, epsilon=epsilon, width=width)


@dataclass(frozen=True, eq=False)
class QuantumPartition:
    """K diagonal operators P_k = diag(f_k(j/N)) with sum P_k^2 = Id"""
    diagonals: np.ndarray

    @property
    def K(self) -> int:
        return self.diagonals.shape[0]

    @property
    def N(self) -> int:
        return self.diagonals.shape[1]

    def operator(self, k: int) -> np.ndarray:
        return np.diag(self.diagonals[k]).astype(np.complex128)

    @property
    def operators(self) -> List[np.ndarray]:
        return [self.operator(k) for k in range(self.K)]

    def resolution_defect(self) -> float:
        return float(np.max(np.abs(np.sum(self.diagonals ** 2, axis=0) - 1.0)))


def quantize_partition(space: QuantumTorusSpace, sp: SmoothPartition) -> QuantumPartition:
    """Multiplication operators f_k(x) on the position grid"""
    qp = QuantumPartition(diagonals=sp.grid_values(space.N))
    defect = qp.resolution_defect()
    if defect > 1e-12:
        raise ValueError(f"Quantum partition misses the identity by {defect:.3e}")
    return qp


def _check_cap(K: int, n: int, cap: int, what: str) -> None:
    if K ** n > cap:
        raise CapExceededError(f"{what}: K^n = {K}^{n} = {K ** n} exceeds cap {cap}")


def refined_operator(
    qp: QuantumPartition,
    U: np.ndarray,
    alpha: Sequence[int],
    ordering: Ordering = "forward",
    cap: int = DEFAULT_WEIGHT_CAP,
) -> np.ndarray:
    """
    Matrix of P_alpha (forward) or P*_alpha (reversed)

    Args:
        qp: Quantum partition
        U: Propagator
        alpha: 0-based symbols, |alpha| >= 1
        ordering: "forward" or "reversed"
        cap: Largest admissible K^n

    Returns:
        N x N matrix
    """
    n = len(alpha)
    if n < 1:
        raise ValueError("Sequence must contain at least one symbol")
    _check_cap(qp.K, n, cap, "refined_operator")
    encode_symbols(alpha, qp.K)

    # P_alpha = U^-(n-1) P_{a(n-1)} U P_{a(n-2)} U ... U P_{a0}
    M = np.diag(qp.diagonals[alpha[0]]).astype(np.complex128)
    for s in alpha[1:]:
        M = qp.diagonals[s][:, None] * (U @ M)
    M = np.linalg.matrix_power(U.conj().T, n - 1) @ M
    if ordering == "forward":
        return M
    if ordering == "reversed":
        return M.conj().T
    raise ValueError(f"Unknown ordering: {ordering}")


def _tree_blocks(
    start: np.ndarray,
    qp: QuantumPartition,
    step: np.ndarray,
    n: int,
) -> Iterator[np.ndarray]:
    """
    Leaf vectors of the splitting tree, in code order, as (N, m) column blocks.

    Level 0 splits start through the K multipliers; every further level
    applies step once and splits again. Levels are expanded breadth-first
    inside a block and blocks are walked depth-first so memory stays bounded.
    """
    D = qp.diagonals
    K, N = qp.K, qp.N

    def expand(states: np.ndarray, level: int) -> Iterator[np.ndarray]:
        if level == n:
            yield states
            return
        m = states.shape[1]
        if N * m * K > _CHUNK_ENTRIES and m > 1:
            block = max(1, _CHUNK_ENTRIES // (N * K))
            for j in range(0, m, block):
                yield from expand(states[:, j:j + block], level)
            return
        moved = step @ states
        children = moved[:, :, None] * D.T[:, None, :]
        yield from expand(children.reshape(N, m * K), level + 1)

    first = start[:, None] * D.T
    yield from expand(first, 1)


def _reverse_digits(weights: np.ndarray, K: int, n: int) -> np.ndarray:
    """Reindex a dense table so that the digit order of the code is reversed"""
    return weights.reshape((K,) * n).transpose(tuple(range(n - 1, -1, -1))).ravel()


def refined_state_blocks(
    psi: np.ndarray,
    qp: QuantumPartition,
    U: np.ndarray,
    n: int,
    ordering: Ordering = "forward",
) -> Iterator[np.ndarray]:
    """
    Blocks of the vectors P_alpha psi (forward) or P*_alpha psi (reversed).

    Forward blocks come in code order. Reversed blocks come in the order of
    the reversed code (a_{n-1} most significant); callers that need code order
    reindex with the digit reversal.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    if ordering == "forward":
        return _tree_blocks(psi, qp, U, n)
    if ordering == "reversed":
        start = np.linalg.matrix_power(U, n - 1) @ psi
        return _tree_blocks(start, qp, U.conj().T, n)
    raise ValueError(f"Unknown ordering: {ordering}")


@dataclass(frozen=True, eq=False)
class RefinedWeights:
    """Dense table of ||P_alpha psi||^2 over all sequences of length n"""
    n: int
    K: int
    ordering: str
    weights: np.ndarray

    def weight(self, alpha: Sequence[int]) -> float:
        return float(self.weights[encode_symbols(alpha, self.K)])

    def total(self) -> float:
        return float(self.weights.sum())

    def time_reversed(self) -> np.ndarray:
        """Table reindexed by the reversed sequence a -> (a_{n-1}, ..., a_0)"""
        return _reverse_digits(self.weights, self.K, self.n)

    def as_frame(self) -> pd.DataFrame:
        codes = np.arange(self.weights.size)
        symbols = decode_codes(codes, self.n, self.K)
        labels = [".".join(str(s + 1) for s in row) for row in symbols]
        return pd.DataFrame({"symbols": labels, "weight": self.weights})


def refined_weights(
    psi: np.ndarray,
    qp: QuantumPartition,
    U: np.ndarray,
    n: int,
    ordering: Ordering = "forward",
    cap: int = DEFAULT_WEIGHT_CAP,
) -> RefinedWeights:
    """
    ||P_alpha psi||^2 (or ||P*_alpha psi||^2) for every alpha of length n

    Args:
        psi: Normalized state
        qp: Quantum partition
        U: Propagator
        n: Depth (n = 0 gives the single empty-sequence weight 1)
        ordering: "forward" or "reversed"
        cap: Largest admissible K^n

    Returns:
        RefinedWeights indexed by code with a_0 most significant

    Raises:
        CapExceededError: If K^n exceeds cap
    """
    psi = np.asarray(psi, dtype=np.complex128)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("State must be normalized")
    if n == 0:
        return RefinedWeights(0, qp.K, ordering, np.ones(1))
    _check_cap(qp.K, n, cap, "refined_weights")

    parts = [
        np.sum(np.abs(block) ** 2, axis=0)
        for block in refined_state_blocks(psi, qp, U, n, ordering)
    ]
    weights = np.concatenate(parts)
    if ordering == "reversed":
        weights = _reverse_digits(weights, qp.K, n)
    drift = abs(weights.sum() - 1.0)
    if drift > 1e-9:
        logger.warning("Refined weights sum drifts from 1 by %.3e (n=%d)", drift, n)
    return RefinedWeights(n, qp.K, ordering, weights)


@dataclass(frozen=True, eq=False)
class MaxNormTrace:
    """
    Per-depth maxima of refined norms, ||P_alpha psi|| or ||P_alpha||, for n = 1..n_max.

    max_norms are exact when exact is True. Otherwise they are lower bounds
    and upper_bounds holds a certified upper bound per depth.
    """
    max_norms: np.ndarray
    upper_bounds: np.ndarray
    exact: bool
    nodes_expanded: int


def _beam_lower_bound(psi: np.ndarray, qp: QuantumPartition, U: np.ndarray, n_max: int, beam: int) -> float:
    D = qp.diagonals
    states = psi[:, None] * D.T
    for _ in range(1, n_max):
        norms = np.linalg.norm(states, axis=0)
        keep = np.argsort(norms)[::-1][:beam]
        moved = U @ states[:, keep]
        states = (moved[:, :, None] * D.T[:, None, :]).reshape(qp.N, -1)
    return float(np.linalg.norm(states, axis=0).max())


def max_refined_norms(
    psi: np.ndarray,
    qp: QuantumPartition,
    U: np.ndarray,
    n_max: int,
    budget: int = DEFAULT_NODE_BUDGET,
    beam: int = 64,
) -> MaxNormTrace:
    """
    Max over alpha of ||P_alpha psi|| at every depth, without full tables

    Children never exceed their parent in norm, so every ancestor of the
    depth-n_max maximiser has norm at least that maximum. A beam search gives
    a lower bound L on it; a breadth-first sweep that drops nodes below L then
    keeps every ancestor of every per-depth maximiser. When a level holds more
    than budget nodes, only the largest are kept and the trace is flagged
    inexact.

    Args:
        psi: Normalized state
        qp: Quantum partition
        U: Propagator
        n_max: Deepest level
        budget: Max nodes kept per level
        beam: Beam width for the initial lower bound

    Returns:
        MaxNormTrace with entries for n = 1..n_max
    """
    psi = np.asarray(psi, dtype=np.complex128)
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    lower = _beam_lower_bound(psi, qp, U, n_max, beam)
    threshold = lower * (1.0 - 1e-12)

    D = qp.diagonals
    maxima = np.zeros(n_max)
    uppers = np.zeros(n_max)
    dropped_bound = 0.0
    exact = True
    expanded = 0

    states = psi[:, None] * D.T
    for level in range(n_max):
        norms = np.linalg.norm(states, axis=0)
        maxima[level] = norms.max()
        uppers[level] = max(maxima[level], dropped_bound)
        if level == n_max - 1:
            break
        keep = np.nonzero(norms >= threshold)[0]
        if keep.size > budget:
            order = np.argsort(norms[keep])[::-1]
            dropped_bound = max(dropped_bound, float(norms[keep[order[budget]]]))
            keep = keep[order[:budget]]
            exact = False
            logger.info("max_refined_norms: level %d truncated to %d nodes", level + 1, budget)
        expanded += keep.size
        moved = U @ states[:, keep]
        states = (moved[:, :, None] * D.T[:, None, :]).reshape(qp.N, -1)

    return MaxNormTrace(max_norms=maxima, upper_bounds=uppers, exact=exact, nodes_expanded=expanded)


def max_refined_operator_norms(
    qp: QuantumPartition,
    U: np.ndarray,
    n_max: int,
    beam: int = 16,
    tol: float = 1e-6,
    max_iter: int = 2000,
) -> MaxNormTrace:
    """
    Max over alpha of the operator norm ||P_alpha|| at every depth 1..n_max

    P_alpha equals U^-(n-1) times the product D_{a(n-1)} U ... U D_{a0}, so the
    norm is read off the product, built one symbol at a time. Extending alpha
    never increases the norm. Each level keeps the beam largest products;
    the maximum is exact while K^n <= beam and a lower bound afterwards, and
    the largest norm ever dropped bounds every deeper maximum from above.

    Args:
        qp: Quantum partition
        U: Propagator
        n_max: Deepest level
        beam: Products kept per level
        tol: Relative tolerance of each power-iteration norm
        max_iter: Power-iteration cap per product

    Returns:
        MaxNormTrace with entries for n = 1..n_max
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if beam < 1:
        raise ValueError(f"beam must be >= 1, got {beam}")
    D = qp.diagonals.astype(np.complex128)

    maxima = np.zeros(n_max)
    uppers = np.zeros(n_max)
    dropped_bound = 0.0
    exact = True
    expanded = 0

    products = [np.diag(D[k]) for k in range(qp.K)]
    for level in range(n_max):
        norms = np.array([operator_norm(M, tol=tol, max_iter=max_iter) for M in products])
        maxima[level] = norms.max()
        uppers[level] = max(maxima[level], dropped_bound)
        if level == n_max - 1:
            break
        order = np.argsort(norms)[::-1]
        if order.size > beam:
            dropped_bound = max(dropped_bound, float(norms[order[beam]]))
            order = order[:beam]
            exact = False
        expanded += order.size
        products = [D[k][:, None] * (U @ products[j]) for j in order for k in range(qp.K)]

    return MaxNormTrace(max_norms=maxima, upper_bounds=uppers, exact=exact, nodes_expanded=expanded)


def fit_decay_rate(ns: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope of -log(values) against n"""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if ns.size < 2:
        raise ValueError("Need at least two points to fit a decay rate")
    if np.any(values <= 0):
        raise ValueError("Decay fit needs positive values")
    slope, _ = np.polyfit(ns, -np.log(values), 1)
    return float(slope)
