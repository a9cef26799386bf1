"""
Entropy and pressure functionals

Shannon entropy of weight vectors, classical refined entropies and KS
estimates, quantum refined entropies, weighted pressures, the diagonal
instrument weights and the off-diagonal (history) density matrix with its
von Neumann entropy. All logarithms are natural.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .classdyn import (
    ArcPartition,
    InvariantMeasure,
    JacobianContext,
    ToralAutomorphism,
    cylinder_table,
    apply_map_array,
    cylinder_tables,
    lebesgue_samples,
    ruelle_bound,
    DEFAULT_GRID_SIZE,
)
from .numkernel import CapExceededError, eta_values, hermitian_eig, von_neumann_entropy
from .qpartitions import (
    Ordering,
    QuantumPartition,
    SmoothPartition,
    refined_state_blocks,
    refined_weights,
    DEFAULT_WEIGHT_CAP,
)

logger = logging.getLogger(__name__)

DEFAULT_MATRIX_CAP = 4096

WeightLike = Union[np.ndarray, pd.Series, Sequence[float]]


def eta(s: float) -> float:
    """-s log s on [0, 1], with eta(0) = 0"""
    if s < 0.0 or s > 1.0 + 1e-12:
        raise ValueError(f"eta is defined on [0, 1], got {s}")
    s = min(float(s), 1.0)
    return 0.0 if s == 0.0 else -s * math.log(s)


def _as_weights(w: WeightLike) -> np.ndarray:
    arr = np.asarray(w, dtype=float)
    if arr.size and arr.min() < -1e-12:
        raise ValueError(f"Weights must be nonnegative, got {arr.min():.3e}")
    if arr.sum() > 1.0 + 1e-9:
        raise ValueError(f"Weights sum to {arr.sum():.12g} > 1")
    return np.clip(arr, 0.0, None)


def shannon_entropy(w: WeightLike) -> float:
    """sum eta(w_i) over a (sub-)probability vector"""
    return float(eta_values(_as_weights(w)).sum())


def pressure(w: WeightLike, v: WeightLike) -> float:
    """
    sum eta(w_a) - sum w_a log(v_a^2)

    Args:
        w: Weights; labeled pandas Series are aligned by label
        v: Positive pressure weights with the same labels

    Raises:
        ValueError: If the label sets differ or any v_a <= 0
    """
    if isinstance(w, pd.Series) and isinstance(v, pd.Series):
        if set(w.index) != set(v.index):
            raise ValueError("Weight and pressure-weight label sets differ")
        v = v.reindex(w.index)
    w_arr = _as_weights(w)
    v_arr = np.asarray(v, dtype=float)
    if v_arr.shape != w_arr.shape:
        raise ValueError(f"Label mismatch: {w_arr.shape} weights vs {v_arr.shape} pressure weights")
    if np.any(v_arr <= 0):
        raise ValueError("Pressure weights must be positive")
    return float(eta_values(w_arr).sum() - 2.0 * np.dot(w_arr, np.log(v_arr)))


# ===== Classical =====

def classical_refined_entropy(
    mu: InvariantMeasure,
    A: ToralAutomorphism,
    P: ArcPartition,
    n: int,
    grid_size: int = DEFAULT_GRID_SIZE,
    seed: int = 0,
) -> float:
    """h_n(mu, P) = sum over |alpha| = n of eta(mu(E_alpha))"""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return shannon_entropy(cylinder_table(mu, A, P, n, grid_size, seed).weights)


@dataclass
class KsEstimate:
    """Refined entropies h_1..h_{n_max} and the two KS estimators derived from them"""
    entropies: List[float]
    inf_ratio: float
    differences: List[float]
    subadditivity_violation: float
    ratio_monotone: bool
    max_weight: float = 1.0

    @property
    def difference_estimate(self) -> float:
        """h_{n_max} - h_{n_max - 1}"""
        return self.differences[-1] if self.differences else self.entropies[-1]


def ks_entropy_estimate(
    mu: InvariantMeasure,
    A: ToralAutomorphism,
    P: ArcPartition,
    n_max: int,
    grid_size: int = DEFAULT_GRID_SIZE,
    seed: int = 0,
    tol: float = 1e-9,
) -> KsEstimate:
    """
    KS entropy estimate from refined entropies

    inf h_n/n converges like O(1/n); the difference h_{n+1} - h_n converges
    much faster and is the reported estimate.

    Args:
        mu, A, P: Measure, automorphism, partition
        n_max: Deepest refinement
        grid_size: Lebesgue sampling grid side
        seed: Sampling seed
        tol: Slack allowed in the subadditivity and monotonicity checks
    """
    tables = cylinder_tables(mu, A, P, n_max, grid_size, seed)
    hs = [shannon_entropy(t.weights) for t in tables]
    ratios = [h / n for n, h in enumerate(hs, start=1)]
    diffs = [hs[i + 1] - hs[i] for i in range(len(hs) - 1)]

    violation = -math.inf
    for n in range(1, n_max + 1):
        for m in range(1, n_max - n + 1):
            violation = max(violation, hs[n + m - 1] - hs[n - 1] - hs[m - 1])
    monotone = all(
        ratios[m - 1] <= ratios[n - 1] + tol
        for n in range(1, n_max + 1)
        for m in range(2 * n, n_max + 1, n)
    )
    return KsEstimate(
        entropies=hs,
        inf_ratio=min(ratios),
        differences=diffs,
        subadditivity_violation=0.0 if violation == -math.inf else violation,
        ratio_monotone=monotone,
        max_weight=float(tables[-1].weights.max()),
    )


def classical_pressure(
    mu: InvariantMeasure,
    context: JacobianContext,
    n: int,
    grid_size: int = DEFAULT_GRID_SIZE,
    seed: int = 0,
) -> float:
    """h_n(mu) + sum mu(E_alpha) log J^u_n(alpha), i.e. the pressure with v = J^{-1/2}"""
    table = cylinder_table(mu, context.A, context.P, n, grid_size, seed)
    log_j = context.log_jn_codes(table.codes, n)
    return shannon_entropy(table.weights) + float(np.dot(table.weights, log_j))


def classical_subadditivity_defect(
    mu: InvariantMeasure,
    context: JacobianContext,
    n_o: int,
    n: int,
    grid_size: int = DEFAULT_GRID_SIZE,
    seed: int = 0,
) -> float:
    """p_{n_o + n} - p_{n_o} - p_n for classical pressures; <= 0 up to sampling noise"""
    if n == 0:
        return 0.0
    tables = cylinder_tables(mu, context.A, context.P, n_o + n, grid_size, seed)

    def p(k: int) -> float:
        t = tables[k - 1]
        return shannon_entropy(t.weights) + float(np.dot(t.weights, context.log_jn_codes(t.codes, k)))

    return p(n_o + n) - p(n_o) - p(n)


def decay_exponent(weights: WeightLike, n: int) -> float:
    """Largest beta with max weight <= e^{-beta n}"""
    w = _as_weights(weights)
    top = float(w.max())
    if top <= 0:
        return math.inf
    return -math.log(top) / n


def semiclassical_bounds(mu: InvariantMeasure, A: ToralAutomorphism) -> Dict[str, float]:
    """
    Entropy lower bounds evaluated with one unstable direction (d = 2)

    Returns:
        ruelle: |int log J^u d mu|
        main_bound: ruelle - (d - 1)/2 lambda_max
        earlier_bound: 3/2 ruelle - (d - 1) lambda_max
        conjectured_bound: ruelle / 2
    """
    ruelle = ruelle_bound(mu, A)
    lam_max = A.log_lambda
    return {
        "ruelle": ruelle,
        "main_bound": ruelle - 0.5 * lam_max,
        "earlier_bound": 1.5 * ruelle - lam_max,
        "conjectured_bound": 0.5 * ruelle,
    }


def smoothed_lebesgue_weights(
    sp: SmoothPartition,
    A: ToralAutomorphism,
    n: int,
    grid_size: int = DEFAULT_GRID_SIZE,
    seed: int = 0,
    cap: int = DEFAULT_WEIGHT_CAP,
) -> np.ndarray:
    """
    Classical limit of the quantum weights: the Lebesgue integral of
    prod_j f_{a_j}(x_j)^2, where x_j is the position of A^j(x, p)

    Args:
        sp: Smooth partition of the position circle
        A: Automorphism
        n: Depth (>= 1)
        grid_size: Side of the stratified sampling grid
        seed: Jitter seed
        cap: Largest admissible K^n

    Returns:
        Dense table indexed by code (a_0 most significant)
    """
    size = sp.K ** n
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if size > cap:
        raise CapExceededError(f"smoothed_lebesgue_weights: K^n = {size} exceeds cap {cap}")
    step = max(1, (1 << 22) // size)
    totals = np.zeros(size)
    for pos, mom in lebesgue_samples(grid_size, np.random.default_rng(seed)):
        for start in range(0, pos.size, step):
            x, p = pos[start:start + step], mom[start:start + step]
            prod = (sp.values(x) ** 2).T
            for _ in range(1, n):
                x, p = apply_map_array(A, x, p)
                prod = (prod[:, :, None] * (sp.values(x) ** 2).T[:, None, :]).reshape(x.size, -1)
            totals += prod.sum(axis=0)
    return totals / float(grid_size) ** 2


# ===== Quantum =====

def quantum_entropy(
    psi: np.ndarray,
    qp: QuantumPartition,
    U: np.ndarray,
    n: int,
    ordering: Ordering = "forward",
    cap: int = DEFAULT_WEIGHT_CAP,
) -> float:
    """sum eta(||P_alpha psi||^2), or with P*_alpha for the reversed ordering"""
    return shannon_entropy(refined_weights(psi, qp, U, n, ordering, cap).weights)


def quantum_pressure(
    psi: np.ndarray,
    qp: QuantumPartition,
    U: np.ndarray,
    n: int,
    v: Optional[np.ndarray] = None,
    ordering: Ordering = "forward",
    cap: int = DEFAULT_WEIGHT_CAP,
) -> float:
    """Pressure of the refined weights of psi; v = None means unit weights"""
    w = refined_weights(psi, qp, U, n, ordering, cap).weights
    if v is None:
        return shannon_entropy(w)
    return pressure(w, v)


def _pure_components(state: np.ndarray) -> List[tuple]:
    """(probability, vector) pairs of a pure state or a density matrix"""
    state = np.asarray(state, dtype=np.complex128)
    if state.ndim == 1:
        return [(1.0, state)]
    decomp = hermitian_eig(state)
    comps = []
    for p, vec in zip(decomp.eigenvalues, decomp.eigenvectors.T):
        if p < -1e-8:
            raise ValueError(f"Density matrix has negative eigenvalue {p:.3e}")
        if p > 1e-14:
            comps.append((float(p), vec))
    return comps


def sz_instrument_weights(
    state: np.ndarray,
    qp: QuantumPartition,
    U: np.ndarray,
    n: int,
    cap: int = DEFAULT_WEIGHT_CAP,
) -> np.ndarray:
    """
    tr(P_alpha rho P_alpha^dagger) for every alpha of length n

    Args:
        state: Normalized vector or density matrix
    """
    total = None
    for p, vec in _pure_components(state):
        w = p * refined_weights(vec / np.linalg.norm(vec), qp, U, n, "forward", cap).weights
        total = w if total is None else total + w
    return total


def _leaf_matrix(vec: np.ndarray, qp: QuantumPartition, U: np.ndarray, n: int) -> np.ndarray:
    return np.concatenate(list(refined_state_blocks(vec, qp, U, n, "forward")), axis=1)


def af_density_matrix(
    state: np.ndarray,
    qp: QuantumPartition,
    U: np.ndarray,
    n: int,
    cap: int = DEFAULT_MATRIX_CAP,
) -> np.ndarray:
    """
    History density matrix [rho_n]_{a', a} = tr(P_{a'} rho P_a^dagger)

    Returns:
        K^n x K^n Hermitian PSD matrix of unit trace

    Raises:
        CapExceededError: If K^n > cap
    """
    if qp.K ** n > cap:
        raise CapExceededError(f"af_density_matrix: K^n = {qp.K ** n} exceeds cap {cap}")
    rho_n = np.zeros((qp.K ** n, qp.K ** n), dtype=np.complex128)
    for p, vec in _pure_components(state):
        Phi = _leaf_matrix(vec / np.linalg.norm(vec), qp, U, n)
        rho_n += p * (Phi.T @ Phi.conj())
    return rho_n


def af_entropy(
    state: np.ndarray,
    qp: QuantumPartition,
    U: np.ndarray,
    n: int,
    cap: int = DEFAULT_MATRIX_CAP,
) -> float:
    """
    tr eta(rho_n)

    When K^n exceeds the matrix cap or the Hilbert dimension, the entropy is
    taken from the dual Gram matrix sum_a phi_a phi_a^dagger, which carries
    the same nonzero spectrum, accumulated leaf block by leaf block.
    """
    comps = _pure_components(state)
    size = qp.K ** n
    dual_dim = qp.N * len(comps)
    if size <= cap and size <= dual_dim:
        return von_neumann_entropy(af_density_matrix(state, qp, U, n, cap))

    # every component walks the same tree, so leaf blocks line up across components
    gram = np.zeros((dual_dim, dual_dim), dtype=np.complex128)
    iters = [
        refined_state_blocks(vec / np.linalg.norm(vec), qp, U, n, "forward") for _, vec in comps
    ]
    for blocks in zip(*iters):
        stacked = np.vstack([np.sqrt(p) * b for (p, _), b in zip(comps, blocks)])
        gram += stacked @ stacked.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    return von_neumann_entropy(gram)


def af_entropy_curve(
    state: np.ndarray,
    qp: QuantumPartition,
    U: np.ndarray,
    n_max: int,
    cap: int = DEFAULT_MATRIX_CAP,
) -> List[float]:
    """[h^AF_1, ..., h^AF_{n_max}]"""
    return [af_entropy(state, qp, U, n, cap) for n in range(1, n_max + 1)]


def fit_linear(ns: Sequence[float], values: Sequence[float]) -> tuple:
    """Least-squares (slope, intercept)"""
    slope, intercept = np.polyfit(np.asarray(ns, dtype=float), np.asarray(values, dtype=float), 1)
    return float(slope), float(intercept)


def fit_lower_hn(ns: Sequence[int], hs: Sequence[float], N: int) -> Dict[str, float]:
    """
    Fit h_n ~ slope n + intercept and report the intercept shifted by
    (1/2) log(2 pi N), the form of the naive entropy lower bound
    """
    slope, intercept = fit_linear(ns, hs)
    return {
        "slope": slope,
        "intercept": intercept,
        "shifted_intercept": intercept + 0.5 * math.log(2 * math.pi * N),
    }
