"""
Weighted entropic uncertainty principle

For partitions of unity (pi_k), (tau_j), an isometry U, a bounded O and
weights v, w, every normalized psi with max_k ||(Id - O) pi_k psi|| <= eps
satisfies

    p_{tau,w}(U psi) + p_{pi,v}(psi) >= -2 log(c + N V W eps),
    c = max_{j,k} w_j v_k ||tau_j U pi_k^dagger O||,

with N the cardinality of the pi family, V = max v and W = max w. This
module measures both sides, instantiates the bound on refined quantum
partitions of the torus and checks the subadditivity of quantum pressures.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from .classdyn import JacobianContext, decode_symbols
from .entropy import pressure, shannon_entropy
from .numkernel import operator_norm, random_isometry, random_unitary
from .qpartitions import QuantumPartition, refined_operator, refined_weights
from .quantization import propagator_power

logger = logging.getLogger(__name__)

SLACK_TOL = 1e-9
DEFAULT_PAIR_CAP = 10 ** 6
DEFAULT_MATRIX_ENTRIES_CAP = 1 << 26

WeightChoice = Union[Literal["unit", "jacobian"], np.ndarray]


class EupReport(BaseModel):
    """Measured sides of the uncertainty inequality for one state"""
    model_config = ConfigDict(frozen=True)

    pressure_pi: float
    pressure_tau_of_Upsi: float
    c: float
    rhs: float
    slack: float
    localization_defect: float
    epsilon: float
    hypothesis_holds: bool
    c_exhaustive: bool = True
    pairs_evaluated: int = 0

    @property
    def passed(self) -> bool:
        """Slack is nonnegative up to tolerance (only meaningful when the hypothesis holds)"""
        return self.slack >= -SLACK_TOL

    def summary_row(self) -> dict:
        return self.model_dump()


def _partition_defect(family: Sequence[np.ndarray]) -> float:
    total = sum(p.conj().T @ p for p in family)
    return float(np.max(np.abs(total - np.eye(total.shape[0]))))


@dataclass(frozen=True, eq=False)
class EupInstance:
    """
    Data of the uncertainty principle

    Attributes:
        pi_family: Operators with sum pi_k^dagger pi_k = Id
        tau_family: Operators with sum tau_j^dagger tau_j = Id
        U: Isometry
        O: Bounded operator
        v: Weights of the pi family (positive)
        w: Weights of the tau family (positive)
        epsilon: Localization tolerance
    """
    pi_family: Tuple[np.ndarray, ...]
    tau_family: Tuple[np.ndarray, ...]
    U: np.ndarray
    O: np.ndarray
    v: np.ndarray
    w: np.ndarray
    epsilon: float = 0.0

    def __post_init__(self):
        if _partition_defect(self.pi_family) > 1e-10:
            raise ValueError("pi family is not a partition of unity")
        if _partition_defect(self.tau_family) > 1e-10:
            raise ValueError("tau family is not a partition of unity")
        U = self.U
        if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[1]))) > 1e-10:
            raise ValueError("U is not an isometry")
        if len(self.v) != len(self.pi_family) or len(self.w) != len(self.tau_family):
            raise ValueError("Weight vectors do not match family sizes")
        if np.any(np.asarray(self.v) <= 0) or np.any(np.asarray(self.w) <= 0):
            raise ValueError("Weights must be positive")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")

    @classmethod
    def unweighted(cls, pi_family, tau_family, U, O=None, epsilon: float = 0.0) -> "EupInstance":
        d = U.shape[1]
        return cls(
            tuple(pi_family),
            tuple(tau_family),
            U,
            np.eye(d, dtype=np.complex128) if O is None else O,
            np.ones(len(pi_family)),
            np.ones(len(tau_family)),
            epsilon,
        )


def contraction_coefficient(inst: EupInstance, workers: int = 1) -> float:
    """
    c = max_{j,k} w_j v_k ||tau_j U pi_k^dagger O||

    Args:
        inst: Instance
        workers: Thread count for the pair norms

    Returns:
        The weighted contraction coefficient
    """
    left = [inst.w[j] * (tau @ inst.U) for j, tau in enumerate(inst.tau_family)]
    right = [inst.v[k] * (pi.conj().T @ inst.O) for k, pi in enumerate(inst.pi_family)]
    pairs = [(j, k) for j in range(len(left)) for k in range(len(right))]

    def pair_norm(pair):
        j, k = pair
        return operator_norm(left[j] @ right[k])

    if workers <= 1:
        return max(pair_norm(p) for p in pairs)

    best = 0.0
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(pair_norm, p) for p in pairs]
        for future in as_completed(futures):
            best = max(best, future.result())
    return best


def localization_defect(psi: np.ndarray, pi_family: Sequence[np.ndarray], O: np.ndarray) -> float:
    """max_k ||(Id - O) pi_k psi||"""
    complement = np.eye(O.shape[0], dtype=np.complex128) - O
    return max(float(np.linalg.norm(complement @ (pi @ psi))) for pi in pi_family)


def _family_weights(family: Sequence[np.ndarray], psi: np.ndarray) -> np.ndarray:
    w = np.array([np.linalg.norm(op @ psi) ** 2 for op in family])
    return w


def check_eup(
    inst: EupInstance,
    psi: np.ndarray,
    c: Optional[float] = None,
    workers: int = 1,
) -> EupReport:
    """
    Evaluate both sides of the inequality for one state

    Args:
        inst: Instance
        psi: Normalized state
        c: Precomputed contraction coefficient (computed when None)
        workers: Thread count for the contraction coefficient

    Returns:
        EupReport; hypothesis_holds is False when the localization defect
        exceeds epsilon, in which case the slack carries no guarantee
    """
    psi = np.asarray(psi, dtype=np.complex128)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("State must be normalized")
    if c is None:
        c = contraction_coefficient(inst, workers)

    p_pi = pressure(_family_weights(inst.pi_family, psi), inst.v)
    p_tau = pressure(_family_weights(inst.tau_family, inst.U @ psi), inst.w)
    cardinality = len(inst.pi_family)
    rhs = -2.0 * math.log(c + cardinality * float(np.max(inst.v)) * float(np.max(inst.w)) * inst.epsilon)
    defect = localization_defect(psi, inst.pi_family, inst.O)
    holds = defect <= inst.epsilon + 1e-12
    if not holds:
        logger.warning("Localization hypothesis violated: defect %.3e > epsilon %.3e", defect, inst.epsilon)
    return EupReport(
        pressure_pi=p_pi,
        pressure_tau_of_Upsi=p_tau,
        c=c,
        rhs=rhs,
        slack=p_pi + p_tau - rhs,
        localization_defect=defect,
        epsilon=inst.epsilon,
        hypothesis_holds=holds,
        pairs_evaluated=len(inst.pi_family) * len(inst.tau_family),
    )


# ===== Special cases and fuzzing =====

def basis_projectors(d: int) -> List[np.ndarray]:
    out = []
    for k in range(d):
        P = np.zeros((d, d), dtype=np.complex128)
        P[k, k] = 1.0
        out.append(P)
    return out


def dft_matrix(N: int) -> np.ndarray:
    """Unitary DFT, F_{jk} = exp(-2 pi i j k / N) / sqrt(N)"""
    j = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(j, j) / N) / np.sqrt(N)


def maassen_uffink_report(U: np.ndarray, psi: np.ndarray) -> EupReport:
    """
    Basis-projector case: h(psi) + h(U psi) >= -2 log max |U_jk|

    Evaluated directly on the coordinates; agrees with check_eup on the
    instance built from basis_projectors.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("State must be normalized")
    c = float(np.max(np.abs(U)))
    h_psi = shannon_entropy(np.abs(psi) ** 2)
    h_upsi = shannon_entropy(np.abs(U @ psi) ** 2)
    rhs = -2.0 * math.log(c)
    return EupReport(
        pressure_pi=h_psi,
        pressure_tau_of_Upsi=h_upsi,
        c=c,
        rhs=rhs,
        slack=h_psi + h_upsi - rhs,
        localization_defect=0.0,
        epsilon=0.0,
        hypothesis_holds=True,
        pairs_evaluated=U.shape[0] * U.shape[1],
    )


def random_partition_of_unity(cardinality: int, d: int, rng: np.random.Generator) -> List[np.ndarray]:
    """Slice a random isometry C^d -> C^{cardinality d} into d x d blocks"""
    V = random_isometry(cardinality * d, d, rng)
    return [V[k * d:(k + 1) * d, :] for k in range(cardinality)]


def random_instance(
    d: int,
    cardinality: int,
    rng: np.random.Generator,
    weights_range: Tuple[float, float] = (1.0, 10.0),
    with_O: bool = False,
) -> Tuple[EupInstance, np.ndarray]:
    """
    Random instance plus a random normalized state

    With with_O, O is a random contraction (unitary times singular values in
    [0, 1]) and epsilon is set to the measured localization defect of the
    drawn state, so the hypothesis holds with equality.
    """
    pi_family = random_partition_of_unity(cardinality, d, rng)
    tau_family = random_partition_of_unity(cardinality, d, rng)
    U = random_unitary(d, rng)
    lo, hi = weights_range
    v = rng.uniform(lo, hi, size=cardinality)
    w = rng.uniform(lo, hi, size=cardinality)
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi /= np.linalg.norm(psi)

    if with_O:
        O = random_unitary(d, rng) * rng.uniform(0.0, 1.0, size=d)
        epsilon = localization_defect(psi, pi_family, O)
    else:
        O = np.eye(d, dtype=np.complex128)
        epsilon = 0.0
    return EupInstance(tuple(pi_family), tuple(tau_family), U, O, v, w, epsilon), psi


# ===== Torus instantiation =====

def jacobian_weights(alphas: Sequence[Sequence[int]], context: JacobianContext) -> np.ndarray:
    """
    v_alpha = J^u_n(alpha)^{-1/2} for sequences of a common length

    A single symbol has the empty product J = 1, hence weight 1.
    """
    lengths = {len(a) for a in alphas}
    if len(lengths) > 1:
        raise ValueError("Sequences must share a common length")
    return np.array([math.exp(-0.5 * context.log_jn(a)) for a in alphas])


def jacobian_weight_table(context: JacobianContext, n: int) -> np.ndarray:
    """Jacobian weights for every code of length n (a_0 most significant)"""
    if n == 0:
        return np.ones(1)
    codes = np.arange(context.P.K ** n, dtype=np.int64)
    return np.exp(-0.5 * context.log_jn_codes(codes, n))


def tempered_exponent(weights: np.ndarray, N: int) -> float:
    """K_1 such that max weight = (2 pi N)^{K_1}"""
    return math.log(float(np.max(weights))) / math.log(2 * math.pi * N)


def _verify_eigenvector(psi: np.ndarray, U: np.ndarray, tol: float = 1e-8) -> None:
    lam = np.vdot(psi, U @ psi)
    residual = np.linalg.norm(U @ psi - lam * psi)
    if residual > tol:
        raise ValueError(f"State is not an eigenvector of U (residual {residual:.3e})")


def _resolve_weights(choice: WeightChoice, context: Optional[JacobianContext], n: int, K: int) -> np.ndarray:
    if isinstance(choice, str):
        if choice == "unit":
            return np.ones(K ** n)
        if choice == "jacobian":
            if context is None:
                raise ValueError("Jacobian weights need a JacobianContext")
            return jacobian_weight_table(context, n)
        raise ValueError(f"Unknown weight choice: {choice}")
    weights = np.asarray(choice, dtype=float)
    if weights.shape != (K ** n,):
        raise ValueError(f"Weight table must have length {K ** n}")
    return weights


def corollary_instance(
    psi: np.ndarray,
    qp: QuantumPartition,
    U: np.ndarray,
    n_E: int,
    weights: WeightChoice = "unit",
    context: Optional[JacobianContext] = None,
    pair_cap: int = DEFAULT_PAIR_CAP,
    matrix_entries_cap: int = DEFAULT_MATRIX_ENTRIES_CAP,
    samples: int = 4096,
    seed: int = 0,
    workers: int = 1,
) -> EupReport:
    """
    Uncertainty principle for pi = (P*_alpha), tau = (P_alpha), U^{n_E}, O = Id, eps = 0

    When all K^{2 n_E} pairs fit under pair_cap (and the K^{n_E} matrices fit
    in memory) an explicit EupInstance is built and checked exhaustively.
    Otherwise the pressures are still exact but c is the max over `samples`
    random pairs, a lower bound, and the report is flagged c_exhaustive=False.

    Args:
        psi: Eigenvector of U
        qp: Quantum partition
        U: Propagator
        n_E: Refinement depth (Ehrenfest time)
        weights: "unit", "jacobian" or an explicit table (used for v = w)
        context: Jacobian context, required for Jacobian weights
        pair_cap: Largest K^{2 n_E} handled exhaustively
        matrix_entries_cap: Largest K^{n_E} N^2 kept in memory
        samples: Sampled pairs in the fallback mode
        seed: Seed of the pair sampler
        workers: Thread count for the pair norms

    Returns:
        EupReport
    """
    psi = np.asarray(psi, dtype=np.complex128)
    _verify_eigenvector(psi, U)
    K, N = qp.K, qp.N
    v = _resolve_weights(weights, context, n_E, K)
    Ut = propagator_power(U, n_E)
    n_alpha = K ** n_E

    exhaustive = n_alpha ** 2 <= pair_cap and n_alpha * N * N <= matrix_entries_cap
    if exhaustive:
        alphas = [decode_symbols(code, n_E, K) for code in range(n_alpha)]
        tau = [refined_operator(qp, U, a, "forward", cap=math.inf) for a in alphas]
        pi = [t.conj().T for t in tau]
        inst = EupInstance(tuple(pi), tuple(tau), Ut, np.eye(N, dtype=np.complex128), v, v, 0.0)
        return check_eup(inst, psi, workers=workers)

    logger.info("corollary_instance: %d pairs exceed the exhaustive cap, sampling %d", n_alpha ** 2, samples)
    rng = np.random.default_rng(seed)
    p_pi = pressure(refined_weights(psi, qp, U, n_E, "reversed").weights, v)
    p_tau = pressure(refined_weights(Ut @ psi, qp, U, n_E, "forward").weights, v)
    c = 0.0
    for _ in range(samples):
        j, k = rng.integers(0, n_alpha, size=2)
        tau_j = refined_operator(qp, U, decode_symbols(int(j), n_E, K), "forward", cap=math.inf)
        tau_k = refined_operator(qp, U, decode_symbols(int(k), n_E, K), "forward", cap=math.inf)
        # pi_k^dagger = (P*_k)^dagger = P_k
        c = max(c, v[j] * v[k] * operator_norm(tau_j @ Ut @ tau_k))
    rhs = -2.0 * math.log(c)
    return EupReport(
        pressure_pi=p_pi,
        pressure_tau_of_Upsi=p_tau,
        c=c,
        rhs=rhs,
        slack=p_pi + p_tau - rhs,
        localization_defect=0.0,
        epsilon=0.0,
        hypothesis_holds=True,
        c_exhaustive=False,
        pairs_evaluated=samples,
    )


def subadditivity_check(
    psi: np.ndarray,
    qp: QuantumPartition,
    U: np.ndarray,
    n_o: int,
    n: int,
    v: Optional[Callable[[int], np.ndarray]] = None,
    n_E: Optional[int] = None,
) -> float:
    """
    Pressure defect R = p_{n_o + n} - p_{n_o} - p_n of the forward refined weights

    Args:
        psi: Normalized state
        qp: Quantum partition
        U: Propagator
        n_o: First block length
        n: Second block length (0 gives R = 0)
        v: Maps a length to its weight table; None for unit weights
        n_E: When given, n_o + n must not exceed it
    """
    if n_E is not None and n_o + n > n_E:
        raise ValueError(f"n_o + n = {n_o + n} exceeds the Ehrenfest time {n_E}")
    if n == 0:
        return 0.0

    def p(k: int) -> float:
        w = refined_weights(psi, qp, U, k, "forward").weights
        if v is None:
            return shannon_entropy(w)
        return pressure(w, v(k))

    return p(n_o + n) - p(n_o) - p(n)
