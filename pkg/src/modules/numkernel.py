"""
Dense complex linear algebra kernel

Hermitian and unitary eigendecompositions, operator norms and the von Neumann
entropy. Every other module goes through these routines so the solver choice
(cyclic Jacobi or LAPACK) is made in one place.
"""

import logging
from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

EigMethod = Literal["jacobi", "lapack"]

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
JACOBI_THRESHOLD = 1e-13
RESIDUAL_TOL = 1e-8
PSD_CLIP_TOL = 1e-10
PSD_REJECT_TOL = 1e-8

_default_method: EigMethod = "jacobi"


class EntlabError(Exception):
    """Base class for numerical errors raised by entlab"""
    pass


class NotHermitianError(EntlabError, ValueError):
    """Matrix handed to a Hermitian routine is not Hermitian"""

    def __init__(self, asymmetry: float):
        self.asymmetry = asymmetry
        super().__init__(f"Matrix is not Hermitian (max |H - H^dagger| = {asymmetry:.3e})")


class NotUnitaryError(EntlabError, ValueError):
    """Matrix handed to a unitary routine is not unitary"""

    def __init__(self, defect: float):
        self.defect = defect
        super().__init__(f"Matrix is not unitary (||U^dagger U - I|| = {defect:.3e})")


class NegativeEigenvalueError(EntlabError, ValueError):
    """Density matrix has an eigenvalue below the PSD tolerance"""
    pass


class ConvergenceError(EntlabError, RuntimeError):
    """Iterative solver failed to reach its tolerance"""
    pass


class CapExceededError(EntlabError, ValueError):
    """Requested table or matrix would exceed a configured size cap"""
    pass


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues and an orthonormal family of eigenvectors (as columns)"""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Return V diag(lambda) V^dagger"""
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    @property
    def eigenphases(self) -> np.ndarray:
        """Eigenvalue arguments in [0, 2pi), meaningful for unitary inputs"""
        return np.mod(np.angle(self.eigenvalues), 2 * np.pi)


def set_default_eig_method(method: EigMethod) -> None:
    """
    Select the Hermitian backend used when callers pass method=None

    Args:
        method: "jacobi" (cyclic Jacobi rotations) or "lapack" (numpy.linalg.eigh)
    """
    global _default_method
    if method not in ("jacobi", "lapack"):
        raise ValueError(f"Unknown eigensolver method: {method}")
    _default_method = method


def get_default_eig_method() -> EigMethod:
    return _default_method


def hermitian_defect(H: np.ndarray) -> float:
    """Largest entry of |H - H^dagger|"""
    H = np.asarray(H)
    if H.size == 0:
        return 0.0
    return float(np.max(np.abs(H - H.conj().T)))


def unitarity_defect(U: np.ndarray) -> float:
    """Frobenius norm of U^dagger U - I"""
    U = np.asarray(U)
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[1])))


def _check_square(A: np.ndarray, name: str) -> np.ndarray:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def _round_robin_schedule(n: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    Disjoint index pairs covering every (p, q), p < q, once per sweep.

    Circle method on an even number of slots; for odd n the extra slot is a
    bye and pairs touching it are dropped.
    """
    m = n + (n % 2)
    slots = list(range(m))
    rounds = []
    for _ in range(m - 1):
        P, Q = [], []
        for i in range(m // 2):
            p, q = slots[i], slots[m - 1 - i]
            if p >= n or q >= n:
                continue
            P.append(min(p, q))
            Q.append(max(p, q))
        rounds.append((np.array(P, dtype=np.intp), np.array(Q, dtype=np.intp)))
        slots = [slots[0]] + [slots[-1]] + slots[1:-1]
    return rounds


def _jacobi_eigh(H: np.ndarray, max_sweeps: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cyclic complex Jacobi with parallel (round-robin) ordering.

    Each round applies floor(n/2) disjoint two-sided rotations at once. A pair
    (p, q) with a_pq = r e^{i phi} is first made real by the phase
    diag(1, e^{-i phi}) and then annihilated by the classical real rotation.
    """
    A = np.array(H, dtype=np.complex128)
    n = A.shape[0]
    V = np.eye(n, dtype=np.complex128)
    scale = np.linalg.norm(A)
    if n == 1 or scale == 0.0:
        return np.real(np.diag(A)).copy(), V

    schedule = _round_robin_schedule(n)
    for sweep in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= JACOBI_THRESHOLD * scale:
            logger.debug("Jacobi converged after %d sweeps (n=%d)", sweep, n)
            break

        for P, Q in schedule:
            apq = A[P, Q]
            r = np.abs(apq)
            active = r > 0.0
            if not np.any(active):
                continue
            safe_r = np.where(active, r, 1.0)
            phase = np.where(active, apq / safe_r, 1.0)
            app = A[P, P].real
            aqq = A[Q, Q].real
            theta = (aqq - app) / (2.0 * safe_r)
            sign = np.where(theta >= 0.0, 1.0, -1.0)
            t = np.where(active, sign / (np.abs(theta) + np.sqrt(theta * theta + 1.0)), 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            conj_phase = phase.conj()

            # G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on each (p, q) block
            g00, g01 = c, s
            g10, g11 = -s * conj_phase, c * conj_phase

            colP, colQ = A[:, P], A[:, Q]
            A[:, P] = colP * g00 + colQ * g10
            A[:, Q] = colP * g01 + colQ * g11

            rowP, rowQ = A[P, :], A[Q, :]
            A[P, :] = g00[:, None] * rowP + np.conj(g10)[:, None] * rowQ
            A[Q, :] = g01[:, None] * rowP + np.conj(g11)[:, None] * rowQ

            A[P, Q] = 0.0
            A[Q, P] = 0.0

            vP, vQ = V[:, P], V[:, Q]
            V[:, P] = vP * g00 + vQ * g10
            V[:, Q] = vP * g01 + vQ * g11
    else:
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off > JACOBI_THRESHOLD * scale:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal {off:.3e})"
            )

    return np.real(np.diag(A)).copy(), V


def hermitian_eig(H: np.ndarray, method: Optional[EigMethod] = None) -> SpectralDecomposition:
    """
    Eigendecomposition of a Hermitian matrix

    Args:
        H: Square complex matrix, Hermitian to 1e-12 (relative to its scale)
        method: "jacobi" or "lapack"; None uses the process default

    Returns:
        SpectralDecomposition with real eigenvalues in ascending order

    Raises:
        NotHermitianError: If H is not Hermitian
        ConvergenceError: If the residual check fails
    """
    H = _check_square(H, "H")
    asym = hermitian_defect(H)
    scale = max(1.0, float(np.max(np.abs(H))) if H.size else 1.0)
    if asym > HERMITIAN_TOL * scale:
        raise NotHermitianError(asym)
    H = 0.5 * (H + H.conj().T)

    method = method or _default_method
    if method == "lapack":
        values, vectors = np.linalg.eigh(H)
    elif method == "jacobi":
        values, vectors = _jacobi_eigh(H)
        order = np.argsort(values, kind="stable")
        values, vectors = values[order], vectors[:, order]
    else:
        raise ValueError(f"Unknown eigensolver method: {method}")

    norm = np.linalg.norm(H)
    if H.shape[0] and norm > 0:
        residual = np.linalg.norm(H @ vectors - vectors * values, axis=0).max()
        if residual > RESIDUAL_TOL * norm:
            raise ConvergenceError(f"Hermitian eigen-residual {residual:.3e} exceeds tolerance")

    return SpectralDecomposition(eigenvalues=values, eigenvectors=vectors)


def _clusters(values: np.ndarray, tol: float) -> List[np.ndarray]:
    """Group ascending values into runs whose consecutive gaps are <= tol"""
    if len(values) == 0:
        return []
    breaks = np.nonzero(np.diff(values) > tol)[0] + 1
    return np.split(np.arange(len(values)), breaks)


def _split_invariant_subspace(
    U: np.ndarray,
    W: np.ndarray,
    rng: np.random.Generator,
    method: EigMethod,
    depth: int,
    max_depth: int,
) -> List[np.ndarray]:
    """Recursively split span(W) into eigenspaces of U"""
    k = W.shape[1]
    Ur = W.conj().T @ U @ W
    if k == 1:
        return [W]
    mean = np.trace(Ur) / k
    if np.linalg.norm(Ur - mean * np.eye(k)) <= 1e-10:
        return [W]
    if depth >= max_depth:
        raise ConvergenceError(
            f"Could not resolve a cluster of {k} eigenvalues after {max_depth} refinements"
        )

    theta = rng.uniform(0.0, 2.0 * np.pi)
    herm = np.cos(theta) * (Ur + Ur.conj().T) / 2 + np.sin(theta) * (Ur - Ur.conj().T) / 2j
    decomp = hermitian_eig(herm, method=method)
    values = decomp.eigenvalues
    spread = values[-1] - values[0]
    tol = max(1e-6 * spread, 1e-13)

    pieces = []
    for idx in _clusters(values, tol):
        block = W @ decomp.eigenvectors[:, idx]
        if len(idx) == 1:
            pieces.append(block)
        else:
            logger.debug("Refining cluster of size %d at depth %d", len(idx), depth)
            pieces.extend(_split_invariant_subspace(U, block, rng, method, depth + 1, max_depth))
    return pieces


def unitary_eig(
    U: np.ndarray,
    seed: int,
    method: Optional[EigMethod] = None,
    max_depth: int = 12,
) -> SpectralDecomposition:
    """
    Eigendecomposition of a unitary matrix through Hermitian combinations

    H(theta) = cos(theta) (U + U^dagger)/2 + sin(theta) (U - U^dagger)/(2i)
    shares the eigenvectors of U; theta is seed-drawn. Near-degenerate
    clusters of H(theta) are refined by restricting U to the cluster subspace
    and repeating with a fresh draw until U acts as a scalar there.

    Args:
        U: Unitary matrix
        seed: Seed for the theta draws
        method: Hermitian backend
        max_depth: Refinement depth cap

    Returns:
        SpectralDecomposition ordered by eigenphase in [0, 2pi)

    Raises:
        NotUnitaryError: If ||U^dagger U - I|| > 1e-10
    """
    U = _check_square(U, "U")
    defect = unitarity_defect(U)
    if defect > UNITARY_TOL:
        raise NotUnitaryError(defect)

    method = method or _default_method
    rng = np.random.default_rng(seed)
    n = U.shape[0]
    blocks = _split_invariant_subspace(U, np.eye(n, dtype=np.complex128), rng, method, 0, max_depth)
    V = np.concatenate(blocks, axis=1)

    UV = U @ V
    eigenvalues = np.einsum("ij,ij->j", V.conj(), UV)
    order = np.argsort(np.mod(np.angle(eigenvalues), 2 * np.pi), kind="stable")
    eigenvalues, V, UV = eigenvalues[order], V[:, order], UV[:, order]

    residual = np.linalg.norm(UV - V * eigenvalues, axis=0).max() if n else 0.0
    if residual > RESIDUAL_TOL:
        raise ConvergenceError(f"Unitary eigen-residual {residual:.3e} exceeds tolerance")

    return SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=V)


def operator_norm(A: np.ndarray, tol: float = 1e-10, max_iter: int = 20000) -> float:
    """
    Largest singular value by power iteration on A^dagger A

    Iteration stops once the eigen-residual of the Rayleigh pair drops below
    tol times the current estimate. The start vector is fixed so results are
    reproducible.

    Args:
        A: Matrix of any shape
        tol: Relative tolerance (> 0)
        max_iter: Iteration cap

    Returns:
        Estimate of ||A||_2; 0.0 for the zero matrix
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    A = np.asarray(A, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    M = A.conj().T @ A
    if not np.any(M):
        return 0.0

    n = M.shape[0]
    start = np.random.default_rng(0x5EED)
    x = start.standard_normal(n) + 1j * start.standard_normal(n)
    x /= np.linalg.norm(x)

    estimate = 0.0
    for _ in range(max_iter):
        y = M @ x
        estimate = float(np.real(np.vdot(x, y)))
        residual = np.linalg.norm(y - estimate * x)
        norm_y = np.linalg.norm(y)
        if norm_y == 0.0:
            # start vector landed in the kernel; fall back to a basis vector sweep
            x = np.zeros(n, dtype=np.complex128)
            x[int(np.argmax(np.abs(np.diag(M))))] = 1.0
            continue
        if residual <= tol * max(estimate, 1e-300):
            break
        x = y / norm_y
    else:
        logger.warning("operator_norm reached max_iter=%d (residual %.3e)", max_iter, residual)

    return float(np.sqrt(max(estimate, 0.0)))


def eta_values(x: np.ndarray) -> np.ndarray:
    """Elementwise -x log x with eta(0) = 0"""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = -x[pos] * np.log(x[pos])
    return out


def von_neumann_entropy(rho: np.ndarray, method: Optional[EigMethod] = None) -> float:
    """
    -sum lambda_i log lambda_i over the spectrum of a density matrix

    Args:
        rho: Hermitian, positive semidefinite, unit trace
        method: Hermitian backend

    Returns:
        Entropy in nats

    Raises:
        ValueError: If the trace differs from 1 by more than 1e-8
        NegativeEigenvalueError: If an eigenvalue is below -1e-8
    """
    rho = _check_square(rho, "rho")
    trace = np.trace(rho)
    if abs(trace - 1.0) > 1e-8:
        raise ValueError(f"Density matrix trace is {trace.real:.12g}, expected 1")

    values = hermitian_eig(rho, method=method).eigenvalues
    lowest = float(values.min()) if values.size else 0.0
    if lowest < -PSD_REJECT_TOL:
        raise NegativeEigenvalueError(f"Density matrix has eigenvalue {lowest:.3e}")
    if lowest < -PSD_CLIP_TOL:
        logger.debug("Clipping eigenvalue %.3e to zero", lowest)
    values = np.clip(values, 0.0, None)
    return float(eta_values(values).sum())


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x d unitary (QR of a complex Ginibre matrix with phase fix)"""
    return random_isometry(d, d, rng)


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """
    Random isometry C^cols -> C^rows

    Returns:
        rows x cols matrix V with V^dagger V = I
    """
    if rows < cols:
        raise ValueError(f"Isometry needs rows >= cols, got {rows} < {cols}")
    Z = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    diag = np.diag(R)
    phases = np.where(np.abs(diag) > 0, diag / np.abs(diag), 1.0)
    return Q * phases
