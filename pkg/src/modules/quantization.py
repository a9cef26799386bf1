"""
Quantum torus: Weyl translations, observable quantization, the propagator of
a toral automorphism, Wigner matrix elements and Egorov checks.

Position basis |k>, k = 0..N-1, with omega = exp(2 pi i / N):
    X = T(1, 0) = diag(omega^k)          (multiplication by e^{2 pi i x})
    (S psi)_k = psi_{k+1}, S = T(0, 1)   (cyclic shift)
    T(n, m) = exp(i pi n m / N) X^n S^m
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .classdyn import ToralAutomorphism
from .numkernel import NotUnitaryError, UNITARY_TOL, operator_norm, unitarity_defect, unitary_eig

logger = logging.getLogger(__name__)

EGOROV_TOL = 1e-9


@dataclass(frozen=True)
class QuantumTorusSpace:
    """Hilbert space of dimension N; Planck constant hbar = 1/(2 pi N)"""
    N: int

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.N % 2:
            raise ValueError(f"N must be even, got {self.N}")

    @property
    def hbar(self) -> float:
        return 1.0 / (2 * math.pi * self.N)

    def basis_state(self, k: int) -> np.ndarray:
        psi = np.zeros(self.N, dtype=np.complex128)
        psi[k % self.N] = 1.0
        return psi

    def random_state(self, rng: np.random.Generator) -> np.ndarray:
        psi = rng.standard_normal(self.N) + 1j * rng.standard_normal(self.N)
        return psi / np.linalg.norm(psi)


@dataclass(frozen=True)
class Observable:
    """Trigonometric polynomial sum c(n, m) e^{2 pi i (n x + m p)} given by its coefficients"""
    coeffs: Dict[Tuple[int, int], complex] = field(default_factory=dict)

    @classmethod
    def constant(cls, value: complex = 1.0) -> "Observable":
        return cls({(0, 0): complex(value)})

    @classmethod
    def cosine_position(cls) -> "Observable":
        """cos(2 pi x)"""
        return cls({(1, 0): 0.5, (-1, 0): 0.5})

    @classmethod
    def exp_position(cls) -> "Observable":
        """e^{2 pi i x}"""
        return cls({(1, 0): 1.0})

    @classmethod
    def translation(cls, n: int, m: int) -> "Observable":
        return cls({(n, m): 1.0})

    def coeff(self, n: int, m: int) -> complex:
        return complex(self.coeffs.get((n, m), 0.0))

    def integral(self) -> complex:
        """Average over the torus"""
        return self.coeff(0, 0)

    def is_real(self, tol: float = 1e-12) -> bool:
        return all(
            abs(c - np.conj(self.coeff(-n, -m))) <= tol for (n, m), c in self.coeffs.items()
        )

    def conjugate(self) -> "Observable":
        """Complex conjugate function"""
        return Observable({(-n, -m): complex(np.conj(c)) for (n, m), c in self.coeffs.items()})

    def compose(self, A: ToralAutomorphism, t: int) -> "Observable":
        """a o A^t: the coefficient at row index v moves to v A^t"""
        M = A.matrix_power(t)
        moved: Dict[Tuple[int, int], complex] = {}
        for (n, m), c in self.coeffs.items():
            key = (int(n * M[0, 0] + m * M[1, 0]), int(n * M[0, 1] + m * M[1, 1]))
            moved[key] = moved.get(key, 0.0) + c
        return Observable(moved)


def _translation_parts(space: QuantumTorusSpace, n: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Row values and column indices of the monomial matrix T(n, m)"""
    N = space.N
    k = np.arange(N)
    phase = np.exp(1j * np.pi * ((n * m) % (2 * N)) / N)
    values = phase * np.exp(2j * np.pi * ((n * k) % N) / N)
    return values, (k + m) % N


def weyl_translation(space: QuantumTorusSpace, n: int, m: int) -> np.ndarray:
    """
    Unitary T(n, m) translating phase space by (n/N, m/N)

    Satisfies T(n, m) T(n', m') = exp(2 pi i (n' m - n m') / N) T(n', m') T(n, m).
    """
    values, cols = _translation_parts(space, n, m)
    T = np.zeros((space.N, space.N), dtype=np.complex128)
    T[np.arange(space.N), cols] = values
    return T


def apply_translation(space: QuantumTorusSpace, n: int, m: int, psi: np.ndarray) -> np.ndarray:
    """T(n, m) psi without forming the matrix (psi may be a vector or a column block)"""
    values, cols = _translation_parts(space, n, m)
    psi = np.asarray(psi)
    if psi.ndim == 1:
        return values * psi[cols]
    return values[:, None] * psi[cols, :]


def quantize_observable(space: QuantumTorusSpace, a: Observable) -> np.ndarray:
    """Op_N(a) = sum c(n, m) T(n, m); Hermitian when a is real"""
    out = np.zeros((space.N, space.N), dtype=np.complex128)
    rows = np.arange(space.N)
    for (n, m), c in a.coeffs.items():
        if c == 0:
            continue
        values, cols = _translation_parts(space, n, m)
        out[rows, cols] += c * values
    return out


def cat_propagator(space: QuantumTorusSpace, A: ToralAutomorphism, certify: bool = True) -> np.ndarray:
    """
    Unitary quantizing the automorphism

    U_{k', k} = (i N b)^{-1/2} exp{(i pi / (N b)) (a k^2 - 2 k k' + d k'^2)}.
    For |b| > 1 the kernel is summed over the |b| lifts k + rN so that it is
    N-periodic; such matrices are only returned when the unitarity and
    intertwining certificate passes.

    Args:
        space: Quantum torus of even dimension N
        A: Automorphism with b != 0
        certify: Run the unitarity and generator-intertwining checks

    Returns:
        N x N unitary matrix

    Raises:
        ValueError: If b = 0 or the certificate fails
        NotUnitaryError: If the constructed matrix is not unitary
    """
    if A.b == 0:
        raise ValueError("Propagator formula needs b != 0")
    N, a, b, d = space.N, A.a, A.b, A.d
    k = np.arange(N, dtype=np.int64)
    kp = k[:, None]
    prefactor = complex(1j * N * b) ** -0.5

    U = np.zeros((N, N), dtype=np.complex128)
    for r in range(abs(b)):
        kk = k[None, :] + r * N
        # exponent reduced modulo 2 N b before scaling keeps the phase accurate
        expo = (a * kk * kk - 2 * kk * kp + d * kp * kp) % (2 * N * b)
        U += np.exp(1j * np.pi * expo / (N * b))
    U *= prefactor
    if abs(b) > 1:
        col_norms = np.linalg.norm(U, axis=0)
        if np.any(col_norms < 1e-12):
            raise ValueError(f"Propagator kernel degenerates for b={b}, N={N}")
        U /= col_norms

    if certify:
        defect = unitarity_defect(U)
        if defect > UNITARY_TOL:
            raise NotUnitaryError(defect)
        cert = egorov_certificate(space, A, U, max_index=1)
        if cert > EGOROV_TOL:
            raise ValueError(f"Propagator fails the intertwining check (defect {cert:.3e})")
    return U


def intertwining_defect(
    space: QuantumTorusSpace,
    A: ToralAutomorphism,
    Ut: np.ndarray,
    n: int,
    m: int,
    t: int = 1,
) -> float:
    """
    Distance between T(n, m) U^t and the closest unit-modulus multiple of
    U^t T((n, m) A^t), as a max-entry norm

    Equivalent to U^-t T(n, m) U^t being a phase times T((n, m) A^t); both
    sides are U^t with permuted and rescaled rows or columns, so no matrix
    product is formed.

    Args:
        space: Quantum torus
        A: Automorphism
        Ut: Propagator power U^t
        n, m: Translation index
        t: The power held by Ut
    """
    M = A.matrix_power(t)
    left = apply_translation(space, n, m, Ut)
    values, cols = _translation_parts(space, int(n * M[0, 0] + m * M[1, 0]), int(n * M[0, 1] + m * M[1, 1]))
    right = np.empty_like(Ut)
    right[:, cols] = Ut * values[None, :]
    phase = np.vdot(right, left) / space.N
    if abs(abs(phase) - 1.0) > 1e-6:
        return float(np.max(np.abs(left - right)))
    phase /= abs(phase)
    return float(np.max(np.abs(left - phase * right)))


def egorov_certificate(
    space: QuantumTorusSpace,
    A: ToralAutomorphism,
    Ut: np.ndarray,
    max_index: int = 3,
    t: int = 1,
) -> float:
    """Largest intertwining defect of U^t over all |n|, |m| <= max_index"""
    worst = 0.0
    for n in range(-max_index, max_index + 1):
        for m in range(-max_index, max_index + 1):
            worst = max(worst, intertwining_defect(space, A, Ut, n, m, t))
    return worst


def propagator_power(U: np.ndarray, t: int) -> np.ndarray:
    """U^t for any integer t (negative powers through U^dagger)"""
    base = U if t >= 0 else U.conj().T
    return np.linalg.matrix_power(base, abs(t))


def egorov_defect(
    space: QuantumTorusSpace,
    U: np.ndarray,
    A: ToralAutomorphism,
    a: Observable,
    t: int,
) -> float:
    """
    Operator-norm defect ||U^{-t} Op(a) U^t - Op(a o A^t)||

    Args:
        space: Quantum torus
        U: Propagator of A
        A: Automorphism
        a: Observable
        t: Integer time

    Returns:
        The defect; machine-small for linear automorphisms
    """
    if t == 0:
        return 0.0
    Ut = propagator_power(U, t)
    evolved = Ut.conj().T @ quantize_observable(space, a) @ Ut
    return operator_norm(evolved - quantize_observable(space, a.compose(A, t)))


def wigner_element(psi: np.ndarray, a: Observable, space: Optional[QuantumTorusSpace] = None) -> complex:
    """<Op(a) psi, psi> for a normalized state"""
    psi = np.asarray(psi, dtype=np.complex128)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("State must be normalized")
    space = space or QuantumTorusSpace(psi.size)
    total = 0j
    for (n, m), c in a.coeffs.items():
        total += c * np.vdot(psi, apply_translation(space, n, m, psi))
    return complex(total)


def ehrenfest_time(N: int, A: ToralAutomorphism, delta_prime: float = 0.05) -> int:
    """n_E = floor((1 - delta') log(2 pi N) / log(lambda_plus))"""
    if not 0 <= delta_prime < 1:
        raise ValueError(f"delta_prime must lie in [0, 1), got {delta_prime}")
    return int(math.floor((1 - delta_prime) * math.log(2 * math.pi * N) / A.log_lambda))


def first_ehrenfest_time(N: int, A: ToralAutomorphism) -> float:
    """n_1 = |log hbar| / Lambda with one unstable direction"""
    return math.log(2 * math.pi * N) / A.log_lambda


def quantum_ergodicity_average(
    space: QuantumTorusSpace,
    U: np.ndarray,
    a: Observable,
    seed: int = 0,
) -> float:
    """
    Eigenbasis average of |<Op(a) psi_j, psi_j> - integral of a|^2

    Returns:
        Mean squared deviation over the N eigenvectors of U
    """
    vectors = unitary_eig(U, seed).eigenvectors
    mean = a.integral()
    deviations = [
        abs(wigner_element(vectors[:, j] / np.linalg.norm(vectors[:, j]), a, space) - mean) ** 2
        for j in range(space.N)
    ]
    return float(np.mean(deviations))
