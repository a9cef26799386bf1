"""
Classical hyperbolic torus dynamics

Toral automorphisms, arc partitions of the position circle, invariant
measures, cylinder-set weights of refined partitions, coarse-grained unstable
Jacobians and Ruelle bounds.

Symbols are 0-based internally (0..K-1). A sequence alpha = (a_0, ..., a_{n-1})
is encoded as the integer sum a_i K^(n-1-i), so a_0 is the most significant
digit. Human-facing labels are 1-based and dot separated ("1.3.2").
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 512
DEFAULT_R_FACTOR = 20.0
MAX_ORBIT_DENOMINATOR = 64
_CHUNK_POINTS = 1 << 20


@dataclass(frozen=True)
class ToralAutomorphism:
    """Integer unimodular hyperbolic matrix [[a, b], [c, d]] acting on (R/Z)^2"""
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(
                f"Automorphism must have determinant 1, got {self.a * self.d - self.b * self.c}"
            )
        if abs(self.a + self.d) <= 2:
            raise ValueError(f"Automorphism is not hyperbolic (|trace| = {abs(self.a + self.d)})")

    @classmethod
    def cat_map(cls) -> "ToralAutomorphism":
        """Arnold's cat map [[2, 1], [1, 1]]"""
        return cls(2, 1, 1, 1)

    @classmethod
    def from_list(cls, entries: Sequence[int]) -> "ToralAutomorphism":
        a, b, c, d = (int(v) for v in entries)
        return cls(a, b, c, d)

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def lambda_plus(self) -> float:
        """Expanding eigenvalue modulus"""
        tr = abs(self.trace)
        return (tr + math.sqrt(tr * tr - 4)) / 2

    @property
    def log_lambda(self) -> float:
        """Lyapunov exponent log(lambda_plus); plays both the minimal and maximal expansion rate"""
        return math.log(self.lambda_plus)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.int64)

    def inverse(self) -> "ToralAutomorphism":
        return ToralAutomorphism(self.d, -self.b, -self.c, self.a)

    def matrix_power(self, t: int) -> np.ndarray:
        """Integer matrix A^t for any integer t (A^0 is the identity)"""
        base = self.matrix if t >= 0 else self.inverse().matrix
        M = np.eye(2, dtype=np.int64)
        for _ in range(abs(t)):
            M = M @ base
        return M

    def to_list(self) -> List[int]:
        return [self.a, self.b, self.c, self.d]


def apply_map(A: ToralAutomorphism, x: Tuple[float, float]) -> Tuple[float, float]:
    """
    One step of the automorphism on a torus point

    Args:
        A: Automorphism
        x: (position, momentum) in [0, 1)^2

    Returns:
        (a x + b p mod 1, c x + d p mod 1)
    """
    pos, mom = x
    if not (0.0 <= pos < 1.0 and 0.0 <= mom < 1.0):
        raise ValueError(f"Torus coordinates must lie in [0, 1), got {x}")
    return ((A.a * pos + A.b * mom) % 1.0, (A.c * pos + A.d * mom) % 1.0)


def apply_map_array(A: ToralAutomorphism, pos: np.ndarray, mom: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised apply_map on coordinate arrays"""
    return np.mod(A.a * pos + A.b * mom, 1.0), np.mod(A.c * pos + A.d * mom, 1.0)


# ===== Partitions =====

@dataclass(frozen=True)
class ArcPartition:
    """
    K half-open arcs [b_k, b_{k+1}) of the position circle, with b_0 = 0 and
    b_K = 1. Each arc lifts to the vertical strip arc x circle of the torus.
    """
    boundaries: Tuple[float, ...]
    uniform: bool = False

    def __post_init__(self):
        b = self.boundaries
        if len(b) < 2:
            raise ValueError("An arc partition needs at least one arc")
        if b[0] != 0.0 or b[-1] != 1.0:
            raise ValueError(f"Arc boundaries must start at 0 and end at 1, got {b[0]}..{b[-1]}")
        if any(b[i + 1] <= b[i] for i in range(len(b) - 1)):
            raise ValueError("Arc boundaries must be strictly increasing")

    @classmethod
    def uniform_arcs(cls, K: int) -> "ArcPartition":
        """K equal arcs [k/K, (k+1)/K)"""
        if K < 1:
            raise ValueError(f"K must be >= 1, got {K}")
        return cls(tuple([k / K for k in range(K)] + [1.0]), uniform=True)

    @classmethod
    def from_boundaries(cls, cuts: Sequence[float]) -> "ArcPartition":
        inner = sorted(float(c) for c in cuts if 0.0 < float(c) < 1.0)
        return cls(tuple([0.0] + inner + [1.0]))

    @property
    def K(self) -> int:
        return len(self.boundaries) - 1

    @property
    def dia(self) -> float:
        """Largest arc length (the diameter bound epsilon)"""
        return max(self.boundaries[i + 1] - self.boundaries[i] for i in range(self.K))

    def arc(self, k: int) -> Tuple[float, float]:
        return self.boundaries[k], self.boundaries[k + 1]

    def index(self, x: np.ndarray) -> np.ndarray:
        """Arc index of positions in [0, 1)"""
        x = np.asarray(x, dtype=float)
        if self.uniform:
            return np.minimum((x * self.K).astype(np.int64), self.K - 1)
        inner = np.asarray(self.boundaries[1:-1])
        return np.searchsorted(inner, x, side="right").astype(np.int64)

    def index_exact(self, numerators: np.ndarray, q: int) -> np.ndarray:
        """Arc index of the rational positions i/q, exact for uniform partitions"""
        numerators = np.asarray(numerators, dtype=np.int64) % q
        if self.uniform:
            return (numerators * self.K) // q
        return self.index(numerators / q)


# ===== Symbol sequences =====

def encode_symbols(alpha: Sequence[int], K: int) -> int:
    """Base-K code with alpha[0] most significant; symbols are 0-based"""
    code = 0
    for s in alpha:
        if not 0 <= s < K:
            raise ValueError(f"Symbol {s} outside [0, {K - 1}]")
        code = code * K + int(s)
    return code


def decode_symbols(code: int, n: int, K: int) -> Tuple[int, ...]:
    digits = []
    for _ in range(n):
        code, r = divmod(int(code), K)
        digits.append(r)
    return tuple(reversed(digits))


def decode_codes(codes: np.ndarray, n: int, K: int) -> np.ndarray:
    """Vectorised decode: returns an (len(codes), n) array of symbols"""
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((codes.size, n), dtype=np.int64)
    rest = codes.copy()
    for i in range(n - 1, -1, -1):
        out[:, i] = rest % K
        rest //= K
    return out


def symbol_label(alpha: Sequence[int]) -> str:
    """1-based dot-separated label, e.g. (0, 2) -> '1.3'"""
    return ".".join(str(int(s) + 1) for s in alpha)


# ===== Invariant measures =====

class InvariantMeasure(ABC):
    """Probability measure on the torus, invariant under a fixed automorphism"""

    kind: str = ""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        ...

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "InvariantMeasure":
        """Rebuild a measure from its JSON description"""
        kind = data.get("kind")
        if kind == "lebesgue":
            return Lebesgue()
        if kind == "periodic_orbit":
            return PeriodicOrbit(int(data["q"]), tuple((int(i), int(j)) for i, j in data["points"]))
        if kind == "mixture":
            return Mixture(tuple(
                (float(c["weight"]), InvariantMeasure.from_dict(c["measure"]))
                for c in data["components"]
            ))
        raise ValueError(f"Unknown measure kind: {kind}")


@dataclass(frozen=True)
class Lebesgue(InvariantMeasure):
    kind: str = field(default="lebesgue", init=False)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "lebesgue"}


@dataclass(frozen=True)
class PeriodicOrbit(InvariantMeasure):
    """Uniform measure on rational points (i/q, j/q); stored as integer numerators"""
    q: int
    points: Tuple[Tuple[int, int], ...]
    kind: str = field(default="periodic_orbit", init=False)

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"Denominator must be >= 1, got {self.q}")
        if not self.points:
            raise ValueError("Periodic orbit needs at least one point")
        normalized = tuple((i % self.q, j % self.q) for i, j in self.points)
        object.__setattr__(self, "points", normalized)

    @classmethod
    def fixed_origin(cls) -> "PeriodicOrbit":
        """Dirac mass at (0, 0)"""
        return cls(1, ((0, 0),))

    def is_invariant(self, A: ToralAutomorphism) -> bool:
        pts = set(self.points)
        return all(
            ((A.a * i + A.b * j) % self.q, (A.c * i + A.d * j) % self.q) in pts
            for i, j in self.points
        )

    def as_floats(self) -> List[Tuple[float, float]]:
        return [(i / self.q, j / self.q) for i, j in self.points]

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "periodic_orbit", "q": self.q, "points": [list(p) for p in self.points]}


@dataclass(frozen=True)
class Mixture(InvariantMeasure):
    """Convex combination of invariant measures"""
    components: Tuple[Tuple[float, InvariantMeasure], ...]
    kind: str = field(default="mixture", init=False)

    def __post_init__(self):
        if not self.components:
            raise ValueError("Mixture needs at least one component")
        weights = [w for w, _ in self.components]
        if any(w <= 0 for w in weights):
            raise ValueError("Mixture weights must be positive")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError(f"Mixture weights must sum to 1, got {sum(weights)}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "mixture",
            "components": [{"weight": w, "measure": m.to_dict()} for w, m in self.components],
        }


def half_lebesgue_half_origin() -> Mixture:
    """1/2 Lebesgue + 1/2 delta_(0,0), the measure that saturates the half-Ruelle bound"""
    return Mixture(((0.5, Lebesgue()), (0.5, PeriodicOrbit.fixed_origin())))


# ===== Cylinder weights =====

@dataclass(frozen=True, eq=False)
class CylinderTable:
    """
    Sparse table of mu(E_alpha) over sequences of length n.

    Only cylinders with positive (sampled) weight are stored; codes are sorted.
    """
    n: int
    K: int
    codes: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_series(cls, n: int, K: int, series: pd.Series) -> "CylinderTable":
        series = series[series > 0].sort_index()
        return cls(n, K, series.index.to_numpy(dtype=np.int64), series.to_numpy(dtype=float))

    def to_series(self) -> pd.Series:
        return pd.Series(self.weights, index=self.codes)

    def total(self) -> float:
        return float(self.weights.sum())

    def weight(self, alpha: Sequence[int]) -> float:
        if len(alpha) != self.n:
            raise ValueError(f"Sequence length {len(alpha)} does not match table depth {self.n}")
        code = encode_symbols(alpha, self.K)
        pos = np.searchsorted(self.codes, code)
        if pos < self.codes.size and self.codes[pos] == code:
            return float(self.weights[pos])
        return 0.0

    def dense(self, cap: int = 4 ** 10) -> np.ndarray:
        size = self.K ** self.n
        if size > cap:
            raise ValueError(f"Dense table of size {size} exceeds cap {cap}")
        out = np.zeros(size)
        out[self.codes] = self.weights
        return out

    def drop_first(self) -> "CylinderTable":
        """Marginal over alpha_0: weights of length n-1 sequences (alpha_1, ...)"""
        series = self.to_series().groupby(self.codes % self.K ** (self.n - 1)).sum()
        return CylinderTable.from_series(self.n - 1, self.K, series)

    def drop_last(self) -> "CylinderTable":
        """Marginal over alpha_{n-1}"""
        series = self.to_series().groupby(self.codes // self.K).sum()
        return CylinderTable.from_series(self.n - 1, self.K, series)

    def as_frame(self) -> pd.DataFrame:
        symbols = decode_codes(self.codes, self.n, self.K)
        labels = [".".join(str(s + 1) for s in row) for row in symbols]
        return pd.DataFrame({"symbols": labels, "weight": self.weights})


def _combine(tables: List[Tuple[float, CylinderTable]]) -> CylinderTable:
    n, K = tables[0][1].n, tables[0][1].K
    parts = [w * t.to_series() for w, t in tables]
    series = pd.concat(parts).groupby(level=0).sum()
    return CylinderTable.from_series(n, K, series)


def _atomic_tables(mu: PeriodicOrbit, A: ToralAutomorphism, P: ArcPartition, n_max: int) -> List[CylinderTable]:
    if not mu.is_invariant(A):
        raise ValueError(f"Periodic orbit with q={mu.q} is not closed under the automorphism")
    q = mu.q
    pts = np.array(mu.points, dtype=np.int64)
    i, j = pts[:, 0], pts[:, 1]
    codes = np.zeros(len(pts), dtype=np.int64)
    weight = 1.0 / len(pts)
    tables = []
    for n in range(1, n_max + 1):
        codes = codes * P.K + P.index_exact(i, q)
        counts = pd.Series(codes).value_counts()
        tables.append(CylinderTable.from_series(n, P.K, counts * weight))
        i, j = (A.a * i + A.b * j) % q, (A.c * i + A.d * j) % q
    return tables


def lebesgue_samples(grid_size: int, rng: np.random.Generator) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Stratified jittered sampling: one uniform point per cell of a G x G grid"""
    G = grid_size
    rows_per_chunk = max(1, _CHUNK_POINTS // G)
    for start in range(0, G, rows_per_chunk):
        stop = min(G, start + rows_per_chunk)
        ii, jj = np.meshgrid(np.arange(start, stop), np.arange(G), indexing="ij")
        jitter = rng.random((2,) + ii.shape)
        yield ((ii + jitter[0]) / G).ravel(), ((jj + jitter[1]) / G).ravel()


def _lebesgue_tables(A: ToralAutomorphism, P: ArcPartition, n_max: int, grid_size: int, seed: int) -> List[CylinderTable]:
    if grid_size < 1:
        raise ValueError(f"grid_size must be >= 1, got {grid_size}")
    if P.K ** n_max > np.iinfo(np.int64).max // P.K:
        raise ValueError(f"Depth {n_max} with K={P.K} overflows 64-bit cylinder codes")
    rng = np.random.default_rng(seed)
    accum: List[List[pd.Series]] = [[] for _ in range(n_max)]
    for pos, mom in lebesgue_samples(grid_size, rng):
        codes = np.zeros(pos.size, dtype=np.int64)
        for n in range(n_max):
            codes = codes * P.K + P.index(pos)
            accum[n].append(pd.Series(codes).value_counts())
            pos, mom = apply_map_array(A, pos, mom)
    total = float(grid_size) ** 2
    tables = []
    for n, parts in enumerate(accum, start=1):
        counts = pd.concat(parts).groupby(level=0).sum()
        tables.append(CylinderTable.from_series(n, P.K, counts / total))
    logger.debug("Sampled Lebesgue cylinders up to n=%d on a %dx%d grid", n_max, grid_size, grid_size)
    return tables


def cylinder_tables(
    mu: InvariantMeasure,
    A: ToralAutomorphism,
    P: ArcPartition,
    n_max: int,
    grid_size: int = DEFAULT_GRID_SIZE,
    seed: int = 0,
) -> List[CylinderTable]:
    """
    Cylinder weights mu(E_alpha) for every length 1..n_max in a single pass

    Atomic measures are exact. Lebesgue weights come from stratified jittered
    sampling of a grid_size x grid_size grid; the per-cylinder error is of
    order 1/sqrt(samples) with samples = grid_size^2.

    Returns:
        List whose entry n-1 is the CylinderTable of depth n
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if isinstance(mu, Lebesgue):
        return _lebesgue_tables(A, P, n_max, grid_size, seed)
    if isinstance(mu, PeriodicOrbit):
        return _atomic_tables(mu, A, P, n_max)
    if isinstance(mu, Mixture):
        per_component = [
            (w, cylinder_tables(m, A, P, n_max, grid_size, seed)) for w, m in mu.components
        ]
        return [_combine([(w, tabs[n]) for w, tabs in per_component]) for n in range(n_max)]
    raise TypeError(f"Unsupported measure type: {type(mu).__name__}")


def cylinder_table(mu, A, P, n, grid_size: int = DEFAULT_GRID_SIZE, seed: int = 0) -> CylinderTable:
    return cylinder_tables(mu, A, P, n, grid_size, seed)[-1]


def cylinder_weight(
    mu: InvariantMeasure,
    A: ToralAutomorphism,
    P: ArcPartition,
    alpha: Sequence[int],
    samples: int = DEFAULT_GRID_SIZE ** 2,
    seed: int = 0,
) -> float:
    """
    mu(E_alpha) for E_alpha = E_{a0} cap A^-1 E_{a1} cap ... cap A^-(n-1) E_{a(n-1)}

    Args:
        mu: Invariant measure
        A: Automorphism
        P: Arc partition
        alpha: 0-based symbol sequence
        samples: Number of stratified sample points for Lebesgue parts
        seed: Jitter seed

    Returns:
        Weight in [0, 1]
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    grid_size = max(1, int(round(math.sqrt(samples))))
    return cylinder_table(mu, A, P, len(alpha), grid_size, seed).weight(alpha)


def _clip_halfplane(poly: List[Tuple[float, float]], r: float, s: float, level: float, keep_above: bool):
    """Sutherland-Hodgman clip of a convex polygon against r x + s p >= level (or <=)"""
    sign = 1.0 if keep_above else -1.0

    def value(pt):
        return sign * (r * pt[0] + s * pt[1] - level)

    out = []
    for k in range(len(poly)):
        cur, nxt = poly[k], poly[(k + 1) % len(poly)]
        vc, vn = value(cur), value(nxt)
        if vc >= 0:
            out.append(cur)
        if (vc >= 0) != (vn >= 0):
            t = vc / (vc - vn)
            out.append((cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])))
    return out


def _polygon_area(poly: List[Tuple[float, float]]) -> float:
    if len(poly) < 3:
        return 0.0
    xs = np.array([p[0] for p in poly])
    ys = np.array([p[1] for p in poly])
    return 0.5 * abs(float(np.dot(xs, np.roll(ys, -1)) - np.dot(ys, np.roll(xs, -1))))


def polygon_cylinder_weight(A: ToralAutomorphism, P: ArcPartition, alpha: Sequence[int]) -> float:
    """
    Exact Lebesgue weight of E_alpha by polygon clipping, for |alpha| <= 3

    The position coordinate of A^t (x, p) is r_t x + s_t p with (r_t, s_t) the
    first row of A^t, so each constraint is a union of parallel strips over the
    lifted rectangle arc_{a0} x [0, 1].
    """
    n = len(alpha)
    if not 1 <= n <= 3:
        raise ValueError(f"Polygon oracle supports 1 <= n <= 3, got {n}")
    x0, x1 = P.arc(alpha[0])
    polys = [[(x0, 0.0), (x1, 0.0), (x1, 1.0), (x0, 1.0)]]
    for t in range(1, n):
        At = A.matrix_power(t)
        r, s = float(At[0, 0]), float(At[0, 1])
        y0, y1 = P.arc(alpha[t])
        corners = [r * x + s * p for x in (x0, x1) for p in (0.0, 1.0)]
        k_lo = math.floor(min(corners) - y1) - 1
        k_hi = math.ceil(max(corners) - y0) + 1
        clipped = []
        for poly in polys:
            for k in range(k_lo, k_hi + 1):
                piece = _clip_halfplane(poly, r, s, y0 + k, keep_above=True)
                if len(piece) >= 3:
                    piece = _clip_halfplane(piece, r, s, y1 + k, keep_above=False)
                if _polygon_area(piece) > 0.0:
                    clipped.append(piece)
        polys = clipped
    return float(sum(_polygon_area(p) for p in polys))


# ===== Coarse-grained unstable Jacobians =====

@dataclass(frozen=True)
class JacobianContext:
    """
    Data needed to evaluate coarse unstable Jacobians J^u_n(alpha)

    Attributes:
        A: Automorphism
        P: Arc partition
        R: Fallback exponent; forbidden transitions get J = e^{-R}
        momentum_window: Optional [p0, p1) strip restricting the starting
            momentum; None means the full circle
    """
    A: ToralAutomorphism
    P: ArcPartition
    R: Optional[float] = None
    momentum_window: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.R is None:
            object.__setattr__(self, "R", DEFAULT_R_FACTOR * self.A.log_lambda)
        if self.R <= 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if self.momentum_window is not None:
            p0, p1 = self.momentum_window
            if not p0 < p1 <= p0 + 1.0:
                raise ValueError(f"Invalid momentum window {self.momentum_window}")

    def transition_allowed(self, a0: int, a1: int) -> bool:
        """Whether {rho in strip a0 (x window) : A rho in strip a1} has positive measure"""
        x0, x1 = self.P.arc(a0)
        p0, p1 = self.momentum_window if self.momentum_window is not None else (0.0, 1.0)
        corners = [self.A.a * x + self.A.b * p for x in (x0, x1) for p in (p0, p1)]
        lo, hi = min(corners), max(corners)
        if hi - lo >= 1.0:
            return True
        y0, y1 = self.P.arc(a1)
        for k in range(math.floor(lo) - 1, math.ceil(hi) + 2):
            if max(lo, y0 + k) < min(hi, y1 + k):
                return True
        return False

    def j1(self, a0: int, a1: int) -> float:
        if self.transition_allowed(a0, a1):
            return 1.0 / self.A.lambda_plus
        return math.exp(-self.R)

    def log_j1_matrix(self) -> np.ndarray:
        """K x K matrix of log J^u_1(a0, a1)"""
        K = self.P.K
        return np.array([[math.log(self.j1(a0, a1)) for a1 in range(K)] for a0 in range(K)])

    def log_jn(self, alpha: Sequence[int]) -> float:
        if len(alpha) < 1:
            raise ValueError("Sequence must have at least one symbol")
        L = self.log_j1_matrix()
        return float(sum(L[alpha[i], alpha[i + 1]] for i in range(len(alpha) - 1)))

    def log_jn_codes(self, codes: np.ndarray, n: int) -> np.ndarray:
        """log J^u_n for every encoded sequence of length n"""
        L = self.log_j1_matrix()
        symbols = decode_codes(codes, n, self.P.K)
        if n < 2:
            return np.zeros(len(codes))
        return L[symbols[:, :-1], symbols[:, 1:]].sum(axis=1)


def coarse_jacobian_1(
    A: ToralAutomorphism,
    P: ArcPartition,
    a0: int,
    a1: int,
    R: Optional[float] = None,
    momentum_window: Optional[Tuple[float, float]] = None,
) -> float:
    """
    Coarse unstable Jacobian of a one-step transition

    Returns:
        1/lambda_plus if the transition set is nonempty, e^{-R} otherwise
    """
    return JacobianContext(A, P, R, momentum_window).j1(a0, a1)


def coarse_jacobian_n(alpha: Sequence[int], context: JacobianContext) -> float:
    """Product J^u_1(a0, a1) ... J^u_1(a_{n-2}, a_{n-1}); 1.0 for a single symbol"""
    return math.exp(context.log_jn(alpha))


def ruelle_bound(mu: InvariantMeasure, A: ToralAutomorphism) -> float:
    """
    |integral of log J^u d mu|

    J^u is the constant 1/lambda_plus for a linear automorphism, so the value
    is log(lambda_plus) for every probability measure.
    """
    return A.log_lambda


def coarse_ruelle_bound(
    mu: InvariantMeasure,
    context: JacobianContext,
    n_o: int,
    grid_size: int = DEFAULT_GRID_SIZE,
    seed: int = 0,
) -> float:
    """
    -((n_o - 1)/n_o) sum_{a0, a1} mu(E_{a0 a1}) log J^u_1(a0, a1)

    With every transition allowed this is ((n_o - 1)/n_o) log(lambda_plus).
    """
    if n_o < 1:
        raise ValueError(f"n_o must be >= 1, got {n_o}")
    table = cylinder_table(mu, context.A, context.P, 2, grid_size, seed)
    log_j = context.log_jn_codes(table.codes, 2)
    return -((n_o - 1) / n_o) * float(np.dot(table.weights, log_j))


# ===== Periodic orbits =====

def find_periodic_orbit(
    A: ToralAutomorphism,
    q: int,
    start: Optional[Tuple[int, int]] = None,
) -> List[Tuple[float, float]]:
    """
    Orbit of the rational point (i/q, j/q) under A

    Args:
        A: Automorphism
        q: Denominator (>= 1)
        start: Integer numerators (i, j); defaults to (1, 2) mod q

    Returns:
        Orbit points as floats, in iteration order
    """
    return periodic_orbit_measure(A, q, start).as_floats()


def periodic_orbit_measure(
    A: ToralAutomorphism,
    q: int,
    start: Optional[Tuple[int, int]] = None,
) -> PeriodicOrbit:
    """Uniform measure on the orbit of (i/q, j/q)"""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    i, j = start if start is not None else (1, 2)
    i, j = i % q, j % q
    points = [(i, j)]
    while True:
        i, j = (A.a * i + A.b * j) % q, (A.c * i + A.d * j) % q
        if (i, j) == points[0]:
            break
        points.append((i, j))
    return PeriodicOrbit(q, tuple(points))


def periodic_orbits(A: ToralAutomorphism, q: int) -> List[PeriodicOrbit]:
    """All orbits of A on the lattice (Z/qZ)^2, q <= 64"""
    if not 1 <= q <= MAX_ORBIT_DENOMINATOR:
        raise ValueError(f"q must lie in [1, {MAX_ORBIT_DENOMINATOR}], got {q}")
    seen = set()
    orbits = []
    for i in range(q):
        for j in range(q):
            if (i, j) in seen:
                continue
            orbit = periodic_orbit_measure(A, q, (i, j))
            seen.update(orbit.points)
            orbits.append(orbit)
    return orbits
