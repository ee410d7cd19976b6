"""
tensor_core.py
--------------
Dense complex matrices and the structural operators the rest of the package
is written in: Kronecker products, row-major vec, partial transposes,
realignments, tensor-factor permutations and numerical rank.

Conventions:
    * vec is ROW-major, so vec(x y^T) = x (x) y holds literally.
    * Factor positions and subsystem labels are 0-based in the Python API
      (subsystem ``1`` of a bipartite matrix is ``system=1`` only in
      `partial_transpose`, mirroring the PT_1 / PT_2 names).
    * Permutations are stored as index maps: ``out[t] = in[index[t]]``.

Author: infoyouth
Date: 2026-10-18
"""
from dataclasses import dataclass
from functools import reduce
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from core.errors import DimensionError, InvalidPermutationError
from logger.logger_config import get_logger
from utils.helpers import complex_gaussian

logger = get_logger(__name__)

REALIGN_VARIANTS = ("R1", "R2", "R")


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """
    Coerce ``a`` to a 2-D complex128 array and validate it.

    Raises:
        DimensionError: If ``a`` is not a non-empty 2-D array of finite values.
    """
    arr = np.array(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        logger.error(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
        raise DimensionError(f"{name} must be a non-empty 2-D array, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        logger.error(f"{name} contains NaN or Inf entries")
        raise DimensionError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class DimsProfile:
    """The factor sizes (n_1, ..., n_k) of M_m with m = n_1 * ... * n_k."""

    factors: Tuple[int, ...]

    def __post_init__(self) -> None:
        factors = tuple(int(n) for n in self.factors)
        if not factors:
            raise DimensionError("DimsProfile needs at least one factor")
        if any(n < 2 for n in factors):
            logger.error(f"Every factor size must be >= 2, got {factors}")
            raise DimensionError(f"Every factor size must be >= 2, got {factors}")
        object.__setattr__(self, "factors", factors)

    @property
    def k(self) -> int:
        return len(self.factors)

    @property
    def m(self) -> int:
        return int(np.prod(self.factors))

    def product(self, indices) -> int:
        """prod(n_i for i in indices); 1 for an empty selection."""
        return int(np.prod([self.factors[i] for i in indices], dtype=np.int64))

    def __len__(self) -> int:
        return self.k

    def __iter__(self):
        return iter(self.factors)

    def __getitem__(self, i: int) -> int:
        return self.factors[i]


def kron(a, b) -> np.ndarray:
    """Kronecker product A (x) B = [a_ij B]."""
    return np.kron(as_complex_matrix(a, "A"), as_complex_matrix(b, "B"))


def kron_list(mats: Sequence) -> np.ndarray:
    """Left fold of `kron`; the empty list gives the 1x1 matrix [1]."""
    return reduce(np.kron, (as_complex_matrix(a) for a in mats), np.ones((1, 1), complex))


def kron_vectors(vectors: Sequence) -> np.ndarray:
    """Kronecker product of 1-D vectors; the empty list gives [1]."""
    return reduce(
        np.kron, (np.asarray(v, dtype=complex).reshape(-1) for v in vectors), np.ones(1, complex)
    )


def vec(a) -> np.ndarray:
    """Row-major stacking: (a_11, a_12, ..., a_1n, a_21, ...)."""
    return np.array(a, dtype=complex).reshape(-1)


def unvec(v, rows: int, cols: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != rows * cols:
        logger.error(f"Cannot unvec length {v.size} into {rows}x{cols}")
        raise DimensionError(f"Cannot unvec length {v.size} into {rows}x{cols}")
    return v.reshape(rows, cols).copy()


def _bipartite_view(x, mn: Tuple[int, int]) -> np.ndarray:
    """View X in M_{mn} as the 4-index array T[i, a, j, b] = (X_ij)_ab."""
    m, n = mn
    x = as_complex_matrix(x, "X")
    if x.shape != (m * n, m * n):
        logger.error(f"Expected a {m * n}x{m * n} matrix for blocks {mn}, got {x.shape}")
        raise DimensionError(f"Expected a {m * n}x{m * n} matrix, got {x.shape}")
    return x.reshape(m, n, m, n)


def partial_transpose(x, mn: Tuple[int, int], system: int) -> np.ndarray:
    """
    Partial transpose of X = sum E_ij (x) X_ij on the first (``system=1``)
    or second (``system=2``) tensor factor.

    PT_1 gives sum E_ji (x) X_ij, PT_2 gives sum E_ij (x) X_ij^T.
    """
    m, n = mn
    t = _bipartite_view(x, mn)
    if system == 1:
        out = t.transpose(2, 1, 0, 3)
    elif system == 2:
        out = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"system must be 1 or 2, got {system}")
    return out.reshape(m * n, m * n).copy()


def rearrange_blocks(
    x, row_split: Tuple[int, int], col_split: Tuple[int, int]
) -> np.ndarray:
    """
    Regroup an (r1 r2) x (c1 c2) matrix into the (r1 c1) x (r2 c2) matrix
    ``out[(i, p), (k, q)] = x[(i, k), (p, q)]``.

    For x = A (x) B with A of shape r1 x c1 and B of shape r2 x c2 the result
    is vec(A) vec(B)^T, so the best Kronecker factors of x are read off its
    leading singular pair.
    """
    r1, r2 = row_split
    c1, c2 = col_split
    x = np.asarray(x, dtype=complex)
    if x.shape != (r1 * r2, c1 * c2):
        logger.error(f"Cannot regroup shape {x.shape} as ({row_split}, {col_split})")
        raise DimensionError(
            f"Cannot regroup shape {x.shape} as rows {row_split}, cols {col_split}"
        )
    return x.reshape(r1, r2, c1, c2).transpose(0, 2, 1, 3).reshape(r1 * c1, r2 * c2).copy()


def realign(x, mn: Tuple[int, int], variant: str) -> np.ndarray:
    """
    Realignments of X = sum E_ij (x) X_ij in M_{mn}.

    * ``"R1"``: sum vec(E_ij) (x) X_ij, shape (m^2 n) x n.
    * ``"R2"``: sum E_ij (x) vec(X_ij), shape (m n^2) x m.
    * ``"R"``:  sum vec(E_ij) (x) vec(X_ij)^T, shape m^2 x n^2.
    """
    m, n = mn
    t = _bipartite_view(x, mn)
    if variant == "R1":
        return t.transpose(0, 2, 1, 3).reshape(m * m * n, n).copy()
    if variant == "R2":
        return t.transpose(0, 1, 3, 2).reshape(m * n * n, m).copy()
    if variant == "R":
        return rearrange_blocks(t.reshape(m * n, m * n), (m, n), (m, n))
    raise ValueError(f"Unknown realignment {variant!r}; expected one of {REALIGN_VARIANTS}")


def numerical_rank(a, tol: Optional[float] = None) -> int:
    """
    Number of singular values above ``tol``.

    The default threshold is max(rows, cols) * eps * sigma_max.
    """
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0
    s = scipy.linalg.svdvals(a)
    if tol is None:
        tol = max(a.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    elif tol < 0:
        raise ValueError("tol must be nonnegative")
    return int(np.count_nonzero(s > tol))


def second_singular_ratio(a) -> Tuple[float, float]:
    """Return (sigma_1, sigma_2 / sigma_1); the ratio is inf for a zero matrix."""
    s = scipy.linalg.svdvals(np.asarray(a, dtype=complex))
    if s.size == 0 or s[0] == 0.0:
        return 0.0, float("inf")
    return float(s[0]), float(s[1] / s[0]) if s.size > 1 else 0.0


@dataclass(frozen=True, eq=False)
class TensorPermutation:
    """
    A permutation of coordinates stored as an index map.

    Applying it is a gather (``out[t] = v[index[t]]``); `matrix` gives the
    dense 0/1 view for callers that want one.
    """

    index: np.ndarray

    @property
    def size(self) -> int:
        return int(self.index.size)

    @property
    def matrix(self) -> np.ndarray:
        return np.eye(self.size, dtype=complex)[self.index]

    def apply(self, v) -> np.ndarray:
        """Pi @ v for a vector, or row permutation Pi @ A for a matrix."""
        return np.asarray(v)[self.index]

    def right_multiply(self, a) -> np.ndarray:
        """A @ Pi."""
        return np.asarray(a)[:, np.argsort(self.index)]

    def right_multiply_inverse(self, a) -> np.ndarray:
        """A @ Pi^{-1} (= A @ Pi^T)."""
        return np.asarray(a)[:, self.index]

    def inverse(self) -> "TensorPermutation":
        return TensorPermutation(np.argsort(self.index))

    def compose(self, other: "TensorPermutation") -> "TensorPermutation":
        """The permutation with matrix ``self.matrix @ other.matrix``."""
        if other.size != self.size:
            raise DimensionError("Cannot compose permutations of different sizes")
        return TensorPermutation(other.index[self.index])


def factor_permutation(dims: Sequence[int], perm: Sequence[int]) -> TensorPermutation:
    """
    Permutation that reorders tensor factors.

    Factor ``s`` (of size ``dims[s]``) is moved to position ``perm[s]``, i.e.
    Pi (v_0 (x) ... (x) v_{r-1}) = v_{perm^-1(0)} (x) ... (x) v_{perm^-1(r-1)}.

    Raises:
        InvalidPermutationError: If ``perm`` is not a bijection on range(r).
    """
    dims = tuple(int(d) for d in dims)
    perm = [int(p) for p in perm]
    if len(perm) != len(dims) or sorted(perm) != list(range(len(dims))):
        logger.error(f"Invalid factor permutation {perm} for dims {dims}")
        raise InvalidPermutationError(f"{perm} is not a permutation of range({len(dims)})")
    if any(d < 1 for d in dims):
        raise DimensionError(f"Factor sizes must be positive, got {dims}")
    if not dims:
        return TensorPermutation(np.arange(1))
    axes = [0] * len(perm)
    for source, target in enumerate(perm):
        axes[target] = source
    size = int(np.prod(dims, dtype=np.int64))
    index = np.arange(size).reshape(dims).transpose(axes).reshape(-1)
    return TensorPermutation(index)


def grouping_permutation(dims: DimsProfile) -> TensorPermutation:
    """
    The permutation Pi_0 with Pi_0 (x_1 (x) y_1 (x) ... (x) x_k (x) y_k)
    = vec(x_1 y_1^T (x) ... (x) x_k y_k^T) = x_1 (x) ... (x) x_k (x) y_1 (x) ... (x) y_k.
    """
    k = dims.k
    interleaved = [n for n in dims.factors for _ in range(2)]
    perm = []
    for i in range(k):
        perm.extend([i, k + i])
    return factor_permutation(interleaved, perm)


def transpose_permutation(m: int) -> TensorPermutation:
    """vec(A^T) = Pi vec(A) for A in M_m."""
    return factor_permutation([m, m], [1, 0])


@dataclass(frozen=True, eq=False)
class RankOneProduct:
    """x_1 y_1^T (x) ... (x) x_k y_k^T with nonzero factors."""

    dims: DimsProfile
    x_factors: Tuple[np.ndarray, ...]
    y_factors: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        xs = tuple(np.asarray(x, dtype=complex).reshape(-1) for x in self.x_factors)
        ys = tuple(np.asarray(y, dtype=complex).reshape(-1) for y in self.y_factors)
        if len(xs) != self.dims.k or len(ys) != self.dims.k:
            raise DimensionError("Need one x and one y factor per tensor factor")
        for n, x, y in zip(self.dims.factors, xs, ys):
            if x.size != n or y.size != n:
                raise DimensionError(f"Factor vectors must have length {n}")
            if not np.any(x) or not np.any(y):
                raise DimensionError("Factor vectors of a rank-one product must be nonzero")
        object.__setattr__(self, "x_factors", xs)
        object.__setattr__(self, "y_factors", ys)

    @classmethod
    def random(cls, dims: DimsProfile, rng: np.random.Generator) -> "RankOneProduct":
        """Complex Gaussian factors normalized to unit length."""
        xs, ys = [], []
        for n in dims.factors:
            x = complex_gaussian(rng, n)
            y = complex_gaussian(rng, n)
            xs.append(x / np.linalg.norm(x))
            ys.append(y / np.linalg.norm(y))
        return cls(dims, tuple(xs), tuple(ys))

    def mats(self) -> List[np.ndarray]:
        """The factors A_i = x_i y_i^T."""
        return [np.outer(x, y) for x, y in zip(self.x_factors, self.y_factors)]

    def realize(self) -> np.ndarray:
        return np.outer(kron_vectors(self.x_factors), kron_vectors(self.y_factors))

    def vec(self) -> np.ndarray:
        return np.kron(kron_vectors(self.x_factors), kron_vectors(self.y_factors))

    def to_payload(self) -> dict:
        return {
            "dims": list(self.dims.factors),
            "x": [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in x] for x in self.x_factors],
            "y": [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in y] for y in self.y_factors],
        }
