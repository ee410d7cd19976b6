"""
subspaces.py
------------
Subspace arithmetic and the kernel conditions behind rank-one preservers:
kernel bases, the search for decomposable (product) vectors, completely
entangled subspaces and the synthesis of factor matrices M, N whose kernels
avoid every product vector of a given shape.

The product-vector search is multi-start alternating minimization. A
``Found`` verdict is certified by recomputing the residual of the witness;
``NoneFound`` only means that no start came close, so it is heuristic.

Author: infoyouth
Date: 2026-10-18
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from core.errors import (
    DimensionError,
    InvalidIndexSetError,
    NonexistentFactorsError,
    SynthesisFailedError,
)
from core.tensor_core import DimsProfile, as_complex_matrix, kron_vectors, numerical_rank
from logger.logger_config import get_logger
from utils.helpers import complex_gaussian, make_rng, random_unit_vector, spawn_rngs

logger = get_logger(__name__)

ORTHONORMAL_TOL = 1e-10


class Verdict(str, Enum):
    FOUND = "Found"
    NONE_FOUND = "NoneFound"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SearchOptions:
    """
    Knobs of the multi-start product-vector search.

    Attributes:
        starts (int): Random initial points.
        max_iter (int): Maximum sweeps over all factors per start.
        conv_tol (float): A start stops once a sweep improves by less.
        seed (int): Root seed; start ``i`` uses substream ``i``.
        none_tol (float): Best values above this give ``NoneFound``.
        found_tol (float): Witness residuals below this give ``Found``.
        workers (int): Threads used to run starts; 1 runs inline.
        chunk (int): Starts submitted together before ``stop_below`` is checked.
        stop_below (float): Stop after the first chunk whose best value is
            below this; ``None`` always runs every start.
    """

    starts: int = 64
    max_iter: int = 200
    conv_tol: float = 1e-12
    seed: Optional[int] = 0
    none_tol: float = 1e-6
    found_tol: float = 1e-8
    workers: int = 1
    chunk: int = 8
    stop_below: Optional[float] = None

    def __post_init__(self) -> None:
        if self.starts < 1 or self.max_iter < 1 or self.workers < 1 or self.chunk < 1:
            raise ValueError("starts, max_iter, workers and chunk must be positive")
        if not 0 < self.found_tol <= self.none_tol:
            raise ValueError("Expected 0 < found_tol <= none_tol")


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of C^ambient_dim given by orthonormal basis columns."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self) -> None:
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim == 1:
            basis = basis.reshape(-1, 1)
        if basis.size == 0:
            basis = np.zeros((self.ambient_dim, 0), dtype=complex)
        if basis.shape[0] != self.ambient_dim or basis.shape[1] > self.ambient_dim:
            logger.error(f"Basis of shape {basis.shape} does not fit C^{self.ambient_dim}")
            raise DimensionError(f"Basis of shape {basis.shape} does not fit C^{self.ambient_dim}")
        gram = basis.conj().T @ basis
        if basis.shape[1] and np.max(np.abs(gram - np.eye(basis.shape[1]))) > ORTHONORMAL_TOL:
            raise DimensionError("Subspace basis is not orthonormal")
        object.__setattr__(self, "basis", basis)

    @classmethod
    def from_span(cls, vectors, ambient_dim: Optional[int] = None, tol: Optional[float] = None) -> "Subspace":
        """Orthonormalize the columns of ``vectors`` (rank decided by `numerical_rank`)."""
        a = np.asarray(vectors, dtype=complex)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        dim = a.shape[0] if ambient_dim is None else ambient_dim
        if a.size == 0:
            return cls(dim, np.zeros((dim, 0), dtype=complex))
        u, s, _ = scipy.linalg.svd(a, full_matrices=False)
        if tol is None:
            tol = max(a.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
        rank = int(np.count_nonzero(s > tol))
        return cls(dim, u[:, :rank])

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    @property
    def vectors(self) -> List[np.ndarray]:
        return [self.basis[:, i].copy() for i in range(self.dim)]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def perp(self) -> "Subspace":
        if self.dim == 0:
            return Subspace(self.ambient_dim, np.eye(self.ambient_dim, dtype=complex))
        return kernel_basis(self.basis.conj().T)

    def contains(self, v, tol: float = 1e-8) -> bool:
        v = np.asarray(v, dtype=complex).reshape(-1)
        residual = v - self.basis @ (self.basis.conj().T @ v)
        return bool(np.linalg.norm(residual) <= tol * max(np.linalg.norm(v), 1.0))


@dataclass
class DecomposableSearchReport:
    verdict: Verdict
    witness: Optional[List[np.ndarray]]
    min_value: float
    starts: int
    iterations: int
    residual: Optional[float] = None


@dataclass
class _SearchOutcome:
    value: float
    factors: List[np.ndarray]
    starts: int = 0
    iterations: int = 0
    per_start: List[float] = field(default_factory=list)


def kernel_basis(m, tol: Optional[float] = None) -> Subspace:
    """
    Orthonormal basis of Ker(M) from the right singular vectors whose
    singular value is at most ``tol`` (default max(rows, cols) * eps * sigma_max).
    """
    m = as_complex_matrix(m, "M")
    _, s, vh = scipy.linalg.svd(m, full_matrices=True)
    if tol is None:
        tol = max(m.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.count_nonzero(s > tol))
    basis = vh[rank:].conj().T
    logger.debug(f"Kernel of a {m.shape[0]}x{m.shape[1]} matrix has dimension {basis.shape[1]}")
    return Subspace(m.shape[1], basis)


def _contract_except(t: np.ndarray, factors: Sequence[np.ndarray], j: int) -> np.ndarray:
    """Contract t[rows, p_0, ..., p_{r-1}] with every factor but the j-th."""
    out = t
    for axis in range(len(factors) - 1, -1, -1):
        if axis != j:
            out = np.tensordot(out, factors[axis], axes=([axis + 1], [0]))
    return out


def _single_start(
    t: np.ndarray, dims: Sequence[int], rng: np.random.Generator, opts: SearchOptions
) -> Tuple[float, List[np.ndarray], int]:
    factors = [random_unit_vector(rng, p) for p in dims]
    value = np.inf
    sweeps = 0
    for sweeps in range(1, opts.max_iter + 1):
        new_value = value
        for j in range(len(dims)):
            b = _contract_except(t, factors, j)
            # the minimizing unit vector is the last right singular vector
            _, _, vh = scipy.linalg.svd(b, full_matrices=True)
            factors[j] = vh[-1].conj()
            new_value = float(np.linalg.norm(b @ factors[j]))
        improvement = value - new_value
        value = min(value, new_value)
        if improvement < opts.conv_tol:
            break
    return value, factors, sweeps


def _multi_start(m: np.ndarray, dims: Sequence[int], opts: SearchOptions) -> _SearchOutcome:
    dims = [int(p) for p in dims]
    cols = int(np.prod(dims, dtype=np.int64))
    if m.shape[1] != cols:
        logger.error(f"Matrix with {m.shape[1]} columns cannot act on product dims {dims}")
        raise DimensionError(f"Matrix has {m.shape[1]} columns, product dims {dims} need {cols}")
    if not dims:
        return _SearchOutcome(float(np.linalg.norm(m[:, 0])), [], starts=1)

    t = m.reshape((m.shape[0], *dims))
    rngs = spawn_rngs(opts.seed, opts.starts)
    results: List[Tuple[float, List[np.ndarray], int]] = []

    def run(i: int):
        return _single_start(t, dims, rngs[i], opts)

    executor = ThreadPoolExecutor(max_workers=opts.workers) if opts.workers > 1 else None
    try:
        for first in range(0, opts.starts, opts.chunk):
            indices = range(first, min(first + opts.chunk, opts.starts))
            if executor is None:
                results.extend(run(i) for i in indices)
            else:
                futures = [executor.submit(run, i) for i in indices]
                results.extend(f.result() for f in futures)
            best_so_far = min(r[0] for r in results)
            logger.debug(f"Search over {dims}: {len(results)} starts, best {best_so_far:.3e}")
            if opts.stop_below is not None and best_so_far < opts.stop_below:
                break
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    best = min(range(len(results)), key=lambda i: (results[i][0], i))
    value, factors, _ = results[best]
    return _SearchOutcome(
        value=value,
        factors=factors,
        starts=len(results),
        iterations=sum(r[2] for r in results),
        per_start=[r[0] for r in results],
    )


def min_product_norm(
    m, dims: Sequence[int], opts: Optional[SearchOptions] = None
) -> Tuple[float, List[np.ndarray]]:
    """
    Approximately minimize ||M (v_1 (x) ... (x) v_r)|| over unit vectors v_i.

    Each sweep fixes all factors but one; the remaining problem is a smallest
    singular vector. The best value over ``opts.starts`` seeded starts is
    returned together with its factors.

    Raises:
        DimensionError: If cols(M) != prod(dims).
    """
    opts = opts or SearchOptions()
    outcome = _multi_start(as_complex_matrix(m, "M"), dims, opts)
    return outcome.value, outcome.factors


def contains_decomposable(
    s: Subspace, dims: Sequence[int], opts: Optional[SearchOptions] = None
) -> DecomposableSearchReport:
    """
    Search S for a product vector v_1 (x) ... (x) v_r.

    Minimizes the component of the product vector outside S. When the best
    value falls between ``found_tol`` and ``none_tol`` the search is repeated
    once with twice the starts before reporting ``Inconclusive``.
    """
    opts = opts or SearchOptions()
    dims = [int(p) for p in dims]
    if s.ambient_dim != int(np.prod(dims, dtype=np.int64)):
        logger.error(f"Subspace of C^{s.ambient_dim} does not match product dims {dims}")
        raise DimensionError(f"Subspace of C^{s.ambient_dim} does not match dims {dims}")
    if s.dim == 0:
        return DecomposableSearchReport(Verdict.NONE_FOUND, None, 1.0, 0, 0)

    complement = np.eye(s.ambient_dim, dtype=complex) - s.projector()
    run_opts = replace(opts, stop_below=opts.found_tol)
    outcome = _multi_start(complement, dims, run_opts)
    starts, iterations = outcome.starts, outcome.iterations
    if opts.found_tol <= outcome.value <= opts.none_tol:
        retry_seed = None if opts.seed is None else int(opts.seed) + 1
        retry = _multi_start(
            complement, dims, replace(run_opts, starts=2 * opts.starts, seed=retry_seed)
        )
        starts += retry.starts
        iterations += retry.iterations
        if retry.value < outcome.value:
            outcome = retry

    witness = [v / np.linalg.norm(v) for v in outcome.factors]
    residual = float(np.linalg.norm(complement @ kron_vectors(witness)))
    if residual < opts.found_tol:
        verdict = Verdict.FOUND
    elif outcome.value > opts.none_tol:
        verdict = Verdict.NONE_FOUND
    else:
        verdict = Verdict.INCONCLUSIVE
        logger.warning(
            f"Decomposable search over {dims} is inconclusive (best value {outcome.value:.3e})"
        )
    logger.info(f"Decomposable search over {dims}: {verdict.value}, min value {outcome.value:.3e}")
    return DecomposableSearchReport(
        verdict=verdict,
        witness=witness if verdict is Verdict.FOUND else None,
        min_value=float(outcome.value),
        starts=starts,
        iterations=iterations,
        residual=residual,
    )


def ces_max_dim(dims: Sequence[int]) -> int:
    """Largest dimension of a completely entangled subspace: prod p - sum p + r - 1."""
    dims = [int(p) for p in dims]
    if not dims or any(p < 1 for p in dims):
        raise DimensionError(f"Expected at least one positive dimension, got {dims}")
    return int(np.prod(dims, dtype=np.int64)) - sum(dims) + len(dims) - 1


def _sample_points(count: int) -> np.ndarray:
    """0, 1, -1, 2, -2, ... scaled into [-1, 1]."""
    points = [0.0]
    step = 1
    while len(points) < count:
        points.extend([float(step), float(-step)])
        step += 1
    points_arr = np.array(points[:count])
    scale = np.max(np.abs(points_arr))
    return points_arr / scale if scale > 0 else points_arr


def ces_construct(p: int, q: int) -> Subspace:
    """
    Completely entangled subspace of C^p (x) C^q of maximal dimension.

    Orthogonal complement of u(t) (x) w(t), u(t) = (1, t, ..., t^(p-1)) and
    w(t) = (1, t, ..., t^(q-1)), over p + q - 1 distinct real nodes t. The
    result is the space of p x q coefficient arrays whose anti-diagonal sums
    all vanish.
    """
    if p < 2 or q < 2:
        raise DimensionError(f"Expected p, q >= 2, got ({p}, {q})")
    nodes = _sample_points(p + q - 1)
    rows = np.array(
        [np.kron(t ** np.arange(p), t ** np.arange(q)) for t in nodes], dtype=complex
    )
    space = kernel_basis(rows)
    logger.info(f"Built completely entangled subspace of C^{p}(x)C^{q} with dimension {space.dim}")
    return space


def _validate_index_set(dims: DimsProfile, indices: Iterable[int], label: str) -> Tuple[int, ...]:
    values = tuple(sorted(int(i) for i in indices))
    if len(set(values)) != len(values) or any(i < 0 or i >= dims.k for i in values):
        logger.error(f"{label} = {values} is not a subset of range({dims.k})")
        raise InvalidIndexSetError(f"{label} = {values} is not a subset of range({dims.k})")
    return values


def kernel_condition_exists(dims: DimsProfile, k1: Iterable[int], k2: Iterable[int]) -> bool:
    """
    Whether some m x m1*m2 matrix has no product vector of the (K1, K2)
    shape in its kernel.

    True when m >= m1*m2; otherwise the dimension count
    m >= sum_{K1}(n_i - 1) + sum_{K2}(n_j - 1) + 1 decides.
    """
    k1 = _validate_index_set(dims, k1, "K1")
    k2 = _validate_index_set(dims, k2, "K2")
    m1, m2 = dims.product(k1), dims.product(k2)
    if dims.m >= m1 * m2:
        return True
    needed = sum(dims[i] - 1 for i in k1) + sum(dims[j] - 1 for j in k2) + 1
    return dims.m >= needed


def kernel_condition_holds(
    m, factor_dims: Sequence[int], opts: Optional[SearchOptions] = None
) -> Tuple[bool, float]:
    """
    Check that Ker(M) holds no product vector of shape ``factor_dims``.

    M is scaled to unit spectral norm first, so the verdict does not depend
    on the overall size of M. Returns (holds, best value found).
    """
    opts = opts or SearchOptions()
    m = as_complex_matrix(m, "M")
    s = scipy.linalg.svdvals(m)
    if s[0] == 0.0:
        return False, 0.0
    normalized = m / s[0]
    cols = int(np.prod(factor_dims, dtype=np.int64)) if factor_dims else 1
    if cols != m.shape[1]:
        raise DimensionError(f"Matrix has {m.shape[1]} columns, factor dims need {cols}")
    if m.shape[0] >= cols and s[-1] / s[0] > opts.none_tol:
        # injective: every product vector keeps at least sigma_min of its norm
        return True, float(s[-1] / s[0])
    value, _ = min_product_norm(normalized, factor_dims, replace(opts, stop_below=opts.none_tol))
    return value > opts.none_tol, value


def synthesize_factor(
    m: int,
    factor_dims: Sequence[int],
    seed: Optional[int] = 0,
    opts: Optional[SearchOptions] = None,
    retries: int = 32,
) -> np.ndarray:
    """
    Draw complex Gaussian m x prod(factor_dims) matrices until one satisfies
    the kernel condition for ``factor_dims``.

    Raises:
        SynthesisFailedError: If ``retries`` draws all fail.
    """
    opts = opts or SearchOptions()
    factor_dims = [int(p) for p in factor_dims]
    cols = int(np.prod(factor_dims, dtype=np.int64)) if factor_dims else 1
    rng = make_rng(seed)
    for attempt in range(1, retries + 1):
        candidate = complex_gaussian(rng, (m, cols))
        search_seed = int(rng.integers(2**32))
        if m >= cols and numerical_rank(candidate) == cols:
            logger.debug(f"Synthesized injective {m}x{cols} factor on attempt {attempt}")
            return candidate
        holds, value = kernel_condition_holds(candidate, factor_dims, replace(opts, seed=search_seed))
        if holds:
            logger.info(f"Synthesized {m}x{cols} factor for dims {factor_dims} on attempt {attempt}")
            return candidate
        logger.warning(
            f"Attempt {attempt}: candidate {m}x{cols} factor has a near product kernel vector ({value:.3e})"
        )
    logger.error(f"No valid {m}x{cols} factor for dims {factor_dims} after {retries} draws")
    raise SynthesisFailedError(f"No valid {m}x{cols} factor for dims {factor_dims} after {retries} draws")


def construct_factor_matrix(
    dims: DimsProfile,
    k1: Iterable[int],
    k2: Iterable[int],
    rng_seed: Optional[int] = 0,
    opts: Optional[SearchOptions] = None,
    retries: int = 32,
) -> np.ndarray:
    """
    An m x m1*m2 matrix whose kernel avoids the products of
    (x)_{K1} C^{n_i} (x) (x)_{K2} C^{n_j}.

    Raises:
        NonexistentFactorsError: If `kernel_condition_exists` is false.
        SynthesisFailedError: If random synthesis runs out of retries.
    """
    k1 = _validate_index_set(dims, k1, "K1")
    k2 = _validate_index_set(dims, k2, "K2")
    if not kernel_condition_exists(dims, k1, k2):
        logger.error(f"No factor matrix exists for dims {dims.factors}, K1={k1}, K2={k2}")
        raise NonexistentFactorsError(
            f"No factor matrix exists for dims {dims.factors}, K1={k1}, K2={k2}"
        )
    factor_dims = [dims[i] for i in k1] + [dims[j] for j in k2]
    return synthesize_factor(dims.m, factor_dims, rng_seed, opts, retries)
