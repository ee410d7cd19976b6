"""
preserver_forms.py
------------------
Partitions of the tensor factors and the rank-one preservers they describe.

A partition (P1, P2, P3, P4) of {0, ..., k-1} together with factor matrices
M (m x p1 p2 p3^2) and N (m x p1 p2 p4^2) gives the map

    A_1 (x) ... (x) A_k  ->  M ( (x)_{P1} A_i (x) (x)_{P2} A_i^T
                                 (x) (x)_{P3} vec(A_i) (x) (x)_{P4} vec(A_i)^T ) N^T

On a rank-one product (A_i = x_i y_i^T) the output is (M u)(N v)^T where

    u = (x)_{P1} x_i (x) (x)_{P2} y_i (x) (x)_{P3} (x_i (x) y_i)
    v = (x)_{P1} y_i (x) (x)_{P2} x_i (x) (x)_{P4} (x_i (x) y_i)

so everything here is bookkeeping of which vector x_i or y_i lands on which
side and in which position. The bipartite catalog uses the same bookkeeping
to express each of its 16 forms as a partition form.

Author: infoyouth
Date: 2026-10-18
"""
import itertools
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import (
    AssemblyError,
    DimensionError,
    InvalidFactorsError,
    InvalidIndexSetError,
    InvalidPartitionError,
    NonexistentFactorsError,
    NonexistentFormError,
)
from core.subspaces import (
    SearchOptions,
    kernel_condition_exists,
    kernel_condition_holds,
    synthesize_factor,
)
from core.tensor_core import (
    DimsProfile,
    TensorPermutation,
    as_complex_matrix,
    factor_permutation,
    grouping_permutation,
    kron_list,
    partial_transpose,
    realign,
    unvec,
    vec,
)
from logger.logger_config import get_logger
from utils.helpers import format_int_list, make_rng, parse_int_list, spawn_seeds

logger = get_logger(__name__)

ORIGIN_CHECK_SAMPLES = 20
ORIGIN_CHECK_TOL = 1e-10

# A factor vector: ("x", i) or ("y", i) for tensor factor i.
Label = Tuple[str, int]


@dataclass(frozen=True)
class Partition:
    """Four disjoint blocks covering {0, ..., k-1}."""

    k: int
    p1: Tuple[int, ...] = ()
    p2: Tuple[int, ...] = ()
    p3: Tuple[int, ...] = ()
    p4: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        blocks = [tuple(sorted(int(i) for i in b)) for b in (self.p1, self.p2, self.p3, self.p4)]
        flat = [i for b in blocks for i in b]
        if sorted(flat) != list(range(self.k)):
            logger.error(f"Blocks {blocks} do not partition range({self.k})")
            raise InvalidPartitionError(f"Blocks {blocks} do not partition range({self.k})")
        for name, block in zip(("p1", "p2", "p3", "p4"), blocks):
            object.__setattr__(self, name, block)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        """``labels[i]`` in {1, 2, 3, 4} names the block of factor i."""
        blocks: List[List[int]] = [[], [], [], []]
        for i, label in enumerate(labels):
            if label not in (1, 2, 3, 4):
                raise InvalidPartitionError(f"Block label {label} is not in 1..4")
            blocks[label - 1].append(i)
        return cls(len(labels), *(tuple(b) for b in blocks))

    @classmethod
    def from_cli(cls, text: str, k: Optional[int] = None) -> "Partition":
        """Parse ``"1,3|2||"`` (1-based indices, four |-separated blocks)."""
        parts = text.split("|")
        if len(parts) != 4:
            logger.error(f"Partition {text!r} must have four |-separated blocks")
            raise InvalidPartitionError(f"Partition {text!r} must have four |-separated blocks")
        try:
            blocks = [parse_int_list(part, base=1) for part in parts]
        except ValueError as e:
            raise InvalidPartitionError(f"Cannot parse partition {text!r}: {e}") from e
        size = sum(len(b) for b in blocks) if k is None else k
        return cls(size, *(tuple(b) for b in blocks))

    def to_cli(self) -> str:
        return "|".join(format_int_list(b, base=1) for b in self.blocks)

    @property
    def blocks(self) -> Tuple[Tuple[int, ...], ...]:
        return (self.p1, self.p2, self.p3, self.p4)

    def block_of(self, i: int) -> int:
        """1-based block number holding factor i."""
        for number, block in enumerate(self.blocks, start=1):
            if i in block:
                return number
        raise InvalidPartitionError(f"Factor {i} is not in range({self.k})")

    def labels(self) -> Tuple[int, ...]:
        return tuple(self.block_of(i) for i in range(self.k))

    def sizes(self, dims: DimsProfile) -> Tuple[int, int, int, int]:
        """(p1, p2, p3, p4) with p_l the product of n_i over block l."""
        self._check_dims(dims)
        return tuple(dims.product(b) for b in self.blocks)  # type: ignore[return-value]

    def ksets(self) -> "KSetPair":
        return partition_to_ksets(self)

    def _check_dims(self, dims: DimsProfile) -> None:
        if dims.k != self.k:
            logger.error(f"Partition of {self.k} factors used with dims {dims.factors}")
            raise InvalidPartitionError(
                f"Partition of {self.k} factors does not fit dims {dims.factors}"
            )

    def __str__(self) -> str:
        return self.to_cli()


@dataclass(frozen=True)
class KSetPair:
    """Two (possibly overlapping) subsets K1, K2 of {0, ..., k-1}."""

    k: int
    k1: Tuple[int, ...]
    k2: Tuple[int, ...]

    def __post_init__(self) -> None:
        for name in ("k1", "k2"):
            values = tuple(sorted(set(int(i) for i in getattr(self, name))))
            if any(i < 0 or i >= self.k for i in values):
                raise InvalidIndexSetError(f"{name.upper()} = {values} is not inside range({self.k})")
            object.__setattr__(self, name, values)

    def m1(self, dims: DimsProfile) -> int:
        return dims.product(self.k1)

    def m2(self, dims: DimsProfile) -> int:
        return dims.product(self.k2)

    def complement(self) -> "KSetPair":
        """(K \\ K1, K \\ K2), the pair governing N."""
        everything = set(range(self.k))
        return KSetPair(self.k, tuple(everything - set(self.k1)), tuple(everything - set(self.k2)))


def partition_to_ksets(p: Partition) -> KSetPair:
    """K1 = P1 u P3, K2 = P2 u P3."""
    return KSetPair(p.k, p.p1 + p.p3, p.p2 + p.p3)


def ksets_to_partition(ks: KSetPair) -> Partition:
    """P1 = K1 \\ K2, P2 = K2 \\ K1, P3 = K1 n K2, P4 = the rest."""
    k1, k2 = set(ks.k1), set(ks.k2)
    rest = set(range(ks.k)) - k1 - k2
    return Partition(ks.k, tuple(k1 - k2), tuple(k2 - k1), tuple(k1 & k2), tuple(rest))


def all_partitions(k: int) -> List[Partition]:
    """Every one of the 4^k partitions of k factors."""
    return [Partition.from_labels(labels) for labels in itertools.product((1, 2, 3, 4), repeat=k)]


def _side_labels(p: Partition) -> Tuple[List[Label], List[Label]]:
    """Factor order of the vectors u and v of a partition form."""
    u = [("x", i) for i in p.p1] + [("y", i) for i in p.p2]
    u += [lab for i in p.p3 for lab in (("x", i), ("y", i))]
    v = [("y", i) for i in p.p1] + [("x", i) for i in p.p2]
    v += [lab for i in p.p4 for lab in (("x", i), ("y", i))]
    return u, v


def _label_dims(dims: DimsProfile, labels: Sequence[Label]) -> List[int]:
    return [dims[i] for _, i in labels]


def factor_dims(dims: DimsProfile, p: Partition) -> Tuple[List[int], List[int]]:
    """Product-vector shapes whose images under M and N must stay nonzero."""
    u, v = _side_labels(p)
    return _label_dims(dims, u), _label_dims(dims, v)


def factor_shapes(dims: DimsProfile, p: Partition) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """((m, p1 p2 p3^2), (m, p1 p2 p4^2)), i.e. m1 m2 columns for (K1, K2) and its complement."""
    p._check_dims(dims)
    ks = p.ksets()
    rest = ks.complement()
    return (dims.m, ks.m1(dims) * ks.m2(dims)), (dims.m, rest.m1(dims) * rest.m2(dims))


def _reorder(dims: DimsProfile, source: Sequence[Label], target: Sequence[Label]) -> TensorPermutation:
    """Pi with Pi (x)_{source} w = (x)_{target} w."""
    perm = [list(target).index(label) for label in source]
    return factor_permutation(_label_dims(dims, source), perm)


def routing_permutation(dims: DimsProfile, p: Partition) -> TensorPermutation:
    """Pi_P: x_1 (x) y_1 (x) ... (x) x_k (x) y_k -> u (x) v."""
    interleaved = [(side, i) for i in range(dims.k) for side in ("x", "y")]
    u, v = _side_labels(p)
    return _reorder(dims, interleaved, u + v)


@dataclass(frozen=True, eq=False)
class MapOrigin:
    partition: Partition
    M: np.ndarray
    N: np.ndarray


@dataclass(frozen=True, eq=False)
class PreserverMap:
    """
    A linear map on M_m held as its vec-action: vec(phi(A)) = phi @ vec(A).

    ``origin`` keeps the partition form the map was assembled from, if any.
    """

    dims: DimsProfile
    phi: np.ndarray
    origin: Optional[MapOrigin] = None

    def __post_init__(self) -> None:
        phi = as_complex_matrix(self.phi, "phi")
        size = self.dims.m**2
        if phi.shape != (size, size):
            logger.error(f"phi must be {size}x{size} for dims {self.dims.factors}, got {phi.shape}")
            raise DimensionError(f"phi must be {size}x{size}, got {phi.shape}")
        object.__setattr__(self, "phi", phi)

    @property
    def m(self) -> int:
        return self.dims.m

    def apply(self, a) -> np.ndarray:
        return apply_map(self, a)


def apply_map(phi_map: PreserverMap, a) -> np.ndarray:
    """unvec(phi @ vec(A))."""
    a = as_complex_matrix(a, "A")
    m = phi_map.m
    if a.shape != (m, m):
        logger.error(f"Input must be {m}x{m}, got {a.shape}")
        raise DimensionError(f"Input must be {m}x{m}, got {a.shape}")
    return unvec(phi_map.phi @ vec(a), m, m)


def _check_factor_shapes(dims: DimsProfile, p: Partition, m, n) -> Tuple[np.ndarray, np.ndarray]:
    m = as_complex_matrix(m, "M")
    n = as_complex_matrix(n, "N")
    m_shape, n_shape = factor_shapes(dims, p)
    if m.shape != m_shape or n.shape != n_shape:
        logger.error(
            f"Partition {p} on dims {dims.factors} needs M {m_shape} and N {n_shape}, "
            f"got {m.shape} and {n.shape}"
        )
        raise DimensionError(
            f"Partition {p} needs M of shape {m_shape} and N of shape {n_shape}, "
            f"got {m.shape} and {n.shape}"
        )
    return m, n


def check_kernel_conditions(
    dims: DimsProfile, p: Partition, m, n, opts: Optional[SearchOptions] = None
) -> Tuple[bool, float, float]:
    """Whether M u and N v can never vanish on product vectors; also the two best values."""
    m, n = _check_factor_shapes(dims, p, m, n)
    u_dims, v_dims = factor_dims(dims, p)
    m_ok, m_value = kernel_condition_holds(m, u_dims, opts)
    n_ok, n_value = kernel_condition_holds(n, v_dims, opts)
    return m_ok and n_ok, m_value, n_value


def evaluate_partition_form(dims: DimsProfile, p: Partition, m, n, mats: Sequence) -> np.ndarray:
    """
    The partition form applied literally to A_1 (x) ... (x) A_k, without
    building the m^2 x m^2 vec-action.
    """
    p._check_dims(dims)
    if len(mats) != dims.k:
        raise DimensionError(f"Expected {dims.k} factor matrices, got {len(mats)}")
    mats = [as_complex_matrix(a, f"A_{i}") for i, a in enumerate(mats)]
    for i, a in enumerate(mats):
        if a.shape != (dims[i], dims[i]):
            raise DimensionError(f"A_{i} must be {dims[i]}x{dims[i]}, got {a.shape}")
    m, n = _check_factor_shapes(dims, p, m, n)
    pieces = [mats[i] for i in p.p1] + [mats[i].T for i in p.p2]
    pieces += [vec(mats[i]).reshape(-1, 1) for i in p.p3]
    pieces += [vec(mats[i]).reshape(1, -1) for i in p.p4]
    return m @ kron_list(pieces) @ n.T


def _elementary(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def _verify_origin(phi_map: PreserverMap, seed: int = 0) -> None:
    origin = phi_map.origin
    if origin is None:
        return
    dims = phi_map.dims
    rng = make_rng(seed)
    for _ in range(ORIGIN_CHECK_SAMPLES):
        mats = [_elementary(n, int(rng.integers(n)), int(rng.integers(n))) for n in dims]
        expected = evaluate_partition_form(dims, origin.partition, origin.M, origin.N, mats)
        got = apply_map(phi_map, kron_list(mats))
        scale = max(1.0, float(np.max(np.abs(expected))))
        if np.max(np.abs(got - expected)) > ORIGIN_CHECK_TOL * scale:
            logger.error(f"Assembled map disagrees with partition {origin.partition} on an elementary tensor")
            raise AssemblyError(
                f"Assembled map disagrees with partition {origin.partition} on an elementary tensor"
            )


def assemble_phi(
    dims: DimsProfile,
    p: Partition,
    m,
    n,
    strict: bool = True,
    opts: Optional[SearchOptions] = None,
) -> PreserverMap:
    """
    Vec-action Phi = (M (x) N) Pi_P Pi_0^{-1} of the partition form.

    Args:
        dims (DimsProfile): Factor sizes.
        p (Partition): Block of every factor.
        m, n: Factor matrices of shapes `factor_shapes(dims, p)`.
        strict (bool): Check the kernel conditions of M and N first.
        opts (SearchOptions): Search settings for the strict check.

    Raises:
        DimensionError: If M or N has the wrong shape.
        InvalidFactorsError: If ``strict`` and a kernel condition fails.
        AssemblyError: If the assembled map disagrees with the literal form.
    """
    p._check_dims(dims)
    m, n = _check_factor_shapes(dims, p, m, n)
    if strict:
        ok, m_value, n_value = check_kernel_conditions(dims, p, m, n, opts)
        if not ok:
            logger.error(
                f"Factors violate the kernel conditions for partition {p} "
                f"(M: {m_value:.3e}, N: {n_value:.3e})"
            )
            raise InvalidFactorsError(
                f"Factors violate the kernel conditions for partition {p} "
                f"(M: {m_value:.3e}, N: {n_value:.3e})"
            )
    routing = routing_permutation(dims, p).compose(grouping_permutation(dims).inverse())
    phi = routing.right_multiply(np.kron(m, n))
    logger.debug(f"Assembled {phi.shape[0]}x{phi.shape[1]} map for partition {p} on dims {dims.factors}")
    result = PreserverMap(dims, phi, MapOrigin(p, m, n))
    _verify_origin(result)
    return result


def partition_exists(dims: DimsProfile, p: Partition) -> bool:
    """Whether valid M and N exist: both (K1, K2) and (K \\ K1, K \\ K2) must admit factors."""
    p._check_dims(dims)
    ks = p.ksets()
    rest = ks.complement()
    return kernel_condition_exists(dims, ks.k1, ks.k2) and kernel_condition_exists(dims, rest.k1, rest.k2)


def _nonexistence_message(dims: DimsProfile, p: Partition) -> str:
    full = tuple(range(dims.k))
    if dims.k == 2 and 2 in dims.factors and full in (p.p3, p.p4):
        return (
            f"No factors exist for partition {p} on dims {dims.factors}: "
            "k=2 with 2 in {n1, n2} and P3=K or P4=K"
        )
    return f"No factors exist for partition {p} on dims {dims.factors}"


def synthesize_partition_factors(
    dims: DimsProfile,
    p: Partition,
    seed: Optional[int] = 0,
    opts: Optional[SearchOptions] = None,
    retries: int = 32,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Random M, N satisfying the kernel conditions of partition ``p``.

    Raises:
        NonexistentFactorsError: If `partition_exists` is false.
        SynthesisFailedError: If the retry budget runs out.
    """
    if not partition_exists(dims, p):
        message = _nonexistence_message(dims, p)
        logger.error(message)
        raise NonexistentFactorsError(message)
    u_dims, v_dims = factor_dims(dims, p)
    m_seed, n_seed = (int(s.generate_state(1)[0]) for s in spawn_seeds(seed, 2))
    m = synthesize_factor(dims.m, u_dims, m_seed, opts, retries)
    n = synthesize_factor(dims.m, v_dims, n_seed, opts, retries)
    logger.info(f"Synthesized factors M {m.shape} and N {n.shape} for partition {p}")
    return m, n


# Bipartite catalog -----------------------------------------------------------

PSI_P = ("Id", "PT1", "PT2")
PSI_R = ("Id", "R1", "R2", "R", "Vec")
PSI_T = ("Id", "T")

CASE_OF_PSI_R = {"Id": 1, "R": 2, "R1": 3, "R2": 4, "Vec": 5}

# One representative per class of permutationally similar compositions.
CATALOG_FORMS: Tuple[Tuple[str, str, str], ...] = (
    ("Id", "Id", "Id"),
    ("PT1", "Id", "Id"),
    ("PT2", "Id", "Id"),
    ("Id", "Id", "T"),
    ("Id", "R1", "Id"),
    ("PT2", "R1", "Id"),
    ("Id", "R1", "T"),
    ("PT2", "R1", "T"),
    ("Id", "R2", "Id"),
    ("PT1", "R2", "Id"),
    ("Id", "R2", "T"),
    ("PT1", "R2", "T"),
    ("Id", "R", "Id"),
    ("Id", "R", "T"),
    ("Id", "Vec", "Id"),
    ("Id", "Vec", "T"),
)


@dataclass(frozen=True, eq=False)
class BipartiteForm:
    """A -> psi_T(M psi_R(psi_P(A)) N^T) on M_{n1 n2}."""

    psi_p: str
    psi_r: str
    psi_t: str
    M: np.ndarray
    N: np.ndarray

    def __post_init__(self) -> None:
        _check_form_names(self.psi_p, self.psi_r, self.psi_t)
        object.__setattr__(self, "M", as_complex_matrix(self.M, "M"))
        object.__setattr__(self, "N", as_complex_matrix(self.N, "N"))

    @property
    def name(self) -> str:
        return form_name(self.psi_p, self.psi_r, self.psi_t)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    psi_p: str
    psi_r: str
    psi_t: str
    case: int
    m_shape: Tuple[int, int]
    n_shape: Tuple[int, int]
    exists: bool
    partition: Partition

    def to_payload(self) -> dict:
        return {
            "name": self.name,
            "psi_p": self.psi_p,
            "psi_r": self.psi_r,
            "psi_t": self.psi_t,
            "case": self.case,
            "M_shape": list(self.m_shape),
            "N_shape": list(self.n_shape),
            "exists": self.exists,
            "partition": self.partition.to_cli(),
        }


def _check_form_names(psi_p: str, psi_r: str, psi_t: str) -> None:
    if psi_p not in PSI_P or psi_r not in PSI_R or psi_t not in PSI_T:
        raise ValueError(f"Unknown bipartite form ({psi_p}, {psi_r}, {psi_t})")


def form_name(psi_p: str, psi_r: str, psi_t: str) -> str:
    parts = [part for part in (psi_t, psi_r, psi_p) if part != "Id"]
    return ".".join(parts) if parts else "Id"


def _form_vectors(psi_p: str, psi_r: str) -> Tuple[List[Label], List[Label]]:
    """
    Labels of a and b with psi_R(psi_P(x_1 y_1^T (x) x_2 y_2^T)) = a b^T.
    """
    a1, b1, a2, b2 = {
        "Id": (("x", 0), ("y", 0), ("x", 1), ("y", 1)),
        "PT1": (("y", 0), ("x", 0), ("x", 1), ("y", 1)),
        "PT2": (("x", 0), ("y", 0), ("y", 1), ("x", 1)),
    }[psi_p]
    return {
        "Id": ([a1, a2], [b1, b2]),
        "R": ([a1, b1], [a2, b2]),
        "R1": ([a1, b1, a2], [b2]),
        "R2": ([a1, a2, b2], [b1]),
        "Vec": ([a1, a2, b1, b2], []),
    }[psi_r]


def _form_sides(psi_p: str, psi_r: str, psi_t: str) -> Tuple[List[Label], List[Label]]:
    """Labels of the left and right output vectors (after psi_T)."""
    a, b = _form_vectors(psi_p, psi_r)
    return (b, a) if psi_t == "T" else (a, b)


def form_partition(psi_p: str, psi_r: str, psi_t: str) -> Partition:
    """The partition whose form routes every x_i, y_i to the same side as this form."""
    _check_form_names(psi_p, psi_r, psi_t)
    left, _ = _form_sides(psi_p, psi_r, psi_t)
    labels = []
    for i in range(2):
        x_left, y_left = ("x", i) in left, ("y", i) in left
        labels.append({(True, False): 1, (False, True): 2, (True, True): 3, (False, False): 4}[(x_left, y_left)])
    return Partition.from_labels(labels)


def form_shapes(psi_r: str, n1: int, n2: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    m = n1 * n2
    return {
        "Id": ((m, m), (m, m)),
        "R": ((m, n1 * n1), (m, n2 * n2)),
        "R1": ((m, n1 * n1 * n2), (m, n2)),
        "R2": ((m, n1 * n2 * n2), (m, n1)),
        "Vec": ((m, m * m), (m, 1)),
    }[psi_r]


def bipartite_catalog(n1: int, n2: int) -> List[CatalogEntry]:
    """The 16 composite forms psi_T . psi_R . psi_P for M_{n1 n2}."""
    if n1 < 2 or n2 < 2:
        raise DimensionError(f"Expected n1, n2 >= 2, got ({n1}, {n2})")
    dims = DimsProfile((n1, n2))
    entries = []
    for psi_p, psi_r, psi_t in CATALOG_FORMS:
        m_shape, n_shape = form_shapes(psi_r, n1, n2)
        p = form_partition(psi_p, psi_r, psi_t)
        entries.append(
            CatalogEntry(
                name=form_name(psi_p, psi_r, psi_t),
                psi_p=psi_p,
                psi_r=psi_r,
                psi_t=psi_t,
                case=CASE_OF_PSI_R[psi_r],
                m_shape=m_shape,
                n_shape=n_shape,
                exists=partition_exists(dims, p),
                partition=p,
            )
        )
    return entries


def _form_permutations(
    psi_p: str, psi_r: str, psi_t: str, dims: DimsProfile
) -> Tuple[Partition, TensorPermutation, TensorPermutation]:
    """Partition P with left output vector = Pi_left u and right = Pi_right v."""
    p = form_partition(psi_p, psi_r, psi_t)
    left, right = _form_sides(psi_p, psi_r, psi_t)
    u, v = _side_labels(p)
    return p, _reorder(dims, u, left), _reorder(dims, v, right)


def _check_form(form: BipartiteForm, dims: DimsProfile) -> None:
    if dims.k != 2:
        raise DimensionError(f"Bipartite forms need two factors, got {dims.factors}")
    n1, n2 = dims.factors
    if form.psi_r == "Vec" and 2 in dims.factors:
        logger.error(f"The vec form does not exist for dims ({n1}, {n2})")
        raise NonexistentFormError(f"The vec form needs 2 not in {{n1, n2}}, got ({n1}, {n2})")
    m_shape, n_shape = form_shapes(form.psi_r, n1, n2)
    if form.M.shape != m_shape or form.N.shape != n_shape:
        logger.error(f"Form {form.name} needs M {m_shape} and N {n_shape}, got {form.M.shape} and {form.N.shape}")
        raise DimensionError(
            f"Form {form.name} needs M of shape {m_shape} and N of shape {n_shape}, "
            f"got {form.M.shape} and {form.N.shape}"
        )


def bipartite_to_partition(form: BipartiteForm, dims: DimsProfile) -> Tuple[Partition, np.ndarray, np.ndarray]:
    """
    Partition P and factors M', N' with assemble_phi(dims, P, M', N')
    acting exactly as the bipartite form.
    """
    _check_form(form, dims)
    p, left, right = _form_permutations(form.psi_p, form.psi_r, form.psi_t, dims)
    outer_left, outer_right = (form.N, form.M) if form.psi_t == "T" else (form.M, form.N)
    return p, left.right_multiply(outer_left), right.right_multiply(outer_right)


def _apply_psi_r(x: np.ndarray, psi_r: str, mn: Tuple[int, int]) -> np.ndarray:
    if psi_r == "Id":
        return x
    if psi_r == "Vec":
        return vec(x).reshape(-1, 1)
    return realign(x, mn, psi_r)


def evaluate_bipartite(form: BipartiteForm, dims: DimsProfile, a) -> np.ndarray:
    """psi_T(M psi_R(psi_P(A)) N^T) for one input matrix A."""
    mn = (dims[0], dims[1])
    x = as_complex_matrix(a, "A")
    if form.psi_p == "PT1":
        x = partial_transpose(x, mn, 1)
    elif form.psi_p == "PT2":
        x = partial_transpose(x, mn, 2)
    elif x.shape != (dims.m, dims.m):
        raise DimensionError(f"Input must be {dims.m}x{dims.m}, got {x.shape}")
    out = form.M @ _apply_psi_r(x, form.psi_r, mn) @ form.N.T
    return out.T if form.psi_t == "T" else out


def assemble_bipartite(
    form: BipartiteForm,
    dims: DimsProfile,
    strict: bool = True,
    opts: Optional[SearchOptions] = None,
) -> PreserverMap:
    """
    Vec-action of the bipartite form, built column by column from the images
    of the m^2 matrix units.

    The equivalent partition form is kept as the map's origin and checked
    against the direct construction.

    Raises:
        NonexistentFormError: Vec form with 2 in {n1, n2}.
        DimensionError: If M or N has the wrong shape.
        InvalidFactorsError: If ``strict`` and the kernel conditions fail.
    """
    _check_form(form, dims)
    p, m_equiv, n_equiv = bipartite_to_partition(form, dims)
    if strict:
        ok, m_value, n_value = check_kernel_conditions(dims, p, m_equiv, n_equiv, opts)
        if not ok:
            logger.error(f"Factors of form {form.name} violate its kernel conditions")
            raise InvalidFactorsError(
                f"Factors of form {form.name} violate its kernel conditions "
                f"(M: {m_value:.3e}, N: {n_value:.3e})"
            )
    size = dims.m**2
    phi = np.empty((size, size), dtype=complex)
    unit = np.zeros(size, dtype=complex)
    for e in range(size):
        unit[e] = 1.0
        phi[:, e] = vec(evaluate_bipartite(form, dims, unit.reshape(dims.m, dims.m)))
        unit[e] = 0.0
    result = PreserverMap(dims, phi, MapOrigin(p, m_equiv, n_equiv))
    _verify_origin(result)
    logger.debug(f"Assembled bipartite form {form.name} on dims {dims.factors} as partition {p}")
    return result


def synthesize_bipartite_factors(
    psi_p: str,
    psi_r: str,
    psi_t: str,
    dims: DimsProfile,
    seed: Optional[int] = 0,
    opts: Optional[SearchOptions] = None,
    retries: int = 32,
) -> BipartiteForm:
    """
    A bipartite form with random factors meeting its kernel conditions.

    Raises:
        NonexistentFormError: Vec form with 2 in {n1, n2}.
    """
    _check_form_names(psi_p, psi_r, psi_t)
    if psi_r == "Vec" and 2 in dims.factors:
        logger.error(f"The vec form does not exist for dims {dims.factors}")
        raise NonexistentFormError(f"The vec form needs 2 not in {{n1, n2}}, got {dims.factors}")
    p, left, right = _form_permutations(psi_p, psi_r, psi_t, dims)
    m_equiv, n_equiv = synthesize_partition_factors(dims, p, seed, opts, retries)
    outer_left = left.inverse().right_multiply(m_equiv)
    outer_right = right.inverse().right_multiply(n_equiv)
    if psi_t == "T":
        return BipartiteForm(psi_p, psi_r, psi_t, outer_right, outer_left)
    return BipartiteForm(psi_p, psi_r, psi_t, outer_left, outer_right)
