"""
preserver_recover.py
--------------------
Structure recovery for rank-one preservers: read the partition off the way
outputs react to perturbing single factor vectors, then extract M and N as
the nearest Kronecker factorization of the regrouped vec-action.

Author: infoyouth
Date: 2026-10-18
"""
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from core.errors import AmbiguousStructureError, NotKroneckerError
from core.preserver_forms import (
    Partition,
    PreserverMap,
    apply_map,
    assemble_phi,
    check_kernel_conditions,
    factor_shapes,
    routing_permutation,
)
from core.subspaces import SearchOptions
from core.tensor_core import (
    DimsProfile,
    RankOneProduct,
    grouping_permutation,
    rearrange_blocks,
    second_singular_ratio,
)
from logger.logger_config import get_logger
from utils.helpers import random_unit_vector, spawn_rngs

logger = get_logger(__name__)

SCALAR_NOTE = "(M, N) and (c M, N / c) give the same map for every nonzero c"

# (x moves column, x moves row, y moves column, y moves row) -> block
_DECISION_TABLE = {
    (True, False, False, True): 1,
    (False, True, True, False): 2,
    (True, False, True, False): 3,
    (False, True, False, True): 4,
}


@dataclass
class RecoveryResult:
    partition: Partition
    M: np.ndarray
    N: np.ndarray
    residual: float
    singular_ratio: float = 0.0
    factors_valid: Optional[bool] = None
    scalar_note: str = SCALAR_NOTE


def _moves(o0: np.ndarray, o1: np.ndarray, tol: float) -> Tuple[bool, bool]:
    """Whether the column space and the row space differ between two rank-one outputs."""
    _, col_ratio = second_singular_ratio(np.hstack([o0, o1]))
    _, row_ratio = second_singular_ratio(np.vstack([o0, o1]))
    return col_ratio > tol, row_ratio > tol


def _is_rank_one(o: np.ndarray, tol: float) -> bool:
    s1, ratio = second_singular_ratio(o)
    return s1 > 0 and ratio <= tol


def _vote(phi_map: PreserverMap, rng: np.random.Generator, tol: float) -> Optional[Tuple[int, ...]]:
    """Block labels from one random base point; None when the base point decides nothing."""
    dims = phi_map.dims
    base = RankOneProduct.random(dims, rng)
    o0 = apply_map(phi_map, base.realize())
    if not _is_rank_one(o0, tol):
        logger.debug("Base point output is not rank one; vote discarded")
        return None
    labels = []
    for i, n in enumerate(dims):
        xs, ys = list(base.x_factors), list(base.y_factors)
        xs[i] = random_unit_vector(rng, n)
        x_col, x_row = _moves(o0, apply_map(phi_map, RankOneProduct(dims, tuple(xs), base.y_factors).realize()), tol)
        ys[i] = random_unit_vector(rng, n)
        y_col, y_row = _moves(o0, apply_map(phi_map, RankOneProduct(dims, base.x_factors, tuple(ys)).realize()), tol)
        label = _DECISION_TABLE.get((x_col, x_row, y_col, y_row))
        if label is None:
            logger.debug(f"Factor {i} reacted as {(x_col, x_row, y_col, y_row)}; vote discarded")
            return None
        labels.append(label)
    return tuple(labels)


def classify_subsystems(
    phi_map: PreserverMap, seed: Optional[int] = 0, tol: float = 1e-8, votes: int = 5
) -> Partition:
    """
    Decide the block of every factor by perturbing x_i or y_i alone at
    ``votes`` random base points and watching which side of the rank-one
    output moves.

    Raises:
        AmbiguousStructureError: If no labelling wins a strict majority.
    """
    results: List[Optional[Tuple[int, ...]]] = [
        _vote(phi_map, rng, tol) for rng in spawn_rngs(seed, votes)
    ]
    tally = Counter(r for r in results if r is not None)
    if tally:
        labels, count = tally.most_common(1)[0]
        if 2 * count > votes:
            partition = Partition.from_labels(labels)
            logger.info(f"Classified subsystems as {partition} ({count}/{votes} votes)")
            return partition
    logger.error(f"Subsystem votes disagree: {results}")
    raise AmbiguousStructureError(f"No partition won a strict majority of {votes} votes: {results}")


def recover_factors(phi_map: PreserverMap, p: Partition, kron_tol: float = 1e-6) -> RecoveryResult:
    """
    M and N with phi = assemble_phi(dims, p, M, N), up to the scalar gauge.

    Undoes the routing so the map reads M (x) N, regroups it into
    vec(M) vec(N)^T and keeps the leading singular pair. The gauge is fixed
    by making the largest-magnitude entry of M equal to 1.

    Raises:
        NotKroneckerError: If the regrouped matrix is not numerically rank one.
    """
    dims = phi_map.dims
    routing = routing_permutation(dims, p).compose(grouping_permutation(dims).inverse())
    kron_form = routing.right_multiply_inverse(phi_map.phi)
    (m_rows, m_cols), (n_rows, n_cols) = factor_shapes(dims, p)
    regrouped = rearrange_blocks(kron_form, (m_rows, n_rows), (m_cols, n_cols))
    u, s, vh = scipy.linalg.svd(regrouped, full_matrices=False)
    ratio = float(s[1] / s[0]) if s[0] > 0 else float("inf")
    if ratio > kron_tol:
        logger.error(f"Regrouped map is not a Kronecker product (sigma_2/sigma_1 = {ratio:.3e})")
        raise NotKroneckerError(f"Regrouped map is not a Kronecker product (sigma_2/sigma_1 = {ratio:.3e})")

    m = (s[0] * u[:, 0]).reshape(m_rows, m_cols)
    n = vh[0].reshape(n_rows, n_cols)
    pivot = m.flat[int(np.argmax(np.abs(m)))]
    m, n = m / pivot, n * pivot

    rebuilt = assemble_phi(dims, p, m, n, strict=False)
    residual = float(np.max(np.abs(rebuilt.phi - phi_map.phi)))
    logger.info(f"Recovered M {m.shape} and N {n.shape} for partition {p}, residual {residual:.3e}")
    return RecoveryResult(partition=p, M=m, N=n, residual=residual, singular_ratio=ratio)


def recover(
    phi_map: PreserverMap,
    seed: Optional[int] = 0,
    votes: int = 5,
    rank_tol: float = 1e-8,
    kron_tol: float = 1e-6,
    check_factors: bool = True,
    opts: Optional[SearchOptions] = None,
) -> RecoveryResult:
    """Classify, extract factors and (optionally) re-check their kernel conditions."""
    p = classify_subsystems(phi_map, seed, rank_tol, votes)
    result = recover_factors(phi_map, p, kron_tol)
    if check_factors:
        result.factors_valid, _, _ = check_kernel_conditions(phi_map.dims, p, result.M, result.N, opts)
        if not result.factors_valid:
            logger.warning(f"Recovered factors for {p} fail the kernel conditions")
    return result


def reassemble(result: RecoveryResult, dims: DimsProfile) -> PreserverMap:
    return assemble_phi(dims, result.partition, result.M, result.N, strict=False)
