"""
preserver_verify.py
-------------------
Probabilistic check that a vec-action matrix sends rank-one tensor products
to rank-one matrices, plus the rank bound and nonsingular-image checks that
follow from the partition form.

A ``Pass`` is evidence, not proof. `core.preserver_recover` completes the
picture: a map that reassembles exactly from a recovered partition form is a
preserver.

Author: infoyouth
Date: 2026-10-18
"""
import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from core.errors import DimensionError
from core.preserver_forms import Partition, PreserverMap, apply_map
from core.tensor_core import DimsProfile, RankOneProduct, kron_list, numerical_rank
from logger.logger_config import get_logger
from utils.helpers import complex_gaussian, make_rng

logger = get_logger(__name__)

BATCH_SIZE = 256


class VerificationVerdict(str, Enum):
    PASS = "Pass"
    FAIL = "Fail"


@dataclass
class VerificationReport:
    """
    Outcome of `is_rank_one_preserver`.

    ``trials`` counts every input checked (``sampled`` random products plus
    ``swept`` deterministic ones) up to and including a counterexample.
    """

    verdict: VerificationVerdict
    trials: int
    max_second_singular: float
    sampled: int = 0
    swept: int = 0
    counterexample: Optional[RankOneProduct] = None
    counterexample_rank: Optional[int] = None
    counterexample_output: Optional[np.ndarray] = None

    @property
    def passed(self) -> bool:
        return self.verdict is VerificationVerdict.PASS


def _unit(n: int, i: int) -> np.ndarray:
    e = np.zeros(n, dtype=complex)
    e[i] = 1.0
    return e


def sweep_products(dims: DimsProfile) -> Iterator[RankOneProduct]:
    """
    Every matrix unit E_{i_1 j_1} (x) ... (x) E_{i_k j_k}, then for each of
    them and each factor t the variant with x_t, y_t replaced by
    e_a + e_{a+1} and e_b + e_{b+1} (indices mod n_t).
    """
    choices = [list(itertools.product(range(n), repeat=2)) for n in dims]
    for picks in itertools.product(*choices):
        yield RankOneProduct(
            dims,
            tuple(_unit(n, i) for n, (i, _) in zip(dims, picks)),
            tuple(_unit(n, j) for n, (_, j) in zip(dims, picks)),
        )
    for picks in itertools.product(*choices):
        for t in range(dims.k):
            xs = [_unit(n, i) for n, (i, _) in zip(dims, picks)]
            ys = [_unit(n, j) for n, (_, j) in zip(dims, picks)]
            n_t = dims[t]
            a, b = picks[t]
            xs[t] = _unit(n_t, a) + _unit(n_t, (a + 1) % n_t)
            ys[t] = _unit(n_t, b) + _unit(n_t, (b + 1) % n_t)
            yield RankOneProduct(dims, tuple(xs), tuple(ys))


def _sampled_products(dims: DimsProfile, trials: int, seed) -> Iterator[RankOneProduct]:
    rng = make_rng(seed)
    for _ in range(trials):
        yield RankOneProduct.random(dims, rng)


def _batches(products: Iterator[Tuple[str, RankOneProduct]], size: int):
    batch: List[Tuple[str, RankOneProduct]] = []
    for item in products:
        batch.append(item)
        if len(batch) == size:
            yield batch
            batch = []
    if batch:
        yield batch


def is_rank_one_preserver(
    phi_map: PreserverMap,
    trials: int = 200,
    seed: Optional[int] = 0,
    tol: float = 1e-8,
    zero_tol: float = 1e-10,
    sweep: bool = True,
) -> VerificationReport:
    """
    Check rank(phi(A)) = 1 on random and structured rank-one products A.

    An output passes when sigma_2 <= tol * sigma_1 and sigma_1 exceeds
    zero_tol * ||Phi||_2 * ||vec A||, i.e. it is rank one and not zero.
    The first failing input is reported as the counterexample.
    """
    dims = phi_map.dims
    m = dims.m
    phi_norm = float(scipy.linalg.norm(phi_map.phi, 2))
    inputs = itertools.chain(
        (("sampled", a) for a in _sampled_products(dims, trials, seed)),
        (("swept", a) for a in sweep_products(dims)) if sweep else iter(()),
    )
    counts = {"sampled": 0, "swept": 0}
    worst = 0.0
    for batch in _batches(inputs, BATCH_SIZE):
        vecs = np.stack([a.vec() for _, a in batch], axis=1)
        outputs = (phi_map.phi @ vecs).T.reshape(len(batch), m, m)
        singular = np.linalg.svd(outputs, compute_uv=False)
        for (kind, product), s, vec_in, output in zip(batch, singular, vecs.T, outputs):
            counts[kind] += 1
            s1 = float(s[0])
            ratio = float(s[1] / s1) if s1 > 0 else float("inf")
            worst = max(worst, ratio)
            nonzero = s1 > zero_tol * phi_norm * float(np.linalg.norm(vec_in))
            if nonzero and ratio <= tol:
                continue
            rank = numerical_rank(output)
            logger.warning(
                f"Rank-one product mapped to an output of rank {rank} "
                f"(sigma_1 {s1:.3e}, ratio {ratio:.3e})"
            )
            return VerificationReport(
                verdict=VerificationVerdict.FAIL,
                trials=counts["sampled"] + counts["swept"],
                max_second_singular=worst,
                sampled=counts["sampled"],
                swept=counts["swept"],
                counterexample=product,
                counterexample_rank=rank,
                counterexample_output=output.copy(),
            )
    logger.info(
        f"Map on dims {dims.factors} passed {counts['sampled']} sampled and {counts['swept']} swept products"
    )
    return VerificationReport(
        verdict=VerificationVerdict.PASS,
        trials=counts["sampled"] + counts["swept"],
        max_second_singular=worst,
        sampled=counts["sampled"],
        swept=counts["swept"],
    )


def recheck_counterexample(phi_map: PreserverMap, report: VerificationReport) -> int:
    """Output rank of the reported counterexample, recomputed from scratch."""
    if report.counterexample is None:
        raise ValueError("Report carries no counterexample")
    return numerical_rank(apply_map(phi_map, report.counterexample.realize()))


def rank_bound(p: Partition, input_ranks: Sequence[int]) -> int:
    """Product of the input ranks over P1 u P2 (1 when both are empty)."""
    if len(input_ranks) != p.k:
        raise DimensionError(f"Expected {p.k} ranks, got {len(input_ranks)}")
    if any(r < 1 for r in input_ranks):
        raise ValueError(f"Ranks must be positive, got {list(input_ranks)}")
    return int(np.prod([input_ranks[i] for i in p.p1 + p.p2], dtype=np.int64))


def output_rank_within_bound(phi_map: PreserverMap, p: Partition, mats: Sequence) -> Tuple[bool, int, int]:
    """(rank(phi(A_1 (x) ... (x) A_k)) <= bound, that rank, the bound)."""
    output = apply_map(phi_map, kron_list(mats))
    bound = rank_bound(p, [numerical_rank(a) for a in mats])
    rank = numerical_rank(output)
    return rank <= bound, rank, bound


def admits_nonsingular_image(phi_map: PreserverMap, trials: int = 20, seed: Optional[int] = 0) -> bool:
    """Whether some random full-rank product X_1 (x) ... (x) X_k has a nonsingular image."""
    dims = phi_map.dims
    rng = make_rng(seed)
    for trial in range(1, trials + 1):
        mats = [complex_gaussian(rng, (n, n)) for n in dims]
        if numerical_rank(apply_map(phi_map, kron_list(mats))) == dims.m:
            logger.debug(f"Nonsingular image found on trial {trial}")
            return True
    logger.info(f"No nonsingular image in {trials} trials on dims {dims.factors}")
    return False
