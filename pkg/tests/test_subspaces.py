import itertools
import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.errors import DimensionError, InvalidIndexSetError, NonexistentFactorsError
from core.subspaces import (
    SearchOptions,
    Subspace,
    Verdict,
    ces_construct,
    ces_max_dim,
    construct_factor_matrix,
    contains_decomposable,
    kernel_basis,
    kernel_condition_exists,
    kernel_condition_holds,
    min_product_norm,
    synthesize_factor,
)
from core.tensor_core import DimsProfile, kron_vectors, numerical_rank
from utils.helpers import complex_gaussian, make_rng


def _subsets(k):
    return [c for r in range(k + 1) for c in itertools.combinations(range(k), r)]


def test_kernel_basis_trivial_cases():
    assert kernel_basis(np.eye(4)).dim == 0
    zero = kernel_basis(np.zeros((2, 3)))
    assert zero.dim == 3
    assert np.allclose(zero.projector(), np.eye(3))


def test_search_options_validation():
    with pytest.raises(ValueError):
        SearchOptions(starts=0)
    with pytest.raises(ValueError):
        SearchOptions(found_tol=1e-4, none_tol=1e-6)


def test_subspace_operations(rng):
    vectors = complex_gaussian(rng, (5, 2))
    space = Subspace.from_span(np.hstack([vectors, vectors[:, :1] + vectors[:, 1:]]))
    assert space.dim == 2
    assert space.contains(vectors[:, 0])
    assert not space.contains(complex_gaussian(rng, 5))
    perp = space.perp()
    assert perp.dim == 3
    assert np.allclose(space.projector() + perp.projector(), np.eye(5))
    assert Subspace(3, np.zeros((3, 0))).perp().dim == 3
    with pytest.raises(DimensionError):
        Subspace(3, np.ones((3, 1)))


def test_min_product_norm_on_identity():
    value, factors = min_product_norm(np.eye(4), (2, 2))
    assert value == pytest.approx(1.0, abs=1e-10)
    assert [f.size for f in factors] == [2, 2]


def test_min_product_norm_finds_planted_kernel_vector():
    m = np.eye(4)
    m[0, 0] = 0.0
    value, factors = min_product_norm(m, (2, 2))
    assert value < 1e-8
    assert abs(factors[0][0]) == pytest.approx(1.0, abs=1e-6)
    assert abs(factors[1][0]) == pytest.approx(1.0, abs=1e-6)


def test_min_product_norm_checks_columns():
    with pytest.raises(DimensionError):
        min_product_norm(np.eye(5), (2, 2))


def test_min_product_norm_is_thread_count_independent(rng):
    m = complex_gaussian(rng, (3, 12))
    inline = min_product_norm(m, (2, 2, 3), SearchOptions(starts=12, workers=1, seed=5))
    threaded = min_product_norm(m, (2, 2, 3), SearchOptions(starts=12, workers=4, chunk=3, seed=5))
    assert inline[0] == threaded[0]
    assert all(np.array_equal(a, b) for a, b in zip(inline[1], threaded[1]))


def test_contains_decomposable_product_span():
    e1, e2 = np.eye(2)
    report = contains_decomposable(Subspace.from_span(np.kron(e1, e1)), (2, 2))
    assert report.verdict is Verdict.FOUND
    witness = kron_vectors(report.witness)
    assert abs(np.vdot(np.kron(e1, e1), witness)) == pytest.approx(1.0, abs=1e-8)


def test_contains_decomposable_antisymmetric_vector():
    e1, e2 = np.eye(2)
    space = Subspace.from_span(np.kron(e1, e2) - np.kron(e2, e1))
    report = contains_decomposable(space, (2, 2))
    assert report.verdict is Verdict.NONE_FOUND
    assert report.witness is None
    assert report.min_value > 1e-6


def test_contains_decomposable_near_product_is_inconclusive(preservers_caplog):
    e1, e2 = np.eye(2)
    space = Subspace.from_span(np.kron(e1, e1) + 1e-7 * np.kron(e2, e2))
    report = contains_decomposable(space, (2, 2), SearchOptions(starts=8))
    assert report.verdict is Verdict.INCONCLUSIVE
    assert report.starts == 8 + 16
    assert "inconclusive" in preservers_caplog.text


def test_contains_decomposable_empty_and_mismatched():
    assert contains_decomposable(Subspace(4, np.zeros((4, 0))), (2, 2)).verdict is Verdict.NONE_FOUND
    with pytest.raises(DimensionError):
        contains_decomposable(Subspace.from_span(np.eye(6)[:, :1]), (2, 2))


def test_ces_max_dim_examples():
    assert ces_max_dim((2, 2)) == 1
    assert ces_max_dim((2, 3)) == 2
    assert ces_max_dim((3, 3, 3)) == 20


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_ces_max_dim_formula(r):
    for dims in itertools.product((2, 3, 4), repeat=r):
        expected = int(np.prod(dims)) - sum(dims) + r - 1
        assert ces_max_dim(dims) == expected


def test_ces_construct_2x2_is_antisymmetric():
    space = ces_construct(2, 2)
    assert space.dim == 1
    expected = np.array([0, 1, -1, 0]) / np.sqrt(2)
    assert abs(np.vdot(expected, space.basis[:, 0])) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("p,q", list(itertools.product((2, 3, 4), repeat=2)))
def test_ces_construct_is_maximal_and_entangled(p, q):
    space = ces_construct(p, q)
    assert space.dim == ces_max_dim((p, q))
    report = contains_decomposable(space, (p, q))
    assert report.verdict is Verdict.NONE_FOUND


def test_ces_construct_rejects_small_dims():
    with pytest.raises(DimensionError):
        ces_construct(1, 3)


def test_kernel_condition_exists_examples():
    assert not kernel_condition_exists(DimsProfile((2, 3)), [0, 1], [0, 1])
    assert kernel_condition_exists(DimsProfile((3, 3)), [0, 1], [0, 1])
    with pytest.raises(InvalidIndexSetError):
        kernel_condition_exists(DimsProfile((2, 3)), [2], [])


def test_kernel_condition_exists_exhaustive_bipartite():
    for n1, n2 in itertools.product((2, 3, 4), repeat=2):
        dims = DimsProfile((n1, n2))
        for k1, k2 in itertools.product(_subsets(2), repeat=2):
            expected = not (k1 == k2 == (0, 1) and 2 in (n1, n2))
            assert kernel_condition_exists(dims, k1, k2) == expected, (dims, k1, k2)


def test_kernel_condition_exists_tripartite():
    for factors in itertools.product((2, 3), repeat=3):
        dims = DimsProfile(factors)
        for k1, k2 in itertools.product(_subsets(3), repeat=2):
            assert kernel_condition_exists(dims, k1, k2)


def test_kernel_condition_exists_monotone_under_new_factor():
    for n1, n2, n3 in itertools.product((2, 3, 4), repeat=3):
        small = DimsProfile((n1, n2))
        large = DimsProfile((n1, n2, n3))
        for k1, k2 in itertools.product(_subsets(2), repeat=2):
            before = kernel_condition_exists(small, k1, k2)
            after = kernel_condition_exists(large, k1, k2)
            assert before <= after, (small, large, k1, k2)


PLANT_DIMS = [(3, 3), (2, 2, 3), (3, 4)]


def test_planted_product_vector_is_found():
    rng = make_rng(20261018)
    for i in range(100):
        dims = PLANT_DIMS[i % len(PLANT_DIMS)]
        planted = kron_vectors([complex_gaussian(rng, p) for p in dims])
        extra = complex_gaussian(rng, (planted.size, ces_max_dim(dims) - 1))
        space = Subspace.from_span(np.column_stack([planted, extra]))
        assert space.dim == ces_max_dim(dims)
        report = contains_decomposable(space, dims, SearchOptions(seed=i))
        assert report.verdict is Verdict.FOUND, (i, dims, report.min_value)
        assert report.residual < 1e-8


def test_subspaces_above_entangled_bound_report_verdicts():
    rng = make_rng(7)
    log = logging.getLogger(__name__)
    for i in range(20):
        dims = PLANT_DIMS[i % len(PLANT_DIMS)]
        total = int(np.prod(dims))
        space = Subspace.from_span(complex_gaussian(rng, (total, ces_max_dim(dims) + 1)))
        report = contains_decomposable(space, dims, SearchOptions(seed=i))
        if report.verdict is not Verdict.FOUND:
            log.warning(f"dims {dims} seed {i}: {report.verdict.value}, min value {report.min_value:.3e}")
        assert report.starts > 0
        assert report.verdict in set(Verdict)


def test_construct_factor_matrix_injective_case():
    dims = DimsProfile((2, 3))
    m = construct_factor_matrix(dims, [0], [])
    assert m.shape == (6, 2)
    assert numerical_rank(m) == 2


def test_construct_factor_matrix_non_injective_case(fast_opts):
    dims = DimsProfile((2, 3))
    m = construct_factor_matrix(dims, [1], [1], rng_seed=3, opts=fast_opts)
    assert m.shape == (6, 9)
    holds, value = kernel_condition_holds(m, (3, 3))
    assert holds and value > 1e-6


def test_construct_factor_matrix_nonexistent():
    with pytest.raises(NonexistentFactorsError):
        construct_factor_matrix(DimsProfile((2, 3)), [0, 1], [0, 1])
    with pytest.raises(InvalidIndexSetError):
        construct_factor_matrix(DimsProfile((2, 3)), [0, 0], [])


def test_kernel_condition_holds_is_scale_free():
    m = np.eye(4)
    m[0, 0] = 0.0
    holds, _ = kernel_condition_holds(m, (2, 2))
    assert not holds
    holds, value = kernel_condition_holds(1e-9 * np.eye(4), (2, 2))
    assert holds and value == pytest.approx(1.0)
    assert kernel_condition_holds(np.zeros((2, 4)), (2, 2)) == (False, 0.0)


def test_rank_three_square_factor_with_entangled_kernel():
    # kernel spanned by (1, 0, 0, 1), which is not a product vector
    v = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
    m = np.eye(4) - np.outer(v, v)
    assert numerical_rank(m) == 3
    assert kernel_basis(m).dim == 1
    holds, _ = kernel_condition_holds(m, (2, 2))
    assert holds


@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=5, deadline=None)
def test_synthesize_factor_is_reproducible(seed):
    opts = SearchOptions(starts=8, max_iter=100)
    a = synthesize_factor(6, (3, 3), seed=seed, opts=opts)
    b = synthesize_factor(6, (3, 3), seed=seed, opts=opts)
    assert np.array_equal(a, b)
    assert kernel_condition_holds(a, (3, 3), opts)[0]
