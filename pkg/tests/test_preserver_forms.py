import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from core.errors import (
    DimensionError,
    InvalidFactorsError,
    InvalidIndexSetError,
    InvalidPartitionError,
    NonexistentFactorsError,
    NonexistentFormError,
)
from core.preserver_forms import (
    CATALOG_FORMS,
    BipartiteForm,
    KSetPair,
    Partition,
    PreserverMap,
    all_partitions,
    apply_map,
    assemble_bipartite,
    assemble_phi,
    bipartite_catalog,
    bipartite_to_partition,
    evaluate_bipartite,
    evaluate_partition_form,
    factor_shapes,
    form_name,
    form_partition,
    ksets_to_partition,
    partition_exists,
    partition_to_ksets,
    synthesize_bipartite_factors,
    synthesize_partition_factors,
)
from core.subspaces import SearchOptions
from core.tensor_core import DimsProfile, RankOneProduct, kron_list, numerical_rank
from utils.helpers import complex_gaussian, make_rng


def _random_factors(dims, p, rng):
    m_shape, n_shape = factor_shapes(dims, p)
    return complex_gaussian(rng, m_shape), complex_gaussian(rng, n_shape)


def test_partition_cli_syntax():
    p = Partition.from_cli("1|2||")
    assert (p.p1, p.p2, p.p3, p.p4) == ((0,), (1,), (), ())
    assert p.to_cli() == "1|2||"
    assert str(Partition.from_cli("||1,2|")) == "||1,2|"
    assert Partition.from_cli("2,1|||", k=2).p1 == (0, 1)


@pytest.mark.parametrize("text", ["1|1||", "1|2|", "x|2||", "1||3|"])
def test_partition_cli_rejects_malformed(text):
    with pytest.raises(InvalidPartitionError):
        Partition.from_cli(text)


def test_partition_rejects_uncovered_factor():
    with pytest.raises(InvalidPartitionError):
        Partition.from_cli("1|||", k=2)
    with pytest.raises(InvalidPartitionError):
        Partition.from_labels([1, 5])


def test_partition_helpers():
    p = Partition.from_labels([3, 1, 4, 2])
    assert p.blocks == ((1,), (3,), (0,), (2,))
    assert p.labels() == (3, 1, 4, 2)
    assert p.block_of(2) == 4
    assert p.sizes(DimsProfile((2, 3, 4, 5))) == (3, 5, 2, 4)
    with pytest.raises(InvalidPartitionError):
        p.sizes(DimsProfile((2, 3)))


def test_ksets_translation():
    full = Partition(2, (0, 1))
    ks = partition_to_ksets(full)
    assert (ks.k1, ks.k2) == ((0, 1), ())
    sym = Partition(2, p3=(0, 1))
    ks = sym.ksets()
    assert ks.k1 == ks.k2 == (0, 1)
    assert ks.m1(DimsProfile((2, 3))) == 6
    with pytest.raises(InvalidIndexSetError):
        KSetPair(2, (0, 2), ())


def test_ksets_round_trip_over_all_partitions():
    partitions = all_partitions(3)
    assert len(partitions) == 64
    for p in partitions:
        assert ksets_to_partition(partition_to_ksets(p)) == p


def test_factor_shapes():
    dims = DimsProfile((2, 3))
    assert factor_shapes(dims, Partition(2, (0, 1))) == ((6, 6), (6, 6))
    assert factor_shapes(dims, Partition(2, p3=(0,), p4=(1,))) == ((6, 4), (6, 9))
    assert factor_shapes(dims, Partition(2, p3=(0, 1))) == ((6, 36), (6, 1))
    with pytest.raises(InvalidPartitionError):
        factor_shapes(DimsProfile((2, 3, 2)), Partition(2, (0, 1)))


def test_ksets_complement_gives_n_columns():
    dims = DimsProfile((2, 3, 2))
    for p in all_partitions(3):
        ks = p.ksets()
        rest = ks.complement()
        assert rest.complement() == ks
        assert set(rest.k1) == set(p.p2 + p.p4) and set(rest.k2) == set(p.p1 + p.p4)
        p1, p2, p3, p4 = p.sizes(dims)
        assert ks.m1(dims) * ks.m2(dims) == p1 * p2 * p3 * p3
        assert rest.m1(dims) * rest.m2(dims) == p1 * p2 * p4 * p4
        assert factor_shapes(dims, p) == ((12, p1 * p2 * p3 * p3), (12, p1 * p2 * p4 * p4))


def test_identity_partition_assembles_identity():
    dims = DimsProfile((2, 3))
    phi_map = assemble_phi(dims, Partition(2, (0, 1)), np.eye(6), np.eye(6))
    assert np.allclose(phi_map.phi, np.eye(36))
    a = complex_gaussian(make_rng(1), (6, 6))
    assert np.allclose(apply_map(phi_map, a), a)


def test_transpose_partition_maps_units_to_rank_one():
    dims = DimsProfile((2, 2))
    phi_map = assemble_phi(dims, Partition(2, p2=(0, 1)), np.eye(4), np.eye(4))
    for e in range(16):
        unit = np.zeros(16)
        unit[e] = 1.0
        assert numerical_rank(phi_map.apply(unit.reshape(4, 4))) == 1
    a = complex_gaussian(make_rng(2), (4, 4))
    assert np.allclose(phi_map.apply(a), a.T)


def test_apply_map_is_linear_and_checks_shape(rng):
    dims = DimsProfile((2, 2))
    p = Partition(2, (0,), p3=(1,))
    m, n = _random_factors(dims, p, rng)
    phi_map = assemble_phi(dims, p, m, n, strict=False)
    a, b = complex_gaussian(rng, (4, 4)), complex_gaussian(rng, (4, 4))
    alpha, beta = 2.0 - 1.0j, 0.5j
    combined = apply_map(phi_map, alpha * a + beta * b)
    assert np.allclose(combined, alpha * apply_map(phi_map, a) + beta * apply_map(phi_map, b))
    with pytest.raises(DimensionError):
        apply_map(phi_map, np.eye(3))
    with pytest.raises(DimensionError):
        PreserverMap(dims, np.eye(15))


def test_assemble_phi_matches_literal_form(rng):
    dims = DimsProfile((2, 3, 2))
    p = Partition(3, (0,), (2,), (), (1,))
    m, n = _random_factors(dims, p, rng)
    phi_map = assemble_phi(dims, p, m, n, strict=False)
    for _ in range(5):
        mats = [complex_gaussian(rng, (d, d)) for d in dims]
        expected = evaluate_partition_form(dims, p, m, n, mats)
        assert np.allclose(phi_map.apply(kron_list(mats)), expected)


def test_assemble_phi_is_linear_in_factors_and_gauge_invariant(rng):
    dims = DimsProfile((2, 2))
    p = Partition(2, p2=(1,), p4=(0,))
    m1, n = _random_factors(dims, p, rng)
    m2, _ = _random_factors(dims, p, rng)
    phi = lambda a, b: assemble_phi(dims, p, a, b, strict=False).phi  # noqa: E731
    assert np.allclose(phi(m1 + m2, n), phi(m1, n) + phi(m2, n))
    lam = 1.5 - 0.25j
    assert np.allclose(phi(lam * m1, n / lam), phi(m1, n))


def test_assemble_phi_rejects_bad_factors():
    dims = DimsProfile((2, 2))
    p = Partition(2, (0, 1))
    with pytest.raises(DimensionError):
        assemble_phi(dims, p, np.eye(4), np.eye(5))
    singular = np.eye(4)
    singular[0, 0] = 0.0
    with pytest.raises(InvalidFactorsError):
        assemble_phi(dims, p, singular, np.eye(4))
    assert assemble_phi(dims, p, singular, np.eye(4), strict=False).phi.shape == (16, 16)


def test_partition_exists():
    assert not partition_exists(DimsProfile((2, 2)), Partition(2, p3=(0, 1)))
    assert not partition_exists(DimsProfile((2, 3)), Partition(2, p4=(0, 1)))
    assert partition_exists(DimsProfile((3, 3)), Partition(2, p3=(0, 1)))
    for factors in ((2, 2), (2, 3), (3, 3)):
        assert partition_exists(DimsProfile(factors), Partition(2, (0, 1)))


def test_synthesize_nonexistent_partition_names_the_exception():
    with pytest.raises(NonexistentFactorsError, match="P3=K or P4=K"):
        synthesize_partition_factors(DimsProfile((2, 2)), Partition(2, p3=(0, 1)))


@given(
    seed=st.integers(min_value=0, max_value=2**31 - 1),
    labels=st.lists(st.integers(min_value=1, max_value=4), min_size=2, max_size=2),
    factors=st.lists(st.integers(min_value=2, max_value=3), min_size=2, max_size=2),
)
@settings(max_examples=10, deadline=None)
def test_synthesized_partition_forms_preserve_rank_one(seed, labels, factors):
    dims = DimsProfile(tuple(factors))
    p = Partition.from_labels(labels)
    assume(partition_exists(dims, p))
    opts = SearchOptions(starts=8, max_iter=100)
    m, n = synthesize_partition_factors(dims, p, seed, opts)
    phi_map = assemble_phi(dims, p, m, n, strict=True, opts=opts)
    rng = make_rng(seed)
    for _ in range(20):
        product = RankOneProduct.random(dims, rng)
        assert numerical_rank(phi_map.apply(product.realize()), tol=1e-8) == 1


def test_form_name():
    assert form_name("Id", "Id", "Id") == "Id"
    assert form_name("Id", "R", "T") == "T.R"
    assert form_name("PT1", "R2", "T") == "T.R2.PT1"


def test_form_partition():
    assert form_partition("Id", "Id", "Id") == Partition(2, (0, 1))
    assert form_partition("Id", "Id", "T") == Partition(2, p2=(0, 1))
    assert form_partition("PT1", "Id", "Id") == Partition(2, (1,), (0,))
    assert form_partition("Id", "R", "Id") == Partition(2, p3=(0,), p4=(1,))
    assert form_partition("Id", "Vec", "Id") == Partition(2, p3=(0, 1))
    assert form_partition("Id", "Vec", "T") == Partition(2, p4=(0, 1))


def test_catalog_counts():
    for n1, n2 in ((2, 2), (2, 3), (3, 3)):
        entries = bipartite_catalog(n1, n2)
        assert len(entries) == 16
        assert len({e.name for e in entries}) == 16
        assert len({(e.psi_p, e.psi_r) for e in entries}) == 9
    missing = [e.name for e in bipartite_catalog(2, 3) if not e.exists]
    assert missing == ["Vec", "T.Vec"]
    assert all(e.exists for e in bipartite_catalog(3, 3))


def test_catalog_entry_shapes_and_payload():
    entry = next(e for e in bipartite_catalog(2, 3) if e.name == "R")
    assert entry.case == 2
    assert entry.m_shape == (6, 4) and entry.n_shape == (6, 9)
    payload = entry.to_payload()
    assert payload["partition"] == "||1|2"
    assert payload["M_shape"] == [6, 4]
    with pytest.raises(DimensionError):
        bipartite_catalog(1, 3)


def test_identity_bipartite_form():
    dims = DimsProfile((2, 3))
    form = BipartiteForm("Id", "Id", "Id", np.eye(6), np.eye(6))
    assert np.allclose(assemble_bipartite(form, dims).phi, np.eye(36))


def test_vec_form_needs_dims_without_two():
    dims = DimsProfile((2, 3))
    form = BipartiteForm("Id", "Vec", "Id", np.ones((6, 36)), np.ones((6, 1)))
    with pytest.raises(NonexistentFormError):
        assemble_bipartite(form, dims)
    with pytest.raises(NonexistentFormError):
        synthesize_bipartite_factors("Id", "Vec", "T", dims)
    with pytest.raises(ValueError):
        BipartiteForm("Id", "R3", "Id", np.eye(6), np.eye(6))


def test_bipartite_shape_mismatch():
    with pytest.raises(DimensionError):
        assemble_bipartite(BipartiteForm("Id", "R", "Id", np.eye(6), np.eye(6)), DimsProfile((2, 3)))


@pytest.mark.parametrize("form", [f for f in CATALOG_FORMS if f[1] != "Vec"])
def test_catalog_forms_equal_partition_forms(form, fast_opts):
    dims = DimsProfile((2, 3))
    psi_p, psi_r, psi_t = form
    bipartite = synthesize_bipartite_factors(psi_p, psi_r, psi_t, dims, seed=7, opts=fast_opts)
    p, m_equiv, n_equiv = bipartite_to_partition(bipartite, dims)
    assert p == form_partition(psi_p, psi_r, psi_t)
    rng = make_rng(11)
    for _ in range(50):
        product = RankOneProduct.random(dims, rng)
        direct = evaluate_bipartite(bipartite, dims, product.realize())
        routed = evaluate_partition_form(dims, p, m_equiv, n_equiv, product.mats())
        assert np.allclose(direct, routed)
        assert numerical_rank(direct, tol=1e-8 * np.linalg.norm(direct, 2)) == 1


def test_vec_forms_on_three_by_three(fast_opts):
    dims = DimsProfile((3, 3))
    for psi_t in ("Id", "T"):
        form = synthesize_bipartite_factors("Id", "Vec", psi_t, dims, seed=1, opts=fast_opts)
        phi_map = assemble_bipartite(form, dims, strict=False)
        assert phi_map.origin.partition == form_partition("Id", "Vec", psi_t)
        a = complex_gaussian(make_rng(4), (9, 9))
        assert numerical_rank(phi_map.apply(a)) == 1


def test_transpose_composition(rng):
    dims = DimsProfile((2, 3))
    m_shape, n_shape = ((6, 18), (6, 2))
    m, n = complex_gaussian(rng, m_shape), complex_gaussian(rng, n_shape)
    plain = assemble_bipartite(BipartiteForm("PT1", "R2", "Id", m, n), dims, strict=False)
    transposed = assemble_bipartite(BipartiteForm("PT1", "R2", "T", m, n), dims, strict=False)
    a = complex_gaussian(rng, (6, 6))
    assert np.allclose(transposed.apply(a), plain.apply(a).T)


def test_realignment_form_outputs_have_rank_at_most_four(load_fixture):
    dims = DimsProfile((2, 3))
    form = BipartiteForm("Id", "R", "Id", load_fixture("r_form_2x3_M.json"), load_fixture("r_form_2x3_N.json"))
    phi_map = assemble_bipartite(form, dims)
    rng = make_rng(5)
    for _ in range(10):
        assert numerical_rank(phi_map.apply(complex_gaussian(rng, (6, 6)))) <= 4
