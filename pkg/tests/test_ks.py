from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from bkskit import catalog
from bkskit.field import inner_product, parse_vector
from bkskit.ks import (
    KSInstance,
    build_orthogonality,
    cardinality_lower_bound,
    derive_bases_from_cliques,
    groundset,
    mask_of,
    members_of,
    subset_from_labels,
    validate,
)


def _inst(name):
    return catalog.get(name).instance


def test_ceg18_degrees_at_least_three():
    inst = _inst("CEG-18")
    assert min(len(a) for a in inst.adjacency) >= 3


def test_p24_each_vector_in_four_bases():
    inst = _inst("P-24")
    assert {len(b) for b in inst.bases_of_vector} == {4}


def test_ck37_bases_are_orthogonal_triples():
    inst = _inst("CK-37")
    assert inst.n_bases == 22
    for b in inst.bases:
        assert len(b) == 3
        for i, j in combinations(b, 2):
            assert inner_product(inst.vectors[i], inst.vectors[j]).is_zero()


def test_groundset_examples():
    inst = _inst("CEG-18")
    assert groundset(inst, []) == frozenset()
    assert len(groundset(inst, range(inst.n_bases))) == 18
    p24 = _inst("P-24")
    g = groundset(p24, [0])
    assert len(g) == 4
    assert [p24.vector_labels[v] for v in sorted(g)] == ["v1", "v2", "v3", "v4"]


@given(st.data())
def test_groundset_monotone(data):
    inst = _inst("ZP-28")
    small = data.draw(st.sets(st.integers(0, inst.n_bases - 1)))
    extra = data.draw(st.sets(st.integers(0, inst.n_bases - 1)))
    assert groundset(inst, small) <= groundset(inst, small | extra)


@pytest.mark.parametrize(
    "name, vectors, bases",
    [("P-24", 24, 24), ("KP-40", 40, 25), ("S-29", 29, 16), ("S-35", 35, 32)],
)
def test_counts(name, vectors, bases):
    inst = _inst(name)
    rep = validate(inst, {"vector_count": vectors, "basis_count": bases})
    assert rep.passed, rep.failures()


def test_pen40_has_forty_four_cliques():
    inst = _inst("Pen-40")
    assert not inst.is_coordinate_backed
    cliques = derive_bases_from_cliques(inst)
    assert len(cliques) == 40
    assert {frozenset(c) for c in cliques} == {frozenset(b) for b in inst.bases}


@pytest.mark.parametrize("name", ["CEG-18", "P-24"])
def test_cliques_equal_basis_list(name):
    inst = _inst(name)
    assert {frozenset(c) for c in derive_bases_from_cliques(inst)} == {frozenset(b) for b in inst.bases}


def test_ceg18_has_nine_bases():
    assert len(derive_bases_from_cliques(_inst("CEG-18"))) == 9


def test_triangle_free_graph_has_no_bases():
    # a 6-cycle is bipartite, so it has no 3-cliques
    edges = frozenset((i, (i + 1) % 6) if i < (i + 1) % 6 else ((i + 1) % 6, i) for i in range(6))
    inst = KSInstance("C6", 3, (None,) * 6, edges, ())
    assert derive_bases_from_cliques(inst) == []


def test_cardinality_bound_examples():
    p24 = _inst("P-24")
    sa = subset_from_labels(p24, ["1", "4", "5"])
    sb = subset_from_labels(p24, ["9", "15", "22"])
    assert len(groundset(p24, sa | sb)) == 24
    assert cardinality_lower_bound(p24, sa, sb)
    assert (len(sa) + len(sb)) * p24.dimension == len(groundset(p24, sa | sb))
    assert cardinality_lower_bound(p24, [], [])
    # d=3 with 24 vectors in play needs at least 8 bases on the two sides
    mp = _inst("MP-57")
    for sa_size in range(1, 8):
        sa = set(range(sa_size))
        for extra in range(0, 10):
            sb = set(range(sa_size, sa_size + extra))
            g = len(groundset(mp, sa | sb))
            assert cardinality_lower_bound(mp, sa, sb) == (3 * (len(sa) + len(sb)) >= g)


def test_build_orthogonality_matches_exact_inner_products():
    inst = _inst("CK-31")
    stripped = KSInstance(inst.name, inst.dimension, inst.vectors, frozenset(), inst.bases)
    rebuilt = build_orthogonality(stripped)
    assert rebuilt.orthogonality == inst.orthogonality


def test_mask_round_trip():
    assert members_of(mask_of([0, 3, 5])) == (0, 3, 5)
    assert mask_of([]) == 0


def test_unknown_basis_label():
    with pytest.raises(KeyError):
        subset_from_labels(_inst("CEG-18"), ["1"])


def test_validation_reports_non_orthogonal_basis():
    vecs = tuple(parse_vector(v) for v in (["1", "0", "0"], ["0", "1", "0"], ["1", "1", "0"]))
    inst = KSInstance("bad", 3, vecs, frozenset({(0, 1)}), ((0, 1, 2),))
    rep = validate(inst)
    assert not rep.passed
    names = {c.name for c in rep.failures()}
    assert "every basis is mutually orthogonal" in names


def test_validation_reports_structural_problems_without_crashing():
    vecs = tuple(parse_vector(v) for v in (["1", "0", "0"], ["2", "0", "0"], ["0", "0", "0"]))
    inst = KSInstance("bad", 3, vecs, frozenset({(0, 7)}), ((0, 1), (0, 1)))
    rep = validate(inst)
    names = {c.name for c in rep.failures()}
    assert {"vectors nonzero", "orthogonality indices in range, i<j", "every basis has d distinct vectors",
            "no duplicate bases"} <= names


def test_repeated_ray_detected():
    vecs = tuple(parse_vector(v) for v in (["1", "0", "0"], ["2", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]))
    inst = build_orthogonality(KSInstance("dup", 3, vecs, frozenset(), ((0, 2, 3),)))
    assert "no repeated rays" in {c.name for c in validate(inst).failures()}


@pytest.mark.parametrize("name", catalog.NAMES)
def test_catalog_instances_validate(name):
    inst = _inst(name)
    assert validate(inst).passed
    if inst.is_coordinate_backed:
        for b in inst.bases:
            for i, j in combinations(b, 2):
                assert inner_product(inst.vectors[i], inst.vectors[j]).is_zero()
        clique_set = {frozenset(c) for c in derive_bases_from_cliques(inst)}
        assert {frozenset(b) for b in inst.bases} <= clique_set
