from __future__ import annotations

import hashlib

import pytest

from bkskit import catalog
from bkskit.feasibility import encode_ks, solve
from bkskit.field import canonical_ray, parse_vector


def test_sixteen_entries():
    entries = catalog.list_entries()
    assert len(entries) == 16
    assert [e.name for e in entries] == list(catalog.NAMES)
    assert {e.instance.dimension for e in entries} == {3, 4, 5, 7, 8}


@pytest.mark.parametrize(
    "name, vectors, bases, dim",
    [("CEG-18", 18, 9, 4), ("MP-57", 57, 40, 3), ("S-31", 31, 21, 5), ("Pen-40", 40, 40, 4),
     ("S-35", 35, 32, 7), ("P-24", 24, 24, 4), ("KP-40", 40, 25, 8)],
)
def test_entry_shapes(name, vectors, bases, dim):
    inst = catalog.get(name).instance
    assert (inst.n_vectors, inst.n_bases, inst.dimension) == (vectors, bases, dim)


@pytest.mark.parametrize("name", catalog.NAMES)
def test_entry_validates_and_is_ks(name):
    entry = catalog.get(name)
    assert entry.validation.passed, entry.validation.failures()
    assert solve(encode_ks(entry.instance)) is None


@pytest.mark.parametrize("small, big", catalog.SUBSET_RELATIONS)
def test_subset_relations_are_embeddings(small, big):
    a, b = catalog.get(small).instance, catalog.get(big).instance
    vmap, bmap = catalog.embedding(a, b)
    assert len(set(vmap)) == a.n_vectors
    assert len(set(bmap)) == a.n_bases


def test_embedding_rejects_non_subsets():
    with pytest.raises(ValueError):
        catalog.embedding(catalog.get("P-24").instance, catalog.get("CEG-18").instance)


def test_extra_vectors_of_extended_sets():
    def rays(name):
        return {canonical_ray(v) for v in catalog.get(name).instance.vectors}

    assert rays("S-31") - rays("S-29") == {
        canonical_ray(parse_vector("01000")), canonical_ray(parse_vector("00100"))
    }
    assert rays("S-35") - rays("S-34") == {canonical_ray(parse_vector("0001000"))}


@pytest.mark.parametrize("name", catalog.CRITICAL)
def test_critical_sets_lose_ks_property_without_any_vector(name):
    inst = catalog.get(name).instance
    for drop in range(inst.n_vectors):
        keep = [v for v in range(inst.n_vectors) if v != drop]
        reduced = inst.restrict(keep, f"{name}-minus-{drop}")
        assert solve(encode_ks(reduced)) is not None, (name, inst.vector_labels[drop])


def test_aliases_and_case():
    assert catalog.get("S-7").name == "S-34"
    assert catalog.get("Schutte-33").name == "CK-33"
    assert catalog.get("ceg-18").name == "CEG-18"
    assert "S-7" in catalog.get("S-34").aliases


def test_unknown_name_lists_alternatives():
    with pytest.raises(catalog.UnknownSetError) as err:
        catalog.get("CEG-81")
    assert "CEG-18" in str(err.value)
    assert "available" in str(err.value)


def test_checksums_cover_every_file():
    sums = catalog.data_checksums()
    assert set(sums) == {f"{n}.json" for n in catalog.NAMES}
    for name in catalog.NAMES:
        text = catalog._data_text(f"{name}.json")
        assert hashlib.sha256(text.encode("utf-8")).hexdigest() == sums[f"{name}.json"]


def test_checksum_mismatch_fails_validation(monkeypatch):
    monkeypatch.setattr(catalog, "data_checksums", lambda: {"CEG-18.json": "0" * 64})
    catalog.get.cache_clear()
    try:
        entry = catalog.get("CEG-18")
        assert not entry.validation.passed
        assert "transcription checksum" in {c.name for c in entry.validation.failures()}
    finally:
        monkeypatch.undo()
        catalog.get.cache_clear()


def test_status_fields():
    assert catalog.get("CK-33").optimal_size_status == "conflict"
    assert catalog.get("CK-33").expected_optimal_size is None
    cands = catalog.get("CK-33").expected["optimal_size"]["candidates"]
    assert sorted(map(tuple, cands.values())) == [(7, 13), (8, 9)]
    assert catalog.get("CEG-18").optimal_size_status == "confirmed"
    assert catalog.get("KP-40").expected_optimal_size == (3, 4)


def test_tiers():
    deep = {e.name for e in catalog.list_entries() if e.tier == "deep"}
    assert deep == {"CK-37", "MP-57", "Pen-40", "S-31", "S-35"}


def test_pen40_bases_are_its_cliques():
    entry = catalog.get("Pen-40")
    assert not entry.instance.is_coordinate_backed
    assert "bases are exactly the d-cliques" in {c.name for c in entry.validation.checks if c.passed}
    assert entry.instance.vector_labels[:3] == ("A", "B", "C")


def test_summary():
    s = catalog.get("K-20").summary()
    assert s["vectors"] == 20 and s["bases"] == 11
    assert s["capable_total"] == 465
