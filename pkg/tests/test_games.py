from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bkskit.feasibility import encode_bks, solve
from bkskit.field import FieldElement
from bkskit.games import (
    build_game,
    classical_value,
    classical_value_exhaustive,
    evaluate_game,
    simulate_quantum,
    verify_quantum_perfect,
)
from bkskit.ks import KSInstance, subset_from_labels

import _shared


def _pure_python_value(game) -> Fraction:
    inst = game.instance
    best = 0
    for alice in itertools.product(*(inst.bases[x] for x in game.alice_inputs)):
        for bob in itertools.product(*(inst.bases[y] for y in game.bob_inputs)):
            best = max(best, sum(game.wins(a, b) for a in alice for b in bob))
    return Fraction(best, game.n_inputs)


def _p24_pair():
    inst = _shared.instance("P-24")
    return inst, subset_from_labels(inst, ["1", "4", "5"]), subset_from_labels(inst, ["9", "15", "22"])


def test_game_shapes():
    inst, sa, sb = _p24_pair()
    g = build_game(inst, sa, sb)
    assert g.n_inputs == 9 and g.input_probability == Fraction(1, 9)
    ceg = _shared.optimum("CEG-18")
    g2 = build_game(_shared.instance("CEG-18"), *ceg.optimal_pair)
    assert g2.n_inputs == 30 and g2.input_probability == Fraction(1, 30)
    for x in g2.alice_inputs:
        assert set(g2.outputs(x)) == set(g2.instance.bases[x])


def test_empty_subset_rejected():
    inst = _shared.instance("CEG-18")
    with pytest.raises(ValueError):
        build_game(inst, [], [0])
    with pytest.raises(ValueError):
        build_game(inst, [0], [])


def test_shared_basis_only_diagonal_wins():
    inst = _shared.instance("CEG-18")
    g = build_game(inst, [0], [0])
    table = g.win_table()[(0, 0)]
    assert table == [(v, v) for v in inst.bases[0]]
    assert classical_value(g).value == 1


def test_ceg18_optimal_game_value_matches_exhaustive():
    inst = _shared.instance("CEG-18")
    sa, sb = _shared.optimum("CEG-18").optimal_pair
    g = build_game(inst, sa, sb)
    assert g.strategy_space() == 4 ** 5 * 4 ** 6
    exhaustive = classical_value_exhaustive(g)
    bnb = classical_value(g)
    assert bnb.value == exhaustive < 1
    assert bnb.value.denominator in (30, 15, 10, 6, 5, 3, 2)
    # the reported strategy attains the value
    wins = sum(g.wins(a, b) for a in bnb.alice for b in bnb.bob)
    assert Fraction(wins, 30) == bnb.value


@settings(max_examples=60)
@given(st.sampled_from(["CEG-18", "K-20", "P-24", "CK-31", "P-33"]), st.randoms(use_true_random=False))
def test_branch_and_bound_matches_exhaustive(name, rng):
    inst = _shared.instance(name)
    nb = inst.n_bases
    d = inst.dimension
    max_side = 3 if d == 4 else 4
    g = build_game(inst, rng.sample(range(nb), rng.randint(1, max_side)), rng.sample(range(nb), rng.randint(1, max_side)))
    v = classical_value(g).value
    assert v == classical_value_exhaustive(g) == _pure_python_value(g)


def test_exhaustive_limit_enforced():
    inst = _shared.instance("S-34")
    g = build_game(inst, range(6), range(6, 14))
    with pytest.raises(ValueError):
        classical_value_exhaustive(g)


@pytest.mark.parametrize("name", ["CEG-18", "K-20", "P-33"])
def test_value_below_one_iff_bks(name):
    inst = _shared.instance(name)
    rng = random.Random(name)
    for _ in range(15):
        sa = rng.sample(range(inst.n_bases), rng.randint(1, 4))
        sb = rng.sample(range(inst.n_bases), rng.randint(1, 6))
        bks = solve(encode_bks(inst, sa, sb)) is None
        assert (classical_value(build_game(inst, sa, sb)).value < 1) == bks


def test_p24_quantum_perfect():
    inst, sa, sb = _p24_pair()
    rep = evaluate_game(inst, sa, sb)
    assert rep.quantum_perfect and rep.quantum.verifiable
    assert set(rep.quantum.normalization.values()) == {FieldElement(1)}
    assert rep.classical_value == Fraction(8, 9)
    assert rep.status.startswith("BPQS")
    assert rep.payload()["classical_value"] == "8/9"


def test_corrupted_pair_is_perfect_without_advantage():
    inst = _shared.instance("S-29")
    sa, sb = _shared.optimum("S-29").optimal_pair
    for drop in sb:
        smaller = [b for b in sb if b != drop]
        if solve(encode_bks(inst, sa, smaller)) is not None:
            break
    else:  # pragma: no cover - an optimal pair cannot lose a basis and stay B-KS
        pytest.fail("no corrupting basis found")
    rep = evaluate_game(inst, sa, smaller, cross_check=False)
    assert rep.quantum_perfect
    assert rep.classical_value == 1
    assert rep.status.startswith("perfect (no quantum advantage")


def _scaled(inst: KSInstance, rng: random.Random) -> KSInstance:
    vectors = []
    for v in inst.vectors:
        lam = FieldElement(Fraction(rng.choice([-3, -2, -1, 1, 2, 5]), rng.randint(1, 4)))
        vectors.append(tuple(c * lam for c in v))
    vectors = tuple(vectors)
    return KSInstance(inst.name, inst.dimension, vectors, inst.orthogonality, inst.bases,
                      inst.vector_labels, inst.basis_labels)


def test_scaling_invariance():
    inst, sa, sb = _p24_pair()
    scaled = _scaled(inst, random.Random(5))
    a = evaluate_game(inst, sa, sb)
    b = evaluate_game(scaled, sa, sb)
    assert a.game.win_table() == b.game.win_table()
    assert a.classical_value == b.classical_value
    assert a.quantum_perfect == b.quantum_perfect
    assert b.quantum.normalization == a.quantum.normalization


def test_abstract_instance_not_verifiable():
    inst = _shared.instance("Pen-40")
    g = build_game(inst, [0, 1], [2, 3])
    cert = verify_quantum_perfect(inst, g)
    assert not cert.verifiable
    assert "orthogonality-only" in cert.reason


def test_simulation_wins_every_round():
    inst, sa, sb = _p24_pair()
    assert simulate_quantum(inst, build_game(inst, sa, sb), shots=300, seed=1) == 1.0


def test_game_document():
    inst, sa, sb = _p24_pair()
    doc = build_game(inst, sa, sb).to_document()
    assert doc["alice_inputs"] == ["1", "4", "5"]
    assert doc["win_predicate"] == "not orthogonal"
    assert len(doc["table"]) == 9
    assert all(row["probability"] == "1/9" for row in doc["table"])
