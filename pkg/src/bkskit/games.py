"""Nonlocal games built from pairs of basis subsets.

Alice receives a basis ``x`` from ``S_A`` and Bob a basis ``y`` from ``S_B``,
uniformly and independently.  Each answers with a vector of the basis they
received.  They win when the two answers are *not* orthogonal.

With this predicate a perfect classical strategy is exactly a solution of the
B-KS assignment problem.  The maximally entangled strategy never produces an
orthogonal pair, because such pairs have zero amplitude.  The opposite
orientation ("win iff orthogonal") would make the shared-basis case
unwinnable for the quantum strategy, so it is not used.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ._parallel import worker_pool
from .field import FieldElement, inner_product
from .ks import KSInstance

__all__ = [
    "GameSpec",
    "ClassicalResult",
    "QuantumCertificate",
    "GameValueReport",
    "build_game",
    "classical_value",
    "classical_value_exhaustive",
    "verify_quantum_perfect",
    "simulate_quantum",
    "evaluate_game",
    "EXHAUSTIVE_LIMIT",
]

EXHAUSTIVE_LIMIT = 10**7


@dataclass(frozen=True)
class GameSpec:
    instance: KSInstance
    alice_inputs: tuple  # basis indices, sorted
    bob_inputs: tuple

    @property
    def n_inputs(self) -> int:
        return len(self.alice_inputs) * len(self.bob_inputs)

    @property
    def input_probability(self) -> Fraction:
        return Fraction(1, self.n_inputs)

    def outputs(self, basis: int) -> tuple:
        return tuple(self.instance.bases[basis])

    def wins(self, a: int, b: int) -> bool:
        return not self.instance.is_orthogonal(a, b)

    def strategy_space(self) -> int:
        d = self.instance.dimension
        return d ** len(self.alice_inputs) * d ** len(self.bob_inputs)

    def win_table(self) -> dict:
        """``(x, y) -> sorted list of winning (a, b)`` over basis and vector indices."""
        table = {}
        for x in self.alice_inputs:
            for y in self.bob_inputs:
                table[(x, y)] = [(a, b) for a in self.outputs(x) for b in self.outputs(y) if self.wins(a, b)]
        return table

    def to_document(self) -> dict:
        inst = self.instance
        vl, bl = inst.vector_labels, inst.basis_labels
        rows = []
        for (x, y), pairs in self.win_table().items():
            rows.append({
                "x": bl[x],
                "y": bl[y],
                "probability": str(self.input_probability),
                "winning": [[vl[a], vl[b]] for a, b in pairs],
            })
        return {
            "instance": inst.name,
            "alice_inputs": [bl[x] for x in self.alice_inputs],
            "bob_inputs": [bl[y] for y in self.bob_inputs],
            "outputs": {bl[x]: [vl[v] for v in inst.bases[x]]
                        for x in sorted(set(self.alice_inputs) | set(self.bob_inputs))},
            "win_predicate": "not orthogonal",
            "table": rows,
        }


def build_game(instance: KSInstance, s_a: Iterable[int], s_b: Iterable[int]) -> GameSpec:
    sa = tuple(sorted(set(s_a)))
    sb = tuple(sorted(set(s_b)))
    if not sa or not sb:
        raise ValueError("both players need at least one input basis")
    for side, s in (("S_A", sa), ("S_B", sb)):
        bad = [b for b in s if not 0 <= b < instance.n_bases]
        if bad:
            raise IndexError(f"{side}: basis indices {bad} out of range for {instance.name}")
    return GameSpec(instance, sa, sb)


# Classical value ---------------------------------------------------------------

@dataclass
class ClassicalResult:
    value: Fraction
    wins: int
    alice: tuple  # chosen vector per Alice input
    bob: tuple
    nodes: int = 0
    method: str = "branch-and-bound"


def _compat(game: GameSpec, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """compat[i, j, s, t] = 1 iff output s of rows[i] and output t of cols[j] win."""
    inst = game.instance
    d = inst.dimension
    out = np.zeros((len(rows), len(cols), d, d), dtype=np.int64)
    for i, x in enumerate(rows):
        for j, y in enumerate(cols):
            for s, a in enumerate(inst.bases[x]):
                for t, b in enumerate(inst.bases[y]):
                    out[i, j, s, t] = 0 if inst.is_orthogonal(a, b) else 1
    return out


def _best_rows(compat: np.ndarray, prefix: tuple[int, ...]) -> tuple[int, list[int], int]:
    """Branch and bound over row strategies extending ``prefix``.

    Returns (wins, row choices, nodes).  The first strategy in depth-first
    order reaching the subtree optimum is kept, so splitting the tree by
    first choice and taking the earliest best subtree gives the same answer
    as one sequential search.
    """
    n_rows, n_cols, d = compat.shape[0], compat.shape[1], compat.shape[2]
    total = n_rows * n_cols
    best = -1
    best_choice: list[int] = []
    counts = np.zeros((n_cols, d), dtype=np.int64)
    choice = list(prefix) + [0] * (n_rows - len(prefix))
    for i, s in enumerate(prefix):
        np.add(counts, compat[i, :, s, :], out=counts)
    nodes = 0

    def dfs(i: int) -> bool:
        nonlocal best, best_choice, nodes
        nodes += 1
        achievable = int(counts.max(axis=1).sum())
        if i == n_rows:
            if achievable > best:
                best, best_choice = achievable, list(choice)
            return best == total
        if achievable + (n_rows - i) * n_cols <= best:
            return False
        for s in range(d):
            np.add(counts, compat[i, :, s, :], out=counts)
            choice[i] = s
            done = dfs(i + 1)
            np.subtract(counts, compat[i, :, s, :], out=counts)
            if done:
                return True
        return False

    dfs(len(prefix))
    return best, best_choice, nodes


def _best_rows_task(args) -> tuple[int, list[int], int]:
    return _best_rows(*args)


def classical_value(game: GameSpec, jobs: int = 1) -> ClassicalResult:
    """Exact optimum over deterministic strategies.

    Depth-first search over the strategy of the player with fewer inputs; the
    other player best-responds input by input.  A partial assignment is cut
    when even winning every remaining round cannot beat the incumbent.  With
    ``jobs > 1`` the subtrees of the first input are searched in parallel;
    value and strategy are the same as with one job.
    """
    swap = len(game.bob_inputs) < len(game.alice_inputs)
    rows, cols = (game.bob_inputs, game.alice_inputs) if swap else (game.alice_inputs, game.bob_inputs)
    compat = _compat(game, rows, cols)
    total = compat.shape[0] * compat.shape[1]
    d = compat.shape[2]
    if jobs > 1 and compat.shape[0] > 1:
        parts = list(worker_pool(jobs).map(_best_rows_task, [(compat, (s,)) for s in range(d)]))
        best, best_choice, _ = max(parts, key=lambda r: r[0])  # max keeps the earliest subtree
        nodes = 1 + sum(r[2] for r in parts)
    else:
        best, best_choice, nodes = _best_rows(compat, ())
    counts = np.zeros((compat.shape[1], d), dtype=np.int64)
    for i, s in enumerate(best_choice):
        counts += compat[i, :, s, :]
    response = [int(t) for t in counts.argmax(axis=1)]
    row_vecs = tuple(game.instance.bases[x][s] for x, s in zip(rows, best_choice))
    col_vecs = tuple(game.instance.bases[y][t] for y, t in zip(cols, response))
    alice, bob = (col_vecs, row_vecs) if swap else (row_vecs, col_vecs)
    return ClassicalResult(Fraction(best, total), best, alice, bob, nodes)


def classical_value_exhaustive(game: GameSpec, limit: int = EXHAUSTIVE_LIMIT) -> Fraction:
    """Independent oracle: score every pair of deterministic strategies."""
    if game.strategy_space() > limit:
        raise ValueError(f"{game.strategy_space()} strategy pairs exceed the limit {limit}")
    compat = _compat(game, game.alice_inputs, game.bob_inputs)
    n_a, n_b, d = compat.shape[0], compat.shape[1], compat.shape[2]
    alice = np.array(list(itertools.product(range(d), repeat=n_a)), dtype=np.intp).reshape(-1, n_a)
    bob = np.array(list(itertools.product(range(d), repeat=n_b)), dtype=np.intp).reshape(-1, n_b)
    best = 0
    step = max(1, 2_000_000 // max(1, bob.shape[0]))
    for lo in range(0, alice.shape[0], step):
        blk = alice[lo:lo + step]
        score = np.zeros((blk.shape[0], bob.shape[0]), dtype=np.int64)
        for i in range(n_a):
            for j in range(n_b):
                score += compat[i, j][blk[:, i][:, None], bob[:, j][None, :]]
        best = max(best, int(score.max()))
    return Fraction(best, n_a * n_b)


# Quantum strategy ----------------------------------------------------------------

@dataclass
class QuantumCertificate:
    verifiable: bool
    perfect: bool
    support_violations: list = field(default_factory=list)  # (x, y, a, b) with support but losing
    normalization: dict = field(default_factory=dict)  # (x, y) -> exact total probability
    support: dict = field(default_factory=dict)  # (x, y) -> list of (a, b) with nonzero probability
    reason: str = ""


def _squared_norm(v: Sequence[FieldElement]) -> FieldElement:
    return inner_product(v, v)


def verify_quantum_perfect(instance: KSInstance, game: GameSpec) -> QuantumCertificate:
    """Exact check of the maximally entangled strategy.

    Measuring a maximally entangled pair of qudits in bases ``x`` and ``y``
    gives ``(a, b)`` with probability ``<a,b>^2 / (|a|^2 |b|^2 d)`` for real
    vectors.  The strategy is perfect when every pair in the support wins and
    the probabilities of each input pair sum to one.
    """
    if not instance.is_coordinate_backed:
        return QuantumCertificate(False, False, reason="not verifiable, orthogonality-only instance")
    d = instance.dimension
    cert = QuantumCertificate(True, True)
    norms = {}
    for x in set(game.alice_inputs) | set(game.bob_inputs):
        for v in instance.bases[x]:
            norms[v] = _squared_norm(instance.vectors[v])
    for x in game.alice_inputs:
        for y in game.bob_inputs:
            total = FieldElement(0)
            support = []
            for a in instance.bases[x]:
                for b in instance.bases[y]:
                    ip = inner_product(instance.vectors[a], instance.vectors[b])
                    if ip.is_zero():
                        continue
                    support.append((a, b))
                    total = total + ip * ip / (norms[a] * norms[b] * d)
                    if not game.wins(a, b):
                        cert.support_violations.append((x, y, a, b))
            cert.support[(x, y)] = support
            cert.normalization[(x, y)] = total
            if total != FieldElement(1):
                cert.perfect = False
    if cert.support_violations:
        cert.perfect = False
    return cert


def simulate_quantum(instance: KSInstance, game: GameSpec, shots: int, seed: int = 0) -> float:
    """Floating-point sampling of the entangled strategy; demonstration only."""
    rng = random.Random(seed)
    vec = {i: np.array([float(c) for c in v]) for i, v in enumerate(instance.vectors) if v is not None}
    wins = 0
    for _ in range(shots):
        x = rng.choice(game.alice_inputs)
        y = rng.choice(game.bob_inputs)
        pairs = [(a, b) for a in instance.bases[x] for b in instance.bases[y]]
        weights = [
            float(vec[a] @ vec[b]) ** 2 / float(vec[a] @ vec[a]) / float(vec[b] @ vec[b])
            for a, b in pairs
        ]
        a, b = rng.choices(pairs, weights=weights)[0]
        wins += game.wins(a, b)
    return wins / shots


# Combined report -----------------------------------------------------------------

@dataclass
class GameValueReport:
    game: GameSpec
    classical: ClassicalResult
    quantum: QuantumCertificate
    exhaustive_value: Fraction | None = None

    @property
    def classical_value(self) -> Fraction:
        return self.classical.value

    @property
    def quantum_perfect(self) -> bool:
        return self.quantum.perfect

    @property
    def status(self) -> str:
        if not self.quantum.verifiable:
            return "quantum strategy not verifiable"
        if self.quantum.perfect and self.classical.value < 1:
            return "BPQS (perfect with classical value < 1)"
        if self.quantum.perfect:
            return "perfect (no quantum advantage: classical value = 1)"
        return "not perfect"

    def payload(self) -> dict:
        inst = self.game.instance
        vl, bl = inst.vector_labels, inst.basis_labels
        out = {
            "instance": inst.name,
            "S_A": [bl[x] for x in self.game.alice_inputs],
            "S_B": [bl[y] for y in self.game.bob_inputs],
            "input_probability": str(self.game.input_probability),
            "win_predicate": "not orthogonal",
            "classical_value": str(self.classical.value),
            "classical_wins": f"{self.classical.wins}/{self.game.n_inputs}",
            "classical_strategy": {
                "alice": [vl[v] for v in self.classical.alice],
                "bob": [vl[v] for v in self.classical.bob],
            },
            "bks": self.classical.value < 1,
            "quantum_verifiable": self.quantum.verifiable,
            "quantum_perfect": self.quantum.perfect,
            "status": self.status,
        }
        if self.exhaustive_value is not None:
            out["classical_value_exhaustive"] = str(self.exhaustive_value)
        if self.quantum.verifiable:
            out["normalization"] = sorted({str(v) for v in self.quantum.normalization.values()})
            out["support_violations"] = [
                [bl[x], bl[y], vl[a], vl[b]] for x, y, a, b in self.quantum.support_violations
            ]
        else:
            out["quantum_note"] = self.quantum.reason
        return out


def evaluate_game(instance: KSInstance, s_a: Iterable[int], s_b: Iterable[int],
                  cross_check: bool = True, jobs: int = 1) -> GameValueReport:
    """Classical value (cross-checked exhaustively when small) and quantum verdict."""
    game = build_game(instance, s_a, s_b)
    result = classical_value(game, jobs=jobs)
    exhaustive = None
    if cross_check and game.strategy_space() <= EXHAUSTIVE_LIMIT:
        exhaustive = classical_value_exhaustive(game)
        if exhaustive != result.value:  # pragma: no cover - would be a bug
            raise AssertionError(f"branch-and-bound {result.value} != exhaustive {exhaustive}")
    return GameValueReport(game, result, verify_quantum_perfect(instance, game), exhaustive)
