"""Complete 0/1 feasibility engine and the three problem encodings.

A problem has boolean variables and three constraint kinds: "exactly one of
this set", "at least one of this set" and "not both of this pair".  The engine
is depth-first backtracking with unit propagation over bitmasks; it is
deterministic and decides every problem.

Encodings:

* :func:`encode_ks` -- an instance is a KS set iff its problem is infeasible.
* :func:`encode_bks` -- ``(S_A, S_B)`` is a bipartite KS pair iff infeasible.
* :func:`encode_bks_capable` -- ``S_A`` is capable iff infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Hashable, Iterable, Sequence

from .ks import KSInstance, groundset

__all__ = [
    "FeasibilityProblem",
    "AssignmentWitness",
    "SolverStats",
    "solve",
    "satisfies",
    "brute_force_feasible",
    "encode_ks",
    "encode_bks",
    "encode_bks_capable",
    "check_capable_equivalence",
    "to_cnf",
]


@dataclass(frozen=True)
class FeasibilityProblem:
    variables: tuple
    exactly_one: tuple = ()
    at_least_one: tuple = ()
    at_most_one_pairs: tuple = ()

    def __post_init__(self) -> None:
        n = len(self.variables)
        for group in (self.exactly_one, self.at_least_one):
            for s in group:
                if any(not (0 <= v < n) for v in s):
                    raise ValueError(f"constraint {s} references an undeclared variable")
        for a, b in self.at_most_one_pairs:
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"invalid pair constraint ({a}, {b})")

    @property
    def n_variables(self) -> int:
        return len(self.variables)


@dataclass(frozen=True)
class AssignmentWitness:
    """A total 0/1 assignment, indexed like ``problem.variables``."""

    values: tuple

    def true_variables(self, problem: FeasibilityProblem) -> list[Hashable]:
        return [problem.variables[i] for i, x in enumerate(self.values) if x]


@dataclass
class SolverStats:
    calls: int = 0
    nodes: int = 0

    def merge(self, other: SolverStats) -> None:
        self.calls += other.calls
        self.nodes += other.nodes


def satisfies(problem: FeasibilityProblem, values: Sequence[int]) -> bool:
    """Independent constraint evaluator, used to re-check witnesses."""
    if len(values) != problem.n_variables or any(x not in (0, 1) for x in values):
        return False
    for s in problem.exactly_one:
        if sum(values[v] for v in s) != 1:
            return False
    for s in problem.at_least_one:
        if not any(values[v] for v in s):
            return False
    for a, b in problem.at_most_one_pairs:
        if values[a] and values[b]:
            return False
    return True


def brute_force_feasible(problem: FeasibilityProblem) -> bool:
    """Decide by enumerating all 2**n assignments. Only for tiny problems."""
    n = problem.n_variables
    for bits in range(1 << n):
        if satisfies(problem, [(bits >> i) & 1 for i in range(n)]):
            return True
    return False


class _Compiled:
    __slots__ = ("n", "sets", "conflict")

    def __init__(self, problem: FeasibilityProblem) -> None:
        n = problem.n_variables
        conflict = [0] * n
        sets = []
        for s in problem.exactly_one:
            m = 0
            for v in s:
                m |= 1 << v
            for v in s:
                conflict[v] |= m & ~(1 << v)
            sets.append(m)
        for s in problem.at_least_one:
            m = 0
            for v in s:
                m |= 1 << v
            sets.append(m)
        for a, b in problem.at_most_one_pairs:
            conflict[a] |= 1 << b
            conflict[b] |= 1 << a
        self.n = n
        self.sets = sets
        self.conflict = conflict


def _propagate(sets: list[int], conflict: list[int], t: int, f: int) -> tuple[int, int] | None:
    changed = True
    while changed:
        changed = False
        for m in sets:
            if m & t:
                continue
            avail = m & ~f
            if not avail:
                return None
            if not avail & (avail - 1):
                c = conflict[avail.bit_length() - 1]
                if c & t:
                    return None
                t |= avail
                f |= c
                changed = True
    return t, f


def _search(sets: list[int], conflict: list[int], t: int, f: int, stats: SolverStats) -> int | None:
    stats.nodes += 1
    r = _propagate(sets, conflict, t, f)
    if r is None:
        return None
    t, f = r
    best = 0
    best_count = 0
    for m in sets:
        if m & t:
            continue
        avail = m & ~f
        k = avail.bit_count()
        if best_count == 0 or k < best_count:
            best, best_count = avail, k
            if k == 2:
                break
    if best_count == 0:
        return t
    bit = best & -best
    c = conflict[bit.bit_length() - 1]
    if not c & t:
        found = _search(sets, conflict, t | bit, f | c, stats)
        if found is not None:
            return found
    return _search(sets, conflict, t, f | bit, stats)


def solve(problem: FeasibilityProblem, stats: SolverStats | None = None) -> AssignmentWitness | None:
    """Return a satisfying assignment, or ``None`` when none exists.

    Branches on the lowest-index free variable of the unsatisfied set with the
    fewest free variables, trying 1 before 0.
    """
    stats = stats if stats is not None else SolverStats()
    stats.calls += 1
    comp = _Compiled(problem)
    t = _search(comp.sets, comp.conflict, 0, 0, stats)
    if t is None:
        return None
    values = tuple((t >> i) & 1 for i in range(comp.n))
    if not satisfies(problem, values):  # pragma: no cover - engine bug guard
        raise AssertionError("solver produced an assignment that violates the problem")
    return AssignmentWitness(values)


# Encodings ------------------------------------------------------------------

def encode_ks(instance: KSInstance) -> FeasibilityProblem:
    """One variable per vector; one per basis; never two orthogonal vectors."""
    return FeasibilityProblem(
        variables=tuple(instance.vector_labels),
        exactly_one=tuple(tuple(b) for b in instance.bases),
        at_most_one_pairs=tuple(sorted(instance.orthogonality)),
    )


def _check_subset(instance: KSInstance, subset: Iterable[int], side: str) -> tuple[int, ...]:
    s = tuple(sorted(set(subset)))
    bad = [b for b in s if not (0 <= b < instance.n_bases)]
    if bad:
        raise IndexError(f"{side}: basis indices {bad} out of range for {instance.name}")
    return s


def encode_bks(instance: KSInstance, s_a: Iterable[int], s_b: Iterable[int]) -> FeasibilityProblem:
    """Variables ``(side, basis, vector)`` with one copy per side and basis.

    A basis present on both sides gets two independent copies.  Only
    cross-side pairs of orthogonal vectors are forbidden; a vector is never
    orthogonal to itself, so two copies of one vector never conflict.
    """
    sa = _check_subset(instance, s_a, "S_A")
    sb = _check_subset(instance, s_b, "S_B")
    variables = []
    eo = []
    a_vars: list[tuple[int, int]] = []
    b_vars: list[tuple[int, int]] = []
    for side, subset, bucket in (("A", sa, a_vars), ("B", sb, b_vars)):
        for bi in subset:
            group = []
            for v in instance.bases[bi]:
                group.append(len(variables))
                bucket.append((len(variables), v))
                variables.append((side, bi, v))
            eo.append(tuple(group))
    adj = instance.adjacency
    pairs = [
        (i, j)
        for i, u in a_vars
        for j, w in b_vars
        if w in adj[u]
    ]
    return FeasibilityProblem(tuple(variables), tuple(eo), (), tuple(pairs))


def encode_bks_capable(instance: KSInstance, s_a: Iterable[int], literal: bool = False) -> FeasibilityProblem:
    """One variable per vector of the basis groundset.

    Exactly one per basis of ``S_A``, at least one per other basis, and no
    orthogonal pair between the groundset of ``S_A`` and the groundset of all
    bases.  Pairs inside the groundset of ``S_A`` matter whenever two vectors
    are orthogonal without sharing a basis (common in dimension 3): Alice's
    picks must be pairwise compatible because Bob may be asked any basis of
    ``S_A`` too.  ``literal=True`` restricts the pairs to
    ``Gamma(S_A) x Gamma(B minus S_A)``, which is weaker on such instances and
    is kept only to demonstrate the difference.
    """
    sa = _check_subset(instance, s_a, "S_A")
    sa_set = set(sa)
    rest = [bi for bi in range(instance.n_bases) if bi not in sa_set]
    ground = sorted(groundset(instance, range(instance.n_bases)))
    pos = {v: i for i, v in enumerate(ground)}
    g_a = sorted(groundset(instance, sa))
    partners = groundset(instance, rest) if literal else frozenset(ground)
    adj = instance.adjacency
    pairs = set()
    for u in g_a:
        for w in adj[u]:
            if w in partners:
                i, j = pos[u], pos[w]
                pairs.add((i, j) if i < j else (j, i))
    return FeasibilityProblem(
        variables=tuple(instance.vector_labels[v] for v in ground),
        exactly_one=tuple(tuple(pos[v] for v in instance.bases[bi]) for bi in sa),
        at_least_one=tuple(tuple(pos[v] for v in instance.bases[bi]) for bi in rest),
        at_most_one_pairs=tuple(sorted(pairs)),
    )


def check_capable_equivalence(instance: KSInstance, s_a: Iterable[int]) -> bool:
    """Do the two capability encodings agree on feasibility for ``S_A``?"""
    s_a = tuple(s_a)
    via_pairs = solve(encode_bks(instance, s_a, range(instance.n_bases))) is not None
    via_vectors = solve(encode_bks_capable(instance, s_a)) is not None
    return via_pairs == via_vectors


def to_cnf(problem: FeasibilityProblem) -> str:
    """DIMACS CNF text: exactly-one sets expand to a clause plus pairwise exclusions."""
    clauses: list[list[int]] = []
    for s in problem.exactly_one:
        clauses.append([v + 1 for v in s])
        clauses.extend([-(a + 1), -(b + 1)] for a, b in combinations(s, 2))
    for s in problem.at_least_one:
        clauses.append([v + 1 for v in s])
    for a, b in problem.at_most_one_pairs:
        clauses.append([-(a + 1), -(b + 1)])
    lines = [f"p cnf {problem.n_variables} {len(clauses)}"]
    lines.extend(" ".join(map(str, c)) + " 0" for c in clauses)
    return "\n".join(lines) + "\n"
