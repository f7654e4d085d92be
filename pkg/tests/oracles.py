"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import numpy as np

from bkskit.feasibility import FeasibilityProblem


def _popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(x) if hasattr(np, "bitwise_count") else np.array([bin(int(v)).count("1") for v in x])


def exhaustive_feasible(problem: FeasibilityProblem) -> bool:
    """Evaluate every one of the 2**n assignments at once with numpy bit masks."""
    n = problem.n_variables
    x = np.arange(1 << n, dtype=np.uint32)
    ok = np.ones(x.shape, dtype=bool)
    for s in problem.exactly_one:
        m = np.uint32(sum(1 << v for v in set(s)))
        ok &= _popcount(x & m) == 1
    for s in problem.at_least_one:
        m = np.uint32(sum(1 << v for v in set(s)))
        ok &= (x & m) != 0
    for a, b in problem.at_most_one_pairs:
        m = np.uint32((1 << a) | (1 << b))
        ok &= (x & m) != m
    return bool(ok.any())


def bks_by_assignment_search(instance, s_a, s_b) -> bool:
    """B-KS decided straight from the definition by depth-first search over picks.

    Alice picks one vector per basis of S_A, Bob one per basis of S_B, and no
    Alice pick may be orthogonal to a Bob pick.  Returns True when no such
    choice exists.
    """
    sa = sorted(set(s_a))
    sb = sorted(set(s_b))
    slots = [("A", b) for b in sa] + [("B", b) for b in sb]
    adj = instance.adjacency

    def dfs(i, alice, bob):
        if i == len(slots):
            return True
        side, b = slots[i]
        for v in instance.bases[b]:
            if side == "A":
                if any(w in adj[v] for w in bob):
                    continue
                if dfs(i + 1, alice | {v}, bob):
                    return True
            else:
                if any(w in adj[v] for w in alice):
                    continue
                if dfs(i + 1, alice, bob | {v}):
                    return True
        return False

    return not dfs(0, frozenset(), frozenset())


def group_elements(generators, limit: int = 100_000) -> set[tuple[int, ...]]:
    """Closure of the generator set (basis permutations) by breadth-first search."""
    if not generators:
        return set()
    n = len(generators[0])
    identity = tuple(range(n))
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for p in frontier:
            for g in generators:
                q = tuple(g[i] for i in p)
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
                    if len(seen) > limit:
                        raise ValueError("group too large to enumerate")
        frontier = nxt
    return seen


def burnside_orbit_counts(elements, subsets) -> dict[int, int]:
    """Orbits per size as the average number of fixed subsets (Burnside's lemma)."""
    by_size: dict[int, list[frozenset]] = {}
    for s in subsets:
        by_size.setdefault(len(s), []).append(frozenset(s))
    out = {}
    for k, family in sorted(by_size.items()):
        fixed = sum(1 for g in elements for s in family if frozenset(g[i] for i in s) == s)
        assert fixed % len(elements) == 0
        out[k] = fixed // len(elements)
    return out
