"""Automorphisms of a KS instance and canonical forms of basis subsets.

An automorphism is a permutation of the vectors that preserves orthogonality
and maps the basis list onto itself.  It is found as an automorphism of the
coloured graph with one node per vector, one node per basis, orthogonality
edges between vectors and membership edges between vectors and bases.  The
search is individualization-refinement: colour refinement on two copies of
the graph at once, individualize one vertex per copy, refine again, and
backtrack when the two copies disagree.

A stabilizer chain over the vectors gives a strong generating set, hence the
exact group order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .ks import KSInstance, mask_of, members_of

__all__ = [
    "AutomorphismGroup",
    "automorphism_group",
    "apply_to_subset",
    "canonical_form",
    "orbit_count",
    "orbit_representatives",
    "random_element",
    "cycle_notation",
]


@dataclass(frozen=True)
class AutomorphismGroup:
    """Generators as permutations of vectors and of bases (``perm[i]`` = image of ``i``)."""

    n_vectors: int
    n_bases: int
    vector_generators: tuple
    basis_generators: tuple
    order: int
    base: tuple = ()
    orbit_sizes: tuple = ()
    preserves_bases: bool = True
    graph_only_order: int | None = None
    notes: tuple = field(default=())

    @property
    def differs_from_graph_group(self) -> bool:
        return self.graph_only_order is not None and self.graph_only_order != self.order


# Colour refinement -------------------------------------------------------------

def _refine(colors: list[int], nbrs: Sequence[Sequence[int]]) -> list[int]:
    """Equitable refinement; colour ids are canonical (sorted signatures)."""
    n_classes = len(set(colors))
    while True:
        sigs = [(colors[v], tuple(sorted(colors[u] for u in nbrs[v]))) for v in range(len(colors))]
        table = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [table[s] for s in sigs]
        if len(table) == n_classes:
            return new
        colors, n_classes = new, len(table)


class _Graph:
    def __init__(self, n_nodes: int, edges: Iterable[tuple[int, int]], colors: Sequence[int]):
        nb: list[set[int]] = [set() for _ in range(n_nodes)]
        for a, b in edges:
            nb[a].add(b)
            nb[b].add(a)
        self.n = n_nodes
        self.nbrs = [sorted(s) for s in nb]
        self.edge_set = {(a, b) for a in range(n_nodes) for b in nb[a]}
        self.colors = list(colors)
        # two disjoint copies for joint refinement
        n = n_nodes
        self.union_nbrs = self.nbrs + [[u + n for u in s] for s in self.nbrs]

    def is_automorphism(self, perm: Sequence[int]) -> bool:
        if sorted(perm) != list(range(self.n)):
            return False
        if any(self.colors[perm[v]] != self.colors[v] for v in range(self.n)):
            return False
        return all((perm[a], perm[b]) in self.edge_set for a, b in self.edge_set)

    def find(self, pairs: Sequence[tuple[int, int]]) -> list[int] | None:
        """An automorphism mapping each ``u`` to ``v`` for ``(u, v)`` in ``pairs``."""
        n = self.n
        colors = self.colors + self.colors
        top = max(colors) + 1
        for i, (u, v) in enumerate(pairs):
            colors[u] = top + i
            colors[v + n] = top + i
        return self._search(colors)

    def _search(self, colors: list[int]) -> list[int] | None:
        n = self.n
        colors = _refine(colors, self.union_nbrs)
        left: dict[int, list[int]] = {}
        right: dict[int, list[int]] = {}
        for v in range(n):
            left.setdefault(colors[v], []).append(v)
            right.setdefault(colors[v + n], []).append(v)
        if left.keys() != right.keys() or any(len(left[c]) != len(right[c]) for c in left):
            return None
        cells = [c for c in left if len(left[c]) > 1]
        if not cells:
            perm = [0] * n
            for c, (u,) in left.items():
                perm[u] = right[c][0]
            return perm if self.is_automorphism(perm) else None
        target = min(cells, key=lambda c: (len(left[c]), c))
        u = left[target][0]
        fresh = max(colors) + 1
        for v in right[target]:
            trial = list(colors)
            trial[u] = fresh
            trial[v + n] = fresh
            found = self._search(trial)
            if found is not None:
                return found
        return None

    def refined(self, fixed: Sequence[int]) -> list[int]:
        colors = list(self.colors)
        top = max(colors) + 1
        for i, f in enumerate(fixed):
            colors[f] = top + i
        return _refine(colors, self.nbrs)


def _orbit(point: int, gens: Sequence[Sequence[int]]) -> set[int]:
    seen = {point}
    todo = [point]
    while todo:
        p = todo.pop()
        for g in gens:
            q = g[p]
            if q not in seen:
                seen.add(q)
                todo.append(q)
    return seen


def _incidence_graph(instance: KSInstance, with_bases: bool) -> _Graph:
    n, m = instance.n_vectors, instance.n_bases
    edges = list(instance.orthogonality)
    colors = [0] * n
    if with_bases:
        edges += [(v, n + bi) for bi, b in enumerate(instance.bases) for v in b]
        colors += [1] * m
    return _Graph(len(colors), edges, colors)


def _stabilizer_chain(graph: _Graph, points: int) -> tuple[list[list[int]], list[int], list[int]]:
    """Strong generating set relative to a base of vector nodes, with orbit sizes."""
    gens: list[list[int]] = []
    base: list[int] = []
    sizes: list[int] = []
    for b in range(points):
        colors = graph.refined(base)
        if len(set(colors[:points])) == points:
            break  # pointwise stabilizer of the base is trivial
        level = [g for g in gens if all(g[f] == f for f in base)]
        orbit = _orbit(b, level)
        for x in range(points):
            if colors[x] != colors[b] or x in orbit:
                continue
            g = graph.find([(f, f) for f in base] + [(b, x)])
            if g is not None:
                gens.append(g)
                level.append(g)
                orbit = _orbit(b, level)
        base.append(b)
        sizes.append(len(orbit))
    return gens, base, sizes


def _basis_perm(instance: KSInstance, vperm: Sequence[int]) -> list[int] | None:
    index = {frozenset(b): i for i, b in enumerate(instance.bases)}
    out = []
    for b in instance.bases:
        j = index.get(frozenset(vperm[v] for v in b))
        if j is None:
            return None
        out.append(j)
    return out


def automorphism_group(instance: KSInstance, graph_only_check: bool = True) -> AutomorphismGroup:
    """Automorphisms preserving orthogonality and the basis list.

    With ``graph_only_check`` the group of the bare orthogonality graph is
    computed as well and its order recorded, so instances where the two groups
    differ are flagged.
    """
    n = instance.n_vectors
    graph = _incidence_graph(instance, with_bases=True)
    gens, base, sizes = _stabilizer_chain(graph, n)
    vgens = []
    bgens = []
    for g in gens:
        vp = tuple(g[:n])
        bp = tuple(g[v] - n for v in range(n, graph.n))
        if bp != tuple(_basis_perm(instance, vp) or ()):
            raise AssertionError("generator does not act consistently on bases")
        if vp not in vgens:
            vgens.append(vp)
            bgens.append(bp)
    order = 1
    for s in sizes:
        order *= s
    notes = []
    graph_order = None
    if graph_only_check:
        g2 = _incidence_graph(instance, with_bases=False)
        ggens, _, gsizes = _stabilizer_chain(g2, n)
        graph_order = 1
        for s in gsizes:
            graph_order *= s
        broken = sum(1 for g in ggens if _basis_perm(instance, g) is None)
        if graph_order != order:
            notes.append(
                f"orthogonality-graph group has order {graph_order}; {broken} of its generators "
                "do not map the basis list onto itself"
            )
    return AutomorphismGroup(
        n_vectors=n,
        n_bases=instance.n_bases,
        vector_generators=tuple(vgens),
        basis_generators=tuple(bgens),
        order=order,
        base=tuple(base),
        orbit_sizes=tuple(sizes),
        preserves_bases=True,
        graph_only_order=graph_order,
        notes=tuple(notes),
    )


# Acting on basis subsets --------------------------------------------------------

def apply_to_subset(perm: Sequence[int], subset: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(perm[i] for i in subset))


def _apply_mask(perm: Sequence[int], mask: int) -> int:
    out = 0
    i = 0
    while mask:
        if mask & 1:
            out |= 1 << perm[i]
        mask >>= 1
        i += 1
    return out


def canonical_form(group: AutomorphismGroup, subset: Iterable[int]) -> tuple[int, ...]:
    """Lexicographically least sorted image of ``subset`` over its orbit."""
    start = mask_of(subset)
    seen = {start}
    todo = [start]
    while todo:
        m = todo.pop()
        for g in group.basis_generators:
            img = _apply_mask(g, m)
            if img not in seen:
                seen.add(img)
                todo.append(img)
    return min(members_of(m) for m in seen)


def _find(parent: dict, x: int) -> int:
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def _orbit_partition(group: AutomorphismGroup, masks: Sequence[int]) -> dict[int, int] | None:
    """Union-find over generator images; ``None`` if the family is not closed."""
    parent = {m: m for m in masks}
    for g in group.basis_generators:
        for m in masks:
            img = _apply_mask(g, m)
            if img not in parent:
                return None
            a, b = _find(parent, m), _find(parent, img)
            if a != b:
                if a < b:
                    parent[b] = a
                else:
                    parent[a] = b
    return {m: _find(parent, m) for m in masks}


def orbit_count(group: AutomorphismGroup, subsets: Iterable[Iterable[int]]) -> dict[int, int]:
    """Number of isomorphism classes per subset size."""
    masks = list(dict.fromkeys(mask_of(s) for s in subsets))
    roots = _orbit_partition(group, masks)
    counts: dict[int, set] = {}
    if roots is None:
        for m in masks:
            counts.setdefault(m.bit_count(), set()).add(canonical_form(group, members_of(m)))
    else:
        for m, r in roots.items():
            counts.setdefault(m.bit_count(), set()).add(r)
    return {k: len(v) for k, v in sorted(counts.items())}


def orbit_representatives(group: AutomorphismGroup, subsets: Iterable[Iterable[int]]) -> list[tuple[int, ...]]:
    """One canonical form per class, sorted by (size, lexicographic)."""
    reps = {canonical_form(group, s) for s in subsets}
    return sorted(reps, key=lambda s: (len(s), s))


def random_element(group: AutomorphismGroup, rng: random.Random, length: int = 12) -> tuple[tuple, tuple]:
    """A random word in the generators, as (vector perm, basis perm)."""
    vp = list(range(group.n_vectors))
    bp = list(range(group.n_bases))
    if not group.vector_generators:
        return tuple(vp), tuple(bp)
    for _ in range(length):
        i = rng.randrange(len(group.vector_generators))
        gv, gb = group.vector_generators[i], group.basis_generators[i]
        vp = [gv[x] for x in vp]
        bp = [gb[x] for x in bp]
    return tuple(vp), tuple(bp)


def cycle_notation(perm: Sequence[int], labels: Sequence[str] | None = None) -> str:
    """Cycle notation without fixed points, e.g. ``(v1 v2)(v3 v5 v4)``; ``()`` for identity."""
    seen = set()
    parts = []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc = [start]
        seen.add(start)
        x = perm[start]
        while x != start:
            cyc.append(x)
            seen.add(x)
            x = perm[x]
        names = [labels[i] if labels is not None else str(i) for i in cyc]
        parts.append("(" + " ".join(names) + ")")
    return "".join(parts) or "()"
