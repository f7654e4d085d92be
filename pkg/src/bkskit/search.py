"""Optimal B-KS search, capable-set census and essential filtering.

Subsets of the basis list are handled as integer bitmasks internally (bit
``i`` is basis ``i``) and exposed as sorted index tuples.  Within one size,
subsets are visited in lexicographic order of their sorted index tuples.

Two exact, solver-independent shortcuts keep the searches tractable:

* A *certificate* for non-capability is an independent set ``P`` of vectors
  such that every basis still has a vector orthogonal to nothing in ``P``.
  Every ``S_A`` whose bases all meet ``P`` is then not capable (Alice answers
  with her vector of ``P``, Bob with a compatible vector).  Certificates are
  extracted from solver witnesses and greedily enlarged.
* The *frontier* of ``S_A`` is the antichain of maximal basis sets Bob can
  always answer against some fixed strategy of Alice on ``S_A``.  ``(S_A, S_B)``
  is B-KS iff ``S_B`` is contained in no frontier mask.  It is computed by a
  dynamic program over Alice's picks that keeps only inclusion-minimal sets of
  blocked vectors.

Every pair reported as optimal is re-confirmed by a fresh solver call.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from ._parallel import worker_pool
from .feasibility import SolverStats, encode_bks, encode_bks_capable, encode_ks, solve
from .ks import KSInstance, cardinality_lower_bound, groundset, mask_of, members_of
from .symmetry import AutomorphismGroup, automorphism_group

__all__ = [
    "NotKSSetError",
    "SearchCounters",
    "CapableCensus",
    "SearchReport",
    "lex_layer",
    "lex_layer_chunks",
    "non_capable_certificate",
    "bob_frontier",
    "is_bks_by_frontier",
    "enumerate_capable",
    "essential_filter",
    "optimal_bks",
    "optimal_bks_symmetric",
    "min_hitting_set",
    "orbit_representative_masks",
    "call_budget_estimate",
]

ProgressFn = Callable[[dict], None]

CHUNK = 2048  # fixed work unit for capability checks; independent of --jobs
LAYER_BATCH = 1 << 22  # rows per vectorized pass over a subset layer


class NotKSSetError(ValueError):
    """The instance admits a KS assignment; ``witness`` lists the chosen vectors."""

    def __init__(self, name: str, witness: list[int]):
        super().__init__(f"{name} is not a KS set: a valid 0/1 assignment exists")
        self.name = name
        self.witness = witness


@dataclass
class SearchCounters:
    ks_calls: int = 0
    capable_calls: int = 0
    bks_calls: int = 0
    solver_nodes: int = 0
    subsets_visited: int = 0
    pruned_superset: int = 0
    pruned_certificate: int = 0
    certificates: int = 0
    pair_checks: int = 0
    frontiers: int = 0
    orbit_representatives: int = 0
    hitting_set_nodes: int = 0

    def merge(self, other: SearchCounters) -> None:
        for k, v in vars(other).items():
            setattr(self, k, getattr(self, k) + v)

    def to_dict(self) -> dict:
        return dict(vars(self))


@dataclass
class CapableCensus:
    """Capable subsets grouped by size, each list in lexicographic order."""

    n_bases: int
    by_size: dict = field(default_factory=dict)  # size -> list[int mask]
    essential_masks: set = field(default_factory=set)
    complete_up_to: int = 0

    def all_masks(self) -> list[int]:
        return [m for k in sorted(self.by_size) for m in self.by_size[k]]

    def subsets(self) -> list[tuple[int, ...]]:
        return [members_of(m) for m in self.all_masks()]

    def essential(self) -> list[tuple[int, ...]]:
        return [members_of(m) for m in self.all_masks() if m in self.essential_masks]

    def totals(self) -> dict:
        return {k: len(v) for k, v in sorted(self.by_size.items()) if v}

    def essential_totals(self) -> dict:
        out: dict = {}
        for k in sorted(self.by_size):
            c = sum(1 for m in self.by_size[k] if m in self.essential_masks)
            if c:
                out[k] = c
        return out

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.by_size.values())

    @property
    def k_min(self) -> int | None:
        sizes = [k for k, v in self.by_size.items() if v]
        return min(sizes) if sizes else None


@dataclass
class SearchReport:
    instance: str
    strategy: str
    optimal_pair: tuple | None = None  # (S_A, S_B) as sorted basis-index tuples
    optimal_size: tuple | None = None
    omega: int | None = None
    k_min: int | None = None
    k_max: int | None = None
    capable_by_size: dict = field(default_factory=dict)
    essential_by_size: dict = field(default_factory=dict)
    iso_capable_by_size: dict = field(default_factory=dict)
    iso_essential_by_size: dict = field(default_factory=dict)
    improvements: list = field(default_factory=list)
    counters: SearchCounters = field(default_factory=SearchCounters)
    verified: bool = False
    wall_time: float = 0.0
    notes: list = field(default_factory=list)
    solver_touched: list = field(default_factory=list, repr=False)  # masks sent to the solver

    def payload(self, labels: Sequence[str] | None = None) -> dict:
        """Deterministic part of the report (no timing)."""

        def lab(s):
            return [labels[i] for i in s] if labels is not None else list(s)

        out: dict = {
            "instance": self.instance,
            "strategy": self.strategy,
            "k_min": self.k_min,
            "k_max": self.k_max,
            "counters": self.counters.to_dict(),
            "verified": self.verified,
        }
        if self.optimal_pair is not None:
            sa, sb = self.optimal_pair
            out["optimal_pair"] = {"S_A": lab(sa), "S_B": lab(sb)}
            out["optimal_size"] = list(self.optimal_size)
            out["omega"] = self.omega
        if self.improvements:
            out["improvements"] = [
                {"S_A": lab(a), "S_B": lab(b), "omega": w} for a, b, w in self.improvements
            ]
        for key in ("capable_by_size", "essential_by_size", "iso_capable_by_size", "iso_essential_by_size"):
            val = getattr(self, key)
            if val:
                out[key] = {str(k): v for k, v in sorted(val.items())}
        if self.notes:
            out["notes"] = list(self.notes)
        return out


# Subset layers ---------------------------------------------------------------

def lex_layer(n: int, k: int) -> np.ndarray:
    """All k-subsets of range(n) as uint64 masks, in lexicographic order."""
    if not 0 <= k <= n:
        return np.zeros(0, dtype=np.uint64)
    if n > 64:
        raise ValueError("at most 64 bases are supported")
    # rows[j] = masks of the (k-r)-subsets of range(j, n) for the current depth r
    rows = [np.zeros(1, dtype=np.uint64) if j <= n else None for j in range(n + 1)]
    for r in range(1, k + 1):
        new = [np.zeros(0, dtype=np.uint64)] * (n + 1)
        for start in range(n - r, -1, -1):
            head = np.uint64(1 << start) | rows[start + 1]
            new[start] = np.concatenate([head, new[start + 1]]) if start + 1 <= n - r else head
        rows = new
    return rows[0]


def lex_layer_chunks(n: int, k: int):
    """``lex_layer(n, k)`` split by smallest element, in the same order."""
    if not 0 < k <= n:
        yield lex_layer(n, k)
        return
    for first in range(0, n - k + 1):
        rest = lex_layer(n - first - 1, k - 1) << np.uint64(first + 1)
        yield np.uint64(1 << first) | rest


def _batched(chunks: Iterable[np.ndarray], size: int):
    """Concatenate consecutive chunks until each batch has at least ``size`` rows."""
    buf: list[np.ndarray] = []
    rows = 0
    for c in chunks:
        buf.append(c)
        rows += c.size
        if rows >= size:
            yield np.concatenate(buf)
            buf, rows = [], 0
    if buf:
        yield np.concatenate(buf)


def _popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(x) if hasattr(np, "bitwise_count") else np.array([int(v).bit_count() for v in x])


def _contained_in(x: np.ndarray, masks: Iterable[int]) -> np.ndarray:
    """Boolean array: row x[i] is a subset of at least one of ``masks``."""
    hit = np.zeros(x.shape, dtype=bool)
    for m in masks:
        hit |= (x & _u64(~m)) == 0
    return hit


# Certificates and frontiers --------------------------------------------------

def _bases_meeting(instance: KSInstance, vec_mask: int) -> int:
    out = 0
    for i, b in enumerate(instance.basis_masks):
        if b & vec_mask:
            out |= 1 << i
    return out


def _everyone_answerable(instance: KSInstance, blocked: int) -> bool:
    return all(b & ~blocked for b in instance.basis_masks)


def non_capable_certificate(instance: KSInstance, picks: Iterable[int]) -> int:
    """Basis mask certified non-capable by the independent vector set ``picks``.

    The set is greedily enlarged (vectors in index order) while every basis
    keeps a vector orthogonal to none of the picks.  Raises ``ValueError`` if
    ``picks`` itself is not a valid certificate.
    """
    orth = instance.orth_masks
    chosen = 0
    blocked = 0
    for v in picks:
        chosen |= 1 << v
        blocked |= orth[v]
    if chosen & blocked or not _everyone_answerable(instance, blocked):
        raise ValueError("picks do not form a non-capability certificate")
    for v in range(instance.n_vectors):
        if (chosen | blocked) >> v & 1:
            continue
        nb = blocked | orth[v]
        if _everyone_answerable(instance, nb):
            chosen |= 1 << v
            blocked = nb
    return _bases_meeting(instance, chosen)


_ALL = 0xFFFFFFFFFFFFFFFF


def _u64(m: int) -> np.uint64:
    return np.uint64(m & _ALL)


def _extremal(values: np.ndarray, minimal: bool) -> np.ndarray:
    """Inclusion-minimal (or maximal) elements of a uint64 mask array, sorted."""
    vals = np.unique(values)
    if vals.size <= 1:
        return vals
    pc = _popcount(vals).astype(np.int64)
    levels = np.unique(pc) if minimal else np.unique(pc)[::-1]
    kept = np.zeros(0, dtype=np.uint64)
    for p in levels:
        grp = vals[pc == p]
        if kept.size:
            dominated = np.zeros(grp.size, dtype=bool)
            for i in range(0, kept.size, 2048):
                chunk = kept[i:i + 2048]
                if minimal:
                    hit = (chunk[None, :] & ~grp[:, None]) == 0
                else:
                    hit = (grp[:, None] & ~chunk[None, :]) == 0
                dominated |= hit.any(axis=1)
            grp = grp[~dominated]
        kept = np.concatenate([kept, grp])
    return np.sort(kept)


def bob_frontier(instance: KSInstance, s_a: Iterable[int] | int) -> tuple[int, ...]:
    """Maximal basis masks ``T`` such that ``(S_A, T)`` is not B-KS.

    Alice's strategies are folded into the set of vectors they block; only
    inclusion-minimal blocked sets can matter to Bob.
    """
    bases = members_of(s_a) if isinstance(s_a, int) else tuple(sorted(set(s_a)))
    if instance.n_vectors > 64:
        raise ValueError("frontiers need at most 64 vectors")
    orth = np.array([_u64(m) for m in instance.orth_masks], dtype=np.uint64)
    states = np.zeros(1, dtype=np.uint64)
    for bi in bases:
        picks = orth[list(instance.bases[bi])]
        states = _extremal((states[:, None] | picks[None, :]).ravel(), minimal=True)
    answerable = np.zeros(states.shape, dtype=np.uint64)
    for i, b in enumerate(instance.basis_masks):
        answerable |= np.where((_u64(b) & ~states) != 0, np.uint64(1 << i), np.uint64(0))
    return tuple(int(v) for v in _extremal(answerable, minimal=False))


def is_bks_by_frontier(frontier: Sequence[int], s_b_mask: int) -> bool:
    return all(s_b_mask & ~t for t in frontier)


# Capability census -------------------------------------------------------------

def _capable_witness_picks(instance: KSInstance, s_a: tuple[int, ...], values: Sequence[int]) -> list[int]:
    ground = sorted(groundset(instance, range(instance.n_bases)))
    in_a = groundset(instance, s_a)
    return [ground[i] for i, x in enumerate(values) if x and ground[i] in in_a]


def _classify_chunk(args) -> tuple[list[bool], list[int], SearchCounters]:
    """Decide capability for ``rows`` (masks), given a certificate snapshot."""
    instance, rows, certs, prune = args
    counters = SearchCounters()
    stats = SolverStats()
    certs = list(certs)
    new_certs: list[int] = []
    out: list[bool] = []
    for m in rows:
        if prune and any(m & ~t == 0 for t in certs):
            counters.pruned_certificate += 1
            out.append(False)
            continue
        s_a = members_of(m)
        counters.capable_calls += 1
        w = solve(encode_bks_capable(instance, s_a), stats)
        if w is None:
            out.append(True)
        else:
            out.append(False)
            if prune:
                cert = non_capable_certificate(instance, _capable_witness_picks(instance, s_a, w.values))
                certs.append(cert)
                new_certs.append(cert)
                counters.certificates += 1
    counters.solver_nodes += stats.nodes
    return out, new_certs, counters


class CapabilityEngine:
    """Layer-by-layer capability decisions with monotone and certificate pruning.

    Work inside a layer is split into fixed chunks that each start from the
    certificate set known at the layer boundary, so results and counters do
    not depend on how many workers execute the chunks.
    """

    def __init__(self, instance: KSInstance, prune: bool = True, jobs: int = 1,
                 counters: SearchCounters | None = None):
        self.instance = instance
        self.prune = prune
        self.jobs = max(1, int(jobs))
        self.counters = counters if counters is not None else SearchCounters()
        self.certificates: list[int] = []
        self.layers: dict[int, np.ndarray] = {}  # size -> sorted capable masks
        self.solver_touched: list[int] = []
        self._sorted: dict[int, np.ndarray] = {}

    def classify(self, x: np.ndarray, k: int) -> np.ndarray:
        """Capability flags for ``x``, which must be the complete k-layer."""
        flags = self._flags(x, k)
        self.layers[k] = x[flags]
        return flags

    def classify_layer(self, k: int) -> np.ndarray:
        """Classify all k-subsets chunk by chunk; returns the capable masks in lex order."""
        parts = []
        for x in _batched(lex_layer_chunks(self.instance.n_bases, k), LAYER_BATCH):
            parts.append(x[self._flags(x, k)])
        caps = np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint64)
        self.layers[k] = caps
        return caps

    def _flags(self, x: np.ndarray, k: int) -> np.ndarray:
        self.counters.subsets_visited += int(x.size)
        capable = np.zeros(x.shape, dtype=bool)
        prev = self._sorted_layer(k - 1) if self.prune else None
        if prev is not None and prev.size:
            for i in range(self.instance.n_bases):
                bit = np.uint64(1 << i)
                has = (x & bit) != 0
                sub = x & ~bit
                pos = np.searchsorted(prev, sub)
                pos[pos >= prev.size] = 0
                capable |= has & (prev[pos] == sub)
            self.counters.pruned_superset += int(capable.sum())
        todo = ~capable
        if self.prune and self.certificates:
            covered = todo & _contained_in(x, self.certificates)
            self.counters.pruned_certificate += int(covered.sum())
            todo &= ~covered
        idx = np.nonzero(todo)[0]
        rows = [int(v) for v in x[idx]]
        self.solver_touched.extend(rows)
        chunks = [rows[i:i + CHUNK] for i in range(0, len(rows), CHUNK)]
        snapshot = tuple(self.certificates)
        work = [(self.instance, c, snapshot, self.prune) for c in chunks]
        if self.jobs > 1 and len(work) > 1:
            results = list(worker_pool(self.jobs).map(_classify_chunk, work))
        else:
            results = [_classify_chunk(w) for w in work]
        flags: list[bool] = []
        for out, new_certs, cnt in results:
            flags.extend(out)
            self.certificates.extend(new_certs)
            self.counters.merge(cnt)
        if idx.size:
            capable[idx] = np.array(flags, dtype=bool)
        return capable

    def _sorted_layer(self, k: int) -> np.ndarray | None:
        if k not in self.layers:
            return None
        cached = self._sorted.get(k)
        if cached is None or cached.size != self.layers[k].size:
            cached = np.sort(self.layers[k])
            self._sorted[k] = cached
        return cached


def enumerate_capable(instance: KSInstance, size_range: tuple[int, int] | None = None,
                      prune: bool = True, jobs: int = 1, progress: ProgressFn | None = None,
                      counters: SearchCounters | None = None) -> CapableCensus:
    """All capable subsets with size in ``size_range`` (inclusive, default 1..|B|).

    Sizes below the range are still classified because pruning needs them.
    Essential sets are marked as capable sets with no capable (k-1)-subset.
    """
    nb = instance.n_bases
    lo, hi = size_range if size_range else (1, nb)
    hi = min(hi, nb)
    engine = CapabilityEngine(instance, prune=prune, jobs=jobs, counters=counters)
    census = CapableCensus(nb)
    for k in range(1, hi + 1):
        x = lex_layer(nb, k)
        flags = engine.classify(x, k)
        caps = [int(v) for v in x[flags]]
        if k >= lo:
            census.by_size[k] = caps
        if progress:
            progress({"event": "layer", "size": k, "subsets": int(x.size), "capable": len(caps)})
    census.complete_up_to = hi
    census.essential_masks = set(_essential_masks(census.by_size))
    census.solver_touched = engine.solver_touched  # type: ignore[attr-defined]
    return census


def _essential_masks(by_size: dict) -> list[int]:
    present = {m for v in by_size.values() for m in v}
    out = []
    for k in sorted(by_size):
        for m in by_size[k]:
            if not any((m & ~(1 << i)) in present for i in members_of(m)):
                out.append(m)
    return out


def essential_filter(instance: KSInstance, capable: Iterable[Iterable[int]]) -> list[tuple[int, ...]]:
    """Capable subsets with no proper capable subset.

    ``capable`` must contain every capable subset up to its largest size;
    by upward closure it is enough to look at the (|S|-1)-subsets.
    """
    masks = [mask_of(s) for s in capable]
    present = set(masks)
    ordered = sorted(present, key=lambda m: (m.bit_count(), members_of(m)))
    return [
        members_of(m) for m in ordered
        if not any((m & ~(1 << i)) in present for i in members_of(m))
    ]


# Optimal search ----------------------------------------------------------------

def require_ks(instance: KSInstance, counters: SearchCounters) -> None:
    stats = SolverStats()
    w = solve(encode_ks(instance), stats)
    counters.ks_calls += 1
    counters.solver_nodes += stats.nodes
    if w is not None:
        raise NotKSSetError(instance.name, [i for i, x in enumerate(w.values) if x])


def confirm_bks(instance: KSInstance, s_a: Sequence[int], s_b: Sequence[int], counters: SearchCounters) -> bool:
    stats = SolverStats()
    ok = solve(encode_bks(instance, s_a, s_b), stats) is None
    counters.bks_calls += 1
    counters.solver_nodes += stats.nodes
    return ok


class _FrontierStore:
    """Capable sets in C order with their frontiers, flattened per size."""

    def __init__(self, instance: KSInstance, counters: SearchCounters):
        self.instance = instance
        self.counters = counters
        self.sizes: list[int] = []
        self.by_size: dict[int, list[int]] = {}
        self.frontier: dict[int, tuple[int, ...]] = {}

    def add_layer(self, k: int, masks: Sequence[int]) -> None:
        self.by_size[k] = list(masks)
        self.sizes.append(k)

    def get_frontier(self, m: int) -> tuple[int, ...]:
        f = self.frontier.get(m)
        if f is None:
            f = bob_frontier(self.instance, m)
            self.frontier[m] = f
            self.counters.frontiers += 1
        return f


def _first_partners(store: _FrontierStore, rows: np.ndarray, max_size: int,
                    same_layer: list[int] | None, k: int) -> tuple[np.ndarray, np.ndarray]:
    """For each row, the C-order position and size of its first B-KS partner.

    Only stored sets of size <= ``max_size`` are considered; for rows of the
    current layer, partners of the same size must precede the row.
    Returns (size array, mask array) with size 0 where no partner exists.
    """
    n = rows.size
    p_size = np.zeros(n, dtype=np.int64)
    p_mask = np.zeros(n, dtype=np.uint64)
    pending = np.arange(n)
    for s in sorted(store.by_size):
        if s > max_size or pending.size == 0:
            break
        for c in store.by_size[s]:
            if pending.size == 0:
                break
            sub = rows[pending]
            ok = np.ones(sub.shape, dtype=bool)
            for t in store.get_frontier(c):
                ok &= (sub & _u64(~t)) != 0
            store.counters.pair_checks += int(pending.size)
            if ok.any():
                hit = pending[ok]
                p_size[hit] = s
                p_mask[hit] = np.uint64(c)
                pending = pending[~ok]
    if same_layer is not None and k <= max_size and pending.size:
        # partners of the current size must come earlier in the layer
        for j, c in enumerate(same_layer):
            later = pending[pending > j]
            if later.size == 0:
                continue
            sub = rows[later]
            ok = np.ones(sub.shape, dtype=bool)
            for t in store.get_frontier(c):
                ok &= (sub & _u64(~t)) != 0
            store.counters.pair_checks += int(later.size)
            if ok.any():
                hit = later[ok]
                p_size[hit] = k
                p_mask[hit] = np.uint64(c)
                keep = np.ones(pending.size, dtype=bool)
                keep[np.isin(pending, hit)] = False
                pending = pending[keep]
    return p_size, p_mask


def optimal_bks(instance: KSInstance, jobs: int = 1, progress: ProgressFn | None = None,
                max_size: int | None = None, checkpoint: str | Path | None = None) -> SearchReport:
    """Layered search for a B-KS pair minimizing ``|S_A| * |S_B|``.

    Subsets of size k (from 3) are visited lexicographically; each capable
    S_A is compared against the stored capable sets C in insertion order,
    stopping at the first stored S_B with ``|S_A||S_B| >= omega`` or at the
    first B-KS pair, which becomes the new optimum.  The search ends once
    ``k * k_min >= omega``.  Pair decisions use frontiers (exact); the inner
    loop is evaluated for a whole layer at once, then replayed in order so
    omega updates exactly as in the sequential loop.

    With ``checkpoint`` (a directory) the state is saved after every layer and
    a later call resumes from the last completed layer.
    """
    t0 = time.perf_counter()
    counters = SearchCounters()
    report = SearchReport(instance.name, "layered", counters=counters)
    require_ks(instance, counters)
    nb = instance.n_bases
    engine = CapabilityEngine(instance, prune=True, jobs=jobs, counters=counters)
    store = _FrontierStore(instance, counters)
    ckpt = _Checkpoint(checkpoint, instance, report.strategy) if checkpoint else None
    omega = nb * nb
    k_min = nb
    found = False
    best = None
    k = 3
    if ckpt is not None and ckpt.exists():
        state = ckpt.load(engine, counters)
        omega, k_min, found, k = state["omega"], state["k_min"], state["found"], state["next_size"]
        best = tuple(state["best"]) if state["best"] else None
        report.improvements = [(tuple(a), tuple(b), w) for a, b, w in state["improvements"]]
        report.capable_by_size = {int(x): v for x, v in state["capable_by_size"].items()}
        for size in range(3, k):
            store.add_layer(size, [int(c) for c in engine.layers[size]])
    else:
        # sizes 1 and 2 are never capable; classify them anyway for pruning
        for size in (1, 2):
            engine.classify_layer(size)
    limit = nb if max_size is None else min(nb, max_size)
    while k <= limit and not (found and k * k_min >= omega):
        caps = engine.classify_layer(k)
        report.capable_by_size[k] = int(caps.size)
        if caps.size and not found:
            k_min, found = k, True
        if caps.size:
            max_partner = (omega - 1) // k
            p_size, p_mask = _first_partners(store, caps, max_partner, [int(c) for c in caps], k)
            for i in np.nonzero(p_size)[0]:
                s = int(p_size[i])
                if k * s < omega:
                    best = (int(caps[i]), int(p_mask[i]))
                    omega = k * s
                    report.improvements.append((members_of(best[1]), members_of(best[0]), omega))
        store.add_layer(k, [int(c) for c in caps])
        if progress:
            progress({"event": "layer", "size": k, "capable": int(caps.size), "omega": omega})
        k += 1
        if ckpt is not None:
            ckpt.save(engine, counters, {
                "omega": omega, "k_min": k_min, "found": found, "next_size": k,
                "best": list(best) if best else None,
                "improvements": [[list(a), list(b), w] for a, b, w in report.improvements],
                "capable_by_size": {str(x): v for x, v in report.capable_by_size.items()},
            })
    report.k_min = k_min if found else None
    report.k_max = k - 1
    report.solver_touched = engine.solver_touched
    if best is not None:
        s_a_full, s_b_small = members_of(best[0]), members_of(best[1])
        # report with |S_A| <= |S_B|
        sa, sb = (s_b_small, s_a_full)
        report.optimal_pair = (sa, sb)
        report.optimal_size = (len(sa), len(sb))
        report.omega = omega
        report.verified = confirm_bks(instance, sa, sb, counters) and cardinality_lower_bound(instance, sa, sb)
    report.wall_time = time.perf_counter() - t0
    return report


# Symmetry-reduced search ---------------------------------------------------------

def _image_tables(perm: Sequence[int]) -> np.ndarray:
    """Byte lookup tables mapping each 8-bit slice of a mask to its image."""
    n = len(perm)
    n_bytes = (n + 7) // 8
    tables = np.zeros((n_bytes, 256), dtype=np.uint64)
    for j in range(n_bytes):
        for value in range(256):
            img = 0
            for bit in range(8):
                i = 8 * j + bit
                if value >> bit & 1 and i < n:
                    img |= 1 << perm[i]
            tables[j, value] = _u64(img)
    return tables


def _apply_tables(tables: np.ndarray, x: np.ndarray) -> np.ndarray:
    out = np.zeros(x.shape, dtype=np.uint64)
    for j in range(tables.shape[0]):
        out |= tables[j][((x >> np.uint64(8 * j)) & np.uint64(255)).astype(np.intp)]
    return out


def orbit_representative_masks(masks: np.ndarray, basis_generators: Sequence[Sequence[int]]) -> np.ndarray:
    """Indices of the first member (in the given order) of each orbit.

    ``masks`` must be closed under the generators, as the capable sets of one
    size are.  Orbits are the connected components of the generator action,
    found by minimum-label propagation.
    """
    n = masks.size
    if n == 0:
        return np.zeros(0, dtype=np.intp)
    order = np.argsort(masks, kind="stable")
    ordered = masks[order]
    images = []
    for g in basis_generators:
        img = _apply_tables(_image_tables(g), masks)
        pos = np.searchsorted(ordered, img)
        pos[pos >= n] = 0
        if not np.array_equal(ordered[pos], img):
            raise ValueError("subset family is not closed under the group")
        images.append(order[pos])
    labels = np.arange(n)
    while True:
        new = labels.copy()
        for idx in images:
            np.minimum.at(new, idx, labels)
            np.minimum(new, labels[idx], out=new)
        new = new[new]
        if np.array_equal(new, labels):
            break
        labels = new
    return np.nonzero(labels == np.arange(n))[0]


def _lower_bound_exceeds(fam: np.ndarray, budget: int) -> bool:
    """Greedy packing of pairwise disjoint sets: more than ``budget`` of them?"""
    used = np.uint64(0)
    rest = fam
    for _ in range(budget + 1):
        rest = rest[(rest & used) == 0]
        if rest.size == 0:
            return False
        pc = _popcount(rest)
        used |= rest[int(np.argmin(pc))]
    return True


def _hit(fam: np.ndarray, budget: int, counters: SearchCounters, chosen: list[int]) -> list[int] | None:
    counters.hitting_set_nodes += 1
    if fam.size == 0:
        return list(chosen)
    if budget == 0 or _lower_bound_exceeds(fam, budget):
        return None
    pc = _popcount(fam)
    pivot = int(fam[int(np.argmin(pc))])
    for e in members_of(pivot):
        bit = np.uint64(1 << e)
        chosen.append(e)
        found = _hit(fam[(fam & bit) == 0], budget - 1, counters, chosen)
        chosen.pop()
        if found is not None:
            return found
    return None


def min_hitting_set(family: Sequence[int] | np.ndarray, budget: int,
                    counters: SearchCounters | None = None) -> list[int] | None:
    """A smallest set of elements meeting every mask in ``family``, if one has size <= budget."""
    counters = counters if counters is not None else SearchCounters()
    fam = np.unique(np.asarray(family, dtype=np.uint64))
    if fam.size and fam[0] == 0:
        return None
    for b in range(0, budget + 1):
        found = _hit(fam, b, counters, [])
        if found is not None:
            return sorted(found)
    return None


def _lex_first_hitting_set(fam: np.ndarray, q: int, n: int, counters: SearchCounters) -> list[int] | None:
    """Lexicographically first q-subset of range(n) meeting every mask of ``fam``."""
    out: list[int] = []
    lo = 0
    while len(out) < q:
        need = q - len(out)
        for e in range(lo, n - need + 1):
            rest = fam[(fam & np.uint64(1 << e)) == 0]
            higher = _u64(~((1 << (e + 1)) - 1))
            restricted = rest & higher
            if restricted.size and (restricted == 0).any():
                continue
            if restricted.size == 0 or min_hitting_set(restricted, need - 1, counters) is not None:
                out.append(e)
                fam = restricted
                lo = e + 1
                break
        else:
            return None
    return out


def _complements(frontier: Sequence[int], n_bases: int) -> np.ndarray:
    full = (1 << n_bases) - 1
    return np.array([_u64(full & ~t) for t in frontier], dtype=np.uint64)


def optimal_bks_symmetric(instance: KSInstance, group: AutomorphismGroup | None = None, jobs: int = 1,
                          progress: ProgressFn | None = None, two_phase: bool = False,
                          checkpoint: str | Path | None = None) -> SearchReport:
    """Optimal B-KS pair searching only one ``S_A`` per isomorphism class.

    For the small side ``S_A`` of size p, every capable p-set is classified,
    the capable sets are reduced to orbit representatives, and for each
    representative the least ``|S_B|`` is a minimum hitting set of the
    complements of its frontier (``S_B`` must leave every frontier mask).
    Since automorphisms map B-KS pairs to B-KS pairs, one representative per
    orbit suffices.  The search stops once ``p * p >= omega``.

    With ``two_phase`` the first capable size is handled by scanning the
    partner size upward over all representatives before larger ``S_A`` are
    tried under the resulting bound.
    """
    t0 = time.perf_counter()
    counters = SearchCounters()
    report = SearchReport(instance.name, "symmetric-two-phase" if two_phase else "symmetric", counters=counters)
    require_ks(instance, counters)
    if group is None:
        group = automorphism_group(instance, graph_only_check=False)
    nb = instance.n_bases
    engine = CapabilityEngine(instance, prune=True, jobs=jobs, counters=counters)
    ckpt = _Checkpoint(checkpoint, instance, report.strategy) if checkpoint else None
    omega = nb * nb
    best: tuple[int, int] | None = None
    k_min = None
    p = 1
    if ckpt is not None and ckpt.exists():
        state = ckpt.load(engine, counters)
        omega, p, k_min = state["omega"], state["next_size"], state["k_min"]
        best = tuple(state["best"]) if state["best"] else None
        report.improvements = [(tuple(a), q, w) for a, q, w in state["improvements"]]
        report.capable_by_size = {int(k): v for k, v in state["capable_by_size"].items()}
        report.iso_capable_by_size = {int(k): v for k, v in state["iso_capable_by_size"].items()}
    while p <= nb and p * p < omega:
        caps = engine.classify_layer(p)
        report.capable_by_size[p] = int(caps.size)
        if caps.size:
            if k_min is None:
                k_min = p
            reps = caps[orbit_representative_masks(caps, group.basis_generators)]
            counters.orbit_representatives += int(reps.size)
            report.iso_capable_by_size[p] = int(reps.size)
            families = []
            for c in reps:
                counters.frontiers += 1
                families.append(_complements(bob_frontier(instance, int(c)), nb))
            if two_phase and p == k_min:
                q = p
                while p * q < omega and best is None:
                    for c, fam in zip(reps, families):
                        if min_hitting_set(fam, q, counters) is not None:
                            best, omega = (int(c), q), p * q
                            report.improvements.append((members_of(int(c)), q, omega))
                            break
                    q += 1
            else:
                for c, fam in zip(reps, families):
                    budget = (omega - 1) // p
                    if budget < 1:
                        break
                    hs = min_hitting_set(fam, budget, counters)
                    if hs is None:
                        continue
                    q = max(p, len(hs))
                    if p * q < omega:
                        best, omega = (int(c), q), p * q
                        report.improvements.append((members_of(int(c)), q, omega))
        if progress:
            progress({"event": "layer", "size": p, "capable": int(caps.size),
                      "representatives": report.iso_capable_by_size.get(p, 0), "omega": omega})
        p += 1
        if ckpt is not None:
            ckpt.save(engine, counters, {
                "omega": omega, "next_size": p, "k_min": k_min, "best": list(best) if best else None,
                "improvements": [[list(a), q, w] for a, q, w in report.improvements],
                "capable_by_size": {str(k): v for k, v in report.capable_by_size.items()},
                "iso_capable_by_size": {str(k): v for k, v in report.iso_capable_by_size.items()},
            })
    report.k_min = k_min
    report.k_max = p - 1
    report.solver_touched = engine.solver_touched
    report.improvements = [(a, _improvement_partner(instance, a, q, counters), w)
                           for a, q, w in report.improvements]
    if best is not None:
        c, q = best
        fam = _complements(bob_frontier(instance, c), nb)
        sb = tuple(_lex_first_hitting_set(fam, q, nb, counters))
        sa = members_of(c)
        report.optimal_pair = (sa, sb)
        report.optimal_size = (len(sa), len(sb))
        report.omega = omega
        report.verified = confirm_bks(instance, sa, sb, counters) and cardinality_lower_bound(instance, sa, sb)
        report.notes.append(f"automorphism group order {group.order}; capable sets reduced to orbit representatives")
    report.wall_time = time.perf_counter() - t0
    return report


def _improvement_partner(instance: KSInstance, s_a: tuple, q: int, counters: SearchCounters) -> tuple:
    fam = _complements(bob_frontier(instance, mask_of(s_a)), instance.n_bases)
    return tuple(_lex_first_hitting_set(fam, q, instance.n_bases, counters))


# Checkpoints ---------------------------------------------------------------------

class _Checkpoint:
    """Per-layer snapshot of a long search (capable layers, certificates, state).

    Stored under ``$BKS_CACHE_DIR`` (or the given directory) keyed by the
    instance fingerprint and strategy, so an interrupted deep run resumes at
    the next layer with identical results.
    """

    def __init__(self, directory: str | Path, instance: KSInstance, strategy: str):
        from .io import fingerprint

        self.path = Path(directory) / f"{instance.name}-{strategy}-{fingerprint(instance)[:16]}.npz"

    def exists(self) -> bool:
        return self.path.exists()

    def save(self, engine: CapabilityEngine, counters: SearchCounters, state: dict) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        arrays = {f"layer_{k}": v for k, v in engine.layers.items()}
        arrays["certificates"] = np.array([_u64(c) for c in engine.certificates], dtype=np.uint64)
        meta = {"state": state, "counters": counters.to_dict()}
        tmp = self.path.with_suffix(".tmp.npz")
        np.savez_compressed(tmp, meta=np.array(json.dumps(meta, sort_keys=True)), **arrays)
        os.replace(tmp, self.path)

    def load(self, engine: CapabilityEngine, counters: SearchCounters) -> dict:
        with np.load(self.path) as data:
            meta = json.loads(str(data["meta"]))
            for key in data.files:
                if key.startswith("layer_"):
                    engine.layers[int(key[6:])] = data[key]
            engine.certificates = [int(c) for c in data["certificates"]]
        for k, v in meta["counters"].items():
            setattr(counters, k, v)
        return meta["state"]


def call_budget_estimate(instance: KSInstance | int, k_min: int, k_max: int,
                         census: CapableCensus | None = None) -> dict:
    """Worst-case and post-filter pair counts for the layered search.

    The worst case counts pairs among all subsets with size in
    ``max(3, k_min)..k_max``; the post-filter bound counts pairs among the
    capable sets in that window (taken from ``census`` when given).
    """
    n_bases = instance if isinstance(instance, int) else instance.n_bases
    if k_max < 3:
        return {"subsets": 0, "worst_case_pairs": 0, "capable_in_window": 0 if census else None,
                "post_filter_pairs": 0 if census else None}
    lo = max(3, k_min)
    subsets = sum(math.comb(n_bases, k) for k in range(lo, k_max + 1))
    out = {
        "n_bases": n_bases,
        "k_min": k_min,
        "k_max": k_max,
        "subsets": subsets,
        "worst_case_pairs": math.comb(subsets, 2),
        "capable_in_window": None,
        "post_filter_pairs": None,
    }
    if census is not None:
        cap = sum(len(v) for k, v in census.by_size.items() if lo <= k <= k_max)
        out["capable_in_window"] = cap
        out["post_filter_pairs"] = math.comb(cap, 2)
    return out
