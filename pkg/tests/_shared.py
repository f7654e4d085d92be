"""Cached heavy computations shared by several test modules."""

from __future__ import annotations

import functools

from bkskit import catalog
from bkskit.search import enumerate_capable, optimal_bks, optimal_bks_symmetric
from bkskit.symmetry import automorphism_group

TIER1 = ("CEG-18", "P-24", "K-20", "ZP-28", "CK-31", "P-33", "S-29", "KP-36", "KP-40", "S-34")

# Sets whose full census is part of the acceptance gate.
CENSUS_SETS = ("CEG-18", "K-20", "ZP-28", "CK-31", "S-29", "CK-33")
ISO_SETS = ("CEG-18", "K-20", "ZP-28", "CK-31", "S-29", "KP-36", "P-33")

# criterion lines collected by the acceptance module, printed at session end
RESULTS: list[str] = []


def instance(name: str):
    return catalog.get(name).instance


@functools.lru_cache(maxsize=None)
def census(name: str):
    return enumerate_capable(instance(name))


@functools.lru_cache(maxsize=None)
def optimum(name: str):
    return optimal_bks(instance(name))


@functools.lru_cache(maxsize=None)
def optimum_symmetric(name: str, two_phase: bool = False):
    return optimal_bks_symmetric(instance(name), group=group(name), two_phase=two_phase)


@functools.lru_cache(maxsize=None)
def group(name: str):
    return automorphism_group(instance(name), graph_only_check=False)


def ceg18_listed_essential_sets() -> list[frozenset]:
    """C1..C15 of the CEG-18 data file translated to basis indices."""
    entry = catalog.get("CEG-18")
    inst = entry.instance
    label_of = {k: lab for lab, k in entry.expected["essential_ordinal_map"].items()}
    return [
        frozenset(inst.basis_index[label_of[k]] for k in ordinals)
        for ordinals in entry.expected["essential_sets_ordinal"]
    ]
