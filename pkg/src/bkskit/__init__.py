"""Bipartite Kochen-Specker sets: exact search, census and nonlocal games."""

from __future__ import annotations

__version__ = "0.1.0"

from .ks import KSInstance, validate
from .feasibility import encode_bks, encode_bks_capable, encode_ks, solve
from .search import enumerate_capable, essential_filter, optimal_bks, optimal_bks_symmetric
from .symmetry import automorphism_group, canonical_form, orbit_count
from .games import build_game, classical_value, verify_quantum_perfect
from . import catalog

__all__ = [
    "__version__",
    "KSInstance",
    "validate",
    "encode_ks",
    "encode_bks",
    "encode_bks_capable",
    "solve",
    "enumerate_capable",
    "essential_filter",
    "optimal_bks",
    "optimal_bks_symmetric",
    "automorphism_group",
    "canonical_form",
    "orbit_count",
    "build_game",
    "classical_value",
    "verify_quantum_perfect",
    "catalog",
]
