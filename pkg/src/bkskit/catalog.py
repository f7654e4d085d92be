"""Built-in KS sets shipped as JSON data files, with expected results.

Every file is listed in ``data/MANIFEST.json`` with its SHA-256 checksum, so
an accidental edit to a transcription is caught before any computation runs.
Each entry is validated on load: structural checks, exact orthogonality for
coordinate-backed sets, and the basis list against the d-cliques of the
orthogonality graph.
"""

from __future__ import annotations

import difflib
import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .field import canonical_ray
from .io import instance_from_document
from .ks import KSInstance, ValidationReport, derive_bases_from_cliques

__all__ = [
    "NAMES",
    "ALIASES",
    "CRITICAL",
    "SUBSET_RELATIONS",
    "CatalogEntry",
    "UnknownSetError",
    "get",
    "list_entries",
    "resolve_name",
    "embedding",
    "data_checksums",
]

NAMES = (
    "CEG-18", "P-24", "K-20", "Pen-40", "ZP-28", "CK-31", "CK-33", "CK-37",
    "P-33", "MP-57", "KP-36", "KP-40", "S-29", "S-31", "S-34", "S-35",
)

ALIASES = {"S-7": "S-34", "Schutte-33": "CK-33"}

CRITICAL = ("CEG-18", "K-20", "ZP-28", "CK-31", "CK-33", "P-33", "KP-36", "S-29", "S-34")

# (smaller, larger): the smaller set embeds into the larger one
SUBSET_RELATIONS = (
    ("CEG-18", "P-24"),
    ("K-20", "P-24"),
    ("ZP-28", "Pen-40"),
    ("CK-31", "CK-37"),
    ("CK-33", "CK-37"),
    ("P-33", "MP-57"),
    ("KP-36", "KP-40"),
    ("S-29", "S-31"),
    ("S-34", "S-35"),
)


class UnknownSetError(KeyError):
    def __init__(self, name: str):
        close = difflib.get_close_matches(name, list(NAMES) + list(ALIASES), n=3, cutoff=0.4)
        hint = f" (did you mean {', '.join(close)}?)" if close else ""
        super().__init__(f"unknown KS set {name!r}{hint}; available: {', '.join(NAMES)}")
        self.name = name
        self.suggestions = close

    def __str__(self) -> str:
        return self.args[0]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    instance: KSInstance
    expected: dict
    validation: ValidationReport
    aliases: tuple = ()
    derivation: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def tier(self) -> str:
        return str(self.expected.get("tier", 1))

    @property
    def critical(self) -> bool:
        return bool(self.expected.get("critical", False))

    @property
    def optimal_size_status(self) -> str:
        return self.expected.get("optimal_size", {}).get("status", "unknown")

    @property
    def expected_optimal_size(self) -> tuple | None:
        """The pinned size, or ``None`` when sources disagree (see ``optimal_size`` candidates)."""
        val = self.expected.get("optimal_size", {}).get("value")
        return tuple(val) if val else None

    def summary(self) -> dict:
        inst = self.instance
        out = {
            "name": self.name,
            "aliases": list(self.aliases),
            "dimension": inst.dimension,
            "vectors": inst.n_vectors,
            "bases": inst.n_bases,
            "coordinates": inst.is_coordinate_backed,
            "valid": self.validation.passed,
            "critical": self.critical,
            "tier": self.tier,
            "optimal_size": self.expected.get("optimal_size"),
        }
        for key in ("capable_total", "essential_total"):
            if key in self.expected:
                out[key] = self.expected[key]
        return out


def _data_text(filename: str) -> str:
    return resources.files("bkskit").joinpath("data").joinpath(filename).read_text(encoding="utf-8")


@lru_cache(maxsize=1)
def data_checksums() -> dict:
    return json.loads(_data_text("MANIFEST.json"))["sha256"]


def resolve_name(name: str) -> str:
    key = name.strip()
    if key in ALIASES:
        return ALIASES[key]
    for n in NAMES:
        if n.lower() == key.lower():
            return n
    for a, n in ALIASES.items():
        if a.lower() == key.lower():
            return n
    raise UnknownSetError(name)


@lru_cache(maxsize=None)
def get(name: str) -> CatalogEntry:
    """Load, checksum and validate one catalog set by name or alias."""
    canonical = resolve_name(name)
    filename = f"{canonical}.json"
    text = _data_text(filename)
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    doc = json.loads(text)
    inst, report = instance_from_document(doc, source=f"catalog:{filename}")
    want = data_checksums().get(filename)
    report.add("transcription checksum", digest == want, digest[:16])
    cliques = {frozenset(c) for c in derive_bases_from_cliques(inst)}
    bases = {frozenset(b) for b in inst.bases}
    report.add(
        "bases are exactly the d-cliques",
        cliques == bases,
        f"{len(cliques)} cliques, {len(bases)} bases",
    )
    meta = doc.get("metadata", {})
    return CatalogEntry(
        name=canonical,
        instance=inst,
        expected=meta.get("expected", {}),
        validation=report,
        aliases=tuple(meta.get("aliases", ())),
        derivation=meta.get("derivation", {}),
        metadata=meta,
    )


def list_entries() -> list[CatalogEntry]:
    return [get(n) for n in NAMES]


def embedding(small: KSInstance, big: KSInstance) -> tuple[list[int], list[int]]:
    """Vector and basis maps of ``small`` into ``big``.

    Coordinate-backed sets are matched by exact ray, abstract ones by vector
    label.  Raises ``ValueError`` unless the vector map is injective,
    preserves orthogonality in both directions and sends every basis of
    ``small`` to a basis of ``big``.
    """
    if small.is_coordinate_backed and big.is_coordinate_backed:
        index = {canonical_ray(v): i for i, v in enumerate(big.vectors)}
        keys = [canonical_ray(v) for v in small.vectors]
    else:
        index = {lab: i for i, lab in enumerate(big.vector_labels)}
        keys = list(small.vector_labels)
    vmap = []
    for k, lab in zip(keys, small.vector_labels):
        if k not in index:
            raise ValueError(f"{small.name} vector {lab} has no counterpart in {big.name}")
        vmap.append(index[k])
    if len(set(vmap)) != len(vmap):
        raise ValueError("vector map is not injective")
    for i in range(small.n_vectors):
        for j in range(i + 1, small.n_vectors):
            if small.is_orthogonal(i, j) != big.is_orthogonal(vmap[i], vmap[j]):
                raise ValueError(f"orthogonality of ({small.vector_labels[i]}, {small.vector_labels[j]}) not preserved")
    bindex = {frozenset(b): i for i, b in enumerate(big.bases)}
    bmap = []
    for b, lab in zip(small.bases, small.basis_labels):
        img = frozenset(vmap[v] for v in b)
        if img not in bindex:
            raise ValueError(f"basis {lab} of {small.name} is not a basis of {big.name}")
        bmap.append(bindex[img])
    return vmap, bmap
