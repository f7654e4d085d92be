"""JSON documents: KS-set files and run reports.

KS-set document (``format_version`` 1)::

    {
      "format_version": 1,
      "name": "P-24",
      "dimension": 4,
      "vector_labels": ["v1", ...],
      "coordinates": [["1", "1", "0", "0"], ...],   # or omitted for abstract sets
      "orthogonality": [[0, 5], ...],                # required for abstract sets
      "bases": [[0, 13, 7, 20], ...],                # 0-based vector indices
      "basis_labels": ["1", ...],                    # external names, 1-based by default
      "metadata": {...}
    }

Coordinates are field-element strings (see :func:`bkskit.field.parse_element`).
When both coordinates and an edge list are present the edge list must agree
with the exact inner products, otherwise validation fails.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

from .field import format_element, parse_element
from .ks import KSInstance, build_orthogonality, validate, ValidationReport

FORMAT_VERSION = 1

__all__ = [
    "FORMAT_VERSION",
    "DocumentError",
    "instance_from_document",
    "instance_to_document",
    "load_instance",
    "dump_json",
    "fingerprint",
]


class DocumentError(ValueError):
    """Raised when a document cannot be turned into an instance at all."""


def instance_from_document(doc: dict[str, Any], source: str = "") -> tuple[KSInstance, ValidationReport]:
    """Parse a KS-set document.

    Structural problems that still allow building an instance (non-orthogonal
    bases, edge lists contradicting coordinates, ...) are reported in the
    returned :class:`ValidationReport`; unparseable documents raise
    :class:`DocumentError`.
    """
    try:
        version = doc.get("format_version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise DocumentError(f"unsupported format_version {version!r}")
        name = str(doc["name"])
        dim = int(doc["dimension"])
        coords = doc.get("coordinates")
        labels = doc.get("vector_labels")
        if coords is not None:
            vectors = tuple(tuple(parse_element(x) for x in row) for row in coords)
        else:
            if labels is None:
                raise DocumentError("abstract sets need vector_labels")
            vectors = (None,) * len(labels)
        n = len(vectors)
        if labels is None:
            labels = [f"v{i + 1}" for i in range(n)]
        if len(labels) != n:
            raise DocumentError("vector_labels and coordinates differ in length")
        bases = tuple(tuple(sorted(int(v) for v in b)) for b in doc["bases"])
        basis_labels = tuple(str(x) for x in doc.get("basis_labels") or [str(i + 1) for i in range(len(bases))])
        edges = doc.get("orthogonality")
        if edges is None and coords is None:
            raise DocumentError("abstract sets need an orthogonality edge list")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError(f"malformed KS-set document: {exc}") from exc

    src = source or str(doc.get("metadata", {}).get("source", ""))
    declared = None
    if edges is not None:
        declared = frozenset(tuple(sorted((int(a), int(b)))) for a, b in edges)
    inst = KSInstance(
        name=name,
        dimension=dim,
        vectors=vectors,
        orthogonality=declared if declared is not None else frozenset(),
        bases=bases,
        vector_labels=tuple(labels),
        basis_labels=basis_labels,
        source=src,
    )
    shape_ok = all(len(v) == dim for v in vectors if v is not None)
    if coords is not None and shape_ok:
        exact = build_orthogonality(inst)
        if declared is None:
            inst = exact
    report = validate(inst, doc.get("metadata", {}).get("expected"))
    return inst, report


def instance_to_document(instance: KSInstance, metadata: dict | None = None, include_edges: bool = False) -> dict:
    doc: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "name": instance.name,
        "dimension": instance.dimension,
        "vector_labels": list(instance.vector_labels),
    }
    if instance.is_coordinate_backed:
        doc["coordinates"] = [[format_element(x) for x in v] for v in instance.vectors]
    if include_edges or not instance.is_coordinate_backed:
        doc["orthogonality"] = [list(p) for p in sorted(instance.orthogonality)]
    doc["bases"] = [list(b) for b in instance.bases]
    doc["basis_labels"] = list(instance.basis_labels)
    doc["metadata"] = dict(metadata or {})
    return doc


def load_instance(path: str | Path) -> tuple[KSInstance, ValidationReport, dict]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: not valid JSON ({exc})") from exc
    inst, rep = instance_from_document(doc, source=str(path))
    return inst, rep, doc


def dump_json(obj: Any) -> str:
    """Stable serialization used for payloads and fingerprints."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=1)


def fingerprint(instance: KSInstance) -> str:
    """Content hash over dimension, vectors, orthogonality and bases (not names)."""
    body = {
        "dimension": instance.dimension,
        "vectors": [None if v is None else [format_element(x) for x in v] for v in instance.vectors],
        "orthogonality": sorted(list(p) for p in instance.orthogonality),
        "bases": [list(b) for b in instance.bases],
        "basis_labels": list(instance.basis_labels),
    }
    raw = json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(raw).hexdigest()
