"""KS-set data model: vectors, orthogonality graph, basis list, validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

from .field import FieldElement, canonical_ray, inner_product

__all__ = [
    "KSInstance",
    "ValidationCheck",
    "ValidationReport",
    "build_orthogonality",
    "groundset",
    "validate",
    "derive_bases_from_cliques",
    "cardinality_lower_bound",
    "subset_from_labels",
    "mask_of",
    "members_of",
]


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def members_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class KSInstance:
    """A set of rays together with its orthogonality relation and basis list.

    ``vectors[i]`` is a tuple of :class:`FieldElement` for coordinate-backed
    instances and ``None`` for abstract vertices.  ``orthogonality`` holds
    index pairs ``(i, j)`` with ``i < j``.  ``bases`` are sorted index tuples;
    ``basis_labels`` keeps the external (1-based, table) name of each basis.
    """

    name: str
    dimension: int
    vectors: tuple
    orthogonality: frozenset
    bases: tuple
    vector_labels: tuple = ()
    basis_labels: tuple = ()
    source: str = ""

    def __post_init__(self) -> None:
        if not self.vector_labels:
            object.__setattr__(self, "vector_labels", tuple(f"v{i + 1}" for i in range(len(self.vectors))))
        if not self.basis_labels:
            object.__setattr__(self, "basis_labels", tuple(str(i + 1) for i in range(len(self.bases))))

    @property
    def n_vectors(self) -> int:
        return len(self.vectors)

    @property
    def n_bases(self) -> int:
        return len(self.bases)

    @property
    def is_coordinate_backed(self) -> bool:
        return all(v is not None for v in self.vectors)

    @cached_property
    def adjacency(self) -> tuple[frozenset, ...]:
        nbrs: list[set[int]] = [set() for _ in self.vectors]
        for i, j in self.orthogonality:
            nbrs[i].add(j)
            nbrs[j].add(i)
        return tuple(frozenset(s) for s in nbrs)

    @cached_property
    def orth_masks(self) -> tuple[int, ...]:
        """Bitmask of the vectors orthogonal to each vector."""
        return tuple(mask_of(s) for s in self.adjacency)

    @cached_property
    def basis_masks(self) -> tuple[int, ...]:
        return tuple(mask_of(b) for b in self.bases)

    @cached_property
    def bases_of_vector(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.vectors]
        for bi, b in enumerate(self.bases):
            for v in b:
                out[v].append(bi)
        return tuple(tuple(x) for x in out)

    @cached_property
    def basis_index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.basis_labels)}

    def is_orthogonal(self, i: int, j: int) -> bool:
        return j in self.adjacency[i]

    def full_mask(self) -> int:
        return (1 << self.n_bases) - 1

    def labels_of(self, subset: Iterable[int]) -> list[str]:
        return [self.basis_labels[i] for i in sorted(subset)]

    def restrict(self, keep_vectors: Sequence[int], name: str, source: str = "") -> KSInstance:
        """Sub-instance on ``keep_vectors``: bases fully inside it are kept with their labels."""
        keep = sorted(set(keep_vectors))
        pos = {v: i for i, v in enumerate(keep)}
        orth = frozenset(
            (pos[i], pos[j]) for i, j in self.orthogonality if i in pos and j in pos
        )
        bases = []
        labels = []
        for b, lab in zip(self.bases, self.basis_labels):
            if all(v in pos for v in b):
                bases.append(tuple(sorted(pos[v] for v in b)))
                labels.append(lab)
        return KSInstance(
            name=name,
            dimension=self.dimension,
            vectors=tuple(self.vectors[v] for v in keep),
            orthogonality=orth,
            bases=tuple(bases),
            vector_labels=tuple(self.vector_labels[v] for v in keep),
            basis_labels=tuple(labels),
            source=source or self.source,
        )


def _orthogonal_pairs(vectors: Sequence[Sequence[FieldElement]]) -> frozenset:
    return frozenset(
        (i, j)
        for i, j in combinations(range(len(vectors)), 2)
        if inner_product(vectors[i], vectors[j]).is_zero()
    )


def build_orthogonality(instance: KSInstance) -> KSInstance:
    """Return ``instance`` with its relation recomputed from exact inner products."""
    if not instance.is_coordinate_backed:
        raise ValueError(f"{instance.name}: orthogonality can only be built from coordinates")
    return KSInstance(
        name=instance.name,
        dimension=instance.dimension,
        vectors=instance.vectors,
        orthogonality=_orthogonal_pairs(instance.vectors),
        bases=instance.bases,
        vector_labels=instance.vector_labels,
        basis_labels=instance.basis_labels,
        source=instance.source,
    )


def groundset(instance: KSInstance, subset: Iterable[int]) -> frozenset:
    """Vectors appearing in at least one basis of ``subset``."""
    out: set[int] = set()
    for bi in subset:
        out.update(instance.bases[bi])
    return frozenset(out)


def groundset_mask(instance: KSInstance, subset_mask: int) -> int:
    m = 0
    masks = instance.basis_masks
    i = 0
    while subset_mask:
        if subset_mask & 1:
            m |= masks[i]
        subset_mask >>= 1
        i += 1
    return m


def subset_from_labels(instance: KSInstance, labels: Iterable[str | int]) -> frozenset:
    """Translate external basis labels to internal 0-based basis indices."""
    out = set()
    for lab in labels:
        key = str(lab).strip()
        if key not in instance.basis_index:
            raise KeyError(f"{instance.name} has no basis labelled {key!r}")
        out.add(instance.basis_index[key])
    return frozenset(out)


def derive_bases_from_cliques(instance: KSInstance) -> list[tuple[int, ...]]:
    """All d-cliques of the orthogonality graph, in lexicographic order."""
    d = instance.dimension
    adj = instance.adjacency
    n = instance.n_vectors
    out: list[tuple[int, ...]] = []

    def extend(clique: list[int], cands: list[int]) -> None:
        if len(clique) == d:
            out.append(tuple(clique))
            return
        for k, v in enumerate(cands):
            if len(clique) + len(cands) - k < d:
                return
            clique.append(v)
            extend(clique, [w for w in cands[k + 1:] if w in adj[v]])
            clique.pop()

    extend([], list(range(n)))
    return out


def cardinality_lower_bound(instance: KSInstance, s_a: Iterable[int], s_b: Iterable[int]) -> bool:
    """Whether ``|S_A| + |S_B| >= |groundset(S_A u S_B)| / d`` holds."""
    s_a = frozenset(s_a)
    s_b = frozenset(s_b)
    ground = groundset(instance, s_a | s_b)
    return (len(s_a) + len(s_b)) * instance.dimension >= len(ground)


@dataclass
class ValidationCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    instance: str
    checks: list[ValidationCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(ValidationCheck(name, bool(passed), detail))

    def failures(self) -> list[ValidationCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks
            ],
        }


def validate(instance: KSInstance, expected: dict | None = None) -> ValidationReport:
    """Check structural invariants; never raises on malformed content.

    ``expected`` may carry ``vector_count``, ``basis_count`` and
    ``basis_multiplicity`` (a sorted list of per-vector basis counts).
    """
    rep = ValidationReport(instance.name)
    n = instance.n_vectors
    d = instance.dimension

    rep.add("dimension >= 3", d >= 3, f"d={d}")

    bad_pairs = [(i, j) for i, j in instance.orthogonality if not (0 <= i < j < n)]
    rep.add("orthogonality indices in range, i<j", not bad_pairs, f"bad={bad_pairs[:5]}" if bad_pairs else "")

    if instance.is_coordinate_backed:
        wrong_dim = [i for i, v in enumerate(instance.vectors) if len(v) != d]
        rep.add("coordinate length = d", not wrong_dim, f"vectors={wrong_dim[:5]}" if wrong_dim else "")
        zero = [i for i, v in enumerate(instance.vectors) if all(x.is_zero() for x in v)]
        rep.add("vectors nonzero", not zero, f"vectors={zero[:5]}" if zero else "")
        if not wrong_dim and not zero:
            rays: dict = {}
            dup = []
            for i, v in enumerate(instance.vectors):
                key = canonical_ray(v)
                if key in rays:
                    dup.append((rays[key], i))
                rays[key] = i
            rep.add("no repeated rays", not dup, f"pairs={dup[:5]}" if dup else "")
            exact = _orthogonal_pairs(instance.vectors)
            missing = sorted(exact - instance.orthogonality)
            extra = sorted(instance.orthogonality - exact)
            rep.add(
                "orthogonality matches exact inner products",
                not missing and not extra,
                (f"missing={missing[:5]} extra={extra[:5]}" if missing or extra else f"{len(exact)} pairs"),
            )

    malformed = []
    not_clique = []
    for bi, b in enumerate(instance.bases):
        lab = instance.basis_labels[bi] if bi < len(instance.basis_labels) else str(bi + 1)
        if len(set(b)) != d or any(not (0 <= v < n) for v in b):
            malformed.append(lab)
            continue
        for i, j in combinations(sorted(b), 2):
            if not instance.is_orthogonal(i, j):
                not_clique.append((lab, instance.vector_labels[i], instance.vector_labels[j]))
    rep.add("every basis has d distinct vectors", not malformed, f"bases={malformed[:5]}" if malformed else "")
    rep.add(
        "every basis is mutually orthogonal",
        not not_clique,
        "non-orthogonal (basis, u, v): " + ", ".join(map(str, not_clique[:5])) if not_clique else "",
    )
    seen: dict = {}
    dup_bases = []
    for bi, b in enumerate(instance.bases):
        key = frozenset(b)
        if key in seen:
            dup_bases.append((seen[key], bi))
        seen[key] = bi
    rep.add("no duplicate bases", not dup_bases, f"pairs={dup_bases[:5]}" if dup_bases else "")
    rep.add(
        "one label per basis, labels unique",
        len(instance.basis_labels) == len(instance.bases)
        and len(set(instance.basis_labels)) == len(instance.basis_labels),
    )

    if expected:
        if "vector_count" in expected:
            rep.add("vector count", n == expected["vector_count"], f"{n} (expected {expected['vector_count']})")
        if "basis_count" in expected:
            nb = instance.n_bases
            rep.add("basis count", nb == expected["basis_count"], f"{nb} (expected {expected['basis_count']})")
        if "dimension" in expected:
            rep.add("dimension", d == expected["dimension"], f"{d} (expected {expected['dimension']})")
        if "basis_multiplicity" in expected:
            mult = sorted({len(x) for x in instance.bases_of_vector})
            want = sorted(expected["basis_multiplicity"])
            rep.add("per-vector basis multiplicity", mult == want, f"{mult} (expected {want})")
    return rep
