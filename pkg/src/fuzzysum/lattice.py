"""Fuzzy formal context, one-sided fuzzy concepts and the leveled summary hierarchy.

Concepts pair a crisp intent (set of cluster descriptors) with a fuzzy
extent: the degree of record ``t`` is the minimum of its incidences over
the intent. The empty intent has every record at degree 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .clustering import AttributePartition

MAX_CLOSURES = 2 ** 20
BRUTE_FORCE_LIMIT = 12


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class FuzzyContext:
    objects: tuple[str, ...]
    attributes: tuple[str, ...]
    incidence: np.ndarray
    groups: tuple[str, ...] = ()
    dropped_objects: tuple[str, ...] = ()
    dropped_attributes: tuple[str, ...] = ()

    def __post_init__(self):
        inc = np.asarray(self.incidence, dtype=float).reshape(len(self.objects), len(self.attributes))
        if inc.size and (np.any(inc < 0) or np.any(inc > 1)):
            raise LatticeError("incidence degrees must lie in [0, 1]")
        if len(set(self.attributes)) != len(self.attributes):
            raise LatticeError("duplicate descriptor names in context")
        object.__setattr__(self, "incidence", inc)
        if not self.groups:
            object.__setattr__(self, "groups", tuple("" for _ in self.attributes))

    @classmethod
    def from_mapping(cls, rows: Mapping[str, Mapping[str, float]], attributes: Sequence[str]):
        """Build a context from ``{object: {descriptor: degree}}`` (missing = 0)."""
        objs = tuple(rows)
        inc = np.array([[rows[o].get(a, 0.0) for a in attributes] for o in objs], dtype=float)
        return cls(objs, tuple(attributes), inc.reshape(len(objs), len(attributes)))

    def index(self, descriptor: str) -> int:
        try:
            return self.attributes.index(descriptor)
        except ValueError:
            raise LatticeError(f"unknown descriptor {descriptor!r}") from None

    def descriptors_of(self, source_attribute: str) -> list[str]:
        return [a for a, g in zip(self.attributes, self.groups) if g == source_attribute]

    def subcontext(self, descriptors: Sequence[str], objects: Sequence[str] | None = None) -> "FuzzyContext":
        cols = [self.index(d) for d in descriptors]
        if objects is None:
            rows = list(range(len(self.objects)))
        else:
            pos = {o: i for i, o in enumerate(self.objects)}
            rows = [pos[o] for o in objects]
        inc = self.incidence[np.ix_(rows, cols)] if rows and cols else np.zeros((len(rows), len(cols)))
        return FuzzyContext(
            tuple(self.objects[i] for i in rows),
            tuple(descriptors),
            inc,
            tuple(self.groups[c] for c in cols),
        )


def build_fuzzy_context(partitions: Sequence[AttributePartition], drop_empty: bool = True) -> FuzzyContext:
    """Appose the purified memberships of all partitions.

    Only records present in every partition are kept. With ``drop_empty``,
    descriptors whose column is entirely cut away are removed since they
    describe no record.
    """
    if not partitions:
        raise LatticeError("no partitions to build a context from")
    names: list[str] = []
    groups: list[str] = []
    for p in partitions:
        for d in p.descriptors:
            if d in names:
                raise LatticeError(f"descriptor {d!r} appears in more than one attribute")
            names.append(d)
            groups.append(p.attribute)

    common = set(partitions[0].memberships.rows)
    for p in partitions[1:]:
        common &= set(p.memberships.rows)
    universe = [r for r in partitions[0].memberships.rows if r in common]
    dropped = sorted({r for p in partitions for r in p.memberships.rows} - common)
    for p in partitions:
        dropped.extend(rid for rid, _ in p.excluded_rows if rid not in dropped)

    blocks = []
    for p in partitions:
        pos = {r: i for i, r in enumerate(p.memberships.rows)}
        u = p.memberships.u
        if p.memberships.kept is not None:
            u = np.where(p.memberships.kept, u, 0.0)
        blocks.append(u[[pos[r] for r in universe]].reshape(len(universe), -1))
    inc = np.hstack(blocks) if blocks else np.zeros((len(universe), 0))
    inc = np.clip(inc, 0.0, 1.0)

    dropped_attrs: tuple[str, ...] = ()
    if drop_empty and inc.size:
        alive = inc.max(axis=0) > 0
        dropped_attrs = tuple(n for n, a in zip(names, alive) if not a)
        inc = inc[:, alive]
        names = [n for n, a in zip(names, alive) if a]
        groups = [g for g, a in zip(groups, alive) if a]
    return FuzzyContext(
        tuple(universe), tuple(names), inc, tuple(groups), tuple(dict.fromkeys(dropped)), dropped_attrs
    )


def _extent_vector(ctx: FuzzyContext, cols: Iterable[int]) -> np.ndarray:
    cols = list(cols)
    if not cols:
        return np.ones(len(ctx.objects))
    return ctx.incidence[:, cols].min(axis=1)


def _closure_cols(ctx: FuzzyContext, ext: np.ndarray) -> np.ndarray:
    return np.all(ext[:, None] <= ctx.incidence, axis=0)


def extent_of(ctx: FuzzyContext, descriptors: Iterable[str]) -> dict[str, float]:
    """Records with a positive degree of membership in the extent of ``descriptors``."""
    ext = _extent_vector(ctx, (ctx.index(d) for d in descriptors))
    return {o: float(d) for o, d in zip(ctx.objects, ext) if d > 0}


def intent_closure(ctx: FuzzyContext, descriptors: Iterable[str]) -> frozenset[str]:
    ext = _extent_vector(ctx, (ctx.index(d) for d in descriptors))
    closed = _closure_cols(ctx, ext)
    return frozenset(a for a, c in zip(ctx.attributes, closed) if c)


@dataclass(frozen=True)
class ConceptSummary:
    """``extent`` holds ``(record, degree)`` pairs with positive degree."""

    intent: frozenset[str]
    extent: tuple[tuple[str, float], ...]

    @property
    def card(self) -> float:
        return float(sum(d for _, d in self.extent))

    @property
    def count(self) -> int:
        return len(self.extent)

    def degree(self, record: str) -> float:
        for r, d in self.extent:
            if r == record:
                return d
        return 0.0

    def extent_map(self) -> dict[str, float]:
        return dict(self.extent)


def cardinality(z: ConceptSummary) -> tuple[float, int]:
    """Representativity ``card = sum of extent degrees`` and support size."""
    return z.card, z.count


def _concept(ctx: FuzzyContext, closed: np.ndarray, ext: np.ndarray) -> ConceptSummary:
    intent = frozenset(a for a, c in zip(ctx.attributes, closed) if c)
    extent = tuple((o, float(d)) for o, d in zip(ctx.objects, ext) if d > 0)
    return ConceptSummary(intent, extent)


def enumerate_concepts(ctx: FuzzyContext, max_closures: int = MAX_CLOSURES) -> list[ConceptSummary]:
    """All concepts of ``ctx`` in close-by-one order, each exactly once.

    Raises LatticeError once more than ``max_closures`` closures have been
    computed; raise alpha to thin the context.
    """
    n_attr = len(ctx.attributes)
    inc = ctx.incidence
    root_ext = np.ones(len(ctx.objects))
    root = _closure_cols(ctx, root_ext)
    out = [_concept(ctx, root, root_ext)]
    calls = 1

    def generate(intent: np.ndarray, ext: np.ndarray, start: int) -> None:
        nonlocal calls
        for j in range(start, n_attr):
            if intent[j]:
                continue
            calls += 1
            if calls > max_closures:
                raise LatticeError(
                    f"concept enumeration exceeded {max_closures} closures on "
                    f"{n_attr} descriptors; increase alpha to thin the context"
                )
            new_ext = np.minimum(ext, inc[:, j])
            closed = _closure_cols(ctx, new_ext)
            # canonicity: nothing before j may enter the intent
            if np.array_equal(closed[:j], intent[:j]):
                out.append(_concept(ctx, closed, new_ext))
                generate(closed, new_ext, j + 1)

    generate(root, root_ext, 0)
    return out


def brute_force_concepts(ctx: FuzzyContext) -> set[ConceptSummary]:
    """Reference enumeration: close every descriptor subset (pure Python)."""
    n_attr = len(ctx.attributes)
    if n_attr > BRUTE_FORCE_LIMIT:
        raise LatticeError(f"brute force limited to {BRUTE_FORCE_LIMIT} descriptors, got {n_attr}")
    rows = [[float(v) for v in row] for row in ctx.incidence]
    found = set()
    for k in range(n_attr + 1):
        for subset in itertools.combinations(range(n_attr), k):
            ext = [min((row[j] for j in subset), default=1.0) for row in rows]
            closed = [
                j for j in range(n_attr) if all(e <= row[j] for e, row in zip(ext, rows))
            ]
            ext = [min((row[j] for j in closed), default=1.0) for row in rows]
            found.add(
                ConceptSummary(
                    frozenset(ctx.attributes[j] for j in closed),
                    tuple((o, e) for o, e in zip(ctx.objects, ext) if e > 0),
                )
            )
    return found


def cover_relation(concepts: Sequence[ConceptSummary]) -> list[tuple[int, int]]:
    """Hasse edges ``(parent, child)``: child intent strictly extends parent
    intent with no concept in between."""
    order = sorted(range(len(concepts)), key=lambda i: -len(concepts[i].intent))
    edges = []
    for j, child in enumerate(concepts):
        covers: list[int] = []
        for i in order:
            cand = concepts[i].intent
            if not cand < child.intent:
                continue
            # candidates come largest first, so anything below an accepted cover is not one
            if any(cand < concepts[c].intent for c in covers):
                continue
            covers.append(i)
        edges.extend((i, j) for i in covers)
    return sorted(edges)


def assign_levels(n_concepts: int, edges: Sequence[tuple[int, int]], root: int = 0) -> list[int]:
    """Longest root-to-node path length in the Hasse diagram."""
    children: dict[int, list[int]] = {i: [] for i in range(n_concepts)}
    indeg = [0] * n_concepts
    for p, c in edges:
        children[p].append(c)
        indeg[c] += 1
    level = [0] * n_concepts
    queue = [i for i in range(n_concepts) if indeg[i] == 0]
    if queue != [root]:
        raise LatticeError(f"hierarchy must have the single root {root}, found sources {queue}")
    while queue:
        p = queue.pop()
        for c in children[p]:
            level[c] = max(level[c], level[p] + 1)
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    return level


@dataclass(frozen=True)
class SummaryHierarchy:
    objects: tuple[str, ...]
    attributes: tuple[str, ...]
    concepts: tuple[ConceptSummary, ...]
    edges: tuple[tuple[int, int], ...]
    level: tuple[int, ...]
    _children: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        kids: dict[int, list[int]] = {i: [] for i in range(len(self.concepts))}
        for p, c in self.edges:
            kids[p].append(c)
        object.__setattr__(self, "_children", kids)

    @property
    def root(self) -> int:
        return 0

    @property
    def depth(self) -> int:
        return max(self.level)

    @property
    def levels(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i, lv in enumerate(self.level):
            out.setdefault(lv, []).append(i)
        return dict(sorted(out.items()))

    @property
    def leaves(self) -> list[int]:
        return [i for i, kids in self._children.items() if not kids]

    def children(self, i: int) -> list[int]:
        """Direct successors (more specific summaries)."""
        return list(self._children[i])

    def parents(self, i: int) -> list[int]:
        """Direct predecessors (more general summaries)."""
        return [p for p, c in self.edges if c == i]

    def majors(self, i: int) -> set[int]:
        """Concepts at or below ``i`` in generality order (intent contains ``i``'s)."""
        return {k for k, z in enumerate(self.concepts) if self.concepts[i].intent <= z.intent}

    def minors(self, i: int) -> set[int]:
        return {k for k, z in enumerate(self.concepts) if z.intent <= self.concepts[i].intent}


def hierarchy_from_concepts(
    concepts: Iterable[ConceptSummary], objects: Sequence[str], attributes: Sequence[str]
) -> SummaryHierarchy:
    """Order concepts canonically (intent size, then descriptor order) and
    attach cover edges and levels."""
    pos = {a: i for i, a in enumerate(attributes)}
    ordered = sorted(
        set(concepts), key=lambda z: (len(z.intent), sorted(pos[a] for a in z.intent))
    )
    edges = cover_relation(ordered)
    levels = assign_levels(len(ordered), edges)
    return SummaryHierarchy(tuple(objects), tuple(attributes), tuple(ordered), tuple(edges), tuple(levels))


def build_hierarchy(ctx: FuzzyContext, max_closures: int = MAX_CLOSURES) -> SummaryHierarchy:
    return hierarchy_from_concepts(enumerate_concepts(ctx, max_closures), ctx.objects, ctx.attributes)


@dataclass(frozen=True)
class LevelEntry:
    concept: int
    intent: tuple[str, ...]
    card: float
    count: int
    top_records: tuple[tuple[str, float], ...]


def query_level(h: SummaryHierarchy, k: int, top: int = 3) -> list[LevelEntry]:
    """Concept summaries at abstraction level ``k`` with their most representative records."""
    levels = h.levels
    if k not in levels:
        raise LatticeError(f"level {k} out of range 0..{h.depth}")
    pos = {a: i for i, a in enumerate(h.attributes)}
    out = []
    for i in levels[k]:
        z = h.concepts[i]
        best = sorted(z.extent, key=lambda rd: -rd[1])[:top]
        out.append(LevelEntry(i, tuple(sorted(z.intent, key=pos.get)), z.card, z.count, tuple(best)))
    return out


@dataclass(frozen=True)
class NestedDiagram:
    outer_attribute: str
    inner_attribute: str
    outer: SummaryHierarchy
    inner: tuple[SummaryHierarchy, ...]


def nested_diagram(ctx: FuzzyContext, outer_attr: str, inner_attr: str) -> NestedDiagram:
    """Outer lattice of one source attribute with, inside each outer concept,
    the inner attribute's lattice restricted to that concept's extent support."""
    if outer_attr.upper() == inner_attr.upper():
        raise LatticeError("outer and inner attributes must differ")
    outer_desc = ctx.descriptors_of(outer_attr.upper())
    inner_desc = ctx.descriptors_of(inner_attr.upper())
    for name, desc in ((outer_attr, outer_desc), (inner_attr, inner_desc)):
        if not desc:
            raise LatticeError(f"unknown attribute {name!r} in context")
    outer = build_hierarchy(ctx.subcontext(outer_desc))
    inner = []
    for z in outer.concepts:
        support = [o for o, _ in z.extent]
        inner.append(build_hierarchy(ctx.subcontext(inner_desc, support)))
    return NestedDiagram(outer_attr.upper(), inner_attr.upper(), outer, tuple(inner))
