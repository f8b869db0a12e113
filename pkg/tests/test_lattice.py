import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzysum.clustering import AttributePartition, ClusterInfo, MembershipMatrix, alpha_cut
from fuzzysum.lattice import (
    ConceptSummary,
    FuzzyContext,
    LatticeError,
    assign_levels,
    brute_force_concepts,
    build_fuzzy_context,
    build_hierarchy,
    cardinality,
    cover_relation,
    enumerate_concepts,
    extent_of,
    hierarchy_from_concepts,
    intent_closure,
    nested_diagram,
    query_level,
)

from conftest import random_context


def _partition(attr, descriptors, rows, u, alpha=0.2, excluded=()):
    mm = alpha_cut(MembershipMatrix(tuple(rows), tuple(descriptors), np.array(u, float)), alpha)
    clusters = tuple(ClusterInfo(f"cluster-{k + 1}", (float(k),), d) for k, d in enumerate(descriptors))
    return AttributePartition(attr, clusters, mm, excluded_rows=tuple(excluded))


ROWS = [f"t{i}" for i in range(1, 7)]
AGE_U = [[0.7, 0.3], [0.2, 0.8], [0.9, 0.1], [0.4, 0.6], [0.5, 0.5], [0.6, 0.4]]
SAL_U = [[0.1, 0.5, 0.4], [0.3, 0.6, 0.1], [0.7, 0.2, 0.1], [0.0, 0.5, 0.5], [0.1, 0.5, 0.4], [0.5, 0.5, 0.0]]


def test_context_apposition():
    ctx = build_fuzzy_context([
        _partition("AGE", ["young", "adult"], ROWS, AGE_U),
        _partition("SALARY", ["miserable", "modest", "comfortable"], ROWS, SAL_U),
    ])
    assert ctx.incidence.shape == (6, 5)
    assert ctx.attributes == ("young", "adult", "miserable", "modest", "comfortable")
    assert ctx.groups == ("AGE", "AGE", "SALARY", "SALARY", "SALARY")
    # cut entries become zero
    assert ctx.incidence[0, 2] == 0.0 and ctx.incidence[1, 0] == 0.2


def test_single_partition_context_is_membership_matrix():
    p = _partition("AGE", ["young", "adult"], ROWS, AGE_U, alpha=0.0)
    ctx = build_fuzzy_context([p])
    assert np.array_equal(ctx.incidence, np.array(AGE_U))


def test_record_excluded_in_one_attribute_dropped():
    ctx = build_fuzzy_context([
        _partition("AGE", ["young", "adult"], ROWS[1:], AGE_U[1:], excluded=[("t1", "AGE is UNKNOWN")]),
        _partition("SALARY", ["miserable", "modest", "comfortable"], ROWS, SAL_U),
    ])
    assert ctx.objects == tuple(ROWS[1:])
    assert ctx.dropped_objects == ("t1",)


def test_descriptor_collision_rejected():
    with pytest.raises(LatticeError, match="more than one attribute"):
        build_fuzzy_context([
            _partition("A", ["low", "high"], ROWS, AGE_U),
            _partition("B", ["low", "high"], ROWS, AGE_U),
        ])


def test_empty_descriptor_dropped():
    ctx = build_fuzzy_context([_partition("AGE", ["young", "adult"], ROWS, AGE_U, alpha=0.95)])
    assert ctx.attributes == ()
    assert ctx.dropped_attributes == ("young", "adult")
    h = build_hierarchy(ctx)
    assert len(h.concepts) == 1 and h.concepts[0].count == 6


def test_extent_of(six_ctx):
    assert extent_of(six_ctx, {"modest", "young"}) == {"t1": 0.5, "t5": 0.5, "t6": 0.5}
    assert extent_of(six_ctx, set()) == {t: 1.0 for t in six_ctx.objects}
    zero = FuzzyContext(("a", "b"), ("m1", "m2"), np.array([[0.5, 0.0], [1.0, 0.0]]))
    assert extent_of(zero, {"m2"}) == {}
    with pytest.raises(LatticeError, match="unknown descriptor"):
        extent_of(six_ctx, {"rich"})


def test_closure_examples(six_ctx):
    every = set(six_ctx.attributes)
    assert intent_closure(six_ctx, every) == every
    dup = FuzzyContext(("a", "b", "c"), ("m1", "m2", "m3"),
                       np.array([[0.5, 0.5, 1.0], [0.25, 0.25, 0.0], [1.0, 1.0, 0.5]]))
    assert intent_closure(dup, {"m1"}) == {"m1", "m2"}


@st.composite
def context_and_sets(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    ctx = random_context(np.random.default_rng(seed))
    names = list(ctx.attributes)
    b1 = draw(st.sets(st.sampled_from(names)))
    b2 = b1 | draw(st.sets(st.sampled_from(names)))
    return ctx, frozenset(b1), frozenset(b2)


@settings(max_examples=100, deadline=None)
@given(context_and_sets())
def test_closure_laws(case):
    ctx, b1, b2 = case
    c1, c2 = intent_closure(ctx, b1), intent_closure(ctx, b2)
    assert b1 <= c1
    assert c1 <= c2
    assert intent_closure(ctx, c1) == c1
    e1, e2 = extent_of(ctx, b1), extent_of(ctx, b2)
    assert all(d <= e1.get(t, 0.0) for t, d in e2.items())
    assert extent_of(ctx, c1) == e1


def test_enumerate_matches_brute_force_random():
    rng = np.random.default_rng(2024)
    for _ in range(60):
        ctx = random_context(rng)
        found = enumerate_concepts(ctx)
        assert len(found) == len(set(found))
        assert set(found) == brute_force_concepts(ctx)


def test_enumerate_six_record_fixture(six_ctx):
    concepts = enumerate_concepts(six_ctx)
    assert set(concepts) == brute_force_concepts(six_ctx)
    assert len(concepts) == 16
    sizes = sorted(len(z.intent) for z in concepts)
    assert [sizes.count(k) for k in range(6)] == [1, 4, 4, 4, 2, 1]
    assert concepts[0].intent == frozenset()


def test_identity_incidence_matches_oracle():
    for n in range(1, 6):
        ctx = FuzzyContext(tuple(f"t{i}" for i in range(n)), tuple(f"m{i}" for i in range(n)), np.eye(n))
        expected = brute_force_concepts(ctx)
        assert set(enumerate_concepts(ctx)) == expected
        # root, n singletons, and the empty-extent top when n > 1
        assert len(expected) == (n + 2 if n > 1 else 1)


def test_degenerate_contexts():
    empty = FuzzyContext(("a", "b"), (), np.zeros((2, 0)))
    (only,) = enumerate_concepts(empty)
    assert only.intent == frozenset() and only.count == 2
    one = FuzzyContext(("a", "b"), ("m",), np.array([[0.5], [1.0]]))
    assert len(brute_force_concepts(one)) <= 2
    zeros = FuzzyContext(("a", "b"), ("m1", "m2"), np.zeros((2, 2)))
    got = brute_force_concepts(zeros)
    assert got == set(enumerate_concepts(zeros))
    assert {(z.intent, z.extent) for z in got} == {
        (frozenset(), (("a", 1.0), ("b", 1.0))), (frozenset({"m1", "m2"}), ())
    }


def test_brute_force_size_guard():
    big = FuzzyContext(("a",), tuple(f"m{i}" for i in range(13)), np.ones((1, 13)))
    with pytest.raises(LatticeError):
        brute_force_concepts(big)


def test_enumeration_guard():
    rng = np.random.default_rng(0)
    ctx = FuzzyContext(tuple(f"t{i}" for i in range(10)), tuple(f"m{i}" for i in range(10)),
                       rng.random((10, 10)))
    with pytest.raises(LatticeError, match="alpha"):
        enumerate_concepts(ctx, max_closures=5)


def _graph(h):
    g = nx.DiGraph()
    g.add_nodes_from(range(len(h.concepts)))
    g.add_edges_from(h.edges)
    return g


def _order_graph(concepts):
    g = nx.DiGraph()
    g.add_nodes_from(range(len(concepts)))
    g.add_edges_from((i, j) for i, a in enumerate(concepts) for j, b in enumerate(concepts)
                     if a.intent < b.intent)
    return g


def test_cover_relation_is_transitive_reduction():
    rng = np.random.default_rng(99)
    for _ in range(30):
        ctx = random_context(rng)
        h = build_hierarchy(ctx)
        reduced = nx.transitive_reduction(_order_graph(h.concepts))
        assert set(h.edges) == set(reduced.edges)


def test_cover_chain():
    chain = [ConceptSummary(frozenset(s), ()) for s in ([], ["a"], ["a", "b"])]
    assert cover_relation(chain) == [(0, 1), (1, 2)]


def test_levels_are_longest_paths():
    rng = np.random.default_rng(5)
    for _ in range(30):
        h = build_hierarchy(random_context(rng))
        g = _graph(h)
        for node in g.nodes:
            paths = [len(p) - 1 for p in nx.all_simple_paths(g, 0, node)] if node else [0]
            assert h.level[node] == max(paths)


def test_assign_levels_requires_single_root():
    with pytest.raises(LatticeError):
        assign_levels(3, [(0, 2), (1, 2)])


def test_six_record_hierarchy(six_ctx):
    h = build_hierarchy(six_ctx)
    root = h.concepts[h.root]
    assert h.level[h.root] == 0
    assert root.extent_map() == {t: 1.0 for t in six_ctx.objects}
    assert [len(v) for v in h.levels.values()] == [1, 4, 4, 4, 2, 1]
    for i, z in enumerate(h.concepts):
        assert h.level[i] == len(z.intent)
    for p, c in h.edges:
        zp, zc = h.concepts[p], h.concepts[c]
        assert zp.intent < zc.intent
        assert all(d <= zp.degree(t) for t, d in zc.extent)
        assert zc.card <= zp.card
    (mod_young,) = [i for i, z in enumerate(h.concepts) if z.intent == {"modest", "young"}]
    assert h.level[mod_young] == 2
    assert h.leaves == [len(h.concepts) - 1]
    assert h.concepts[-1].intent == frozenset(six_ctx.attributes)


def test_majors_and_minors(six_ctx):
    h = build_hierarchy(six_ctx)
    assert h.majors(h.root) == set(range(len(h.concepts)))
    leaf = h.leaves[0]
    assert h.minors(leaf) == set(range(len(h.concepts)))
    for i in range(len(h.concepts)):
        assert set(h.children(i)) <= h.majors(i)
        assert set(h.parents(i)) <= h.minors(i)


def test_cardinality():
    z = ConceptSummary(frozenset({"modest", "young"}), (("t1", 0.5), ("t5", 0.5), ("t6", 0.5)))
    assert cardinality(z) == (1.5, 3)
    assert cardinality(ConceptSummary(frozenset({"x"}), ())) == (0.0, 0)
    full = ConceptSummary(frozenset(), tuple((f"t{i}", 1.0) for i in range(4)))
    assert cardinality(full) == (4.0, 4)


def test_query_level(six_ctx):
    h = build_hierarchy(six_ctx)
    (root,) = query_level(h, 0)
    assert root.intent == () and root.count == 6
    assert {e.concept for e in query_level(h, h.depth)} == set(h.leaves)
    seen = [e.concept for k in range(h.depth + 1) for e in query_level(h, k)]
    assert sorted(seen) == list(range(len(h.concepts)))
    two = query_level(h, 2)
    mod_young = next(e for e in two if set(e.intent) == {"modest", "young"})
    assert mod_young.card == 1.5 and mod_young.count == 3
    with pytest.raises(LatticeError, match="out of range"):
        query_level(h, h.depth + 1)


def test_hierarchy_order_is_canonical(six_ctx):
    concepts = enumerate_concepts(six_ctx)
    a = hierarchy_from_concepts(concepts, six_ctx.objects, six_ctx.attributes)
    b = hierarchy_from_concepts(list(reversed(concepts)), six_ctx.objects, six_ctx.attributes)
    assert a == b


def test_nested_diagram(six_ctx):
    nd = nested_diagram(six_ctx, "AGE", "SALARY")
    assert len(nd.inner) == len(nd.outer.concepts)
    full_inner = build_hierarchy(six_ctx.subcontext(six_ctx.descriptors_of("SALARY")))
    assert nd.inner[nd.outer.root] == full_inner
    for z, inner in zip(nd.outer.concepts, nd.inner):
        assert set(inner.objects) == {t for t, _ in z.extent}
    with pytest.raises(LatticeError, match="must differ"):
        nested_diagram(six_ctx, "AGE", "age")
    with pytest.raises(LatticeError, match="unknown attribute"):
        nested_diagram(six_ctx, "AGE", "HEIGHT")


def test_brute_force_definition_on_small_context(six_ctx):
    # every subset closes to some enumerated intent
    intents = {z.intent for z in enumerate_concepts(six_ctx)}
    for r in range(len(six_ctx.attributes) + 1):
        for b in itertools.combinations(six_ctx.attributes, r):
            assert intent_closure(six_ctx, b) in intents
