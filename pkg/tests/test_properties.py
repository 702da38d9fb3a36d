"""Property tests over randomized structures: random parent arrays for
trees, random monotone height profiles for staircases, and random pair
data for the profile fold."""

import itertools

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from medembed.cube import (
    CubeSpec,
    cube_embedder,
    gen_cube,
    index_delta_check,
    normal_cube_path,
    square_closure_classes,
    validate_median,
)
from medembed.metrics import _entries_from_pairs
from medembed.sparse import vec_distance
from medembed.tree import RootedTree, gen_tree, meeting_point, tree_embedder
from medembed.tree import TreeSpec
from medembed.weights import WeightFunction, diff_sq_sum

UNIT = WeightFunction.unit()
PAPER = WeightFunction.paper(18)


# parent[i] < i makes any integer list a valid rooted tree
random_trees = st.lists(
    st.integers(min_value=0, max_value=10**6), min_size=1, max_size=40
).map(lambda raw: RootedTree([0] + [raw[i] % (i + 1) for i in range(len(raw))]))

staircase_heights = st.lists(
    st.integers(min_value=1, max_value=7), min_size=1, max_size=5
).map(lambda hs: tuple(sorted(hs, reverse=True)))


@given(random_trees)
@settings(max_examples=60, deadline=None)
def test_random_tree_unit_identity(tree):
    dist = tree.distances_from(range(tree.vertex_count)).astype(np.int64)
    embed = tree_embedder(tree, UNIT)
    vecs = [embed(v) for v in range(tree.vertex_count)]
    for u, v in itertools.combinations(range(tree.vertex_count), 2):
        emb_sq = vec_distance(vecs[u], vecs[v]) ** 2
        assert abs(emb_sq - dist[u][v]) <= 1e-9 * dist[u][v]


@given(random_trees)
@settings(max_examples=60, deadline=None)
def test_random_tree_meet_distance_identity(tree):
    dist = tree.distances_from(range(tree.vertex_count)).astype(np.int64)
    for u in range(tree.vertex_count):
        for v in range(tree.vertex_count):
            s = meeting_point(tree, u, v)
            assert dist[u][v] == tree.depth[u] + tree.depth[v] - 2 * tree.depth[s]
            assert dist[u][v] == dist[u][s] + dist[s][v]


@given(random_trees)
@settings(max_examples=40, deadline=None)
def test_random_tree_edge_dilatation(tree):
    bound_sq = PAPER.value(18) ** 2 + diff_sq_sum(PAPER, 10**4)
    embed = tree_embedder(tree, PAPER)
    for v in range(tree.vertex_count):
        if v == tree.root:
            continue
        d = vec_distance(embed(v), embed(int(tree.parent[v])))
        assert d * d <= bound_sq + 1e-9


@given(staircase_heights)
@settings(max_examples=30, deadline=None)
def test_random_staircase_is_median_with_key_property(heights):
    g = gen_cube(CubeSpec.staircase_heights(heights))
    assert validate_median(g).valid
    dist = g.distances_from(range(g.vertex_count)).astype(np.int64)
    g.hyperplanes()
    # distance equals separating count
    for u in range(g.vertex_count):
        vs = np.arange(u + 1, g.vertex_count)
        if len(vs) == 0:
            continue
        seps = g.separating_counts(np.full(len(vs), u), vs)
        assert np.array_equal(seps, dist[u][vs])
    # cube paths partition the separators and stay within dimension
    for v in range(g.vertex_count):
        path = normal_cube_path(g, v)
        assert sum(len(s.crossed) for s in path.steps) == int(g.dist_root[v])
        assert all(len(s.crossed) <= g.dimension for s in path.steps)
    for eid in range(g.edge_count):
        assert index_delta_check(g, int(g.eu[eid]), int(g.ev[eid])) <= 1


@given(staircase_heights)
@settings(max_examples=20, deadline=None)
def test_random_staircase_class_oracle(heights):
    g = gen_cube(CubeSpec.staircase_heights(heights))
    primary = g.hyp_of_edge
    oracle = square_closure_classes(g)
    remap = {}
    for a, b in zip(primary, oracle):
        assert remap.setdefault(int(a), int(b)) == int(b)
    assert len(set(remap.values())) == len(remap)


@given(staircase_heights)
@settings(max_examples=20, deadline=None)
def test_random_staircase_unit_embedding(heights):
    g = gen_cube(CubeSpec.staircase_heights(heights))
    dist = g.distances_from(range(g.vertex_count)).astype(np.int64)
    embed = cube_embedder(g, UNIT)
    vecs = [embed(v) for v in range(g.vertex_count)]
    for u, v in itertools.combinations(range(g.vertex_count), 2):
        emb_sq = vec_distance(vecs[u], vecs[v]) ** 2
        assert abs(emb_sq - dist[u][v]) <= 1e-9 * dist[u][v]


pair_data = st.lists(
    st.tuples(st.integers(min_value=1, max_value=30),
              st.floats(min_value=0, max_value=100)),
    min_size=1, max_size=120,
)


@given(pair_data)
@settings(max_examples=150)
def test_profile_fold_matches_bruteforce(pairs):
    ts = np.asarray([t for t, _ in pairs], dtype=np.int64)
    emb = np.asarray([e for _, e in pairs])
    entries = _entries_from_pairs(ts, emb)
    realized = sorted(set(int(t) for t in ts))
    assert [e.t for e in entries] == realized
    for entry in entries:
        suffix = emb[ts >= entry.t]
        prefix = emb[ts <= entry.t]
        assert entry.rho_hat == suffix.min()
        assert entry.delta_hat == prefix.max()
        assert entry.pair_count == int((ts == entry.t).sum())
    rho = [e.rho_hat for e in entries]
    delta = [e.delta_hat for e in entries]
    assert rho == sorted(rho)
    assert delta == sorted(delta)
    assert all(r <= d for r, d in zip(rho, delta))


@given(st.integers(min_value=16, max_value=80),
       st.integers(min_value=1, max_value=200))
@settings(max_examples=80, deadline=None)
def test_weight_nonnegative_and_truncated(m, t):
    w = WeightFunction.paper(m) if m >= 18 else PAPER
    val = w.value(t)
    assert val >= 0.0
    if t < w.cutoff:
        assert val == 0.0


@given(st.integers(min_value=2, max_value=12),
       st.integers(min_value=0, max_value=10**6))
@settings(max_examples=60, deadline=None)
def test_binary_sample_prefix_sharing(depth, seed):
    t = gen_tree(TreeSpec.binary_sample(depth, 4, seed=seed))
    # a trie over 4 rays shares at least the root and never exceeds the
    # declared ceiling; every leaf sits at the full depth
    assert t.vertex_count <= 4 * depth + 1
    leaves = [v for v in range(t.vertex_count) if not t.children[v]]
    assert all(int(t.depth[v]) == depth for v in leaves)
    assert 1 <= len(leaves) <= 4
