"""Median graphs (1-skeleta of cube complexes) and their weighted embedding.

A finite median graph is stored as an undirected simple graph with a base
vertex.  Hyperplanes are the distance-condition edge classes: edges (a,b)
and (c,d) fall together exactly when d(a,c)+d(b,d) != d(a,d)+d(b,c).
Removing a class splits the graph into a near side (containing the base
vertex) and a far side; for vertices, graph distance equals the number of
classes separating them.

The cube path from a vertex V to the base vertex repeatedly crosses, in
one diagonal step, the full set of hyperplanes that are adjacent at the
current vertex and separate it from the base.  The step index at which a
hyperplane is crossed drives the embedding: coordinate w(index) on that
hyperplane's basis vector.

Graphs and hyperplanes are immutable once computed; per-vertex path steps
are cached in a plain dict (single writer per key), and embeddings of
different vertices may be computed concurrently.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import (
    BudgetExceededError,
    CubeSpanError,
    NonTerminationError,
    SideComputationError,
)
from .sparse import SparseVector, allocate_keys
from .tree import DEFAULT_VERTEX_BUDGET, RootedTree, TreeSpec, gen_tree
from .weights import WeightFunction


@dataclass(frozen=True)
class CubeSpec:
    """Generator recipe for a desk-scale median graph."""

    kind: str
    dims: tuple[int, ...] = ()
    heights: tuple[int, ...] = ()
    tree: Optional[TreeSpec] = None
    left: Optional[TreeSpec] = None
    right: Optional[TreeSpec] = None

    @classmethod
    def grid(cls, *dims: int) -> "CubeSpec":
        return cls(kind="grid", dims=tuple(int(d) for d in dims))

    @classmethod
    def staircase(cls, columns: int) -> "CubeSpec":
        """Canonical staircase with column heights columns, columns-1, .., 1."""
        return cls(kind="staircase", heights=tuple(range(int(columns), 0, -1)))

    @classmethod
    def staircase_heights(cls, heights: Sequence[int]) -> "CubeSpec":
        return cls(kind="staircase", heights=tuple(int(h) for h in heights))

    @classmethod
    def from_tree(cls, tree: TreeSpec) -> "CubeSpec":
        return cls(kind="from_tree", tree=tree)

    @classmethod
    def tree_product(cls, left: TreeSpec, right: TreeSpec) -> "CubeSpec":
        return cls(kind="tree_product", left=left, right=right)

    def max_vertex_count(self) -> int:
        if self.kind == "grid":
            out = 1
            for d in self.dims:
                out *= d + 1
            return out
        if self.kind == "staircase":
            h = self.heights
            return h[0] + 1 + sum(h) + len(h)
        if self.kind == "from_tree":
            return self.tree.max_vertex_count()
        if self.kind == "tree_product":
            return self.left.max_vertex_count() * self.right.max_vertex_count()
        raise ValueError(f"unknown cube kind {self.kind!r}")

    def label(self) -> str:
        if self.kind == "grid":
            return "grid:" + "x".join(str(d) for d in self.dims)
        if self.kind == "staircase":
            return "staircase:" + ",".join(str(h) for h in self.heights)
        if self.kind == "from_tree":
            return f"from-tree({self.tree.label()})"
        return f"tree-product({self.left.label()},{self.right.label()})"


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """One edge class: its basis key, member edges, and the side bitmap."""

    key: int
    edge_ids: frozenset[int]
    near_side: np.ndarray  # bool per vertex, True on the base-vertex side


@dataclass(frozen=True)
class CubeStep:
    entry: int
    crossed: frozenset[int]  # hyperplane basis keys
    exit: int


@dataclass(frozen=True)
class NormalCubePath:
    """Cube path from ``start`` to the base vertex; length is the step
    count and index_map sends each crossed hyperplane key to its step."""

    start: int
    steps: tuple[CubeStep, ...]
    index_map: dict[int, int] = field(repr=False)

    @property
    def length(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class MedianVerdict:
    valid: bool
    triples_checked: int
    violation: Optional[tuple[int, int, int]] = None
    median_count: Optional[int] = None


class MedianGraph:
    """Undirected simple connected graph with a base vertex ``root``."""

    def __init__(self, n: int, edges, root: int = 0, label: str = ""):
        self.n = int(n)
        self.root = int(root)
        self.label = label
        if not 0 <= self.root < self.n:
            raise ValueError("root out of range")
        eu = []
        ev = []
        seen = set()
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u},{v}) out of range")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            eid = len(eu)
            eu.append(u)
            ev.append(v)
            adj[u].append((v, eid))
            adj[v].append((u, eid))
        self.eu = np.asarray(eu, dtype=np.int64)
        self.ev = np.asarray(ev, dtype=np.int64)
        self.adj = adj
        self._csr = None
        self._dist_root: Optional[np.ndarray] = None
        self._hyperplanes: Optional[list[Hyperplane]] = None
        self._hyp_of_edge: Optional[np.ndarray] = None
        self._near: Optional[np.ndarray] = None
        self._hyp_key_base: Optional[int] = None
        self._dimension: Optional[int] = None
        self._steps: dict[int, tuple[tuple[int, ...], int]] = {}
        if self.n > 1:
            row = self._bfs_row(self.root)
            if not np.isfinite(row).all():
                raise ValueError("graph is not connected")
            self._dist_root = row.astype(np.int64)
        else:
            self._dist_root = np.zeros(1, dtype=np.int64)

    # -- basic structure ---------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return self.n

    @property
    def edge_count(self) -> int:
        return len(self.eu)

    def neighbors(self, v: int):
        return self.adj[v]

    def _graph(self):
        if self._csr is None:
            m = self.edge_count
            data = np.ones(m, dtype=np.int8)
            self._csr = sp.csr_matrix(
                (np.concatenate([data, data]),
                 (np.concatenate([self.eu, self.ev]),
                  np.concatenate([self.ev, self.eu]))),
                shape=(self.n, self.n),
            )
        return self._csr

    def _bfs_row(self, v: int) -> np.ndarray:
        return csgraph.dijkstra(self._graph(), unweighted=True, indices=v)

    def distances_from(self, sources) -> np.ndarray:
        d = csgraph.dijkstra(self._graph(), unweighted=True, indices=sources)
        return np.atleast_2d(d)

    @property
    def dist_root(self) -> np.ndarray:
        return self._dist_root

    def distance(self, u: int, v: int) -> int:
        return int(self._bfs_row(u)[v])

    # -- hyperplanes -------------------------------------------------------

    def hyperplanes(self) -> list[Hyperplane]:
        """Edge classes with side bitmaps; computed once and cached.

        Classes come from the distance condition against a representative
        edge (two BFS runs per class).  Sides are found by removing the
        class and flood-filling from the base vertex; anything other than
        exactly two components, or a class edge not straddling them,
        raises SideComputationError.
        """
        if self._hyperplanes is not None:
            return self._hyperplanes
        m = self.edge_count
        eu, ev = self.eu, self.ev
        assigned = np.full(m, -1, dtype=np.int64)
        classes: list[np.ndarray] = []
        for e0 in range(m):
            if assigned[e0] >= 0:
                continue
            rows = self.distances_from([int(eu[e0]), int(ev[e0])])
            da, db = rows[0], rows[1]
            in_class = (da[eu] + db[ev]) != (da[ev] + db[eu])
            members = np.flatnonzero(in_class)
            if (assigned[members] >= 0).any():
                raise SideComputationError(
                    "edge classes overlap; graph is not a partial cube")
            assigned[members] = len(classes)
            classes.append(members)
        near = np.zeros((len(classes), self.n), dtype=bool)
        for cid, members in enumerate(classes):
            keep = np.ones(m, dtype=bool)
            keep[members] = False
            ku, kv = eu[keep], ev[keep]
            data = np.ones(len(ku), dtype=np.int8)
            rest = sp.csr_matrix(
                (np.concatenate([data, data]),
                 (np.concatenate([ku, kv]), np.concatenate([kv, ku]))),
                shape=(self.n, self.n),
            )
            ncc, lab = csgraph.connected_components(rest, directed=False)
            if ncc != 2:
                raise SideComputationError(
                    f"removing edge class {cid} leaves {ncc} components")
            side = lab == lab[self.root]
            if not (side[eu[members]] ^ side[ev[members]]).all():
                raise SideComputationError(
                    f"class {cid} has an edge inside one side")
            near[cid] = side
        base = allocate_keys(len(classes))
        self._hyperplanes = [
            Hyperplane(
                key=base + cid,
                edge_ids=frozenset(int(e) for e in members),
                near_side=near[cid],
            )
            for cid, members in enumerate(classes)
        ]
        self._hyp_of_edge = assigned
        self._near = near
        self._hyp_key_base = base
        return self._hyperplanes

    @property
    def hyp_of_edge(self) -> np.ndarray:
        self.hyperplanes()
        return self._hyp_of_edge

    @property
    def near_matrix(self) -> np.ndarray:
        """Bool matrix, one row per hyperplane, True on the root side."""
        self.hyperplanes()
        return self._near

    @property
    def hyperplane_key_base(self) -> int:
        self.hyperplanes()
        return self._hyp_key_base

    def separating_counts(self, us, vs) -> np.ndarray:
        """Number of hyperplanes separating each u-v pair (vectorized)."""
        near = self.near_matrix
        return (near[:, us] != near[:, vs]).sum(axis=0)

    @property
    def dimension(self) -> int:
        """Largest cube dimension, computed as the maximum number of
        root-decreasing edges at any vertex."""
        if self._dimension is None:
            dist = self.dist_root
            du, dv = dist[self.eu], dist[self.ev]
            if (du == dv).any():
                raise SideComputationError(
                    "graph has an edge between equal levels; not bipartite")
            deeper = np.where(du > dv, self.eu, self.ev)
            counts = np.bincount(deeper, minlength=self.n)
            self._dimension = int(counts.max()) if self.edge_count else 0
        return self._dimension

    # -- cube path machinery -------------------------------------------------

    def _neighbor_across(self, v: int, hyp: int) -> Optional[int]:
        hoe = self.hyp_of_edge
        found = None
        for nbr, eid in self.adj[v]:
            if hoe[eid] == hyp:
                if found is not None:
                    raise CubeSpanError(
                        f"two edges at vertex {v} cross the same hyperplane")
                found = nbr
        return found

    def _cross_cube(self, x: int, legs: list[tuple[int, int]]) -> int:
        """Verify that the legs (hyperplane id, neighbor) span a cube at x
        and return the diagonally opposite corner."""
        if len(legs) == 1:
            return legs[0][1]
        hyps = [h for h, _ in legs]
        if len(set(hyps)) != len(hyps):
            raise CubeSpanError(f"parallel downward edges at vertex {x}")
        corner: dict[frozenset, int] = {frozenset(): x}
        for h, nbr in legs:
            corner[frozenset([h])] = nbr
        for size in range(2, len(hyps) + 1):
            for combo in itertools.combinations(hyps, size):
                fs = frozenset(combo)
                target = None
                for h in combo:
                    base = corner[fs - {h}]
                    nb = self._neighbor_across(base, h)
                    if nb is None:
                        raise CubeSpanError(
                            f"downward edges at vertex {x} do not span a cube")
                    if target is None:
                        target = nb
                    elif target != nb:
                        raise CubeSpanError(
                            f"cube at vertex {x} does not close up")
                corner[fs] = target
        return corner[frozenset(hyps)]

    def _step(self, x: int) -> tuple[tuple[int, ...], int]:
        """Crossed hyperplane ids and exit corner of the cube-path step
        leaving x toward the root. Cached per vertex."""
        cached = self._steps.get(x)
        if cached is not None:
            return cached
        dist = self.dist_root
        hoe = self.hyp_of_edge
        legs = [
            (int(hoe[eid]), nbr)
            for nbr, eid in self.adj[x]
            if dist[nbr] < dist[x]
        ]
        if not legs:
            raise NonTerminationError(f"no downward edge at vertex {x}")
        exit_vertex = self._cross_cube(x, legs)
        result = (tuple(sorted(h for h, _ in legs)), exit_vertex)
        self._steps[x] = result
        return result


# -- generators --------------------------------------------------------------


def median_from_tree(tree: RootedTree) -> MedianGraph:
    """The tree itself as a one-dimensional median graph (ids preserved)."""
    edges = [
        (v, int(tree.parent[v]))
        for v in range(tree.vertex_count)
        if v != tree.root
    ]
    return MedianGraph(tree.vertex_count, edges, root=tree.root,
                       label=f"from-tree({tree.label})" if tree.label else "from-tree")


def tree_product_graph(t1: RootedTree, t2: RootedTree, label: str = "") -> MedianGraph:
    """Cartesian product of two trees; vertex (i1, i2) gets id i1*n2 + i2."""
    n1, n2 = t1.vertex_count, t2.vertex_count
    edges = []
    for v in range(n1):
        if v == t1.root:
            continue
        p = int(t1.parent[v])
        for i2 in range(n2):
            edges.append((v * n2 + i2, p * n2 + i2))
    for u in range(n2):
        if u == t2.root:
            continue
        q = int(t2.parent[u])
        for i1 in range(n1):
            edges.append((i1 * n2 + u, i1 * n2 + q))
    return MedianGraph(n1 * n2, edges, root=t1.root * n2 + t2.root, label=label)


def gen_cube(spec: CubeSpec, max_vertices: int = DEFAULT_VERTEX_BUDGET) -> MedianGraph:
    """Build the median graph described by ``spec``."""
    declared = spec.max_vertex_count()
    if declared > max_vertices:
        raise BudgetExceededError(
            f"{spec.label()} declares up to {declared} vertices, "
            f"budget is {max_vertices}")
    if spec.kind == "grid":
        dims = spec.dims
        if not dims or any(d < 1 for d in dims):
            raise ValueError("grid needs positive side lengths")
        sizes = [d + 1 for d in dims]
        strides = np.cumprod([1] + sizes[::-1][:-1])[::-1]

        def vid(coords):
            return int(np.dot(coords, strides))

        edges = []
        for coords in itertools.product(*(range(s) for s in sizes)):
            base = vid(coords)
            for axis, s in enumerate(sizes):
                if coords[axis] + 1 < s:
                    step = list(coords)
                    step[axis] += 1
                    edges.append((base, vid(step)))
        return MedianGraph(int(np.prod(sizes)), edges, root=0, label=spec.label())
    if spec.kind == "staircase":
        h = spec.heights
        if not h or any(x < 1 for x in h):
            raise ValueError("staircase heights must be positive")
        if any(h[i] < h[i + 1] for i in range(len(h) - 1)):
            raise ValueError("staircase heights must be non-increasing")
        m = len(h)

        def top(x):
            return h[0] if x == 0 else h[x - 1]

        ids: dict[tuple[int, int], int] = {}
        for x in range(m + 1):
            for y in range(top(x) + 1):
                ids[(x, y)] = len(ids)
        edges = []
        for (x, y), i in ids.items():
            if (x + 1, y) in ids:
                edges.append((i, ids[(x + 1, y)]))
            if (x, y + 1) in ids:
                edges.append((i, ids[(x, y + 1)]))
        return MedianGraph(len(ids), edges, root=ids[(0, 0)], label=spec.label())
    if spec.kind == "from_tree":
        return median_from_tree(gen_tree(spec.tree, max_vertices))
    if spec.kind == "tree_product":
        t1 = gen_tree(spec.left, max_vertices)
        t2 = gen_tree(spec.right, max_vertices)
        return tree_product_graph(t1, t2, label=spec.label())
    raise ValueError(f"unknown cube kind {spec.kind!r}")


# -- validation ----------------------------------------------------------------


def validate_median(
    g: MedianGraph, triple_budget: int = 200_000, seed: int = 0
) -> MedianVerdict:
    """Check unique-median existence over vertex triples.

    Exhaustive when the triple count fits the budget, otherwise a seeded
    sample drawn from a vertex pool sized so the pool's triples cover the
    budget. The median of (u, v, w) is the intersection of the three
    pairwise metric intervals; any count other than one is a violation.
    """
    n = g.vertex_count
    if n < 3:
        return MedianVerdict(valid=True, triples_checked=0)
    total = n * (n - 1) * (n - 2) // 6
    if total <= triple_budget:
        pool = np.arange(n)
        triple_iter = itertools.combinations(range(n), 3)
    else:
        rng = np.random.default_rng(seed)
        p = min(n, max(8, int(round((6.0 * triple_budget) ** (1.0 / 3.0))) + 2))
        pool = np.sort(rng.choice(n, size=p, replace=False))
        draws = rng.integers(0, p, size=(int(triple_budget * 1.3), 3))
        distinct = (
            (draws[:, 0] != draws[:, 1])
            & (draws[:, 1] != draws[:, 2])
            & (draws[:, 0] != draws[:, 2])
        )
        triple_iter = map(tuple, draws[distinct][:triple_budget])
    rows = g.distances_from(pool).astype(np.int64)
    checked = 0
    for i, j, k in triple_iter:
        du, dv, dw = rows[i], rows[j], rows[k]
        duv = du[pool[j]]
        dvw = dv[pool[k]]
        duw = du[pool[k]]
        medians = np.count_nonzero(
            (du + dv == duv) & (dv + dw == dvw) & (du + dw == duw)
        )
        checked += 1
        if medians != 1:
            return MedianVerdict(
                valid=False,
                triples_checked=checked,
                violation=(int(pool[i]), int(pool[j]), int(pool[k])),
                median_count=int(medians),
            )
    return MedianVerdict(valid=True, triples_checked=checked)


# -- spec operations -----------------------------------------------------------


def hyperplanes(g: MedianGraph) -> list[Hyperplane]:
    return g.hyperplanes()


def separates(h: Hyperplane, u: int, v: int) -> bool:
    """True when u and v lie on opposite sides of h."""
    return bool(h.near_side[u] != h.near_side[v])


def normal_cube_path(g: MedianGraph, v: int) -> NormalCubePath:
    """Greedy maximal cube path from v to the base vertex.

    Each step crosses every hyperplane that is adjacent at the current
    vertex and separates it from the base; the crossed set must span a
    cube (verified constructively) and the walk exits at its opposite
    corner.
    """
    if not 0 <= v < g.vertex_count:
        raise ValueError(f"unknown vertex {v}")
    g.hyperplanes()
    base = g.hyperplane_key_base
    limit = int(g.dist_root[v])
    steps = []
    index_map: dict[int, int] = {}
    x = v
    i = 0
    while x != g.root:
        i += 1
        if i > limit:
            raise NonTerminationError(
                f"cube path from {v} exceeded {limit} steps")
        hyps, exit_vertex = g._step(x)
        keys = frozenset(base + h for h in hyps)
        for key in keys:
            index_map[key] = i
        steps.append(CubeStep(entry=x, crossed=keys, exit=exit_vertex))
        x = exit_vertex
    return NormalCubePath(start=v, steps=tuple(steps), index_map=index_map)


def path_index_map(g: MedianGraph, v: int) -> dict[int, int]:
    """Hyperplane key -> step index along the cube path from v; keys not
    separating v from the base vertex are absent (index zero)."""
    g.hyperplanes()
    base = g.hyperplane_key_base
    limit = int(g.dist_root[v])
    out: dict[int, int] = {}
    x = v
    i = 0
    while x != g.root:
        i += 1
        if i > limit:
            raise NonTerminationError(
                f"cube path from {v} exceeded {limit} steps")
        hyps, x = g._step(x)
        for h in hyps:
            out[base + h] = i
    return out


def cube_embedder(g: MedianGraph, w: WeightFunction) -> Callable[[int], SparseVector]:
    """Embedding function vertex -> SparseVector with a cached weight table."""
    g.hyperplanes()
    base = g.hyperplane_key_base
    max_len = int(g.dist_root.max()) if g.vertex_count > 1 else 0
    table = np.zeros(max_len + 2)
    if max_len >= 1:
        table[1:] = w.values(np.arange(1, max_len + 2, dtype=np.float64))
    root = g.root
    dist = g.dist_root

    def embed(v: int) -> SparseVector:
        if not 0 <= v < g.vertex_count:
            raise ValueError(f"unknown vertex {v}")
        limit = int(dist[v])
        coords: dict[int, float] = {}
        x = v
        i = 0
        while x != root:
            i += 1
            if i > limit:
                raise NonTerminationError(
                    f"cube path from {v} exceeded {limit} steps")
            hyps, x = g._step(x)
            val = float(table[i])
            if val != 0.0:
                for h in hyps:
                    coords[base + h] = val
        vec = SparseVector.__new__(SparseVector)
        vec.coords = coords
        return vec

    return embed


def cube_embed(g: MedianGraph, w: WeightFunction, v: int) -> SparseVector:
    """Embed one vertex: weight w(i) on each hyperplane crossed at step i."""
    return cube_embedder(g, w)(v)


def index_delta_check(g: MedianGraph, u: int, v: int) -> int:
    """Largest index difference, over hyperplanes separating both endpoints
    of the edge (u, v) from the base vertex, between the two cube paths.
    Zero when no hyperplane separates both."""
    if v not in [nbr for nbr, _ in g.adj[u]]:
        raise ValueError(f"({u},{v}) is not an edge")
    nu = path_index_map(g, u)
    nv = path_index_map(g, v)
    best = 0
    for key, iu in nu.items():
        iv = nv.get(key)
        if iv is not None:
            best = max(best, abs(iu - iv))
    return best


# -- independent oracle for tests ----------------------------------------------


def square_closure_classes(g: MedianGraph) -> np.ndarray:
    """Edge classes as the transitive closure of square opposition.

    Independent of the distance-condition route; quadratic in local
    degree, intended for desk-scale cross-checks.
    """
    m = g.edge_count
    parent = list(range(m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    nbr_edge = [dict(g.adj[v]) for v in range(g.vertex_count)]
    dist = g.dist_root
    for v in range(g.vertex_count):
        up = [(nbr, eid) for nbr, eid in g.adj[v] if dist[nbr] > dist[v]]
        for (a, ea), (b, eb) in itertools.combinations(up, 2):
            for w_vertex, ew in g.adj[a]:
                if w_vertex == v or dist[w_vertex] != dist[v] + 2:
                    continue
                eb2 = nbr_edge[b].get(w_vertex)
                if eb2 is not None:
                    union(ea, eb2)
                    union(eb, ew)
    labels = np.asarray([find(e) for e in range(m)])
    _, canonical = np.unique(labels, return_inverse=True)
    return canonical


def dimension_by_cliques(g: MedianGraph) -> int:
    """Largest set of edges at one vertex that pairwise close squares.

    Exponential in local degree; cross-check oracle for ``dimension``.
    """
    best = 0
    adj_sets = [set(nbr for nbr, _ in g.adj[v]) for v in range(g.vertex_count)]
    for v in range(g.vertex_count):
        nbrs = [nbr for nbr, _ in g.adj[v]]
        k = len(nbrs)
        square = [[False] * k for _ in range(k)]
        for i in range(k):
            for j in range(i + 1, k):
                common = (adj_sets[nbrs[i]] & adj_sets[nbrs[j]]) - {v}
                square[i][j] = square[j][i] = bool(common)
        for mask in range(1, 1 << k):
            members = [i for i in range(k) if mask >> i & 1]
            if len(members) <= best:
                continue
            if all(square[a][b] for a, b in itertools.combinations(members, 2)):
                best = len(members)
    return best
