"""Rooted locally finite trees with unit edges and their weighted embedding.

A tree is stored as a parent array over vertex ids 0..n-1; the edge from a
non-root vertex v to parent(v) carries the basis key ``key_base + v``.  The
embedding of a vertex V places weight w(i) on the i-th edge of the path
from V back to the root, counted from V.

Trees are immutable after generation and all operations here are pure, so
vertex pairs may be evaluated concurrently without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import BudgetExceededError
from .sparse import SparseVector, allocate_keys
from .weights import WeightFunction

DEFAULT_VERTEX_BUDGET = 5_000_000


@dataclass(frozen=True)
class TreeSpec:
    """Generator recipe for a desk-scale tree."""

    kind: str
    length: int = 0       # path
    legs: int = 0         # spider
    leg_len: int = 0      # spider
    depth: int = 0        # binary_sample
    rays: int = 0         # binary_sample
    seed: Optional[int] = None
    spine: int = 0        # caterpillar
    hair: int = 0         # caterpillar

    @classmethod
    def path(cls, length: int) -> "TreeSpec":
        return cls(kind="path", length=length)

    @classmethod
    def spider(cls, legs: int, leg_len: int) -> "TreeSpec":
        return cls(kind="spider", legs=legs, leg_len=leg_len)

    @classmethod
    def binary_sample(cls, depth: int, rays: int, seed: int) -> "TreeSpec":
        return cls(kind="binary_sample", depth=depth, rays=rays, seed=seed)

    @classmethod
    def caterpillar(cls, spine: int, hair: int) -> "TreeSpec":
        return cls(kind="caterpillar", spine=spine, hair=hair)

    def max_vertex_count(self) -> int:
        """Exact vertex count for deterministic kinds, an upper bound for
        binary_sample (rays may share prefixes)."""
        if self.kind == "path":
            return self.length + 1
        if self.kind == "spider":
            return self.legs * self.leg_len + 1
        if self.kind == "binary_sample":
            return self.depth * self.rays + 1
        if self.kind == "caterpillar":
            return (self.spine + 1) * (self.hair + 1)
        raise ValueError(f"unknown tree kind {self.kind!r}")

    def label(self) -> str:
        if self.kind == "path":
            return f"path:{self.length}"
        if self.kind == "spider":
            return f"spider:{self.legs},{self.leg_len}"
        if self.kind == "binary_sample":
            return f"binary-sample:{self.depth},{self.rays},seed{self.seed}"
        return f"caterpillar:{self.spine},{self.hair}"


class RootedTree:
    """Locally finite rooted tree over vertices 0..n-1, unit edge lengths."""

    def __init__(self, parent, root: int = 0, label: str = ""):
        self.parent = np.asarray(parent, dtype=np.int64)
        self.root = int(root)
        self.label = label
        n = len(self.parent)
        if not 0 <= self.root < n:
            raise ValueError("root out of range")
        if self.parent[self.root] != self.root:
            raise ValueError("root must be its own parent")
        if ((self.parent < 0) | (self.parent >= n)).any():
            raise ValueError("parent ids out of range")
        self.children: list[list[int]] = [[] for _ in range(n)]
        for v in range(n):
            p = int(self.parent[v])
            if v != self.root:
                if p == v:
                    raise ValueError(f"vertex {v} is its own parent but not root")
                self.children[p].append(v)
        # BFS from the root: computes depths and proves connectivity
        # (a parent array with a cycle leaves its vertices unreached).
        depth = np.full(n, -1, dtype=np.int64)
        depth[self.root] = 0
        frontier = [self.root]
        seen = 1
        while frontier:
            nxt = []
            for u in frontier:
                for c in self.children[u]:
                    depth[c] = depth[u] + 1
                    nxt.append(c)
                    seen += 1
            frontier = nxt
        if seen != n:
            raise ValueError("parent array is not a connected tree")
        self.depth = depth
        self.key_base = allocate_keys(n)
        self._csr = None

    @property
    def vertex_count(self) -> int:
        return len(self.parent)

    @property
    def edge_count(self) -> int:
        return self.vertex_count - 1

    def edge_key(self, v: int) -> int:
        """Basis key of the edge (v, parent(v))."""
        if v == self.root:
            raise ValueError("the root has no parent edge")
        return self.key_base + v

    def _graph(self):
        if self._csr is None:
            n = self.vertex_count
            vs = np.arange(n)
            mask = vs != self.root
            u = vs[mask]
            p = self.parent[mask]
            data = np.ones(len(u), dtype=np.int8)
            self._csr = sp.csr_matrix(
                (np.concatenate([data, data]),
                 (np.concatenate([u, p]), np.concatenate([p, u]))),
                shape=(n, n),
            )
        return self._csr

    def distances_from(self, sources) -> np.ndarray:
        """Graph distances from the given vertices to every vertex."""
        d = csgraph.dijkstra(self._graph(), unweighted=True, indices=sources)
        return np.atleast_2d(d)

    def distance(self, u: int, v: int) -> int:
        s = meeting_point(self, u, v)
        return int(self.depth[u] + self.depth[v] - 2 * self.depth[s])


def gen_tree(spec: TreeSpec, max_vertices: int = DEFAULT_VERTEX_BUDGET) -> RootedTree:
    """Build the tree described by ``spec``; deterministic given its seed."""
    declared = spec.max_vertex_count()
    if declared > max_vertices:
        raise BudgetExceededError(
            f"{spec.label()} declares up to {declared} vertices, "
            f"budget is {max_vertices}")
    if spec.kind == "path":
        if spec.length < 1:
            raise ValueError("path length must be positive")
        parent = np.arange(-1, spec.length)
        parent[0] = 0
    elif spec.kind == "spider":
        if spec.legs < 1 or spec.leg_len < 1:
            raise ValueError("spider parameters must be positive")
        parent = np.zeros(declared, dtype=np.int64)
        for leg in range(spec.legs):
            base = 1 + leg * spec.leg_len
            parent[base] = 0
            for j in range(1, spec.leg_len):
                parent[base + j] = base + j - 1
    elif spec.kind == "caterpillar":
        if spec.spine < 1 or spec.hair < 0:
            raise ValueError("caterpillar parameters must be positive")
        parents = [0]
        for i in range(1, spec.spine + 1):
            parents.append(i - 1)
        for s in range(spec.spine + 1):
            parents.extend([s] * spec.hair)
        parent = np.asarray(parents)
    elif spec.kind == "binary_sample":
        if spec.depth < 1 or spec.rays < 1:
            raise ValueError("binary_sample parameters must be positive")
        if spec.rays > 2 ** min(spec.depth, 62):
            raise ValueError("more rays than root-to-leaf paths")
        if spec.seed is None:
            raise ValueError("binary_sample requires a seed")
        rng = np.random.default_rng(spec.seed)
        bits = rng.integers(0, 2, size=(spec.rays, spec.depth))
        parents = [0]
        node_child: dict[tuple[int, int], int] = {}
        for ray in bits:
            at = 0
            for b in ray:
                step = (at, int(b))
                nxt = node_child.get(step)
                if nxt is None:
                    nxt = len(parents)
                    parents.append(at)
                    node_child[step] = nxt
                at = nxt
        parent = np.asarray(parents)
    else:
        raise ValueError(f"unknown tree kind {spec.kind!r}")
    return RootedTree(parent, root=0, label=spec.label())


def geodesic_edges(tree: RootedTree, v: int) -> list[int]:
    """Basis keys of the edges of the path from v to the root, in order
    starting at v. The list length equals depth(v)."""
    if not 0 <= v < tree.vertex_count:
        raise ValueError(f"unknown vertex {v}")
    keys = []
    while v != tree.root:
        keys.append(tree.edge_key(v))
        v = int(tree.parent[v])
    return keys


def meeting_point(tree: RootedTree, u: int, v: int) -> int:
    """Deepest common ancestor of u and v (simultaneous upward walk)."""
    n = tree.vertex_count
    if not (0 <= u < n and 0 <= v < n):
        raise ValueError("unknown vertex id")
    du, dv = int(tree.depth[u]), int(tree.depth[v])
    while du > dv:
        u = int(tree.parent[u]); du -= 1
    while dv > du:
        v = int(tree.parent[v]); dv -= 1
    while u != v:
        u = int(tree.parent[u])
        v = int(tree.parent[v])
    return u


def tree_embedder(
    tree: RootedTree, w: WeightFunction, unit_epsilon: float = 0.0
) -> Callable[[int], SparseVector]:
    """Embedding function vertex -> SparseVector with a cached weight table.

    With ``unit_epsilon`` > 0 every path coordinate is shifted by that
    amount, which makes the map injective at the price of perturbing each
    pair distance by at most unit_epsilon * sqrt(d(U, V)).
    """
    max_depth = int(tree.depth.max())
    table = np.zeros(max_depth + 1)
    if max_depth >= 1:
        table[1:] = w.values(np.arange(1, max_depth + 1, dtype=np.float64))
    if unit_epsilon:
        table[1:] += unit_epsilon
    parent = tree.parent
    root = tree.root
    base = tree.key_base

    def embed(v: int) -> SparseVector:
        if not 0 <= v < tree.vertex_count:
            raise ValueError(f"unknown vertex {v}")
        coords = {}
        i = 1
        while v != root:
            val = float(table[i])
            if val != 0.0:
                coords[base + v] = val
            v = int(parent[v])
            i += 1
        vec = SparseVector.__new__(SparseVector)
        vec.coords = coords
        return vec

    return embed


def tree_embed(
    tree: RootedTree, w: WeightFunction, v: int, unit_epsilon: float = 0.0
) -> SparseVector:
    """Embed one vertex: weight w(i) on the i-th edge of its root path."""
    return tree_embedder(tree, w, unit_epsilon)(v)
