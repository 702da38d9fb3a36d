"""On-disk space format: one self-describing JSON document per space.

Layout::

    {"type": "tree" | "median_graph",
     "n": <vertex count>,
     "root": <vertex id>,
     "parent": [...]            # trees: parent array, root maps to itself
     "edges": [[u, v], ...]     # median graphs: undirected edge list
     "generator": {...}}        # optional provenance (spec label + seed)

Files written here are canonical (compact separators, fixed key order,
trailing newline), so saving a loaded file reproduces it byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .cube import MedianGraph
from .errors import SpaceFormatError
from .tree import RootedTree


@dataclass(frozen=True)
class SpaceFile:
    type: str
    n: int
    root: int
    parent: Optional[tuple[int, ...]] = None
    edges: Optional[tuple[tuple[int, int], ...]] = None
    generator: Optional[dict] = None


def to_spacefile(space: Union[RootedTree, MedianGraph],
                 generator: Optional[dict] = None) -> SpaceFile:
    if isinstance(space, RootedTree):
        return SpaceFile(
            type="tree",
            n=space.vertex_count,
            root=space.root,
            parent=tuple(int(p) for p in space.parent),
            generator=generator,
        )
    if isinstance(space, MedianGraph):
        return SpaceFile(
            type="median_graph",
            n=space.vertex_count,
            root=space.root,
            edges=tuple((int(u), int(v)) for u, v in zip(space.eu, space.ev)),
            generator=generator,
        )
    raise TypeError(f"cannot serialize {type(space).__name__}")


def dumps_spacefile(sf: SpaceFile) -> str:
    doc: dict = {"type": sf.type, "n": sf.n, "root": sf.root}
    if sf.type == "tree":
        if sf.parent is not None:
            doc["parent"] = list(sf.parent)
        elif sf.edges is not None:
            doc["edges"] = [list(e) for e in sf.edges]
        else:
            raise SpaceFormatError("tree file needs parent or edges")
    elif sf.type == "median_graph":
        if sf.edges is None:
            raise SpaceFormatError("median_graph file needs edges")
        doc["edges"] = [list(e) for e in sf.edges]
    else:
        raise SpaceFormatError(f"unknown space type {sf.type!r}")
    if sf.generator is not None:
        doc["generator"] = sf.generator
    return json.dumps(doc, separators=(",", ":")) + "\n"


def save_spacefile(sf: SpaceFile, path) -> None:
    Path(path).write_text(dumps_spacefile(sf))


def load_spacefile(path) -> SpaceFile:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpaceFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise SpaceFormatError(f"{path}: top level must be an object")
    for key in ("type", "n", "root"):
        if key not in doc:
            raise SpaceFormatError(f"{path}: missing field {key!r}")
    stype = doc["type"]
    n = int(doc["n"])
    root = int(doc["root"])
    if stype == "tree":
        if "parent" in doc:
            parent = tuple(int(p) for p in doc["parent"])
            if len(parent) != n:
                raise SpaceFormatError(f"{path}: parent array length != n")
            return SpaceFile(type=stype, n=n, root=root, parent=parent,
                             generator=doc.get("generator"))
        if "edges" in doc:
            edges = tuple((int(u), int(v)) for u, v in doc["edges"])
            return SpaceFile(type=stype, n=n, root=root, edges=edges,
                             generator=doc.get("generator"))
        raise SpaceFormatError(f"{path}: tree needs parent or edges")
    if stype == "median_graph":
        if "edges" not in doc:
            raise SpaceFormatError(f"{path}: median_graph needs edges")
        edges = tuple((int(u), int(v)) for u, v in doc["edges"])
        return SpaceFile(type=stype, n=n, root=root, edges=edges,
                         generator=doc.get("generator"))
    raise SpaceFormatError(f"{path}: unknown space type {stype!r}")


def build_space(sf: SpaceFile) -> Union[RootedTree, MedianGraph]:
    """Materialize the stored space; invariants are re-validated on build."""
    label = ""
    if sf.generator and "spec" in sf.generator:
        label = str(sf.generator["spec"])
    try:
        if sf.type == "tree":
            if sf.parent is not None:
                return RootedTree(sf.parent, root=sf.root, label=label)
            parent = _parent_from_edges(sf.n, sf.edges, sf.root)
            return RootedTree(parent, root=sf.root, label=label)
        return MedianGraph(sf.n, sf.edges, root=sf.root, label=label)
    except ValueError as exc:
        raise SpaceFormatError(str(exc)) from exc


def _parent_from_edges(n, edges, root):
    if len(edges) != n - 1:
        raise SpaceFormatError("a tree on n vertices needs n-1 edges")
    adj = [[] for _ in range(n)]
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise SpaceFormatError(f"edge ({u},{v}) out of range")
        adj[u].append(v)
        adj[v].append(u)
    parent = [-1] * n
    parent[root] = root
    frontier = [root]
    seen = 1
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if parent[v] == -1:
                    parent[v] = u
                    nxt.append(v)
                    seen += 1
        frontier = nxt
    if seen != n:
        raise SpaceFormatError("edge list is not a connected tree")
    return parent
