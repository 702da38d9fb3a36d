"""Empirical compression/dilatation profiles and the bound curves they face.

For an embedding f of a finite space, the profile records per realized
integer distance t the smallest embedded distance over sampled pairs at
metric distance >= t (``rho_hat``, a suffix minimum) and the largest
embedded distance over pairs at metric distance <= t (``delta_hat``, a
prefix maximum).  Exhaustive sampling makes both exact on the space;
random sampling can only raise rho_hat and lower delta_hat.

A space object must expose ``vertex_count`` and
``distances_from(sources) -> 2d array``; trees, median graphs and
products of trees all qualify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import KeyCollisionError
from .sparse import SparseVector
from .weights import WeightFunction, deficit_constant, diff_sq_tail_bound

EXHAUSTIVE_DEFAULT_PAIR_LIMIT = 2_000_000


@dataclass(frozen=True)
class PairSampler:
    """How vertex pairs are drawn: all of them, uniformly at random, or a
    fixed number per realized distance."""

    mode: str
    count: int = 0
    per_bucket: int = 0
    seed: Optional[int] = None

    @classmethod
    def exhaustive(cls) -> "PairSampler":
        return cls(mode="exhaustive")

    @classmethod
    def uniform(cls, count: int, seed: int) -> "PairSampler":
        return cls(mode="uniform", count=int(count), seed=int(seed))

    @classmethod
    def stratified(cls, per_bucket: int, seed: int) -> "PairSampler":
        return cls(mode="stratified", per_bucket=int(per_bucket), seed=int(seed))

    def label(self) -> str:
        if self.mode == "exhaustive":
            return "exhaustive"
        if self.mode == "uniform":
            return f"uniform:{self.count},seed{self.seed}"
        return f"stratified:{self.per_bucket},seed{self.seed}"


@dataclass(frozen=True)
class ProfileEntry:
    t: int
    rho_hat: float
    delta_hat: float
    pair_count: int


@dataclass(frozen=True)
class CompressionProfile:
    entries: tuple[ProfileEntry, ...]
    metadata: Mapping[str, object] = field(default_factory=dict)

    def ts(self) -> np.ndarray:
        return np.asarray([e.t for e in self.entries], dtype=np.int64)

    def rho(self) -> np.ndarray:
        return np.asarray([e.rho_hat for e in self.entries])

    def delta(self) -> np.ndarray:
        return np.asarray([e.delta_hat for e in self.entries])

    def pair_counts(self) -> np.ndarray:
        return np.asarray([e.pair_count for e in self.entries], dtype=np.int64)


def embedding_matrix(
    embed_fn: Callable[[int], SparseVector], vertices: Sequence[int]
) -> tuple[sp.csr_matrix, np.ndarray, int]:
    """Stack embeddings of the given vertices into a CSR matrix.

    Returns (matrix, squared norms per row, key offset); column j holds
    basis key ``offset + j``.
    """
    indptr = [0]
    all_keys: list[np.ndarray] = []
    all_vals: list[np.ndarray] = []
    for v in vertices:
        keys, vals = embed_fn(v).as_arrays()
        all_keys.append(keys)
        all_vals.append(vals)
        indptr.append(indptr[-1] + len(keys))
    keys = np.concatenate(all_keys) if all_keys else np.empty(0, dtype=np.int64)
    vals = np.concatenate(all_vals) if all_vals else np.empty(0)
    offset = int(keys.min()) if len(keys) else 0
    width = int(keys.max()) - offset + 1 if len(keys) else 1
    mat = sp.csr_matrix(
        (vals, keys - offset, np.asarray(indptr)),
        shape=(len(vertices), width),
    )
    norms_sq = np.asarray(mat.multiply(mat).sum(axis=1)).ravel()
    return mat, norms_sq, offset


class _ProfileAccumulator:
    """Streamed per-distance minima/maxima/counts over pair chunks."""

    def __init__(self):
        self.min_emb = np.full(1, np.inf)
        self.max_emb = np.zeros(1)
        self.counts = np.zeros(1, dtype=np.int64)

    def _grow(self, tmax: int):
        size = len(self.counts)
        if tmax < size:
            return
        new = tmax + 1
        self.min_emb = np.concatenate([self.min_emb, np.full(new - size, np.inf)])
        self.max_emb = np.concatenate([self.max_emb, np.zeros(new - size)])
        self.counts = np.concatenate(
            [self.counts, np.zeros(new - size, dtype=np.int64)])

    def add(self, ts: np.ndarray, emb: np.ndarray):
        if len(ts) == 0:
            return
        self._grow(int(ts.max()))
        np.minimum.at(self.min_emb, ts, emb)
        np.maximum.at(self.max_emb, ts, emb)
        np.add.at(self.counts, ts, 1)

    def entries(self) -> tuple[ProfileEntry, ...]:
        realized = np.flatnonzero(self.counts)
        if len(realized) == 0:
            raise ValueError("empty sample")
        rho = np.minimum.accumulate(self.min_emb[realized][::-1])[::-1]
        delta = np.maximum.accumulate(self.max_emb[realized])
        return tuple(
            ProfileEntry(int(t), float(r), float(d), int(c))
            for t, r, d, c in zip(realized, rho, delta, self.counts[realized])
        )


def _entries_from_pairs(ts: np.ndarray, emb: np.ndarray) -> tuple[ProfileEntry, ...]:
    """Aggregate per-pair data into profile rows (suffix min / prefix max)."""
    acc = _ProfileAccumulator()
    acc.add(np.asarray(ts, dtype=np.int64), np.asarray(emb))
    return acc.entries()


def _exhaustive_entries(space, embed_fn, block_size: int):
    n = space.vertex_count
    mat, norms_sq, _ = embedding_matrix(embed_fn, range(n))
    acc = _ProfileAccumulator()
    cols = np.arange(n)[None, :]
    for start in range(0, n, block_size):
        block = np.arange(start, min(start + block_size, n))
        dist = space.distances_from(block)
        gram = np.asarray((mat[block] @ mat.T).todense())
        emb_sq = norms_sq[block][:, None] + norms_sq[None, :] - 2.0 * gram
        emb = np.sqrt(np.clip(emb_sq, 0.0, None))
        mask = cols > block[:, None]
        acc.add(dist[mask].astype(np.int64), emb[mask])
    return acc.entries()


def _grouped_pairs(space, embed_fn, us, vs):
    """Embedded and metric distances for explicit pairs.

    Results are aligned with the input pair order.  Metric distances come
    from BFS rows grouped by first endpoint; the first endpoints are
    expected to form a small set (samplers guarantee this), so their
    embeddings are held densely while second endpoints stream through
    grouped to avoid recomputation.  Target coordinates outside the dense
    window cannot meet a source coordinate and only enter through the
    target norm.
    """
    order = np.argsort(us, kind="stable")
    inverse = np.empty_like(order)
    inverse[order] = np.arange(len(order))
    us, vs = us[order], vs[order]
    distinct_sources = np.unique(us)
    src_rows = {}
    for start in range(0, len(distinct_sources), 256):
        chunk = distinct_sources[start:start + 256]
        rows = space.distances_from(chunk)
        for i, s in enumerate(chunk):
            src_rows[int(s)] = rows[i]
    ts = np.empty(len(us), dtype=np.int64)
    for i, (u, v) in enumerate(zip(us, vs)):
        ts[i] = int(src_rows[int(u)][int(v)])

    src_vecs = {}
    src_norm = {}
    key_min = None
    key_max = None
    for s in distinct_sources:
        keys, vals = embed_fn(int(s)).as_arrays()
        src_vecs[int(s)] = (keys, vals)
        src_norm[int(s)] = float(vals @ vals)
        if len(keys):
            key_min = min(key_min, keys[0]) if key_min is not None else int(keys[0])
            key_max = max(key_max, keys[-1]) if key_max is not None else int(keys[-1])
    lo = key_min if key_min is not None else 0
    width = (key_max - key_min + 1) if key_min is not None else 1
    dense = np.zeros(width)
    dense_for = None
    emb = np.empty(len(us))
    torder = np.argsort(vs, kind="stable")
    cur_target = None
    tkeys_in = tvals_in = None
    tnorm = 0.0
    for idx in torder:
        u, v = int(us[idx]), int(vs[idx])
        if dense_for != u:
            if dense_for is not None:
                pk, _ = src_vecs[dense_for]
                dense[pk - lo] = 0.0
            keys, vals = src_vecs[u]
            dense[keys - lo] = vals
            dense_for = u
        if cur_target != v:
            tkeys, tvals = embed_fn(v).as_arrays()
            tnorm = float(tvals @ tvals)
            window = (tkeys >= lo) & (tkeys < lo + width)
            tkeys_in = tkeys[window] - lo
            tvals_in = tvals[window]
            cur_target = v
        dot = float(dense[tkeys_in] @ tvals_in) if len(tkeys_in) else 0.0
        d2 = src_norm[u] + tnorm - 2.0 * dot
        emb[idx] = math.sqrt(d2) if d2 > 0.0 else 0.0
    return ts[inverse], emb[inverse]


def _stratified_pairs(space, sampler: PairSampler):
    n = space.vertex_count
    rng = np.random.default_rng(sampler.seed)
    n_sources = min(n, max(16, math.isqrt(4 * sampler.per_bucket)))
    sources = np.sort(rng.choice(n, size=n_sources, replace=False))
    src_set = {int(s): i for i, s in enumerate(sources)}
    cand_u = []
    cand_v = []
    cand_t = []
    rows = space.distances_from(sources).astype(np.int64)
    for i, s in enumerate(sources):
        row = rows[i]
        targets = np.flatnonzero(row > 0)
        # drop mirrored source-source pairs
        keep = np.asarray([
            (int(v) not in src_set) or (src_set[int(v)] > i) for v in targets
        ])
        targets = targets[keep]
        cand_u.append(np.full(len(targets), s, dtype=np.int64))
        cand_v.append(targets.astype(np.int64))
        cand_t.append(row[targets])
    cu = np.concatenate(cand_u)
    cv = np.concatenate(cand_v)
    ct = np.concatenate(cand_t)
    order = np.argsort(ct, kind="stable")
    ct = ct[order]
    bounds = np.searchsorted(ct, np.arange(ct[0], ct[-1] + 2))
    picks = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi == lo:
            continue
        idx = order[lo:hi]
        if len(idx) > sampler.per_bucket:
            idx = rng.choice(idx, size=sampler.per_bucket, replace=False)
        picks.append(idx)
    sel = np.concatenate(picks)
    return cu[sel], cv[sel]


def _uniform_pairs(space, sampler: PairSampler):
    n = space.vertex_count
    rng = np.random.default_rng(sampler.seed)
    got: set[tuple[int, int]] = set()
    while len(got) < sampler.count:
        need = sampler.count - len(got)
        draw = rng.integers(0, n, size=(max(16, int(need * 1.5)), 2))
        for a, b in draw:
            if a == b:
                continue
            pair = (int(min(a, b)), int(max(a, b)))
            got.add(pair)
            if len(got) >= sampler.count:
                break
        if len(got) >= n * (n - 1) // 2:
            break
    pairs = np.asarray(sorted(got), dtype=np.int64)
    return pairs[:, 0], pairs[:, 1]


def profile(
    space,
    embed_fn: Callable[[int], SparseVector],
    sampler: PairSampler,
    metadata: Optional[Mapping[str, object]] = None,
    block_size: int = 512,
) -> CompressionProfile:
    """Measure the embedding over sampled pairs and fold into a profile."""
    if space.vertex_count < 2:
        raise ValueError("profile needs at least two vertices")
    if sampler.mode == "exhaustive":
        entries = _exhaustive_entries(space, embed_fn, block_size)
    elif sampler.mode == "stratified":
        us, vs = _stratified_pairs(space, sampler)
        ts, emb = _grouped_pairs(space, embed_fn, us, vs)
        entries = _entries_from_pairs(ts, emb)
    elif sampler.mode == "uniform":
        us, vs = _uniform_pairs(space, sampler)
        ts, emb = _grouped_pairs(space, embed_fn, us, vs)
        entries = _entries_from_pairs(ts, emb)
    else:
        raise ValueError(f"unknown sampler mode {sampler.mode!r}")
    meta = dict(metadata or {})
    meta.setdefault("sampler", sampler.label())
    return CompressionProfile(entries=entries, metadata=meta)


# -- bound curves ---------------------------------------------------------------


@dataclass(frozen=True)
class BoundCurve:
    """Evaluable comparison curve.

    * ``paper_lower``: sqrt(max(0, floor(t/2n) * w(floor(t/2n))^2 / 2 - C))
    * ``linear_upper``: c_edge * t
    * ``bourgain_ceiling``: c * t / sqrt(ln t) for t >= 2, else 0
    """

    kind: str
    weight: Optional[WeightFunction] = None
    n: int = 1
    constant: float = 0.0

    @classmethod
    def paper_lower(cls, w: WeightFunction, n: int, constant: float) -> "BoundCurve":
        return cls(kind="paper_lower", weight=w, n=int(n), constant=float(constant))

    @classmethod
    def linear_upper(cls, c_edge: float) -> "BoundCurve":
        return cls(kind="linear_upper", constant=float(c_edge))

    @classmethod
    def bourgain_ceiling(cls, c: float) -> "BoundCurve":
        return cls(kind="bourgain_ceiling", constant=float(c))

    def values(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        if self.kind == "linear_upper":
            return self.constant * ts
        if self.kind == "bourgain_ceiling":
            out = np.zeros_like(ts)
            mask = ts >= 2
            out[mask] = self.constant * ts[mask] / np.sqrt(np.log(ts[mask]))
            return out
        q = np.floor(ts / (2.0 * self.n))
        out = np.full_like(ts, -self.constant)
        mask = q >= 1
        if mask.any():
            wq = self.weight.values(q[mask])
            out[mask] = 0.5 * q[mask] * wq * wq - self.constant
        return np.sqrt(np.clip(out, 0.0, None))

    def value(self, t: float) -> float:
        return float(self.values([t])[0])


def edge_dilatation_bound(w: WeightFunction, n: int) -> float:
    """Upper bound on the embedded length of any edge in an n-dimensional
    space: sqrt(w(1)^2 + 2n * sum of squared consecutive increments)."""
    if w.kind == "unit":
        return 1.0
    if w.kind == "paper":
        wm = w.value(w.m)
        return math.sqrt(2.0 * n * (wm * wm + diff_sq_tail_bound(w)))
    # power: numeric increment sum plus the closed-form integral tail
    from .weights import diff_sq_sum

    n0 = 100_000
    a = w.alpha
    tail = (a - 0.5) ** 2 * n0 ** (2 * a - 2) / (2.0 - 2.0 * a) if a < 0.5 else 0.0
    return math.sqrt(1.0 + 2.0 * n * (diff_sq_sum(w, n0) + tail))


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    min_slack: float
    at_t: int
    side: str
    points_checked: int


def check_profile_against(
    profile: CompressionProfile,
    lower: BoundCurve,
    upper: BoundCurve,
    t_min: int,
) -> BoundCheck:
    """Assert rho_hat(t) >= lower(t) and delta_hat(t) <= upper(t) for all
    realized t >= t_min; reports the minimum slack and where it occurs."""
    if not profile.entries:
        raise ValueError("empty profile")
    if t_min < 2:
        raise ValueError("t_min must be >= 2")
    ts = profile.ts()
    sel = ts >= t_min
    ts = ts[sel]
    if len(ts) == 0:
        return BoundCheck(True, math.inf, -1, "none", 0)
    rho = profile.rho()[sel]
    delta = profile.delta()[sel]
    lo = lower.values(ts)
    up = upper.values(ts)
    slack_lo = rho - lo
    slack_up = up - delta
    tol_lo = 1e-9 * np.maximum(1.0, np.abs(lo))
    tol_up = 1e-9 * np.maximum(1.0, np.abs(up))
    ok = bool((slack_lo >= -tol_lo).all() and (slack_up >= -tol_up).all())
    i_lo = int(np.argmin(slack_lo))
    i_up = int(np.argmin(slack_up))
    if slack_lo[i_lo] <= slack_up[i_up]:
        min_slack, at_t, side = float(slack_lo[i_lo]), int(ts[i_lo]), "lower"
    else:
        min_slack, at_t, side = float(slack_up[i_up]), int(ts[i_up]), "upper"
    return BoundCheck(ok, min_slack, at_t, side, points_checked=int(len(ts)))


# -- products -------------------------------------------------------------------


def product_embed(
    factors: Sequence[Callable[[int], SparseVector]],
) -> Callable[[Sequence[int]], SparseVector]:
    """Direct sum of per-factor embeddings.

    Factor embeddings live on disjoint key blocks by construction; a key
    appearing twice is a construction bug and raises KeyCollisionError.
    """
    if not factors:
        raise ValueError("need at least one factor")

    def embed(coords: Sequence[int]) -> SparseVector:
        if len(coords) != len(factors):
            raise ValueError("coordinate count does not match factor count")
        out: dict[int, float] = {}
        for fn, x in zip(factors, coords):
            for k, val in fn(int(x)).coords.items():
                if k in out:
                    raise KeyCollisionError(f"basis key {k} used by two factors")
                out[k] = val
        vec = SparseVector.__new__(SparseVector)
        vec.coords = out
        return vec

    return embed


class ProductSpace:
    """Cartesian product of spaces under the combined path metric (sum of
    factor distances). Vertices are flat indices in row-major order."""

    def __init__(self, factors: Sequence, label: str = ""):
        if not factors:
            raise ValueError("need at least one factor")
        self.factors = list(factors)
        self.sizes = [f.vertex_count for f in self.factors]
        self.vertex_count = int(np.prod(self.sizes))
        self.label = label

    def decode(self, idx: int) -> tuple[int, ...]:
        coords = []
        for size in reversed(self.sizes):
            coords.append(idx % size)
            idx //= size
        return tuple(reversed(coords))

    def encode(self, coords: Sequence[int]) -> int:
        idx = 0
        for c, size in zip(coords, self.sizes):
            idx = idx * size + int(c)
        return idx

    def distances_from(self, sources) -> np.ndarray:
        rows = []
        for s in np.atleast_1d(np.asarray(sources, dtype=np.int64)):
            coords = self.decode(int(s))
            acc = None
            for f, c in zip(self.factors, coords):
                row = f.distances_from([c])[0]
                acc = row if acc is None else np.add.outer(acc, row)
            rows.append(acc.ravel())
        return np.asarray(rows)

    def embedder(self, factor_embedders: Sequence[Callable[[int], SparseVector]]):
        merged = product_embed(factor_embedders)

        def embed(idx: int) -> SparseVector:
            return merged(self.decode(idx))

        return embed


def l1_l2_compare(k: int, distances: Sequence[float]) -> tuple[float, float]:
    """Sum and Euclidean combination of k per-factor distances.

    Always satisfies d2 <= d1 <= sqrt(k) * d2.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(distances) != k:
        raise ValueError("need exactly k distances")
    arr = np.asarray(distances, dtype=np.float64)
    if (arr < 0).any():
        raise ValueError("distances must be non-negative")
    return float(arr.sum()), float(math.sqrt(float(arr @ arr)))


# -- consistency with the sub-quasi-isometric ceiling -----------------------------


@dataclass(frozen=True)
class ConsistencyVerdict:
    fitted_c: float
    argmax_t: int
    max_t: int
    points: int
    passed: bool
    note: str = ""


def bourgain_consistency(
    profile: CompressionProfile, t_min: int = 2
) -> ConsistencyVerdict:
    """Fit the least c with rho_hat(t) <= c * t / sqrt(ln t) on realized
    t >= t_min and flag profiles whose ratio is still climbing at the top
    of the range (the signature of growth faster than t / sqrt(ln t))."""
    ts = profile.ts()
    rho = profile.rho()
    sel = (ts >= max(2, t_min)) & (rho > 0)
    ts, rho = ts[sel], rho[sel]
    if len(ts) == 0:
        return ConsistencyVerdict(0.0, -1, -1, 0, True, "no usable points")
    ratios = rho * np.sqrt(np.log(ts)) / ts
    k = int(np.argmax(ratios))
    fitted = float(ratios[k])
    argmax_t = int(ts[k])
    max_t = int(ts.max())
    if len(ts) < 5:
        return ConsistencyVerdict(fitted, argmax_t, max_t, len(ts), True,
                                  "insufficient range")
    passed = argmax_t <= 0.9 * max_t
    note = "" if passed else "ratio still climbing at the top of the range"
    return ConsistencyVerdict(fitted, argmax_t, max_t, len(ts), passed, note)


# -- convenience checks shared by the CLI and the test suite ----------------------


def unit_identity_max_rel_error(space, embed_fn, block_size: int = 512) -> float:
    """Largest relative deviation of squared embedded distance from metric
    distance over all pairs; zero-ish for unit-weight embeddings."""
    n = space.vertex_count
    mat, norms_sq, _ = embedding_matrix(embed_fn, range(n))
    worst = 0.0
    for start in range(0, n, block_size):
        block = np.arange(start, min(start + block_size, n))
        dist = space.distances_from(block)
        gram = np.asarray((mat[block] @ mat.T).todense())
        emb_sq = norms_sq[block][:, None] + norms_sq[None, :] - 2.0 * gram
        cols = np.arange(n)[None, :]
        mask = cols > block[:, None]
        d = dist[mask]
        err = np.abs(emb_sq[mask] - d)
        nz = d > 0
        if nz.any():
            worst = max(worst, float((err[nz] / d[nz]).max()))
    return worst


def default_bound_curves(w: WeightFunction, n: int) -> tuple[BoundCurve, BoundCurve]:
    """Lower and upper curves with constants tied to the weight family."""
    c = deficit_constant(w, 10**6)
    return (
        BoundCurve.paper_lower(w, n, c),
        BoundCurve.linear_upper(edge_dilatation_bound(w, n)),
    )
