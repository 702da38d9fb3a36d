"""Command-line surface: generate spaces, embed vertices, measure profiles,
run verification suites, merge result tables.

Exit codes: 0 success (and all asserted checks passed), 1 a requested
check failed, 2 bad input (malformed file, invalid flags, budget).
All commands are deterministic given their flags and seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .cube import (
    CubeSpec,
    MedianGraph,
    cube_embedder,
    gen_cube,
    median_from_tree,
    normal_cube_path,
    path_index_map,
    validate_median,
)
from .errors import MedEmbedError
from .metrics import (
    EXHAUSTIVE_DEFAULT_PAIR_LIMIT,
    PairSampler,
    ProductSpace,
    check_profile_against,
    default_bound_curves,
    l1_l2_compare,
    profile,
    unit_identity_max_rel_error,
)
from .spacefile import (
    build_space,
    load_spacefile,
    save_spacefile,
    to_spacefile,
)
from .tree import RootedTree, TreeSpec, gen_tree, tree_embedder
from .weights import (
    WeightFunction,
    build_weight_report,
    parse_weight,
)

CSV_HEADER = "t,rho_hat,delta_hat,bound_lower,bound_upper,pairs"


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def parse_tree_spec(text: str, seed=None) -> TreeSpec:
    """Parse compact tree specs: path:5, spider:3,100,
    binary-sample:200,50 (seed separate), caterpillar:10,3."""
    name, _, rest = text.partition(":")
    args = [int(a) for a in rest.split(",") if a != ""]
    if name == "path" and len(args) == 1:
        return TreeSpec.path(args[0])
    if name == "spider" and len(args) == 2:
        return TreeSpec.spider(args[0], args[1])
    if name == "binary-sample" and len(args) == 2:
        if seed is None:
            raise ValueError("binary-sample requires --seed")
        return TreeSpec.binary_sample(args[0], args[1], seed)
    if name == "caterpillar" and len(args) == 2:
        return TreeSpec.caterpillar(args[0], args[1])
    raise ValueError(f"cannot parse tree spec {text!r}")


def parse_sampler(text: str, seed=None) -> PairSampler:
    name, _, arg = text.partition(":")
    if name == "exhaustive":
        return PairSampler.exhaustive()
    if name == "uniform":
        if seed is None:
            raise ValueError("uniform sampler requires --seed")
        return PairSampler.uniform(int(arg or 10000), seed)
    if name == "stratified":
        if seed is None:
            raise ValueError("stratified sampler requires --seed")
        return PairSampler.stratified(int(arg or 1000), seed)
    raise ValueError(f"unknown sampler {text!r}")


# -- generate -------------------------------------------------------------------


def _build_generated_space(args):
    kind = args.space
    if kind in ("path", "spider", "binary-sample", "caterpillar"):
        if kind == "path":
            spec = TreeSpec.path(args.len)
        elif kind == "spider":
            spec = TreeSpec.spider(args.legs, args.leg_len)
        elif kind == "caterpillar":
            spec = TreeSpec.caterpillar(args.spine, args.hair)
        else:
            if args.seed is None:
                raise ValueError("binary-sample requires --seed")
            spec = TreeSpec.binary_sample(args.depth, args.rays, args.seed)
        return gen_tree(spec, args.max_vertices), {"spec": spec.label()}
    if kind == "grid":
        if not args.dims:
            raise ValueError("grid requires --dims, e.g. 20x20")
        dims = [int(d) for d in args.dims.lower().split("x")]
        spec = CubeSpec.grid(*dims)
    elif kind == "staircase":
        if args.heights:
            spec = CubeSpec.staircase_heights(
                [int(h) for h in args.heights.split(",")])
        elif args.cols:
            spec = CubeSpec.staircase(args.cols)
        else:
            raise ValueError("staircase requires --cols or --heights")
    elif kind == "from-tree":
        if not args.tree:
            raise ValueError("from-tree requires --tree")
        spec = CubeSpec.from_tree(parse_tree_spec(args.tree, args.seed))
    elif kind == "tree-product":
        if not (args.left and args.right):
            raise ValueError("tree-product requires --left and --right")
        spec = CubeSpec.tree_product(
            parse_tree_spec(args.left, args.seed),
            parse_tree_spec(args.right, args.seed),
        )
    else:
        raise ValueError(f"unknown space kind {kind!r}")
    return gen_cube(spec, args.max_vertices), {"spec": spec.label()}


def cmd_generate(args) -> int:
    space, provenance = _build_generated_space(args)
    if args.seed is not None:
        provenance["seed"] = args.seed
    save_spacefile(to_spacefile(space, generator=provenance), args.out)
    if isinstance(space, RootedTree):
        print(f"tree: {space.vertex_count} vertices, {space.edge_count} edges")
    else:
        hyps = space.hyperplanes()
        print(
            f"median graph: {space.vertex_count} vertices, "
            f"{space.edge_count} edges, {len(hyps)} hyperplanes, "
            f"dimension {space.dimension}"
        )
    return 0


# -- embed ----------------------------------------------------------------------


def _load_space(path):
    if not Path(path).exists():
        raise FileNotFoundError(f"no such space file: {path}")
    return build_space(load_spacefile(path))


def cmd_embed(args) -> int:
    space = _load_space(args.space)
    w = parse_weight(args.weight)
    if isinstance(space, RootedTree):
        vec = tree_embedder(space, w)(args.vertex)
    else:
        vec = cube_embedder(space, w)(args.vertex)
    keys, vals = vec.as_arrays()
    doc = {
        "vertex": args.vertex,
        "weight": w.label(),
        "norm": vec.norm(),
        "coords": [[int(k), float(v)] for k, v in zip(keys, vals)],
    }
    text = json.dumps(doc, separators=(",", ":")) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# -- measure --------------------------------------------------------------------


def _auto_triple_budget(n: int) -> int:
    return min(200_000, max(2_000, 2 * 10**8 // max(1, n)))


def cmd_measure(args) -> int:
    space = _load_space(args.space)
    w = parse_weight(args.weight)
    if isinstance(space, MedianGraph):
        budget = args.triple_budget or _auto_triple_budget(space.vertex_count)
        verdict = validate_median(space, triple_budget=budget)
        if not verdict.valid:
            raise MedEmbedError(
                f"median validation failed on triple {verdict.violation} "
                f"(medians found: {verdict.median_count})")
        dim = space.dimension
        embed = cube_embedder(space, w)
    else:
        dim = 1
        embed = tree_embedder(space, w)
    n_pairs = space.vertex_count * (space.vertex_count - 1) // 2
    if args.sampler == "auto":
        if n_pairs <= EXHAUSTIVE_DEFAULT_PAIR_LIMIT:
            sampler = PairSampler.exhaustive()
        else:
            sampler = parse_sampler("stratified:1000", args.seed)
    else:
        sampler = parse_sampler(args.sampler, args.seed)
    prof = profile(
        space, embed, sampler,
        metadata={"space": space.label or str(args.space), "weight": w.label()},
    )
    lower, upper = default_bound_curves(w, dim)
    t_min = args.t_min if args.t_min else max(2, 2 * w.cutoff)
    ts = prof.ts()
    lo = lower.values(ts)
    up = upper.values(ts)
    lines = [CSV_HEADER]
    for e, lo_v, up_v in zip(prof.entries, lo, up):
        lines.append(
            f"{e.t},{_fmt(e.rho_hat)},{_fmt(e.delta_hat)},"
            f"{_fmt(lo_v)},{_fmt(up_v)},{e.pair_count}"
        )
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"profile: {len(prof.entries)} rows -> {args.out}")
    if args.assert_bounds:
        check = check_profile_against(prof, lower, upper, t_min)
        status = "PASS" if check.passed else "FAIL"
        print(
            f"bounds[{status}] min slack {check.min_slack:.6g} at t={check.at_t} "
            f"({check.side} side, {check.points_checked} points, t_min={t_min})"
        )
        return 0 if check.passed else 1
    return 0


# -- verify ---------------------------------------------------------------------


def _verify_lemma(args) -> int:
    w = parse_weight(args.weight or "paper:18")
    report = build_weight_report(w, n_max=args.n_max)
    for n, s in report.partial_sums:
        print(f"  increment sum to {n}: {s:.9f}")
    print(f"  tail bound: {report.tail_bound:.9f}")
    print(f"  deficit constant: {report.deficit_constant:.9f} "
          f"(attained at N={report.deficit_argmax}, "
          f"stabilized={report.stabilized})")
    print(f"  monotone past cutoff: {report.monotone_ok}")
    status = "PASS" if report.passed else "FAIL"
    print(f"lemma[{status}] margin={report.margin:.6g}")
    return 0 if report.passed else 1


def _verify_oracle(args) -> int:
    if not args.space:
        raise ValueError("oracle suite requires --space")
    space = _load_space(args.space)
    w = WeightFunction.unit()
    if isinstance(space, RootedTree):
        embed = tree_embedder(space, w)
    else:
        embed = cube_embedder(space, w)
    err = unit_identity_max_rel_error(space, embed)
    ok = err <= 1e-9
    print(f"  unit-weight identity max relative error: {err:.3e}")
    if isinstance(space, MedianGraph):
        worst = 0
        n = space.vertex_count
        for start in range(0, n, 256):
            block = np.arange(start, min(start + 256, n))
            dist = space.distances_from(block).astype(np.int64)
            for i, u in enumerate(block):
                vs = np.arange(u + 1, n)
                if len(vs) == 0:
                    continue
                seps = space.separating_counts(np.full(len(vs), u), vs)
                worst = max(worst, int(np.abs(seps - dist[i][vs]).max()))
        print(f"  distance vs separating-hyperplane count: max deviation {worst}")
        ok = ok and worst == 0
    status = "PASS" if ok else "FAIL"
    print(f"oracle[{status}]")
    return 0 if ok else 1


def _verify_normalpath(args) -> int:
    if not args.space:
        raise ValueError("normalpath suite requires --space")
    space = _load_space(args.space)
    if isinstance(space, RootedTree):
        space = median_from_tree(space)
    space.hyperplanes()
    n_dim = space.dimension
    max_dev = 0
    for eid in range(space.edge_count):
        u, v = int(space.eu[eid]), int(space.ev[eid])
        nu = path_index_map(space, u)
        nv = path_index_map(space, v)
        for key, iu in nu.items():
            iv = nv.get(key)
            if iv is not None:
                max_dev = max(max_dev, abs(iu - iv))
    mult_ok = True
    partition_ok = True
    for v in range(space.vertex_count):
        path = normal_cube_path(space, v)
        sizes = [len(s.crossed) for s in path.steps]
        if any(s > n_dim for s in sizes):
            mult_ok = False
        if sum(sizes) != int(space.dist_root[v]):
            partition_ok = False
    print(f"  max index deviation over edges: {max_dev}")
    print(f"  step sizes within dimension {n_dim}: {mult_ok}")
    print(f"  crossed sets partition the separators: {partition_ok}")
    ok = max_dev <= 1 and mult_ok and partition_ok
    status = "PASS" if ok else "FAIL"
    print(f"normalpath[{status}]")
    return 0 if ok else 1


def _verify_product(args) -> int:
    seed = args.seed if args.seed is not None else 0
    rng = np.random.default_rng(seed)
    count = args.count
    worst_gap = 0.0
    for _ in range(count):
        k = int(rng.integers(1, 6))
        d = rng.uniform(0.0, 100.0, size=k)
        d1, d2 = l1_l2_compare(k, d)
        if not (d2 <= d1 + 1e-9 and d1 <= np.sqrt(k) * d2 + 1e-9):
            worst_gap = max(worst_gap, 1.0)
    t1 = gen_tree(TreeSpec.path(12))
    t2 = gen_tree(TreeSpec.spider(3, 4))
    prod = ProductSpace([t1, t2])
    w = parse_weight(args.weight or "unit")
    embed = prod.embedder([tree_embedder(t1, w), tree_embedder(t2, w)])
    e1 = tree_embedder(t1, w)
    e2 = tree_embedder(t2, w)
    max_err = 0.0
    for _ in range(2000):
        a = int(rng.integers(0, prod.vertex_count))
        b = int(rng.integers(0, prod.vertex_count))
        ca, cb = prod.decode(a), prod.decode(b)
        lhs = embed(a).distance(embed(b)) ** 2
        rhs = (
            e1(ca[0]).distance(e1(cb[0])) ** 2
            + e2(ca[1]).distance(e2(cb[1])) ** 2
        )
        max_err = max(max_err, abs(lhs - rhs) / max(1.0, rhs))
    ok = worst_gap == 0.0 and max_err <= 1e-9
    print(f"  l1/l2 bounds on {count} tuples: {'ok' if worst_gap == 0 else 'violated'}")
    print(f"  product distance identity max relative error: {max_err:.3e}")
    status = "PASS" if ok else "FAIL"
    print(f"product[{status}]")
    return 0 if ok else 1


def cmd_verify(args) -> int:
    suites = {
        "lemma": _verify_lemma,
        "oracle": _verify_oracle,
        "normalpath": _verify_normalpath,
        "product": _verify_product,
    }
    if args.suite not in suites:
        raise ValueError(f"unknown suite {args.suite!r}; "
                         f"choose from {sorted(suites)}")
    return suites[args.suite](args)


# -- report ---------------------------------------------------------------------


def cmd_report(args) -> int:
    merged: dict[int, list] = {}
    for path in args.inputs:
        text = Path(path).read_text().strip().splitlines()
        if not text or text[0] != CSV_HEADER:
            raise MedEmbedError(f"{path}: unexpected CSV header")
        for line in text[1:]:
            t_s, rho, delta, lo, up, pairs = line.split(",")
            t = int(t_s)
            row = [float(rho), float(delta), float(lo), float(up), int(pairs)]
            if t not in merged:
                merged[t] = row
            else:
                cur = merged[t]
                cur[0] = min(cur[0], row[0])
                cur[1] = max(cur[1], row[1])
                cur[2] = min(cur[2], row[2])
                cur[3] = max(cur[3], row[3])
                cur[4] += row[4]
    lines = [CSV_HEADER]
    for t in sorted(merged):
        rho, delta, lo, up, pairs = merged[t]
        lines.append(
            f"{t},{_fmt(rho)},{_fmt(delta)},{_fmt(lo)},{_fmt(up)},{pairs}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"merged {len(args.inputs)} tables, {len(merged)} rows -> {args.out}")
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="medembed",
        description="Embeddings of trees and median graphs into sparse "
                    "Hilbert-space vectors, with compression measurement.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a space file")
    g.add_argument("--space", required=True,
                   choices=["path", "spider", "binary-sample", "caterpillar",
                            "grid", "staircase", "from-tree", "tree-product"])
    g.add_argument("--len", type=int, default=0, help="path edge count")
    g.add_argument("--legs", type=int, default=0)
    g.add_argument("--leg-len", dest="leg_len", type=int, default=0)
    g.add_argument("--depth", type=int, default=0)
    g.add_argument("--rays", type=int, default=0)
    g.add_argument("--spine", type=int, default=0)
    g.add_argument("--hair", type=int, default=0)
    g.add_argument("--dims", default="", help="grid sides, e.g. 20x20")
    g.add_argument("--cols", type=int, default=0,
                   help="staircase with heights cols..1")
    g.add_argument("--heights", default="",
                   help="explicit staircase heights, e.g. 5,4,2")
    g.add_argument("--tree", default="", help="tree spec for from-tree")
    g.add_argument("--left", default="", help="first tree-product factor")
    g.add_argument("--right", default="", help="second tree-product factor")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--max-vertices", dest="max_vertices", type=int,
                   default=5_000_000)
    g.add_argument("-o", "--out", required=True)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("embed", help="dump one vertex's sparse vector")
    e.add_argument("--space", required=True)
    e.add_argument("--weight", default="paper:18")
    e.add_argument("--vertex", type=int, required=True)
    e.add_argument("-o", "--out", default="")
    e.set_defaults(func=cmd_embed)

    m = sub.add_parser("measure", help="compute a compression profile CSV")
    m.add_argument("--space", required=True)
    m.add_argument("--weight", default="paper:18")
    m.add_argument("--sampler", default="auto",
                   help="exhaustive, uniform:N, stratified:N, or auto")
    m.add_argument("--seed", type=int, default=None)
    m.add_argument("--t-min", dest="t_min", type=int, default=0)
    m.add_argument("--assert", dest="assert_bounds", action="store_true",
                   help="exit nonzero unless bound checks pass")
    m.add_argument("--triple-budget", dest="triple_budget", type=int, default=0)
    m.add_argument("-o", "--out", required=True)
    m.set_defaults(func=cmd_measure)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("--suite", required=True)
    v.add_argument("--space", default="")
    v.add_argument("--weight", default="")
    v.add_argument("--N-max", dest="n_max", type=int, default=10**6)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--count", type=int, default=10_000)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="merge profile CSVs")
    r.add_argument("-o", "--out", required=True)
    r.add_argument("inputs", nargs="+")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MedEmbedError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
