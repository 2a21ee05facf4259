"""Command-line front end.

Every command prints one JSON object ``{"manifest": ..., "result": ...}`` on
stdout and a short summary on stderr (``--quiet`` drops the summary). The
manifest records the parameters, the seed, the package version and input
digests; rerunning with the same manifest gives the same ``result``.
"""
from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import __version__
from .chain import rw_from_graph
from .errors import BudgetError, CovertimeError, PreconditionError, UsageError
from .io import dumps, file_digest, read_chain, read_graph


def _ints(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _targets(text: str, n: int) -> list:
    if text == "all":
        return list(range(n))
    out = _ints(text)
    bad = [v for v in out if not 0 <= v < n]
    if bad:
        raise UsageError(f"target vertices out of range: {bad}")
    return out


def _load(args):
    """``(chain, graph or None, {path: digest})`` from --graph/--chain."""
    if getattr(args, "graph", None):
        g = read_graph(args.graph)
        return rw_from_graph(g), g, {args.graph: file_digest(args.graph)}
    if getattr(args, "chain", None):
        return read_chain(args.chain), None, {args.chain: file_digest(args.chain)}
    raise UsageError("one of --graph or --chain is required")


def _need_graph(args):
    if not getattr(args, "graph", None):
        raise UsageError("this command needs --graph")
    return _load(args)


def _input_opts(p, chain=True):
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--graph", help="edge-list file (random walk on the graph)")
    if chain:
        grp.add_argument("--chain", help="sparse transition-matrix file")


# -- commands -----------------------------------------------------------

def cmd_cover(args):
    from .exact import cover_probability
    from .mc import estimate_cover
    m, _, digests = _load(args)
    W = _targets(args.target, m.n)
    if args.horizon < 0:
        raise UsageError("--horizon must be nonnegative")
    if args.mc is not None:
        est = estimate_cover(m, args.start, W, args.horizon, args.mc, seed=args.seed,
                             include_start=args.include_start, threads=args.threads)
        res = {"mode": "mc", "estimate": est.to_dict()}
        summary = f"cover ~ {est.p_hat:.6g}  99% [{est.lo:.6g}, {est.hi:.6g}]"
    else:
        try:
            p = cover_probability(m, args.start, W, args.horizon,
                                  include_start=args.include_start, exact=args.rational)
        except BudgetError as exc:
            raise BudgetError(f"{exc}; use --mc REPS for a Monte Carlo estimate") from None
        res = {"mode": "exact", "probability": float(p)}
        if args.rational:
            res["fraction"] = str(p)
        summary = f"cover probability {float(p):.12g}"
    res |= {"start": args.start, "targets": W, "horizon": args.horizon,
            "include_start": args.include_start}
    return res, digests, summary


def _partition_out(args, p, digests, extra=None):
    prov = dict(p.provenance)
    src = args.graph or getattr(args, "chain", None)
    prov["source"] = {"path": os.path.abspath(src), "sha256": digests[src]}
    p = type(p).build(p.n, p.blocks, p.U, p.V0, prov)
    if args.out:
        p.save(args.out)
    res = {"partition": p.to_dict()} | (extra or {})
    return res, f"k = {p.k} blocks, |V0| = {len(p.V0)}"


def _verify_dict(m, p, C, vartheta, delta_fun, gamma=0.1):
    from .partition import verify_corp
    return verify_corp(m, p, C, vartheta, gamma, delta_fun).to_dict()


def cmd_partition_tree(args):
    from .partition import corp_from_tree, tree_safe_partition
    m, g, digests = _need_graph(args)
    p = tree_safe_partition(g, args.delta, root=args.root)
    sel = corp_from_tree(p, g, args.vartheta)
    ver = _verify_dict(m, sel, args.C, sel.provenance["vartheta"], args.delta)
    res, s = _partition_out(args, sel, digests, {"coloring": p.to_dict(), "verify": ver})
    return res, digests, f"{p.k} color classes, " + s + f"; verifier {'pass' if ver['pass'] else 'FAIL'}"


def cmd_partition_recurrent(args):
    from .partition import recurrent_partition
    m, _, digests = _need_graph(args)
    p = recurrent_partition(m, args.delta, args.R, args.vartheta)
    res, s = _partition_out(args, p, digests)
    return res, digests, s


def cmd_partition_expander(args):
    from .partition import expander_partition
    m, _, digests = _load(args)
    p = expander_partition(m, args.eps, args.delta, seed=args.seed,
                           degree_cutoff=args.degree_cutoff)
    ver = _verify_dict(m, p, args.C, p.provenance.get("vartheta", 0.0), args.delta)
    res, s = _partition_out(args, p, digests, {"verify": ver})
    return res, digests, s + f"; verifier {'pass' if ver['pass'] else 'FAIL'}"


def cmd_partition_generic(args):
    from .partition import generic_partition
    m, _, digests = _load(args)
    out = generic_partition(m, args.C, args.delta, args.k_exp, args.degree_cutoff, args.seed)
    p = out.partition
    vt = args.vartheta if args.vartheta is not None else out.diagnostics["zeta"] / 2
    ver = _verify_dict(m, p, args.C, vt, args.delta)
    res, s = _partition_out(args, p, digests, {"scale": out.scale.to_dict(),
                                               "diagnostics": out.diagnostics,
                                               "verify": ver})
    return res, digests, s + f"; |T| = {out.diagnostics['T']}"


def cmd_partition_verify(args):
    from .partition import Partition
    p = Partition.load(args.partition)
    digests = {args.partition: file_digest(args.partition)}
    if not (args.graph or args.chain):
        rec = p.provenance.get("source", {})
        src = rec.get("path")
        if not src:
            raise UsageError("partition file has no recorded source; pass --graph or --chain")
        if rec.get("sha256") and file_digest(src) != rec["sha256"]:
            raise UsageError(f"{src} changed since the partition was built; pass --graph")
        args.graph = src
    m, _, more = _load(args)
    digests |= more
    ver = _verify_dict(m, p, args.C, args.theta, args.delta_fun, args.gamma)
    flags = ", ".join(f"{k}={'ok' if ver[k] else 'FAIL'}"
                      for k in ("sizes_ok", "v0_ok", "u_ok", "induced_ok"))
    return {"verify": ver}, digests, flags


def cmd_martingale(args):
    from .martingale import (assoc_bound, build_xi, check_martingale_step,
                             concentration_report, lambda_of, ASSOC_MAX_HORIZON,
                             ASSOC_MAX_I, ASSOC_MAX_STATES)
    from .mc import simulate_paths
    m, _, digests = _load(args)
    W = _targets(args.W, m.n)
    if not W:
        raise UsageError("--W must be nonempty")
    start = args.start if args.start is not None else next(
        (v for v in range(m.n) if v not in W), None)
    if start is None or start in W:
        raise PreconditionError("the start state must lie outside W")
    steps = args.steps if args.steps is not None else 4 * m.n
    lam = lambda_of(m, W)
    paths = simulate_paths(m, start, steps, seed=args.seed, reps=args.walks,
                           threads=args.threads)
    traces = [build_xi(m, row, W, args.K, lam) for row in paths]
    bound = traces[0].increment_bound
    max_inc = max(t.max_increment() for t in traces)
    checks = fails = 0
    for row in paths[:args.check_walks]:
        hist = row.tolist()
        for s in range(1, len(hist) + 1):
            checks += 1
            fails += not check_martingale_step(m, hist[:s], W, args.K, lam).passed
    res = {"start": start, "W": W, "K": args.K, "lambda": lam, "steps": steps,
           "walks": args.walks,
           "traces": {"covered": sum(t.covered() for t in traces),
                      "frozen": sum(t.frozen for t in traces),
                      "q_star_mean": float(np.mean([sum(t.Q_star.values()) for t in traces])),
                      "xi_final_mean": float(np.mean([t.xi[-1] for t in traces]))},
           "step_checks": {"checked": checks, "failed": fails, "pass": fails == 0},
           "increment": {"max": max_inc, "bound": bound, "pass": max_inc <= bound + 1e-9},
           "concentration": concentration_report(m, paths, W, args.K).to_dict()}
    if m.n <= ASSOC_MAX_STATES and len(W) <= ASSOC_MAX_I:
        h = min(steps, ASSOC_MAX_HORIZON)
        res["assoc"] = assoc_bound(m, start, W, W, args.K, h).to_dict()
    else:
        res["assoc"] = None
    summary = (f"step checks {checks - fails}/{checks} pass; max increment {max_inc:.4g} "
               f"<= {bound:.4g}: {max_inc <= bound + 1e-9}")
    return res, digests, summary


def cmd_spectral(args):
    from .exact import expander_bounds, is_eps_expander, spectral_gap
    m, _, digests = _load(args)
    rep = spectral_gap(m)
    gq = rep.gap_quantity
    res = {"eigenvalues": list(rep.eigenvalues), "max_abs_nontrivial": gq,
           "largest_eps": 1.0 - gq}
    if args.eps is not None:
        ok = is_eps_expander(rep, args.eps)
        res["eps"] = args.eps
        res["is_expander"] = ok
        if ok:
            S = _ints(args.S) if args.S else [0]
            res["bounds"] = [expander_bounds(m, S, t, args.eps, rep).to_dict()
                             for t in _ints(args.t)]
    summary = f"max |lambda_nontrivial| = {gq:.6g}"
    return res, digests, summary


def cmd_params(args):
    from .martingale import paper_params
    p = paper_params(args.C, args.beta, args.lam, args.D)
    d = p.to_dict()
    return d, {}, f"K = {p.K:.6g}, log p = {p.log_p:.6g}"


# -- parser -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="covertime", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"covertime {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="no summary on stderr")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default $COVERTIME_THREADS or 1)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cover", parents=[common], help="cover probability")
    _input_opts(p)
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--target", default="all", help='comma list or "all"')
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--include-start", action="store_true")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact DP (default)")
    mode.add_argument("--mc", type=int, metavar="REPS", help="Monte Carlo replications")
    p.add_argument("--rational", action="store_true", help="exact rational arithmetic")
    p.set_defaults(func=cmd_cover)

    pp = sub.add_parser("partition", help="partition constructions and verifier")
    psub = pp.add_subparsers(dest="mode", required=True)

    def part(name, func, help_):
        q = psub.add_parser(name, parents=[common], help=help_)
        q.add_argument("--out", help="also write the partition JSON here")
        q.set_defaults(func=func)
        return q

    q = part("tree", cmd_partition_tree, "safe coloring of a tree")
    _input_opts(q, chain=False)
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--root", type=int, default=0)
    q.add_argument("--vartheta", type=float, default=None, help="default 1/(2k)")
    q.add_argument("--C", type=float, default=2.0)

    q = part("recurrent", cmd_partition_recurrent, "coloring of recurrent vertices")
    _input_opts(q, chain=False)
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--R", type=int, required=True)
    q.add_argument("--vartheta", type=float, required=True)

    q = part("expander", cmd_partition_expander, "random blocks on an expander")
    _input_opts(q)
    q.add_argument("--eps", type=float, required=True)
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--degree-cutoff", type=float, default=None)
    q.add_argument("--C", type=float, default=2.0)

    q = part("generic", cmd_partition_generic, "scale choice and random blocks")
    _input_opts(q)
    q.add_argument("--C", type=float, default=2.0)
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--k-exp", type=int, default=5)
    q.add_argument("--degree-cutoff", type=float, default=None)
    q.add_argument("--vartheta", type=float, default=None)

    q = psub.add_parser("verify", parents=[common], help="check partition conditions")
    _input_opts(q)
    q.add_argument("--partition", required=True)
    q.add_argument("--C", type=float, required=True)
    q.add_argument("--theta", type=float, required=True, help="size threshold vartheta")
    q.add_argument("--delta-fun", type=float, required=True, help="induced-chain threshold")
    q.add_argument("--gamma", type=float, default=0.1)
    q.set_defaults(func=cmd_partition_verify)

    p = sub.add_parser("martingale", parents=[common], help="martingale traces and checks")
    _input_opts(p)
    p.add_argument("--W", required=True, help="comma list of target states")
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--walks", type=int, default=1000)
    p.add_argument("--steps", type=int, default=None, help="walk length (default 4n)")
    p.add_argument("--start", type=int, default=None)
    p.add_argument("--check-walks", type=int, default=100,
                   help="walks whose every prefix gets the exact step check")
    p.set_defaults(func=cmd_martingale)

    p = sub.add_parser("spectral", parents=[common], help="spectrum and expander bounds")
    _input_opts(p)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--S", default=None, help="target set for bound tables (default 0)")
    p.add_argument("--t", default="1,2,4,8,16", help="horizons for bound tables")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("params", parents=[common], help="log-space constants")
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--D", type=float, default=None)
    p.set_defaults(func=cmd_params)
    return ap


def _manifest(args, digests, duration):
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "quiet", "threads", "command", "mode")}
    return {"command": " ".join(x for x in (args.command, getattr(args, "mode", None)) if x),
            "params": params, "seed": args.seed, "version": __version__,
            "inputs": digests, "duration_us": duration}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None and args.threads < 1:
        print("covertime: --threads must be positive", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        result, digests, summary = args.func(args)
    except CovertimeError as exc:
        print(f"covertime: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"covertime: {exc}", file=sys.stderr)
        return 2
    man = _manifest(args, digests, int(1e6 * (time.perf_counter() - t0)))
    sys.stdout.write(dumps({"manifest": man, "result": result}) + "\n")
    if not args.quiet:
        print(summary, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
