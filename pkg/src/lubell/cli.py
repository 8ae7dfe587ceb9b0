"""Command-line front end: ``lubell <command> ...``.

Exit codes: 0 success, 1 a verified claim failed, 2 usage or input error,
3 a search stopped at its node or time limit.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import chains as ch
from .claims import exit_code, verify_all
from .family import (FamilyError, SetFamily, construction, dk_bounds, dumps_family, family_height, fmt_rational,
                     load_family, lubell, middle_levels)
from .poset import PosetError, dumps_pattern, e_lower, height, parse_pattern_spec
from .search import (SearchConfig, SearchError, canonical_form, default_threads, find_family_of_size, la_exact,
                     max_lubell)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PARTIAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _out(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _family_arg(path: str) -> SetFamily:
    try:
        return load_family(path)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except FamilyError as e:
        raise UsageError(f"{path}: {e}") from None


def _pattern_arg(spec: str):
    try:
        return parse_pattern_spec(spec)
    except (PosetError, TypeError, ValueError) as e:
        raise UsageError(f"bad pattern {spec!r}: {e}") from None


def _config(args) -> SearchConfig:
    try:
        return SearchConfig(
            prune_lubell=not args.no_prune_lubell,
            prune_height=not args.no_prune_height,
            use_symmetry=not args.no_symmetry,
            exclude_full_set=args.exclude_full_set,
            thread_budget=args.threads,
            node_limit=args.node_limit,
            time_limit=args.time_limit,
        )
    except SearchError as e:
        raise UsageError(str(e)) from None


# --- commands -----------------------------------------------------------------

def cmd_lubell(args) -> int:
    f = _family_arg(args.file)
    _out(f"lubell={fmt_rational(lubell(f))} size={len(f)} height={family_height(f)}")
    return EXIT_OK


def cmd_search(args) -> int:
    p = _pattern_arg(args.pattern)
    cfg = _config(args)
    try:
        if args.objective == "la":
            out = la_exact(args.n, p, cfg, all_witnesses=args.all_witnesses)
        elif args.objective == "maxlubell":
            out = max_lubell(args.n, p, args.require_empty, cfg, all_witnesses=args.all_witnesses)
        else:
            if args.target is None:
                raise UsageError("search size needs --target")
            res = find_family_of_size(args.n, p, args.target, cfg)
            status = "found" if res.found else ("none" if res.completed else "unknown")
            _out(f"search size n={args.n} pattern={p} target={args.target} result={status} "
                 f"completed={str(res.completed).lower()} nodes={res.nodes_explored}")
            if res.found:
                _out(dumps_family(res.family))
            return EXIT_OK if res.completed else EXIT_PARTIAL
    except SearchError as e:
        raise UsageError(str(e)) from None
    _out(out.serialize())
    return EXIT_OK if out.completed else EXIT_PARTIAL


def cmd_verify(args) -> int:
    budget = None if args.time_budget < 0 else args.time_budget

    def echo(r):
        _out(r.json() if args.json else r.line())
        sys.stdout.flush()

    try:
        results = verify_all(budget, args.claims, args.only, echo)
    except (OSError, ValueError, KeyError) as e:
        raise UsageError(f"cannot load claims table: {e}") from None
    if not args.json:
        counts = {s: sum(1 for r in results if r.status == s) for s in ("pass", "fail", "partial", "skipped")}
        _out(" ".join(f"{k}={v}" for k, v in counts.items()))
    return exit_code(results)


def _construction_names(n: int) -> dict:
    """Canonical forms of balanced C_i(S,T) and their conjugates, by name."""
    from .family import conjugate

    names = {}
    for s in sorted({n // 2, (n + 1) // 2}):
        for i in (1, 2, 3):
            f = construction(i, s, n)
            names.setdefault(canonical_form(f), f"C{i}({s},{n - s})")
            names.setdefault(canonical_form(conjugate(f)), f"C{i}({s},{n - s})^c")
    return names


def cmd_probe(args) -> int:
    from .poset import diamond

    n = args.n
    cfg = _config(args)
    try:
        out = max_lubell(n, diamond(2), False, cfg, all_witnesses=True)
    except SearchError as e:
        raise UsageError(str(e)) from None
    conj = 2 + Fraction(n * n // 4, n * (n - 1)) if n > 1 else None
    names = _construction_names(n) if n >= 2 else {}
    labels = [names.get(canonical_form(w), "other") for w in out.witnesses]
    opt = "none" if out.optimum is None else fmt_rational(out.optimum)
    _out(f"probe n={n} max={opt} conjectured={fmt_rational(conj) if conj is not None else 'none'} "
         f"completed={str(out.completed).lower()} classes={len(out.witnesses)} "
         f"all_constructions={str(bool(labels) and 'other' not in labels).lower()}")
    for w, label in zip(out.witnesses, labels):
        _out(f"class {label}")
        _out(dumps_family(w))
    return EXIT_OK if out.completed else EXIT_PARTIAL


def cmd_chains(args) -> int:
    f = _family_arg(args.file)
    try:
        if args.samples:
            mean, err = ch.lubell_monte_carlo(f, args.samples, args.seed, args.threads)
            _out(f"montecarlo samples={args.samples} seed={args.seed} mean={fmt_rational(mean)} "
                 f"mean_float={float(mean):.6f} stderr_float={float(err):.6f}")
            return EXIT_OK
        build = {"deleted": ch.partition_by_deleted_element, "min": ch.min_partition,
                 "minmax": ch.minmax_partition}[args.partition]
        blocks = build(f)
    except ch.ChainError as e:
        raise UsageError(str(e)) from None
    sys.stdout.write(ch.emit_report(blocks))
    return EXIT_OK


def cmd_pattern(args) -> int:
    p = _pattern_arg(args.spec)
    sys.stdout.write(dumps_pattern(p))
    _out(f"height={height(p)} e_lower(n<={args.n_max})={e_lower(p, args.n_max)}")
    return EXIT_OK


def parse_family_spec(spec: str) -> SetFamily:
    """``c1:s=2,n=4`` (C_i([s], [n]-[s])) or ``middle:n=4,k=2[,variant=high]``."""
    kind, _, rest = spec.partition(":")
    try:
        kv = dict(item.split("=", 1) for item in rest.split(",") if item)
        if kind in ("c1", "c2", "c3"):
            return construction(int(kind[1]), int(kv["s"]), int(kv["n"]))
        if kind == "middle":
            return middle_levels(int(kv["n"]), int(kv["k"]), kv.get("variant", "low"))
    except (KeyError, ValueError) as e:
        raise UsageError(f"bad family spec {spec!r}: {e}") from None
    raise UsageError(f"bad family spec {spec!r}")


def cmd_family(args) -> int:
    f = parse_family_spec(args.spec)
    sys.stdout.write(dumps_family(f))
    return EXIT_OK


def cmd_bounds(args) -> int:
    try:
        r = dk_bounds(args.k)
    except FamilyError as e:
        raise UsageError(str(e)) from None
    _out(f"k={r.k} m={r.m} case={r.case_tag} lower={fmt_rational(r.lower)} upper={fmt_rational(r.upper)}")
    return EXIT_OK


# --- parser ---------------------------------------------------------------------

def _search_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--threads", type=int, default=default_threads(),
                    help="worker processes (default from $LUBELL_THREADS, else 1)")
    sp.add_argument("--time-limit", type=float, default=None)
    sp.add_argument("--node-limit", type=int, default=None)
    sp.add_argument("--no-symmetry", action="store_true")
    sp.add_argument("--no-prune-lubell", action="store_true")
    sp.add_argument("--no-prune-height", action="store_true")
    sp.add_argument("--exclude-full-set", action="store_true")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lubell", description="Lubell function, chain partitions and forbidden-subposet search.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("lubell", help="exact Lubell value, size and height of a family file")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_lubell)

    sp = sub.add_parser("search", help="exact search over P-free families")
    sp.add_argument("objective", choices=["la", "maxlubell", "size"])
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--pattern", required=True)
    sp.add_argument("--require-empty", action="store_true")
    sp.add_argument("--target", type=int)
    sp.add_argument("--all-witnesses", action="store_true", help="list every extremal class, not just one")
    _search_flags(sp)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("verify", help="recompute every claim in the expected-value table")
    sp.add_argument("--time-budget", type=float, default=900.0, help="seconds shared by searches; negative = unlimited")
    sp.add_argument("--claims", default=None, help="alternative expected-value table (JSON)")
    sp.add_argument("--only", nargs="*", default=None, help="claim ids to run")
    sp.add_argument("--json", action="store_true", help="one JSON ClaimResult per line")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("probe", help="max Lubell of D2-free families vs the conjectured value")
    sp.add_argument("--n", type=int, required=True)
    _search_flags(sp)
    sp.set_defaults(func=cmd_probe)

    sp = sub.add_parser("chains", help="chain partition report or Monte Carlo estimate")
    sp.add_argument("file")
    sp.add_argument("--partition", choices=["deleted", "min", "minmax"], default="min")
    sp.add_argument("--samples", type=int, default=0, help="Monte Carlo samples instead of a partition")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=default_threads())
    sp.set_defaults(func=cmd_chains)

    sp = sub.add_parser("pattern", help="print a pattern in DSL form with its height and middle-level check")
    sp.add_argument("spec")
    sp.add_argument("--n-max", type=int, default=6)
    sp.set_defaults(func=cmd_pattern)

    sp = sub.add_parser("family", help="write a named construction as a family file")
    sp.add_argument("spec", help="c1:s=2,n=4 | c2:... | c3:... | middle:n=4,k=2[,variant=high]")
    sp.set_defaults(func=cmd_family)

    sp = sub.add_parser("bounds", help="k-diamond Lubell bounds")
    sp.add_argument("--k", type=int, required=True)
    sp.set_defaults(func=cmd_bounds)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        sys.stderr.write(f"lubell: error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
