"""Command-line front end.

Exit codes: 0 success, 1 a finding (violation, failed verification, no
certificate), 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import random
import sys
from importlib import resources
from pathlib import Path

from . import bounds, certifier, pade, primes_ap
from ._mp import mp, to_str
from .padic import LinearFormInstance, eval_Fp
from .sieve import is_prime

EXIT_OK, EXIT_FINDING, EXIT_USAGE = 0, 1, 2
DEFAULT_ALPHAS = (1, -1, 2, -2, 3)
DEFAULT_SEED = 20240101


class UsageError(ValueError):
    pass


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _emit(args, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)


def load_instance(path: str | None) -> LinearFormInstance:
    """Read an instance file; the bundled sample when ``path`` is None."""
    try:
        if path is None:
            text = resources.files("eulerpadic").joinpath("data/sample_instance.json").read_text()
        else:
            text = Path(path).read_text()
        return LinearFormInstance.from_dict(json.loads(text))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot load instance {path or '(bundled sample)'}: {exc}") from exc


def _instance_from_args(args) -> LinearFormInstance:
    if getattr(args, "example", None):
        k, m = args.example
        try:
            return bounds.example_instance(k, m, lower=args.lower, budget=args.budget)
        except bounds.BudgetExceeded as exc:
            raise UsageError(str(exc)) from exc
    return load_instance(args.instance)


# ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    if args.M < 1:
        raise UsageError("--M must be positive")
    if not is_prime(args.p):
        raise UsageError(f"--p {args.p} is not prime")
    _emit(args, eval_Fp(args.t, args.p, args.M).to_dict())
    return EXIT_OK


def _pade_grid(args):
    alphas = args.alphas
    if args.k < 1 or args.nmax < 1 or len(set(alphas)) < args.k or 0 in alphas:
        raise UsageError("empty grid: need k >= 1, nmax >= 1 and at least k distinct nonzero alphas")
    for k in range(1, args.k + 1):
        for al in itertools.combinations(sorted(set(alphas), key=lambda a: (abs(a), a)), k):
            for n in range(1, args.nmax + 1):
                for mu in range(k + 1):
                    yield al, n, mu


def cmd_pade_verify(args) -> int:
    grid = list(_pade_grid(args))
    if args.samples:
        grid = random.Random(args.seed).sample(grid, min(args.samples, len(grid)))
    failures = []
    checks = 0
    for al, n, mu in grid:
        for j in range(1, len(al) + 1):
            checks += 1
            if not pade.verify_order(n, mu, al, j):
                failures.append({"alphas": al, "n": n, "mu": mu, "j": j, "check": "order"})
        if args.bounds:
            b = pade.coefficient_bounds(n, mu, al)
            if abs(pade.B0_at_one(n, mu, al)) > b.B0:
                failures.append({"alphas": al, "n": n, "mu": mu, "check": "B0"})
            for j in range(1, len(al) + 1):
                if abs(pade.Bj_at_one(n, mu, al, j)) > b.Bj[j - 1]:
                    failures.append({"alphas": al, "n": n, "mu": mu, "j": j, "check": "Bj"})
    _emit(args, {"grid_points": len(grid), "checks": checks, "failures": failures, "passed": not failures})
    return EXIT_OK if not failures else EXIT_FINDING


def cmd_primes_scan(args) -> int:
    if args.m < 3:
        raise UsageError("--m must be >= 3")
    checks = args.checks.split(",")
    bad = [c for c in checks if c not in primes_ap.CHECKS]
    if bad:
        raise UsageError(f"unknown checks {bad}; choose from {','.join(primes_ap.CHECKS)}")
    limit = max(args.sieve_limit or 0, args.x_max)
    table = primes_ap.SieveTable(limit)
    classes = args.classes or None
    try:
        summaries = primes_ap.scan_margins(table, args.m, classes, x_hi=args.x_max, x_lo=args.x_min,
                                           checks=checks, grid_step=args.grid_step, workers=args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    violations = sum(s.n_violations for s in summaries)
    if args.format == "json":
        _emit(args, {"summaries": [s.to_dict() for s in summaries], "violations": violations})
    else:
        out = open(args.output, "w", newline="") if args.output else sys.stdout
        w = csv.writer(out)
        w.writerow(primes_ap.CSV_COLUMNS)
        step = args.grid_step
        for s in summaries:
            start = primes_ap._start_of(s.check, args.m)
            if step:
                # rows below the hypothesis range are listed but not evaluated
                for x in range(args.x_min, min(start, args.x_max + 1), step):
                    w.writerow([x, args.m, s.a, "", "", "", "", False, s.check])
            for r in s.rows:
                w.writerow([r.x, r.m, r.a, repr(r.lhs), repr(r.rhs), repr(r.margin), repr(r.margin_radius),
                            r.hypothesis_ok, r.check])
        if args.output:
            out.close()
        print(json.dumps({"checked": sum(s.n_checked for s in summaries), "violations": violations,
                          "uncertified": sum(s.n_uncertified for s in summaries)}), file=sys.stderr)
    return EXIT_FINDING if violations else EXIT_OK


def cmd_bounds_eval(args) -> int:
    inst = _instance_from_args(args)
    consts = bounds.constants_for(inst)
    logH = mp.mpf(args.logH)
    hyp = bounds.check_H_hypotheses(inst, consts, logH, args.epsilon, args.s)
    out = {"instance": inst.to_dict(), "constants": consts.to_dict(), "hypotheses": hyp.to_dict()}
    try:
        n1 = bounds.n_threshold_N1(inst, consts, logH) if consts.D > 0 else None
        out["n_N1"] = None if n1 is None else str(n1)
        if n1 is not None:
            out["upper_bounds_N1"] = [u.to_dict() for u in bounds.n_upper_bounds(inst, consts, logH, n=n1)]
    except bounds.ThresholdOutOfRange as exc:
        out["n_N1"] = f"out of range: {exc}"
    if args.epsilon is not None:
        try:
            n2 = bounds.n_threshold_N2(inst, consts.c1, args.epsilon, logH)
            out["n_N2"] = None if n2 is None else str(n2)
            if n2 is not None:
                out["upper_bounds_N2"] = [u.to_dict() for u in bounds.n_upper_bounds(inst, consts, logH, args.epsilon, n=n2)]
        except bounds.ThresholdOutOfRange as exc:
            out["n_N2"] = f"out of range: {exc}"
    out["exponents"] = bounds.lower_bound_exponents(inst, consts, logH, args.epsilon).to_dict()
    _emit(args, out)
    return EXIT_OK


def cmd_certify(args) -> int:
    inst = _instance_from_args(args)
    if args.theorem2:
        rep = certifier.theorem2_report(inst, args.prime_limit, args.M_start)
        _emit(args, rep.to_dict())
        return EXIT_OK if rep.certificate is not None else EXIT_FINDING
    try:
        cert = certifier.search_nonvanishing(inst, args.prime_limit, args.M_start, workers=args.threads)
    except certifier.NoCertificateFound as exc:
        _emit(args, {"instance": inst.to_dict(), "certificate": None, "undetermined": exc.levels})
        return EXIT_FINDING
    _emit(args, {"instance": inst.to_dict(), "certificate": cert.to_dict(), "recheck": cert.recheck()})
    return EXIT_OK


def cmd_contradiction(args) -> int:
    inst = _instance_from_args(args)
    rep = certifier.contradiction_scan(inst, args.n_max, args.n_min)
    if rep is None:
        _emit(args, {"instance": inst.to_dict(), "turnover": None})
        return EXIT_FINDING
    _emit(args, {"instance": inst.to_dict(), "turnover": rep.n, "report": rep.to_dict()})
    return EXIT_OK


def _pipeline_exit(rep) -> int:
    return EXIT_OK if rep.status in ("ok", "hypothesis-scale") else EXIT_FINDING


def cmd_theorem3(args) -> int:
    inst = _instance_from_args(args)
    rep = certifier.theorem3_pipeline(inst, mp.mpf(args.logH), relaxed=not args.strict,
                                      prime_budget=args.prime_budget, M_start=args.M_start)
    _emit(args, rep.to_dict())
    return _pipeline_exit(rep)


def cmd_theorem5(args) -> int:
    inst = _instance_from_args(args)
    rep = certifier.theorem5_pipeline(inst, mp.mpf(args.logH), args.epsilon, args.s, relaxed=not args.strict,
                                      prime_budget=args.prime_budget, M_start=args.M_start)
    _emit(args, rep.to_dict())
    return _pipeline_exit(rep)


# ---------------------------------------------------------------------------


def _add_instance_args(p) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--instance", help="instance JSON file (default: the bundled sample)")
    g.add_argument("--example", type=_ints, metavar="K,M", help="build alpha_i = i p for the given k, m")
    p.add_argument("--lower", type=int, default=None, help="lower end of the prime search for --example")
    p.add_argument("--budget", type=int, default=bounds.DEFAULT_BUDGET, help="prime search budget for --example")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eulerpadic", description=__doc__.splitlines()[0],
                                     allow_abbrev=False)
    parser.add_argument("--config", help="JSON file of default option values")
    parser.add_argument("--threads", type=int, default=1, help="worker cap")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for sampled grids")
    parser.add_argument("--sieve-limit", type=int, default=None, help="sieve table size")
    parser.add_argument("--output", help="write output here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)
    _orig = sub.add_parser
    sub.add_parser = lambda *a, **kw: _orig(*a, allow_abbrev=False, **kw)

    p = sub.add_parser("eval", help="F_p(t) mod p^M")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pade-verify", help="order-of-contact grid check")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--nmax", type=int, default=6)
    p.add_argument("--alphas", type=_ints, default=list(DEFAULT_ALPHAS))
    p.add_argument("--bounds", action="store_true", help="also check the archimedean coefficient bounds")
    p.add_argument("--samples", type=int, default=0, help="check a seeded random subset of this size")
    p.set_defaults(func=cmd_pade_verify)

    p = sub.add_parser("primes-scan", help="margins of the explicit prime estimates")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--classes", type=_ints, default=None)
    p.add_argument("--x-max", type=int, required=True)
    p.add_argument("--x-min", type=int, default=2)
    p.add_argument("--checks", default=",".join(primes_ap.CHECKS))
    p.add_argument("--grid-step", type=int, default=None, help="emit a row every this many x")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_primes_scan)

    p = sub.add_parser("bounds-eval", help="constants, hypotheses, thresholds and exponents")
    _add_instance_args(p)
    p.add_argument("--logH", type=str, required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--s", type=float, default=None)
    p.set_defaults(func=cmd_bounds_eval)

    p = sub.add_parser("certify", help="search for a nonvanishing certificate")
    _add_instance_args(p)
    p.add_argument("--prime-limit", type=int, default=1000)
    p.add_argument("--M-start", type=int, default=1)
    p.add_argument("--theorem2", action="store_true", help="wrap the search in a hypothesis report")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("contradiction", help="scan n for the product to drop below one")
    _add_instance_args(p)
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--n-min", type=int, default=1)
    p.set_defaults(func=cmd_contradiction)

    for name, fn in (("theorem3", cmd_theorem3), ("theorem5", cmd_theorem5)):
        p = sub.add_parser(name, help=f"{name} pipeline (desk-relaxed unless --strict)")
        _add_instance_args(p)
        p.add_argument("--logH", type=str, required=True)
        if name == "theorem5":
            p.add_argument("--epsilon", type=float, required=True)
            p.add_argument("--s", type=float, required=True)
        p.add_argument("--strict", action="store_true", help="stop when a hypothesis fails")
        p.add_argument("--prime-budget", type=int, default=certifier.DESK_PRIME_BUDGET)
        p.add_argument("--M-start", type=int, default=1)
        p.set_defaults(func=fn)
    return parser


def _apply_config(parser, argv) -> None:
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    parser.set_defaults(**cfg)
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.set_defaults(**cfg)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
