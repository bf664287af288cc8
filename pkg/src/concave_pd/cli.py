"""``concave-pd`` command line: generate | solve | verify | bench | trace.

Exit codes: 0 ok, 1 certificate failure, 2 usage error.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import csv
import io
import json
from pathlib import Path
import sys
import time

from .facility import solve_concave_flpd, solve_expanded_flpd
from .generate import ALL_FAMILIES, EXACT_FAMILIES, GeneratorSpec, default_seed, generate
from .instances import InstanceError, dumps_instance, instance_from_json
from .jrp import solve_concave_jrppd, solve_generalized_jrppd
from .lotsizing import solve_classical_lspd, solve_concave_lspd, solve_expanded_lspd
from .numeric import BACKENDS, FLOAT, RATIONAL, leq
from .oracles import (
    DEFAULT_LIMIT,
    FL_BOUND,
    JRP_BOUND,
    LS_BOUND,
    LimitExceeded,
    brute_force_flp,
    brute_force_jrp,
    check_certificate,
    dp_lot_sizing,
)

EXIT_OK, EXIT_CERT, EXIT_USAGE = 0, 1, 2

KIND_ALIASES = {"fl": "facility_location", "ls": "lot_sizing"}
ALGORITHMS = {
    "flpd": "facility_location",
    "concave-flpd": "facility_location",
    "lspd": "lot_sizing",
    "concave-lspd": "lot_sizing",
    "jrppd": "jrp",
    "concave-jrppd": "jrp",
}
DEFAULT_ALG = {"facility_location": "concave-flpd", "lot_sizing": "concave-lspd", "jrp": "concave-jrppd"}
BOUNDS = {"facility_location": FL_BOUND, "lot_sizing": LS_BOUND, "jrp": JRP_BOUND}
BENCH_FIELDS = ["kind", "alg", "m", "n", "K", "seed", "primal", "dual", "ratio", "time_ms"]


class UsageError(Exception):
    pass


def _lspd(inst, trace):
    return solve_classical_lspd(inst, trace=trace) if inst.is_classical else solve_expanded_lspd(inst, trace=trace)


def solve_instance(inst, alg=None, trace=True, limit=DEFAULT_LIMIT):
    """Run ``alg`` on ``inst``; returns ``(solution, seconds)``."""
    alg = alg or DEFAULT_ALG[inst.kind]
    if ALGORITHMS.get(alg) != inst.kind:
        raise UsageError(f"algorithm {alg} does not solve {inst.kind} instances")
    start = time.perf_counter()
    if alg == "flpd":
        sol = solve_expanded_flpd(inst, trace=trace)
    elif alg == "concave-flpd":
        sol = solve_concave_flpd(inst, trace=trace)
    elif alg == "lspd":
        sol = _lspd(inst, trace)
    elif alg == "concave-lspd":
        sol = solve_concave_lspd(inst, trace=trace)
    elif alg == "jrppd":
        sol = solve_generalized_jrppd(inst, trace=trace, limit=limit)
    else:
        sol = solve_concave_jrppd(inst, trace=trace)
    return sol, time.perf_counter() - start


def optimum(inst, limit=DEFAULT_LIMIT):
    if inst.kind == "facility_location":
        return brute_force_flp(inst, limit=limit)[0]
    if inst.kind == "lot_sizing":
        return dp_lot_sizing(inst)[0]
    return brute_force_jrp(inst, limit=limit)[0]


def summary_line(kind, alg, sol, seconds):
    return f"{kind} {alg} {float(sol.primal_cost):.10g} {float(sol.dual_value):.10g} {float(sol.ratio):.10g} {seconds * 1000:.3f}"


def load(path, backend):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read instance {path}: {exc}") from None
    return instance_from_json(obj, backend)


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text)


def _kind(name):
    return KIND_ALIASES.get(name, name)


# subcommands


def cmd_generate(args):
    families = tuple(args.families.split(",")) if args.families else (EXACT_FAMILIES if args.backend == RATIONAL else ALL_FAMILIES)
    spec = GeneratorSpec(
        kind=_kind(args.kind),
        m=args.m,
        n=args.n,
        K=args.K,
        seed=args.seed if args.seed is not None else default_seed(),
        families=families,
        max_pieces=args.max_pieces,
        backend=args.backend,
    )
    _write(args.out, dumps_instance(generate(spec)))
    return EXIT_OK


def _solution_path(args):
    if args.out:
        return args.out
    p = Path(args.instance)
    return str(p.with_name(p.stem + ".solution.json"))


def cmd_solve(args):
    inst = load(args.instance, args.backend)
    sol, secs = solve_instance(inst, args.alg, trace=bool(args.trace), limit=args.limit)
    alg = args.alg or DEFAULT_ALG[inst.kind]
    _write(_solution_path(args), json.dumps(sol.to_json(), sort_keys=True))
    if args.trace:
        _write(args.trace, json.dumps(sol.trace.to_json()))
    print(summary_line(inst.kind, alg, sol, secs))
    cert = check_certificate(inst.kind, inst, sol, seed=args.seed)
    if not cert.passed:
        print("certificate failed: " + "; ".join(cert.violations), file=sys.stderr)
        return EXIT_CERT
    return EXIT_OK


def cmd_verify(args):
    inst = load(args.instance, args.backend)
    sol, secs = solve_instance(inst, args.alg, trace=False, limit=args.limit)
    cert = check_certificate(inst.kind, inst, sol, seed=args.seed, samples=args.samples)
    out = cert.to_json()
    if args.oracle:
        try:
            opt = optimum(inst, limit=args.limit)
        except LimitExceeded as exc:
            out["optimum"] = None
            out["oracle"] = str(exc)
        else:
            out["optimum"] = float(opt)
            bound = BOUNDS[inst.kind]
            if not leq(sol.primal_cost, bound * opt):
                out["pass"] = False
                out["violations"].append(f"primal exceeds {float(bound)} x optimum")
    _write(args.out, json.dumps(out, sort_keys=True))
    print(summary_line(inst.kind, args.alg or DEFAULT_ALG[inst.kind], sol, secs))
    return EXIT_OK if out["pass"] else EXIT_CERT


def cmd_trace(args):
    inst = load(args.instance, args.backend)
    sol, _ = solve_instance(inst, args.alg, trace=True, limit=args.limit)
    _write(args.trace or args.out, json.dumps(sol.trace.to_json()))
    return EXIT_OK


def _expand_case(case):
    def as_list(x, default):
        if x is None:
            return [default]
        return list(x) if isinstance(x, (list, tuple)) else [x]

    kind = _kind(case["kind"])
    alg = case.get("alg", DEFAULT_ALG.get(kind))
    backend = case.get("backend", FLOAT)
    families = tuple(case.get("families", ALL_FAMILIES if backend == FLOAT else EXACT_FAMILIES))
    out = []
    for seed in as_list(case.get("seeds"), 0):
        for m in as_list(case.get("m"), 0):
            for n in as_list(case.get("n"), 1):
                for K in as_list(case.get("K"), 1):
                    out.append((kind, alg, m, n, K, seed, backend, families, case.get("max_pieces", 3)))
    return out


def bench_one(job):
    kind, alg, m, n, K, seed, backend, families, pieces = job
    spec = GeneratorSpec(kind=kind, m=m, n=n, K=K, seed=seed, families=families, max_pieces=pieces, backend=backend)
    inst = generate(spec)
    sol, secs = solve_instance(inst, alg, trace=False)
    return {
        "kind": kind,
        "alg": alg,
        "m": m if kind == "facility_location" else "",
        "n": n,
        "K": K if kind == "jrp" else "",
        "seed": seed,
        "primal": f"{float(sol.primal_cost):.10g}",
        "dual": f"{float(sol.dual_value):.10g}",
        "ratio": f"{float(sol.ratio):.10g}",
        "time_ms": f"{secs * 1000:.3f}",
    }


def run_bench(cases, workers=1):
    """CSV text for a suite; rows ordered by (seed, size) regardless of workers."""
    jobs = []
    for case in cases:
        jobs.extend(_expand_case(case))
    jobs.sort(key=lambda j: (j[5], j[2], j[3], j[4], j[0], j[1]))
    for job in jobs:
        GeneratorSpec(kind=job[0], m=job[2], n=job[3], K=job[4], seed=job[5], families=job[7], max_pieces=job[8], backend=job[6]).validate()
        if ALGORITHMS.get(job[1]) != job[0]:
            raise UsageError(f"algorithm {job[1]} does not solve {job[0]} instances")
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(bench_one, jobs))
    else:
        rows = [bench_one(j) for j in jobs]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def cmd_bench(args):
    if args.suite:
        try:
            with open(args.suite) as fh:
                suite = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read suite {args.suite}: {exc}") from None
        cases = suite.get("cases", []) if isinstance(suite, dict) else suite
    elif args.kind:
        case = {"kind": args.kind, "backend": args.backend, "seeds": args.seeds or [default_seed()]}
        for key in ("alg", "m", "n", "K"):
            val = getattr(args, key)
            if val:
                case[key] = val
        cases = [case]
    else:
        cases = []
    _write(args.out, run_bench(cases, workers=args.workers))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="concave-pd", description="Primal-dual solvers for concave cost problems.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--kind", required=True, choices=["facility_location", "lot_sizing", "jrp", "fl", "ls"])
    g.add_argument("--m", type=int, default=0)
    g.add_argument("--n", type=int, default=1)
    g.add_argument("--K", type=int, default=1)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--families", default=None, help="comma separated cost families")
    g.add_argument("--max-pieces", type=int, default=3)
    g.add_argument("--backend", choices=BACKENDS, default=RATIONAL)
    g.add_argument("-o", "--out", default=None)
    g.set_defaults(func=cmd_generate)

    def solver_args(q):
        q.add_argument("instance")
        q.add_argument("--alg", choices=sorted(ALGORITHMS), default=None)
        q.add_argument("--backend", choices=BACKENDS, default=RATIONAL)
        q.add_argument("--trace", default=None, metavar="OUT_JSON")
        q.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
        q.add_argument("--seed", type=int, default=None)
        q.add_argument("-o", "--out", default=None)

    s = sub.add_parser("solve", help="solve an instance and check its certificate")
    solver_args(s)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="certificate plus optional brute-force comparison")
    solver_args(v)
    v.add_argument("--oracle", action="store_true")
    v.add_argument("--samples", type=int, default=20)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("trace", help="export the event trace")
    solver_args(t)
    t.set_defaults(func=cmd_trace)

    b = sub.add_parser("bench", help="time a suite and write CSV")
    b.add_argument("--suite", default=None, help="JSON suite file")
    b.add_argument("--kind", choices=["facility_location", "lot_sizing", "jrp", "fl", "ls"], default=None)
    b.add_argument("--alg", choices=sorted(ALGORITHMS), default=None)
    b.add_argument("--m", type=int, nargs="*")
    b.add_argument("--n", type=int, nargs="*")
    b.add_argument("--K", type=int, nargs="*")
    b.add_argument("--seeds", type=int, nargs="*")
    b.add_argument("--backend", choices=BACKENDS, default=FLOAT)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("-o", "--out", default=None)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "seed", None) is None and args.command != "generate" and hasattr(args, "seed"):
        args.seed = default_seed()
    try:
        return args.func(args)
    except (UsageError, InstanceError, LimitExceeded) as exc:
        print(f"concave-pd: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
