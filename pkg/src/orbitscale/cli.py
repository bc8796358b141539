"""Command line entry point: ``orbitscale <command> ...``.

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 precision cap reached.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from .basicfactor import factor_into_basics
from .bratteli import check_path_counts, conjugacy_check, diagram_from_Q, levels_for_orbit
from .errors import (InvalidInput, OrbitscaleError, PrecisionCapExceeded, UndecidableMembership)
from .euclid import iterate_algorithm
from .logistic import find_lambda, hofbauer_tower, kneading_map_of
from .odometer import cutting_times, expansion, odometer_successor, word_stats
from .pipeline import PipelineOptions, dumps, parse_group, parse_kneading, run_pipeline, verify_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from exc


def _emit(obj: dict, out: str | None) -> None:
    text = dumps(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_matrix(text: str) -> tuple[tuple[int, ...], ...]:
    try:
        return tuple(tuple(int(v) for v in row.split(",")) for row in text.split(";"))
    except ValueError as exc:
        raise InvalidInput(f"bad matrix {text!r}; use rows like '5,2;2,1'") from exc


# ---------------------------------------------------------------------------
# commands

def cmd_euclid_run(args) -> int:
    x = parse_group(_load_json(args.group))
    steps = iterate_algorithm(x, args.steps)
    rows = [{"step": i, "a": list(s.a), "sigma": list(s.sigma),
             "A": [list(r) for r in s.A.entries], "reconstruction_ok": s.reconstruction_ok(),
             "x_prime": [[str(c) for c in e.coeffs] for e in s.x_prime]}
            for i, s in enumerate(steps, start=1)]
    ok = all(r["reconstruction_ok"] for r in rows)
    _emit({"schema": 1, "basis": x[0].basis.labels, "steps": rows, "passed": ok}, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_pipeline_build(args) -> int:
    desc = _load_json(args.group)
    opts = PipelineOptions(levels=args.levels, K=args.K, n_steps=args.steps, depth=args.depth,
                           tol=Fraction(args.tol), max_bits=args.max_bits)
    report = run_pipeline(desc, opts)
    if args.out:
        report.write(args.out)
    else:
        sys.stdout.write(dumps(report.to_json()))
    for entry in report.ledger:
        print(f"{'PASS' if entry['pass'] else 'FAIL'} {entry['check']}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_factor(args) -> int:
    fc = factor_into_basics(_parse_matrix(args.matrix))
    _emit({"schema": 1, **fc.to_json()}, args.out)
    return EXIT_OK


def cmd_odometer_simulate(args) -> int:
    Q = parse_kneading(_load_json(args.Q))
    word = expansion(0, Q, 1)
    S = cutting_times(Q)
    rows = []
    for n in range(args.steps + 1):
        digits = (word.digits + (0,) * args.depth)[:args.depth]
        partial, first = word_stats(digits, args.depth - 1, Q)
        rows.append((n, "".join(map(str, digits)), partial, "" if first is None else first))
        if sum(s for s, d in zip(S, word.digits) if d) != n:
            print(f"orbit value mismatch at n = {n}", file=sys.stderr)
            return EXIT_FAIL
        if n < args.steps:
            word = odometer_successor(word, Q)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["n", "word", "sigma", "q"])
        w.writerows(rows)
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_bratteli_check(args) -> int:
    Q = parse_kneading(_load_json(args.Q))
    B = diagram_from_Q(Q, levels_for_orbit(Q, args.steps))
    if args.dot:
        Path(args.dot).write_text(B.to_dot())
    report = conjugacy_check(B, Q, args.steps, args.depth)
    counts = check_path_counts(B)
    _emit({"schema": 1, "conjugacy": report.to_json(), "path_counts_ok": counts,
           "passed": report.passed and counts}, args.out)
    return EXIT_OK if report.passed and counts else EXIT_FAIL


def cmd_logistic_find(args) -> int:
    Q = parse_kneading(_load_json(args.Q))
    param = find_lambda(Q, args.depth, Fraction(args.tol), max_bits=args.max_bits)
    back = kneading_map_of(param.lam, args.depth, bits=param.bits, max_bits=args.max_bits)
    ok = back.values[:args.depth + 1] == Q.values[:args.depth + 1]
    _emit({"schema": 1, "K": args.depth, "lambda": param.to_json(),
           "Q_back": list(back.values), "round_trip": ok}, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_logistic_tower(args) -> int:
    tower = hofbauer_tower(Fraction(args.lam), args.N, max_bits=args.max_bits)
    rows = tower.to_rows()
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[-1]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    if args.orbit:
        with open(args.orbit, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "c_lower", "c_upper"])
            w.writerows((r["n"], r["c_lower"], r["c_upper"]) for r in rows)
    _emit({"schema": 1, "lambda": args.lam, "N": tower.N, "bits": tower.bits,
           "cutting_times": list(tower.cutting_times)}, None)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify_suite(args.selector)
    _emit(report, args.out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orbitscale",
                                description="Certified pipeline from dimension groups to logistic parameters.")
    sub = p.add_subparsers(dest="command", required=True)

    eu = sub.add_parser("euclid", help="multidimensional Euclid algorithm").add_subparsers(dest="action", required=True)
    er = eu.add_parser("run", help="iterate on a positive non-increasing vector")
    er.add_argument("--group", required=True, help="descriptor JSON whose elements form x")
    er.add_argument("--steps", type=int, default=10)
    er.add_argument("--out", "--report", dest="out")
    er.set_defaults(func=cmd_euclid_run)

    pl = sub.add_parser("pipeline", help="end-to-end runs").add_subparsers(dest="action", required=True)
    pb = pl.add_parser("build", help="group (or multipliers) to lambda, with a pass/fail ledger")
    pb.add_argument("--group", required=True)
    pb.add_argument("--levels", type=int, default=4)
    pb.add_argument("--K", type=int, default=15, help="kneading depth for the parameter search")
    pb.add_argument("--steps", type=int, default=1000, help="orbit length for the conjugacy check")
    pb.add_argument("--depth", type=int, default=10)
    pb.add_argument("--tol", default="1e-12")
    pb.add_argument("--max-bits", type=int, default=512)
    pb.add_argument("--out", help="directory for report.json and orbit.csv")
    pb.set_defaults(func=cmd_pipeline_build)

    fa = sub.add_parser("factor", help="factor a qualifying matrix into basic matrices")
    fa.add_argument("--matrix", required=True, help="rows separated by ';', e.g. '5,2;2,1'")
    fa.add_argument("--out")
    fa.set_defaults(func=cmd_factor)

    od = sub.add_parser("odometer", help="generalized adding machine").add_subparsers(dest="action", required=True)
    osim = od.add_parser("simulate", help="write the orbit of 0 as CSV")
    osim.add_argument("--Q", required=True, help='JSON with "Q" or "multipliers"')
    osim.add_argument("--steps", type=int, default=100)
    osim.add_argument("--depth", type=int, default=12)
    osim.add_argument("--out")
    osim.set_defaults(func=cmd_odometer_simulate)

    br = sub.add_parser("bratteli", help="ordered diagram of a kneading map").add_subparsers(dest="action", required=True)
    bc = br.add_parser("check", help="orbit dictionary against the odometer")
    bc.add_argument("--Q", required=True)
    bc.add_argument("--steps", type=int, default=1000)
    bc.add_argument("--depth", type=int, default=10)
    bc.add_argument("--dot", help="write the diagram in DOT format")
    bc.add_argument("--out")
    bc.set_defaults(func=cmd_bratteli_check)

    lg = sub.add_parser("logistic", help="logistic family").add_subparsers(dest="action", required=True)
    lf = lg.add_parser("find", help="parameter with a prescribed kneading map")
    lf.add_argument("--Q", required=True)
    lf.add_argument("--depth", type=int, required=True, help="K: match S_0..S_K")
    lf.add_argument("--tol", default="1e-12")
    lf.add_argument("--max-bits", type=int, default=None)
    lf.add_argument("--out")
    lf.set_defaults(func=cmd_logistic_find)
    lt = lg.add_parser("tower", help="Hofbauer tower at a parameter")
    lt.add_argument("--lambda", dest="lam", required=True, help="exact decimal or fraction")
    lt.add_argument("--N", type=int, default=64)
    lt.add_argument("--max-bits", type=int, default=None)
    lt.add_argument("--csv")
    lt.add_argument("--orbit", help="write the critical orbit enclosures as CSV")
    lt.set_defaults(func=cmd_logistic_tower)

    ve = sub.add_parser("verify", help="run the property suites")
    ve.add_argument("selector", nargs="?", default="all")
    ve.add_argument("--out")
    ve.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInput, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PrecisionCapExceeded, UndecidableMembership) as exc:
        print(f"precision cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except OrbitscaleError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
