"""End-to-end runs from a group descriptor (or multiplier list) to a logistic
parameter, plus the quick property suites behind ``orbitscale verify``."""
from __future__ import annotations

import csv
import io
import json
import random
from functools import cmp_to_key
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from .basicfactor import (block_products, build_pipeline, chain_is_well_formed, chain_product,
                          equal_up_to_reindexing, factor_into_basics, basic_matrix,
                          property_one_violations)
from .bratteli import check_path_counts, conjugacy_check, diagram_from_Q, levels_for_orbit
from .errors import InvalidInput, OrbitscaleError
from .euclid import admissible_matrix, iterate_algorithm
from .hilbert import check_contraction, proj_diameter
from .logistic import (admissibility_checks, factor_map_check, find_lambda, hofbauer_tower,
                       kneading_map_of)
from .matrices import determinant
from .odometer import (KneadingMap, cutting_times, expansion, kneading_from_odometer,
                       kneading_from_vertex_sets, odometer_successor, rational_branch_dictionary)
from .reals import GroupElement, MasterBasis, same_lattice, sign_of

SCHEMA = 1


def _num(x: Fraction) -> str:
    return str(Fraction(x))


def dumps(obj) -> str:
    """Canonical JSON used for every report, so identical runs are byte-identical."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# descriptors

def parse_group(desc: dict) -> list[GroupElement]:
    """``{"basis": [...], "elements": [[coeff, ...], ...]}`` -> generators."""
    if desc.get("schema", SCHEMA) != SCHEMA:
        raise InvalidInput(f"unsupported schema {desc.get('schema')!r}")
    try:
        labels = desc["basis"]
        rows = desc["elements"]
    except KeyError as exc:
        raise InvalidInput(f"group descriptor lacks {exc.args[0]!r}") from exc
    basis = MasterBasis(labels)
    width = len(basis)
    out = []
    for row in rows:
        coeffs = [Fraction(str(c)) for c in row]
        if len(coeffs) > width:
            raise InvalidInput(f"element {row} has more coefficients than the basis")
        out.append(basis.element(coeffs + [0] * (width - len(coeffs))))
    if not out:
        raise InvalidInput("no group elements given")
    return out


def parse_kneading(desc: dict) -> KneadingMap:
    """``{"Q": [...]}`` or ``{"multipliers": [...], "depth": K}``."""
    if "Q" in desc:
        return KneadingMap(tuple(int(v) for v in desc["Q"]))
    if "multipliers" in desc:
        return kneading_from_odometer(desc["multipliers"], desc.get("depth"))
    raise InvalidInput("expected a 'Q' or 'multipliers' field")


# ---------------------------------------------------------------------------
# reports

@dataclass
class PipelineReport:
    descriptor: dict
    options: dict
    stages: dict = field(default_factory=dict)
    ledger: list = field(default_factory=list)
    orbit_rows: list = field(default_factory=list)
    error: str | None = None

    def record(self, check: str, ok: bool) -> bool:
        self.ledger.append({"check": check, "pass": bool(ok)})
        return ok

    @property
    def passed(self) -> bool:
        return self.error is None and all(e["pass"] for e in self.ledger)

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "descriptor": self.descriptor, "options": self.options,
                "stages": self.stages, "ledger": self.ledger, "error": self.error,
                "passed": self.passed}

    def orbit_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "word"])
        w.writerows(self.orbit_rows)
        return buf.getvalue()

    def write(self, out: str | Path) -> None:
        """Write ``report.json`` and ``orbit.csv`` into the directory ``out``."""
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dumps(self.to_json()))
        (out / "orbit.csv").write_text(self.orbit_csv())


@dataclass(frozen=True)
class PipelineOptions:
    levels: int = 4
    K: int = 15
    n_steps: int = 1000
    depth: int = 10
    tol: Fraction = Fraction(1, 10**12)
    max_bits: int = 512
    factor_n_max: int = 100
    orbit_sample: int = 64

    def to_json(self) -> dict:
        return {"levels": self.levels, "K": self.K, "n_steps": self.n_steps, "depth": self.depth,
                "tol": _num(self.tol), "max_bits": self.max_bits,
                "factor_n_max": self.factor_n_max, "orbit_sample": self.orbit_sample}


def run_pipeline(descriptor: dict, options: PipelineOptions | None = None) -> PipelineReport:
    """Run every stage in order; the first stage that raises aborts the run."""
    opts = options or PipelineOptions()
    report = PipelineReport(descriptor, opts.to_json())
    if "multipliers" in descriptor:
        _rational_branch(descriptor, opts, report)
        return report
    gens = parse_group(descriptor)
    p = build_pipeline(gens, opts.levels)
    vs = p.vertices

    report.stages["euclid"] = [{"level": lv.level, "iterations": lv.iterations,
                                "a": [list(a) for a in lv.euclid_a]} for lv in p.levels]
    report.record("euclid.identities", p.identities_ok())

    diam = []
    for ell, m in enumerate(p.matrices[1:], start=1):
        pv = proj_diameter(m)
        diam.append({"level": ell, "diameter": pv.to_json()})
        report.record(f"hilbert.diameter_le_1.level{ell}", not pv.infinite and pv.enclosure.upper <= 1)
    report.stages["hilbert"] = diam

    report.stages["factor"] = [lv.factor.to_json() for lv in p.levels]
    report.record("factor.chains_well_formed", all(chain_is_well_formed(lv.factor.chain) for lv in p.levels))
    report.record("factor.block_products", all(block_products(p)))

    report.stages["vertices"] = vs.to_json()
    report.record("vertices.new_vertices_in_blocks", not property_one_violations(vs))
    report.record("vertices.level0_row", p.matrices[0] == ((1, 1),))

    group = p.direct_limit()
    top = p.ranks[-1]
    states = [group.state_value(group.element(len(p.ranks) - 1, [int(i == j) for j in range(top)]))
              for i in range(top)]
    report.record("dimgroup.state_lattice", same_lattice(states, list(p.generators)))

    Q = kneading_from_vertex_sets(vs.vertex_sets)
    adm = admissibility_checks(Q, None, vs.q[2] if len(vs.q) > 2 else None)
    report.stages["kneading"] = {"Q": list(Q.values), "S": list(cutting_times(Q)),
                                 "admissibility": adm.to_json()}
    report.record("kneading.hofbauer", not adm.hofbauer_violations)
    report.record("kneading.improved_condition", not adm.improved_violations)

    J = min(Q.K, vs.J - 1)
    B = diagram_from_Q(Q, J)
    mats = B.transition_matrices()
    agree = all(_same_basic(B.levels[j], B.levels[j + 1], mats[j], vs.V(j), vs.V(j + 1))
                for j in range(1, min(len(mats), vs.J)))
    report.stages["bratteli"] = {"levels": B.depth, "vertices": [sorted(v) for v in B.levels],
                                 "level0": [list(r) for r in mats[0]]}
    report.record("bratteli.level0_matrix", mats[0] == ((1, 1),))
    report.record("bratteli.transitions_match_pipeline_sets", agree)
    report.record("bratteli.path_counts", check_path_counts(B))

    _orbit_stage(Q, opts, report)
    conj = conjugacy_check(None, Q, opts.n_steps, opts.depth)
    report.stages["conjugacy"] = conj.to_json()
    report.record("bratteli.conjugacy", conj.passed)

    _logistic_stage(Q, min(opts.K, Q.K - 1), opts, report)
    return report


def _same_basic(rows, cols, entries, V, Vp) -> bool:
    b = basic_matrix(V, Vp)
    return (tuple(rows), tuple(cols), tuple(map(tuple, entries))) == (b.rows, b.cols, b.entries)


def _orbit_stage(Q: KneadingMap, opts: PipelineOptions, report: PipelineReport) -> None:
    word = expansion(0, Q, 1)
    consistent = True
    for n in range(opts.orbit_sample):
        report.orbit_rows.append([n, str(word)])
        digits = word.digits
        consistent &= sum(s for s, d in zip(cutting_times(Q), digits) if d) == n
        word = odometer_successor(word, Q)
    report.stages["odometer"] = {"sample": opts.orbit_sample}
    report.record("odometer.orbit_values", consistent)


def _logistic_stage(Q: KneadingMap, K: int, opts: PipelineOptions, report: PipelineReport) -> None:
    param = find_lambda(Q, K, opts.tol, max_bits=opts.max_bits)
    back = kneading_map_of(param.lam, K, bits=param.bits, max_bits=opts.max_bits)
    report.stages["logistic"] = {"K": K, "lambda": param.to_json(), "Q_back": list(back.values)}
    report.record("logistic.round_trip", back.values[:K + 1] == Q.values[:K + 1])
    S = cutting_times(Q, K)
    n_max = min(opts.factor_n_max, S[K] - 1)
    depth = min(opts.depth, K - 1)
    fm = factor_map_check(param, Q, n_max, depth, max_bits=opts.max_bits)
    report.stages["factor_map"] = fm.to_json()
    report.record("logistic.factor_map", fm.passed)


def _rational_branch(descriptor: dict, opts: PipelineOptions, report: PipelineReport) -> None:
    m = [int(v) for v in descriptor["multipliers"]]
    Q = kneading_from_odometer(m, max(opts.K + 1, len(m)))
    S = cutting_times(Q)
    report.stages["kneading"] = {"Q": list(Q.values), "S": list(S)}
    prefix = [1]
    for v in m:
        prefix.append(prefix[-1] * v)
    report.record("kneading.scales_match_multipliers", all(p in S for p in prefix))
    d = rational_branch_dictionary(m, opts.n_steps)
    report.stages["dictionary"] = d
    report.record("odometer.dictionary", d["single_valued"] and d["injective"])
    _orbit_stage(Q, opts, report)
    _logistic_stage(Q, opts.K, opts, report)


# ---------------------------------------------------------------------------
# verification suites

def _suite_euclid(rng: random.Random) -> dict:
    basis = MasterBasis(["sqrt:2", "sqrt:3", "sqrt:5"])
    steps = bad = 0
    for _ in range(20):
        d = rng.randint(2, 4)
        xs: list[GroupElement] = []
        while len(xs) < d:
            e = basis.element([rng.randint(1, 5)] + [rng.randint(0, 3) for _ in range(len(basis) - 1)])
            if e not in xs:
                xs.append(e)
        xs.sort(key=cmp_to_key(lambda u, v: sign_of(v - u)))
        try:
            run = iterate_algorithm(xs, 6)
        except OrbitscaleError:
            continue
        for st in run:
            steps += 1
            square = st.d == st.d_prime
            if not st.reconstruction_ok() or (square and abs(determinant(st.A.entries)) != 1):
                bad += 1
    return {"steps": steps, "failures": bad, "passed": steps > 0 and bad == 0}


def _suite_hilbert(rng: random.Random) -> dict:
    mats = []
    for a1 in range(1, 11):
        mats.append(admissible_matrix((a1, 1), (2, 1)).entries)
    bad = checked = 0
    for a in mats:
        for b in mats:
            checked += 1
            bad += not check_contraction(a, b).bound_pass
    return {"pairs": checked, "failures": bad, "passed": bad == 0}


def _suite_factor(rng: random.Random) -> dict:
    m = ((5, 2), (2, 1))
    fc = factor_into_basics(m)
    fixed = fc.product().entries == m
    ok = tried = 0
    while tried < 20:
        a, b = rng.randint(5, 40), rng.randint(1, 20)
        c, e = rng.randint(1, 20), rng.randint(1, 20)
        cand = ((a, b), (c, e))
        try:
            fc = factor_into_basics(cand)
        except OrbitscaleError:
            continue
        tried += 1
        ok += equal_up_to_reindexing(chain_product(fc.chain), cand)
    return {"fixed_example": fixed, "random": tried, "reproduced": ok, "passed": fixed and ok == tried}


def _suite_pipeline(rng: random.Random) -> dict:
    r = run_pipeline({"schema": 1, "basis": ["sqrt:5"], "elements": [["1"], ["-1/2", "1/2"]]},
                     PipelineOptions(levels=3, K=10, n_steps=200, depth=8))
    return {"ledger": r.ledger, "passed": r.passed}


def _suite_odometer(rng: random.Random) -> dict:
    fib = KneadingMap((0, 0) + tuple(range(0, 14)))
    unique = all(expansion(n, fib, 10).digits == expansion(n, fib, 12).digits[:10] for n in range(89))
    d = rational_branch_dictionary((2, 2, 2), 512)
    return {"expansions_stable": unique, "dyadic_dictionary": d["single_valued"] and d["injective"],
            "passed": unique and d["single_valued"] and d["injective"]}


def _suite_bratteli(rng: random.Random) -> dict:
    fib = KneadingMap((0, 0) + tuple(range(0, 30)))
    B = diagram_from_Q(fib, levels_for_orbit(fib, 1000))
    conj = conjugacy_check(B, fib, 1000, 8)
    counts = check_path_counts(B)
    return {"conjugacy": conj.passed, "path_counts": counts, "passed": conj.passed and counts}


def _suite_logistic(rng: random.Random) -> dict:
    four = hofbauer_tower(4, 21)
    exact = four.cutting_times[:21] == tuple(range(1, 22))
    feig = KneadingMap((0,) + tuple(range(0, 12)))
    param = find_lambda(feig, 8, max_bits=512)
    round_trip = param.cutting_times == tuple(2**k for k in range(9))
    return {"lambda4_exact": exact, "feigenbaum_K8": round_trip, "passed": exact and round_trip}


SUITES: dict[str, Callable[[random.Random], dict]] = {
    "euclid": _suite_euclid,
    "hilbert": _suite_hilbert,
    "factor": _suite_factor,
    "pipeline": _suite_pipeline,
    "odometer": _suite_odometer,
    "bratteli": _suite_bratteli,
    "logistic": _suite_logistic,
}


def verify_suite(selector: str = "all") -> dict:
    if selector == "all":
        names = list(SUITES)
    elif selector in SUITES:
        names = [selector]
    else:
        raise InvalidInput(f"unknown suite {selector!r}; choose from {', '.join(['all', *SUITES])}")
    results = {}
    for name in names:
        try:
            results[name] = SUITES[name](random.Random(0))
        except OrbitscaleError as exc:
            results[name] = {"passed": False, "error": f"{type(exc).__name__}: {exc}"}
    return {"schema": SCHEMA, "suites": results, "passed": all(r["passed"] for r in results.values())}
