"""Acceptance criteria, one test each; verdicts are collected and printed at the end of the run."""

import os
import random
import time

import pytest

from conftest import LP_AUDIT, audit_lp, fixture_set, load_file, oracle_set, record, scholl_dir
from oracles import bin_packing_lp, brute_knapsack, covering_lp, exact_covering_lp, lb3_fraction
from ualb.bounds import lb1, lb2, lb3, lb123
from ualb.colgen import ceil_tol, cg_lower_bound
from ualb.heuristic import mhhu
from ualb.instance import Instance, bits, verify_solution
from ualb.knapsack import solve_pricing
from ualb.master import MasterProblem
from ualb.search import oracle_solve, solve

TIME_LIMIT = 500.0
VALUE_TOL = 1e-9      # pricing value
LP_TOL = 1e-6         # master objective vs exact LP, dual-bound slack

# (instance, n, c, optimum); file stems as distributed with the SALBP-1 data set
BENCHMARK_OPTIMA = [
    ("Kilbridge", 45, 56, 10),
    ("Barthol2", 148, 85, 50), ("Barthol2", 148, 89, 48), ("Barthol2", 148, 93, 46), ("Barthol2", 148, 97, 44),
    ("Mukherje", 94, 176, 24),
    ("Tonge", 70, 160, 22), ("Tonge", 70, 176, 20),
    ("Warnecke", 58, 54, 31), ("Warnecke", 58, 62, 26), ("Warnecke", 58, 65, 25), ("Warnecke", 58, 68, 23),
    ("Warnecke", 58, 74, 22), ("Warnecke", 58, 82, 19),
    ("Wee-mag", 75, 47, 32), ("Wee-mag", 75, 49, 32), ("Wee-mag", 75, 50, 32),
    ("Arcus1", 83, 3786, 21),
]
STEMS = {
    "Kilbridge": ("KILBRID", "KILBRIDG", "KILBRIDGE"),
    "Barthol2": ("BARTHOL2",),
    "Mukherje": ("MUKHERJE",),
    "Tonge": ("TONGE70", "TONGE"),
    "Warnecke": ("WARNECKE",),
    "Wee-mag": ("WEE-MAG", "WEEMAG"),
    "Arcus1": ("ARC83", "ARCUS1"),
    "Scholl": ("SCHOLL",),
}


def find_instance(name: str):
    folder = scholl_dir()
    if not folder.is_dir():
        return None
    files = {p.stem.upper(): p for p in folder.iterdir() if p.suffix.upper() == ".IN2"}
    for stem in STEMS[name]:
        if stem in files:
            return files[stem]
    return None


# -- 1 --------------------------------------------------------------------------

def test_criterion_1_benchmark_optima():
    missing = sorted({name for name, *_ in BENCHMARK_OPTIMA if find_instance(name) is None})
    failures = []
    solved = 0
    for name, n, c, opt in BENCHMARK_OPTIMA:
        path = find_instance(name)
        if path is None:
            continue
        inst = load_file(path, c)
        assert inst.n == n, f"{path.name}: expected n={n}, file has {inst.n}"
        rep = solve(inst, time_limit=TIME_LIMIT)
        if not (rep.lb == rep.ub == opt and rep.status == "optimal"):
            failures.append(f"{name} c={c}: lb={rep.lb} ub={rep.ub} status={rep.status}, want {opt}")
        else:
            solved += 1
    if failures:
        record(1, "FAIL", "; ".join(failures))
        pytest.fail("; ".join(failures))
    if missing:
        record(1, "XFAIL", f"benchmark files not found in {scholl_dir()}: {', '.join(missing)} "
                           f"({solved} present rows solved)")
        pytest.xfail(f"benchmark data missing: {', '.join(missing)}")
    record(1, "PASS", f"{solved}/{len(BENCHMARK_OPTIMA)} rows proven optimal")


# -- 2 --------------------------------------------------------------------------

def test_criterion_2_hard_instance_bounds():
    path = find_instance("Scholl")
    if path is None:
        record(2, "XFAIL", f"SCHOLL.IN2 not found in {scholl_dir()}")
        pytest.xfail("benchmark data missing: Scholl")
    inst = load_file(path, 1422)
    assert inst.n == 297
    rep = solve(inst, time_limit=TIME_LIMIT)
    ok = rep.lb == 49 and rep.ub == 50
    record(2, "PASS" if ok else "FAIL", f"lb={rep.lb} ub={rep.ub} status={rep.status} (want 49/50)")
    assert ok


# -- 3 --------------------------------------------------------------------------

def test_criterion_3_oracle_equivalence():
    start = time.perf_counter()
    insts = oracle_set(100)
    mismatches = []
    for k, inst in enumerate(insts):
        opt = oracle_solve(inst)
        for use_cg in (True, False):
            for use_memory in (True, False):
                rep = solve(inst, use_cg=use_cg, use_memory=use_memory)
                if not (rep.status == "optimal" and rep.lb == rep.ub == opt
                        and verify_solution(inst, rep.solution)[0]):
                    mismatches.append((k, use_cg, use_memory, rep.lb, rep.ub, opt))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 120
    record(3, "PASS" if ok else "FAIL",
           f"{len(insts)} instances x 4 configurations, {len(mismatches)} mismatches, {elapsed:.1f}s (limit 120s)")
    assert not mismatches, mismatches[:5]
    assert elapsed < 120


# -- 4 --------------------------------------------------------------------------

def test_criterion_4_lower_bound_properties():
    cases = [(inst, oracle_solve(inst)) for inst in oracle_set(100)] + fixture_set()
    violations = []
    for k, (inst, opt) in enumerate(cases):
        U = inst.full
        lpm = bin_packing_lp(list(inst.t), inst.c)
        classic = lb123(inst, U)
        res = cg_lower_bound(inst, U)
        if res.terminated_by in ("converged", "lemma1") and res.lower_bound != ceil_tol(lpm):
            violations.append((k, "cg differs from converged LP", res.lower_bound, lpm))
        if ceil_tol(lpm) < classic or res.lower_bound < classic:
            violations.append((k, "cg below LB1-3", res.lower_bound, classic))
        if res.lower_bound > opt:
            violations.append((k, "cg above optimum", res.lower_bound, opt))
        for v, value in res.trace:
            if v / max(value, 1.0) > lpm + LP_TOL:
                violations.append((k, "dual bound above v(LPM)", v / value, lpm))
    # exact-third boundaries: t = c/3 and t = 2c/3 in many combinations
    rng = random.Random(5)
    for _ in range(500):
        c = 3 * rng.randint(1, 20)
        times = [rng.choice([c // 3, 2 * c // 3, c // 3 + 1, max(1, c // 3 - 1), c]) for _ in range(rng.randint(1, 14))]
        inst = Instance(times, c, [])
        if lb3(inst, inst.full).value != lb3_fraction(times, c):
            violations.append(("lb3", times, c))
    ok = not violations
    record(4, "PASS" if ok else "FAIL", f"{len(cases)} instances + 500 boundary cases, {len(violations)} violations")
    assert ok, violations[:5]


# -- 5 --------------------------------------------------------------------------

def test_criterion_5_pricing():
    rng = random.Random(2024)
    worst = 0.0
    for _ in range(200):
        k = rng.randint(1, 15)
        c = rng.randint(1, 40)
        times = [rng.randint(1, c) for _ in range(k)]
        duals = [rng.random() if rng.random() > 0.1 else 0.0 for _ in range(k)]
        inst = Instance(times, c, [])
        res = solve_pricing(inst, inst.full, duals)
        worst = max(worst, abs(res.value - brute_knapsack(times, duals, c)))
        assert res.load.total_time <= c
    ok = worst <= VALUE_TOL
    record(5, "PASS" if ok else "FAIL", f"200 dual vectors, max |DP - brute force| = {worst:.2e} (tol {VALUE_TOL})")
    assert ok


# -- 6 --------------------------------------------------------------------------

def test_criterion_6_master_lp():
    rng = random.Random(606)
    worst = 0.0
    local_violations = 0
    checked = 0
    while checked < 100:
        m = rng.randint(1, 8)
        cols = {rng.randint(1, (1 << m) - 1) for _ in range(rng.randint(1, 20))}
        covered = 0
        for mask in cols:
            covered |= mask
        if covered != (1 << m) - 1:
            continue
        mp = MasterProblem(range(m), sorted(cols))
        sol = mp.solve()
        exact = exact_covering_lp([list(bits(mask)) for mask in sorted(cols)], m)
        worst = max(worst, abs(sol.objective - float(exact)))
        assert abs(covering_lp([list(bits(mask)) for mask in sorted(cols)], m) - float(exact)) < 1e-6
        local_violations += bool(audit_lp(mp, sol))
        checked += 1
    audit_bad = len(LP_AUDIT["violations"])
    ok = worst <= LP_TOL and local_violations == 0 and audit_bad == 0
    record(6, "PASS" if ok else "FAIL",
           f"100 covering LPs, max |obj - exact| = {worst:.2e} (tol {LP_TOL}); "
           f"{LP_AUDIT['solves']} audited solves so far, {audit_bad} certificate violations "
           "(final whole-run count printed below)")
    assert ok


# -- 7 --------------------------------------------------------------------------

def test_criterion_7_heuristic(example11):
    bad = []
    cases = fixture_set() + [(inst, oracle_solve(inst)) for inst in oracle_set(100)]
    for k, (inst, opt) in enumerate(cases):
        sol = mhhu(inst)
        ok, msg = verify_solution(inst, sol.stations)
        if not ok or sol.m < opt:
            bad.append((k, msg, sol.m, opt))
    rep = solve(example11)
    example_ok = rep.lb == rep.ub == 5 and rep.closed_at_root
    ok = not bad and example_ok
    record(7, "PASS" if ok else "FAIL",
           f"{len(cases)} MHHU runs, {len(bad)} invalid; example fixture root lb={rep.root_lb} ub={rep.ub}")
    assert ok, bad[:5]


# -- 8 --------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_8_full_sweep(tmp_path):
    manifest = os.environ.get("UALB_SWEEP_MANIFEST")
    if not manifest:
        record(8, "SKIP", "optional long run; set UALB_SWEEP_MANIFEST to a file,c,lb,ub CSV")
        pytest.skip("optional full sweep not requested")
    from ualb.cli import RunConfig, run_sweep
    rows, agg = run_sweep(manifest, os.environ.get("UALB_SWEEP_DATA"), RunConfig(time_limit=TIME_LIMIT))
    stats = dict(agg)
    ok = stats["contradictions"] == "0"
    record(8, "PASS" if ok else "FAIL",
           f"{stats['instances']} instances, {stats['optimal_verified']} proven, "
           f"{stats['contradictions']} contradictions")
    assert ok
