import itertools
import random

import pytest

from conftest import fixture_set, oracle_set, random_instance
from oracles import brute_maximal_loads, u_optimum
from ualb.heuristic import HeuristicParams
from ualb.instance import Instance, verify_solution
from ualb.search import Memory, Node, branch, jackson_dominated, oracle_solve, solve

WEAK = (HeuristicParams(0.0, 0.0, 0.0, load_cap=1),)  # forces real branching


def root(inst):
    return Node(0, 0, 0, 0, None, 0, inst.total_time)


def test_branch_chain(chain3):
    loads = {child.load for child in branch(chain3, root(chain3))}
    assert 0b011 in loads and 0b110 in loads and 0b001 not in loads
    assert loads == brute_maximal_loads(chain3, 0)
    for child in branch(chain3, root(chain3)):
        assert child.m == 1 and child.remaining_time == 12 - chain3.time_of(child.load)


def test_branch_one_task_left(chain3):
    node = Node(0b011, 1, 1, 0, root(chain3), 0b011, 4)
    (child,) = branch(chain3, node)
    assert child.assigned == chain3.full and child.m == 2


def test_branch_rejects_complete(chain3):
    node = Node(chain3.full, 2, 2, 0, None, chain3.full, 0)
    with pytest.raises(ValueError):
        branch(chain3, node)


def test_oracle_examples(example11, chain3):
    assert oracle_solve(example11) == 5
    assert oracle_solve(chain3) == 2
    assert oracle_solve(Instance([1, 2, 3], 6, [(0, 1)])) == 1
    with pytest.raises(ValueError):
        oracle_solve(Instance([1] * 13, 13, []))


def test_oracle_agrees_with_task_dp():
    for inst in oracle_set(60, seed=73):
        assert oracle_solve(inst) == u_optimum(inst)


def test_fixture_optima():
    for inst, opt in fixture_set():
        rep = solve(inst, time_limit=60)
        assert rep.status == "optimal" and rep.lb == rep.ub == opt
        assert verify_solution(inst, rep.solution) == (True, "")


def test_example11_closes_at_root(example11):
    rep = solve(example11)
    assert rep.lb == rep.ub == 5 and rep.closed_at_root and rep.root_lb == 5


@pytest.mark.parametrize("use_cg, use_memory, use_jackson",
                         list(itertools.product([True, False], repeat=3)))
def test_matches_oracle_with_weak_heuristic(use_cg, use_memory, use_jackson):
    rng = random.Random(79)
    for _ in range(40):
        inst = random_instance(rng, rng.randint(2, 11))
        rep = solve(inst, use_cg=use_cg, use_memory=use_memory, use_jackson=use_jackson, grid=WEAK)
        assert rep.status == "optimal"
        assert rep.lb == rep.ub == oracle_solve(inst)
        assert verify_solution(inst, rep.solution)[0] and len(rep.solution) == rep.ub


def test_memory_only_saves_nodes():
    rng = random.Random(83)
    for _ in range(40):
        inst = random_instance(rng, rng.randint(4, 11))
        on = solve(inst, use_cg=False, grid=WEAK)
        off = solve(inst, use_cg=False, use_memory=False, grid=WEAK)
        assert (on.lb, on.ub) == (off.lb, off.ub)
        assert on.nodes_explored <= off.nodes_explored


def test_history_monotone():
    rng = random.Random(89)
    for _ in range(30):
        inst = random_instance(rng, rng.randint(4, 11))
        rep = solve(inst, grid=WEAK)
        lbs = [lb for _, lb, _ in rep.history]
        ubs = [ub for _, _, ub in rep.history]
        assert lbs == sorted(lbs) and ubs == sorted(ubs, reverse=True)
        assert all(lb <= ub for _, lb, ub in rep.history)


def test_jackson_filter_is_sound():
    # every filtered load is matched by some kept load that reaches the same optimum
    rng = random.Random(97)
    for _ in range(60):
        inst = random_instance(rng, rng.randint(2, 10))
        assigned = 0
        kept = {c.load for c in branch(inst, root(inst), jackson=True)}
        every = {c.load for c in branch(inst, root(inst), jackson=False)}
        assert kept <= every and kept
        assert all(not jackson_dominated(inst, assigned, load) for load in kept)
        best_every = min(oracle_after(inst, load) for load in every)
        best_kept = min(oracle_after(inst, load) for load in kept)
        assert best_kept == best_every


def oracle_after(inst, load):
    rest = [j for j in range(inst.n) if not load >> j & 1]
    if not rest:
        return 1
    return 1 + oracle_solve(_restrict(inst, load))


def _restrict(inst, done):
    """Instance over the tasks not in ``done``; arcs into done tasks vanish.

    Availability on the residual graph matches availability at ``done``
    because closures through finished tasks are already satisfied.
    """
    keep = [j for j in range(inst.n) if not done >> j & 1]
    idx = {j: k for k, j in enumerate(keep)}
    arcs = [(idx[i], idx[j]) for i in keep for j in keep if inst.all_succ[i] >> j & 1]
    return Instance([inst.t[j] for j in keep], inst.c, arcs)


def test_maximal_loads_keep_the_optimum():
    # optimum over maximal-load trees equals the unrestricted oracle
    for inst in oracle_set(40, seed=101, max_n=10):
        rep = solve(inst, use_cg=False, use_jackson=False, grid=WEAK)
        assert rep.ub == oracle_solve(inst)


def test_memory_table():
    mem = Memory(cap=2)
    mem.admit(0b1, 3)
    assert mem.dominated(0b1, 3) and mem.dominated(0b1, 4) and not mem.dominated(0b1, 2)
    mem.admit(0b1, 2)
    assert mem.table[0b1] == 2
    mem.admit(0b10, 1)
    mem.admit(0b100, 1)
    assert mem.full and 0b100 not in mem.table
    mem.admit(0b10, 0)
    assert mem.table[0b10] == 0  # lowering still allowed once full


def test_memory_cap_status():
    rng = random.Random(103)
    for _ in range(30):
        inst = random_instance(rng, rng.randint(6, 11))
        rep = solve(inst, use_cg=False, memory_cap=1, grid=WEAK)
        assert rep.lb == rep.ub == oracle_solve(inst)
        assert rep.status == "optimal"


def test_time_limit_reports_timeout():
    rng = random.Random(107)
    inst = random_instance(rng, 60, density=0.05, c=37)
    rep = solve(inst, time_limit=1e-9, grid=WEAK)
    assert rep.status in ("timeout", "optimal")
    assert rep.lb <= rep.ub
    assert verify_solution(inst, rep.solution)[0]
    if rep.status == "timeout":
        assert rep.lb < rep.ub


def test_node_limit_keeps_valid_bounds():
    rng = random.Random(109)
    for _ in range(20):
        inst = random_instance(rng, rng.randint(6, 11))
        opt = oracle_solve(inst)
        rep = solve(inst, use_cg=False, node_limit=1, grid=WEAK)
        assert rep.lb <= opt <= rep.ub
