"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 148]
"""

import argparse
import random
import sys
import timeit
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from conftest import random_instance  # noqa: E402
from ualb import kernels  # noqa: E402
from ualb.heuristic import HeuristicParams, contributions  # noqa: E402
from ualb.instance import bits  # noqa: E402


def enumerator(mod, inst):
    preds = [list(bits(p)) for p in inst.direct_pred]
    succs = [list(bits(s)) for s in inst.direct_succ]
    return mod.LoadEnumerator(list(inst.t), inst.c, preds, succs)


def greedy_pass(mod, inst, fc, bc):
    enum = enumerator(mod, inst)
    state = 0
    while state != inst.full:
        state |= enum.best_load(state, fc, bc, 50_000)[0]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=148)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    mods = kernels.backends()
    if "cython" not in mods:
        print("compiled extension not built; run `python setup.py build_ext --inplace` first")
    rng = random.Random(args.seed)
    inst = random_instance(rng, args.n, density=0.08, c=60)
    fc, bc = contributions(inst, HeuristicParams(0.01, 0.01, 0.02))
    weights = [rng.randint(1, 500) for _ in range(300)]
    values = [rng.random() for _ in range(300)]

    cases = {
        "knapsack 300 items, c=2000": lambda m: m.knapsack_max(weights, values, 2000),
        f"heuristic pass n={args.n}": lambda m: greedy_pass(m, inst, fc, bc),
        f"maximal loads at root n={args.n}": lambda m: enumerator(m, inst).maximal_loads(0),
    }
    print(f"{'case':40s} " + " ".join(f"{name:>12s}" for name in mods) + "   speedup")
    for label, fn in cases.items():
        times = {}
        for name, mod in mods.items():
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        cells = " ".join(f"{times[name] * 1e3:10.2f}ms" for name in mods)
        speed = f"{times['python'] / times['cython']:8.1f}x" if "cython" in times else ""
        print(f"{label:40s} {cells} {speed}")


if __name__ == "__main__":
    main()
