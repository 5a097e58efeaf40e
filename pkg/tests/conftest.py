import os
import random
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ualb import kernels  # noqa: E402
from ualb.instance import Instance, load_file  # noqa: E402
from ualb.master import MasterProblem  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"
EXAMPLE11 = FIXTURES / "example11.IN2"


def random_instance(rng: random.Random, n: int, density: float | None = None,
                    c: int | None = None) -> Instance:
    """Random DAG (arcs i<j with probability ``density``) and t ~ U[1, c]."""
    if density is None:
        density = rng.uniform(0.1, 0.5)
    if c is None:
        c = rng.randint(4, 20)
    t = [rng.randint(1, c) for _ in range(n)]
    arcs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    perm = list(range(n))
    rng.shuffle(perm)  # hide the topological order from index-based tie breaks
    return Instance([t[perm.index(k)] for k in range(n)], c,
                    [(perm[i], perm[j]) for i, j in arcs])


def oracle_set(count: int = 100, seed: int = 20240601, max_n: int = 11) -> list[Instance]:
    rng = random.Random(seed)
    return [random_instance(rng, rng.randint(1, max_n)) for _ in range(count)]


def fixture_set():
    """The 20 vendored small fixtures as (instance, frozen optimum)."""
    out = [(load_file(EXAMPLE11, 10), 5)]
    manifest = FIXTURES / "small" / "manifest.csv"
    for line in manifest.read_text().splitlines()[1:]:
        name, c, opt = line.split(",")
        out.append((load_file(FIXTURES / "small" / name, int(c)), int(opt)))
    return out


@pytest.fixture
def example11():
    return load_file(EXAMPLE11, 10)


@pytest.fixture
def chain3():
    return Instance([4, 4, 4], 8, [(0, 1), (1, 2)])


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request):
    return kernels.backends()[request.param]


def scholl_dir() -> Path:
    return Path(os.environ.get("UALB_SCHOLL_DIR", FIXTURES / "scholl"))


# -- LP audit -------------------------------------------------------------------
# Every master solve in the session is re-checked here, independently of the
# solver's own certificate: primal cover, dual feasibility on all stored
# columns, and strong duality.

LP_AUDIT = {"solves": 0, "violations": []}


def audit_lp(mp, sol):
    A = np.zeros((mp.m, len(mp.columns)))
    for k, mask in enumerate(mp.columns):
        for i, j in enumerate(mp.rows):
            if mask >> j & 1:
                A[i, k] = 1.0
    pi = np.array([sol.duals[j] for j in mp.rows])
    problems = []
    if mp.m and (A @ sol.primal < 1 - 1e-7).any():
        problems.append("primal cover")
    if (pi < 0).any() or (mp.columns and (pi @ A > 1 + 1e-7).any()):
        problems.append("dual feasibility")
    if abs(pi.sum() - sol.objective) > 1e-6:
        problems.append("strong duality")
    return problems


@pytest.fixture(autouse=True, scope="session")
def _lp_audit():
    original = MasterProblem.solve

    def audited(self, *args, **kwargs):
        sol = original(self, *args, **kwargs)
        LP_AUDIT["solves"] += 1
        problems = audit_lp(self, sol)
        if problems:
            LP_AUDIT["violations"].append((self.rows, list(self.columns), problems))
        return sol

    MasterProblem.solve = audited
    yield
    MasterProblem.solve = original


# -- acceptance summary -----------------------------------------------------------

ACCEPTANCE: dict[int, tuple[str, str]] = {}


def record(criterion: int, verdict: str, detail: str) -> None:
    ACCEPTANCE[criterion] = (verdict, detail)
    print(f"criterion {criterion}: {verdict} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE and not LP_AUDIT["solves"]:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        verdict, detail = ACCEPTANCE[k]
        tr.write_line(f"criterion {k}: {verdict} {detail}")
    bad = len(LP_AUDIT["violations"])
    tr.write_line(f"LP audit over the whole run: {LP_AUDIT['solves']} master solves, {bad} certificate violations"
                  f" -> {'PASS' if bad == 0 else 'FAIL'}")
