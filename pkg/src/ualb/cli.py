"""Command-line batch harness: ``solve``, ``bounds`` and ``sweep``."""

from __future__ import annotations

import argparse
import csv
import io
import logging
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .bounds import lb1_value, lb2_value, lb3_value
from .colgen import cg_lower_bound
from .heuristic import DEFAULT_GRID, HeuristicParams, mhhu
from .instance import InstanceError, load_file, verify_solution
from .search import DEFAULT_MEMORY_CAP, DEFAULT_TIME_LIMIT, solve

log = logging.getLogger("ualb")

SOLVE_COLUMNS = [
    "name", "n", "c", "lb", "ub", "status", "nodes", "nodes_pruned_lb123", "nodes_pruned_cg",
    "nodes_pruned_memory", "columns", "cpu_seconds", "mhhu_ub", "closed_at_root",
]
BOUNDS_COLUMNS = ["name", "n", "c", "status", "lb1", "lb2", "lb3", "cg", "cg_cpu_seconds", "best_ub"]
SWEEP_EXTRA = ["published_lb", "published_ub", "contradiction"]
INSTANCE_SUFFIXES = (".in2", ".alb")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    paths: list[str]
    cycle_times: list[int] | None = None
    time_limit: float = DEFAULT_TIME_LIMIT
    no_cg: bool = False
    no_memory: bool = False
    no_jackson: bool = False
    grid: tuple[HeuristicParams, ...] = DEFAULT_GRID
    out: str | None = None
    workers: int = 1
    memory_cap: int = DEFAULT_MEMORY_CAP
    best_known: str | None = None

    def validate(self) -> None:
        if not self.time_limit > 0:
            raise ConfigError(f"time limit must be positive, got {self.time_limit}")
        if self.workers < 1:
            raise ConfigError(f"worker count must be at least 1, got {self.workers}")
        if self.memory_cap < 1:
            raise ConfigError("memory cap must be at least 1")
        if self.cycle_times is not None and any(c <= 0 for c in self.cycle_times):
            raise ConfigError("cycle times must be positive")
        if not self.grid:
            raise ConfigError("heuristic grid is empty")


@dataclass(frozen=True)
class Job:
    path: str
    cycle_time: int | None  # None: take it from the file

    @property
    def name(self) -> str:
        return Path(self.path).stem


# -- argument helpers ------------------------------------------------------------

def parse_grid(text: str) -> tuple[HeuristicParams, ...]:
    """``"a,b,g;a,b,g"`` -> parameter triples."""
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 3:
            raise ConfigError(f"grid entry {chunk!r} must be alpha,beta,gamma")
        try:
            a, b, g = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"grid entry {chunk!r} is not numeric") from exc
        out.append(HeuristicParams(a, b, g))
    if not out:
        raise ConfigError("heuristic grid is empty")
    return tuple(out)


def parse_cycle_times(text: str) -> list[int]:
    try:
        values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"cycle time list {text!r} is not a list of integers") from exc
    if not values:
        raise ConfigError("empty cycle time list")
    return values


def expand_inputs(paths: Iterable[str]) -> list[str]:
    out: list[str] = []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            found = sorted(str(q) for q in path.iterdir()
                           if q.is_file() and q.suffix.lower() in INSTANCE_SUFFIXES)
            out.extend(found)
        else:
            out.append(str(path))
    return out


def make_jobs(config: RunConfig) -> list[Job]:
    files = expand_inputs(config.paths)
    if not files:
        raise ConfigError("no input files")
    jobs = []
    for f in files:
        if config.cycle_times:
            jobs.extend(Job(f, c) for c in config.cycle_times)
        elif Path(f).suffix.lower() == ".alb":
            jobs.append(Job(f, None))
        else:
            raise ConfigError(f"{f}: a cycle time (--cycle-time) is required for .IN2 inputs")
    return jobs


# -- per-instance work ---------------------------------------------------------------

def _error_row(job: Job, columns: Sequence[str], message: str) -> dict:
    row = dict.fromkeys(columns, "")
    row["name"] = job.name
    row["c"] = job.cycle_time if job.cycle_time is not None else ""
    row["status"] = "parse_error"
    log.warning("%s: %s", job.path, message)
    return row


def _load(job: Job):
    return load_file(job.path, job.cycle_time)


def solve_job(job: Job, config: RunConfig) -> dict:
    try:
        inst = _load(job)
    except (InstanceError, OSError, UnicodeDecodeError) as exc:
        return _error_row(job, SOLVE_COLUMNS, str(exc))
    cpu0 = time.process_time()
    report = solve(inst, time_limit=config.time_limit, memory_cap=config.memory_cap,
                   use_cg=not config.no_cg, use_memory=not config.no_memory,
                   use_jackson=not config.no_jackson, grid=config.grid)
    cpu = time.process_time() - cpu0
    ok, msg = verify_solution(inst, report.solution)
    if not ok or len(report.solution) != report.ub:
        raise RuntimeError(f"{job.path}: solver returned an invalid solution: {msg}")
    log.info("%s c=%d: lb=%d ub=%d %s %.2fs", job.name, inst.c, report.lb, report.ub, report.status, cpu)
    return {
        "name": job.name,
        "n": inst.n,
        "c": inst.c,
        "lb": report.lb,
        "ub": report.ub,
        "status": report.status,
        "nodes": report.nodes_explored,
        "nodes_pruned_lb123": report.nodes_pruned_lb123,
        "nodes_pruned_cg": report.nodes_pruned_cg,
        "nodes_pruned_memory": report.nodes_pruned_memory,
        "columns": report.columns_generated,
        "cpu_seconds": f"{cpu:.3f}",
        "mhhu_ub": report.mhhu_ub,
        "closed_at_root": int(report.closed_at_root),
    }


def bounds_job(job: Job, config: RunConfig) -> dict:
    try:
        inst = _load(job)
    except (InstanceError, OSError, UnicodeDecodeError) as exc:
        return _error_row(job, BOUNDS_COLUMNS, str(exc))
    full = inst.full
    seed = mhhu(inst, 0, config.grid)
    cpu0 = time.process_time()
    cg = cg_lower_bound(inst, full, None, [st.mask for st in seed.stations])
    cpu = time.process_time() - cpu0
    return {
        "name": job.name,
        "n": inst.n,
        "c": inst.c,
        "status": "ok",
        "lb1": lb1_value(inst, full),
        "lb2": lb2_value(inst, full),
        "lb3": lb3_value(inst, full),
        "cg": cg.lower_bound,
        "cg_cpu_seconds": f"{cpu:.3f}",
        "best_ub": "",
    }


def _run(fn, jobs: Sequence[Job], config: RunConfig) -> list[dict]:
    if config.workers == 1 or len(jobs) <= 1:
        return [fn(job, config) for job in jobs]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(fn, jobs, [config] * len(jobs)))


# -- aggregates ----------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.4f}"


def _dev_stats(prefix: str, pairs: Sequence[tuple[int, int]], relative_to: str) -> list[tuple[str, str]]:
    """avg/max relative (percent) and absolute deviation over ``(lb, ub)`` pairs."""
    if not pairs:
        return [(f"{prefix}rel_dev_avg", ""), (f"{prefix}rel_dev_max", ""),
                (f"{prefix}abs_dev_avg", ""), (f"{prefix}abs_dev_max", "")]
    rel = []
    for lb, ub in pairs:
        base = lb if relative_to == "lb" else ub
        rel.append((ub - lb) / base * 100 if base > 0 else 0.0)
    absd = [ub - lb for lb, ub in pairs]
    return [
        (f"{prefix}rel_dev_avg", _fmt(statistics.fmean(rel))),
        (f"{prefix}rel_dev_max", _fmt(max(rel))),
        (f"{prefix}abs_dev_avg", _fmt(statistics.fmean(absd))),
        (f"{prefix}abs_dev_max", str(max(absd))),
    ]


def solve_aggregate(rows: Sequence[dict], best_known: dict[tuple[str, int], int] | None = None) -> list[tuple[str, str]]:
    solved = [r for r in rows if r["status"] != "parse_error"]
    verified = [r for r in solved if r["status"] == "optimal"]
    if best_known:
        found = sum(1 for r in solved if (key := (r["name"].lower(), int(r["c"]))) in best_known
                    and int(r["ub"]) <= best_known[key])
    else:
        found = len(verified)
    cpu_all = [float(r["cpu_seconds"]) for r in solved]
    cpu_ver = [float(r["cpu_seconds"]) for r in verified]
    out = [
        ("instances", str(len(rows))),
        ("parse_errors", str(len(rows) - len(solved))),
        ("optimal_found", str(found)),
        ("optimal_verified", str(len(verified))),
    ]
    out += _dev_stats("", [(int(r["lb"]), int(r["ub"])) for r in solved], "lb")
    out += [
        ("cpu_avg_verified", _fmt(statistics.fmean(cpu_ver)) if cpu_ver else ""),
        ("cpu_avg_all", _fmt(statistics.fmean(cpu_all)) if cpu_all else ""),
        ("cpu_mean", _fmt(statistics.fmean(cpu_all)) if cpu_all else ""),
        ("cpu_stddev", _fmt(statistics.stdev(cpu_all)) if len(cpu_all) > 1 else ("0.0000" if cpu_all else "")),
        ("cpu_min", _fmt(min(cpu_all)) if cpu_all else ""),
        ("cpu_max", _fmt(max(cpu_all)) if cpu_all else ""),
    ]
    return out


def bounds_aggregate(rows: Sequence[dict]) -> list[tuple[str, str]]:
    rated = [r for r in rows if r["status"] != "parse_error" and r["best_ub"] != ""] if rows else []
    out = [("instances", str(len(rows))), ("with_best_known", str(len(rated)))]
    for key in ("lb1", "lb2", "lb3", "cg"):
        out += _dev_stats(f"{key}_", [(int(r[key]), int(r["best_ub"])) for r in rated], "ub")
    return out


def read_best_known(path: str | None) -> dict[tuple[str, int], int] | None:
    """``name,c,ub`` CSV -> {(lowercase name, c): ub}; None when absent or unreadable."""
    if path is None:
        return None
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            table = {}
            for rec in csv.DictReader(fh):
                table[(Path(rec["name"].strip()).stem.lower(), int(rec["c"]))] = int(rec["ub"])
            return table
    except (OSError, KeyError, ValueError) as exc:
        log.warning("best-known file %s not usable (%s); deviations omitted", path, exc)
        return None


# -- output ---------------------------------------------------------------------------

def render(columns: Sequence[str], rows: Sequence[dict], aggregate: Sequence[tuple[str, str]]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        for k in columns:
            r.setdefault(k, "")
        w.writerow(r)
    buf.write("\n")
    aw = csv.writer(buf, lineterminator="\n")
    aw.writerow(["metric", "value"])
    aw.writerows(aggregate)
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- operations -----------------------------------------------------------------------

def run_batch(config: RunConfig) -> tuple[list[dict], list[tuple[str, str]]]:
    config.validate()
    jobs = make_jobs(config)
    rows = _run(solve_job, jobs, config)
    return rows, solve_aggregate(rows, read_best_known(config.best_known))


def lb_report(config: RunConfig) -> tuple[list[dict], list[tuple[str, str]]]:
    config.validate()
    jobs = make_jobs(config)
    rows = _run(bounds_job, jobs, config)
    best = read_best_known(config.best_known)
    if best:
        for r in rows:
            if r["status"] == "ok":
                ub = best.get((r["name"].lower(), int(r["c"])))
                r["best_ub"] = "" if ub is None else ub
    return rows, bounds_aggregate(rows)


@dataclass
class SweepEntry:
    job: Job
    published_lb: int | None = None
    published_ub: int | None = None


def read_manifest(path: str, data_dir: str | None) -> list[SweepEntry]:
    """``file,c[,lb,ub]`` CSV; relative file names resolve against ``data_dir`` (default: manifest folder)."""
    base = Path(data_dir) if data_dir else Path(path).parent
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    out = []
    with fh:
        for lineno, rec in enumerate(csv.DictReader(fh), start=2):
            try:
                f = rec["file"].strip()
                c = int(rec["c"]) if (rec.get("c") or "").strip() else None
                lb = int(rec["lb"]) if (rec.get("lb") or "").strip() else None
                ub = int(rec["ub"]) if (rec.get("ub") or "").strip() else None
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"manifest line {lineno}: {exc}") from exc
            full = Path(f) if Path(f).is_absolute() else base / f
            if c is None and full.suffix.lower() != ".alb":
                raise ConfigError(f"manifest line {lineno}: cycle time required for {f}")
            out.append(SweepEntry(Job(str(full), c), lb, ub))
    if not out:
        raise ConfigError("manifest lists no instances")
    return out


def contradiction(row: dict, entry: SweepEntry) -> bool:
    """A proven optimum outside the published [lb, ub] range, or crossed bounds."""
    if row["status"] == "parse_error":
        return False
    lb, ub = int(row["lb"]), int(row["ub"])
    if entry.published_lb is not None and ub < entry.published_lb:
        return True
    if entry.published_ub is not None and lb > entry.published_ub:
        return True
    return False


def run_sweep(manifest: str, data_dir: str | None, config: RunConfig) -> tuple[list[dict], list[tuple[str, str]]]:
    config.validate()
    entries = read_manifest(manifest, data_dir)
    rows = _run(solve_job, [e.job for e in entries], config)
    bad = 0
    for row, e in zip(rows, entries):
        row["published_lb"] = "" if e.published_lb is None else e.published_lb
        row["published_ub"] = "" if e.published_ub is None else e.published_ub
        row["contradiction"] = int(contradiction(row, e))
        bad += row["contradiction"]
    agg = solve_aggregate(rows) + [("contradictions", str(bad))]
    return rows, agg


# -- entry point ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ualb", description="Exact UALBP-1 solver (branch, price and remember).")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--cycle-time", help="cycle time, or comma list of cycle times (required for .IN2)")
        sp.add_argument("--grid", help="heuristic grid as 'alpha,beta,gamma;...'")
        sp.add_argument("--out", help="write CSV here instead of stdout")
        sp.add_argument("--workers", type=int, default=1, help="instances solved in parallel")

    s = sub.add_parser("solve", help="solve instances to optimality (or until the time limit)")
    s.add_argument("paths", nargs="+", help="instance files or directories")
    common(s)
    s.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT, help="seconds per instance")
    s.add_argument("--memory-cap", type=int, default=DEFAULT_MEMORY_CAP, help="memory table entries")
    s.add_argument("--no-cg", action="store_true", help="disable column-generation bounds")
    s.add_argument("--no-memory", action="store_true", help="disable memory dominance")
    s.add_argument("--no-jackson", action="store_true", help="disable the task-swap dominance filter")
    s.add_argument("--best-known", help="CSV name,c,ub used to count optimal solutions found")

    b = sub.add_parser("bounds", help="root lower bounds (LB1, LB2, LB3, column generation)")
    b.add_argument("paths", nargs="+", help="instance files or directories")
    common(b)
    b.add_argument("--best-known", help="CSV name,c,ub for deviation statistics")

    w = sub.add_parser("sweep", help="solve every entry of a manifest and check published bounds")
    w.add_argument("manifest", help="CSV with columns file,c[,lb,ub]")
    w.add_argument("--data-dir", help="folder holding the instance files")
    w.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    w.add_argument("--grid")
    w.add_argument("--out")
    w.add_argument("--workers", type=int, default=1)
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(paths=list(getattr(args, "paths", []) or []))
    if getattr(args, "cycle_time", None):
        cfg.cycle_times = parse_cycle_times(args.cycle_time)
    if getattr(args, "grid", None):
        cfg.grid = parse_grid(args.grid)
    cfg.out = args.out
    cfg.workers = args.workers
    if hasattr(args, "time_limit"):
        cfg.time_limit = args.time_limit
    cfg.memory_cap = getattr(args, "memory_cap", DEFAULT_MEMORY_CAP)
    cfg.no_cg = getattr(args, "no_cg", False)
    cfg.no_memory = getattr(args, "no_memory", False)
    cfg.no_jackson = getattr(args, "no_jackson", False)
    cfg.best_known = getattr(args, "best_known", None)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(args)
        if args.command == "solve":
            rows, agg = run_batch(cfg)
            text = render(SOLVE_COLUMNS, rows, agg)
        elif args.command == "bounds":
            rows, agg = lb_report(cfg)
            text = render(BOUNDS_COLUMNS, rows, agg)
        else:
            rows, agg = run_sweep(args.manifest, args.data_dir, cfg)
            text = render(SOLVE_COLUMNS + SWEEP_EXTRA, rows, agg)
    except ConfigError as exc:
        print(f"ualb: error: {exc}", file=sys.stderr)
        return 2
    emit(text, cfg.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
