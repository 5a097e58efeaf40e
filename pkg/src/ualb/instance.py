"""Problem instances, file parsers and U-line availability/feasibility.

Task sets are plain Python ``int`` bit masks: bit ``j`` is task ``j + 1``.
Tasks are 0-indexed internally and 1-indexed in everything user facing.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

FORWARD = "F"
BACKWARD = "B"


class InstanceError(ValueError):
    """Raised for malformed or infeasible instance data."""

    def __init__(self, message: str, line: int | None = None, task: int | None = None):
        self.line = line
        self.task = task
        self.bare = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(tasks: Iterable[int]) -> int:
    m = 0
    for j in tasks:
        m |= 1 << j
    return m


@dataclass(frozen=True)
class Load:
    """A station load: a task set whose total time fits the cycle time."""

    tasks: int
    total_time: int

    def __len__(self) -> int:
        return self.tasks.bit_count()

    def members(self) -> list[int]:
        return list(bits(self.tasks))


@dataclass(frozen=True)
class Station:
    """One station of a (partial) solution, in replay order.

    ``order`` holds 0-based task indices, ``directions`` the matching
    ``"F"``/``"B"`` flags.
    """

    order: tuple[int, ...]
    directions: tuple[str, ...]

    @property
    def mask(self) -> int:
        return mask_of(self.order)

    def time(self, inst: "Instance") -> int:
        return sum(inst.t[j] for j in self.order)

    def load(self, inst: "Instance") -> Load:
        return Load(self.mask, self.time(inst))


@dataclass(eq=False)
class Instance:
    """Immutable UALBP-1 instance with precomputed closures and weights."""

    t: tuple[int, ...]
    c: int
    arcs: tuple[tuple[int, int], ...]
    name: str = ""
    # derived
    n: int = field(init=False)
    direct_pred: tuple[int, ...] = field(init=False, repr=False)
    direct_succ: tuple[int, ...] = field(init=False, repr=False)
    all_pred: tuple[int, ...] = field(init=False, repr=False)
    all_succ: tuple[int, ...] = field(init=False, repr=False)
    w: tuple[int, ...] = field(init=False, repr=False)
    wb: tuple[int, ...] = field(init=False, repr=False)
    full: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = len(self.t)
        self.n = n
        if self.c <= 0:
            raise InstanceError(f"cycle time must be positive, got {self.c}")
        for j, tj in enumerate(self.t):
            if tj <= 0:
                raise InstanceError(f"task {j + 1} time {tj} must be positive")
            if tj > self.c:
                raise InstanceError(f"task {j + 1} time {tj} exceeds cycle time {self.c}")
        pred = [0] * n
        succ = [0] * n
        for i, j in self.arcs:
            if not (0 <= i < n and 0 <= j < n):
                raise InstanceError(f"arc {i + 1},{j + 1} outside 1..{n}")
            if i == j:
                raise InstanceError(f"self-loop on task {i + 1}")
            pred[j] |= 1 << i
            succ[i] |= 1 << j
        order = _topological_order(n, pred, succ)
        all_pred = [0] * n
        for j in order:
            acc = pred[j]
            for i in bits(pred[j]):
                acc |= all_pred[i]
            all_pred[j] = acc
        all_succ = [0] * n
        for j in reversed(order):
            acc = succ[j]
            for k in bits(succ[j]):
                acc |= all_succ[k]
            all_succ[j] = acc
        self.direct_pred = tuple(pred)
        self.direct_succ = tuple(succ)
        self.all_pred = tuple(all_pred)
        self.all_succ = tuple(all_succ)
        self.w = tuple(self.t[j] + self.time_of(all_succ[j]) for j in range(n))
        self.wb = tuple(self.t[j] + self.time_of(all_pred[j]) for j in range(n))
        self.full = (1 << n) - 1
        self._bound_masks: tuple[int, ...] | None = None

    def time_of(self, mask: int) -> int:
        t = self.t
        return sum(t[j] for j in bits(mask))

    @property
    def total_time(self) -> int:
        return sum(self.t)

    def reversed(self) -> "Instance":
        """Same tasks with every arc flipped."""
        return Instance(self.t, self.c, tuple((j, i) for i, j in self.arcs), self.name)

    def with_cycle_time(self, c: int) -> "Instance":
        return Instance(self.t, c, self.arcs, self.name)


def _topological_order(n: int, pred: Sequence[int], succ: Sequence[int]) -> list[int]:
    indeg = [p.bit_count() for p in pred]
    stack = [j for j in range(n - 1, -1, -1) if indeg[j] == 0]
    order = []
    while stack:
        j = stack.pop()
        order.append(j)
        for k in bits(succ[j]):
            indeg[k] -= 1
            if indeg[k] == 0:
                stack.append(k)
    if len(order) != n:
        stuck = min(j for j in range(n) if indeg[j] > 0)
        raise InstanceError(f"precedence cycle through task {stuck + 1}", task=stuck)
    return order


# -- availability -------------------------------------------------------------

def forward_available(inst: Instance, assigned: int) -> int:
    """Unassigned tasks whose predecessors are all assigned."""
    out = 0
    ap = inst.all_pred
    for j in bits(inst.full & ~assigned):
        if ap[j] & ~assigned == 0:
            out |= 1 << j
    return out


def backward_available(inst: Instance, assigned: int) -> int:
    """Unassigned tasks whose successors are all assigned."""
    out = 0
    asu = inst.all_succ
    for j in bits(inst.full & ~assigned):
        if asu[j] & ~assigned == 0:
            out |= 1 << j
    return out


def order_load(inst: Instance, assigned: int, load: int) -> Station | None:
    """Find a replay order for ``load`` on top of ``assigned``.

    Greedy is exact here because availability only grows as tasks are
    assigned. Forward placement is preferred. Returns ``None`` when the
    load cannot be placed.
    """
    done = assigned
    left = load
    order: list[int] = []
    dirs: list[str] = []
    ap, asu = inst.all_pred, inst.all_succ
    while left:
        for j in bits(left):
            if ap[j] & ~done == 0:
                d = FORWARD
            elif asu[j] & ~done == 0:
                d = BACKWARD
            else:
                continue
            order.append(j)
            dirs.append(d)
            done |= 1 << j
            left &= ~(1 << j)
            break
        else:
            return None
    return Station(tuple(order), tuple(dirs))


def verify_solution(inst: Instance, stations: Sequence[Station]) -> tuple[bool, str]:
    """Replay ``stations`` and check U-line feasibility.

    Returns ``(ok, message)``; ``message`` describes the first violation.
    """
    assigned = 0
    for k, st in enumerate(stations, 1):
        if len(st.order) != len(st.directions):
            return False, f"station {k}: order/direction length mismatch"
        time = 0
        for j, d in zip(st.order, st.directions):
            if not 0 <= j < inst.n:
                return False, f"station {k}: unknown task {j + 1}"
            if assigned >> j & 1:
                return False, f"task {j + 1} assigned twice"
            if d == FORWARD:
                ok = inst.all_pred[j] & ~assigned == 0
            elif d == BACKWARD:
                ok = inst.all_succ[j] & ~assigned == 0
            else:
                return False, f"task {j + 1}: bad direction flag {d!r}"
            if not ok:
                fwd = inst.all_pred[j] & ~assigned == 0
                bwd = inst.all_succ[j] & ~assigned == 0
                if not fwd and not bwd:
                    return False, f"task {j + 1} neither forward nor backward available"
                word = "forward" if d == FORWARD else "backward"
                return False, f"task {j + 1} not {word} available"
            assigned |= 1 << j
            time += inst.t[j]
        if time > inst.c:
            return False, f"station {k} time {time} exceeds cycle time {inst.c}"
    if assigned != inst.full:
        missing = next(bits(inst.full & ~assigned))
        return False, f"task {missing + 1} not assigned"
    return True, ""


# -- parsers --------------------------------------------------------------------

def _int_token(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok.strip())
    except ValueError:
        raise InstanceError(f"non-integer {what} {tok.strip()!r}", lineno) from None


def _arc(line: str, lineno: int, n: int) -> tuple[int, int]:
    parts = line.split(",")
    if len(parts) != 2:
        raise InstanceError(f"expected 'i,j', got {line.strip()!r}", lineno)
    i = _int_token(parts[0], lineno, "arc endpoint")
    j = _int_token(parts[1], lineno, "arc endpoint")
    if (i, j) == (-1, -1):
        return i, j
    for v in (i, j):
        if not 1 <= v <= n:
            raise InstanceError(f"arc endpoint {v} outside 1..{n}", lineno)
    if i == j:
        raise InstanceError(f"self-loop on task {i}", lineno)
    return i - 1, j - 1


def _build(t: list[int], c: int, arcs: list[tuple[int, int]], name: str,
           time_lines: list[int], arc_lines: dict[tuple[int, int], int]) -> Instance:
    for j, tj in enumerate(t):
        if tj > c:
            raise InstanceError(f"task {j + 1} time {tj} exceeds cycle time {c}", time_lines[j])
        if tj <= 0:
            raise InstanceError(f"task {j + 1} time {tj} must be positive", time_lines[j])
    try:
        return Instance(tuple(t), c, tuple(arcs), name)
    except InstanceError as exc:
        if exc.task is None:
            raise
        line = min((ln for (a, b), ln in arc_lines.items() if exc.task in (a, b)), default=None)
        raise InstanceError(exc.bare, line, exc.task) from None


def parse_in2(text: str, cycle_time: int, name: str = "") -> Instance:
    """Parse the legacy ``.IN2`` precedence-graph format."""
    lines = text.splitlines()
    pos = 0
    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    if pos == len(lines):
        raise InstanceError("empty file")
    n = _int_token(lines[pos], pos + 1, "task count")
    if n <= 0:
        raise InstanceError(f"task count must be positive, got {n}", pos + 1)
    pos += 1
    t: list[int] = []
    time_lines: list[int] = []
    while len(t) < n:
        if pos >= len(lines):
            raise InstanceError(f"expected {n} task times, found {len(t)}", pos)
        if lines[pos].strip():
            t.append(_int_token(lines[pos], pos + 1, "task time"))
            time_lines.append(pos + 1)
        pos += 1
    arcs: list[tuple[int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    ended = False
    for k in range(pos, len(lines)):
        line = lines[k]
        if not line.strip():
            continue
        if ended:
            raise InstanceError("data after sentinel -1,-1", k + 1)
        arc = _arc(line, k + 1, n)
        if arc == (-1, -1):
            ended = True
            continue
        if arc not in seen:
            seen[arc] = k + 1
            arcs.append(arc)
    if not ended:
        raise InstanceError("missing sentinel -1,-1", len(lines))
    return _build(t, cycle_time, arcs, name, time_lines, seen)


_SECTION = re.compile(r"^<\s*([^>]*?)\s*>$")


def parse_alb(text: str, name: str = "") -> Instance:
    """Parse the tagged ``.alb`` format; unknown sections are skipped."""
    sections: dict[str, list[tuple[int, str]]] = {}
    current: str | None = None
    for k, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            current = m.group(1).lower()
            if current == "end":
                break
            sections.setdefault(current, [])
            continue
        if current is None:
            raise InstanceError(f"data outside any section: {line!r}", k)
        sections[current].append((k, line))
    for need in ("number of tasks", "cycle time", "task times"):
        if need not in sections:
            raise InstanceError(f"missing section <{need}>")

    def single(sec: str) -> int:
        body = sections[sec]
        if len(body) != 1:
            raise InstanceError(f"section <{sec}> needs exactly one value",
                                body[0][0] if body else None)
        return _int_token(body[0][1], body[0][0], sec)

    n = single("number of tasks")
    c = single("cycle time")
    if n <= 0:
        raise InstanceError(f"task count must be positive, got {n}")
    t: list[int | None] = [None] * n
    time_lines = [0] * n
    for k, line in sections["task times"]:
        parts = line.split()
        if len(parts) != 2:
            raise InstanceError(f"expected 'task time', got {line!r}", k)
        j = _int_token(parts[0], k, "task number")
        if not 1 <= j <= n:
            raise InstanceError(f"task number {j} outside 1..{n}", k)
        t[j - 1] = _int_token(parts[1], k, "task time")
        time_lines[j - 1] = k
    if any(v is None for v in t):
        missing = t.index(None) + 1
        raise InstanceError(f"no time given for task {missing}")
    arcs: list[tuple[int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    for k, line in sections.get("precedence relations", []):
        arc = _arc(line, k, n)
        if arc == (-1, -1):
            raise InstanceError("unexpected sentinel in <precedence relations>", k)
        if arc not in seen:
            seen[arc] = k
            arcs.append(arc)
    return _build(t, c, arcs, name, time_lines, seen)  # type: ignore[arg-type]


def load_file(path: str | os.PathLike, cycle_time: int | None = None) -> Instance:
    """Read an instance file, dispatching on extension (``.alb`` vs ``.IN2``).

    For ``.alb`` files ``cycle_time`` overrides the embedded value.
    """
    path = os.fspath(path)
    name = os.path.splitext(os.path.basename(path))[0]
    with open(path, encoding="utf-8", errors="replace") as fh:
        text = fh.read()
    if path.lower().endswith(".alb"):
        inst = parse_alb(text, name)
        if cycle_time is not None and cycle_time != inst.c:
            inst = inst.with_cycle_time(cycle_time)
        return inst
    if cycle_time is None:
        raise InstanceError(f"{path}: cycle time required for .IN2 input")
    return parse_in2(text, cycle_time, name)
