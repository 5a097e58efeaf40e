"""Closed-form station-count lower bounds for a set of unassigned tasks."""

from __future__ import annotations

from dataclasses import dataclass

from .instance import Instance


@dataclass(frozen=True)
class BoundValue:
    value: int
    kind: str  # "LB1" | "LB2" | "LB3" | "CG"

    def __int__(self) -> int:
        return self.value


def _class_masks(inst: Instance) -> tuple[int, int, int, int, int, int]:
    """Masks (big, half, w6, w4, w3, w2) keyed on task time vs. cycle time.

    big/half feed LB2 (t > c/2, t = c/2). The w* masks feed LB3, holding
    the tasks whose weight times six equals 6, 4, 3 and 2.
    """
    cached = getattr(inst, "_bound_masks", None)
    if cached is not None:
        return cached
    c = inst.c
    big = half = w6 = w4 = w3 = w2 = 0
    for j, tj in enumerate(inst.t):
        bit = 1 << j
        if 2 * tj > c:
            big |= bit
        elif 2 * tj == c:
            half |= bit
        if 3 * tj > 2 * c:
            w6 |= bit
        elif 3 * tj == 2 * c:
            w4 |= bit
        elif 3 * tj > c:
            w3 |= bit
        elif 3 * tj == c:
            w2 |= bit
    masks = (big, half, w6, w4, w3, w2)
    inst._bound_masks = masks
    return masks


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def lb1_value(inst: Instance, tasks: int, total_time: int | None = None) -> int:
    if total_time is None:
        total_time = inst.time_of(tasks)
    return _ceil_div(total_time, inst.c)


def lb2_value(inst: Instance, tasks: int) -> int:
    big, half, *_ = _class_masks(inst)
    return (tasks & big).bit_count() + _ceil_div((tasks & half).bit_count(), 2)


def lb3_value(inst: Instance, tasks: int) -> int:
    _, _, w6, w4, w3, w2 = _class_masks(inst)
    sixths = (6 * (tasks & w6).bit_count() + 4 * (tasks & w4).bit_count()
              + 3 * (tasks & w3).bit_count() + 2 * (tasks & w2).bit_count())
    return _ceil_div(sixths, 6)


def lb1(inst: Instance, tasks: int) -> BoundValue:
    """Total work content over cycle time, rounded up."""
    return BoundValue(lb1_value(inst, tasks), "LB1")


def lb2(inst: Instance, tasks: int) -> BoundValue:
    """Tasks longer than half a cycle each need their own station."""
    return BoundValue(lb2_value(inst, tasks), "LB2")


def lb3(inst: Instance, tasks: int) -> BoundValue:
    """Weighted count with weights 1, 2/3, 1/2, 1/3 on thirds of the cycle."""
    return BoundValue(lb3_value(inst, tasks), "LB3")


def lb123(inst: Instance, tasks: int, total_time: int | None = None) -> int:
    """max(LB1, LB2, LB3) as a plain integer."""
    return max(lb1_value(inst, tasks, total_time), lb2_value(inst, tasks), lb3_value(inst, tasks))

