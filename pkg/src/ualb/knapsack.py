"""Exact knapsack pricing for the set-covering master problem."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .instance import Instance, Load, bits
from .kernels import knapsack_max

ZERO_DUAL = 1e-12

Duals = Union[Mapping[int, float], Sequence[float]]


@dataclass(frozen=True)
class PricingResult:
    load: Load
    value: float
    reduced_cost: float
    best: float  # DP optimum, within float noise of ``value``


def _dual(duals: Duals, j: int) -> float:
    if isinstance(duals, Mapping):
        return float(duals.get(j, 0.0))
    return float(duals[j])


def solve_pricing(inst: Instance, candidates: int, duals: Duals, capacity: int | None = None) -> PricingResult:
    """Maximize total dual value of a task subset that fits ``capacity``.

    ``duals`` maps 0-based task index to a nonnegative value, either as a
    mapping or as a length-``n`` sequence. Tasks with a dual below 1e-12
    never enter the load. Ties favour lower task indices.
    """
    if capacity is None:
        capacity = inst.c
    items = []
    vals = []
    for j in bits(candidates):
        v = _dual(duals, j)
        if v < 0:
            raise ValueError(f"negative dual {v} for task {j + 1}")
        if v >= ZERO_DUAL and inst.t[j] <= capacity:
            items.append(j)
            vals.append(v)
    if not items:
        return PricingResult(Load(0, 0), 0.0, 1.0, 0.0)
    best, chosen = knapsack_max([inst.t[j] for j in items], vals, capacity)
    mask = 0
    time = 0
    value = 0.0
    for k in chosen:
        j = items[k]
        mask |= 1 << j
        time += inst.t[j]
        value += vals[k]
    return PricingResult(Load(mask, time), value, 1.0 - value, best)
