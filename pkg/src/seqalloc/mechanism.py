"""Sequential allocation for a reported profile."""

from __future__ import annotations

from typing import Sequence

from .core import Assignment, Pick


def sequential_allocation(
    profile: Sequence[Sequence[str]], sequence: Sequence[int], items: Sequence[str] | None = None
) -> Assignment:
    """Run the mechanism: at each turn the agent takes their top remaining reported item.

    ``sequence`` holds 0-based agent indices. ``items`` fixes the column
    order of the assignment matrix and defaults to the first ranking.
    """
    items = tuple(profile[0] if items is None else items)
    if len(sequence) != len(items):
        raise ValueError("picking sequence must have one turn per item")
    taken: set = set()
    cursor = [0] * len(profile)  # skip-pointer into each reported ranking
    bundles = [set() for _ in profile]
    trace = []
    for t, agent in enumerate(sequence):
        ranking = profile[agent]
        k = cursor[agent]
        while ranking[k] in taken:
            k += 1
        cursor[agent] = k + 1
        item = ranking[k]
        taken.add(item)
        bundles[agent].add(item)
        trace.append(Pick(t, agent, item))
    return Assignment(items, tuple(frozenset(b) for b in bundles), tuple(trace))


def pick_order(profile: Sequence[Sequence[str]], sequence: Sequence[int]) -> tuple:
    return sequential_allocation(profile, sequence).pick_order
