"""Pairwise-comparison dominance and Pareto optimality of assignments."""

from __future__ import annotations

import itertools
from math import factorial, prod
from typing import Iterable, Sequence

from .core import Assignment, SizeGuardError

MAX_CANDIDATE_ASSIGNMENTS = 10**7


def pairwise_dominates(ranking: Sequence[str], s: Iterable[str], t: Iterable[str]) -> bool:
    """True iff some injection maps every item of ``t`` to a weakly better item of ``s``.

    Checked position by position: the j-th best item of ``s`` must be at least
    as good as the j-th best item of ``t``.
    """
    pos = {o: i for i, o in enumerate(ranking)}
    try:
        ps = sorted(pos[o] for o in s)
        pt = sorted(pos[o] for o in t)
    except KeyError as exc:
        raise KeyError(f"unknown item {exc.args[0]!r}") from None
    if len(ps) < len(pt):
        return False
    return all(a <= b for a, b in zip(ps, pt))


def strictly_pairwise_preferred(ranking: Sequence[str], s: Iterable[str], t: Iterable[str]) -> bool:
    s, t = frozenset(s), frozenset(t)
    return pairwise_dominates(ranking, s, t) and not pairwise_dominates(ranking, t, s)


def _bundles(x) -> tuple:
    if isinstance(x, Assignment):
        return x.bundles
    return tuple(frozenset(b) for b in x)


def pareto_dominates(rankings: Sequence[Sequence[str]], a, b) -> bool:
    """True iff every agent weakly prefers their ``a`` bundle and someone strictly."""
    ab, bb = _bundles(a), _bundles(b)
    strict = False
    for r, sa, sb in zip(rankings, ab, bb):
        if not pairwise_dominates(r, sa, sb):
            return False
        if not strict and not pairwise_dominates(r, sb, sa):
            strict = True
    return strict


def count_assignments(sizes: Sequence[int]) -> int:
    return factorial(sum(sizes)) // prod(factorial(s) for s in sizes)


def is_pareto_optimal_pc(rankings: Sequence[Sequence[str]], a, limit: int = MAX_CANDIDATE_ASSIGNMENTS):
    """Brute-force Pareto optimality with respect to pairwise comparisons.

    Only assignments with the same bundle sizes as ``a`` can dominate it, so
    those are the ones enumerated (agent by agent, items in the order of the
    first ranking). Branches where an agent's bundle fails to weakly dominate
    their current one are cut, which does not change the answer.

    Returns ``(True, None)`` or ``(False, witness_bundles)``.
    """
    current = _bundles(a)
    sizes = [len(b) for b in current]
    total = count_assignments(sizes)
    if total > limit:
        raise SizeGuardError(f"{total} candidate assignments exceed the limit of {limit}")
    items = tuple(rankings[0])
    n = len(current)

    def search(agent, remaining, chosen):
        if agent == n:
            cand = tuple(chosen)
            if pareto_dominates(rankings, cand, current):
                return cand
            return None
        for combo in itertools.combinations(remaining, sizes[agent]):
            bundle = frozenset(combo)
            if not pairwise_dominates(rankings[agent], bundle, current[agent]):
                continue
            rest = tuple(o for o in remaining if o not in bundle)
            found = search(agent + 1, rest, chosen + [bundle])
            if found is not None:
                return found
        return None

    witness = search(0, items, [])
    return (witness is None), witness
