"""Equilibrium profiles, best responses and better-response dynamics.

A deviating agent's report only matters through the items they pick on their
own turns; every other turn is forced by the fixed reports of the others. The
response search therefore walks the deviator's pick choices, and the state
after any prefix of turns is fully described by the set of taken items.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Iterator, NamedTuple, Sequence

from .core import Assignment, Instance, UtilityFunction, bundle_utility, make_utility
from .mechanism import pick_order, sequential_allocation
from .pareto import pairwise_dominates

POLICIES = ("round-robin", "first-improving", "replay")
VERDICTS = ("converged-to-PNE", "cycle-detected", "step-cap-reached", "replay-exhausted")


class ResponseSearchState(NamedTuple):
    turn: int
    taken: int  # bitmask over item indices
    bundle: int  # deviator's items so far; irrelevant to the future, so not part of memo keys


class Deviation(NamedTuple):
    agent: int
    ranking: tuple
    bundle: frozenset
    old_value: object
    new_value: object


class NotABetterResponseError(ValueError):
    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


class _ResponseSearch:
    """Search over one agent's pick choices against fixed reports."""

    def __init__(self, agent: int, reports: Sequence[Sequence[str]], sequence: Sequence[int]):
        self.agent = agent
        self.items = tuple(reports[agent])
        self.index = {o: i for i, o in enumerate(self.items)}
        self.sequence = tuple(sequence)
        self.m = len(self.items)
        self.orders = [
            None if a == agent else [self.index[o] for o in r] for a, r in enumerate(reports)
        ]

    def advance(self, state: ResponseSearchState) -> ResponseSearchState:
        """Play forced turns until the deviator moves next or the items run out."""
        t, taken, bundle = state
        while t < self.m and self.sequence[t] != self.agent:
            for x in self.orders[self.sequence[t]]:
                if not taken >> x & 1:
                    break
            taken |= 1 << x
            t += 1
        return ResponseSearchState(t, taken, bundle)

    def start(self) -> ResponseSearchState:
        return self.advance(ResponseSearchState(0, 0, 0))

    def choose(self, state: ResponseSearchState, x: int) -> ResponseSearchState:
        bit = 1 << x
        return self.advance(ResponseSearchState(state.turn + 1, state.taken | bit, state.bundle | bit))

    def best(self, weights: Sequence[int], preference: Sequence[int]):
        """Max-weight reachable bundle as ``(value, path)``; ties go to the earlier choice."""
        memo = {}

        def rec(state):
            if state.turn == self.m:
                return 0, ()
            hit = memo.get(state.taken)
            if hit is not None:
                return hit
            best = None
            for x in preference:
                if state.taken >> x & 1:
                    continue
                v, path = rec(self.choose(state, x))
                v += weights[x]
                if best is None or v > best[0]:
                    best = (v, (x,) + path)
            memo[state.taken] = best
            return best

        return rec(self.start())

    def bundles(self) -> frozenset:
        """Every bundle (as a bitmask) the deviator can end up with."""
        memo = {}

        def rec(state):
            if state.turn == self.m:
                return frozenset((0,))
            hit = memo.get(state.taken)
            if hit is not None:
                return hit
            out = set()
            for x in range(self.m):
                if not state.taken >> x & 1:
                    bit = 1 << x
                    out.update(b | bit for b in rec(self.choose(state, x)))
            memo[state.taken] = frozenset(out)
            return memo[state.taken]

        return rec(self.start())

    def paths(self, preference: Sequence[int]) -> Iterator[tuple]:
        """Deviator pick paths in depth-first order, choices ordered by ``preference``."""

        def rec(state, prefix):
            if state.turn == self.m:
                yield prefix
                return
            for x in preference:
                if not state.taken >> x & 1:
                    yield from rec(self.choose(state, x), prefix + (x,))

        yield from rec(self.start(), ())

    def to_set(self, mask: int) -> frozenset:
        return frozenset(o for i, o in enumerate(self.items) if mask >> i & 1)


def _weights(u: UtilityFunction, items: Sequence[str]):
    """Exact integer rescaling of ``u`` over ``items``: ``(weights, scale)``."""
    den = lcm(*(u.values[o].denominator for o in items))
    return [int(u.values[o] * den) for o in items], den


def _witness(path_items: Sequence[str], u: UtilityFunction) -> tuple:
    picked = set(path_items)
    return tuple(path_items) + tuple(o for o in u.base if o not in picked)


def best_response(agent: int, reports: Sequence[Sequence[str]], u: UtilityFunction, sequence: Sequence[int]):
    """Best bundle for ``agent`` against the others' reports, with a report achieving it.

    ``reports`` is a full profile; the agent's own entry is ignored. The
    witness lists the picked items in pick order, then the rest in the order
    of ``u``'s ranking. Returns ``(bundle, witness)``.
    """
    search = _ResponseSearch(agent, reports, sequence)
    pref = [search.index[o] for o in u.base]
    _, path = search.best(_weights(u, search.items)[0], pref)
    items = [search.items[x] for x in path]
    return frozenset(items), _witness(items, u)


def achievable_bundles(agent: int, reports: Sequence[Sequence[str]], sequence: Sequence[int]) -> frozenset:
    """All bundles ``agent`` can obtain by some report, others fixed."""
    search = _ResponseSearch(agent, reports, sequence)
    return frozenset(search.to_set(b) for b in search.bundles())


def optimal_bundles(agent, reports, u: UtilityFunction, sequence) -> list:
    """Every achievable bundle of maximum ``u``-value, sorted for determinism."""
    bundles = achievable_bundles(agent, reports, sequence)
    top = max(bundle_utility(u, b) for b in bundles)
    found = [b for b in bundles if bundle_utility(u, b) == top]
    pos = {o: i for i, o in enumerate(u.base)}
    return sorted(found, key=lambda b: sorted(pos[o] for o in b))


def _replace(profile, agent, ranking) -> tuple:
    return tuple(tuple(ranking) if a == agent else tuple(r) for a, r in enumerate(profile))


def is_pure_nash(profile, utilities: Sequence[UtilityFunction], sequence):
    """Check that no agent gains by changing their report.

    Returns ``(True, None)`` or ``(False, Deviation)`` for the first agent
    (in index order) with a profitable deviation; the deviation is a best
    response.
    """
    outcome = sequential_allocation(profile, sequence)
    for agent, u in enumerate(utilities):
        if agent not in sequence:
            continue
        current = bundle_utility(u, outcome.bundles[agent])
        bundle, witness = best_response(agent, profile, u, sequence)
        value = bundle_utility(u, bundle)
        if value > current:
            return False, Deviation(agent, witness, bundle, current, value)
    return True, None


def dominance_violation(profile, truthful, sequence):
    """First ``(agent, bundle)`` reachable by a deviation that the agent's current
    bundle does not pairwise-dominate, or ``None``."""
    outcome = sequential_allocation(profile, sequence)
    for agent, r in enumerate(truthful):
        if agent not in sequence:
            continue
        current = outcome.bundles[agent]
        pos = {o: i for i, o in enumerate(r)}
        for b in sorted(achievable_bundles(agent, profile, sequence), key=lambda b: sorted(pos[o] for o in b)):
            if not pairwise_dominates(r, current, b):
                return agent, b
    return None


def is_pne_all_consistent(profile, truthful, sequence) -> bool:
    """PNE for every additive utility consistent with the truthful rankings.

    A bundle beats a same-size bundle under every consistent utility exactly
    when it pairwise-dominates it, so it suffices that each agent's current
    bundle dominates everything the agent could reach.
    """
    return dominance_violation(profile, truthful, sequence) is None


def bluff_profile(instance: Instance) -> tuple:
    order = pick_order(instance.truthful, instance.sequence)
    return tuple(order for _ in range(instance.n))


def invert_sequence(sequence: Sequence[int]) -> tuple:
    """Reverse a two-agent sequence and swap the agents."""
    return tuple(1 - a for a in reversed(sequence))


def crossout_profile(instance: Instance) -> tuple:
    if instance.n != 2:
        raise ValueError(f"crossout profiles are defined for two agents, got {instance.n}")
    reversed_prefs = tuple(tuple(reversed(r)) for r in instance.truthful)
    order = pick_order(reversed_prefs, invert_sequence(instance.sequence))
    ranking = tuple(reversed(order))
    return (ranking, ranking)


# -- dynamics ---------------------------------------------------------------


class Step(NamedTuple):
    agent: int
    old: tuple
    new: tuple
    assignment: Assignment


@dataclass(frozen=True)
class DynamicsTrace:
    start: tuple
    steps: tuple
    verdict: str  # one of VERDICTS
    repeat_of: int | None = None  # index of the earlier profile revisited (0 = start)

    @property
    def final(self) -> tuple:
        return self.profiles[-1]

    @property
    def profiles(self) -> list:
        out = [self.start]
        for s in self.steps:
            out.append(_replace(out[-1], s.agent, s.new))
        return out

    def describe(self) -> str:
        if self.verdict == "cycle-detected":
            return f"cycle-detected at step {len(self.steps)} (profile of step {self.repeat_of} repeated)"
        if self.verdict == "converged-to-PNE":
            return f"converged-to-PNE after {len(self.steps)} steps"
        if self.verdict == "step-cap-reached":
            return f"step-cap-reached after {len(self.steps)} steps"
        return f"replay exhausted after {len(self.steps)} steps without reaching a PNE"


def improving_deviation(agent, profile, u: UtilityFunction, sequence):
    """First strictly improving report for ``agent`` in depth-first pick order, or None."""
    if agent not in sequence:
        return None
    current = bundle_utility(u, sequential_allocation(profile, sequence).bundles[agent])
    search = _ResponseSearch(agent, profile, sequence)
    pref = [search.index[o] for o in u.base]
    weights, scale = _weights(u, search.items)
    threshold = current * scale
    for path in search.paths(pref):
        if sum(weights[x] for x in path) > threshold:
            items = [search.items[x] for x in path]
            return _witness(items, u)
    return None


def better_response_dynamics(
    start,
    utilities: Sequence[UtilityFunction],
    sequence,
    policy: str = "round-robin",
    moves=None,
    max_steps: int = 10000,
) -> DynamicsTrace:
    """Iterate better responses until a PNE, a repeated profile or ``max_steps``.

    ``round-robin`` lets agents move in cyclic order starting after the last
    mover; ``first-improving`` always rescans from agent 0. Either way the
    move taken is the first strictly improving report in depth-first pick
    order. ``replay`` applies ``moves`` (pairs of agent and ranking) verbatim
    and raises NotABetterResponseError on a move that does not improve.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    if policy == "replay" and moves is None:
        raise ValueError("replay policy needs a move list")
    n = len(utilities)
    start = tuple(tuple(r) for r in start)
    profile = start
    seen = {profile: 0}
    steps = []
    next_agent = 0
    while True:
        if len(steps) >= max_steps:
            return DynamicsTrace(start, tuple(steps), "step-cap-reached")
        if policy == "replay":
            if len(steps) == len(moves):
                ok, _ = is_pure_nash(profile, utilities, sequence)
                return DynamicsTrace(start, tuple(steps), "converged-to-PNE" if ok else "replay-exhausted")
            agent, new = moves[len(steps)]
            new = tuple(new)
            u = utilities[agent]
            outcome = sequential_allocation(profile, sequence)
            before = bundle_utility(u, outcome.bundles[agent])
            after = bundle_utility(u, sequential_allocation(_replace(profile, agent, new), sequence).bundles[agent])
            if after <= before:
                raise NotABetterResponseError(
                    len(steps) + 1, f"agent {agent + 1} moves from value {before} to {after}"
                )
        else:
            scan = range(next_agent, next_agent + n) if policy == "round-robin" else range(n)
            for a in scan:
                agent = a % n
                new = improving_deviation(agent, profile, utilities[agent], sequence)
                if new is not None:
                    break
            else:
                return DynamicsTrace(start, tuple(steps), "converged-to-PNE")
            next_agent = agent + 1
        old = profile[agent]
        profile = _replace(profile, agent, new)
        steps.append(Step(agent, old, new, sequential_allocation(profile, sequence)))
        if profile in seen:
            return DynamicsTrace(start, tuple(steps), "cycle-detected", seen[profile])
        seen[profile] = len(steps)


def verify_response_step(profile, agent, new_ranking, u: UtilityFunction, sequence) -> str:
    """Classify a move as ``"best"``, ``"better"`` or ``"neither"``."""
    before = bundle_utility(u, sequential_allocation(profile, sequence).bundles[agent])
    moved = _replace(profile, agent, new_ranking)
    after = bundle_utility(u, sequential_allocation(moved, sequence).bundles[agent])
    if after <= before:
        return "neither"
    bundle, _ = best_response(agent, profile, u, sequence)
    return "best" if after == bundle_utility(u, bundle) else "better"


def lexicographic_utilities(truthful) -> tuple:
    return tuple(make_utility("lexicographic", r) for r in truthful)
