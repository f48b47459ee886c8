"""Optimal commitment for the first agent (leader) against a best-responding follower.

Agent 0 is the leader and agent 1 the follower; the leader commits to a
ranking and picks greedily from it, the follower best-responds and breaks
ties in the leader's favour.

Follower responses use the token view: with the leader's ranking ``R`` fixed,
the follower can end up with a set ``T`` of ``l`` items exactly when, for
every prefix ``R[:t]``, ``T`` holds at most ``min(l, c_t)`` of its items,
where ``c_t`` counts follower turns among the first ``t`` turns.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import Sequence

from .core import Instance, SizeGuardError, UtilityFunction, bundle_utility
from .equilibria import achievable_bundles

LEADER, FOLLOWER = 0, 1
MAX_BRUTE_ITEMS = 7
MAX_DP_STATES = 5 * 10**7


@dataclass(frozen=True)
class ValueClasses:
    """Items grouped by equal follower value, best class first.

    Inside a class items are listed by decreasing leader value.
    """

    classes: tuple
    follower_values: tuple

    @property
    def k(self) -> int:
        return len(self.classes)

    @property
    def sizes(self) -> tuple:
        return tuple(len(c) for c in self.classes)


def partition_by_value(follower: UtilityFunction, leader: UtilityFunction) -> ValueClasses:
    groups: dict = {}
    for o in follower.base:
        groups.setdefault(follower.values[o], []).append(o)
    lpos = {o: i for i, o in enumerate(leader.base)}
    values = sorted(groups, reverse=True)
    classes = tuple(tuple(sorted(groups[v], key=lambda o: (-leader.values[o], lpos[o]))) for v in values)
    return ValueClasses(classes, tuple(values))


def follower_turns_prefix(sequence: Sequence[int]) -> list[int]:
    """``c[t]`` = number of follower turns among the first ``t`` turns."""
    c = [0]
    for a in sequence:
        c.append(c[-1] + (a == FOLLOWER))
    return c


def follower_take_set(
    ranking: Sequence[str],
    sequence: Sequence[int],
    ell: int,
    follower: UtilityFunction,
    leader: UtilityFunction,
) -> frozenset:
    """The set the follower takes when limited to ``ell`` items.

    ``ranking`` may be a prefix of a full leader ranking, in which case only
    the first ``len(ranking)`` turns of ``sequence`` count. Among reachable
    sets the follower maximises their value, then minimises the leader's value
    of what they take.
    """
    j = len(ranking)
    c = follower_turns_prefix(sequence[:j])
    if ell < 0 or ell > c[j]:
        raise ValueError(f"follower limited to {ell} items but has only {c[j]} turns among {j}")
    # best[l]: best key over the current prefix; key = (follower value, -leader value)
    NEG = None
    best = [(Fraction(0), Fraction(0), frozenset())] + [NEG] * ell
    for t, z in enumerate(ranking, 1):
        new = [NEG] * (ell + 1)
        cap = min(ell, c[t])
        for l in range(cap + 1):
            keep = best[l] if l <= c[t - 1] else NEG
            take = None
            if l >= 1 and best[l - 1] is not NEG:
                f, g, s = best[l - 1]
                take = (f + follower.values[z], g - leader.values[z], s | {z})
            if keep is NEG or (take is not None and take[:2] > keep[:2]):
                new[l] = take
            else:
                new[l] = keep
        best = new
    return best[ell][2]


def reachable_token_sets(ranking: Sequence[str], sequence: Sequence[int], ell: int) -> set:
    """Exhaustive token moves from the first ``ell`` follower positions (test oracle)."""
    j = len(ranking)
    starts = [i for i, a in enumerate(sequence[:j]) if a == FOLLOWER][:ell]
    if len(starts) < ell:
        raise ValueError("not enough follower turns")
    seen = {frozenset(starts)}
    frontier = list(seen)
    while frontier:
        conf = frontier.pop()
        for p in conf:
            for q in range(p + 1, j):
                if q in conf:
                    continue
                nxt = (conf - {p}) | {q}
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
    return {frozenset(ranking[i] for i in conf) for conf in seen}


def leader_value(ranking, sequence, follower: UtilityFunction, leader: UtilityFunction) -> Fraction:
    """Leader's utility when committing to ``ranking`` (a full ranking)."""
    m_prime = sum(1 for a in sequence if a == FOLLOWER)
    taken = follower_take_set(ranking, sequence, m_prime, follower, leader)
    return bundle_utility(leader, set(ranking) - taken)


# -- dynamic program ----------------------------------------------------------


@dataclass
class DPEntry:
    value: Fraction
    ranking: tuple
    take: frozenset


@dataclass
class DPTable:
    classes: ValueClasses
    sequence: tuple
    entries: dict = field(default_factory=dict)  # (j_1, ..., j_k, l) -> DPEntry

    def __getitem__(self, key) -> DPEntry:
        return self.entries[key]

    def __len__(self):
        return len(self.entries)

    @property
    def answer(self) -> DPEntry:
        m_prime = sum(1 for a in self.sequence if a == FOLLOWER)
        return self.entries[self.classes.sizes + (m_prime,)]


def _extend(signature: tuple, z_follower: Fraction, z_leader: Fraction, cap: int, prev_cap: int) -> tuple:
    """Follower keys after appending one item below a prefix.

    ``signature[l]`` is the follower's best ``(own value, -leader value)`` when
    limited to ``l`` items of the prefix. With the new item ``z`` the best set
    either leaves ``z`` (same as before) or takes ``z`` plus the best set of
    size ``l - 1``.
    """
    out = []
    for l in range(cap + 1):
        keep = signature[l] if l <= prev_cap else None
        take = None
        if l >= 1:
            f, g = signature[l - 1]
            take = (f + z_follower, g - z_leader)
        out.append(take if keep is None or (take is not None and take > keep) else keep)
    return tuple(out)


def build_dp_table(leader: UtilityFunction, follower: UtilityFunction, sequence, max_states: int = MAX_DP_STATES) -> DPTable:
    """Fill the commitment table over (items used per class; follower allowance).

    State ``(j_1, ..., j_k)`` is the prefix of the leader's ranking made of the
    ``j_i`` leader-best items of each class; within a class the leader never
    gains by ranking a less valuable item first, so every prefix has this
    form. The item appended below a prefix is either taken by the follower
    (the best set of size ``l - 1`` plus that item) or not (the best set of
    size ``l`` is unchanged). Which case holds depends on the whole prefix
    ranking, so each state keeps every distinct vector of follower keys over
    the allowances, with one ranking realising it; entry ``(j...; l)`` is the
    best leader value over those rankings.
    """
    sequence = tuple(sequence)
    vc = partition_by_value(follower, leader)
    sizes = vc.sizes
    c = follower_turns_prefix(sequence)
    m_prime = c[-1]
    states = prod(s + 1 for s in sizes) * (m_prime + 1)
    if states > max_states:
        raise SizeGuardError(f"DP table would have {states} states (limit {max_states})")
    table = DPTable(vc, sequence)
    zero = (0,) * len(sizes)
    frontier = {zero: {((Fraction(0), Fraction(0)),): ()}}
    table.entries[zero + (0,)] = DPEntry(Fraction(0), (), frozenset())
    stored = 1

    grid = sorted(itertools.product(*(range(s + 1) for s in sizes)), key=sum)
    for js in grid:
        j = sum(js)
        if j == 0:
            continue
        signatures: dict = {}
        for i, ji in enumerate(js):
            if ji == 0:
                continue
            z = vc.classes[i][ji - 1]
            sub = js[:i] + (ji - 1,) + js[i + 1:]
            for sig, ranking in frontier[sub].items():
                ext = _extend(sig, follower.values[z], leader.values[z], c[j], c[j - 1])
                signatures.setdefault(ext, ranking + (z,))
        stored += len(signatures)
        if stored * (m_prime + 1) > max_states:
            raise SizeGuardError(f"DP frontier exceeds {max_states} stored entries")
        frontier[js] = signatures
        total = bundle_utility(leader, [o for cls, ji in zip(vc.classes, js) for o in cls[:ji]])
        for ell in range(min(c[j], m_prime) + 1):
            ranking = max(signatures.items(), key=lambda kv: kv[0][ell][1])[1]
            take = follower_take_set(ranking, sequence, ell, follower, leader)
            table.entries[js + (ell,)] = DPEntry(total - bundle_utility(leader, take), ranking, take)
    return table


def stackelberg_dp(leader: UtilityFunction, follower: UtilityFunction, sequence):
    """Optimal leader commitment by dynamic programming; returns ``(ranking, value)``."""
    if follower is None:
        raise ValueError("the follower's cardinal utility is required")
    ans = build_dp_table(leader, follower, sequence).answer
    return ans.ranking, ans.value


def follower_response_brute(ranking, sequence, follower: UtilityFunction, leader: UtilityFunction) -> frozenset:
    """Follower's best response by direct search over their reports."""
    reports = (tuple(ranking), tuple(follower.base))
    options = achievable_bundles(FOLLOWER, reports, sequence)
    return max(options, key=lambda b: (bundle_utility(follower, b), -bundle_utility(leader, b)))


def stackelberg_brute(leader: UtilityFunction, follower: UtilityFunction, sequence, max_items: int = MAX_BRUTE_ITEMS):
    """Optimal commitment by enumerating every leader ranking; ``(ranking, value)``."""
    items = tuple(leader.base)
    if len(items) > max_items:
        raise SizeGuardError(f"{len(items)}! rankings exceed the brute-force limit of {max_items} items")
    best_r, best_v = None, None
    for r in itertools.permutations(items):
        taken = follower_response_brute(r, sequence, follower, leader)
        v = bundle_utility(leader, set(items) - taken)
        if best_v is None or v > best_v:
            best_r, best_v = r, v
    return best_r, best_v


@dataclass(frozen=True)
class CommitmentReport:
    truthful_value: Fraction
    optimal_value: Fraction
    optimal_ranking: tuple

    @property
    def advantage(self) -> Fraction:
        return self.optimal_value - self.truthful_value


def leader_view(instance: Instance, leader: int = 0):
    """Utilities and sequence with ``leader`` relabelled as agent 0."""
    if instance.n != 2:
        raise ValueError("commitment analysis needs exactly two agents")
    if instance.utilities is None:
        raise ValueError("commitment analysis needs cardinal utilities")
    seq = tuple(instance.sequence) if leader == 0 else tuple(1 - a for a in instance.sequence)
    return instance.utilities[leader], instance.utilities[1 - leader], seq


def commitment_advantage(instance: Instance, leader: int = 0, method: str = "dp") -> CommitmentReport:
    u1, u2, seq = leader_view(instance, leader)
    truthful = leader_value(u1.base, seq, u2, u1)
    solve = stackelberg_dp if method == "dp" else stackelberg_brute
    ranking, value = solve(u1, u2, seq)
    return CommitmentReport(truthful, value, ranking)
