"""Shared instance generators and brute-force oracles for the test-suite.

The oracles here deliberately avoid the library's search code: they either
enumerate every report or solve the underlying combinatorial question
directly.
"""

import itertools
import random
from fractions import Fraction

from seqalloc.core import Instance, bundle_utility, weak_utility, random_utility
from seqalloc.mechanism import sequential_allocation

ITEMS_O = tuple(f"o{i}" for i in range(1, 11))


def o(*idx):
    return tuple(f"o{i}" for i in idx)


def random_instance(rng: random.Random, n: int, m: int) -> Instance:
    items = tuple(f"x{i}" for i in range(m))
    sequence = tuple(rng.randrange(n) for _ in range(m))
    rankings = []
    for _ in range(n):
        r = list(items)
        rng.shuffle(r)
        rankings.append(tuple(r))
    return Instance(items, n, sequence, tuple(rankings))


def random_commitment_instance(rng: random.Random, m: int, k: int):
    """Leader utility (strict), follower utility with exactly k distinct values, sequence."""
    items = [f"y{i}" for i in range(m)]
    lr = items[:]
    rng.shuffle(lr)
    leader = random_utility(lr, rng)
    vals = sorted(rng.sample(range(1, 25), k), reverse=True)
    assign = vals + [rng.choice(vals) for _ in range(m - k)]
    rng.shuffle(assign)
    follower = weak_utility(dict(zip(items, assign)), items)
    sequence = tuple(rng.randrange(2) for _ in range(m))
    return leader, follower, sequence


def brute_bundles(agent, profile, sequence):
    """Every bundle ``agent`` can obtain, by trying all m! reports."""
    out = set()
    for r in itertools.permutations(profile[agent]):
        trial = list(profile)
        trial[agent] = r
        out.add(sequential_allocation(trial, sequence).bundles[agent])
    return out


def brute_best_value(agent, profile, u, sequence):
    return max(bundle_utility(u, b) for b in brute_bundles(agent, profile, sequence))


def matching_dominates(ranking, s, t):
    """Injection from t into weakly better items of s, via augmenting paths."""
    s, t = list(s), list(t)
    if len(s) < len(t):
        return False
    pos = {x: i for i, x in enumerate(ranking)}
    match = {}  # s-item -> t-item

    def augment(x, seen):
        for y in s:
            if pos[y] <= pos[x] and y not in seen:
                seen.add(y)
                if y not in match or augment(match[y], seen):
                    match[y] = x
                    return True
        return False

    return all(augment(x, set()) for x in t)


def threshold_utility(ranking, cut):
    """Consistent utility that is huge on the top ``cut`` items and tiny below."""
    m = len(ranking)
    big = Fraction(10 * m * m)
    vals = {}
    for i, x in enumerate(ranking):
        vals[x] = (big if i < cut else Fraction(0)) + Fraction(m - i, m + 1)
    return vals


def all_assignments(items, sizes):
    """Every assignment with the given bundle sizes (no pruning)."""
    def rec(agent, remaining):
        if agent == len(sizes):
            yield ()
            return
        for combo in itertools.combinations(remaining, sizes[agent]):
            rest = tuple(x for x in remaining if x not in combo)
            for tail in rec(agent + 1, rest):
                yield (frozenset(combo),) + tail
    yield from rec(0, tuple(items))
