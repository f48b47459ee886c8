"""Domain types, utility models and bundle comparisons.

Items are plain string identifiers. A ranking is a tuple of items, most
preferred first; a profile is a tuple of rankings, one per agent. Agents are
0-based everywhere inside the library; the 1-based labels used in picking
sequences such as ``"1221"`` only appear at the boundaries
(:func:`parse_sequence`, the JSON instance format and the CLI).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

Item = str
Ranking = tuple  # tuple[Item, ...]
Profile = tuple  # tuple[Ranking, ...]
PickingSequence = tuple  # tuple[int, ...], 0-based agent per turn

UTILITY_KINDS = ("lexicographic", "upward-lexicographic", "borda", "explicit")
_KIND_ALIASES = {"lex": "lexicographic", "uplex": "upward-lexicographic"}


class InvalidInstanceError(ValueError):
    """Raised when instance data violates a structural invariant."""


class SizeGuardError(RuntimeError):
    """Raised when a brute-force or table-based computation would be too large."""


# -- picking sequences ------------------------------------------------------


def parse_sequence(turns) -> PickingSequence:
    """Convert 1-based turns (``"1221"`` or ``[1, 2, 2, 1]``) to 0-based form."""
    if isinstance(turns, str):
        turns = [int(ch) for ch in turns if not ch.isspace()]
    out = []
    for t in turns:
        if isinstance(t, bool) or not isinstance(t, int):
            raise InvalidInstanceError(f"agent label {t!r} is not an integer")
        if t < 1:
            raise InvalidInstanceError(f"agent label {t} out of range (labels start at 1)")
        out.append(t - 1)
    return tuple(out)


def format_sequence(sequence: Sequence[int]) -> str:
    return "".join(str(a + 1) for a in sequence)


def turn_counts(sequence: Sequence[int], n: int) -> list[int]:
    counts = [0] * n
    for a in sequence:
        counts[a] += 1
    return counts


# -- utilities --------------------------------------------------------------


@dataclass(frozen=True, eq=True)
class UtilityFunction:
    """Additive cardinal utility consistent with ``base``.

    ``values`` maps every item to a strictly positive Fraction. With
    ``strict=False`` equal values are allowed for adjacent items of ``base``
    (a follower with few distinct values in commitment problems).
    """

    values: Mapping[Item, Fraction]
    base: Ranking
    strict: bool = True

    def __post_init__(self):
        values = {o: Fraction(v) for o, v in self.values.items()}
        if set(values) != set(self.base) or len(self.base) != len(set(self.base)):
            raise InvalidInstanceError("utility values must cover exactly the ranked items")
        for o, v in values.items():
            if v <= 0:
                raise InvalidInstanceError(f"utility of {o!r} is not positive: {v}")
        for hi, lo in zip(self.base, self.base[1:]):
            if values[hi] < values[lo] or (self.strict and values[hi] == values[lo]):
                raise InvalidInstanceError(
                    f"utility inconsistent with ranking: {hi!r} ranked above {lo!r} "
                    f"but {values[hi]} <= {values[lo]}"
                )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "base", tuple(self.base))

    def __hash__(self):
        return hash((self.base, tuple(self.values[o] for o in self.base), self.strict))

    def __getitem__(self, item: Item) -> Fraction:
        return self.values[item]

    def of(self, bundle: Iterable[Item]) -> Fraction:
        return bundle_utility(self, bundle)


def bundle_utility(u: UtilityFunction, bundle: Iterable[Item]) -> Fraction:
    total = Fraction(0)
    for o in bundle:
        try:
            total += u.values[o]
        except KeyError:
            raise KeyError(f"unknown item {o!r}") from None
    return total


def make_utility(
    kind: str, ranking: Sequence[Item], values: Mapping | None = None, strict: bool = True
) -> UtilityFunction:
    """Build a utility consistent with ``ranking``.

    lexicographic assigns ``2**(m - rank)``, upward-lexicographic assigns
    ``1 - 1/2**(m + 1 - rank)``, borda assigns ``m + 1 - rank`` (rank 1 is the
    top item). ``explicit`` takes ``values`` as given and only validates them;
    ``strict=False`` lets explicit values tie.
    """
    kind = _KIND_ALIASES.get(kind, kind)
    ranking = tuple(ranking)
    m = len(ranking)
    if (values is not None) != (kind == "explicit"):
        raise ValueError("explicit values are required for, and only for, kind='explicit'")
    if kind == "lexicographic":
        vals = {o: Fraction(2 ** (m - r)) for r, o in enumerate(ranking, 1)}
    elif kind == "upward-lexicographic":
        vals = {o: 1 - Fraction(1, 2 ** (m + 1 - r)) for r, o in enumerate(ranking, 1)}
    elif kind == "borda":
        vals = {o: Fraction(m + 1 - r) for r, o in enumerate(ranking, 1)}
    elif kind == "explicit":
        vals = {o: Fraction(v) for o, v in values.items()}
    else:
        raise ValueError(f"unknown utility kind {kind!r}; expected one of {UTILITY_KINDS}")
    return UtilityFunction(vals, ranking, strict or kind != "explicit")


def weak_utility(values: Mapping[Item, object], order: Sequence[Item] | None = None) -> UtilityFunction:
    """Utility from raw values that may tie; ties keep the order of ``order``."""
    vals = {o: Fraction(v) for o, v in values.items()}
    order = list(order if order is not None else vals)
    pos = {o: i for i, o in enumerate(order)}
    base = tuple(sorted(vals, key=lambda o: (-vals[o], pos[o])))
    return UtilityFunction(vals, base, strict=False)


def random_utility(ranking: Sequence[Item], rng: random.Random, high: int | None = None) -> UtilityFunction:
    """Draw a random utility consistent with ``ranking`` (distinct positive integers)."""
    m = len(ranking)
    high = high or 10 * m
    draws = sorted(rng.sample(range(1, high + 1), m), reverse=True)
    return UtilityFunction(dict(zip(ranking, map(Fraction, draws))), tuple(ranking))


# -- ordinal bundle comparisons ----------------------------------------------


def _sorted_positions(ranking: Sequence[Item], bundle: Iterable[Item]) -> list[int]:
    pos = {o: i for i, o in enumerate(ranking)}
    try:
        return sorted(pos[o] for o in bundle)
    except KeyError as exc:
        raise KeyError(f"unknown item {exc.args[0]!r}") from None



def compare_bundles_lex(ranking: Sequence[Item], s: Iterable[Item], t: Iterable[Item]) -> int:
    """Compare equal-size bundles lexicographically from the top.

    Returns 1 if ``s`` is better, -1 if ``t`` is better, 0 if they are equal.
    """
    ps, pt = _sorted_positions(ranking, s), _sorted_positions(ranking, t)
    if len(ps) != len(pt):
        raise ValueError("lexicographic comparison needs bundles of equal size")
    for a, b in zip(ps, pt):
        if a != b:
            return 1 if a < b else -1
    return 0


def compare_bundles_uplex(ranking: Sequence[Item], s: Iterable[Item], t: Iterable[Item]) -> int:
    """Compare equal-size bundles starting from each bundle's worst item."""
    ps, pt = _sorted_positions(ranking, s), _sorted_positions(ranking, t)
    if len(ps) != len(pt):
        raise ValueError("upward-lexicographic comparison needs bundles of equal size")
    for a, b in zip(reversed(ps), reversed(pt)):
        if a != b:
            return 1 if a < b else -1
    return 0


# -- instances and assignments ---------------------------------------------


def _check_ranking(ranking: Sequence[Item], items: Sequence[Item], who: str) -> Ranking:
    ranking = tuple(ranking)
    if len(set(ranking)) != len(ranking):
        dup = next(o for o in ranking if ranking.count(o) > 1)
        raise InvalidInstanceError(f"{who}: duplicate item {dup!r} in ranking")
    if set(ranking) != set(items):
        missing = sorted(set(items) - set(ranking))
        extra = sorted(set(ranking) - set(items))
        raise InvalidInstanceError(
            f"{who}: ranking is not a permutation of the items (missing {missing}, unknown {extra})"
        )
    return ranking


@dataclass(frozen=True)
class Instance:
    items: tuple
    n: int
    sequence: PickingSequence
    truthful: Profile
    utilities: tuple | None = None
    names: tuple | None = None

    def __post_init__(self):
        items = tuple(self.items)
        if not items:
            raise InvalidInstanceError("an instance needs at least one item")
        if len(set(items)) != len(items):
            dup = next(o for o in items if items.count(o) > 1)
            raise InvalidInstanceError(f"duplicate item {dup!r}")
        if self.n < 1:
            raise InvalidInstanceError("an instance needs at least one agent")
        seq = tuple(self.sequence)
        if len(seq) != len(items):
            raise InvalidInstanceError(
                f"sequence length {len(seq)} does not match item count {len(items)}"
            )
        for a in seq:
            if not 0 <= a < self.n:
                raise InvalidInstanceError(f"agent {a + 1} in sequence is out of range 1..{self.n}")
        if len(self.truthful) != self.n:
            raise InvalidInstanceError(f"expected {self.n} rankings, got {len(self.truthful)}")
        truthful = tuple(
            _check_ranking(r, items, f"agent {i + 1}") for i, r in enumerate(self.truthful)
        )
        utilities = self.utilities
        if utilities is not None:
            utilities = tuple(utilities)
            if len(utilities) != self.n:
                raise InvalidInstanceError(f"expected {self.n} utility functions")
            for i, (u, r) in enumerate(zip(utilities, truthful)):
                if tuple(u.base) != r:
                    raise InvalidInstanceError(
                        f"agent {i + 1}: utility is not consistent with the truthful ranking"
                    )
        names = tuple(self.names) if self.names is not None else tuple(str(i + 1) for i in range(self.n))
        if len(names) != self.n:
            raise InvalidInstanceError("one name per agent expected")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "sequence", seq)
        object.__setattr__(self, "truthful", truthful)
        object.__setattr__(self, "utilities", utilities)
        object.__setattr__(self, "names", names)

    @property
    def m(self) -> int:
        return len(self.items)

    def with_utilities(self, kind: str) -> "Instance":
        """Fill in utilities of the given kind from the truthful rankings."""
        us = tuple(make_utility(kind, r) for r in self.truthful)
        return Instance(self.items, self.n, self.sequence, self.truthful, us, self.names)


def validate_instance(raw: Mapping, default_utilities: str | None = None, allow_ties: bool = False) -> Instance:
    """Parse and validate instance data in the JSON layout.

    ``{"items": [...], "sequence": [1, 2, 2, 1] | "1221",
    "agents": [{"name": "1", "ranking": [...], "utilities": {item: "p/q"}}]}``

    Agents without ``utilities`` get ``default_utilities`` if given. Mixing
    agents with and without utilities is an error otherwise. ``allow_ties``
    accepts utilities that are only weakly consistent with the ranking.
    """
    try:
        items = [str(o) for o in raw["items"]]
        agents = list(raw["agents"])
        turns = raw["sequence"]
    except (KeyError, TypeError) as exc:
        raise InvalidInstanceError(f"missing or malformed field: {exc}") from None
    if len(set(items)) != len(items):
        dup = next(o for o in items if items.count(o) > 1)
        raise InvalidInstanceError(f"duplicate item {dup!r}")
    sequence = parse_sequence(turns)
    names, rankings, utilities = [], [], []
    for i, agent in enumerate(agents):
        if not isinstance(agent, Mapping) or "ranking" not in agent:
            raise InvalidInstanceError(f"agent {i + 1}: missing ranking")
        names.append(str(agent.get("name", i + 1)))
        ranking = _check_ranking([str(o) for o in agent["ranking"]], items, f"agent {i + 1}")
        rankings.append(ranking)
        vals = agent.get("utilities")
        if vals is None:
            utilities.append(None if default_utilities is None else make_utility(default_utilities, ranking))
            continue
        try:
            parsed = {str(o): Fraction(v) for o, v in vals.items()}
        except (ValueError, ZeroDivisionError, TypeError, AttributeError) as exc:
            raise InvalidInstanceError(f"agent {i + 1}: bad utility value ({exc})") from None
        try:
            utilities.append(make_utility("explicit", ranking, parsed, strict=not allow_ties))
        except InvalidInstanceError as exc:
            raise InvalidInstanceError(f"agent {i + 1}: {exc}") from None
    if all(u is None for u in utilities):
        us = None
    elif any(u is None for u in utilities):
        raise InvalidInstanceError("utilities given for some agents only; supply a default kind")
    else:
        us = tuple(utilities)
    return Instance(tuple(items), len(agents), sequence, tuple(rankings), us, tuple(names))


def instance_to_dict(instance: Instance) -> dict:
    agents = []
    for i in range(instance.n):
        entry = {"name": instance.names[i], "ranking": list(instance.truthful[i])}
        if instance.utilities is not None:
            u = instance.utilities[i]
            entry["utilities"] = {o: str(u.values[o]) for o in instance.items}
        agents.append(entry)
    return {
        "items": list(instance.items),
        "sequence": [a + 1 for a in instance.sequence],
        "agents": agents,
    }


class Pick(NamedTuple):
    turn: int
    agent: int
    item: Item


@dataclass(frozen=True)
class Assignment:
    """Outcome of one run of the mechanism."""

    items: tuple
    bundles: tuple  # tuple[frozenset[Item], ...]
    trace: tuple = field(default=())

    @property
    def matrix(self) -> tuple:
        return tuple(tuple(int(o in b) for o in self.items) for b in self.bundles)

    @property
    def pick_order(self) -> tuple:
        return tuple(p.item for p in self.trace)

    def bundle(self, agent: int) -> frozenset:
        return self.bundles[agent]
