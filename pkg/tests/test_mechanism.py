import random

import pytest

from seqalloc.core import parse_sequence
from seqalloc.mechanism import pick_order, sequential_allocation

from _helpers import random_instance


def test_example1_allocation():
    a = sequential_allocation(
        [("o1", "o2", "o3", "o4"), ("o1", "o3", "o2", "o4")], parse_sequence("1221")
    )
    assert a.bundles == (frozenset({"o1", "o4"}), frozenset({"o2", "o3"}))
    assert a.matrix == ((1, 0, 0, 1), (0, 1, 1, 0))


def test_example1_pick_order():
    # agent 1 takes o1, agent 2 then o3 and o2, agent 1 is left with o4
    assert pick_order([("o1", "o2", "o3", "o4"), ("o1", "o3", "o2", "o4")], parse_sequence("1221")) == (
        "o1", "o3", "o2", "o4",
    )


def test_single_agent_takes_everything_in_order():
    a = sequential_allocation([("c", "a", "b")], parse_sequence("111"))
    assert a.bundles == (frozenset("abc"),)
    assert a.pick_order == ("c", "a", "b")


def test_identical_reports():
    r = ("b", "c", "a", "d")
    a = sequential_allocation([r, r], parse_sequence("1212"))
    assert a.bundles == (frozenset({"b", "a"}), frozenset({"c", "d"}))
    assert a.pick_order == r


def test_reversed_crossout_instance_order():
    assert pick_order([("d", "c", "b", "a"), ("d", "a", "c", "b")], parse_sequence("1212")) == ("d", "a", "c", "b")


def test_matrix_uses_requested_columns():
    a = sequential_allocation([("b", "a"), ("a", "b")], (1, 0), items=("a", "b"))
    assert a.matrix == ((0, 1), (1, 0))


def test_length_mismatch():
    with pytest.raises(ValueError):
        sequential_allocation([("a", "b")], (0,))


@pytest.mark.parametrize("seed", range(5))
def test_invariants_random(seed):
    rng = random.Random(seed)
    for _ in range(100):
        n, m = rng.randint(1, 4), rng.randint(1, 9)
        inst = random_instance(rng, n, m)
        a = sequential_allocation(inst.truthful, inst.sequence, inst.items)
        # every item exactly once
        assert all(sum(col) == 1 for col in zip(*a.matrix))
        assert sorted(x for b in a.bundles for x in b) == sorted(inst.items)
        for agent in range(n):
            assert len(a.bundles[agent]) == inst.sequence.count(agent)
            assert a.bundles[agent] == {x for x, hit in zip(inst.items, a.matrix[agent]) if hit}
        assert len(a.trace) == m
        # each pick is the top remaining item of the picker's ranking
        taken = set()
        for t, agent, item in a.trace:
            assert agent == inst.sequence[t]
            assert item == next(x for x in inst.truthful[agent] if x not in taken)
            taken.add(item)
        assert sequential_allocation(inst.truthful, inst.sequence, inst.items) == a
