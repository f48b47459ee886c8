import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqalloc.core import (
    Instance,
    InvalidInstanceError,
    UtilityFunction,
    bundle_utility,
    compare_bundles_lex,
    compare_bundles_uplex,
    instance_to_dict,
    make_utility,
    parse_sequence,
    validate_instance,
)

EXAMPLE1 = {
    "items": ["o1", "o2", "o3", "o4"],
    "sequence": [1, 2, 2, 1],
    "agents": [
        {"name": "1", "ranking": ["o1", "o2", "o3", "o4"]},
        {"name": "2", "ranking": ["o1", "o3", "o2", "o4"]},
    ],
}


def test_validate_example1():
    inst = validate_instance(EXAMPLE1)
    assert inst.n == 2 and inst.m == 4
    assert inst.sequence == (0, 1, 1, 0)
    assert inst.truthful[1] == ("o1", "o3", "o2", "o4")
    assert inst.utilities is None


def test_sequence_string_and_list_agree():
    assert parse_sequence("1221") == parse_sequence([1, 2, 2, 1]) == (0, 1, 1, 0)


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d["agents"][0].update(ranking=["o1", "o1", "o2", "o3"]), "duplicate item"),
        (lambda d: d["agents"][0].update(ranking=["o1", "o2", "o3"]), "permutation"),
        (lambda d: d.update(items=["o1", "o1", "o3", "o4"]), "duplicate item"),
        (lambda d: d.update(sequence=[1, 2, 1]), "sequence length"),
        (lambda d: d.update(sequence=[1, 3, 2, 1]), "out of range"),
        (lambda d: d.update(sequence=[0, 1, 2, 1]), "out of range"),
        (lambda d: d["agents"][0].update(utilities={"o1": 1, "o2": 2, "o3": 3, "o4": 4}), "inconsistent"),
        (lambda d: d["agents"][0].update(utilities={"o1": 3, "o2": 2, "o3": 1, "o4": 0}), "not positive"),
        (lambda d: d["agents"][0].update(utilities={"o1": "x", "o2": 2, "o3": 1, "o4": 1}), "bad utility"),
    ],
)
def test_validate_rejects(mutate, message):
    import copy

    raw = copy.deepcopy(EXAMPLE1)
    mutate(raw)
    with pytest.raises(InvalidInstanceError, match=message):
        validate_instance(raw)


def test_short_ranking_with_duplicate():
    raw = {"items": ["o1", "o2", "o3"], "sequence": "12" "1",
           "agents": [{"ranking": ["o1", "o1", "o2"]}, {"ranking": ["o1", "o2", "o3"]}]}
    with pytest.raises(InvalidInstanceError, match="duplicate item 'o1'"):
        validate_instance(raw)


def test_inconsistent_two_item_utility():
    with pytest.raises(InvalidInstanceError, match="inconsistent"):
        make_utility("explicit", ("o1", "o2"), {"o1": 1, "o2": 2})


def test_partial_utilities_need_default():
    import copy

    raw = copy.deepcopy(EXAMPLE1)
    raw["agents"][0]["utilities"] = {"o1": "4", "o2": "3", "o3": "2", "o4": "1"}
    with pytest.raises(InvalidInstanceError, match="some agents only"):
        validate_instance(raw)
    inst = validate_instance(raw, default_utilities="borda")
    assert inst.utilities[1].values["o3"] == 3


def test_rational_strings_are_exact():
    import copy

    raw = copy.deepcopy(EXAMPLE1)
    for a in raw["agents"]:
        a["utilities"] = {x: f"1/{k + 2}" for k, x in enumerate(a["ranking"])}
    inst = validate_instance(raw)
    assert inst.utilities[0].values["o2"] == Fraction(1, 3)


def test_instance_dict_round_trip():
    inst = validate_instance(EXAMPLE1, default_utilities="uplex")
    again = validate_instance(instance_to_dict(inst))
    assert again == inst


def test_bundle_utility():
    u = make_utility("explicit", ("a", "b", "c"), {"a": 3, "b": 2, "c": 1})
    assert bundle_utility(u, {"a", "c"}) == 4
    assert bundle_utility(u, set()) == 0
    with pytest.raises(KeyError):
        bundle_utility(u, {"z"})


def test_lexicographic_constructor():
    u = make_utility("lexicographic", ("a", "b", "c"))
    assert u.values == {"a": 4, "b": 2, "c": 1}
    assert bundle_utility(u, {"b", "c"}) == 3 < u.values["a"]


def test_upward_lexicographic_constructor():
    u = make_utility("upward-lexicographic", ("a", "b", "c"))
    assert u.values == {"a": Fraction(7, 8), "b": Fraction(3, 4), "c": Fraction(1, 2)}


def test_borda_constructor():
    assert make_utility("borda", ("a", "b")).values == {"a": 2, "b": 1}


def test_make_utility_argument_checks():
    with pytest.raises(ValueError):
        make_utility("explicit", ("a", "b"))
    with pytest.raises(ValueError):
        make_utility("borda", ("a", "b"), {"a": 2, "b": 1})
    with pytest.raises(ValueError):
        make_utility("median", ("a", "b"))


def test_weak_consistency_is_opt_in():
    with pytest.raises(InvalidInstanceError):
        UtilityFunction({"a": 5, "b": 5}, ("a", "b"))
    u = UtilityFunction({"a": 5, "b": 5}, ("a", "b"), strict=False)
    assert u.values["a"] == u.values["b"]


R4 = ("a", "b", "c", "d")


def test_lex_examples():
    # oracle: values 8,4,2,1
    vals = {"a": 8, "b": 4, "c": 2, "d": 1}
    assert vals["a"] + vals["d"] > vals["b"] + vals["c"]
    assert compare_bundles_lex(R4, {"a", "d"}, {"b", "c"}) == 1
    assert compare_bundles_lex(R4, {"a", "c"}, {"a", "c"}) == 0
    assert compare_bundles_lex(R4, {"b", "c"}, {"b", "d"}) == 1


def test_uplex_examples():
    u = make_utility("upward-lexicographic", R4)
    assert bundle_utility(u, {"b", "c"}) > bundle_utility(u, {"a", "d"})
    assert compare_bundles_uplex(R4, {"a", "c"}, {"b", "c"}) == 1
    assert compare_bundles_uplex(R4, {"a", "d"}, {"b", "c"}) == -1
    assert compare_bundles_uplex(R4, {"a", "b"}, {"a", "b"}) == 0


def test_unequal_sizes_rejected():
    with pytest.raises(ValueError):
        compare_bundles_lex(R4, {"a"}, {"b", "c"})
    with pytest.raises(ValueError):
        compare_bundles_uplex(R4, {"a"}, {"b", "c"})


def _sign(x):
    return (x > 0) - (x < 0)


@st.composite
def ranking_and_pair(draw):
    m = draw(st.integers(1, 8))
    items = [f"i{k}" for k in range(m)]
    ranking = tuple(draw(st.permutations(items)))
    size = draw(st.integers(0, m))
    s = draw(st.sets(st.sampled_from(items), min_size=size, max_size=size))
    t = draw(st.sets(st.sampled_from(items), min_size=size, max_size=size))
    return ranking, s, t


@settings(max_examples=400, deadline=None)
@given(ranking_and_pair())
def test_ordinal_comparisons_match_numeric(data):
    ranking, s, t = data
    lex = make_utility("lexicographic", ranking)
    up = make_utility("upward-lexicographic", ranking)
    assert compare_bundles_lex(ranking, s, t) == _sign(bundle_utility(lex, s) - bundle_utility(lex, t))
    assert compare_bundles_uplex(ranking, s, t) == _sign(bundle_utility(up, s) - bundle_utility(up, t))


def test_comparisons_exhaustive_m6():
    ranking = tuple(f"i{k}" for k in range(6))
    lex = make_utility("lexicographic", ranking)
    up = make_utility("upward-lexicographic", ranking)
    for size in range(7):
        for s, t in itertools.product(itertools.combinations(ranking, size), repeat=2):
            assert compare_bundles_lex(ranking, s, t) == _sign(lex.of(s) - lex.of(t))
            assert compare_bundles_uplex(ranking, s, t) == _sign(up.of(s) - up.of(t))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.randoms(use_true_random=False))
def test_lexicographic_dominates_tail(m, rnd):
    items = [f"i{k}" for k in range(m)]
    rnd.shuffle(items)
    u = make_utility("lexicographic", items)
    for k, x in enumerate(items):
        assert u.values[x] > sum(u.values[y] for y in items[k + 1:])


def test_random_utilities_are_consistent():
    rng = random.Random(3)
    from seqalloc.core import random_utility

    for _ in range(50):
        r = tuple(rng.sample("abcdefgh", 8))
        u = random_utility(r, rng)
        assert all(u.values[x] > u.values[y] for x, y in zip(r, r[1:]))


def test_instance_rejects_inconsistent_utility_object():
    u = make_utility("borda", ("o2", "o1", "o3", "o4"))
    with pytest.raises(InvalidInstanceError, match="not consistent"):
        Instance(("o1", "o2", "o3", "o4"), 1, (0, 0, 0, 0), (("o1", "o2", "o3", "o4"),), (u,))
