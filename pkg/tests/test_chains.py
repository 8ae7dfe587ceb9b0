from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lubell.chains import (ChainError, FullChain, classify_chains, emit_report, enumerate_chains, lubell_monte_carlo,
                           lubell_via_chains, max_block_average, meet_count, min_partition, minmax_partition,
                           partition_by_deleted_element, weighted_average)
from lubell.family import SetFamily, construction, construct_c1, diamond_free_fast, lubell, mask_of, middle_levels


@st.composite
def families(draw, min_n=1, max_n=6):
    n = draw(st.integers(min_n, max_n))
    masks = draw(st.sets(st.integers(0, (1 << n) - 1), max_size=1 << n))
    return SetFamily.of(n, masks)


def test_enumerate_chains_counts():
    assert len(list(enumerate_chains(3))) == 6
    assert len(list(enumerate_chains(1))) == 1
    with pytest.raises(ChainError):
        list(enumerate_chains(9))


def test_meet_count_examples():
    b32 = middle_levels(3, 2)
    assert all(meet_count(b32, c) == 2 for c in enumerate_chains(3))
    ends = SetFamily(4, (0, 15))
    assert all(meet_count(ends, c) == 2 for c in enumerate_chains(4))
    assert meet_count(SetFamily(3, (1,)), FullChain((2, 1, 3))) == 0
    assert FullChain((2, 1, 3)).masks() == [0, 2, 3, 7]


def test_lubell_via_chains_examples():
    assert lubell_via_chains(construct_c1([1, 2], [3, 4])) == Fraction(7, 3)
    assert lubell_via_chains(SetFamily(5, (0,))) == 1


@settings(max_examples=60, deadline=None)
@given(families(max_n=6))
def test_lubell_identity(f):
    assert lubell_via_chains(f) == lubell(f)


def test_monte_carlo_accuracy_and_determinism():
    b = middle_levels(20, 2)
    mean, err = lubell_monte_carlo(b, 20000, seed=3)
    # every chain meets two full levels exactly once each
    assert mean == 2 and err == 0
    c = construction(1, 10, 20)
    m1 = lubell_monte_carlo(c, 5000, seed=11)
    assert m1 == lubell_monte_carlo(c, 5000, seed=11)
    target = 2 + Fraction(100, 380)
    assert abs(m1[0] - target) <= 5 * m1[1]
    with pytest.raises(ChainError):
        lubell_monte_carlo(c, 0)


def test_monte_carlo_independent_of_workers():
    f = construction(2, 3, 7)
    assert lubell_monte_carlo(f, 3000, seed=9, workers=1) == lubell_monte_carlo(f, 3000, seed=9, workers=2)


def test_deleted_element_partition():
    blocks = partition_by_deleted_element(middle_levels(4, 2))
    assert [b.key for b in blocks] == [1, 2, 3, 4]
    assert all(b.average_meet == 2 and b.chain_count == 6 for b in blocks)


def test_deleted_element_partition_with_full_set():
    f = SetFamily(3, (0, 1, 7))
    blocks = partition_by_deleted_element(f)
    # [n] is in no F_i but every chain still meets it
    for b in blocks:
        assert b.average_meet == b.restricted_lubell + 1
    assert sum(b.restricted_lubell for b in blocks) / 3 == lubell(f) - 1
    assert weighted_average(blocks) == lubell(f)


def test_min_partition_examples():
    blocks = min_partition(SetFamily(4, (0,)))
    assert blocks[0].key == 0 and blocks[0].chain_count == 24 and blocks[0].average_meet == 1
    assert blocks[-1].kind == "empty" and blocks[-1].chain_count == 0
    blocks = min_partition(middle_levels(3, 2))
    one = next(b for b in blocks if b.key == mask_of([1]))
    assert one.average_meet == 2
    blocks = min_partition(SetFamily(3, ()))
    assert len(blocks) == 1 and blocks[0].chain_count == 6 and blocks[0].average_meet == 0


def test_minmax_partition_example():
    blocks = minmax_partition(SetFamily(4, (0, 15)))
    live = [b for b in blocks if b.chain_count]
    assert len(live) == 1 and live[0].key == (0, 15) and live[0].average_meet == 2


def test_report_format():
    text = emit_report(min_partition(construct_c1([1, 2], [3, 4])))
    first = text.splitlines()[0]
    assert first == "block min:{} chains=24 avg=7/3"
    assert text.splitlines()[-1] == "block empty chains=0 avg=0/1"
    assert emit_report(partition_by_deleted_element(middle_levels(3, 2))).splitlines()[0] == \
        "block deleted:1 chains=2 avg=2/1"


def _oracle_matches(blocks, f, kind):
    counted = classify_chains(f, kind)
    keyed = {b.key: b for b in blocks}
    for key, (count, meets) in counted.items():
        b = keyed[key]
        assert b.chain_count == count
        assert b.average_meet == Fraction(meets, count)
    # blocks the enumeration never hit must be empty
    for key, b in keyed.items():
        if key not in counted:
            assert b.chain_count == 0


@settings(max_examples=60, deadline=None)
@given(families(min_n=2, max_n=5))
def test_partitions_match_enumeration(f):
    for kind, build in (("deleted", partition_by_deleted_element), ("min", min_partition),
                        ("minmax", minmax_partition)):
        blocks = build(f)
        assert sum(b.chain_count for b in blocks) == factorial(f.n)
        assert weighted_average(blocks) == lubell(f)
        # a season average never beats the best month
        assert lubell(f) <= max_block_average(blocks)
        _oracle_matches(blocks, f, kind)


@settings(max_examples=60, deadline=None)
@given(families(min_n=1, max_n=6))
def test_min_partition_restriction_identity(f):
    n = f.n
    for b in min_partition(f):
        if b.kind != "min":
            continue
        a = b.key
        k = n - bin(a).count("1")
        # translate the strict up-set of A to ground [n] - A and add the empty set for A itself
        rest = [m ^ a for m in f.members if m & a == a and m != a]
        translated = Fraction(1) + sum((Fraction(1, comb(k, bin(r).count("1"))) for r in rest), Fraction(0))
        assert b.average_meet == translated


def test_minmax_average_bounded_for_diamond_free_case1():
    # for a D_k-free family in the case-1 range, every min-max block average is at most m
    f = middle_levels(5, 3)
    assert diamond_free_fast(f, 3)
    assert max_block_average(minmax_partition(f)) <= 3


def test_partition_caps():
    with pytest.raises(ChainError):
        min_partition(SetFamily(9, ()))
    with pytest.raises(ChainError):
        partition_by_deleted_element(SetFamily(1, ()))
