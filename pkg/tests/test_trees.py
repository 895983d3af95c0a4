"""Prefix helpers, tree membership, eventually periodic branches."""

import pytest

from limsupgames.trees import (EMPTY_PREFIX, EventuallyPeriodicBranch,
                               IllegalBranchError, binary_tree, checked_branch,
                               format_prefix, full_tree, is_proper_prefix,
                               nat_tree, parse_branch, parse_prefix,
                               prefix_extend, prefix_parent)


def test_prefix_helpers():
    assert prefix_extend((), 3) == (3,)
    assert prefix_parent((1, 2)) == (1,)
    with pytest.raises(ValueError):
        prefix_parent(EMPTY_PREFIX)
    assert is_proper_prefix((), (0,))
    assert is_proper_prefix((1,), (1, 0))
    assert not is_proper_prefix((1,), (1,))
    assert not is_proper_prefix((1,), (0, 1))


def test_prefix_text_round_trip():
    for s in [(), (0,), (1, 0, 2), (7, 7)]:
        assert parse_prefix(format_prefix(s)) == s
    with pytest.raises(ValueError):
        parse_prefix("1,-2")
    with pytest.raises(ValueError):
        parse_prefix("a,b")


def test_tree_membership():
    b = binary_tree()
    assert b.contains((0, 1, 1))
    assert not b.contains((0, 2))
    assert b.alphabet == (0, 1)
    n = nat_tree()
    assert n.contains((0, 99, 3))
    assert n.all_naturals
    t = full_tree([0, 2])
    assert t.contains((2, 0, 2))
    assert not t.contains((1,))
    assert t.alphabet == (0, 2)


def test_branch_expansion():
    x = EventuallyPeriodicBranch((0,), (1, 0))
    assert x.first(6) == (0, 1, 0, 1, 0, 1)
    # prefix(t) runs through position t inclusive
    assert x.prefix(3) == (0, 1, 0, 1)
    assert [x.letter_at(t) for t in range(5)] == [0, 1, 0, 1, 0]
    with pytest.raises(ValueError):
        EventuallyPeriodicBranch((), ())


def test_equivalent_descriptors_expand_alike():
    a = EventuallyPeriodicBranch((0,), (0,))
    b = EventuallyPeriodicBranch((), (0,))
    assert a != b
    assert a.first(16) == b.first(16)


def test_suffix_key_shift_invariance():
    x = EventuallyPeriodicBranch((1, 0), (0, 1))
    # from inside the cycle, keys at positions one period apart coincide
    assert x.suffix_key(2) == x.suffix_key(4)
    assert x.suffix_key(2) != x.suffix_key(3)


def test_parse_branch():
    x = parse_branch("stem=0,1;cycle=1,0")
    assert x.stem == (0, 1) and x.cycle == (1, 0)
    assert parse_branch("stem=;cycle=0").stem == ()
    for bad in ["nonsense", "stem=0", "cycle=1", "stem=0;cycle=",
                "stem=0;loop=1"]:
        with pytest.raises(ValueError):
            parse_branch(bad)


def test_checked_branch():
    b = binary_tree()
    x = checked_branch(b, (0,), (1,))
    assert x.cycle == (1,)
    with pytest.raises(IllegalBranchError):
        checked_branch(b, (0, 2), (1,))
    with pytest.raises(IllegalBranchError):
        checked_branch(b, (), (3,))
