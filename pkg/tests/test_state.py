"""Tests for the trail and reversible data structures."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqcp.state import RevInt, RevIntArray, RevSparseSet, Trail, TriPartition


# ---------------------------------------------------------------------------
# Trail / RevInt
# ---------------------------------------------------------------------------


def test_fresh_trail_first_level_is_zero() -> None:
    trail = Trail()
    assert trail.save_level() == 0
    assert trail.save_level() == 1


def test_restore_unknown_level_is_an_error() -> None:
    trail = Trail()
    with pytest.raises(ValueError):
        trail.restore_level(0)
    lvl = trail.save_level()
    trail.restore_level(lvl)
    with pytest.raises(ValueError):
        trail.restore_level(lvl)  # already closed


def test_rev_int_restores_per_level() -> None:
    trail = Trail()
    x = RevInt(trail, 10)
    l0 = trail.save_level()
    x.set(20)
    x.set(30)
    l1 = trail.save_level()
    x.set(40)
    trail.restore_level(l1)
    assert x.value == 30
    trail.restore_level(l0)
    assert x.value == 10


def test_rev_int_writes_without_open_level_are_permanent() -> None:
    trail = Trail()
    x = RevInt(trail, 1)
    x.set(2)
    lvl = trail.save_level()
    x.set(3)
    trail.restore_level(lvl)
    assert x.value == 2


def test_restore_skipping_levels_unwinds_all_of_them() -> None:
    trail = Trail()
    x = RevInt(trail, 0)
    l0 = trail.save_level()
    x.set(1)
    trail.save_level()
    x.set(2)
    trail.save_level()
    x.set(3)
    trail.restore_level(l0)
    assert x.value == 0
    assert trail.level == 0


def test_rev_int_array_per_slot_trailing() -> None:
    trail = Trail()
    a = RevIntArray(trail, [0, 1, 2, 3])
    lvl = trail.save_level()
    a[0] = 9
    a[2] = 9
    a[0] = 8  # second write to same slot within the level
    assert list(a) == [8, 1, 9, 3]
    trail.restore_level(lvl)
    assert list(a) == [0, 1, 2, 3]


# ---------------------------------------------------------------------------
# RevSparseSet
# ---------------------------------------------------------------------------


def test_sparse_set_membership_and_iteration() -> None:
    trail = Trail()
    s = RevSparseSet(trail, 5)
    assert sorted(s) == [0, 1, 2, 3, 4]
    s.remove(2)
    s.remove(2)  # removing an absent element is a no-op
    assert sorted(s) == [0, 1, 3, 4]
    assert 2 not in s
    assert len(s) == 4


def test_sparse_set_restore() -> None:
    trail = Trail()
    s = RevSparseSet(trail, 6)
    s.remove(5)  # permanent (no open level)
    lvl = trail.save_level()
    s.remove(0)
    s.remove(3)
    inner = trail.save_level()
    s.remove_all()
    assert len(s) == 0
    trail.restore_level(inner)
    assert sorted(s) == [1, 2, 4]
    trail.restore_level(lvl)
    assert sorted(s) == [0, 1, 2, 3, 4]


def test_sparse_set_explicit_members() -> None:
    trail = Trail()
    s = RevSparseSet(trail, 8, members=[1, 5, 7])
    assert sorted(s) == [1, 5, 7]
    trail.save_level()
    with pytest.raises(RuntimeError):
        s.add(2)


# ---------------------------------------------------------------------------
# TriPartition
# ---------------------------------------------------------------------------


def test_tripartition_moves_and_queries() -> None:
    trail = Trail()
    p = TriPartition(trail, 5, required=[0])
    assert p.is_required(0)
    assert p.is_possible(3)
    p.exclude(4)
    assert p.is_excluded(4)
    assert sorted(p.required()) == [0]
    assert sorted(p.possible()) == [1, 2, 3]
    assert sorted(p.excluded()) == [4]
    p.require(0)  # idempotent
    p.exclude(4)  # idempotent
    with pytest.raises(ValueError):
        p.require(4)
    with pytest.raises(ValueError):
        p.exclude(0)


def test_tripartition_restore() -> None:
    trail = Trail()
    p = TriPartition(trail, 6, required=[0, 1])
    lvl = trail.save_level()
    p.require(2)
    p.exclude(3)
    p.exclude(5)
    assert sorted(p.required()) == [0, 1, 2]
    assert sorted(p.excluded()) == [3, 5]
    trail.restore_level(lvl)
    assert sorted(p.required()) == [0, 1]
    assert sorted(p.possible()) == [2, 3, 4, 5]
    assert p.excluded() == []


# ---------------------------------------------------------------------------
# Randomized scripts checked against a deep-copy shadow
# ---------------------------------------------------------------------------


def _snapshot(x: RevInt, a: RevIntArray, s: RevSparseSet, p: TriPartition):
    return (
        x.value,
        list(a),
        frozenset(s),
        frozenset(p.required()),
        frozenset(p.possible()),
        frozenset(p.excluded()),
    )


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_randomized_scripts_match_snapshot_shadow(seed: int) -> None:
    """Random (save, mutate, restore) scripts restore exactly the saved state."""
    rng = random.Random(seed)
    n = 8
    trail = Trail()
    x = RevInt(trail, 0)
    a = RevIntArray(trail, [0] * 4)
    s = RevSparseSet(trail, n)
    p = TriPartition(trail, n)

    saved: list[tuple[int, object]] = []  # (level-id, snapshot)
    for _ in range(300):
        op = rng.random()
        if op < 0.25:
            saved.append((trail.save_level(), _snapshot(x, a, s, p)))
        elif op < 0.35 and saved:
            idx = rng.randrange(len(saved))
            level, snap = saved[idx]
            del saved[idx:]
            trail.restore_level(level)
            assert _snapshot(x, a, s, p) == snap
        elif op < 0.5:
            x.set(rng.randrange(100))
        elif op < 0.65:
            a[rng.randrange(4)] = rng.randrange(100)
        elif op < 0.8:
            s.remove(rng.randrange(n))
        else:
            v = rng.randrange(n)
            if p.is_possible(v):
                (p.require if rng.random() < 0.5 else p.exclude)(v)
    # unwind everything at the end
    if saved:
        level, snap = saved[0]
        trail.restore_level(level)
        assert _snapshot(x, a, s, p) == snap
