"""Tests for the propagation kernel and depth-first search."""

from __future__ import annotations

import pytest

from seqcp.engine import (
    BoolVisitView,
    IntDomain,
    LessEqualOffset,
    Propagator,
    Solver,
    SumBoolsEquals,
    SumEquals,
)
from seqcp.sequence import SequenceDomain
from seqcp.state import Inconsistency


class Apply:
    """Minimal decision wrapper for tests."""

    def __init__(self, fn) -> None:
        self.fn = fn

    def apply(self) -> None:
        self.fn()


# ---------------------------------------------------------------------------
# IntDomain
# ---------------------------------------------------------------------------


def test_int_domain_bounds() -> None:
    s = Solver()
    x = IntDomain(s.trail, 0, 10, name="x")
    x.set_min(3)
    x.set_max(7)
    x.set_min(2)  # weaker bound: ignored
    assert (x.min, x.max) == (3, 7)
    assert not x.is_fixed()
    x.fix(5)
    assert x.is_fixed() and x.value == 5
    with pytest.raises(Inconsistency):
        x.set_min(6)
    with pytest.raises(ValueError):
        IntDomain(s.trail, 4, 2)


def test_int_domain_backtracks() -> None:
    s = Solver()
    x = IntDomain(s.trail, 0, 10)
    lvl = s.trail.save_level()
    x.fix(4)
    s.trail.restore_level(lvl)
    assert (x.min, x.max) == (0, 10)


# ---------------------------------------------------------------------------
# BoolVisitView channeling
# ---------------------------------------------------------------------------


def test_bool_view_reflects_node_status() -> None:
    s = Solver()
    seq = SequenceDomain(s.trail, 5)
    v = BoolVisitView(seq, 2)
    assert not v.is_fixed() and v.can_be_true() and v.can_be_false()
    seq.require(2)
    assert v.is_fixed() and v.is_true() and not v.can_be_false()
    w = BoolVisitView(seq, 3)
    seq.exclude(3)
    assert w.is_fixed() and w.is_false() and not w.can_be_true()


def test_bool_view_assignment_routes_to_sequence() -> None:
    s = Solver()
    seq = SequenceDomain(s.trail, 5)
    BoolVisitView(seq, 1).set(True)
    BoolVisitView(seq, 2).set(False)
    assert seq.is_required(1)
    assert seq.is_excluded(2)
    with pytest.raises(Inconsistency):
        BoolVisitView(seq, 1).set(False)


def test_member_nodes_read_as_visited() -> None:
    s = Solver()
    seq = SequenceDomain(s.trail, 5)
    seq.insert(0, 2)
    v = BoolVisitView(seq, 2)
    assert v.is_fixed() and v.is_true()


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------


def test_fixpoint_chains_inequalities() -> None:
    s = Solver()
    x = IntDomain(s.trail, 0, 10, "x")
    y = IntDomain(s.trail, 0, 10, "y")
    z = IntDomain(s.trail, 0, 10, "z")
    s.post(LessEqualOffset(x, y, -1))  # x <= y - 1
    s.post(LessEqualOffset(y, z, -1))  # y <= z - 1
    assert (x.max, y.max) == (8, 9)
    z.set_max(5)
    s.fixpoint()
    assert (x.max, y.max) == (3, 4)
    x.set_min(3)
    s.fixpoint()
    assert (y.min, z.min) == (4, 5)
    assert x.is_fixed() and y.is_fixed() and z.is_fixed()


def test_root_infeasibility_raises_on_post() -> None:
    s = Solver()
    x = IntDomain(s.trail, 5, 10)
    y = IntDomain(s.trail, 0, 2)
    with pytest.raises(Inconsistency):
        s.post(LessEqualOffset(x, y, 0))  # x <= y impossible


def test_queue_is_clean_after_propagation_failure() -> None:
    s = Solver()
    x = IntDomain(s.trail, 0, 10)
    y = IntDomain(s.trail, 0, 3)
    p = LessEqualOffset(y, x, 0)  # y <= x
    s.post(p)
    x.set_max(8)  # schedules p
    with pytest.raises(Inconsistency):
        y.set_min(2)
        x.set_max(1)  # makes y <= x impossible
        s.fixpoint()
    assert not s._queue
    assert not p.scheduled


def test_sum_bounds_propagate_both_ways() -> None:
    s = Solver()
    xs = [IntDomain(s.trail, 0, 5) for _ in range(3)]
    total = IntDomain(s.trail, 0, 100)
    s.post(SumEquals(xs, total))
    assert (total.min, total.max) == (0, 15)
    total.set_max(4)
    s.fixpoint()
    assert all(x.max == 4 for x in xs)
    xs[0].set_min(3)
    s.fixpoint()
    assert total.min == 3
    assert all(x.max == 1 for x in xs[1:])


def test_exactly_one_visit_forces_and_fails() -> None:
    s = Solver()
    seqs = [SequenceDomain(s.trail, 4) for _ in range(2)]
    views = [BoolVisitView(sq, 1) for sq in seqs]
    s.post(SumBoolsEquals(views, 1))
    seqs[0].exclude(1)
    s.fixpoint()
    assert seqs[1].is_required(1)  # last open view was forced true
    with pytest.raises(Inconsistency):
        seqs[1].exclude(1)

    s2 = Solver()
    seqs2 = [SequenceDomain(s2.trail, 4) for _ in range(2)]
    views2 = [BoolVisitView(sq, 1) for sq in seqs2]
    s2.post(SumBoolsEquals(views2, 1))
    seqs2[0].require(1)
    s2.fixpoint()
    assert seqs2[1].is_excluded(1)  # the one true view excludes the others


# ---------------------------------------------------------------------------
# Depth-first search
# ---------------------------------------------------------------------------


def make_enumeration_model() -> tuple[Solver, list[IntDomain]]:
    s = Solver()
    return s, [IntDomain(s.trail, 0, 1, f"b{i}") for i in range(3)]


def label_branching(xs):
    def branching():
        for x in xs:
            if not x.is_fixed():
                return [Apply(lambda x=x: x.fix(0)), Apply(lambda x=x: x.fix(1))]
        return []

    return branching


def test_dfs_enumerates_all_assignments() -> None:
    s, xs = make_enumeration_model()
    found: list[tuple[int, ...]] = []
    stats = s.dfs(label_branching(xs), on_solution=lambda: found.append(tuple(x.value for x in xs)))
    assert stats.solutions == 8
    assert len(set(found)) == 8
    assert not stats.stopped
    # search backtracked fully: domains are intact
    assert all((x.min, x.max) == (0, 1) for x in xs)


def test_dfs_solution_limit() -> None:
    s, xs = make_enumeration_model()
    stats = s.dfs(label_branching(xs), solution_limit=3)
    assert stats.solutions == 3
    assert stats.stopped


def test_dfs_fail_limit() -> None:
    s = Solver()
    x = IntDomain(s.trail, 0, 1, "x")
    y = IntDomain(s.trail, 0, 1, "y")

    class EvenSum(Propagator):
        def watches(self):
            return [x, y]

        def propagate(self):
            if x.is_fixed() and y.is_fixed() and (x.value + y.value) % 2:
                raise Inconsistency("sum must be even")

    s.post(EvenSum())

    def branching():
        for v in (x, y):
            if not v.is_fixed():
                return [Apply(lambda v=v, k=k: v.fix(k)) for k in range(v.min, v.max + 1)]
        return []

    stats = s.dfs(branching, fail_limit=2)
    assert stats.stopped
    assert stats.failures == 2
    assert stats.solutions == 1  # (0, 0) found before the limit hit


def test_dfs_branch_and_bound_minimizes_with_strict_improvement() -> None:
    s = Solver()
    x = IntDomain(s.trail, 0, 2, "x")
    y = IntDomain(s.trail, 0, 2, "y")
    obj = IntDomain(s.trail, 0, 100, "obj")
    s.post(SumEquals([x, y], obj))

    seen: list[int] = []

    def branching():
        # branch on values descending so several improving solutions exist
        for v in (x, y):
            if not v.is_fixed():
                return [Apply(lambda v=v, k=k: v.fix(k)) for k in range(v.max, v.min - 1, -1)]
        return []

    stats = s.dfs(branching, on_solution=lambda: seen.append(obj.value), objective=obj)
    assert stats.best_objective == 0
    assert seen == sorted(seen, reverse=True)
    assert len(seen) == len(set(seen))  # strict improvement: no repeats
    assert seen[-1] == 0

    # ascending order finds the optimum first and proves it without more solutions
    s2 = Solver()
    x2 = IntDomain(s2.trail, 0, 2)
    y2 = IntDomain(s2.trail, 0, 2)
    obj2 = IntDomain(s2.trail, 0, 100)
    s2.post(SumEquals([x2, y2], obj2))

    def branching2():
        for v in (x2, y2):
            if not v.is_fixed():
                return [Apply(lambda v=v, k=k: v.fix(k)) for k in range(v.min, v.max + 1)]
        return []

    stats2 = s2.dfs(branching2, objective=obj2)
    assert stats2.solutions == 1
    assert stats2.best_objective == 0
