"""Global constraints over sequence domains.

Each propagator is stateless: every run recomputes its filtering from the
current domains.  They prune *insertions* — calls to
:meth:`~seqcp.sequence.SequenceDomain.not_between` — and tighten integer
bounds, and they are sound: a placement is only removed when no completion
of the partial sequence could use it.

A filtering pass may trigger cascades inside the sequence domain (a node
auto-inserted because one spot remains, or auto-excluded because none do).
Loops that iterate over snapshots therefore re-check ``can_insert`` before
acting on an entry, and the capacity propagator gathers its removals during
a read-only phase and applies them afterwards, so that its load profile is
never read after a mutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from seqcp.engine import IntDomain, Propagator
from seqcp.sequence import SequenceDomain
from seqcp.state import Inconsistency


class DistanceMatrix:
    """Square matrix of non-negative integer travel costs.

    Validated at construction: zero diagonal, no negative entries, and the
    triangle inequality ``d[i][k] <= d[i][j] + d[j][k]`` for all triples —
    the distance propagator's detour reasoning relies on it.  Index with
    ``matrix[i][j]``.
    """

    def __init__(self, rows: Sequence[Sequence[int]], validate: bool = True) -> None:
        self._rows = [[self._as_int(v) for v in row] for row in rows]
        n = len(self._rows)
        if any(len(row) != n for row in self._rows):
            raise ValueError("distance matrix must be square")
        self.n = n
        if validate and n:
            self._validate()

    @staticmethod
    def _as_int(v: object) -> int:
        i = int(v)  # type: ignore[arg-type]
        if i != v:
            raise ValueError(f"distance {v!r} is not an integer")
        return i

    def _validate(self) -> None:
        a = np.asarray(self._rows, dtype=np.int64)
        if np.any(np.diagonal(a) != 0):
            i = int(np.flatnonzero(np.diagonal(a))[0])
            raise ValueError(f"distance from node {i} to itself must be 0")
        if np.any(a < 0):
            i, k = map(int, np.argwhere(a < 0)[0])
            raise ValueError(f"negative distance between nodes {i} and {k}")
        for j in range(self.n):
            via = a[:, j, None] + a[None, j, :]
            bad = np.argwhere(via < a)
            if bad.size:
                i, k = map(int, bad[0])
                raise ValueError(
                    f"triangle inequality violated: d[{i}][{k}]={a[i, k]} exceeds "
                    f"d[{i}][{j}]+d[{j}][{k}]={via[i, k]} via node {j}"
                )

    @property
    def rows(self) -> list[list[int]]:
        return self._rows

    def __getitem__(self, i: int) -> list[int]:
        return self._rows[i]

    def __len__(self) -> int:
        return self.n


class Distance(Propagator):
    """Ties a sequence to the total travel cost of its visits.

    Keeps ``total >= cost of the partial sequence`` (exactly equal once the
    sequence is decided) and removes every placement whose detour would push
    the cost past ``total``'s upper bound.
    """

    def __init__(self, seq: SequenceDomain, matrix: DistanceMatrix, total: IntDomain) -> None:
        super().__init__()
        if matrix.n != seq.n:
            raise ValueError(f"matrix is {matrix.n}x{matrix.n} but the sequence has {seq.n} nodes")
        self.seq = seq
        self.total = total
        self._d = matrix.rows

    def watches(self) -> Iterable[object]:
        return [self.seq, self.total]

    def propagate(self) -> None:
        seq = self.seq
        d = self._d
        members = seq.members()
        length = sum(d[a][b] for a, b in zip(members, members[1:]))
        if seq.is_fixed():
            self.total.fix(length)
            return
        self.total.set_min(length)
        slack = self.total.max - length
        for vj in seq.insertable():
            for vi in seq.insertions(vj):
                if not seq.can_insert(vi, vj):  # an earlier removal cascaded
                    continue
                vk = seq.next_node(vi)
                detour = d[vi][vj] + d[vj][vk] - d[vi][vk]
                if detour > slack:
                    seq.not_between(vi, vj, vk)


class TransitionTimes(Propagator):
    """Links visit-start times through service durations and travel times.

    Consecutive members propagate their bounds to each other; a placement
    of node ``vj`` between members ``vi`` and ``vk`` is removed when the
    earliest arrival from ``vi`` or the latest departure towards ``vk``
    cannot respect ``start[vj]``; and the start of a node that must be
    visited but is not yet placed is bounded by its surviving placements.
    """

    def __init__(
        self,
        seq: SequenceDomain,
        starts: Sequence[IntDomain],
        service: Sequence[int],
        matrix: DistanceMatrix,
    ) -> None:
        super().__init__()
        if len(starts) != seq.n or len(service) != seq.n or matrix.n != seq.n:
            raise ValueError("starts, service times and matrix must cover every node")
        self.seq = seq
        self.starts = list(starts)
        self.service = list(service)
        self._d = matrix.rows

    def watches(self) -> Iterable[object]:
        return [self.seq, *self.starts]

    def _earliest(self, vi: int, vj: int) -> int:
        return self.starts[vi].min + self.service[vi] + self._d[vi][vj]

    def _latest(self, vj: int, vk: int) -> int:
        return self.starts[vk].max - self.service[vj] - self._d[vj][vk]

    def propagate(self) -> None:
        seq = self.seq
        starts = self.starts
        links = list(zip(seq.members(), seq.members()[1:]))
        for vi, vj in links:
            starts[vj].set_min(self._earliest(vi, vj))
        for vi, vj in reversed(links):
            starts[vi].set_max(self._latest(vi, vj))

        for vj in seq.insertable():
            for vi in seq.insertions(vj):
                if not seq.can_insert(vi, vj):
                    continue
                vk = seq.next_node(vi)
                earliest = self._earliest(vi, vj)
                latest = self._latest(vj, vk)
                if earliest > starts[vj].max or latest < starts[vj].min or earliest > latest:
                    seq.not_between(vi, vj, vk)

        for vj in seq.required():
            if not seq.is_insertable(vj):
                continue
            lo: int | None = None
            hi: int | None = None
            for vi in seq.insertions(vj):
                vk = seq.next_node(vi)
                earliest = self._earliest(vi, vj)
                latest = self._latest(vj, vk)
                lo = earliest if lo is None else min(lo, earliest)
                hi = latest if hi is None else max(hi, latest)
            if lo is not None:
                starts[vj].set_min(lo)
            if hi is not None:
                starts[vj].set_max(hi)


class Precedence(Propagator):
    """Keeps the nodes of a chain in their given relative order.

    Placed chain nodes must already appear in chain order.  A chain node
    that is not yet placed is confined to the window between its closest
    placed chain neighbours: it may not appear before the previous one nor
    after the next one.  Chain nodes that will not be visited constrain
    nothing.
    """

    def __init__(self, seq: SequenceDomain, order: Sequence[int]) -> None:
        super().__init__()
        chain = list(order)
        if len(set(chain)) != len(chain):
            raise ValueError("chain nodes must be distinct")
        for v in chain:
            if not 0 <= v < seq.n:
                raise ValueError(f"chain node {v} is out of range")
        self.seq = seq
        self.order = chain

    def watches(self) -> Iterable[object]:
        return [self.seq]

    def propagate(self) -> None:
        seq = self.seq
        pos = seq.positions()
        last = -1
        for v in self.order:
            p = pos.get(v)
            if p is None:
                continue
            if p < last:
                raise Inconsistency(f"node {v} is placed out of chain order")
            last = p

        pending: list[int] = []
        anchor = seq.alpha
        for vk in [*self.order, seq.omega]:
            if seq.is_insertable(vk):
                pending.append(vk)
            elif seq.is_member(vk):
                for vj in pending:
                    seq.not_between(seq.alpha, vj, anchor)
                    seq.not_between(vk, vj, seq.omega)
                pending.clear()
                anchor = vk
            # an excluded chain node neither bounds nor is bounded


@dataclass
class ActivitySet:
    """Paired pickup/delivery nodes with the quantity carried in between.

    Activity ``i`` picks up ``loads[i]`` units at node ``starts[i]`` and
    carries them until node ``ends[i]``; the running total may never exceed
    ``capacity``.  All start and end nodes must be distinct.
    """

    starts: list[int]
    ends: list[int]
    loads: list[int]
    capacity: int

    def __post_init__(self) -> None:
        self.starts = list(self.starts)
        self.ends = list(self.ends)
        self.loads = list(self.loads)
        if not (len(self.starts) == len(self.ends) == len(self.loads)):
            raise ValueError("starts, ends and loads must have the same length")
        nodes = self.starts + self.ends
        if len(set(nodes)) != len(nodes):
            raise ValueError("activity endpoints must be distinct nodes")
        if any(l < 0 for l in self.loads):
            raise ValueError("loads must be non-negative")
        if self.capacity < 0:
            raise ValueError("capacity must be non-negative")

    def __len__(self) -> int:
        return len(self.starts)


@dataclass
class LoadProfile:
    """Lower bounds on the quantity carried around each placed node.

    ``before[v]``, ``at[v]`` and ``after[v]`` bound the load while
    travelling into ``v``, during its visit, and while travelling out of it,
    in every completion of the partial sequence.  Rebuilt from scratch at
    each propagator run.

    An activity with both endpoints placed contributes over its whole span
    — there ``at`` and ``after`` coincide.  An activity with only its start
    placed contributes up to the first spot where its end still fits
    (``end_standin``); one with only its end placed contributes back to the
    last spot where its start still fits (``start_standin``).  Activities
    with no endpoint placed contribute nothing.
    """

    before: dict[int, int]
    at: dict[int, int]
    after: dict[int, int]
    placed: list[int] = field(default_factory=list)
    start_placed: list[int] = field(default_factory=list)
    end_placed: list[int] = field(default_factory=list)
    unplaced: list[int] = field(default_factory=list)
    skipped: list[int] = field(default_factory=list)
    end_standin: dict[int, int] = field(default_factory=dict)
    start_standin: dict[int, int] = field(default_factory=dict)


def build_load_profile(seq: SequenceDomain, activities: ActivitySet) -> LoadProfile:
    """Compute the mandatory load around each member of the sequence.

    Raises :class:`Inconsistency` when a fully placed activity has its end
    before its start, or when a half-placed activity has no spot left for
    its missing endpoint on the required side.
    """
    members = seq.members()
    pos = {m: i for i, m in enumerate(members)}
    prof = LoadProfile(
        before={m: 0 for m in members},
        at={m: 0 for m in members},
        after={m: 0 for m in members},
    )
    for i in range(len(activities)):
        s = activities.starts[i]
        e = activities.ends[i]
        load = activities.loads[i]
        if seq.is_excluded(s) or seq.is_excluded(e):
            prof.skipped.append(i)
            continue
        s_in = seq.is_member(s)
        e_in = seq.is_member(e)
        if s_in and e_in:
            if pos[s] >= pos[e]:
                raise Inconsistency(f"activity {i} is placed with its end before its start")
            prof.placed.append(i)
            lo, hi = pos[s], pos[e]
            for m in members[lo:hi]:
                prof.at[m] += load
                prof.after[m] += load
            for m in members[lo + 1 : hi + 1]:
                prof.before[m] += load
        elif s_in:
            w = s
            while not seq.can_insert(w, e):
                if w == seq.omega:
                    raise Inconsistency(f"no spot remains for the end of activity {i}")
                w = seq.next_node(w)
            prof.start_placed.append(i)
            prof.end_standin[i] = w
            lo, hi = pos[s], pos[w]
            for m in members[lo : hi + 1]:
                prof.at[m] += load
            for m in members[lo:hi]:
                prof.after[m] += load
            for m in members[lo + 1 : hi + 1]:
                prof.before[m] += load
        elif e_in:
            u = seq.prev_node(e)
            while not seq.can_insert(u, s):
                if u == seq.alpha:
                    raise Inconsistency(f"no spot remains for the start of activity {i}")
                u = seq.prev_node(u)
            prof.end_placed.append(i)
            prof.start_standin[i] = u
            lo, hi = pos[u] + 1, pos[e]
            for m in members[lo:hi]:
                prof.at[m] += load
                prof.after[m] += load
            for m in members[lo : hi + 1]:
                prof.before[m] += load
        else:
            prof.unplaced.append(i)
    return prof


class Cumulative(Propagator):
    """Capacity of paired pickup/delivery activities along one sequence.

    Expects each activity's endpoints to be tied together elsewhere (both
    visited or neither, start before end); this propagator enforces the
    capacity side.  It fails when the mandatory load profile already
    exceeds capacity, then removes placements that would necessarily
    overload some stretch: spots for a placed activity's missing endpoint,
    and spots for both endpoints of unplaced activities that no compatible
    partner spot can complete.

    Removals are gathered while the profile is read and applied at the end,
    so cascaded insertions can never be observed by a stale profile.
    """

    def __init__(self, seq: SequenceDomain, activities: ActivitySet) -> None:
        super().__init__()
        self.seq = seq
        self.activities = activities
        for v in activities.starts + activities.ends:
            if not 0 <= v < seq.n or v in (seq.alpha, seq.omega):
                raise ValueError(f"activity endpoint {v} is not a visitable node")

    def watches(self) -> Iterable[object]:
        return [self.seq]

    def propagate(self) -> None:
        seq = self.seq
        acts = self.activities
        cap = acts.capacity
        prof = build_load_profile(seq, acts)

        for m in prof.before:
            if max(prof.before[m], prof.at[m], prof.after[m]) > cap:
                raise Inconsistency(f"carried load around node {m} exceeds capacity {cap}")

        # (endpoint-to-remove, window-start, anchor, successor?) tuples: the
        # window end is the anchor itself, or the anchor's successor looked
        # up only at apply time — an earlier application may have inserted a
        # node right after the anchor, and the narrower window is the one
        # the profile reads justify.
        removals: list[tuple[int, int, int, bool]] = []
        for i in prof.start_placed:
            self._filter_end_spots(prof, i, removals)
        for i in prof.end_placed:
            self._filter_start_spots(prof, i, removals)
        for i in prof.unplaced:
            self._filter_unplaced(prof, i, removals)

        for node, v1, anchor, use_next in removals:
            v3 = seq.next_node(anchor) if use_next else anchor
            seq.not_between(v1, node, v3)

    def _filter_end_spots(
        self, prof: LoadProfile, i: int, removals: list[tuple[int, int, int, bool]]
    ) -> None:
        """The end of activity `i` (start placed) cannot pass an overloaded stretch."""
        seq = self.seq
        load = self.activities.loads[i]
        cap = self.activities.capacity
        v = seq.next_node(prof.end_standin[i])
        while v != seq.omega:
            # Putting the end at or past `v` keeps the load on board while
            # travelling into and visiting `v`, on top of what already must
            # be there (the profile counts this activity only up to its
            # stand-in, strictly before `v`).
            if max(prof.before[v], prof.at[v]) + load > cap:
                removals.append((self.activities.ends[i], v, seq.omega, False))
                return
            v = seq.next_node(v)

    def _filter_start_spots(
        self, prof: LoadProfile, i: int, removals: list[tuple[int, int, int, bool]]
    ) -> None:
        """The start of activity `i` (end placed) cannot precede an overloaded stretch."""
        seq = self.seq
        load = self.activities.loads[i]
        cap = self.activities.capacity
        v = prof.start_standin[i]
        while v != seq.alpha:
            # A start at or before `v` carries the load out of `v`; a start
            # strictly before `v` also carries it into and through `v`'s
            # visit.  The profile counts this activity only after `v`.
            if prof.after[v] + load > cap:
                removals.append((self.activities.starts[i], seq.alpha, v, True))
                return
            if max(prof.before[v], prof.at[v]) + load > cap:
                removals.append((self.activities.starts[i], seq.alpha, v, False))
                return
            v = seq.prev_node(v)

    def _filter_unplaced(
        self, prof: LoadProfile, i: int, removals: list[tuple[int, int, int, bool]]
    ) -> None:
        """Both endpoints of an unplaced activity need a compatible partner spot."""
        seq = self.seq
        s = self.activities.starts[i]
        e = self.activities.ends[i]
        if not (seq.is_insertable(s) and seq.is_insertable(e)):
            return
        load = self.activities.loads[i]
        cap = self.activities.capacity
        for v in seq.insertions(s):
            if not self._end_spot_reachable(prof, v, e, load, cap):
                removals.append((s, v, v, True))
        for v in seq.insertions(e):
            if not self._start_spot_reachable(prof, v, s, load, cap):
                removals.append((e, v, v, True))

    def _end_spot_reachable(
        self, prof: LoadProfile, v: int, e: int, load: int, cap: int
    ) -> bool:
        """Walking forward from start spot `v`: can `e` land before an overload?"""
        seq = self.seq
        if prof.after[v] + load > cap:
            return False
        vp = v
        while True:
            if seq.can_insert(vp, e):
                return True
            vp = seq.next_node(vp)
            if vp == seq.omega:
                return False
            if max(prof.before[vp], prof.at[vp]) + load > cap:
                return False
            if prof.after[vp] + load > cap:
                return False

    def _start_spot_reachable(
        self, prof: LoadProfile, v: int, s: int, load: int, cap: int
    ) -> bool:
        """Walking backward from end spot `v`: can `s` land before an overload?"""
        seq = self.seq
        if prof.after[v] + load > cap:
            return False
        vp = v
        while True:
            if seq.can_insert(vp, s):
                return True
            if vp == seq.alpha:
                return False
            if max(prof.before[vp], prof.at[vp]) + load > cap:
                return False
            vp = seq.prev_node(vp)
            if prof.after[vp] + load > cap:
                return False
