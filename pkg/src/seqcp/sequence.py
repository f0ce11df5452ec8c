"""Reversible sequence-variable domain with a quadratic insertion encoding.

A sequence variable ranges over all node sequences that start at a fixed
``alpha``, end at a fixed ``omega``, visit every *required* node, avoid every
*excluded* node, and extend the current *partial sequence* (members keep
their relative order).  Instead of storing forbidden "node ``x`` may not
appear between ``a`` and ``b``" triples, the domain keeps the complement as
a directed graph over the nodes: an edge ``(p, v)`` with ``p`` a member means
"``v`` may still be placed immediately after ``p``".  Growing the partial
sequence or forbidding a placement only ever *removes* edges, so the whole
domain backtracks through the trail.

The encoding supports O(1) feasibility tests for a single insertion,
cheap enumeration of the remaining insertion points of a node, and an
insertion counter per node that drives two automatic rules:

* a node whose counter reaches zero can no longer be visited and is excluded
  (a wipeout if it was required);
* a required node whose counter reaches one is inserted at its unique
  remaining spot.
"""

from __future__ import annotations

from itertools import permutations
from typing import Callable, Iterator

from seqcp.state import (
    Inconsistency,
    RevInt,
    RevIntArray,
    RevSparseSet,
    Trail,
    TriPartition,
)


class SequenceDomain:
    """Domain of one sequence variable over nodes ``0 … n-1``.

    Node ids are dense.  ``alpha`` and ``omega`` are the fixed first and
    last members; the successor array closes the cycle (``succ[omega] ==
    alpha``) purely for bookkeeping.  Non-members are self-loops in the
    successor/predecessor arrays.
    """

    def __init__(self, trail: Trail, n: int, alpha: int = 0, omega: int | None = None) -> None:
        if n < 2:
            raise ValueError("a sequence needs at least its two endpoint nodes")
        if omega is None:
            omega = n - 1
        if not (0 <= alpha < n and 0 <= omega < n) or alpha == omega:
            raise ValueError(f"invalid endpoints alpha={alpha}, omega={omega} for n={n}")
        self.n = n
        self.alpha = alpha
        self.omega = omega
        self.trail = trail

        succ = list(range(n))
        pred = list(range(n))
        succ[alpha], pred[omega] = omega, alpha
        succ[omega], pred[alpha] = alpha, omega
        self._succ = RevIntArray(trail, succ)
        self._pred = RevIntArray(trail, pred)

        # Initially every placement is open: edges (a, b) for all a != omega,
        # b != alpha, a != b, plus the bookkeeping cycle edge (omega, alpha).
        def out_nodes(a: int) -> list[int]:
            if a == omega:
                return [alpha]
            return [b for b in range(n) if b != a and b != alpha]

        def in_nodes(b: int) -> list[int]:
            if b == alpha:
                return [omega]
            return [a for a in range(n) if a != b and a != omega]

        self._out = [RevSparseSet(trail, n, members=out_nodes(a)) for a in range(n)]
        self._in = [RevSparseSet(trail, n, members=in_nodes(b)) for b in range(n)]

        self._insertable = RevSparseSet(
            trail, n, members=[v for v in range(n) if v not in (alpha, omega)]
        )
        self._status = TriPartition(trail, n, required=[alpha, omega])
        self._n_members = RevInt(trail, 2)
        # Each non-endpoint node starts with exactly one member predecessor: alpha.
        self._n_inserts = RevIntArray(
            trail, [0 if v in (alpha, omega) else 1 for v in range(n)]
        )

        #: Callbacks fired after a mutating operation changed the domain.
        self.on_change: list[Callable[[], None]] = []
        self._rev = 0

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    @property
    def revision(self) -> int:
        """Counter bumped on every domain change (not restored on backtrack).

        Lets a filtering pass detect that one of its own updates cascaded
        (auto-insert/auto-exclude) and that any snapshot it took is stale.
        """
        return self._rev

    def is_member(self, v: int) -> bool:
        """True iff `v` is in the partial sequence (non-members are self-loops)."""
        return self._succ[v] != v

    def is_required(self, v: int) -> bool:
        return self._status.is_required(v)

    def is_possible(self, v: int) -> bool:
        return self._status.is_possible(v)

    def is_excluded(self, v: int) -> bool:
        return self._status.is_excluded(v)

    def is_insertable(self, v: int) -> bool:
        """True iff `v` is neither a member nor excluded."""
        return v in self._insertable

    def is_fixed(self) -> bool:
        """True iff no node remains insertable: the sequence is decided."""
        return len(self._insertable) == 0

    def member_count(self) -> int:
        return self._n_members.value

    def n_inserts(self, v: int) -> int:
        """Number of members after which `v` may still be placed (0 for members)."""
        return self._n_inserts[v]

    def can_insert(self, p: int, v: int) -> bool:
        """O(1): may `v` be placed immediately after `p` right now?"""
        return v in self._insertable and self.is_member(p) and p in self._in[v]

    def next_node(self, v: int) -> int:
        """Successor of a member (`omega` wraps to `alpha`); self for non-members."""
        return self._succ[v]

    def prev_node(self, v: int) -> int:
        """Predecessor of a member (`alpha` wraps to `omega`); self for non-members."""
        return self._pred[v]

    def members(self) -> list[int]:
        """The partial sequence from `alpha` to `omega`, in visit order."""
        out = [self.alpha]
        cur = self._succ[self.alpha]
        while cur != self.alpha:
            out.append(cur)
            cur = self._succ[cur]
        return out

    def required(self) -> list[int]:
        return self._status.required()

    def possible(self) -> list[int]:
        return self._status.possible()

    def excluded(self) -> list[int]:
        return self._status.excluded()

    def insertable(self) -> list[int]:
        return list(self._insertable)

    def edges_to(self, v: int) -> list[int]:
        """Nodes `a` with an edge (a, v) still present."""
        return list(self._in[v])

    def edges_from(self, v: int) -> list[int]:
        """Nodes `b` with an edge (v, b) still present."""
        return list(self._out[v])

    def insertions(self, v: int) -> list[int]:
        """All members after which `v` may be placed.

        Iterates the smaller of (members, candidate predecessors of `v`), so
        the cost is proportional to the smaller side.
        """
        if v not in self._insertable:
            return []
        candidates = self._in[v]
        if self._n_members.value <= len(candidates):
            return [m for m in self._iter_members() if m in candidates]
        return [a for a in candidates if self._succ[a] != a]

    def insertions_after(self, v: int, p: int) -> list[int]:
        """Members strictly after `p` where `v` may be placed, in path order."""
        if not self.is_member(p):
            raise ValueError(f"node {p} is not in the partial sequence")
        out = []
        cur = self._succ[p]
        while cur != self.alpha:
            if self.can_insert(cur, v):
                out.append(cur)
            cur = self._succ[cur]
        return out

    def positions(self) -> dict[int, int]:
        """Rank of every member along the partial sequence (alpha = 0)."""
        return {m: i for i, m in enumerate(self._iter_members())}

    def _iter_members(self) -> Iterator[int]:
        yield self.alpha
        cur = self._succ[self.alpha]
        while cur != self.alpha:
            yield cur
            cur = self._succ[cur]

    def _strictly_precedes(self, a: int, b: int) -> bool:
        """True iff members `a` and `b` satisfy a before b in the partial sequence."""
        cur = self._succ[a]
        while cur != self.alpha:
            if cur == b:
                return True
            cur = self._succ[cur]
        return False

    # ------------------------------------------------------------------
    # Updates
    # ------------------------------------------------------------------

    def insert(self, v1: int, v2: int) -> None:
        """Place `v2` immediately after member `v1`.

        If `v2` is already a member at or after `v1`, this is a no-op.  If the
        placement is impossible (excluded node, member before `v1`, or the
        edge was removed), the domain wipes out.
        """
        rev0 = self._rev
        self._insert(v1, v2)
        if self._rev != rev0:
            self._fire()

    def _insert(self, v1: int, v2: int) -> None:
        if self.is_member(v2):
            if v1 == v2 or (self.is_member(v1) and self._strictly_precedes(v1, v2)):
                return
            raise Inconsistency(f"node {v2} is already placed before node {v1}")
        if not self.can_insert(v1, v2):
            raise Inconsistency(f"placing node {v2} after node {v1} is not allowed")

        self._status.require(v2)
        self._insertable.remove(v2)
        self._n_inserts[v2] = 0
        self._n_members.increment()
        v3 = self._succ[v1]
        # Every node with an edge to v2 is either a member (its edge encoded an
        # insertion of v2 that is now moot), or an insertable node that from now
        # on may — or may not — also be placed right after v2.
        for vi in list(self._in[v2]):
            if self._succ[vi] != vi:  # member
                if vi != v1:
                    self._remove_edge(vi, v2)
                    self._remove_edge(v2, self._succ[vi])
            elif not self.can_insert(v1, vi):
                # vi cannot go right after v1, hence not right after v2 either.
                self._remove_edge(v2, vi)
                self._remove_edge(vi, v2)
            else:
                # v2 becomes a new member predecessor of vi.
                self._n_inserts[vi] += 1
        self._succ[v1] = v2
        self._succ[v2] = v3
        self._pred[v3] = v2
        self._pred[v2] = v1
        self._remove_edge(v1, v3)
        self._rev += 1

    def not_between(self, v1: int, v2: int, v3: int) -> None:
        """Forbid `v2` from appearing anywhere between members `v1` and `v3`.

        A no-op when `v3` is at or before `v1`, or when `v2` is a member
        outside the window; a wipeout when `v2` is a member strictly inside
        it.  May auto-exclude `v2` (no placement left anywhere) or
        auto-insert it (required with a single placement left).
        """
        if not (self.is_member(v1) and self.is_member(v3)):
            raise ValueError("window endpoints must be members of the partial sequence")
        rev0 = self._rev
        self._not_between(v1, v2, v3)
        if self._rev != rev0:
            self._fire()

    def _not_between(self, v1: int, v2: int, v3: int) -> None:
        if self.is_member(v2):
            if self._strictly_precedes(v1, v2) and self._strictly_precedes(v2, v3):
                raise Inconsistency(
                    f"node {v2} is already placed between nodes {v1} and {v3}"
                )
            return
        if not self._strictly_precedes(v1, v3):
            return
        if self.is_excluded(v2):
            return
        cur = v1
        while cur != v3:
            if self.can_insert(cur, v2):
                nxt = self._succ[cur]
                self._remove_edge(cur, v2)
                self._remove_edge(v2, nxt)
                self._n_inserts[v2] -= 1
                if self._n_inserts[v2] == 0:
                    # No placement left anywhere: v2 cannot be visited.
                    self._exclude(v2)
                    return
            cur = self._succ[cur]
        if self._n_inserts[v2] == 1 and self.is_required(v2):
            (vi,) = self.insertions(v2)
            self._insert(vi, v2)

    def require(self, v: int) -> None:
        """Mark `v` as mandatory; wipeout if excluded, insert if one spot is left."""
        rev0 = self._rev
        self._require(v)
        if self._rev != rev0:
            self._fire()

    def _require(self, v: int) -> None:
        if self._status.is_required(v):
            return
        if self._status.is_excluded(v):
            raise Inconsistency(f"node {v} is excluded and cannot be required")
        self._status.require(v)
        self._rev += 1
        if self._n_inserts[v] == 1:
            (vi,) = self.insertions(v)
            self._insert(vi, v)

    def exclude(self, v: int) -> None:
        """Mark `v` as never visited; wipeout if required (members are required)."""
        rev0 = self._rev
        self._exclude(v)
        if self._rev != rev0:
            self._fire()

    def _exclude(self, v: int) -> None:
        if self._status.is_excluded(v):
            return
        if self._status.is_required(v):
            raise Inconsistency(f"node {v} is required and cannot be excluded")
        self._status.exclude(v)
        self._insertable.remove(v)
        self._n_inserts[v] = 0
        # Drop every edge touching v, in both adjacency directions.  Other
        # nodes' insertion counters are unaffected: v was not a member, so
        # none of these edges counted as an insertion of another node.
        for a in list(self._in[v]):
            self._remove_edge(a, v)
        for b in list(self._out[v]):
            self._remove_edge(v, b)
        self._rev += 1

    def insert_at_end(self, v: int) -> None:
        """Place `v` just before `omega` (i.e. after the current last stop)."""
        self.insert(self._pred[self.omega], v)

    def _remove_edge(self, a: int, b: int) -> None:
        if b in self._out[a]:
            self._out[a].remove(b)
            self._in[b].remove(a)
            self._rev += 1

    def _fire(self) -> None:
        for cb in self.on_change:
            cb()

    # ------------------------------------------------------------------
    # Exhaustive enumeration (test oracle) and self-checks
    # ------------------------------------------------------------------

    def enumerate_sequences(self, max_nodes: int = 8) -> list[tuple[int, ...]]:
        """All complete sequences in the domain, sorted; for tests on tiny n.

        A sequence is in the domain iff it extends the partial sequence,
        visits all required and no excluded nodes, and places every extra
        node in a gap whose left member still has an edge to it.  Every
        ordering of the nodes sharing one gap is a distinct sequence.
        """
        if self.n > max_nodes:
            raise ValueError(f"enumeration is a test oracle, limited to {max_nodes} nodes")
        members = self.members()
        gap_lefts = members[:-1]
        free = sorted(self.insertable())
        allowed = {v: [m for m in gap_lefts if self.can_insert(m, v)] for v in free}

        results: set[tuple[int, ...]] = set()
        assignment: dict[int, int | None] = {}

        def build() -> None:
            per_gap: dict[int, list[int]] = {m: [] for m in gap_lefts}
            for v in free:
                g = assignment[v]
                if g is not None:
                    per_gap[g].append(v)

            def expand(i: int, acc: list[int]) -> None:
                if i == len(members):
                    results.add(tuple(acc))
                    return
                m = members[i]
                acc.append(m)
                if m in per_gap and per_gap[m]:
                    for order in permutations(per_gap[m]):
                        expand(i + 1, acc + list(order))
                else:
                    expand(i + 1, acc)
                acc.pop()

            expand(0, [])

        def assign(i: int) -> None:
            if i == len(free):
                build()
                return
            v = free[i]
            if not self.is_required(v):
                assignment[v] = None
                assign(i + 1)
            for g in allowed[v]:
                assignment[v] = g
                assign(i + 1)
            assignment.pop(v, None)

        assign(0)
        return sorted(results, key=lambda s: (len(s), s))

    def check_invariants(self) -> None:
        """Verify every structural invariant; raises AssertionError on violation."""
        n = self.n
        succ = self._succ
        pred = self._pred

        def fail(msg: str) -> None:
            raise AssertionError(f"sequence domain invariant violated: {msg}\n{self.dump()}")

        # Mirrored adjacency: each edge is recorded in both endpoint sets.
        for a in range(n):
            for b in range(n):
                if (b in self._out[a]) != (a in self._in[b]):
                    fail(f"edge ({a},{b}) present in only one adjacency direction")
        # Successor/predecessor channeling, bijectivity, and the closing cycle.
        for a in range(n):
            if pred[succ[a]] != a:
                fail(f"pred[succ[{a}]] != {a}")
        if succ[self.omega] != self.alpha or pred[self.alpha] != self.omega:
            fail("the member cycle does not close from omega back to alpha")
        if len({succ[a] for a in range(n)}) != n:
            fail("successor array is not a permutation")
        # Exactly one circuit: every member is reachable from alpha.
        reach = set()
        cur = self.alpha
        while cur not in reach:
            reach.add(cur)
            cur = succ[cur]
        for v in range(n):
            if self.is_member(v) != (v in reach):
                fail(f"membership of node {v} disagrees with the successor circuit")
        # Direct-successor edges of members must still exist.
        for a in range(n):
            if self.is_member(a) and succ[a] not in self._out[a]:
                fail(f"path edge ({a},{succ[a]}) was dropped")
        # Member / required / insertable bookkeeping.
        if self._n_members.value != sum(1 for v in range(n) if self.is_member(v)):
            fail("member count drifted")
        for v in range(n):
            if self.is_member(v) and not self._status.is_required(v):
                fail(f"member node {v} is not marked required")
            expected_insertable = not self.is_member(v) and not self._status.is_excluded(v)
            if (v in self._insertable) != expected_insertable:
                fail(f"insertable status of node {v} is wrong")
            if self._status.is_excluded(v) != (
                len(self._in[v]) == 0 and len(self._out[v]) == 0
            ):
                fail(f"excluded node {v} must have no edges (and only excluded nodes may)")
        # Insertion counters.
        for v in range(n):
            if v in self._insertable:
                true_count = sum(1 for a in self._in[v] if self.is_member(a))
                if self._n_inserts[v] != true_count:
                    fail(f"insertion counter of node {v}: {self._n_inserts[v]} != {true_count}")
                if self._n_inserts[v] < 1:
                    fail(f"insertable node {v} has no insertion left")
                if self._status.is_required(v) and self._n_inserts[v] <= 1:
                    fail(f"required node {v} should have been auto-inserted")
            elif self._n_inserts[v] != 0:
                fail(f"non-insertable node {v} has a nonzero insertion counter")
        # Insertable nodes form a clique (every mutual placement stays open).
        ins = list(self._insertable)
        for a in ins:
            for b in ins:
                if a != b and a not in self._in[b]:
                    fail(f"insertable nodes {a},{b} lost their mutual edge")
        # An insertion needs both its edges: (a, v) exists iff (v, succ[a]) does.
        for a in range(n):
            if not self.is_member(a):
                continue
            b = succ[a]
            for v in self._insertable:
                if v in (a, b):
                    continue
                if (a in self._in[v]) != (b in self._out[v]):
                    fail(
                        f"insertion of {v} after {a} has only one of its two edges"
                    )

    def dump(self) -> str:
        """Readable snapshot of the whole domain state."""
        lines = [
            f"sequence: {' -> '.join(map(str, self.members()))}",
            f"insertable={sorted(self.insertable())} required={sorted(self.required())} "
            f"excluded={sorted(self.excluded())}",
        ]
        for v in range(self.n):
            lines.append(
                f"  node {v}: in={sorted(self._in[v])} out={sorted(self._out[v])} "
                f"nI={self._n_inserts[v]} pred={self._pred[v]} succ={self._succ[v]}"
            )
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"SequenceDomain({' -> '.join(map(str, self.members()))}, insertable={sorted(self.insertable())})"
