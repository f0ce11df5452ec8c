"""Constraint-propagation kernel: domains, propagators, fixpoint, search.

The solver owns one trail shared by all variables.  Propagators are
stateless: each call recomputes its filtering from the current domains, so
running one twice in a row changes nothing (idempotence at fixpoint).  A
FIFO queue with a per-propagator scheduled flag drives propagation to a
fixpoint; a domain wipeout raises :class:`~seqcp.state.Inconsistency`,
which search catches to backtrack.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol, Sequence

from seqcp.sequence import SequenceDomain
from seqcp.state import Inconsistency, RevInt, Trail


class IntDomain:
    """Integer variable represented by reversible bounds only."""

    def __init__(self, trail: Trail, lo: int, hi: int, name: str = "") -> None:
        if lo > hi:
            raise ValueError(f"empty initial domain [{lo}, {hi}]")
        self._min = RevInt(trail, lo)
        self._max = RevInt(trail, hi)
        self.name = name
        self.on_change: list[Callable[[], None]] = []

    @property
    def min(self) -> int:
        return self._min.value

    @property
    def max(self) -> int:
        return self._max.value

    def is_fixed(self) -> bool:
        return self._min.value == self._max.value

    @property
    def value(self) -> int:
        if not self.is_fixed():
            raise ValueError(f"variable {self.name or id(self)} is not fixed")
        return self._min.value

    def set_min(self, lo: int) -> None:
        if lo <= self._min.value:
            return
        if lo > self._max.value:
            raise Inconsistency(f"{self.name}: lower bound {lo} above upper bound {self._max.value}")
        self._min.set(lo)
        self._fire()

    def set_max(self, hi: int) -> None:
        if hi >= self._max.value:
            return
        if hi < self._min.value:
            raise Inconsistency(f"{self.name}: upper bound {hi} below lower bound {self._min.value}")
        self._max.set(hi)
        self._fire()

    def fix(self, v: int) -> None:
        self.set_min(v)
        self.set_max(v)

    def _fire(self) -> None:
        for cb in self.on_change:
            cb()

    def __repr__(self) -> str:
        label = f"{self.name}=" if self.name else ""
        if self.is_fixed():
            return f"{label}{self.min}"
        return f"{label}[{self.min}..{self.max}]"


class BoolVisitView:
    """Boolean view "node `v` is visited by this sequence".

    The view holds no state of its own: it is fixed exactly when the node is
    no longer merely possible, true when the node is required, false when it
    is excluded.  Assigning it routes back into the sequence domain.
    """

    def __init__(self, seq: SequenceDomain, node: int) -> None:
        self.seq = seq
        self.node = node

    def is_fixed(self) -> bool:
        return not self.seq.is_possible(self.node)

    def is_true(self) -> bool:
        return self.seq.is_required(self.node)

    def is_false(self) -> bool:
        return self.seq.is_excluded(self.node)

    def can_be_true(self) -> bool:
        return not self.seq.is_excluded(self.node)

    def can_be_false(self) -> bool:
        return not self.seq.is_required(self.node)

    def set(self, value: bool) -> None:
        if value:
            self.seq.require(self.node)
        else:
            self.seq.exclude(self.node)

    @property
    def on_change(self) -> list[Callable[[], None]]:
        return self.seq.on_change

    def __repr__(self) -> str:
        if self.is_true():
            s = "true"
        elif self.is_false():
            s = "false"
        else:
            s = "?"
        return f"visit(node={self.node})={s}"


class Propagator:
    """Base class for stateless filtering procedures."""

    def __init__(self) -> None:
        self.scheduled = False

    def watches(self) -> Iterable[object]:
        """Variables whose changes re-schedule this propagator."""
        return ()

    def propagate(self) -> None:
        raise NotImplementedError


class Decision(Protocol):
    """Anything search can apply as one branch of a choice."""

    def apply(self) -> None: ...


class StopSearch(Exception):
    """Internal signal: a search limit was reached."""


@dataclass
class SearchStats:
    """Counters reported by one search run."""

    nodes: int = 0
    failures: int = 0
    solutions: int = 0
    best_objective: int | None = None
    stopped: bool = False  # True when a limit cut the search short


class Solver:
    """Propagation engine and depth-first search over one shared trail."""

    def __init__(self) -> None:
        self.trail = Trail()
        self._queue: deque[Propagator] = deque()
        self.propagators: list[Propagator] = []

    # -- propagation ---------------------------------------------------------

    def post(self, p: Propagator) -> None:
        """Register a propagator, run it once, and propagate to fixpoint.

        Raises Inconsistency if the model is infeasible at the root.
        """
        self.propagators.append(p)
        for var in p.watches():
            var.on_change.append(lambda p=p: self.schedule(p))
        self.schedule(p)
        self.fixpoint()

    def schedule(self, p: Propagator) -> None:
        if not p.scheduled:
            p.scheduled = True
            self._queue.append(p)

    def fixpoint(self) -> None:
        """Run scheduled propagators until no domain changes remain."""
        try:
            while self._queue:
                p = self._queue.popleft()
                p.scheduled = False
                p.propagate()
        except Inconsistency:
            while self._queue:
                self._queue.popleft().scheduled = False
            raise

    # -- search ----------------------------------------------------------------

    def dfs(
        self,
        branching: Callable[[], Sequence[Decision]],
        on_solution: Callable[[], None] | None = None,
        objective: IntDomain | None = None,
        fail_limit: int | None = None,
        solution_limit: int | None = None,
        time_limit: float | None = None,
    ) -> SearchStats:
        """Depth-first search; a leaf is reached when `branching` returns ().

        With an `objective` (minimized), every solution installs the bound
        "objective <= best - 1" on all later branches, so only strictly
        improving solutions are visited; the objective must be fixed at
        leaves by propagation.  Limits stop the search early and mark
        `stats.stopped`.
        """
        stats = SearchStats()
        deadline = time.monotonic() + time_limit if time_limit is not None else None
        best: int | None = None

        def bound() -> None:
            if objective is not None and best is not None:
                objective.set_max(best - 1)

        def recurse() -> None:
            nonlocal best
            if deadline is not None and time.monotonic() > deadline:
                raise StopSearch
            stats.nodes += 1
            decisions = branching()
            if not decisions:
                stats.solutions += 1
                if objective is not None:
                    best = objective.min
                    stats.best_objective = best
                if on_solution is not None:
                    on_solution()
                if solution_limit is not None and stats.solutions >= solution_limit:
                    raise StopSearch
                return
            for d in decisions:
                lvl = self.trail.save_level()
                try:
                    d.apply()
                    bound()
                    self.fixpoint()
                    recurse()
                except Inconsistency:
                    stats.failures += 1
                finally:
                    self.trail.restore_level(lvl)
                if fail_limit is not None and stats.failures >= fail_limit:
                    raise StopSearch

        try:
            recurse()
        except StopSearch:
            stats.stopped = True
        return stats


# ---------------------------------------------------------------------------
# Arithmetic propagators
# ---------------------------------------------------------------------------


class SumEquals(Propagator):
    """total == sum(xs), by bounds reasoning."""

    def __init__(self, xs: Sequence[IntDomain], total: IntDomain) -> None:
        super().__init__()
        self.xs = list(xs)
        self.total = total

    def watches(self) -> Iterable[object]:
        return [*self.xs, self.total]

    def propagate(self) -> None:
        sum_min = sum(x.min for x in self.xs)
        sum_max = sum(x.max for x in self.xs)
        self.total.set_min(sum_min)
        self.total.set_max(sum_max)
        for x in self.xs:
            x.set_max(self.total.max - (sum_min - x.min))
            x.set_min(self.total.min - (sum_max - x.max))


class LessEqualOffset(Propagator):
    """x <= y + c, by bounds reasoning."""

    def __init__(self, x: IntDomain, y: IntDomain, c: int) -> None:
        super().__init__()
        self.x = x
        self.y = y
        self.c = c

    def watches(self) -> Iterable[object]:
        return [self.x, self.y]

    def propagate(self) -> None:
        self.x.set_max(self.y.max + self.c)
        self.y.set_min(self.x.min - self.c)


class BoolEquals(Propagator):
    """Two boolean views always take the same value."""

    def __init__(self, x: BoolVisitView, y: BoolVisitView) -> None:
        super().__init__()
        self.x = x
        self.y = y

    def watches(self) -> Iterable[object]:
        if self.x.seq is self.y.seq:
            return [self.x.seq]
        return [self.x.seq, self.y.seq]

    def propagate(self) -> None:
        for a, b in ((self.x, self.y), (self.y, self.x)):
            if a.is_fixed():
                b.set(a.is_true())


class SumBoolsEquals(Propagator):
    """Exactly `k` of the boolean views are true."""

    def __init__(self, views: Sequence[BoolVisitView], k: int) -> None:
        super().__init__()
        self.views = list(views)
        self.k = k

    def watches(self) -> Iterable[object]:
        # several views may share one underlying sequence; watch each once
        seen: list[object] = []
        for v in self.views:
            if v.seq not in seen:
                seen.append(v.seq)
        return seen

    def propagate(self) -> None:
        n_true = sum(1 for v in self.views if v.is_true())
        undecided = [v for v in self.views if not v.is_fixed()]
        if n_true > self.k or n_true + len(undecided) < self.k:
            raise Inconsistency(
                f"{n_true} views are true, {len(undecided)} open, but exactly {self.k} must hold"
            )
        if n_true == self.k:
            for v in undecided:
                v.set(False)
        elif n_true + len(undecided) == self.k:
            for v in undecided:
                v.set(True)
