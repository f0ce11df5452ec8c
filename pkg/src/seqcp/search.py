"""Branching procedures and the Large Neighborhood Search driver.

Branching procedures turn the current state of one or more sequence
variables into an ordered list of decisions for the depth-first search in
:mod:`seqcp.engine`.  All of them follow the first-fail principle (branch
on the node with the fewest placements left) and return an empty list
exactly when every sequence is decided — the search's solution condition.

The LNS driver repeatedly relaxes a few pickup/delivery requests from the
incumbent, rebuilds the remaining visits in their incumbent order on a
fresh model, and searches for a strictly better completion under a failure
budget.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

from seqcp.engine import IntDomain, SearchStats, Solver
from seqcp.sequence import SequenceDomain
from seqcp.state import Inconsistency

# ---------------------------------------------------------------------------
# Decisions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InsertDecision:
    """Place `node` immediately after `after` in one sequence."""

    seq: SequenceDomain
    after: int
    node: int
    score: int = 0

    def apply(self) -> None:
        self.seq.insert(self.after, self.node)


@dataclass(frozen=True)
class NotBetweenDecision:
    """Forbid `node` from the window between members `v1` and `v3`."""

    seq: SequenceDomain
    v1: int
    node: int
    v3: int
    score: int = 0

    def apply(self) -> None:
        self.seq.not_between(self.v1, self.node, self.v3)


@dataclass(frozen=True)
class InsertPairDecision:
    """Place a pickup and its drop in one route with a single decision.

    Either placement may be skipped (predecessor ``None``) when that
    endpoint is already a member — a cascade can place one endpoint alone,
    and the branching then completes the pair.
    """

    route: SequenceDomain
    pick_after: int | None
    pick: int
    drop_after: int | None
    drop: int
    score: int = 0

    def apply(self) -> None:
        if self.pick_after is not None:
            self.route.insert(self.pick_after, self.pick)
        if self.drop_after is not None:
            self.route.insert(self.drop_after, self.drop)


@dataclass(frozen=True)
class FailDecision:
    """Signals a dead end: some visit has no placement left.

    Branching procedures must return an empty list only at solutions, so a
    search node with no usable branch gets this single always-failing
    decision instead.
    """

    reason: str = "no feasible branch"
    score: int = 0

    def apply(self) -> None:
        raise Inconsistency(self.reason)


# ---------------------------------------------------------------------------
# Generic branching over sequence variables
# ---------------------------------------------------------------------------


def _most_constrained_node(seqs: Sequence[SequenceDomain]) -> tuple[SequenceDomain, int] | None:
    """The insertable node with the fewest placements left, over all sequences.

    Ties break towards the lowest sequence index, then the lowest node id,
    keeping the search deterministic.
    """
    best_key: tuple[int, int, int] | None = None
    chosen: tuple[SequenceDomain, int] | None = None
    for si, seq in enumerate(seqs):
        for v in seq.insertable():
            key = (seq.n_inserts(v), si, v)
            if best_key is None or key < best_key:
                best_key = key
                chosen = (seq, v)
    return chosen


def two_step_branching(seqs: Sequence[SequenceDomain]) -> list[InsertDecision | FailDecision]:
    """Pick the most constrained node, then branch on each of its placements.

    Placements are tried in path order.  Sibling branches lead to disjoint
    sets of sequences: the same node placed after different predecessors
    can never converge to the same completion.  Note that every branch
    *places* the node, so this search only decides sequences whose
    remaining nodes must all be visited; use :func:`binary_branching` when
    nodes may also be dropped.
    """
    chosen = _most_constrained_node(seqs)
    if chosen is None:
        return []
    seq, v = chosen
    points = [m for m in seq.members() if seq.can_insert(m, v)]
    decisions = [InsertDecision(seq, m, v, score=i) for i, m in enumerate(points)]
    return decisions or [FailDecision(f"node {v} has no placement left")]


def binary_branching(seqs: Sequence[SequenceDomain]) -> list[InsertDecision | NotBetweenDecision | FailDecision]:
    """Left: place the node at one spot; right: forbid exactly that spot.

    The two branches split the domain without loss: every completion
    either uses the spot or does not.  Unlike the n-ary scheme this also
    decides optional nodes — forbidding spot after spot drives the node
    to exclusion.
    """
    chosen = _most_constrained_node(seqs)
    if chosen is None:
        return []
    seq, v = chosen
    for m in seq.members():
        if seq.can_insert(m, v):
            return [
                InsertDecision(seq, m, v, score=0),
                NotBetweenDecision(seq, m, v, seq.next_node(m), score=1),
            ]
    return [FailDecision(f"node {v} has no placement left")]


# ---------------------------------------------------------------------------
# Request-insertion branching for pickup-and-delivery routes
# ---------------------------------------------------------------------------

#: Scores one candidate request insertion: (vehicle index, (pickup, drop),
#: pickup predecessor, drop predecessor).  A ``None`` predecessor means
#: that endpoint is already placed and only the other leg is being scored.
PairCostFn = Callable[[int, tuple[int, int], int | None, int | None], int]


def darp_branching(
    routes: Sequence[SequenceDomain],
    requests: Sequence[tuple[int, int]],
    cost_fn: PairCostFn | None = None,
) -> list[InsertPairDecision | FailDecision]:
    """One decision per way of placing the most constrained open request.

    The request minimizing ``sum over vehicles of placements(pickup) *
    placements(drop)`` is selected (fewest combined options first; a
    request with one endpoint already placed scores 0 and is completed
    first).  For each vehicle, each pickup spot ``p+`` is combined with
    each drop spot after ``p+`` — including the fresh pickup itself — and
    the resulting decisions are sorted by increasing heuristic cost.
    """
    is_placed = {}
    for pick, drop in requests:
        is_placed[pick] = any(r.is_member(pick) for r in routes)
        is_placed[drop] = any(r.is_member(drop) for r in routes)

    best_score: int | None = None
    selected: tuple[int, int] | None = None
    for pick, drop in requests:
        if is_placed[pick] and is_placed[drop]:
            continue
        score = sum(r.n_inserts(pick) * r.n_inserts(drop) for r in routes)
        if best_score is None or score < best_score:
            best_score = score
            selected = (pick, drop)
    if selected is None:
        return []  # every request fully placed: all routes are decided
    pick, drop = selected

    keyed: list[tuple[tuple[int, int, int, int], InsertPairDecision]] = []

    def propose(k: int, route: SequenceDomain, p_plus: int | None, p_minus: int | None) -> None:
        cost = cost_fn(k, (pick, drop), p_plus, p_minus) if cost_fn else 0
        decision = InsertPairDecision(route, p_plus, pick, p_minus, drop, cost)
        keyed.append(((cost, k, -1 if p_plus is None else p_plus, -1 if p_minus is None else p_minus), decision))

    for k, route in enumerate(routes):
        if route.is_member(pick):
            # Cascaded pickup: only the drop is open, somewhere after it.
            for p_minus in route.insertions_after(drop, route.prev_node(pick)):
                propose(k, route, None, p_minus)
        elif route.is_member(drop):
            # Cascaded drop: only the pickup is open, somewhere before it.
            for p_plus in route.insertions(pick):
                if _before(route, p_plus, drop):
                    propose(k, route, p_plus, None)
        else:
            for p_plus in route.insertions(pick):
                for p_minus in route.insertions_after(drop, p_plus):
                    propose(k, route, p_plus, p_minus)
                # The drop may also follow the pickup immediately; that spot
                # only exists once the pickup is placed, so it is proposed
                # unconditionally and validated when the decision applies.
                propose(k, route, p_plus, pick)
    if not keyed:
        return [FailDecision(f"request ({pick}, {drop}) has no placement left")]
    keyed.sort(key=lambda item: item[0])
    return [decision for _, decision in keyed]


def _before(route: SequenceDomain, a: int, b: int) -> bool:
    """True iff member `a` comes strictly before member `b` along the path."""
    pos = route.positions()
    return pos[a] < pos[b]


# ---------------------------------------------------------------------------
# Large Neighborhood Search
# ---------------------------------------------------------------------------


class RoutingModel(Protocol):
    """What the LNS driver needs from a problem model.

    ``routes`` are the per-vehicle sequence variables, ``objective`` the
    minimized total, ``branching`` produces the decisions for the current
    state, and ``solution_routes`` reads the visit order of every route
    (inner nodes only, endpoints stripped) once fixed.
    """

    solver: Solver
    routes: Sequence[SequenceDomain]
    objective: IntDomain

    def branching(self) -> Sequence[object]: ...

    def solution_routes(self) -> list[list[int]]: ...


@dataclass(frozen=True)
class RelaxationPlan:
    """Which requests leave the incumbent and what each route keeps.

    ``retained`` holds, per route, the incumbent's inner visit order with
    every node of a relaxed request removed.
    """

    relaxed: frozenset[int]
    retained: tuple[tuple[int, ...], ...]


def plan_relaxation(
    incumbent: Sequence[Sequence[int]],
    requests: Sequence[tuple[int, int]],
    relaxed_indices: Sequence[int],
) -> RelaxationPlan:
    """Drop the chosen requests' nodes from the incumbent orderings."""
    gone = {node for i in relaxed_indices for node in requests[i]}
    retained = tuple(
        tuple(v for v in route if v not in gone) for route in incumbent
    )
    return RelaxationPlan(frozenset(relaxed_indices), retained)


def rebuild_routes(model: RoutingModel, retained: Sequence[Sequence[int]]) -> None:
    """Re-pin each route to a retained visit order, then propagate.

    Each node is placed right after the previous retained one, which also
    tolerates nodes a fresh model's propagation placed on its own: placing
    an already-placed node is a no-op when the relative order agrees and a
    wipeout when it does not.  Raises :class:`Inconsistency` when the
    restricted model rejects the partial routes (the caller abandons the
    iteration).
    """
    for route, order in zip(model.routes, retained):
        prev = route.alpha
        for v in order:
            route.insert(prev, v)
            prev = v
    model.solver.fixpoint()


def first_solution(
    model: RoutingModel,
    fail_limit: int | None = None,
    time_limit: float | None = None,
    max_branch_width: int | None = None,
) -> tuple[tuple[list[list[int]], int] | None, SearchStats]:
    """Depth-first search stopped at the first solution.

    Returns ``(found, stats)``: ``found`` is ``(routes, objective)`` or
    ``None``; when ``None``, ``stats.stopped`` distinguishes a search cut
    short by its limits from an exhausted one (no solution exists).
    ``max_branch_width`` optionally keeps only the leftmost few branches at
    every node — a cheap way to commit to the heuristic's top choices when
    a quick solution matters more than completeness.
    """
    captured: tuple[list[list[int]], int] | None = None

    def grab() -> None:
        nonlocal captured
        captured = (model.solution_routes(), model.objective.min)

    branching = model.branching
    if max_branch_width is not None:
        width = max_branch_width

        def branching() -> Sequence[object]:  # noqa: F811 - deliberate wrap
            return model.branching()[:width]

    stats = model.solver.dfs(
        branching,
        on_solution=grab,
        solution_limit=1,
        fail_limit=fail_limit,
        time_limit=time_limit,
    )
    return captured, stats


@dataclass
class LnsResult:
    """Outcome of an LNS run: the best routes found and how we got there."""

    best_routes: list[list[int]]
    best_objective: int
    iterations: int = 0
    improvements: int = 0
    elapsed: float = 0.0
    #: (seconds since start, objective) for the incumbent trajectory,
    #: starting with the initial incumbent at time 0.
    history: list[tuple[float, int]] = field(default_factory=list)


def lns_solve(
    make_model: Callable[[], RoutingModel],
    incumbent_routes: Sequence[Sequence[int]],
    incumbent_objective: int,
    requests: Sequence[tuple[int, int]],
    rng: random.Random,
    relax_size: int = 10,
    fail_limit: int | None = 1000,
    time_limit: float | None = None,
    max_iterations: int | None = None,
) -> LnsResult:
    """Improve an incumbent by repeated relax-and-reinsert iterations.

    Each iteration relaxes ``relax_size`` uniformly chosen requests (all of
    them if there are fewer), rebuilds the remaining visits in incumbent
    order on a fresh model, and runs depth-first search under the failure
    budget with the objective bounded to strict improvement.  Better
    solutions replace the incumbent; a rebuild wipeout abandons the
    iteration.  Deterministic for a given `rng` seed when stopped by
    ``max_iterations``.
    """
    if time_limit is None and max_iterations is None:
        raise ValueError("set a time limit or an iteration limit")
    start = time.monotonic()
    result = LnsResult(
        best_routes=[list(r) for r in incumbent_routes],
        best_objective=incumbent_objective,
        history=[(0.0, incumbent_objective)],
    )

    while True:
        if max_iterations is not None and result.iterations >= max_iterations:
            break
        remaining = None
        if time_limit is not None:
            remaining = time_limit - (time.monotonic() - start)
            if remaining <= 0:
                break
        result.iterations += 1

        k = min(relax_size, len(requests))
        plan = plan_relaxation(
            result.best_routes, requests, rng.sample(range(len(requests)), k)
        )
        model = make_model()
        try:
            rebuild_routes(model, plan.retained)
            model.objective.set_max(result.best_objective - 1)
            model.solver.fixpoint()
        except Inconsistency:
            continue  # this relaxation cannot improve the incumbent

        found: list[tuple[list[list[int]], int]] = []
        model.solver.dfs(
            model.branching,
            on_solution=lambda: found.append(
                (model.solution_routes(), model.objective.min)
            ),
            objective=model.objective,
            fail_limit=fail_limit,
            time_limit=remaining,
        )
        if found:
            routes, objective = found[-1]  # the last one is the best
            result.best_routes = routes
            result.best_objective = objective
            result.improvements += 1
            result.history.append((time.monotonic() - start, objective))

    result.elapsed = time.monotonic() - start
    return result
