"""Dial-a-ride: instances, routing model, solver driver, and reporting.

A dial-a-ride instance asks a fleet of vehicles, all leaving from and
returning to a common depot, to serve transportation requests — each a
pickup node and a drop node carrying a load — while respecting time
windows, vehicle capacity, per-passenger maximum ride times, and a
maximum route duration, minimizing the total travelled distance.

Everything is computed on integers: Euclidean distances, time windows,
and service times are scaled by 100 (rounding half up), so objectives
match literature values after dividing by 100.  Node ids are remapped
internally to [vehicle starts | pickups | drops | vehicle ends]; the
mapping back to file ids travels with every solution.

The model follows the route-per-vehicle scheme: one sequence variable per
vehicle over the full node set (other vehicles' depot copies excluded),
distance/time-window/capacity constraints per route, an exactly-one visit
constraint per request node across routes, pickup-before-drop with both
endpoints on the same vehicle, and bound constraints for ride times and
route durations.  The ``pdptw`` variant drops ride-time and duration
limits; ``pdp`` additionally drops the time windows.
"""

from __future__ import annotations

import json
import math
import time as _time
import warnings
from dataclasses import dataclass, field
from random import Random

import numpy as np

from seqcp.constraints import (
    ActivitySet,
    Cumulative,
    Distance,
    DistanceMatrix,
    Precedence,
    TransitionTimes,
)
from seqcp.engine import (
    BoolEquals,
    BoolVisitView,
    IntDomain,
    LessEqualOffset,
    Solver,
    SumBoolsEquals,
    SumEquals,
)
from seqcp.search import first_solution, lns_solve, darp_branching, rebuild_routes
from seqcp.sequence import SequenceDomain
from seqcp.state import Inconsistency

SCALE = 100

VARIANTS = ("darp", "pdptw", "pdp")


def scaled(x: float) -> int:
    """`x` in fixed-point hundredths, rounding half up."""
    return math.floor(x * SCALE + 0.5)


class InstanceFormatError(ValueError):
    """A malformed instance file; the message names the offending line."""

    def __init__(self, message: str, line: int | None = None) -> None:
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class Request:
    """One transportation request, in internal node ids and scaled units."""

    pick: int
    drop: int
    load: int
    max_ride: int


@dataclass
class DarpInstance:
    """A parsed instance, all times and distances in scaled integer units.

    Internal node ids are laid out as [vehicle starts 0..K-1 | pickups |
    drops | vehicle ends]; `file_ids` maps them back to the file's ids.
    """

    name: str
    vehicles: int
    capacity: int
    max_route_duration: int
    requests: list[Request]
    coords: list[tuple[float, float]]
    service: list[int]
    windows: list[tuple[int, int]]
    d: DistanceMatrix
    file_ids: list[int]

    @property
    def n(self) -> int:
        return 2 * self.vehicles + 2 * len(self.requests)

    def start_node(self, k: int) -> int:
        return k

    def end_node(self, k: int) -> int:
        return self.vehicles + 2 * len(self.requests) + k

    def pick_node(self, i: int) -> int:
        return self.vehicles + i

    def drop_node(self, i: int) -> int:
        return self.vehicles + len(self.requests) + i

    def request_of(self, v: int) -> tuple[int, int] | None:
        """(request index, +load) for a pickup, (index, -load) for a drop."""
        r = len(self.requests)
        if self.vehicles <= v < self.vehicles + r:
            i = v - self.vehicles
            return i, self.requests[i].load
        if self.vehicles + r <= v < self.vehicles + 2 * r:
            i = v - self.vehicles - r
            return i, -self.requests[i].load
        return None


# ---------------------------------------------------------------------------
# Parsing and generating instances
# ---------------------------------------------------------------------------


def _numbers(raw: str, line_no: int, expect: int, what: str) -> list[float]:
    parts = raw.split()
    if len(parts) != expect:
        raise InstanceFormatError(
            f"{what} needs {expect} fields, found {len(parts)}", line=line_no
        )
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise InstanceFormatError(f"{what} has a non-numeric field", line=line_no) from None


def parse_instance(text: str, name: str = "") -> DarpInstance:
    """Parse the classic dial-a-ride text format.

    Header ``K n t_dur capacity t_ride``, then node rows ``id x y service
    load tw_open tw_close``: the depot first, the pickup of request i on
    row i, its drop on row i + |R|, and optionally a final duplicate depot
    row for the route end.
    """
    numbered = [
        (i + 1, line) for i, line in enumerate(text.splitlines()) if line.strip()
    ]
    if len(numbered) < 4:
        raise InstanceFormatError("instance needs a header and at least 3 node rows", line=1)
    header_no, header = numbered[0]
    k_f, n_f, t_dur, cap_f, t_ride = _numbers(header, header_no, 5, "header")
    K, header_n, capacity = int(k_f), int(n_f), int(cap_f)
    if K < 1:
        raise InstanceFormatError(f"vehicle count must be >= 1, got {K}", line=header_no)

    rows = [
        (line_no, _numbers(line, line_no, 7, "node row"))
        for line_no, line in numbered[1:]
    ]
    for line_no, row in rows:
        if row[5] > row[6]:
            raise InstanceFormatError(
                f"time window [{row[5]:g}, {row[6]:g}] is empty", line=line_no
            )
    # An odd row count is depot + 2R requests; an even one carries a
    # trailing duplicate depot row for the route end.
    has_end_row = len(rows) % 2 == 0
    R = (len(rows) - (2 if has_end_row else 1)) // 2
    if R < 1:
        raise InstanceFormatError("no request rows found", line=rows[-1][0])
    if header_n not in (R, 2 * R, 2 * R + 1, 2 * R + 2):
        raise InstanceFormatError(
            f"header announces {header_n} nodes but the rows describe {R} requests",
            line=header_no,
        )

    depot_no, depot = rows[0]
    if depot[4] != 0:
        raise InstanceFormatError("the depot row must carry load 0", line=depot_no)
    end = rows[-1][1] if has_end_row else depot

    def node(row: list[float]) -> tuple[tuple[float, float], int, tuple[int, int]]:
        return (row[1], row[2]), scaled(row[3]), (scaled(row[5]), scaled(row[6]))

    coords: list[tuple[float, float]] = []
    service: list[int] = []
    windows: list[tuple[int, int]] = []
    file_ids: list[int] = []

    for _ in range(K):  # one start-depot copy per vehicle
        c, s, w = node(depot)
        coords.append(c), service.append(s), windows.append(w)
        file_ids.append(int(depot[0]))

    requests: list[Request] = []
    for i in range(R):
        pick_no, pick = rows[1 + i]
        drop_no, drop = rows[1 + R + i]
        load = pick[4]
        if load <= 0 or load != int(load):
            raise InstanceFormatError(
                f"pickup load must be a positive integer, got {load:g}", line=pick_no
            )
        if drop[4] not in (0, -load):
            raise InstanceFormatError(
                f"drop load {drop[4]:g} does not mirror its pickup's load {load:g}",
                line=drop_no,
            )
        requests.append(
            Request(K + i, K + R + i, int(load), scaled(t_ride))
        )
    for i in range(R):
        c, s, w = node(rows[1 + i][1])
        coords.append(c), service.append(s), windows.append(w)
        file_ids.append(int(rows[1 + i][1][0]))
    for i in range(R):
        c, s, w = node(rows[1 + R + i][1])
        coords.append(c), service.append(s), windows.append(w)
        file_ids.append(int(rows[1 + R + i][1][0]))
    for _ in range(K):
        c, s, w = node(end)
        coords.append(c), service.append(s), windows.append(w)
        file_ids.append(int(end[0]))

    return DarpInstance(
        name=name,
        vehicles=K,
        capacity=capacity,
        max_route_duration=scaled(t_dur),
        requests=requests,
        coords=coords,
        service=service,
        windows=windows,
        d=_distance_matrix(coords),
        file_ids=file_ids,
    )


def _distance_matrix(coords: list[tuple[float, float]]) -> DistanceMatrix:
    """Scaled Euclidean distances, repaired to a metric if rounding broke it."""
    pts = np.asarray(coords, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.floor(np.hypot(diff[..., 0], diff[..., 1]) * SCALE + 0.5).astype(int)
    closed = d.copy()
    for k in range(len(coords)):
        closed = np.minimum(closed, closed[:, k, None] + closed[None, k, :])
    if not np.array_equal(closed, d):
        warnings.warn(
            "rounded distances violated the triangle inequality; "
            "repaired by shortest-path closure",
            stacklevel=3,
        )
    return DistanceMatrix(closed.tolist())


def random_instance_text(
    rng: Random,
    n_requests: int,
    n_vehicles: int,
    capacity: int = 3,
    horizon: int = 600,
    max_ride: int = 240,
    route_duration: int = 600,
    coord_range: int = 20,
    service: int = 5,
) -> str:
    """A random instance in the text format (windows tight on the drops)."""
    lines = [f"{n_vehicles} {2 * n_requests} {route_duration} {capacity} {max_ride}"]
    lines.append(f"0 0.0 0.0 0 0 0 {horizon}")
    drops = []
    for i in range(n_requests):
        px, py = rng.uniform(-coord_range, coord_range), rng.uniform(-coord_range, coord_range)
        dx, dy = rng.uniform(-coord_range, coord_range), rng.uniform(-coord_range, coord_range)
        load = rng.randint(1, max(1, capacity - 1))
        due = rng.randint(horizon // 4, horizon - 60)
        lines.append(f"{i + 1} {px:.2f} {py:.2f} {service} {load} 0 {horizon}")
        drops.append(f"{n_requests + i + 1} {dx:.2f} {dy:.2f} {service} {-load} {due} {due + 90}")
    lines.extend(drops)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


def insertion_cost(
    d_ij: int,
    d_jk: int,
    d_ik: int,
    ub_k: int,
    lb_i: int,
    s_i: int,
    s_j: int,
    c1: int = 80,
    c2: int = 1,
) -> int:
    """Score of placing node j between i and k: detour minus remaining slack.

    ``c1 * (d_ij + d_jk - d_ik) - c2 * (ub_k - lb_i - s_i - d_ij - s_j - d_jk)``
    with the default weights 80 and 1.  Lower is better: short detours into
    gaps that stay comfortable.
    """
    detour = d_ij + d_jk - d_ik
    slack = ub_k - lb_i - s_i - d_ij - s_j - d_jk
    return c1 * detour - c2 * slack


class DarpModel:
    """A solver, one route per vehicle, and the shared time/distance variables."""

    def __init__(self, instance: DarpInstance, variant: str = "darp") -> None:
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
        self.instance = instance
        self.variant = variant
        self.solver = Solver()
        inst, trail = instance, self.solver.trail
        n, K, R = inst.n, inst.vehicles, len(inst.requests)
        self.request_pairs = [(r.pick, r.drop) for r in inst.requests]

        self.routes = [
            SequenceDomain(trail, n, alpha=inst.start_node(k), omega=inst.end_node(k))
            for k in range(K)
        ]
        for k, route in enumerate(self.routes):
            for j in range(K):
                if j != k:
                    route.exclude(inst.start_node(j))
                    route.exclude(inst.end_node(j))

        horizon = _horizon(inst)
        windows = inst.windows if variant != "pdp" else [(0, horizon)] * n
        self.time = [
            IntDomain(trail, lo, hi, name=f"time[{v}]")
            for v, (lo, hi) in enumerate(windows)
        ]
        dist_cap = int(np.max(np.asarray(inst.d.rows))) * (2 * R + 2)
        self.route_dist = [
            IntDomain(trail, 0, dist_cap, name=f"dist[{k}]") for k in range(K)
        ]
        self.objective = IntDomain(trail, 0, dist_cap * K, name="total distance")

        views = [
            [BoolVisitView(route, v) for v in range(n)] for route in self.routes
        ]
        activities = ActivitySet(
            starts=[r.pick for r in inst.requests],
            ends=[r.drop for r in inst.requests],
            loads=[r.load for r in inst.requests],
            capacity=inst.capacity,
        )

        post = self.solver.post
        post(SumEquals(self.route_dist, self.objective))
        for k, route in enumerate(self.routes):
            post(Distance(route, inst.d, self.route_dist[k]))
            post(TransitionTimes(route, self.time, inst.service, inst.d))
            post(Cumulative(route, activities))
            for r in inst.requests:
                post(BoolEquals(views[k][r.pick], views[k][r.drop]))
                post(Precedence(route, (r.pick, r.drop)))
        for i in range(R):
            for v in (inst.pick_node(i), inst.drop_node(i)):
                post(SumBoolsEquals([views[k][v] for k in range(K)], 1))
        if variant == "darp":
            for r in inst.requests:
                post(
                    LessEqualOffset(
                        self.time[r.drop],
                        self.time[r.pick],
                        inst.service[r.pick] + r.max_ride,
                    )
                )
            for k in range(K):
                post(
                    LessEqualOffset(
                        self.time[inst.end_node(k)],
                        self.time[inst.start_node(k)],
                        inst.max_route_duration,
                    )
                )

    def branching(self):
        return darp_branching(self.routes, self.request_pairs, self.pair_cost)

    def solution_routes(self) -> list[list[int]]:
        return [route.members()[1:-1] for route in self.routes]

    def pair_cost(
        self,
        k: int,
        request: tuple[int, int],
        p_plus: int | None,
        p_minus: int | None,
    ) -> int:
        """Heuristic cost of one request placement, on pre-decision bounds."""
        pick, drop = request
        route, d = self.routes[k], self.instance.d.rows
        service, time = self.instance.service, self.time

        def leg(v_i: int, v_j: int, v_k: int) -> int:
            return insertion_cost(
                d[v_i][v_j],
                d[v_j][v_k],
                d[v_i][v_k],
                time[v_k].max,
                time[v_i].min,
                service[v_i],
                service[v_j],
            )

        total = 0
        if p_plus is not None:
            total += leg(p_plus, pick, route.next_node(p_plus))
        if p_minus is not None:
            if p_minus == pick and p_plus is not None:
                # Drop right behind the still-unplaced pickup: the node that
                # will follow it is the pickup spot's current successor.
                total += leg(pick, drop, route.next_node(p_plus))
            else:
                total += leg(p_minus, drop, route.next_node(p_minus))
        return total

    def extract_solution(self) -> Solution:
        """Read the decided routes with their earliest feasible visit times."""
        vehicles, times = [], {}
        for route in self.routes:
            members = route.members()
            vehicles.append(members)
            for v in members:
                times[v] = self.time[v].min
        return Solution(vehicles, times, self.objective.min)


def _horizon(inst: DarpInstance) -> int:
    """A time bound no feasible schedule can reach."""
    max_d = int(np.max(np.asarray(inst.d.rows)))
    return max(hi for _, hi in inst.windows) + inst.n * (max(inst.service) + max_d) + 1


def build_model(inst: DarpInstance, variant: str = "darp") -> DarpModel:
    """Construct the model and run root propagation (wipes out if infeasible)."""
    return DarpModel(inst, variant)


# ---------------------------------------------------------------------------
# Solutions: text rendering, parsing, validation
# ---------------------------------------------------------------------------


@dataclass
class Solution:
    """Routes in internal node ids (depots included) with visit times.

    `times` and `objective_scaled` are in fixed-point hundredths.
    """

    vehicles: list[list[int]]
    times: dict[int, int]
    objective_scaled: int

    @property
    def objective(self) -> float:
        return self.objective_scaled / SCALE


def render_solution(inst: DarpInstance, sol: Solution) -> str:
    """Line format: the unscaled objective, then one `route k:` line per
    vehicle listing `file_id@visit_time` in visit order."""
    lines = [f"objective {sol.objective_scaled / SCALE:.2f}"]
    for k, route in enumerate(sol.vehicles):
        stops = " ".join(
            f"{inst.file_ids[v]}@{sol.times[v] / SCALE:.2f}" for v in route
        )
        lines.append(f"route {k}: {stops}")
    return "\n".join(lines) + "\n"


def solution_json(inst: DarpInstance, sol: Solution, **meta: object) -> str:
    """The same content as the text rendering, machine-readable."""
    payload = {
        "objective": sol.objective_scaled / SCALE,
        "objective_scaled": sol.objective_scaled,
        "routes": [
            {
                "vehicle": k,
                "stops": [
                    {
                        "node": v,
                        "file_id": inst.file_ids[v],
                        "time": sol.times[v] / SCALE,
                        "time_scaled": sol.times[v],
                    }
                    for v in route
                ],
            }
            for k, route in enumerate(sol.vehicles)
        ],
        **meta,
    }
    return json.dumps(payload, indent=2) + "\n"


def parse_solution(inst: DarpInstance, text: str) -> Solution:
    """Parse the text produced by :func:`render_solution` back into internal ids."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith("objective "):
        raise ValueError("solution must start with an 'objective' line")
    objective_scaled = scaled(float(lines[0].split()[1]))
    K, R = inst.vehicles, len(inst.requests)
    vehicles: list[list[int]] = []
    times: dict[int, int] = {}
    for k, line in enumerate(lines[1:]):
        prefix, _, rest = line.partition(":")
        if not prefix.strip().startswith("route"):
            raise ValueError(f"expected a 'route k:' line, found {line!r}")
        route = []
        stops = rest.split()
        for pos, stop in enumerate(stops):
            fid_text, _, t_text = stop.partition("@")
            fid = int(fid_text)
            if pos == 0:
                v = inst.start_node(k)
            elif pos == len(stops) - 1:
                v = inst.end_node(k)
            elif 1 <= fid <= 2 * R:
                v = K + fid - 1
            else:
                raise ValueError(f"node id {fid} is not a request node")
            route.append(v)
            times[v] = scaled(float(t_text))
        vehicles.append(route)
    if len(vehicles) != K:
        raise ValueError(f"expected {K} route lines, found {len(vehicles)}")
    return Solution(vehicles, times, objective_scaled)


def validate(inst: DarpInstance, sol: Solution, variant: str = "darp") -> list[str]:
    """Check a solution against the instance from scratch.

    Everything is recomputed from the instance data alone — node layout,
    distances, loads, windows — and every violation is reported as a
    human-readable string.  An empty list means the solution is feasible
    and its objective is exact.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    problems: list[str] = []
    d = inst.d.rows
    if len(sol.vehicles) != inst.vehicles:
        return [f"expected {inst.vehicles} routes, got {len(sol.vehicles)}"]

    seen: dict[int, int] = {}
    for k, route in enumerate(sol.vehicles):
        if not route or route[0] != inst.start_node(k) or route[-1] != inst.end_node(k):
            problems.append(f"route {k} must run from its start depot to its end depot")
            continue
        for v in route[1:-1]:
            if inst.request_of(v) is None:
                problems.append(f"route {k} visits non-request node {v}")
            if v in seen:
                problems.append(f"node {v} is visited more than once")
            seen[v] = k

        load = 0
        for v in route[1:-1]:
            info = inst.request_of(v)
            if info is None:
                continue
            load += info[1]
            if load > inst.capacity:
                problems.append(
                    f"route {k}: load {load} exceeds capacity {inst.capacity} at node {v}"
                )
            if load < 0:
                problems.append(f"route {k}: drop at node {v} precedes its pickup")

        for u, v in zip(route, route[1:]):
            if u not in sol.times or v not in sol.times:
                problems.append(f"route {k}: missing visit time for node {u} or {v}")
                continue
            earliest = sol.times[u] + inst.service[u] + d[u][v]
            if sol.times[v] < earliest:
                problems.append(
                    f"route {k}: node {v} visited at {sol.times[v]} before "
                    f"travel from {u} allows ({earliest})"
                )
        if variant != "pdp":
            for v in route:
                lo, hi = inst.windows[v]
                t = sol.times.get(v)
                if t is not None and not lo <= t <= hi:
                    problems.append(
                        f"node {v} visited at {t}, outside its window [{lo}, {hi}]"
                    )
        if variant == "darp":
            duration = sol.times[route[-1]] - sol.times[route[0]]
            if duration > inst.max_route_duration:
                problems.append(
                    f"route {k}: duration {duration} exceeds the limit "
                    f"{inst.max_route_duration}"
                )

    for i, r in enumerate(inst.requests):
        if r.pick not in seen or r.drop not in seen:
            problems.append(f"request {i} is not fully served")
            continue
        if seen[r.pick] != seen[r.drop]:
            problems.append(f"request {i}: pickup and drop ride different vehicles")
            continue
        route = sol.vehicles[seen[r.pick]]
        if route.index(r.pick) > route.index(r.drop):
            problems.append(f"request {i}: drop visited before its pickup")
        elif variant == "darp":
            ride = sol.times[r.drop] - sol.times[r.pick] - inst.service[r.pick]
            if ride > r.max_ride:
                problems.append(
                    f"request {i}: ride time {ride} exceeds the limit {r.max_ride}"
                )

    total = sum(
        d[u][v] for route in sol.vehicles for u, v in zip(route, route[1:])
    )
    if total != sol.objective_scaled:
        problems.append(
            f"objective {sol.objective_scaled} does not match the recomputed "
            f"distance {total}"
        )
    return problems


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------


@dataclass
class SolveOutcome:
    """What a solve run produced.

    status is "solution", "infeasible" (proven), or "no_solution" (limits
    hit first).  `history` records (wall-clock seconds, scaled objective)
    for the initial solution and every improvement.
    """

    status: str
    solution: Solution | None = None
    history: list[tuple[float, int]] = field(default_factory=list)
    iterations: int = 0


def replay_solution(
    inst: DarpInstance, inner_routes: list[list[int]], variant: str = "darp"
) -> Solution:
    """Rebuild given routes on a fresh model and read times and objective."""
    model = build_model(inst, variant)
    rebuild_routes(model, inner_routes)
    return model.extract_solution()


def solve(
    inst: DarpInstance,
    variant: str = "darp",
    seed: int = 0,
    time_limit: float | None = 60.0,
    relax_size: int = 10,
    fail_limit: int | None = 1000,
    max_iterations: int | None = None,
    initial_routes: list[list[int]] | None = None,
) -> SolveOutcome:
    """Find a first solution by depth-first search, then improve it by LNS.

    `initial_routes` (inner node lists, one per vehicle) warm-starts the
    improvement from a known solution instead of searching for one — for
    example a solution of a more constrained variant of the same instance.
    A warm start that does not fit this variant raises ValueError.
    """
    start = _time.monotonic()
    try:
        model = build_model(inst, variant)
    except Inconsistency:
        return SolveOutcome(status="infeasible")

    if initial_routes is not None:
        try:
            base = replay_solution(inst, initial_routes, variant)
        except Inconsistency as exc:
            raise ValueError(f"warm start is not feasible here: {exc}") from exc
        routes = [list(r) for r in initial_routes]
        objective = base.objective_scaled
    else:
        found, stats = first_solution(model, time_limit=time_limit)
        if found is None:
            return SolveOutcome(status="no_solution" if stats.stopped else "infeasible")
        routes, objective = found
    elapsed = _time.monotonic() - start
    history = [(elapsed, objective)]

    remaining = None if time_limit is None else time_limit - elapsed
    if (remaining is None or remaining > 0) and (
        max_iterations is None or max_iterations > 0
    ):
        result = lns_solve(
            lambda: build_model(inst, variant),
            routes,
            objective,
            [(r.pick, r.drop) for r in inst.requests],
            Random(seed),
            relax_size=relax_size,
            fail_limit=fail_limit,
            time_limit=remaining,
            max_iterations=max_iterations,
        )
        routes, objective = result.best_routes, result.best_objective
        history += [(elapsed + t, obj) for t, obj in result.history[1:]]
        iterations = result.iterations
    else:
        iterations = 0

    return SolveOutcome(
        status="solution",
        solution=replay_solution(inst, routes, variant),
        history=history,
        iterations=iterations,
    )


# ---------------------------------------------------------------------------
# Benchmark reporting
# ---------------------------------------------------------------------------


@dataclass
class GapProfile:
    """Fraction of instances whose primal gap is within a tolerance.

    `gaps` maps instance name to (objective - best_known) / best_known,
    with gap 1 for instances that produced no solution at all.
    """

    gaps: dict[str, float]

    def fraction(self, tau: float) -> float:
        if not self.gaps:
            return 0.0
        return sum(g <= tau for g in self.gaps.values()) / len(self.gaps)

    def curve(self, taus: list[float]) -> list[tuple[float, float]]:
        return [(tau, self.fraction(tau)) for tau in taus]


def gap_profile(
    objectives: dict[str, float | None], best_known: dict[str, float]
) -> GapProfile:
    """Primal gaps of unscaled objectives against a best-known table."""
    gaps: dict[str, float] = {}
    for name, obj in objectives.items():
        if name not in best_known:
            raise ValueError(f"no best-known value for instance {name!r}")
        gaps[name] = 1.0 if obj is None else (obj - best_known[name]) / best_known[name]
    return GapProfile(gaps)


def read_bks_csv(text: str) -> dict[str, float]:
    """Parse `instance,bks` lines (a header line is recognized and skipped)."""
    table: dict[str, float] = {}
    for i, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        name, _, value = line.partition(",")
        if i == 0 and not _is_number(value.strip()):
            continue
        if not _is_number(value.strip()):
            raise ValueError(f"line {i + 1}: bad best-known value {value.strip()!r}")
        table[name.strip()] = float(value)
    return table


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def plot_gap_profile(
    profiles: dict[str, GapProfile], path: str, max_tau: float = 0.5
) -> None:
    """Render gap-profile curves (one per label) to an image file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    taus = [max_tau * i / 200 for i in range(201)]
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, profile in profiles.items():
        ax.step(
            [t * 100 for t in taus],
            [profile.fraction(t) for t in taus],
            where="post",
            label=label,
        )
    ax.set_xlabel("primal gap tolerance (%)")
    ax.set_ylabel("fraction of instances within tolerance")
    ax.set_ylim(0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
