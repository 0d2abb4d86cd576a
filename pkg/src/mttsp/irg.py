"""Iterated random GTSP planners: initial tour search, the improvement loop and its parallel variants.

Each improvement iteration samples fresh interception points for every target,
keeps the incumbent's points in the sample sets, and solves a GTSP over the
resulting sample-point graph seeded with the incumbent. The incumbent's raw
cost therefore never increases.

Random streams come from ``SeedSequence(seed).spawn``: stream 0 drives the
initial tour, stream ``j`` (``j >= 1``) drives improvement loop / child ``j``.
"""
from __future__ import annotations

import enum
import multiprocessing as mp
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .dfs import SearchTimeout, dfs_search
from .graph import (
    DEPOT,
    SamplePoint,
    SamplePointGraph,
    add_samples,
    build_graph,
    depot_point,
    scale_costs,
    scaled_matrix,
    tour_raw_cost,
)
from .lns import LnsParams, glns_solve, pglns_solve
from .metrics import SolveLog, merge_logs
from .model import AgentTrajectory, Instance, Variant, get_traj, interception_check, rand_config


class Algo(str, enum.Enum):
    IRG_PGLNS = "irg-pglns"
    IRG_GLNS = "irg-glns"
    PDG = "pdg"
    PCG = "pcg"


# (n_rand, alpha_term) per algorithm for point-agent and Dubins instances
TUNED = {
    Algo.IRG_GLNS: ((32, 4), (32, 16)),
    Algo.PDG: ((8, 1), (2, 4)),
    Algo.IRG_PGLNS: ((16, 4), (32, 64)),
    Algo.PCG: ((16, 4), (4, 8)),
}
N_RAND_INIT = (8, 42)
BUDGET_S = (30.0, 60.0)


@dataclass
class IrgParams:
    algo: Algo = Algo.IRG_PGLNS
    n_rand: int = 16
    n_rand_init: int = 8
    alpha_term: float = 4.0
    n_proc: int = 1
    budget_s: float = 30.0
    n_warm: int = 3
    max_removal_fraction: float = 0.1
    eval_removals: bool = False  # allow n_cluster - 1 removals (small-instance evaluation mode)
    noise: float = 0.1
    scale_cooling_by_workers: bool = False
    graph_workers: int = 1
    max_iters: int | None = None

    def __post_init__(self):
        self.algo = Algo(self.algo)
        if self.n_rand < 1 or self.n_rand_init < 1 or self.n_proc < 1:
            raise ValueError("n_rand, n_rand_init and n_proc must be >= 1")

    def lns(self, n_cluster: int) -> LnsParams:
        frac = self.max_removal_fraction
        if self.eval_removals:
            frac = LnsParams.evaluation_fraction(n_cluster)
        return LnsParams.from_alpha(
            self.alpha_term,
            n_cluster,
            n_warm=self.n_warm,
            max_removal_fraction=frac,
            noise=self.noise,
            scale_cooling_by_workers=self.scale_cooling_by_workers,
        )


def default_params(algo, variant, **overrides) -> IrgParams:
    algo, variant = Algo(algo), Variant(variant)
    col = 1 if variant is Variant.DUBINS else 0
    n_rand, alpha = TUNED[algo][col]
    base = IrgParams(
        algo=algo, n_rand=n_rand, alpha_term=alpha, n_rand_init=N_RAND_INIT[col], budget_s=BUDGET_S[col]
    )
    return replace(base, **{k: v for k, v in overrides.items() if v is not None})


@dataclass
class Incumbent:
    points: tuple  # visiting order, depot first
    raw_cost: float

    def point_for(self, target: int) -> SamplePoint:
        for p in self.points:
            if p.owner == target:
                return p
        raise KeyError(target)

    @property
    def order(self) -> list[int]:
        return [p.owner for p in self.points[1:]]


@dataclass
class RunResult:
    incumbent: Incumbent | None
    log: SolveLog
    trajectory: AgentTrajectory | None = None
    iterations: int = 0
    info: dict = field(default_factory=dict)


def streams(seed, n: int) -> list:
    """Generators for stream 0 (initial tour) and streams 1..n."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n + 1)]


# ---------------------------------------------------------------- sampling


def random_samples(instance: Instance, target: int, n: int, rng) -> list[SamplePoint]:
    tgt = instance.target(target)
    lo, hi = tgt.window
    out = []
    for _ in range(n):
        t = float(rng.uniform(lo, hi))
        out.append(SamplePoint(target, rand_config(instance.agent, tgt, t, rng), t))
    return out


def random_tour(graph: SamplePointGraph, rng) -> list[int] | None:
    """Uniform target permutation and uniform node per target; None when any edge is infeasible."""
    perm = rng.permutation(np.arange(1, graph.n_tar + 1))
    tour = [DEPOT] + [int(graph.clusters[i][rng.integers(len(graph.clusters[i]))]) for i in perm]
    return tour if tour_raw_cost(graph, tour) is not None else None


def _incumbent(graph: SamplePointGraph, tour) -> Incumbent:
    return Incumbent(tuple(graph.nodes[v] for v in tour), tour_raw_cost(graph, tour))


def _sets_with(seed: Incumbent | None, instance: Instance, base_sets):
    """Per-target lists with the incumbent point first and duplicates dropped."""
    out = []
    for i, pts in enumerate(base_sets, start=1):
        head = [seed.point_for(i)] if seed is not None else []
        seen = set(head)
        rest = []
        for p in pts:
            if p not in seen:
                seen.add(p)
                rest.append(p)
        out.append(head + rest)
    return out


# ---------------------------------------------------------------- GTSP step


def solve_on_graph(graph: SamplePointGraph, seed: Incumbent | None, params: IrgParams, deadline, rng,
                   n_workers: int = 1) -> Incumbent | None:
    """Best of the GTSP solver tour and one random tour; never costlier than ``seed``."""
    if seed is None:
        try:
            tour = dfs_search(graph, deadline=deadline)
        except SearchTimeout:
            return None
        best = _incumbent(graph, tour) if tour is not None else None
    else:
        seed_tour = [graph.index_of(p) for p in seed.points]
        seed_raw = tour_raw_cost(graph, seed_tour)
        if seed_raw is None:
            raise AssertionError("seed tour is infeasible on its own graph")
        t = np.asarray(seed_tour)
        seed_scaled = int(scale_costs(graph.raw_cost[t[:-1], t[1:]]).sum())
        matrix = scaled_matrix(graph, seed_scaled)
        lns = params.lns(len(graph.clusters))
        if params.algo is Algo.IRG_PGLNS and n_workers > 1:
            res = pglns_solve(matrix.cost, graph.clusters, seed_tour, lns, n_workers, rng.spawn(n_workers),
                              deadline, owner=graph.owner)
        else:
            res = glns_solve(matrix.cost, graph.clusters, seed_tour, lns, rng.spawn(1)[0], deadline,
                             owner=graph.owner)
        best = Incumbent(tuple(graph.nodes[v] for v in seed_tour), seed_raw)
        raw = tour_raw_cost(graph, res.tour)
        if raw is not None and raw < seed_raw:
            best = _incumbent(graph, res.tour)
    rand = random_tour(graph, rng)
    if rand is not None:
        cand = _incumbent(graph, rand)
        if best is None or cand.raw_cost < best.raw_cost:
            best = cand
    return best


def tour_via_gtsp(instance: Instance, sets, seed: Incumbent | None, params: IrgParams, deadline, rng,
                  n_workers: int = 1) -> Incumbent | None:
    """Build the sample-point graph for ``sets`` and solve it (DFS without a seed, LNS with one)."""
    if seed is not None:
        for i, pts in enumerate(sets, start=1):
            if seed.point_for(i) not in pts:
                raise AssertionError(f"seed point for target {i} missing from its sample set")
    graph = build_graph(instance, sets, params.graph_workers)
    return solve_on_graph(graph, seed, params, deadline, rng, n_workers)


def generate_initial_tour(instance: Instance, params: IrgParams, deadline, rng) -> tuple[Incumbent | None, list]:
    """Grow every sample set by ``n_rand_init`` points until DFS finds a tour or time runs out.

    Returns the tour (or None) and the final per-target set sizes.
    """
    sets = [[] for _ in range(instance.n_tar)]
    graph = None
    while deadline is None or time.monotonic() < deadline:
        new = [random_samples(instance, i, params.n_rand_init, rng) for i in range(1, instance.n_tar + 1)]
        for s, extra in zip(sets, new):
            s.extend(extra)
        if graph is None:
            graph = build_graph(instance, sets, params.graph_workers)
        else:
            graph = add_samples(instance, graph, new, params.graph_workers)
        found = solve_on_graph(graph, None, params, deadline, rng)
        if found is not None:
            return found, [len(s) for s in sets]
    return None, [len(s) for s in sets]


# ---------------------------------------------------------------- drivers


def _elapsed(t0: float) -> float:
    return time.monotonic() - t0


def _improve_loop(instance, params, incumbent, rng, t0, deadline, log: SolveLog, n_workers: int = 1):
    """Serial improvement loop; returns (incumbent, iterations)."""
    iters = 0
    while time.monotonic() < deadline and (params.max_iters is None or iters < params.max_iters):
        base = [random_samples(instance, i, params.n_rand, rng) for i in range(1, instance.n_tar + 1)]
        sets = _sets_with(incumbent, instance, base)
        found = tour_via_gtsp(instance, sets, incumbent, params, deadline, rng, n_workers)
        iters += 1
        now = _elapsed(t0)
        if found.raw_cost > incumbent.raw_cost:
            raise AssertionError("GTSP step returned a costlier tour than its seed")
        if found.raw_cost < incumbent.raw_cost and now <= params.budget_s:
            incumbent = found
            log.record(now, incumbent.raw_cost, "improved")
    return incumbent, iters


def _metadata(instance, params, seed):
    from .io import instance_hash

    return {
        "algo": params.algo.value,
        "params": {
            "n_rand": params.n_rand,
            "n_rand_init": params.n_rand_init,
            "alpha_term": params.alpha_term,
            "n_proc": params.n_proc,
            "n_warm": params.n_warm,
            "max_removal_fraction": params.max_removal_fraction,
            "eval_removals": params.eval_removals,
            "noise": params.noise,
        },
        "instance_hash": instance_hash(instance),
        "seed": seed,
    }


def _start(instance, params, seed, rng0):
    t0 = time.monotonic()
    deadline = t0 + params.budget_s
    log = SolveLog(params.budget_s, _metadata(instance, params, seed))
    inc, sizes = generate_initial_tour(instance, params, deadline, rng0)
    if inc is not None:
        now = _elapsed(t0)
        if now > params.budget_s:
            inc = None
        else:
            log.record(now, inc.raw_cost, "initial")
    return t0, deadline, log, inc, sizes


def _finish(instance, log, inc, t0, iters, info) -> RunResult:
    log.finish(_elapsed(t0))
    traj = trajectory_of(instance, inc) if inc is not None else None
    return RunResult(inc, log, traj, iters, info)


def irg_run(instance: Instance, params: IrgParams, seed=0) -> RunResult:
    """Single improvement loop; LNS uses ``params.n_proc`` workers for IRG-PGLNS."""
    rngs = streams(seed, 1)
    t0, deadline, log, inc, sizes = _start(instance, params, seed, rngs[0])
    iters = 0
    if inc is not None:
        workers = params.n_proc if params.algo is Algo.IRG_PGLNS else 1
        inc, iters = _improve_loop(instance, params, inc, rngs[1], t0, deadline, log, workers)
    return _finish(instance, log, inc, t0, iters, {"initial_set_sizes": sizes})


_CHILD = {}


def _pdg_child(j):
    c = _CHILD
    log = SolveLog(c["params"].budget_s)
    inc, iters = _improve_loop(c["instance"], c["params"], c["incumbent"], c["rngs"][j], c["t0"], c["deadline"], log)
    return inc, log, iters


def pdg_run(instance: Instance, params: IrgParams, seed=0) -> RunResult:
    """Independent serial-GLNS improvement loops from one shared initial tour."""
    rngs = streams(seed, params.n_proc)
    t0, deadline, log, inc, sizes = _start(instance, params, seed, rngs[0])
    iters = 0
    if inc is not None:
        _CHILD.update(instance=instance, params=params, incumbent=inc, rngs=rngs, t0=t0, deadline=deadline)
        jobs = range(1, params.n_proc + 1)
        if params.n_proc == 1:
            results = [_pdg_child(1)]
        else:
            with mp.get_context("fork").Pool(params.n_proc) as pool:
                results = pool.map(_pdg_child, jobs)
        _CHILD.clear()
        merged = merge_logs([log] + [r[1] for r in results], params.budget_s, log.metadata)
        log = merged
        inc = min([inc] + [r[0] for r in results], key=lambda x: x.raw_cost)
        iters = sum(r[2] for r in results)
        assert inc.raw_cost == log.best_cost
    return _finish(instance, log, inc, t0, iters, {"initial_set_sizes": sizes})


def _pcg_child(args):
    informed, incumbent, rng = args
    c = _CHILD
    instance, params = c["instance"], c["params"]
    base = [list(informed[i - 1]) + random_samples(instance, i, params.n_rand, rng) for i in range(1, instance.n_tar + 1)]
    sets = _sets_with(incumbent, instance, base)
    found = tour_via_gtsp(instance, sets, incumbent, params, c["deadline"], rng)
    return found, rng


def pcg_run(instance: Instance, params: IrgParams, seed=0) -> RunResult:
    """Rounds of parallel serial-GLNS solves that pool their interception points between rounds."""
    rngs = streams(seed, params.n_proc)
    t0, deadline, log, inc, sizes = _start(instance, params, seed, rngs[0])
    rounds = 0
    informed_sizes = []
    if inc is not None:
        informed = [[inc.point_for(i)] for i in range(1, instance.n_tar + 1)]
        _CHILD.update(instance=instance, params=params, deadline=deadline)
        pool = mp.get_context("fork").Pool(params.n_proc) if params.n_proc > 1 else None
        child_rngs = rngs[1:]
        try:
            while time.monotonic() < deadline and (params.max_iters is None or rounds < params.max_iters):
                jobs = [(informed, inc, child_rngs[j]) for j in range(params.n_proc)]
                results = pool.map(_pcg_child, jobs) if pool is not None else [_pcg_child(a) for a in jobs]
                rounds += 1
                child_rngs = [r[1] for r in results]
                tours = [r[0] for r in results]
                informed = []
                for i in range(1, instance.n_tar + 1):
                    pts = []
                    for tour in tours:
                        p = tour.point_for(i)
                        if p not in pts:
                            pts.append(p)
                    informed.append(pts)
                informed_sizes.append(max(len(s) for s in informed))
                best = min(tours, key=lambda x: x.raw_cost)
                if best.raw_cost > inc.raw_cost:
                    raise AssertionError("PCG round returned a costlier tour than its seed")
                now = _elapsed(t0)
                if now > params.budget_s:
                    break
                if best.raw_cost < inc.raw_cost:
                    log.record(now, best.raw_cost, "improved")
                # the next seed is always one of the round's tours, so its points are informed
                inc = best
        finally:
            if pool is not None:
                pool.close()
                pool.join()
            _CHILD.clear()
    return _finish(instance, log, inc, t0, rounds, {"initial_set_sizes": sizes, "informed_sizes": informed_sizes})


def run(instance: Instance, params: IrgParams, seed=0) -> RunResult:
    if params.algo is Algo.PDG:
        return pdg_run(instance, params, seed)
    if params.algo is Algo.PCG:
        return pcg_run(instance, params, seed)
    return irg_run(instance, params, seed)


# ---------------------------------------------------------------- trajectories


def trajectory_of(instance: Instance, incumbent: Incumbent) -> AgentTrajectory:
    """Connect consecutive incumbent points with feasible legs."""
    legs = []
    pts = incumbent.points
    if pts[0] != depot_point(instance):
        raise ValueError("tour must start at the depot")
    for a, b in zip(pts, pts[1:]):
        if not interception_check(instance.target(b.owner), b.config, b.time):
            raise AssertionError(f"point for target {b.owner} does not intercept it")
        leg = get_traj(instance.agent, a.config, a.time, b.config, b.time)
        if leg is None:
            raise AssertionError(f"no leg between points for targets {a.owner} and {b.owner}")
        legs.append(leg)
    return AgentTrajectory(tuple(legs))

