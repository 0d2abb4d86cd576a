"""Experiment harnesses: parameter tuning, first-feasible comparison and the LNS worker benchmark."""
from __future__ import annotations

import itertools
import statistics
import time
from dataclasses import dataclass, replace

import numpy as np

from .dfs import SearchTimeout, dfs_search
from .graph import SamplePointGraph, build_graph, scaled_matrix, tour_raw_cost
from .irg import IrgParams, random_samples, run, streams
from .lns import LnsParams, glns_solve, pglns_solve, random_insertion_tour, tour_cost
from .metrics import compute_auc
from .model import Instance

GRID = (1, 2, 4, 8, 16, 32, 64)
INIT_METHODS = ("dag-dfs", "dag-dfs-no-prune", "glns-coldstart", "pglns-coldstart")


# ---------------------------------------------------------------- tuning


def tune_n_rand_init(instances, step: int = 2, budget_s: float = 60.0, seed: int = 0) -> dict:
    """Grow sample sets by ``step`` per pass until DFS succeeds; report the largest final |S_1|."""
    from .irg import generate_initial_tour

    sizes = []
    for k, inst in enumerate(instances):
        params = IrgParams(n_rand_init=step)
        rng = streams((seed, k), 0)[0]
        inc, final = generate_initial_tour(inst, params, time.monotonic() + budget_s, rng)
        sizes.append(final[0] if inc is not None else None)
    solved = [s for s in sizes if s is not None]
    return {"sizes": sizes, "n_rand_init": max(solved) if solved else None}


def tune_grid(instances, base: IrgParams, n_rand_values=GRID, alpha_values=GRID, seed: int = 0) -> dict:
    """Median AUC per (n_rand, alpha_term) cell over ``instances``; one full solve per cell and instance."""
    cells = {}
    solves = 0
    for n_rand, alpha in itertools.product(n_rand_values, alpha_values):
        aucs = []
        for k, inst in enumerate(instances):
            res = run(inst, replace(base, n_rand=n_rand, alpha_term=alpha), seed=(seed, k))
            solves += 1
            aucs.append(compute_auc(res.log) if res.log.events else float("inf"))
        cells[(n_rand, alpha)] = statistics.median(aucs)
    best = min(cells, key=lambda c: (cells[c], c))
    return {"cells": cells, "best": best, "solves": solves}


# ---------------------------------------------------------------- first-feasible comparison


def feasible_sample_sets(instance: Instance, n_rand_init: int, budget_s: float, rng):
    """Sample sets grown until DFS finds a tour (the shared graph for the comparison)."""
    sets = [[] for _ in range(instance.n_tar)]
    deadline = time.monotonic() + budget_s
    while time.monotonic() < deadline:
        for i, s in enumerate(sets, start=1):
            s.extend(random_samples(instance, i, n_rand_init, rng))
        graph = build_graph(instance, sets)
        try:
            if dfs_search(graph, deadline=deadline) is not None:
                return sets, graph
        except SearchTimeout:
            break
    return None, None


def _coldstart(graph: SamplePointGraph, budget_s: float, rng, alpha_term: float, n_workers: int):
    """LNS from random insertion tours, restarting until a tour without infeasible edges appears."""
    matrix = scaled_matrix(graph)
    deadline = time.monotonic() + budget_s
    params = LnsParams.from_alpha(alpha_term, len(graph.clusters))
    while time.monotonic() < deadline:
        seed = random_insertion_tour(matrix.cost, graph.clusters, rng)
        if n_workers > 1:
            res = pglns_solve(matrix.cost, graph.clusters, seed, params, n_workers, rng.spawn(n_workers), deadline,
                              owner=graph.owner)
        else:
            res = glns_solve(matrix.cost, graph.clusters, seed, params, rng, deadline, owner=graph.owner)
        if tour_raw_cost(graph, res.tour) is not None:
            return res.tour
    return None


def time_to_first_feasible(graph: SamplePointGraph, method: str, budget_s: float, rng,
                           alpha_term: float = 4.0, workers: int = 2) -> tuple[float, bool]:
    """(seconds, found); unfound runs are censored at ``budget_s``."""
    t0 = time.monotonic()
    try:
        if method == "dag-dfs":
            tour = dfs_search(graph, deadline=t0 + budget_s)
        elif method == "dag-dfs-no-prune":
            tour = dfs_search(graph, prune=False, deadline=t0 + budget_s)
        elif method == "glns-coldstart":
            tour = _coldstart(graph, budget_s, rng, alpha_term, 1)
        elif method == "pglns-coldstart":
            tour = _coldstart(graph, budget_s, rng, alpha_term, workers)
        else:
            raise ValueError(f"unknown method {method!r}")
    except SearchTimeout:
        tour = None
    dt = time.monotonic() - t0
    if tour is None:
        return budget_s, False
    return min(dt, budget_s), True


@dataclass
class InitRow:
    instance: int
    method: str
    seconds: float
    found: bool


def init_compare(instances, methods=INIT_METHODS, budget_s: float = 10.0, n_rand_init: int = 8, seed: int = 0,
                 workers: int = 2) -> list[InitRow]:
    rows = []
    for k, inst in enumerate(instances):
        rng = np.random.default_rng([seed, k])
        sets, graph = feasible_sample_sets(inst, n_rand_init, 10 * budget_s, rng)
        for m in methods:
            if graph is None:
                rows.append(InitRow(k, m, budget_s, False))
                continue
            secs, found = time_to_first_feasible(graph, m, budget_s, np.random.default_rng([seed, k, 1]),
                                                 workers=workers)
            rows.append(InitRow(k, m, secs, found))
    return rows


def summarize_init(rows) -> dict:
    out = {}
    for m in dict.fromkeys(r.method for r in rows):
        sel = [r for r in rows if r.method == m]
        out[m] = {
            "median_s": statistics.median(r.seconds for r in sel),
            "found": sum(r.found for r in sel),
            "n": len(sel),
        }
    return out


# ---------------------------------------------------------------- worker scaling


def random_gtsp(n_clusters: int, nodes_per_cluster: int, rng, arena: float = 100.0):
    """Euclidean GTSP with a singleton depot cluster; costs are integer centimetres."""
    n = 1 + n_clusters * nodes_per_cluster
    pts = rng.uniform(0, arena, size=(n, 2))
    cost = np.floor(100 * np.linalg.norm(pts[:, None] - pts[None], axis=2) + 0.5).astype(np.int64)
    clusters = [np.array([0])] + [
        np.arange(1 + c * nodes_per_cluster, 1 + (c + 1) * nodes_per_cluster) for c in range(n_clusters)
    ]
    return cost, clusters


def time_to_target(cost, clusters, seed_tour, params: LnsParams, n_workers: int, rng, target: int,
                   cap_s: float) -> float:
    """Seconds until the best tour reaches ``target`` (``inf`` if it never does within ``cap_s``)."""
    t0 = time.monotonic()
    res = pglns_solve(cost, clusters, seed_tour, params, n_workers, rng.spawn(n_workers), t0 + cap_s,
                      stop_cost=target)
    if res.cost > target:
        return float("inf")
    return time.monotonic() - t0 if res.target_reached_s is None else res.target_reached_s


def speedup_benchmark(n_clusters: int = 150, nodes_per_cluster: int = 5, seeds=range(20), workers=(1, 8),
                      improvement: float = 0.05, cap_s: float = 30.0, seed_effort: float = 0.4) -> dict:
    """Median time to cut the seed cost by ``improvement`` for each worker count."""
    times = {w: [] for w in workers}
    for s in seeds:
        rng = np.random.default_rng([7, s])
        cost, clusters = random_gtsp(n_clusters, nodes_per_cluster, rng)
        # a briefly optimised seed, like the incumbents the planners pass in
        start = random_insertion_tour(cost, clusters, rng)
        seed_tour = glns_solve(cost, clusters, start, LnsParams(n_term=seed_effort * n_clusters, n_warm=1), rng).tour
        target = int(tour_cost(cost, seed_tour) * (1 - improvement))
        params = LnsParams(n_term=100 * n_clusters)
        for w in workers:
            times[w].append(time_to_target(cost, clusters, seed_tour, params, w, np.random.default_rng([11, s]),
                                           target, cap_s))
    med = {w: statistics.median(t) for w, t in times.items()}
    return {"times": times, "median": med}
