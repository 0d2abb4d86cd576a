"""Sample-point graphs over target interception samples and their integer cost matrices."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Instance, edge_kernel

DEPOT = 0
SCALE = 100
# treats products within this distance of a .5 boundary as exact halves
_HALF_EPS = 1e-7


@dataclass(frozen=True)
class SamplePoint:
    """An (agent configuration, time) pair owned by a target, or by the depot (owner 0)."""

    owner: int
    config: tuple
    time: float


@dataclass
class SamplePointGraph:
    nodes: list
    clusters: list  # clusters[0] == [0] is the depot; clusters[i] belongs to target i
    owner: np.ndarray
    raw_cost: np.ndarray  # inf where infeasible
    feasible: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def n_tar(self) -> int:
        return len(self.clusters) - 1

    def index_of(self, point: SamplePoint) -> int:
        for idx in self.clusters[point.owner]:
            if self.nodes[idx] == point:
                return int(idx)
        raise KeyError(f"point not in graph: {point}")


@dataclass(frozen=True)
class ScaledCostMatrix:
    cost: np.ndarray  # int64
    big_cost: int


def default_workers() -> int:
    return int(os.environ.get("MTTSP_WORKERS", os.cpu_count() or 1))


def depot_point(instance: Instance) -> SamplePoint:
    return SamplePoint(DEPOT, instance.agent.q0, 0.0)


def _evaluate_rows(instance, configs, times, owner, rows, cols):
    """Feasibility/cost block for rows x cols; only forward-in-time inter-cluster pairs are checked."""
    feas = np.zeros((len(rows), len(cols)), dtype=bool)
    cost = np.full((len(rows), len(cols)), np.inf)
    if len(rows) == 0 or len(cols) == 0:
        return feas, cost
    ta = times[rows][:, None]
    tb = times[cols][None, :]
    candidate = (tb > ta) & (owner[rows][:, None] != owner[cols][None, :]) & (owner[cols] != DEPOT)[None, :]
    ri, ci = np.nonzero(candidate)
    if len(ri):
        a, b = rows[ri], cols[ci]
        ok, c = edge_kernel(instance.agent, configs[a], times[a], configs[b], times[b])
        feas[ri, ci] = ok
        cost[ri, ci] = c
    return feas, cost


def _blocks(rows: np.ndarray, workers: int):
    size = max(1, math.ceil(len(rows) / max(workers, 1)))
    return [rows[i : i + size] for i in range(0, len(rows), size)]


def _fill(instance, configs, times, owner, feas, cost, rows, cols, workers):
    blocks = _blocks(rows, workers)
    if workers <= 1 or len(blocks) <= 1:
        results = [_evaluate_rows(instance, configs, times, owner, b, cols) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: _evaluate_rows(instance, configs, times, owner, b, cols), blocks))
    for block, (f, c) in zip(blocks, results):
        feas[np.ix_(block, cols)] = f
        cost[np.ix_(block, cols)] = c


def _node_arrays(nodes, dim):
    configs = np.array([p.config for p in nodes], dtype=float).reshape(len(nodes), dim)
    times = np.array([p.time for p in nodes], dtype=float)
    owner = np.array([p.owner for p in nodes], dtype=np.int64)
    return configs, times, owner


def build_graph(instance: Instance, sets: Sequence[Sequence[SamplePoint]], workers: int = 1) -> SamplePointGraph:
    """Graph over the depot plus ``sets[i - 1]`` for every target ``i``."""
    if len(sets) != instance.n_tar:
        raise ValueError(f"expected {instance.n_tar} sample sets, got {len(sets)}")
    nodes = [depot_point(instance)]
    clusters = [np.array([0])]
    for i, pts in enumerate(sets, start=1):
        if not pts:
            raise ValueError(f"target {i} has no sample points")
        if any(p.owner != i for p in pts):
            raise ValueError(f"set {i} contains points owned by another target")
        clusters.append(np.arange(len(nodes), len(nodes) + len(pts)))
        nodes.extend(pts)
    dim = len(instance.agent.q0)
    configs, times, owner = _node_arrays(nodes, dim)
    n = len(nodes)
    feas = np.zeros((n, n), dtype=bool)
    cost = np.full((n, n), np.inf)
    idx = np.arange(n)
    _fill(instance, configs, times, owner, feas, cost, idx, idx, workers)
    return SamplePointGraph(nodes, clusters, owner, cost, feas)


def add_samples(instance: Instance, graph: SamplePointGraph, new_sets, workers: int = 1) -> SamplePointGraph:
    """Extend ``graph`` with more points per target, evaluating only edges touching new nodes."""
    nodes = list(graph.nodes)
    clusters = [c.copy() for c in graph.clusters]
    for i, pts in enumerate(new_sets, start=1):
        if any(p.owner != i for p in pts):
            raise ValueError(f"set {i} contains points owned by another target")
        clusters[i] = np.concatenate([clusters[i], np.arange(len(nodes), len(nodes) + len(pts))])
        nodes.extend(pts)
    n_old, n = graph.n, len(nodes)
    dim = len(instance.agent.q0)
    configs, times, owner = _node_arrays(nodes, dim)
    feas = np.zeros((n, n), dtype=bool)
    cost = np.full((n, n), np.inf)
    feas[:n_old, :n_old] = graph.feasible
    cost[:n_old, :n_old] = graph.raw_cost
    old, new, every = np.arange(n_old), np.arange(n_old, n), np.arange(n)
    _fill(instance, configs, times, owner, feas, cost, new, every, workers)
    _fill(instance, configs, times, owner, feas, cost, old, new, workers)
    return SamplePointGraph(nodes, clusters, owner, cost, feas)


def scale_costs(raw) -> np.ndarray:
    """x100 and round half away from zero (costs are nonnegative)."""
    raw = np.asarray(raw, dtype=float)
    return np.floor(raw * SCALE + 0.5 + _HALF_EPS).astype(np.int64)


def scaled_matrix(graph: SamplePointGraph, incumbent_scaled_cost: int | None = None) -> ScaledCostMatrix:
    """Integer cost matrix; infeasible edges priced just above the incumbent, or at (n_tar+1)*max cost."""
    cost = np.zeros(graph.raw_cost.shape, dtype=np.int64)
    cost[graph.feasible] = scale_costs(graph.raw_cost[graph.feasible])
    if incumbent_scaled_cost is not None:
        big = int(incumbent_scaled_cost) + 1
    else:
        c_bar = int(cost[graph.feasible].max()) if graph.feasible.any() else 1
        big = (graph.n_tar + 1) * max(c_bar, 1)
    cost[~graph.feasible] = big
    return ScaledCostMatrix(cost, big)


def check_tour(graph: SamplePointGraph, tour: Sequence[int]) -> None:
    if len(tour) != graph.n_tar + 1 or tour[0] != DEPOT:
        raise ValueError("tour must start at the depot and visit one node per cluster")
    owners = sorted(int(graph.owner[v]) for v in tour)
    if owners != list(range(graph.n_tar + 1)):
        raise ValueError("tour must visit every cluster exactly once")


def tour_raw_cost(graph: SamplePointGraph, tour: Sequence[int]) -> float | None:
    """Sum of raw edge costs, or None when some edge is infeasible."""
    check_tour(graph, tour)
    t = np.asarray(tour)
    if not graph.feasible[t[:-1], t[1:]].all():
        return None
    return float(graph.raw_cost[t[:-1], t[1:]].sum())


def tour_scaled_cost(matrix: ScaledCostMatrix, tour: Sequence[int]) -> int:
    t = np.asarray(tour)
    return int(matrix.cost[t[:-1], t[1:]].sum())
