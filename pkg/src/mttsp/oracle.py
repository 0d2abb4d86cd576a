"""Exact reference solvers for small sample-point graphs.

``exact_gtsp_dp`` is a Held-Karp style dynamic program over (visited target
subset, last node) using raw costs and only feasible edges. ``enumerate_tours``
lists every feasible tour and exists to cross-check the DP.
"""
from __future__ import annotations

import itertools

import numpy as np

from .graph import DEPOT, SamplePointGraph

STATE_LIMIT = 1 << 24


def _popcount_order(n_tar: int) -> np.ndarray:
    masks = np.arange(1 << n_tar)
    counts = np.array([bin(m).count("1") for m in masks])
    return masks[np.argsort(counts, kind="stable")]


def exact_gtsp_dp(graph: SamplePointGraph) -> tuple[list[int], float] | None:
    """Minimum raw-cost feasible tour and its cost, or None if no feasible tour exists.

    Subset bit ``i - 1`` stands for target ``i``. Ties go to the smaller
    predecessor index so reconstruction is deterministic.
    """
    n_tar, n = graph.n_tar, graph.n
    if (1 << n_tar) * n > STATE_LIMIT:
        raise ValueError(
            f"DP needs {(1 << n_tar) * n} states (limit {STATE_LIMIT}); use fewer targets or samples"
        )
    cost = np.where(graph.feasible, graph.raw_cost, np.inf)
    bit = np.zeros(n, dtype=np.int64)
    bit[1:] = 1 << (graph.owner[1:] - 1)
    value = np.full((1 << n_tar, n), np.inf)
    parent = np.full((1 << n_tar, n), -1, dtype=np.int64)
    value[0, DEPOT] = 0.0
    for mask in _popcount_order(n_tar):
        row = value[mask]
        src = np.flatnonzero(np.isfinite(row))
        if len(src) == 0:
            continue
        # candidate next nodes: owners not yet in mask
        dst = np.flatnonzero((bit & mask) == 0)
        dst = dst[dst != DEPOT]
        if len(dst) == 0:
            continue
        total = row[src][:, None] + cost[np.ix_(src, dst)]
        best_src = np.argmin(total, axis=0)  # first minimum = smallest node index
        best = total[best_src, np.arange(len(dst))]
        new_mask = mask | bit[dst]
        for j in np.flatnonzero(np.isfinite(best)):
            m2, v = int(new_mask[j]), int(dst[j])
            if best[j] < value[m2, v] or (best[j] == value[m2, v] and src[best_src[j]] < parent[m2, v]):
                value[m2, v] = best[j]
                parent[m2, v] = src[best_src[j]]
    full = (1 << n_tar) - 1
    last_row = value[full]
    if n_tar == 0:
        return [DEPOT], 0.0
    if not np.isfinite(last_row).any():
        return None
    last = int(np.argmin(last_row))
    total_cost = float(last_row[last])
    tour, mask = [last], full
    while tour[-1] != DEPOT:
        v = tour[-1]
        p = int(parent[mask, v])
        mask &= ~int(bit[v])
        tour.append(p)
    return tour[::-1], total_cost


def enumerate_tours(graph: SamplePointGraph) -> list[tuple[list[int], float]]:
    """Every feasible tour with its raw cost (target order x node choice)."""
    n_tar = graph.n_tar
    if n_tar > 7 or any(len(c) > 4 for c in graph.clusters[1:]):
        raise ValueError("enumeration limited to 7 targets and 4 nodes per target")
    out = []
    feas, raw = graph.feasible, graph.raw_cost

    def extend(prefix, remaining, acc):
        if not remaining:
            out.append((list(prefix), acc))
            return
        last = prefix[-1]
        for i in remaining:
            for v in graph.clusters[i]:
                v = int(v)
                if feas[last, v]:
                    prefix.append(v)
                    extend(prefix, remaining - {i}, acc + raw[last, v])
                    prefix.pop()

    extend([DEPOT], frozenset(range(1, n_tar + 1)), 0.0)
    return out


def brute_force_optimum(graph: SamplePointGraph) -> float | None:
    tours = enumerate_tours(graph)
    return min(c for _, c in tours) if tours else None


def all_assemblies(graph: SamplePointGraph):
    """Every depot-first tour (feasible or not): target permutations times node choices."""
    for perm in itertools.permutations(range(1, graph.n_tar + 1)):
        for choice in itertools.product(*(graph.clusters[i] for i in perm)):
            yield [DEPOT, *(int(v) for v in choice)]


def grid_sets(instance, per_target: int, rng) -> list:
    """``per_target`` evenly spaced interception times per target (random disc angle / heading)."""
    from .graph import SamplePoint
    from .model import rand_config

    sets = []
    for tgt in instance.targets:
        lo, hi = tgt.window
        times = np.linspace(lo, hi, per_target) if per_target > 1 else np.array([0.5 * (lo + hi)])
        sets.append([SamplePoint(tgt.id, rand_config(instance.agent, tgt, float(t), rng), float(t)) for t in times])
    return sets


def grid_optimum(instance, per_target: int = 64, seed: int = 0):
    """Exact optimum over a time-grid sampling of every window: (tour points, raw cost) or None."""
    from .graph import build_graph

    graph = build_graph(instance, grid_sets(instance, per_target, np.random.default_rng(seed)))
    found = exact_gtsp_dp(graph)
    if found is None:
        return None
    tour, cost = found
    return [graph.nodes[v] for v in tour], cost
