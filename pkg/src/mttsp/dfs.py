"""Depth-first search for a first feasible tour over (visited targets, last node) states.

A node ``s`` carries a BEFORE set: the targets none of whose sample points can
be reached from ``s``. Those targets have to be visited before ``s`` or the
branch is a dead end, which lets the search discard it without expanding.
"""
from __future__ import annotations

import time

import numpy as np

from .graph import DEPOT, SamplePointGraph


def compute_before(graph: SamplePointGraph) -> list[int]:
    """BEFORE sets as bitmasks over target ids (bit ``i`` for target ``i``)."""
    n_tar = graph.n_tar
    reach = np.zeros((graph.n, n_tar + 1), dtype=bool)
    for i in range(1, n_tar + 1):
        reach[:, i] = graph.feasible[:, graph.clusters[i]].any(axis=1)
    before = []
    for s in range(graph.n):
        own = int(graph.owner[s])
        mask = 0
        for i in range(1, n_tar + 1):
            if i != own and not reach[s, i]:
                mask |= 1 << i
        before.append(mask)
    return before


def _ordered_successors(graph: SamplePointGraph) -> list[list[int]]:
    """Per-node feasible successors in push order: highest cost first, lower index last on ties."""
    out = []
    for s in range(graph.n):
        nxt = np.flatnonzero(graph.feasible[s])
        costs = graph.raw_cost[s, nxt]
        order = np.lexsort((-nxt, -costs))
        out.append([int(v) for v in nxt[order]])
    return out


def successors(visited: int, node: int, graph: SamplePointGraph, before: list[int], ordered=None) -> list[int]:
    """Feasible successors of a search node, ordered so the cheapest is pushed last."""
    cand = ordered[node] if ordered is not None else _ordered_successors(graph)[node]
    owner = graph.owner
    return [v for v in cand if not visited >> int(owner[v]) & 1 and before[v] & ~visited == 0]


class SearchTimeout(Exception):
    pass


def dfs_search(graph: SamplePointGraph, prune: bool = True, deadline: float | None = None) -> list[int] | None:
    """First feasible depot-first tour found by DFS, or None if the search space is exhausted.

    With ``prune=False`` the BEFORE condition is dropped, which keeps the
    search complete but lets it wander into dead branches. Raises
    ``SearchTimeout`` when ``deadline`` (a ``time.monotonic`` value) passes.
    """
    n_tar = graph.n_tar
    full = (1 << (n_tar + 1)) - 2
    before = compute_before(graph) if prune else [0] * graph.n
    ordered = _ordered_successors(graph)
    owner = graph.owner
    # records are (node, parent record) chains, so tours are rebuilt by walking back
    stack = [(0, DEPOT, None)]
    closed = set()
    expansions = 0
    while stack:
        visited, node, parent = stack.pop()
        if (visited, node) in closed:
            continue
        closed.add((visited, node))
        record = (node, parent)
        if visited == full:
            tour = []
            while record is not None:
                tour.append(record[0])
                record = record[1]
            return tour[::-1]
        expansions += 1
        if deadline is not None and expansions % 256 == 0 and time.monotonic() > deadline:
            raise SearchTimeout
        for v in ordered[node]:
            bit = 1 << int(owner[v])
            if visited & bit or before[v] & ~visited:
                continue
            nv = visited | bit
            if (nv, v) not in closed:
                stack.append((nv, v, record))
    return None
