"""Adaptive large neighborhood search for the GTSP on integer cost matrices.

Tours are depot-first node-index arrays holding one node per cluster; cost is
the open path cost, plus the edge back to the depot when ``closed`` is set. ``pglns_solve`` runs several workers that
share the current tour, the best tour, the termination counter and the
annealing temperature, each guarded by its own lock. With one worker it runs
in-process and is fully deterministic for a given generator.
"""
from __future__ import annotations

import math
import multiprocessing as mp
import time
from contextlib import nullcontext
from dataclasses import dataclass, field

import numpy as np

REMOVALS = ("segment", "distance", "worst", "random")
INSERTIONS = ("cheapest", "nearest", "farthest", "random")

_SCORE_BEST = 3.0
_SCORE_IMPROVE = 1.0
_SCORE_ACCEPT = 0.3
_WEIGHT_MEMORY = 0.7
_MIN_WEIGHT = 0.05
_DEADLINE_STRIDE = 64
_REOPT_PASSES = 100


@dataclass
class LnsParams:
    n_term: int = 100
    n_warm: int = 3
    max_removal_fraction: float = 0.1
    noise: float = 0.1
    beta_init: float = 0.05
    beta_final: float = 0.0005
    beta_decay: float = 0.5
    adaptive_weights: bool = True
    scale_cooling_by_workers: bool = False

    def __post_init__(self):
        if self.n_warm < 1 or self.n_term < 1:
            raise ValueError("n_warm and n_term must be >= 1")
        if not 0 < self.max_removal_fraction <= 1:
            raise ValueError("max_removal_fraction must be in (0, 1]")

    @classmethod
    def from_alpha(cls, alpha_term: float, n_cluster: int, **kw) -> "LnsParams":
        return cls(n_term=max(1, int(round(alpha_term * n_cluster))), **kw)

    @staticmethod
    def evaluation_fraction(n_cluster: int) -> float:
        """Removal fraction allowing up to ``n_cluster - 1`` removals."""
        return max(n_cluster - 1, 1) / n_cluster


@dataclass
class LnsResult:
    tour: np.ndarray
    cost: int
    iterations: int = 0
    target_reached_s: float | None = None


@dataclass
class AnnealState:
    theta: float
    r_cool: float


# ---------------------------------------------------------------- basic tour ops


def tour_cost(cost: np.ndarray, tour, closed: bool = False) -> int:
    """Open path cost; ``closed`` adds the edge from the last node back to the depot."""
    t = np.asarray(tour)
    total = int(cost[t[:-1], t[1:]].sum())
    return total + int(cost[t[-1], t[0]]) if closed else total


def validate_tour(tour, clusters, owner) -> None:
    t = np.asarray(tour)
    if len(t) != len(clusters) or t[0] != 0:
        raise ValueError("tour must be depot-first with one node per cluster")
    if sorted(int(owner[v]) for v in t) != list(range(len(clusters))):
        raise ValueError("tour must cover every cluster exactly once")


def max_removals(n_cluster: int, fraction: float) -> int:
    """Removal cap for a GTSP with ``n_cluster`` clusters (depot included); the depot is never removed."""
    return max(1, min(n_cluster - 1, math.ceil(fraction * n_cluster - 1e-9)))


def remove_nodes(tour, k: int, heuristic: str, cost: np.ndarray, rng, closed: bool = False) -> tuple[list, list]:
    """Drop ``k`` non-depot nodes; returns (remaining tour, removed nodes)."""
    tour = [int(v) for v in tour]
    n = len(tour) - 1
    k = max(1, min(k, n))
    if heuristic == "segment":
        start = int(rng.integers(1, n - k + 2))
        return tour[:start] + tour[start + k :], tour[start : start + k]
    if heuristic == "random":
        pos = set(int(p) for p in rng.choice(np.arange(1, n + 1), size=k, replace=False))
    elif heuristic == "distance":
        seed = tour[int(rng.integers(1, n + 1))]
        body = np.array(tour[1:])
        d = np.minimum(cost[seed, body], cost[body, seed]).astype(float)
        d[body == seed] = -1.0
        pos = set(int(p) + 1 for p in np.argsort(d, kind="stable")[:k])
    elif heuristic == "worst":
        removed = []
        for _ in range(k):
            p = int(np.argmax(detours(tour, cost, closed))) + 1
            removed.append(tour.pop(p))
        return tour, removed
    else:
        raise ValueError(f"unknown removal heuristic {heuristic!r}")
    keep = [v for p, v in enumerate(tour) if p not in pos]
    gone = [v for p, v in enumerate(tour) if p in pos]
    return keep, gone


def detours(tour, cost: np.ndarray, closed: bool = False) -> np.ndarray:
    """Cost saved by removing each non-depot position (index 0 = tour position 1)."""
    t = np.asarray(tour)
    prev, mid = t[:-1], t[1:]
    d = cost[prev, mid].astype(np.int64)
    nxt = np.append(t[2:], t[0]) if closed else t[2:]
    m = len(nxt)
    d[:m] += cost[mid[:m], nxt] - cost[prev[:m], nxt]
    return d


def insertion_deltas(partial, nodes, cost: np.ndarray, closed: bool = False) -> np.ndarray:
    """``delta[a, p]``: cost increase of inserting ``nodes[a]`` right after ``partial[p]``."""
    p = np.asarray(partial)
    v = np.asarray(nodes)
    delta = cost[np.ix_(p, v)].T.astype(np.int64)
    nxt = np.append(p[1:], p[0]) if closed else p[1:]
    m = len(nxt)
    if m:
        delta[:, :m] += cost[np.ix_(v, nxt)] - cost[p[:m], nxt][None, :]
    return delta


def _best_slot(delta: np.ndarray, noise: float, rng):
    noisy = delta * (1.0 + noise * rng.random(delta.shape)) if noise > 0 else delta
    flat = int(np.argmin(noisy))
    return np.unravel_index(flat, delta.shape)


def _cluster_distance(partial, nodes, cost) -> int:
    p = np.asarray(partial)
    v = np.asarray(nodes)
    return int(min(cost[np.ix_(p, v)].min(), cost[np.ix_(v, p)].min()))


def insert_nodes(partial, missing, heuristic: str, noise: float, cost: np.ndarray, clusters, rng,
                 closed: bool = False) -> list:
    """Reinsert one node for each cluster in ``missing``; returns the completed tour."""
    tour = [int(v) for v in partial]
    todo = list(missing)
    while todo:
        if heuristic == "cheapest":
            nodes = np.concatenate([clusters[c] for c in todo])
            which = np.concatenate([np.full(len(clusters[c]), c) for c in todo])
            a, pos = _best_slot(insertion_deltas(tour, nodes, cost, closed), noise, rng)
            cl, node = int(which[a]), int(nodes[a])
        else:
            if heuristic == "random":
                cl = todo[int(rng.integers(len(todo)))]
            elif heuristic in ("nearest", "farthest"):
                dist = [_cluster_distance(tour, clusters[c], cost) for c in todo]
                pick = np.argmin(dist) if heuristic == "nearest" else np.argmax(dist)
                cl = todo[int(pick)]
            else:
                raise ValueError(f"unknown insertion heuristic {heuristic!r}")
            nodes = clusters[cl]
            a, pos = _best_slot(insertion_deltas(tour, nodes, cost, closed), noise, rng)
            node = int(nodes[a])
        tour.insert(int(pos) + 1, node)
        todo.remove(cl)
    return tour


def optimize_nodes(tour, cost: np.ndarray, clusters, owner, closed: bool = False) -> list:
    """Cheapest node per cluster for the tour's cluster order (layered shortest path, first node fixed)."""
    tour = [int(v) for v in tour]
    layers = [np.array([tour[0]])] + [np.asarray(clusters[owner[v]]) for v in tour[1:]]
    dist = np.zeros(1, dtype=np.int64)
    back = []
    for prev, cur in zip(layers, layers[1:]):
        total = dist[:, None] + cost[np.ix_(prev, cur)]
        arg = np.argmin(total, axis=0)
        back.append(arg)
        dist = total[arg, np.arange(len(cur))]
    if closed:
        dist = dist + cost[layers[-1], tour[0]]
    k = int(np.argmin(dist))
    out = [0] * len(tour)
    for p in range(len(layers) - 1, 0, -1):
        out[p] = int(layers[p][k])
        k = int(back[p - 1][k])
    out[0] = tour[0]
    return out


def local_reopt(tour, cost: np.ndarray, clusters, owner, closed: bool = False) -> list:
    """Per position, switch to the cheapest node of the same cluster given fixed neighbours; repeat to a fixpoint.

    The fixpoint is then polished by ``optimize_nodes``, which can only lower the cost further.
    """
    tour = [int(v) for v in tour]
    n = len(tour)
    for _ in range(_REOPT_PASSES):
        changed = False
        for p in range(1, n):
            cands = clusters[owner[tour[p]]]
            if len(cands) == 1:
                continue
            c = cost[tour[p - 1], cands].astype(np.int64)
            if p + 1 < n:
                c = c + cost[cands, tour[p + 1]]
            elif closed:
                c = c + cost[cands, tour[0]]
            best = int(np.argmin(c))
            cur = int(np.flatnonzero(cands == tour[p])[0])
            if c[best] < c[cur]:
                tour[p] = int(cands[best])
                changed = True
        if not changed:
            break
    polished = optimize_nodes(tour, cost, clusters, owner, closed)
    if tour_cost(cost, polished, closed) < tour_cost(cost, tour, closed):
        return polished
    return tour


def accept(candidate_cost: float, current_cost: float, theta: float, rng) -> bool:
    """Metropolis rule."""
    delta = candidate_cost - current_cost
    if delta <= 0:
        return True
    if theta <= 0:
        return False
    return bool(rng.random() < math.exp(-delta / theta))


def set_temp_and_cooling(i_warm: int, n_term: int, seed_cost: float, params: LnsParams | None = None) -> AnnealState:
    """Temperature accepting a tour worse by ``beta * seed_cost`` with probability 1/2.

    ``beta`` starts at ``beta_init * beta_decay**(i_warm - 1)`` and the cooling
    rate brings it down to ``beta_final`` after ``n_term`` steps.
    """
    params = params or LnsParams()
    if i_warm < 1:
        raise ValueError("i_warm starts at 1")
    seed_cost = max(float(seed_cost), 1.0)
    beta0 = max(params.beta_init * params.beta_decay ** (i_warm - 1), 2.0 * params.beta_final)
    theta0 = beta0 * seed_cost / math.log(2.0)
    theta_f = params.beta_final * seed_cost / math.log(2.0)
    return AnnealState(theta0, (theta_f / theta0) ** (1.0 / n_term))


# ---------------------------------------------------------------- shared state


class _LocalState:
    """Single-worker stand-in for the shared state: plain arrays and no-op locks."""

    def __init__(self, n_nodes: int):
        self.tour_c = np.zeros(n_nodes, dtype=np.int64)
        self.tour_star = np.zeros(n_nodes, dtype=np.int64)
        self.scalars = np.zeros(len(_SCALARS), dtype=np.float64)
        self.l_c = self.l_star = self.l_term = self.l_theta = nullcontext()


class _SharedState:
    def __init__(self, n_nodes: int, ctx):
        self._raw = [ctx.RawArray("q", n_nodes), ctx.RawArray("q", n_nodes), ctx.RawArray("d", len(_SCALARS))]
        self.l_c, self.l_star, self.l_term, self.l_theta = (ctx.Lock() for _ in range(4))
        self.attach()

    def attach(self):
        self.tour_c = np.frombuffer(self._raw[0], dtype=np.int64)
        self.tour_star = np.frombuffer(self._raw[1], dtype=np.int64)
        self.scalars = np.frombuffer(self._raw[2], dtype=np.float64)


_SCALARS = ("cost_c", "cost_star", "i_term", "improved", "broke", "stop", "theta", "r_cool",
            "iterations", "reached")
_I = {name: i for i, name in enumerate(_SCALARS)}


class _Weights:
    def __init__(self, names):
        self.w = np.ones(len(names))
        self.score = np.zeros(len(names))
        self.uses = np.zeros(len(names))

    def pick(self, rng) -> int:
        return int(rng.choice(len(self.w), p=self.w / self.w.sum()))

    def credit(self, i: int, amount: float):
        self.uses[i] += 1
        self.score[i] += amount

    def update(self):
        used = self.uses > 0
        self.w[used] = _WEIGHT_MEMORY * self.w[used] + (1 - _WEIGHT_MEMORY) * self.score[used] / self.uses[used]
        self.w = np.maximum(self.w, _MIN_WEIGHT)
        self.score[:] = 0
        self.uses[:] = 0


@dataclass
class _Problem:
    cost: np.ndarray
    clusters: list
    owner: np.ndarray
    params: LnsParams
    n_workers: int
    deadline: float | None
    stop_cost: int | None
    t_start: float
    closed: bool = False
    kmax: int = field(init=False)

    def __post_init__(self):
        self.kmax = max_removals(len(self.clusters), self.params.max_removal_fraction)


def _init_warm_trial(state, prob: _Problem, i_warm: int):
    s, ix = state.scalars, _I
    state.tour_c[:] = state.tour_star
    s[ix["cost_c"]] = s[ix["cost_star"]]
    s[ix["i_term"]] = 1
    s[ix["improved"]] = 0
    s[ix["broke"]] = s[ix["stop"]]
    anneal = set_temp_and_cooling(i_warm, prob.params.n_term, s[ix["cost_star"]], prob.params)
    r_cool = anneal.r_cool
    if prob.params.scale_cooling_by_workers:
        r_cool = r_cool ** (1.0 / prob.n_workers)
    s[ix["theta"]] = anneal.theta
    s[ix["r_cool"]] = r_cool


def _write_best(state, prob: _Problem, tour, c) -> bool:
    """Replace the best tour when ``c`` beats it; caller holds ``l_star``."""
    s, ix = state.scalars, _I
    if c >= s[ix["cost_star"]]:
        return False
    state.tour_star[:] = tour
    s[ix["cost_star"]] = c
    if prob.stop_cost is not None and c <= prob.stop_cost and s[ix["reached"]] < 0:
        s[ix["reached"]] = time.monotonic() - prob.t_start
        s[ix["stop"]] = 1
    return True


def _worker_trial(state, prob: _Problem, rng, removal: _Weights, insertion: _Weights):
    """One warm trial's inner loop for one worker."""
    s, ix = state.scalars, _I
    n_term, params = prob.params.n_term, prob.params
    cost, clusters, owner, closed = prob.cost, prob.clusters, prob.owner, prob.closed
    it = 0
    while True:
        with state.l_term:
            limit = n_term / 4 if s[ix["improved"]] else n_term / 6
            if s[ix["broke"]] or s[ix["stop"]] or s[ix["i_term"]] > limit:
                s[ix["broke"]] = 1
                break
            if prob.deadline is not None and it % _DEADLINE_STRIDE == 0 and time.monotonic() > prob.deadline:
                s[ix["broke"]] = 1
                s[ix["stop"]] = 1
                break
        it += 1
        hr, hi = removal.pick(rng), insertion.pick(rng)
        with state.l_c:
            current = state.tour_c.copy()
        k = int(rng.integers(1, prob.kmax + 1))
        partial, removed = remove_nodes(current, k, REMOVALS[hr], cost, rng, closed)
        missing = [int(owner[v]) for v in removed]
        cand = insert_nodes(partial, missing, INSERTIONS[hi], params.noise, cost, clusters, rng, closed)
        cand_cost = tour_cost(cost, cand, closed)
        with state.l_theta:
            theta = float(s[ix["theta"]])
        with state.l_c:
            before = s[ix["cost_c"]]
            accepted = accept(cand_cost, before, theta, rng)
            if accepted:
                state.tour_c[:] = cand
                s[ix["cost_c"]] = cand_cost
        update_best = False
        if accepted:
            with state.l_star:
                update_best = _write_best(state, prob, cand, cand_cost)
            if update_best:
                with state.l_term:
                    s[ix["i_term"]] = 1
                    s[ix["improved"]] = 1
                cand = local_reopt(cand, cost, clusters, owner, closed)
                cand_cost = tour_cost(cost, cand, closed)
                with state.l_star:
                    _write_best(state, prob, cand, cand_cost)
                with state.l_c:
                    if cand_cost < s[ix["cost_c"]]:
                        state.tour_c[:] = cand
                        s[ix["cost_c"]] = cand_cost
        if not update_best:
            with state.l_term:
                s[ix["i_term"]] += 1
        score = _SCORE_BEST if update_best else _SCORE_IMPROVE if accepted and cand_cost < before else (
            _SCORE_ACCEPT if accepted else 0.0)
        removal.credit(hr, score)
        insertion.credit(hi, score)
        with state.l_theta:
            s[ix["theta"]] *= s[ix["r_cool"]]
    with state.l_term:
        s[ix["iterations"]] += it


def _run_worker(state, prob: _Problem, rng, barrier, leader: bool):
    removal, insertion = _Weights(REMOVALS), _Weights(INSERTIONS)
    for i_warm in range(1, prob.params.n_warm + 1):
        if leader:
            _init_warm_trial(state, prob, i_warm)
        if barrier is not None:
            barrier.wait()
        _worker_trial(state, prob, rng, removal, insertion)
        if prob.params.adaptive_weights:
            removal.update()
            insertion.update()
        if barrier is not None:
            barrier.wait()


def _process_main(state, prob, rng, barrier, leader):
    state.attach()
    try:
        _run_worker(state, prob, rng, barrier, leader)
    except BaseException:
        barrier.abort()
        raise


def pglns_solve(
    cost: np.ndarray,
    clusters,
    seed_tour,
    params: LnsParams,
    n_workers: int = 1,
    rngs=None,
    deadline: float | None = None,
    stop_cost: int | None = None,
    owner: np.ndarray | None = None,
    closed: bool = False,
) -> LnsResult:
    """Improve ``seed_tour``; returns the best tour found, never costlier than the seed.

    ``rngs`` holds one generator per worker. ``deadline`` is a
    ``time.monotonic`` instant; ``stop_cost`` ends the search as soon as the
    best tour reaches that cost. ``closed`` prices the edge back to the depot.
    """
    if n_workers < 1:
        raise ValueError("n_workers must be >= 1")
    clusters = [np.asarray(c, dtype=np.int64) for c in clusters]
    if owner is None:
        owner = np.empty(sum(len(c) for c in clusters), dtype=np.int64)
        for i, c in enumerate(clusters):
            owner[c] = i
    seed = np.asarray(seed_tour, dtype=np.int64)
    validate_tour(seed, clusters, owner)
    if rngs is None:
        rngs = np.random.default_rng().spawn(n_workers)
    if len(rngs) < n_workers:
        raise ValueError("need one generator per worker")
    cost = np.asarray(cost)
    t_start = time.monotonic()
    prob = _Problem(cost, clusters, owner, params, n_workers, deadline, stop_cost, t_start, closed)
    seed_cost = tour_cost(cost, seed, closed)

    if n_workers == 1:
        state = _LocalState(len(seed))
    else:
        ctx = mp.get_context("fork")
        state = _SharedState(len(seed), ctx)
    state.tour_star[:] = seed
    state.scalars[:] = 0
    state.scalars[_I["cost_star"]] = seed_cost
    state.scalars[_I["reached"]] = -1.0
    if stop_cost is not None and seed_cost <= stop_cost:
        state.scalars[_I["reached"]] = 0.0
        state.scalars[_I["stop"]] = 1

    if n_workers == 1:
        _run_worker(state, prob, rngs[0], None, True)
    else:
        barrier = ctx.Barrier(n_workers)
        procs = [
            ctx.Process(target=_process_main, args=(state, prob, rngs[j], barrier, j == 0), daemon=True)
            for j in range(n_workers)
        ]
        for p in procs:
            p.start()
        for p in procs:
            p.join()
        bad = [p.exitcode for p in procs if p.exitcode != 0]
        if bad:
            raise RuntimeError(f"LNS worker failed with exit codes {bad}")

    best = state.tour_star.copy()
    best_cost = int(state.scalars[_I["cost_star"]])
    assert best_cost <= seed_cost and best_cost == tour_cost(cost, best, closed)
    reached = float(state.scalars[_I["reached"]])
    return LnsResult(best, best_cost, int(state.scalars[_I["iterations"]]), reached if reached >= 0 else None)


def glns_solve(cost, clusters, seed_tour, params: LnsParams, rng=None, deadline=None, stop_cost=None,
               owner=None, closed: bool = False) -> LnsResult:
    """Serial specialization: one worker, in-process."""
    rngs = [rng if rng is not None else np.random.default_rng()]
    return pglns_solve(cost, clusters, seed_tour, params, 1, rngs, deadline, stop_cost, owner, closed)


def random_insertion_tour(cost, clusters, rng, noise: float = 0.0, closed: bool = False) -> list:
    """Clusters inserted in random order, each at its cheapest node and position."""
    order = [int(c) for c in rng.permutation(np.arange(1, len(clusters)))]
    tour = [0]
    for c in order:
        nodes = np.asarray(clusters[c])
        a, pos = _best_slot(insertion_deltas(tour, nodes, cost, closed), noise, rng)
        tour.insert(int(pos) + 1, int(nodes[a]))
    return tour


def solve_cycle_gtsp(cost, clusters, params: LnsParams, rng, budget_s: float, n_workers: int = 1):
    """Cheapest cycle visiting every cluster once (no depot), as in GTSPLIB files.

    Each node of the smallest cluster is tried as the fixed start; the budget is
    split evenly between them. Returns (node order, cost) in original indices.
    """
    clusters = [np.asarray(c, dtype=np.int64) for c in clusters]
    root = min(range(len(clusters)), key=lambda i: (len(clusters[i]), i))
    others = [c for i, c in enumerate(clusters) if i != root]
    share = budget_s / len(clusters[root])
    best = None
    for r in clusters[root]:
        nodes = np.concatenate([[r]] + others)
        sub = cost[np.ix_(nodes, nodes)]
        sub_clusters = [np.array([0])]
        k = 1
        for c in others:
            sub_clusters.append(np.arange(k, k + len(c)))
            k += len(c)
        seed = random_insertion_tour(sub, sub_clusters, rng, closed=True)
        res = pglns_solve(sub, sub_clusters, seed, params, n_workers, rng.spawn(n_workers),
                          time.monotonic() + share, closed=True)
        if best is None or res.cost < best[1]:
            best = ([int(nodes[v]) for v in res.tour], res.cost)
    return best
