import math

import numpy as np
import pytest
from hypothesis import settings

from mttsp.graph import SamplePoint, SamplePointGraph, build_graph
from mttsp.model import AgentModel, Instance, LinearTrajectory, Target, rand_config

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_ce_instance(rng, n_tar, arena=60.0, v_max=5.0, radius=3.0, window=(10.0, 30.0), horizon=40.0):
    agent = AgentModel("close-enough", v_max, tuple(rng.uniform(-arena / 2, arena / 2, 2)))
    targets = []
    for i in range(1, n_tar + 1):
        heading = rng.uniform(0, 2 * math.pi)
        speed = rng.uniform(0.5, 1.0)
        vel = (speed * math.cos(heading), speed * math.sin(heading))
        lo = rng.uniform(0, horizon)
        targets.append(
            Target(i, LinearTrajectory(tuple(rng.uniform(-arena / 2, arena / 2, 2)), vel),
                   (lo, lo + rng.uniform(*window)), radius)
        )
    return Instance(agent, targets)


def random_sets(instance, rng, max_nodes):
    sets = []
    for tgt in instance.targets:
        m = int(rng.integers(1, max_nodes + 1))
        pts = []
        for _ in range(m):
            t = float(rng.uniform(*tgt.window))
            pts.append(SamplePoint(tgt.id, rand_config(instance.agent, tgt, t, rng), t))
        sets.append(pts)
    return sets


def random_ce_graph(rng, max_clusters=6, max_nodes=4, min_clusters=1):
    n_tar = int(rng.integers(min_clusters, max_clusters + 1))
    inst = random_ce_instance(rng, n_tar)
    return inst, build_graph(inst, random_sets(inst, rng, max_nodes))


def synthetic_graph(rng, n_clusters, nodes_per_cluster, p_edge=0.6):
    """Abstract clustered graph with random feasibility and costs (no geometry)."""
    sizes = [1] + [int(rng.integers(1, nodes_per_cluster + 1)) for _ in range(n_clusters)]
    owner = np.concatenate([np.full(s, i) for i, s in enumerate(sizes)])
    n = len(owner)
    clusters = [np.flatnonzero(owner == i) for i in range(len(sizes))]
    feas = (rng.random((n, n)) < p_edge) & (owner[:, None] != owner[None, :]) & (owner[None, :] != 0)
    raw = np.where(feas, np.round(rng.uniform(1, 50, (n, n)), 3), np.inf)
    return SamplePointGraph([None] * n, clusters, owner, raw, feas)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
