"""JSON files for instances, solve logs and trajectories, plus a GTSPLIB reader/writer."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .metrics import SolveLog
from .model import AgentModel, BSplineTrajectory, Instance, LinearTrajectory, Target

INSTANCE_SCHEMA = "mttsp-instance/1"
LOG_SCHEMA = "mttsp-log/1"
TRAJECTORY_SCHEMA = "mttsp-trajectory/1"


def _dumps(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


# ---------------------------------------------------------------- instances


def _traj_to_json(traj) -> dict:
    if isinstance(traj, LinearTrajectory):
        return {"kind": "linear", "p0": list(traj.p0), "vel": list(traj.vel)}
    return {
        "kind": "bspline",
        "degree": traj.degree,
        "knots": list(traj.knots),
        "control_points": [list(c) for c in traj.control_points],
    }


def _traj_from_json(d: dict):
    if d["kind"] == "linear":
        return LinearTrajectory(tuple(map(float, d["p0"])), tuple(map(float, d["vel"])))
    if d["kind"] == "bspline":
        return BSplineTrajectory(
            tuple(map(float, d["knots"])),
            tuple(tuple(map(float, c)) for c in d["control_points"]),
            int(d.get("degree", 3)),
        )
    raise ValueError(f"unknown trajectory kind {d['kind']!r}")


def instance_to_dict(instance: Instance) -> dict:
    a = instance.agent
    agent = {"v_max": a.v_max, "q0": list(a.q0)}
    if a.is_dubins:
        agent.update(v_min=a.v_min, omega_max=a.omega_max, speed_set=list(a.speed_set))
    out = {
        "schema": INSTANCE_SCHEMA,
        "generator": instance.meta.get("generator"),
        "variant": instance.variant.value,
        "agent": agent,
        "targets": [
            {"id": t.id, "window": list(t.window), "radius": t.radius, "traj": _traj_to_json(t.traj)}
            for t in instance.targets
        ],
    }
    if "witness" in instance.meta:
        out["witness"] = instance.meta["witness"]
    return out


def instance_from_dict(d: dict) -> Instance:
    if d.get("schema") != INSTANCE_SCHEMA:
        raise ValueError(f"not an instance file (schema {d.get('schema')!r})")
    a = d["agent"]
    agent = AgentModel(
        d["variant"],
        float(a["v_max"]),
        tuple(a["q0"]),
        a.get("v_min"),
        a.get("omega_max"),
        tuple(a.get("speed_set", ())),
    )
    targets = [
        Target(int(t["id"]), _traj_from_json(t["traj"]), tuple(map(float, t["window"])), float(t.get("radius", 0.0)))
        for t in d["targets"]
    ]
    meta = {k: d[k] for k in ("generator", "witness") if d.get(k) is not None}
    return Instance(agent, targets, meta)


def dumps_instance(instance: Instance) -> str:
    return _dumps(instance_to_dict(instance))


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(dumps_instance(instance))


def load_instance(path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text()))


def instance_hash(instance: Instance) -> str:
    d = instance_to_dict(instance)
    d.pop("generator", None)
    d.pop("witness", None)
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------- logs


def log_to_dict(log: SolveLog) -> dict:
    return {
        "schema": LOG_SCHEMA,
        "budget": log.budget,
        "metadata": log.metadata,
        "events": [{"t_wall": e.t_wall, "raw_cost": e.raw_cost, "kind": e.kind} for e in log.events],
    }


def log_from_dict(d: dict) -> SolveLog:
    if d.get("schema") != LOG_SCHEMA:
        raise ValueError(f"not a log file (schema {d.get('schema')!r})")
    log = SolveLog(float(d["budget"]), dict(d.get("metadata", {})))
    for e in d["events"]:
        log.record(float(e["t_wall"]), float(e["raw_cost"]), e["kind"])
    return log


def save_log(log: SolveLog, path) -> None:
    Path(path).write_text(_dumps(log_to_dict(log)))


def load_log(path) -> SolveLog:
    return log_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------- trajectories


def trajectory_to_dict(instance: Instance, incumbent, trajectory, samples_per_leg: int = 0) -> dict:
    out = {
        "schema": TRAJECTORY_SCHEMA,
        "variant": instance.variant.value,
        "cost": incumbent.raw_cost,
        "tour": [{"target": p.owner, "config": list(p.config), "time": p.time} for p in incumbent.points],
    }
    if samples_per_leg > 0:
        out["samples"] = [[t, list(q)] for t, q in trajectory.samples(samples_per_leg)]
    return out


def save_trajectory(instance, incumbent, trajectory, path, samples_per_leg: int = 20) -> None:
    Path(path).write_text(_dumps(trajectory_to_dict(instance, incumbent, trajectory, samples_per_leg)))


# ---------------------------------------------------------------- GTSPLIB


class GtspInstance:
    """Clusters (0-based node lists) and an integer cost matrix read from a GTSPLIB file."""

    def __init__(self, name: str, cost: np.ndarray, clusters: list):
        self.name = name
        self.cost = cost
        self.clusters = clusters

    @property
    def n(self) -> int:
        return len(self.cost)


def _euc_2d(coords: np.ndarray) -> np.ndarray:
    d = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=2)
    return np.floor(d + 0.5).astype(np.int64)


def read_gtsplib(path) -> GtspInstance:
    """Parse FULL_MATRIX or EUC_2D/CEIL_2D GTSPLIB files with a GTSP_SET_SECTION."""
    header, section, body = {}, None, {"matrix": [], "coords": [], "sets": []}
    for line in (ln.strip() for ln in Path(path).read_text().splitlines()):
        if not line or line == "EOF":
            continue
        key = line.split(":")[0].strip().upper()
        if key in ("EDGE_WEIGHT_SECTION", "NODE_COORD_SECTION", "GTSP_SET_SECTION"):
            section = key
            continue
        if ":" in line:
            k, _, v = line.partition(":")
            header[k.strip().upper()] = v.strip()
            section = None
            continue
        if section == "EDGE_WEIGHT_SECTION":
            body["matrix"].extend(int(float(x)) for x in line.split())
        elif section == "NODE_COORD_SECTION":
            parts = line.split()
            body["coords"].append((float(parts[1]), float(parts[2])))
        elif section == "GTSP_SET_SECTION":
            body["sets"].extend(int(x) for x in line.split())
    n = int(header["DIMENSION"])
    kind = header.get("EDGE_WEIGHT_TYPE", "EXPLICIT").upper()
    if kind == "EXPLICIT":
        fmt = header.get("EDGE_WEIGHT_FORMAT", "FULL_MATRIX").upper()
        if fmt != "FULL_MATRIX":
            raise ValueError(f"unsupported EDGE_WEIGHT_FORMAT {fmt}")
        cost = np.array(body["matrix"], dtype=np.int64).reshape(n, n)
    elif kind == "EUC_2D":
        cost = _euc_2d(np.array(body["coords"]))
    elif kind == "CEIL_2D":
        c = np.array(body["coords"])
        cost = np.ceil(np.linalg.norm(c[:, None] - c[None], axis=2)).astype(np.int64)
    else:
        raise ValueError(f"unsupported EDGE_WEIGHT_TYPE {kind}")
    clusters, cur = [], None
    for x in body["sets"]:
        if cur is None:
            cur = []  # x is the set id
        elif x == -1:
            clusters.append(np.array(cur, dtype=np.int64) - 1)
            cur = None
        else:
            cur.append(x)
    m = int(header.get("GTSP_SETS", len(clusters)))
    if len(clusters) != m:
        raise ValueError(f"expected {m} sets, parsed {len(clusters)}")
    if sorted(int(v) for c in clusters for v in c) != list(range(n)):
        raise ValueError("sets must partition the nodes")
    return GtspInstance(header.get("NAME", Path(path).stem), cost, clusters)


def write_gtsplib(path, name: str, cost: np.ndarray, clusters) -> None:
    """FULL_MATRIX GTSPLIB file; nodes are written 1-based."""
    n = len(cost)
    lines = [
        f"NAME: {name}",
        "TYPE: AGTSP",
        f"DIMENSION: {n}",
        f"GTSP_SETS: {len(clusters)}",
        "EDGE_WEIGHT_TYPE: EXPLICIT",
        "EDGE_WEIGHT_FORMAT: FULL_MATRIX",
        "EDGE_WEIGHT_SECTION",
    ]
    lines += [" ".join(str(int(x)) for x in row) for row in cost]
    lines.append("GTSP_SET_SECTION")
    for i, c in enumerate(clusters, start=1):
        lines.append(" ".join([str(i)] + [str(int(v) + 1) for v in c] + ["-1"]))
    lines.append("EOF")
    Path(path).write_text("\n".join(lines) + "\n")


def export_graph(graph, matrix, path, name: str = "sample_graph") -> None:
    """Write a sample-point graph as a cycle GTSP whose edges back into the depot cost 0.

    A cycle through the depot then costs exactly as much as the open tour.
    """
    cost = matrix.cost.copy()
    cost[:, 0] = 0
    np.fill_diagonal(cost, 0)
    write_gtsplib(path, name, cost, graph.clusters)
