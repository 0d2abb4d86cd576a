"""Anytime solve logs and the area-under-curve metric."""
from __future__ import annotations

from dataclasses import dataclass, field

EVENT_KINDS = ("initial", "improved", "final")


@dataclass(frozen=True)
class Event:
    t_wall: float
    raw_cost: float
    kind: str


@dataclass
class SolveLog:
    """Incumbent cost over wall time; costs never increase and times strictly increase."""

    budget: float
    metadata: dict = field(default_factory=dict)
    events: list = field(default_factory=list)

    def record(self, t_wall: float, raw_cost: float, kind: str) -> None:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        if self.events:
            last = self.events[-1]
            if t_wall <= last.t_wall:
                raise ValueError("event times must strictly increase")
            if raw_cost > last.raw_cost:
                raise ValueError(f"incumbent cost increased: {last.raw_cost} -> {raw_cost}")
        self.events.append(Event(float(t_wall), float(raw_cost), kind))

    def finish(self, t_end: float) -> None:
        """Close the log with a ``final`` event at min(t_end, budget) when that adds a point."""
        if not self.events:
            return
        t = min(t_end, self.budget)
        if t > self.events[-1].t_wall:
            self.record(t, self.events[-1].raw_cost, "final")

    @property
    def best_cost(self) -> float | None:
        return self.events[-1].raw_cost if self.events else None

    def costs(self) -> list[float]:
        return [e.raw_cost for e in self.events]


def is_monotone(costs) -> bool:
    return all(b <= a for a, b in zip(costs, costs[1:]))


def compute_auc(log: SolveLog) -> float:
    """Integral of the step curve from the first event to the budget."""
    if not log.events:
        raise ValueError("empty log: no feasible solution was found")
    if log.budget < log.events[-1].t_wall:
        raise ValueError("budget precedes the last event")
    area = 0.0
    for cur, nxt in zip(log.events, log.events[1:]):
        area += cur.raw_cost * (nxt.t_wall - cur.t_wall)
    last = log.events[-1]
    return area + last.raw_cost * (log.budget - last.t_wall)


def merge_logs(logs, budget: float, metadata: dict | None = None) -> SolveLog:
    """Running minimum over several concurrent logs (events on equal times keep the cheapest)."""
    merged = SolveLog(budget, dict(metadata or {}))
    pool = sorted(
        (e for log in logs for e in log.events if e.kind != "final"), key=lambda e: (e.t_wall, e.raw_cost)
    )
    for e in pool:
        if merged.events and e.raw_cost >= merged.events[-1].raw_cost:
            continue
        if merged.events and e.t_wall <= merged.events[-1].t_wall:
            # same instant as the previous point but cheaper: replace it
            prev = merged.events.pop()
            merged.events.append(Event(prev.t_wall, e.raw_cost, prev.kind))
            continue
        merged.record(e.t_wall, e.raw_cost, "initial" if not merged.events else "improved")
    return merged
