"""Fuel metering for partial computations.

Every potentially-unbounded observation in this package runs under a
FuelMeter. The meter charges one unit per input position first touched during
the observation and one unit per process step, and aborts the observation with
FuelExhausted the moment the budget would be exceeded. Observations are pure
functions of (inputs, budget): rerunning with the same budget yields the same
transcript, and raising the budget never loses information already obtained.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable


class FuelExhausted(Exception):
    """Raised when an observation's fuel budget is exceeded."""

    def __init__(self, message: str = "fuel exhausted") -> None:
        super().__init__(message)


@dataclass
class TraceEvent:
    fuel_used: int
    kind: str
    detail: str

    def line(self) -> str:
        return f"fuel={self.fuel_used} kind={self.kind} {self.detail}"


class FuelMeter:
    """Budgeted step/query counter shared by one observation.

    `seen` dedups (name id, position) charges within this observation so that
    re-reading an input symbol the same run is free, independently of any
    global memoisation state.
    """

    def __init__(self, limit: int, trace: list[TraceEvent] | None = None) -> None:
        if limit < 0:
            raise ValueError("fuel limit must be nonnegative")
        self.limit = limit
        self.used = 0
        self.seen: set[tuple[int, int]] = set()
        self.scratch: dict[object, object] = {}
        self.trace = trace

    def spend(self, amount: int = 1) -> None:
        if self.used + amount > self.limit:
            self.used = self.limit
            raise FuelExhausted()
        self.used += amount

    def charge_query(self, name_id: int, position: int) -> bool:
        """Charge for reading `position` of name `name_id`; once per run."""
        key = (name_id, position)
        if key in self.seen:
            return False
        self.spend(1)
        self.seen.add(key)
        return True

    def record(self, kind: str, detail: str) -> None:
        if self.trace is not None:
            self.trace.append(TraceEvent(self.used, kind, detail))

    @property
    def remaining(self) -> int:
        return self.limit - self.used


@dataclass
class TraceLog:
    """Accumulates trace events across observations for --trace output."""

    events: list[TraceEvent] = field(default_factory=list)

    def meter(self, limit: int) -> FuelMeter:
        return FuelMeter(limit, trace=self.events)

    def dump(self) -> str:
        return "\n".join(e.line() for e in self.events)


def with_fuel(limit: int, fn: Callable[[FuelMeter], object]) -> object:
    """Run `fn` under a fresh meter; FuelExhausted propagates."""
    return fn(FuelMeter(limit))
