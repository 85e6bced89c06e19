"""Names (points of Baire space) and dialog machines over them.

A Name is a memoised total function ℕ → ℕ queried position by position under a
FuelMeter. Dialog machines read one input symbol per step and emit finitely
many output symbols; nondeterministic-advice runs dovetail a countable family
of machines and commit to the least branch that survives rejection.

Derived names (machine outputs) recompute their production per observation so
that every observation is a pure function of (inputs, budget); values are
still checked against a global memo.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Sequence

from .fuel import FuelExhausted, FuelMeter

Word = tuple[int, ...]


class _Reject:
    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover
        return "REJECT"


REJECT = _Reject()


class _Halt:
    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover
        return "HALT"


HALT = _Halt()


class Name:
    """A point of Baire space, queried one position at a time.

    `fn(i, meter)` computes position i; it may consult other names through the
    same meter. Values are memoised for the lifetime of the name; fuel charges
    are per observation (see FuelMeter.charge_query).
    """

    def __init__(self, fn: Callable[[int, FuelMeter | None], int], label: str = "",
                 recompute: bool = False) -> None:
        self._fn = fn
        self.label = label
        self.memo: dict[int, int] = {}
        self.fresh_queries = 0
        # derived names recompute per observation so charges stay replay-pure
        self.recompute = recompute

    def query(self, i: int, meter: FuelMeter | None = None) -> int:
        if i < 0:
            raise ValueError("name positions are nonnegative")
        if meter is not None:
            meter.charge_query(id(self), i)
        if i in self.memo and not self.recompute:
            return self.memo[i]
        value = self._fn(i, meter)
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise ValueError(f"name produced invalid symbol {value!r} at {i}")
        if i in self.memo and self.memo[i] != value:
            raise RuntimeError(f"nondeterministic name at {i}: {self.memo[i]} vs {value}")
        if i not in self.memo:
            self.memo[i] = value
            self.fresh_queries += 1
        return value

    def prefix(self, n: int, meter: FuelMeter | None = None) -> Word:
        return tuple(self.query(i, meter) for i in range(n))

    def __repr__(self) -> str:  # pragma: no cover
        known = [self.memo.get(i, "?") for i in range(min(8, len(self.memo) + 1))]
        tag = f" {self.label}" if self.label else ""
        return f"<Name{tag} {known}...>"

    @staticmethod
    def constant(value: int, label: str = "") -> "Name":
        return Name(lambda i, m: value, label or f"const {value}")

    @staticmethod
    def from_values(values: Sequence[int], tail: int = 0, label: str = "") -> "Name":
        vals = tuple(values)
        return Name(lambda i, m: vals[i] if i < len(vals) else tail, label)

    @staticmethod
    def from_fn(fn: Callable[[int], int], label: str = "") -> "Name":
        return Name(lambda i, m: fn(i), label)


# === Pairing ===

def pair_names(p: Name, q: Name) -> Name:
    """Interleave: result(2n) = p(n), result(2n+1) = q(n)."""

    def fn(i: int, meter: FuelMeter | None) -> int:
        half, parity = divmod(i, 2)
        return (q if parity else p).query(half, meter)

    return Name(fn, label="pair")


def unpair_names(r: Name) -> tuple[Name, Name]:
    left = Name(lambda i, m: r.query(2 * i, m), label="left")
    right = Name(lambda i, m: r.query(2 * i + 1, m), label="right")
    return left, right


def cantor_pair(n: int, i: int) -> int:
    return (n + i) * (n + i + 1) // 2 + i


def cantor_unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    i = z - w * (w + 1) // 2
    return w - i, i


# === Dialog machines ===

@dataclass(frozen=True)
class DialogMachine:
    """One input symbol per step; emits a finite tuple of output symbols.

    `step(state, symbol)` returns (new_state, emitted). Returning HALT as the
    new state ends the dialog. Emitting REJECT kills an advice branch.
    """

    initial: object
    step: Callable[[object, int], tuple[object, tuple]]
    label: str = ""


class RunStatus(Enum):
    RUNNING = "running"
    HALTED = "halted"
    FUEL_EXHAUSTED = "fuel-exhausted"


@dataclass
class DialogRun:
    output: Word
    status: RunStatus
    steps: int


def run_dialog(machine: DialogMachine, p: Name, fuel: int) -> DialogRun:
    """Run until halt or budget. RUNNING means a clean stop at a step
    boundary; FUEL_EXHAUSTED means the input's own computation overdrew
    mid-step."""
    meter = FuelMeter(fuel)
    state = machine.initial
    out: list[int] = []
    pos = 0
    steps = 0
    while True:
        if state is HALT:
            return DialogRun(tuple(out), RunStatus.HALTED, steps)
        cost = 1 + (0 if (id(p), pos) in meter.seen else 1)
        if meter.remaining < cost:
            return DialogRun(tuple(out), RunStatus.RUNNING, steps)
        meter.spend(1)
        try:
            value = p.query(pos, meter)
        except FuelExhausted:
            return DialogRun(tuple(out), RunStatus.FUEL_EXHAUSTED, steps)
        state, emitted = machine.step(state, value)
        for sym in emitted:
            if sym is REJECT:
                raise ValueError("REJECT outside an advice run")
            out.append(sym)
        pos += 1
        steps += 1


def apply_machine(machine: DialogMachine, p: Name, label: str = "") -> Name:
    """The name computed by feeding p through the machine.

    Production state lives in the observing meter's scratch, so each
    observation replays (and is charged for) exactly the work a fresh run
    would do; produced values are memoised for consistency.
    """

    def fn(i: int, meter: FuelMeter | None) -> int:
        key = ("machine", id(fn))
        if meter is not None:
            scratch = meter.scratch.setdefault(key, {"state": machine.initial, "pos": 0, "out": []})
        else:
            scratch = fn.__dict__.setdefault("_free_scratch", {"state": machine.initial, "pos": 0, "out": []})  # type: ignore[attr-defined]
        out: list[int] = scratch["out"]
        idle = 0
        while len(out) <= i:
            if scratch["state"] is HALT:
                while True:
                    if meter is None:
                        raise FuelExhausted("machine halted before producing position")
                    meter.spend(1)
            if meter is not None:
                meter.spend(1)
            value = p.query(scratch["pos"], meter)
            state, emitted = machine.step(scratch["state"], value)
            scratch["state"] = state
            scratch["pos"] += 1
            out.extend(emitted)
            if not emitted:
                idle += 1
                if meter is None and idle > 100_000:
                    raise RuntimeError("silent machine in free observation")
            else:
                idle = 0
        return out[i]

    return Name(fn, label=label or f"apply {machine.label}", recompute=True)


# === Nondeterministic advice ===

@dataclass
class _Branch:
    state: object
    pos: int = 0
    out: list[int] | None = None
    alive: bool = True

    def __post_init__(self) -> None:
        if self.out is None:
            self.out = []


class AdviceRun:
    """Dovetailed run of a countable machine family over one input.

    Round d steps branches 0..d once each; a branch dies when it emits REJECT.
    The current selection is the least alive branch (never-stepped branches
    are alive with empty output).
    """

    def __init__(self, branches: Callable[[int], DialogMachine], p: Name) -> None:
        self.family = branches
        self.p = p
        self.states: list[_Branch] = []

    def _branch(self, k: int) -> _Branch:
        while len(self.states) <= k:
            self.states.append(_Branch(self.family(len(self.states)).initial))
        return self.states[k]

    def step_branch(self, k: int, meter: FuelMeter) -> None:
        br = self._branch(k)
        if not br.alive or br.state is HALT:
            return
        meter.spend(1)
        value = self.p.query(br.pos, meter)
        state, emitted = self.family(k).step(br.state, value)
        br.state = state
        br.pos += 1
        for sym in emitted:
            if sym is REJECT:
                br.alive = False
                return
            br.out.append(sym)

    def selection(self) -> tuple[int, Word]:
        for k, br in enumerate(self.states):
            if br.alive:
                return k, tuple(br.out)
        return len(self.states), ()

    def rounds(self, meter: FuelMeter) -> Iterator[tuple[int, Word]]:
        """Yield the selection after every branch-step; raises FuelExhausted
        when the budget dies."""
        for d in itertools.count():
            for k in range(d + 1):
                self.step_branch(k, meter)
                yield self.selection()


def nd_advice_run(
    branches: Callable[[int], DialogMachine] | Sequence[DialogMachine],
    p: Name,
    fuel: int,
) -> tuple[int, Word]:
    """Run the advice family until the budget ends, then commit to the least
    alive branch. An empty committed output is reported as FuelExhausted."""
    if not callable(branches):
        seq = list(branches)

        def family(k: int) -> DialogMachine:
            return seq[k] if k < len(seq) else DialogMachine(HALT, lambda s, v: (HALT, ()))

        branches = family
    meter = FuelMeter(fuel)
    run = AdviceRun(branches, p)
    last: tuple[int, Word] = (0, ())
    try:
        for sel in run.rounds(meter):
            last = sel
    except FuelExhausted:
        pass
    k, word = run.selection() if run.states else last
    if not word:
        raise FuelExhausted("least surviving branch committed no output")
    return k, word
