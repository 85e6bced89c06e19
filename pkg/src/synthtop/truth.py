"""Truth degrees: Sierpiński observations, finite-mindchange values, limits.

A Process owns a restartable recipe(meter) -> iterator of payloads. Observing
at budget f runs the recipe under that budget and returns the payloads it
managed to yield, each stamped with the fuel level at which it appeared.
Observation is deterministic and monotone in f, so results at lower budgets
are answered by slicing a cached higher-budget run.

Sierpiński values fire at most once (payload = detecting index). Mindchange
values yield a first guess and then revisions; the revision count is the
mindchange count. Mindchange tables are the word-trigger descriptions of
such values over name prefixes, with longest-match semantics.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from .fuel import FuelExhausted, FuelMeter
from .names import Name, Word, cantor_pair

__all__ = [
    "Process", "SierpValue", "SierpObservation", "NablaValue", "NablaObservation",
    "LimBool", "MindchangeTable", "sierp_or", "sierp_and", "sierp_to_nabla",
    "nabla_not", "nabla_and", "nabla_or", "nabla_all", "nabla_decode", "nabla_encode",
    "nabla_to_lim", "lim_column", "table_not", "table_and", "table_or",
    "parse_table", "serialize_table", "charge_budget",
]


class Process:
    """Replayable fueled computation with cached event history."""

    def __init__(self, recipe: Callable[[FuelMeter], Iterator], label: str = "") -> None:
        self.recipe = recipe
        self.label = label
        self._cap = -1
        self._events: list[tuple[int, object]] = []
        self._stamps: list[int] = []
        self._ended_at: int | None = None
        self._dd_stamps: list[int] | None = None
        self._dd_guesses: list[object] = []

    def _run(self, budget: int) -> None:
        meter = FuelMeter(budget)
        events: list[tuple[int, object]] = []
        gen = self.recipe(meter)
        try:
            for payload in gen:
                events.append((meter.used, payload))
            self._ended_at = meter.used
        except FuelExhausted:
            pass
        self._events = events
        self._stamps = [at for at, _ in events]
        self._cap = budget
        self._dd_stamps = None

    def _ensure(self, fuel: int) -> None:
        if fuel < 0:
            raise ValueError("fuel must be nonnegative")
        if fuel > self._cap and (self._ended_at is None or self._ended_at > self._cap):
            self._run(max(fuel, 2 * self._cap if self._cap > 0 else fuel))

    def events(self, fuel: int) -> list[tuple[int, object]]:
        """Payloads yielded within `fuel`, stamped with fuel-at-yield."""
        self._ensure(fuel)
        return self._events[: bisect.bisect_right(self._stamps, fuel)]

    def first_event(self, fuel: int) -> tuple[int, object] | None:
        self._ensure(fuel)
        if self._stamps and self._stamps[0] <= fuel:
            return self._events[0]
        return None

    def changes_upto(self, fuel: int) -> tuple[int, list[object]]:
        """Count of distinct consecutive guesses within `fuel`, with the
        deduplicated guess list (shared; do not mutate)."""
        self._ensure(fuel)
        if self._dd_stamps is None:
            dst: list[int] = []
            dgs: list[object] = []
            for at, g in self._events:
                if not dgs or dgs[-1] != g:
                    dst.append(at)
                    dgs.append(g)
            self._dd_stamps = dst
            self._dd_guesses = dgs
        return bisect.bisect_right(self._dd_stamps, fuel), self._dd_guesses

    def ended_by(self, fuel: int) -> bool:
        self._ensure(fuel)
        return self._ended_at is not None and self._ended_at <= fuel


def charge_budget(meter: FuelMeter | None, key: object, target: int) -> None:
    """Charge `meter` for driving an internal process up to fuel `target`,
    deduped per observation so replays stay pure."""
    if meter is None:
        return
    charged = meter.scratch.get(("budget", key), 0)
    if target > charged:
        meter.spend(target - charged)
        meter.scratch[("budget", key)] = target


# === Sierpiński ===

@dataclass
class SierpObservation:
    fired: bool
    fire_fuel: int | None
    payload: object = None


class SierpValue:
    """An open truth value: fires at most once."""

    def __init__(self, process: Process) -> None:
        self.process = process

    def observe(self, fuel: int) -> SierpObservation:
        ev = self.process.first_event(fuel)
        if ev is not None:
            at, payload = ev
            return SierpObservation(True, at, payload)
        return SierpObservation(False, None)

    def fired(self, fuel: int) -> bool:
        return self.observe(fuel).fired

    @staticmethod
    def true_after(cost: int, payload: object = 0) -> "SierpValue":
        def recipe(meter: FuelMeter) -> Iterator:
            meter.spend(cost)
            yield payload

        return SierpValue(Process(recipe, "true"))

    @staticmethod
    def never() -> "SierpValue":
        def recipe(meter: FuelMeter) -> Iterator:
            while True:
                meter.spend(1)
            yield None  # pragma: no cover

        return SierpValue(Process(recipe, "never"))

    @staticmethod
    def from_name(p: Name) -> "SierpValue":
        """Decode: fires iff some position of p is nonzero."""

        def recipe(meter: FuelMeter) -> Iterator:
            for i in itertools.count():
                if p.query(i, meter) != 0:
                    yield i
                    return

        return SierpValue(Process(recipe, "decode"))

    def to_name(self) -> Name:
        """Encode: position i is 1 iff the value fires within budget i."""
        proc = self.process

        def fn(i: int, meter: FuelMeter | None) -> int:
            charge_budget(meter, id(proc), i)
            return 1 if proc.events(i) else 0

        return Name(fn, label="sierp", recompute=True)


def sierp_or(children: Sequence[SierpValue] | Callable[[int], "SierpValue | None"],
             countable: bool = False) -> SierpValue:
    """Join: fires iff some child fires; payload = child index. Finite lists
    are round-robined, countable families take the diagonal schedule."""
    if callable(children):
        get = children
    else:
        seq = list(children)

        def get(k: int) -> SierpValue | None:
            return seq[k] if k < len(seq) else None

    def recipe(meter: FuelMeter) -> Iterator:
        if not countable and not callable(children):
            seq_len = len(children)  # type: ignore[arg-type]
            if seq_len == 0:
                return
            for budget in itertools.count():
                for k in range(seq_len):
                    meter.spend(1)
                    child = get(k)
                    if child is not None and child.observe(budget).fired:
                        yield k
                        return
        else:
            from .names import cantor_unpair

            for r in itertools.count():
                meter.spend(1)
                k, budget = cantor_unpair(r)
                child = get(k)
                if child is not None and child.observe(budget).fired:
                    yield k
                    return

    return SierpValue(Process(recipe, "or"))


def sierp_and(a, b: SierpValue | None = None) -> SierpValue:
    """Finite meet: fires once every child has fired. Accepts two values or
    one sequence; the empty meet fires immediately."""
    children: list[SierpValue] = list(a) if b is None else [a, b]

    def recipe(meter: FuelMeter) -> Iterator:
        for budget in itertools.count():
            meter.spend(1)
            if all(c.observe(budget).fired for c in children):
                yield budget
                return

    return SierpValue(Process(recipe, "and"))


# === Finite-mindchange values ===

@dataclass
class NablaObservation:
    has_guess: bool
    guess: object
    changes: int
    ended: bool


class NablaValue:
    """A guess stream with finitely many revisions; payloads are guesses."""

    def __init__(self, process: Process) -> None:
        self.process = process

    def observe(self, fuel: int) -> NablaObservation:
        ev = self.process.events(fuel)
        guesses = [payload for _, payload in ev]
        deduped: list[object] = []
        for g in guesses:
            if not deduped or deduped[-1] != g:
                deduped.append(g)
        return NablaObservation(
            has_guess=bool(deduped),
            guess=deduped[-1] if deduped else None,
            changes=max(0, len(deduped) - 1),
            ended=self.process.ended_by(fuel),
        )

    def guess_at(self, fuel: int) -> object:
        return self.observe(fuel).guess

    def changes_at(self, fuel: int) -> int:
        return self.observe(fuel).changes

    @staticmethod
    def constant(guess: object) -> "NablaValue":
        def recipe(meter: FuelMeter) -> Iterator:
            yield guess

        return NablaValue(Process(recipe, "const"))

    @staticmethod
    def from_schedule(steps: Sequence[tuple[int, object]]) -> "NablaValue":
        """Yield each guess after spending its listed cost."""
        plan = tuple(steps)

        def recipe(meter: FuelMeter) -> Iterator:
            for cost, guess in plan:
                meter.spend(cost)
                yield guess

        return NablaValue(Process(recipe, "schedule"))


def sierp_to_nabla(sv: SierpValue) -> NablaValue:
    def recipe(meter: FuelMeter) -> Iterator:
        yield False
        for budget in itertools.count():
            meter.spend(1)
            obs = sv.observe(budget)
            if obs.fired:
                yield True
                return

    return NablaValue(Process(recipe, "sierp"))


def _combine(values: Sequence[NablaValue], op: Callable[..., object], label: str) -> NablaValue:
    def recipe(meter: FuelMeter) -> Iterator:
        last: list[object] = []
        for budget in itertools.count():
            meter.spend(1)
            obs = [v.observe(budget) for v in values]
            if all(o.has_guess for o in obs):
                combined = op(*[o.guess for o in obs])
                if not last or last[-1] != combined:
                    last.append(combined)
                    yield combined
                if all(o.ended for o in obs):
                    return

    return NablaValue(Process(recipe, label))


def nabla_not(a: NablaValue) -> NablaValue:
    return _combine([a], lambda g: not g, "not")


def nabla_and(a, b: NablaValue | None = None) -> NablaValue:
    values = list(a) if b is None else [a, b]
    if not values:
        return NablaValue.constant(True)
    return _combine(values, lambda *gs: all(bool(g) for g in gs), "and")


def nabla_or(a, b: NablaValue | None = None) -> NablaValue:
    values = list(a) if b is None else [a, b]
    if not values:
        return NablaValue.constant(False)
    return _combine(values, lambda *gs: any(bool(g) for g in gs), "or")


def nabla_all(values: Sequence[NablaValue]) -> NablaValue:
    if not values:
        return NablaValue.constant(True)
    return _combine(list(values), lambda *gs: all(bool(g) for g in gs), "all")


# === Coding on names ===

def nabla_decode(p: Name) -> NablaValue:
    """Guess = (symbol after the last zero seen) - 1."""

    def recipe(meter: FuelMeter) -> Iterator:
        last_zero = -1
        current: object = None
        n = 0
        while True:
            value = p.query(n, meter)
            if value == 0:
                last_zero = n
            elif n == last_zero + 1:
                guess = value - 1
                if current is None or current != guess:
                    current = guess
                    yield guess
            n += 1

    return NablaValue(Process(recipe, "decode"))


def nabla_encode(nv: NablaValue) -> Name:
    """Runs of guess+1 separated by single zeros; leading zeros while no
    guess exists yet. Decoding recovers the limit with no extra mindchanges."""
    proc = nv.process

    def fn(i: int, meter: FuelMeter | None) -> int:
        charge_budget(meter, ("encode", id(proc)), i + 1)
        out: list[int] = []
        prev: object = None
        budget = 0
        while len(out) <= i:
            obs = nv.observe(budget)
            if not obs.has_guess:
                out.append(0)
            elif prev is None:
                out.append(int(obs.guess) + 1)  # type: ignore[arg-type]
                prev = obs.guess
            elif obs.guess != prev:
                out.append(0)
                out.append(int(obs.guess) + 1)  # type: ignore[arg-type]
                prev = obs.guess
            else:
                out.append(int(obs.guess) + 1)  # type: ignore[arg-type]
            budget += 1
        return out[i]

    return Name(fn, label="nabla", recompute=True)


class LimBool:
    """A limit truth value: the eventual bit of a computable bit stream."""

    def __init__(self, process: Process) -> None:
        self.process = process

    def value(self, fuel: int) -> bool | None:
        ev = self.process.events(fuel)
        return bool(ev[-1][1]) if ev else None

    @staticmethod
    def from_bits(bits: Callable[[int], int]) -> "LimBool":
        def recipe(meter: FuelMeter) -> Iterator:
            last: object = None
            for i in itertools.count():
                meter.spend(1)
                b = 1 if bits(i) else 0
                if last is None or b != last:
                    last = b
                    yield b

        return LimBool(Process(recipe, "bits"))


def nabla_to_lim(nv: NablaValue) -> LimBool:
    def recipe(meter: FuelMeter) -> Iterator:
        last: object = None
        for budget in itertools.count():
            meter.spend(1)
            obs = nv.observe(budget)
            if obs.has_guess:
                b = 1 if obs.guess else 0
                if last is None or b != last:
                    last = b
                    yield b
                if obs.ended:
                    return

    return LimBool(Process(recipe, "from-nabla"))


def lim_column(p: Name, column: int) -> LimBool:
    """The limit of one column of a doubly-indexed name."""
    return LimBool.from_bits(lambda i: p.query(cantor_pair(column, i)))


# === Mindchange tables ===

class MindchangeTable:
    """Word-triggered labels with longest-match semantics.

    Finite tables store {word: label}; predicate tables decide membership and
    labels pointwise and enumerate trigger words over a successor function
    in (length, lex) order. The empty word always belongs, default label 0.
    """

    def __init__(
        self,
        entries: dict[Word, int] | None = None,
        member_fn: Callable[[Word], bool] | None = None,
        label_fn: Callable[[Word], int] | None = None,
        successors: Callable[[Word], Iterable[int]] | None = None,
        label: str = "",
    ) -> None:
        if entries is not None:
            table = dict(entries)
            table.setdefault((), 0)
            self.entries: dict[Word, int] | None = table
            self.member_fn = None
            self.label_fn = None
            self.successors = None
        else:
            if member_fn is None or label_fn is None or successors is None:
                raise ValueError("predicate tables need member_fn, label_fn, successors")
            self.entries = None
            self.member_fn = member_fn
            self.label_fn = label_fn
            self.successors = successors
        self.label = label

    @property
    def finite(self) -> bool:
        return self.entries is not None

    def member(self, word: Word) -> bool:
        if word == ():
            return True
        if self.entries is not None:
            return word in self.entries
        return bool(self.member_fn(word))

    def trigger_label(self, word: Word) -> int:
        """Label of a trigger word (requires member(word))."""
        if self.entries is not None:
            return self.entries.get(word, 0)
        if word == ():
            try:
                return int(self.label_fn(()))
            except Exception:
                return 0
        return int(self.label_fn(word))

    def limit_label(self, word: Word) -> int:
        """Label of the longest trigger prefix of `word`."""
        for cut in range(len(word), -1, -1):
            if self.member(word[:cut]):
                return self.trigger_label(word[:cut])
        return self.trigger_label(())

    def words(self, max_length: int | None = None, symbol_cap: int | None = None) -> Iterator[Word]:
        """Trigger words in (length, lex) order, optionally capping symbols."""
        if self.entries is not None:
            for w in sorted(self.entries, key=lambda w: (len(w), w)):
                if max_length is not None and len(w) > max_length:
                    continue
                if symbol_cap is not None and any(s > symbol_cap for s in w):
                    continue
                yield w
            return
        frontier: list[Word] = [()]
        length = 0
        while max_length is None or length <= max_length:
            for w in frontier:
                if self.member(w):
                    yield w
            nxt: list[Word] = []
            for w in frontier:
                for s in self.successors(w):
                    if symbol_cap is None or s <= symbol_cap:
                        nxt.append(w + (s,))
            nxt.sort()
            if not nxt:
                return
            frontier = nxt
            length += 1

    def decide(self, p: Name) -> NablaValue:
        """Longest-match run of the table along p."""

        def recipe(meter: FuelMeter) -> Iterator:
            current = self.trigger_label(())
            yield current
            prefix: list[int] = []
            for n in itertools.count():
                meter.spend(1)
                prefix.append(p.query(n, meter))
                w = tuple(prefix)
                if self.member(w):
                    lab = self.trigger_label(w)
                    if lab != current:
                        current = lab
                        yield lab

        return NablaValue(Process(recipe, f"table {self.label}"))


def table_not(t: MindchangeTable) -> MindchangeTable:
    if t.entries is not None:
        return MindchangeTable({w: 1 - v for w, v in t.entries.items()}, label=f"not {t.label}")
    return MindchangeTable(
        member_fn=t.member_fn,
        label_fn=lambda w: 1 - int(t.label_fn(w)),
        successors=t.successors,
        label=f"not {t.label}",
    )


def _merge(a: MindchangeTable, b: MindchangeTable, op: Callable[[int, int], int],
           label: str) -> MindchangeTable:
    """Triggers = union of triggers; label = op of longest-match labels."""
    if a.entries is not None and b.entries is not None:
        words = set(a.entries) | set(b.entries)
        return MindchangeTable(
            {w: op(a.limit_label(w), b.limit_label(w)) for w in words}, label=label)

    def member(w: Word) -> bool:
        return a.member(w) or b.member(w)

    def lab(w: Word) -> int:
        return op(a.limit_label(w), b.limit_label(w))

    def succ(w: Word) -> Iterable[int]:
        out: set[int] = set()
        for t in (a, b):
            if t.successors is not None:
                out.update(t.successors(w))
            elif t.entries is not None:
                for e in t.entries:
                    if len(e) > len(w) and e[: len(w)] == w:
                        out.add(e[len(w)])
        return sorted(out)

    return MindchangeTable(member_fn=member, label_fn=lab, successors=succ, label=label)


def table_and(a: MindchangeTable, b: MindchangeTable) -> MindchangeTable:
    return _merge(a, b, lambda x, y: 1 if (x and y) else 0, f"({a.label})&({b.label})")


def table_or(a: MindchangeTable, b: MindchangeTable) -> MindchangeTable:
    return _merge(a, b, lambda x, y: 1 if (x or y) else 0, f"({a.label})|({b.label})")


# === Finite-table text format ===

def parse_table(text: str) -> MindchangeTable:
    """Lines `w : label`; `-` is the empty word; `#` starts a comment."""
    entries: dict[Word, int] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ValueError(f"bad table line: {raw!r}")
        left, right = line.rsplit(":", 1)
        left = left.strip()
        word: Word = () if left == "-" else tuple(int(tok) for tok in left.split())
        entries[word] = int(right.strip())
    return MindchangeTable(entries)


def serialize_table(t: MindchangeTable) -> str:
    if t.entries is None:
        raise ValueError("only finite tables serialize")
    lines = []
    for w in sorted(t.entries, key=lambda w: (len(w), w)):
        key = "-" if w == () else " ".join(str(s) for s in w)
        lines.append(f"{key} : {t.entries[w]}")
    return "\n".join(lines) + "\n"
