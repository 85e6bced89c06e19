"""Noetherian machinery: spaces whose open-set lattice has stabilizing
ascending chains support a finite-mindchange calculus for opens, compacts,
and limit-decidable sets. This module implements that calculus over a
certified witness: chain stabilization, union right-inverses, open-to-compact
conversion, Kleene-Brouwer minimization, normalization of limit-decidable
sets to constructible form, fullness decision, quantifier elimination, and
finite-subcover extraction.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Mapping, Sequence

from .fuel import FuelMeter
from .names import REJECT, DialogMachine, Name, Word, cantor_unpair, nd_advice_run
from .opens import (
    ConstructibleSet,
    Delta02Set,
    FiniteUnionCompact,
    OpenSet,
    open_from_indices,
)
from .spaces import CoproductSpace, FiniteSpace, NatBelow, ProductSpace, Space, UnsupportedSpace
from .truth import (
    MindchangeTable,
    NablaValue,
    Process,
    nabla_all,
    nabla_not,
    table_not,
    table_or,
)

_SLICE_SYMBOLS = 64  # symbol ceiling when slicing relation tables


@dataclass(frozen=True)
class NoetherianWitness:
    """Certificate that a space's coded opens satisfy the ascending chain
    condition over its nice basis. provenance records how it was obtained."""

    space: Space
    provenance: str  # finite | primitive | wqo-alexandrov | product | coproduct | image
    o2c_hook: Callable[[OpenSet], NablaValue] | None = None

    def __post_init__(self) -> None:
        if self.space.full_indices is None:
            raise UnsupportedSpace(f"{self.space.label} lacks a finite full cover")

    @property
    def label(self) -> str:
        return f"noeth[{self.space.label}:{self.provenance}]"


def witness_finite(space: FiniteSpace) -> NoetherianWitness:
    return NoetherianWitness(space, "finite")


def witness_below(space: NatBelow) -> NoetherianWitness:
    return NoetherianWitness(space, "primitive")


def witness_product(a: NoetherianWitness, b: NoetherianWitness) -> NoetherianWitness:
    return NoetherianWitness(ProductSpace(a.space, b.space), "product")


def witness_coproduct(a: NoetherianWitness, b: NoetherianWitness) -> NoetherianWitness:
    return NoetherianWitness(CoproductSpace(a.space, b.space), "coproduct")


def witness_for(space: Space) -> NoetherianWitness:
    """Dispatch on the space's shape; Alexandrov spaces need the wqo
    certifier in the orders module instead."""
    if isinstance(space, FiniteSpace):
        return witness_finite(space)
    if isinstance(space, NatBelow):
        return witness_below(space)
    if isinstance(space, ProductSpace):
        return witness_product(witness_for(space.left), witness_for(space.right))
    if isinstance(space, CoproductSpace):
        return witness_coproduct(witness_for(space.left), witness_for(space.right))
    raise UnsupportedSpace(f"no automatic witness for {space.label}")


def union_meet(space: Space, F: Sequence[int], G: Sequence[int]) -> tuple[int, ...]:
    """Canonical indices of (union F) intersect (union G)."""
    out: set[int] = set()
    for f in F:
        for g in G:
            out.update(space.basic_meet(f, g))
    return space.canonical(out)


def _require_coded(u: OpenSet) -> OpenSet:
    if not u.coded:
        raise UnsupportedSpace("engine operations need coded opens")
    return u


# === chain stabilization ===

def subset_nabla(u: OpenSet, v: OpenSet, w: NoetherianWitness) -> NablaValue:
    """Limit-decides U subset-of V by comparing canonical forms of the
    accumulated code prefixes."""
    _require_coded(u)
    _require_coded(v)
    space = w.space

    def recipe(meter: FuelMeter):
        acc_u: tuple[int, ...] = ()
        acc_v: tuple[int, ...] = ()
        last: int | None = None
        for t in itertools.count():
            iu = u.index_at(t, meter)
            iv = v.index_at(t, meter)
            if iu is not None:
                acc_u = space.canonical(acc_u + (iu,))
            if iv is not None:
                acc_v = space.canonical(acc_v + (iv,))
            guess = 1 if space.nice_inclusion(acc_u, acc_v) else 0
            if last is None or guess != last:
                last = guess
                yield guess

    return NablaValue(Process(recipe, "subset"))


def _family(family) -> tuple[Callable[[int], OpenSet], int | None]:
    if callable(family):
        return family, None
    seq = list(family)
    return (lambda i: seq[i]), len(seq)


def stabilize_opens(family, w: NoetherianWitness) -> NablaValue:
    """The least N with union over i<=N of V_i equal to the union of the
    whole family. The ascending chain of prefix unions stabilizes over a
    Noetherian witness, so the guess changes finitely often."""
    fam, size = _family(family)
    space = w.space

    def recipe(meter: FuelMeter):
        opens: list[OpenSet] = []
        acc: list[tuple[int, ...]] = []
        depth: list[int] = []
        last: int | None = None
        for r in itertools.count():
            cols = r + 1 if size is None else min(size, r + 1)
            meter.spend(1 + cols)
            while len(opens) < cols:
                u = _require_coded(fam(len(opens)))
                opens.append(u)
                acc.append(())
                depth.append(0)
            for i in range(cols):
                while depth[i] <= r:
                    idx = opens[i].index_at(depth[i], meter)
                    depth[i] += 1
                    if idx is not None:
                        acc[i] = space.canonical(acc[i] + (idx,))
            prefix: tuple[int, ...] = ()
            prefixes = []
            for i in range(cols):
                prefix = space.canonical(prefix + acc[i])
                prefixes.append(prefix)
            total = prefixes[-1]
            guess = cols - 1
            for n in range(cols):
                if space.nice_inclusion(total, prefixes[n]):
                    guess = n
                    break
            if last is None or guess != last:
                last = guess
                yield guess

    return NablaValue(Process(recipe, "stabilize"))


def stabilize_closeds(family, w: NoetherianWitness) -> NablaValue:
    """Stabilization point of a descending closed chain: the complements'
    ascending open chain stabilizes at the same index."""
    fam, size = _family(family)
    if size is None:
        return stabilize_opens(lambda i: fam(i).complement, w)
    return stabilize_opens([fam(i).complement for i in range(size)], w)


def stabilize_opens_advice(family, w: NoetherianWitness, fuel: int) -> int:
    """Alternate stabilization-point extractor that runs the guess-and-check
    protocol: advice (N, b) asserts the prefix union up to N matches the
    total, with at most b stages of observed disagreement. A branch dies
    when its disagreement allowance runs out; the least surviving branch is
    committed. Returns that branch's N."""
    fam, size = _family(family)
    space = w.space

    def input_fn(z: int, meter: FuelMeter | None) -> int:
        if size is not None:
            col, pos = z % size, z // size
        else:
            col, pos = cantor_unpair(z)
        u = fam(col)
        _require_coded(u)
        return u.code.query(pos, meter)

    stream = Name(input_fn, label="family-interleave", recompute=True)

    def branch(k: int) -> DialogMachine:
        N, allowance = cantor_unpair(k)

        def step(state, symbol):
            count, accs, left = state
            accs = dict(accs)
            if size is not None:
                col = count % size
            else:
                col = cantor_unpair(count)[0]
            if symbol != 0:
                prev = accs.get(col, ())
                accs[col] = space.canonical(prev + (symbol - 1,))
            total: tuple[int, ...] = ()
            low: tuple[int, ...] = ()
            for c, ids in sorted(accs.items()):
                total = space.canonical(total + ids)
                if c <= N:
                    low = space.canonical(low + ids)
            if not space.nice_inclusion(total, low):
                left -= 1
                if left < 0:
                    return (state, (REJECT,))
            out = (N,) if count == 0 else ()
            return ((count + 1, accs, left), out)

        return DialogMachine((0, {}, allowance), step, f"advice({N},{allowance})")

    _, word = nd_advice_run(branch, stream, fuel)
    if not word:
        raise UnsupportedSpace("advice run committed no output")
    return word[0]


# === union right-inverse and compacts ===

def finite_union_right_inverse(u: OpenSet, w: NoetherianWitness) -> NablaValue:
    """A finite word of direct basis indices whose union equals U, read off
    U's own code at its stabilization point.

    The prefix union at each position is fixed once read, and the total only
    grows, so the stabilization index is scanned monotonically: amortized
    constant work per code position."""
    _require_coded(u)
    space = w.space

    def recipe(meter: FuelMeter):
        syms: list[int | None] = []
        prefix: list[tuple[int, ...]] = []
        total: tuple[int, ...] = ()
        nhat = 0
        last: Word | None = None
        for r in itertools.count():
            meter.spend(1)
            idx = u.index_at(r, meter)
            syms.append(idx)
            prev = prefix[-1] if prefix else ()
            if idx is not None:
                prev = space.canonical(prev + (idx,))
                total = space.canonical(total + (idx,))
            prefix.append(prev)
            moved = False
            while nhat < r and not space.nice_inclusion(total, prefix[nhat]):
                nhat += 1
                moved = True
            if moved or last is None or (idx is not None and r <= nhat):
                word = tuple(s for s in syms[: nhat + 1] if s is not None)
                if last is None or word != last:
                    last = word
                    yield word

    return NablaValue(Process(recipe, "right-inverse"))


def open_to_compact_nabla(u: OpenSet, w: NoetherianWitness) -> NablaValue:
    """Guesses the saturated compact carried by U's finite reduction; over
    wqo Alexandrov witnesses the hook routes through base extraction."""
    if w.o2c_hook is not None:
        return w.o2c_hook(u)
    inv = finite_union_right_inverse(u, w)
    space = w.space

    def recipe(meter: FuelMeter):
        last_key: tuple[int, ...] | None = None
        for budget in itertools.count():
            meter.spend(1)
            obs = inv.observe(budget)
            if not obs.has_guess:
                continue
            key = space.canonical(obs.guess)
            if last_key is None or key != last_key:
                last_key = key
                yield FiniteUnionCompact(space, key)

    return NablaValue(Process(recipe, "o2c"))


# === Kleene-Brouwer order ===

def kb_leq(v: Word, u: Word) -> bool:
    """v comes before u when u is a prefix of v (deeper first) or v is
    smaller at the first disagreement. The empty word is maximal."""
    n = 0
    while n < len(v) and n < len(u):
        if v[n] != u[n]:
            return v[n] < u[n]
        n += 1
    return len(u) <= len(v)


def _kb_sorted(words) -> list[Word]:
    return sorted(words, key=functools.cmp_to_key(lambda a, b: -1 if kb_leq(a, b) else 1))


def kb_minimum(words) -> Word:
    """Least word under the Kleene-Brouwer order; empty input gives the
    maximal element (the empty word)."""
    best: Word | None = None
    for w in words:
        if best is None or (kb_leq(w, best) and w != best):
            best = w
    return () if best is None else best


def kb_min(members, words: Sequence[Word]) -> NablaValue:
    """Limit-least word (Kleene-Brouwer) among those whose limit-decidable
    membership holds; guesses track the currently-believed member set."""
    words = list(words)
    if isinstance(members, Mapping):
        vals = [members[w] for w in words]
    else:
        vals = [members(w) for w in words]

    def recipe(meter: FuelMeter):
        last: Word | None = None
        for budget in itertools.count():
            meter.spend(1)
            alive = [
                w
                for w, v in zip(words, vals)
                if (lambda o: o.has_guess and bool(o.guess))(v.observe(budget))
            ]
            guess = kb_minimum(alive)
            if last is None or guess != last:
                last = guess
                yield guess

    return NablaValue(Process(recipe, "kb-min"))


# === normalization to constructible form ===

def _cylinder(space: Space, word: Word, cache: dict) -> tuple[int, ...]:
    if word not in cache:
        img = space.cylinder_image(word)
        if img is None:
            raise UnsupportedSpace(f"{space.label} has no cylinder-image rule")
        cache[word] = space.canonical(img)
    return cache[word]


def _trigger_words(table: MindchangeTable, cap: int, meter: FuelMeter) -> list[Word]:
    """Trigger words with length and symbols at most cap, charging the meter
    for every tree node visited."""
    if table.entries is not None:
        meter.spend(1 + len(table.entries))
        return [
            e
            for e in table.entries
            if len(e) <= cap and all(s <= cap for s in e)
        ]
    found: list[Word] = []
    frontier: list[Word] = [()]
    length = 0
    while frontier and length <= cap:
        nxt: list[Word] = []
        for word in frontier:
            meter.spend(1)
            if table.member(word):
                found.append(word)
            if length < cap:
                for s in table.successors(word):
                    if s <= cap:
                        nxt.append(word + (s,))
        frontier = nxt
        length += 1
    return found


def delta02_to_constructible(a: Delta02Set, w: NoetherianWitness) -> NablaValue:
    """Normalizes a table-form limit-decidable set to a finite union of
    differences of coded opens.

    Round r enumerates the trigger words of length and symbols at most r,
    sorts them by the Kleene-Brouwer order, forms the running cylinder-image
    unions, walks the chain of strict union growth until the union is full,
    and emits the difference pairs at chain steps whose trigger label is 1.
    The emitted description is canonical, so procrastinating trigger variants
    collapse and the guess stabilizes over a Noetherian witness."""
    if a.table is None:
        raise UnsupportedSpace("normalization needs a table-form set")
    table = a.table
    space = w.space
    full = space.canonical(space.full_indices)
    cyl_cache: dict = {}

    def recipe(meter: FuelMeter):
        last_key = None
        for cap in itertools.count(1):
            words = _kb_sorted(_trigger_words(table, cap, meter))
            if not words:
                if last_key != ():
                    last_key = ()
                    yield ConstructibleSet(space, ())
                continue
            meter.spend(len(words))
            unions: list[tuple[int, ...]] = []
            running: tuple[int, ...] = ()
            for v in words:
                running = space.canonical(running + _cylinder(space, v, cyl_cache))
                unions.append(running)
            pairs: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
            prev: tuple[int, ...] = ()
            k = 0
            while True:
                if table.limit_label(words[k]):
                    pairs.append((unions[k], prev))
                prev = unions[k]
                if space.nice_inclusion(full, unions[k]):
                    break
                nxt = None
                for j in range(k + 1, len(words)):
                    if unions[j] != unions[k]:
                        nxt = j
                        break
                if nxt is None:
                    break
                k = nxt
            key = tuple(pairs)
            if key != last_key:
                last_key = key
                yield ConstructibleSet(space, pairs)

    return NablaValue(Process(recipe, "normalize"))


def constructible_is_full(c: ConstructibleSet, w: NoetherianWitness) -> NablaValue:
    """Limit-decides whether a constructible set is the whole space by the
    exponential battery of inclusion conditions: for every subset I of the
    pair indices, the opens outside I must meet inside the opens chosen by I.
    Each condition runs through the open-to-compact conversion and the
    compact inclusion semidecider; the conjunction is a finite meet."""
    space = w.space
    pairs = c.pairs
    conditions: list[NablaValue] = []
    for pick in itertools.product((False, True), repeat=len(pairs)):
        lhs: tuple[int, ...] = space.canonical(space.full_indices)
        rhs: list[int] = []
        for chosen, pr in zip(pick, pairs):
            if chosen:
                rhs.extend(pr.u_indices)
            else:
                lhs = union_meet(space, lhs, pr.v_indices)
        conditions.append(_inclusion_condition(lhs, space.canonical(rhs), w))
    return nabla_all(conditions)


def _inclusion_condition(lhs: tuple[int, ...], rhs: tuple[int, ...], w: NoetherianWitness) -> NablaValue:
    space = w.space
    compact = open_to_compact_nabla(open_from_indices(space, lhs), w)
    rhs_open = open_from_indices(space, rhs)

    def recipe(meter: FuelMeter):
        last: int | None = None
        test = None
        seen = -1
        for budget in itertools.count():
            meter.spend(1)
            ko = compact.observe(budget)
            if not ko.has_guess:
                continue
            if ko.changes != seen:
                seen = ko.changes
                test = ko.guess.inclusion_test(rhs_open)
            guess = 1 if test.observe(budget).fired else 0
            if last is None or guess != last:
                last = guess
                yield guess

    return NablaValue(Process(recipe, "incl-cond"))


def nabla_is_full(a: Delta02Set, w: NoetherianWitness) -> NablaValue:
    """Fullness of a table-form limit-decidable set: normalize, then decide
    fullness of the current constructible guess."""
    norm = delta02_to_constructible(a, w)

    def recipe(meter: FuelMeter):
        monitors: dict = {}
        last: int | None = None
        for budget in itertools.count():
            meter.spend(1)
            no = norm.observe(budget)
            guess = 0
            if no.has_guess:
                key = no.guess.canonical_key()
                if key not in monitors:
                    monitors[key] = constructible_is_full(no.guess, w)
                fo = monitors[key].observe(budget)
                if fo.has_guess:
                    guess = 1 if fo.guess else 0
            if last is None or guess != last:
                last = guess
                yield guess

    return NablaValue(Process(recipe, "is-full"))


# === quantifier elimination ===

def _interleave(u: Word, q: Word) -> Word:
    out: list[int] = []
    for a, b in zip(u, q):
        out.append(a)
        out.append(b)
    return tuple(out)


def _slice_table(table: MindchangeTable, left: Space, q: Name) -> MindchangeTable:
    """Restriction of a product-space table to a fixed right-factor point:
    a table over left-factor words. The point's name is read unmetered; the
    driving process pays through its own rounds."""

    def lab(u: Word) -> int:
        qp = tuple(q.query(i) for i in range(len(u)))
        return table.limit_label(_interleave(u, qp))

    if isinstance(left, FiniteSpace) and table.entries is not None:
        # finite left factor: materialize the slice, labels settle within
        # half the longest entry
        depth = max((len(e) + 1) // 2 for e in table.entries) + 1 if table.entries else 1
        entries: dict[Word, int] = {(): lab(())}
        frontier: list[Word] = [()]
        for _ in range(depth):
            nxt: list[Word] = []
            for word in frontier:
                for s in range(left.size):
                    ext = word + (s,)
                    if lab(ext) != lab(word):
                        entries[ext] = lab(ext)
                    nxt.append(ext)
            frontier = nxt
        return MindchangeTable(entries, label="slice")

    def member(u: Word) -> bool:
        if u == ():
            return True
        return lab(u) != lab(u[:-1])

    def succ(u: Word):
        return left.word_symbols(u, _SLICE_SYMBOLS)

    return MindchangeTable(member_fn=member, label_fn=lab, successors=succ, label="slice")


def forall_nabla(r: Delta02Set, w: NoetherianWitness) -> Delta02Set:
    """Universal quantification over the witnessed left factor: the result
    holds at y iff the y-slice is all of the left factor."""
    space = r.space
    if not isinstance(space, ProductSpace):
        raise UnsupportedSpace("quantification needs a product-space relation")
    if r.table is None:
        raise UnsupportedSpace("quantification needs a table-form relation")
    if w.space != space.left:
        raise UnsupportedSpace("witness must certify the left factor")
    table = r.table

    def membership(q: Name) -> NablaValue:
        sliced = Delta02Set(space.left, table=_slice_table(table, space.left, q))
        return nabla_is_full(sliced, w)

    return Delta02Set(space.right, membership_fn=membership, label=f"forall({r.describe()})")


def exists_nabla(r: Delta02Set, w: NoetherianWitness) -> Delta02Set:
    """Existential quantification by duality: not forall not."""
    if r.table is None:
        raise UnsupportedSpace("quantification needs a table-form relation")
    negated = Delta02Set(r.space, table=table_not(r.table), label=f"~({r.describe()})")
    inner = forall_nabla(negated, w)

    def membership(q: Name) -> NablaValue:
        return nabla_not(inner.member(q))

    return Delta02Set(inner.space, membership_fn=membership, label=f"exists({r.describe()})")


# === finite subcovers ===

def extract_finite_subcover(pieces: Sequence[Delta02Set], w: NoetherianWitness) -> NablaValue:
    """Index set of a finite subcover, searched over candidate index sets in
    (size, lex) order; the guess is the first candidate currently believed
    to union to the whole space."""
    pieces = list(pieces)
    if any(p.table is None for p in pieces):
        raise UnsupportedSpace("subcover extraction needs table-form pieces")
    candidates = [
        tuple(c)
        for sz in range(1, len(pieces) + 1)
        for c in combinations(range(len(pieces)), sz)
    ]
    space = w.space
    monitors: dict[tuple[int, ...], NablaValue] = {}

    def monitor(fset: tuple[int, ...]) -> NablaValue:
        if fset not in monitors:
            merged = pieces[fset[0]].table
            for i in fset[1:]:
                merged = table_or(merged, pieces[i].table)
            monitors[fset] = nabla_is_full(Delta02Set(space, table=merged), w)
        return monitors[fset]

    def recipe(meter: FuelMeter):
        last: tuple[int, ...] | None = None
        for budget in itertools.count():
            meter.spend(1)
            guess: tuple[int, ...] = ()
            for fset in candidates:
                obs = monitor(fset).observe(budget)
                if obs.has_guess and obs.guess:
                    guess = fset
                    break
            if last is None or guess != last:
                last = guess
                yield guess

    return NablaValue(Process(recipe, "subcover"))
