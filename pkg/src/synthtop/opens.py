"""Hyperspace layer: open, closed, compact, overt, limit-decidable, and
constructible subsets of a represented space, with the membership and
quantifier operations between them.

Coded opens carry a stream of basis indices where symbol 0 is padding and
symbol k+1 denotes basis index k. User-facing finite codes and the text
format list indices directly; the constructors do the shifting.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .fuel import FuelMeter
from .names import Name, pair_names
from .spaces import Space, UnsupportedSpace
from .truth import (
    MindchangeTable,
    NablaValue,
    Process,
    SierpValue,
    nabla_and,
    nabla_not,
    nabla_or,
    sierp_and,
    sierp_or,
    sierp_to_nabla,
)


class OpenSet:
    """An open subset, either coded (basis-index stream) or abstract
    (membership semidecider only)."""

    def __init__(
        self,
        space: Space,
        code: Name | None = None,
        membership_fn: Callable[[Name], SierpValue] | None = None,
        label: str = "",
    ) -> None:
        if code is None and membership_fn is None:
            raise ValueError("open set needs a code or a membership rule")
        self.space = space
        self.code = code
        self.membership_fn = membership_fn
        self.label = label

    @property
    def coded(self) -> bool:
        return self.code is not None

    def index_at(self, pos: int, meter: FuelMeter | None = None) -> int | None:
        """Decode one code position; None on padding."""
        symbol = self.code.query(pos, meter)
        return None if symbol == 0 else symbol - 1

    def member(self, p: Name) -> SierpValue:
        if self.code is None:
            return self.membership_fn(p)
        space, code = self.space, self.code

        def piece(k: int) -> SierpValue:
            def recipe(meter: FuelMeter):
                symbol = code.query(k, meter)
                if symbol == 0:
                    return
                inner = space.basic_member(symbol - 1, p)
                for budget in itertools.count():
                    meter.spend(1)
                    obs = inner.observe(budget)
                    if obs.fired:
                        yield obs.payload
                        return

            return SierpValue(Process(recipe, "piece"))

        return sierp_or(piece, countable=True)

    def describe(self) -> str:
        if self.label:
            return self.label
        if self.code is not None:
            return f"open[{self.space.label}]"
        return f"open[{self.space.label}, abstract]"


def open_from_indices(space: Space, indices: Sequence[int], label: str = "") -> OpenSet:
    """Finite union of basics, given by direct basis indices."""
    shifted = tuple(i + 1 for i in indices)
    name = Name.from_values(shifted, tail=0, label=f"code{tuple(indices)}")
    if not label:
        label = "(" + " u ".join(space.describe_basic(i) for i in indices) + ")" if indices else "EMPTY"
    return OpenSet(space, code=name, label=label)


def open_from_stream(space: Space, code: Name, label: str = "") -> OpenSet:
    return OpenSet(space, code=code, label=label)


def open_arith(space: Space, start: int, step: int, label: str = "") -> OpenSet:
    """Coded open whose stream lists indices start, start+step, ..."""
    name = Name.from_fn(lambda i: start + i * step + 1, f"arith {start} {step}")
    return OpenSet(space, code=name, label=label or f"arith({start},{step})")


def open_empty(space: Space) -> OpenSet:
    return open_from_indices(space, (), label="EMPTY")


def open_full(space: Space) -> OpenSet:
    if space.full_indices is None:
        raise UnsupportedSpace(f"{space.label} has no finite full cover")
    return open_from_indices(space, space.full_indices, label="FULL")


def open_from_tokens(space: Space, tokens: Sequence[str]) -> OpenSet:
    """Text form: whitespace-separated direct indices ending in '.',
    or 'arith a b' for the infinite code a, a+b, a+2b, ..."""
    tokens = list(tokens)
    if not tokens:
        raise ValueError("empty open code")
    if tokens[0] == "arith":
        if len(tokens) != 3:
            raise ValueError("arith needs exactly two arguments")
        return open_arith(space, int(tokens[1]), int(tokens[2]))
    if tokens[-1] != ".":
        raise ValueError("finite open code must end in '.'")
    return open_from_indices(space, tuple(int(t) for t in tokens[:-1]))


def serialize_open_tokens(indices: Sequence[int]) -> str:
    return " ".join(str(i) for i in indices) + " ."


def union_countable(opens, label: str = "") -> OpenSet:
    """Union of a finite list or countable family (callable on k) of opens
    over one space. Coded inputs give a coded union."""
    if callable(opens):
        probe = opens(0)
        space = probe.space

        def fam(k: int) -> OpenSet:
            return opens(k) if k else probe

        def fn(z: int, meter: FuelMeter | None) -> int:
            # diagonal schedule: position <k,i> carries family member k's code at i
            from .names import cantor_unpair

            k, i = cantor_unpair(z)
            u = fam(k)
            if u.code is None:
                raise UnsupportedSpace("countable union needs coded members")
            return u.code.query(i, meter)

        return OpenSet(space, code=Name(fn, label="union-code", recompute=True), label=label or "union")

    opens = list(opens)
    if not opens:
        raise ValueError("union of nothing: supply the space via open_empty")
    space = opens[0].space
    if all(u.coded for u in opens):
        n = len(opens)

        def fn(z: int, meter: FuelMeter | None) -> int:
            return opens[z % n].code.query(z // n, meter)

        return OpenSet(space, code=Name(fn, label="union-code", recompute=True), label=label or "union")
    members = [u.member for u in opens]
    return OpenSet(
        space,
        membership_fn=lambda p: sierp_or([m(p) for m in members]),
        label=label or "union",
    )


def intersect_binary(u: OpenSet, v: OpenSet, label: str = "") -> OpenSet:
    """Binary intersection; coded when both inputs are coded."""
    space = u.space
    if u.coded and v.coded:
        from .names import cantor_unpair

        def fn(z: int, meter: FuelMeter | None) -> int:
            # position <k,d>: the k-th pairwise meet found scanning both
            # codes to depth d. The meet list at depth d+1 extends the one
            # at depth d, so every piece appears at infinitely many
            # positions and the stream is consistent.
            k, depth = cantor_unpair(z)
            seen_u: list[int] = []
            seen_v: list[int] = []
            queue: list[int] = []
            for t in range(depth + 1):
                iu = u.index_at(t, meter)
                iv = v.index_at(t, meter)
                if iu is not None:
                    for j in seen_v:
                        queue.extend(space.basic_meet(iu, j))
                if iu is not None and iv is not None:
                    queue.extend(space.basic_meet(iu, iv))
                if iv is not None:
                    for i in seen_u:
                        queue.extend(space.basic_meet(i, iv))
                if iu is not None:
                    seen_u.append(iu)
                if iv is not None:
                    seen_v.append(iv)
                if len(queue) > k:
                    return queue[k] + 1
            return 0

        return OpenSet(space, code=Name(fn, label="meet-code", recompute=True), label=label or "meet")
    return OpenSet(
        space,
        membership_fn=lambda p: sierp_and(u.member(p), v.member(p)),
        label=label or "meet",
    )


def preimage(machine, u: OpenSet, domain: Space, label: str = "") -> OpenSet:
    """Preimage of an open under the continuous map realized by `machine`."""
    from .names import apply_machine

    return OpenSet(
        domain,
        membership_fn=lambda p: u.member(apply_machine(machine, p)),
        label=label or f"preimage({u.describe()})",
    )


@dataclass(frozen=True)
class ClosedSet:
    """Complement of an open, carried as the open plus the flag."""

    complement: OpenSet
    label: str = ""

    @property
    def space(self) -> Space:
        return self.complement.space


class CompactSet:
    """A compact subset given by its universal-quantifier semidecider:
    inclusion_test(U) fires iff the set is contained in U."""

    def __init__(self, space: Space, inclusion_fn: Callable[[OpenSet], SierpValue], label: str = "") -> None:
        self.space = space
        self._inclusion_fn = inclusion_fn
        self.label = label

    def inclusion_test(self, u: OpenSet) -> SierpValue:
        return self._inclusion_fn(u)

    def describe(self) -> str:
        return self.label or f"compact[{self.space.label}]"


class PointSetCompact(CompactSet):
    """Finite point set; inclusion is the finite conjunction of memberships.
    Works against abstract opens, so this is the compact of choice for
    universal quantification."""

    def __init__(self, space: Space, points: Sequence, label: str = "") -> None:
        self.points = tuple(points)
        names = [space.encode(x) for x in self.points]
        super().__init__(
            space,
            lambda u: sierp_and([u.member(nm) for nm in names]),
            label or "{" + ",".join(space.describe_point(x) for x in self.points) + "}",
        )


class FiniteUnionCompact(CompactSet):
    """Saturation of a finite union of basics over a Noetherian nice basis;
    inclusion against a coded open is decided on accumulated prefixes."""

    def __init__(self, space: Space, indices: Sequence[int], label: str = "") -> None:
        self.indices = space.canonical(indices)
        super().__init__(space, self._test, label or f"sat{self.indices}")

    def _test(self, u: OpenSet) -> SierpValue:
        if u.code is None:
            raise UnsupportedSpace("finite-union compact needs a coded open")
        space, indices = self.space, self.indices

        def recipe(meter: FuelMeter):
            acc: set[int] = set()
            if space.nice_inclusion(indices, ()):
                yield ()
                return
            for t in itertools.count():
                idx = u.index_at(t, meter)
                if idx is not None:
                    acc.add(idx)
                    if space.nice_inclusion(indices, tuple(acc)):
                        yield tuple(sorted(acc))
                        return

        return SierpValue(Process(recipe, "incl"))


class OvertSet:
    """An overt subset given by its existential-quantifier semidecider:
    meets_test(U) fires iff the set meets U."""

    def __init__(self, space: Space, meets_fn: Callable[[OpenSet], SierpValue], label: str = "") -> None:
        self.space = space
        self._meets_fn = meets_fn
        self.label = label

    def meets_test(self, u: OpenSet) -> SierpValue:
        return self._meets_fn(u)


class DenseSequenceOvert(OvertSet):
    """Overtness from a dense sequence: meets U iff some listed point lies
    in U, searched on the diagonal."""

    def __init__(self, space: Space, points: Callable[[int], object] | Sequence, label: str = "") -> None:
        if callable(points):
            point_at = points
            finite = None
        else:
            pts = list(points)
            finite = len(pts)
            point_at = lambda k: pts[k]
        self.point_at = point_at
        self.finite = finite

        def meets(u: OpenSet) -> SierpValue:
            if finite is not None:
                return sierp_or([u.member(space.encode(point_at(k))) for k in range(finite)])

            def piece(k: int) -> SierpValue:
                x = point_at(k)
                if x is None:
                    return SierpValue.never()
                return u.member(space.encode(x))

            return sierp_or(piece, countable=True)

        super().__init__(space, meets, label)


def overt_space(space: Space) -> OvertSet:
    if space.dense_point(0) is None:
        raise UnsupportedSpace(f"{space.label} has no registered dense sequence")
    return DenseSequenceOvert(space, space.dense_point, label=f"overt[{space.label}]")


class Delta02Set:
    """A subset whose membership is limit-decidable: either a mindchange
    table over name prefixes or an abstract rule Name -> NablaValue."""

    def __init__(
        self,
        space: Space,
        table: MindchangeTable | None = None,
        membership_fn: Callable[[Name], NablaValue] | None = None,
        label: str = "",
    ) -> None:
        if table is None and membership_fn is None:
            raise ValueError("limit-decidable set needs a table or a rule")
        self.space = space
        self.table = table
        self.membership_fn = membership_fn
        self.label = label

    def member(self, p: Name) -> NablaValue:
        if self.table is not None:
            return self.table.decide(p)
        return self.membership_fn(p)

    def describe(self) -> str:
        return self.label or f"d02[{self.space.label}]"


def delta02_member(p: Name, a: Delta02Set) -> NablaValue:
    return a.member(p)


def delta02_from_open_indices(space: Space, indices: Sequence[int], label: str = "") -> Delta02Set:
    """The finite union of basics as a limit-decidable set."""
    u = open_from_indices(space, indices)
    return Delta02Set(
        space,
        membership_fn=lambda p: sierp_to_nabla(u.member(p)),
        label=label or u.describe(),
    )


@dataclass(frozen=True)
class ConstructiblePair:
    """One difference U minus V, both finite unions of basics."""

    u_indices: tuple[int, ...]
    v_indices: tuple[int, ...]


class ConstructibleSet:
    """Finite union of differences of finite-union opens."""

    def __init__(self, space: Space, pairs: Sequence[ConstructiblePair | tuple], label: str = "") -> None:
        norm = []
        for pr in pairs:
            if isinstance(pr, ConstructiblePair):
                norm.append(ConstructiblePair(space.canonical(pr.u_indices), space.canonical(pr.v_indices)))
            else:
                u, v = pr
                norm.append(ConstructiblePair(space.canonical(u), space.canonical(v)))
        self.space = space
        self.pairs = tuple(norm)
        self.label = label

    def canonical_key(self) -> tuple:
        return tuple((pr.u_indices, pr.v_indices) for pr in self.pairs)

    def member(self, p: Name) -> NablaValue:
        space = self.space
        parts = []
        for pr in self.pairs:
            in_u = sierp_to_nabla(sierp_or([space.basic_member(i, p) for i in pr.u_indices]))
            out_v = nabla_not(
                sierp_to_nabla(sierp_or([space.basic_member(j, p) for j in pr.v_indices]))
            )
            parts.append(nabla_and(in_u, out_v))
        if not parts:
            return NablaValue.constant(0)
        return nabla_or(parts)

    def describe(self) -> str:
        if self.label:
            return self.label
        bits = []
        for pr in self.pairs:
            us = "u".join(self.space.describe_basic(i) for i in pr.u_indices) or "EMPTY"
            vs = "u".join(self.space.describe_basic(j) for j in pr.v_indices) or "EMPTY"
            bits.append(f"({us})-({vs})")
        return " | ".join(bits) or "EMPTY"


def constructible_member(p: Name, c: ConstructibleSet) -> NablaValue:
    return c.member(p)


def is_full_open(u: OpenSet) -> SierpValue:
    """Fires iff U is the whole space; needs compactness test points."""
    pts = u.space.compact_test_points
    if pts is None:
        raise UnsupportedSpace(f"{u.space.label} is not registered computably compact")
    compact = PointSetCompact(u.space, pts, label="tests")
    return compact.inclusion_test(u)


def _slice_open(r: OpenSet, q: Name) -> OpenSet:
    """{x : (x, y) in R} for the point named by q, as an abstract open."""
    left = r.space.left

    return OpenSet(
        left,
        membership_fn=lambda p: r.member(pair_names(p, q)),
        label="slice",
    )


def exists_open(r: OpenSet, a: OvertSet, label: str = "") -> OpenSet:
    """{y : A meets the y-slice of R}; R lives over a product space whose
    left factor carries A."""
    right = r.space.right
    return OpenSet(
        right,
        membership_fn=lambda q: a.meets_test(_slice_open(r, q)),
        label=label or "exists-image",
    )


def forall_open(r: OpenSet, k: CompactSet, label: str = "") -> OpenSet:
    """{y : K sits inside the y-slice of R}."""
    right = r.space.right
    return OpenSet(
        right,
        membership_fn=lambda q: k.inclusion_test(_slice_open(r, q)),
        label=label or "forall-image",
    )
