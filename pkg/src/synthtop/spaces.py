"""Represented spaces and their effective bases.

Each space fixes a naming convention on Baire space, a countable basis with
decidable finite-union inclusion, and the effective data consumed by the
hyperspace and Noetherian layers: semideciders for basic membership, meets,
canonical forms, fullness witnesses, compactness test points, dense
enumerations, and cylinder-image opens.

Point conventions:
  finite k      p(0) is the point.
  nat           p(0) is the point.
  nat-below     p nondecreasing; the point is the eventual value, or infinity
                (barred variant only) when unbounded.
  nat-above     p is shift-coded (0 means infinity, s+1 means s), nonincreasing
                in value; the point is the eventual value.
  alexandrov    the range of p is exactly the down-set of the point.
  product       even positions name the left factor, odd the right.
  coproduct     p(0) is the tag, the rest names the summand.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from .fuel import FuelMeter
from .names import Name, Word, cantor_pair, cantor_unpair, pair_names, unpair_names
from .truth import Process, SierpValue, sierp_and

INF = float("inf")


class UnsupportedSpace(Exception):
    pass


def _scan_sierp(p: Name, hit) -> SierpValue:
    """Fire at the first position i with hit(i, p(i)); payload = i."""

    def recipe(meter: FuelMeter):
        for i in itertools.count():
            value = p.query(i, meter)
            if hit(i, value):
                yield i
                return

    return SierpValue(Process(recipe, "scan"))


class Space:
    """Base class; subclasses fill in the per-space data."""

    label: str = "?"
    full_indices: tuple[int, ...] | None = None
    compact_test_points: tuple | None = None

    # --- naming ---

    def encode(self, x) -> Name:
        raise NotImplementedError

    def window_points(self, window: int) -> list:
        raise NotImplementedError

    def describe_point(self, x) -> str:
        return "inf" if x == INF else str(x)

    # --- basis ---

    def basis_sample(self, window: int) -> list[int]:
        raise NotImplementedError

    def basic_member(self, index: int, p: Name) -> SierpValue:
        raise NotImplementedError

    def elem_subset(self, i: int, j: int) -> bool:
        """B_i subset of B_j, decidable. Empty basics are minimal."""
        raise NotImplementedError

    def basic_meet(self, i: int, j: int) -> tuple[int, ...]:
        """Indices whose union is B_i intersect B_j."""
        raise NotImplementedError

    def basic_empty(self, i: int) -> bool:
        return False

    def describe_basic(self, i: int) -> str:
        return f"B{i}"

    # --- derived basis machinery ---

    def canonical(self, indices: Iterable[int]) -> tuple[int, ...]:
        """Reduced finite union: drop empties and dominated members, keep the
        least representative of mutually-equivalent ones."""
        items = sorted(set(indices))
        keep = []
        for i in items:
            if self.basic_empty(i):
                continue
            dominated = False
            for j in items:
                if j == i or self.basic_empty(j):
                    continue
                if self._subset(i, j) and (not self._subset(j, i) or j < i):
                    dominated = True
                    break
            if not dominated:
                keep.append(i)
        return tuple(keep)

    def _subset(self, i: int, j: int) -> bool:
        if self.basic_empty(i):
            return True
        if self.basic_empty(j):
            return False
        return self.elem_subset(i, j)

    def nice_inclusion(self, F: Sequence[int], G: Sequence[int]) -> bool:
        """Finite-union inclusion. All registered bases are union-reducible
        (chains or principal up-sets), so the forall-exists rule is exact."""
        G = list(G)
        return all(
            any(self._subset(f, g) for g in G)
            for f in F if not self.basic_empty(f)
        )

    # --- registry data for the engine ---

    def dense_point(self, k: int):
        """k-th element of a dense sequence (overtness witness), or None."""
        return None

    def cylinder_image(self, word: Word) -> tuple[int, ...] | None:
        """Basis indices whose union is the open image of the name-cylinder
        over `word`; None when the space has no registered rule."""
        return None

    def word_symbols(self, prefix: Word, cap: int) -> list[int]:
        """Symbols extending a valid name prefix, bounded by cap."""
        raise NotImplementedError

    def __repr__(self) -> str:  # pragma: no cover
        return f"<Space {self.label}>"

    def __eq__(self, other) -> bool:
        return isinstance(other, Space) and self.label == other.label

    def __hash__(self) -> int:
        return hash(self.label)


class FiniteSpace(Space):
    def __init__(self, size: int) -> None:
        if size < 1:
            raise ValueError("finite space needs at least one point")
        self.size = size
        self.label = f"finite:{size}"
        self.full_indices = tuple(range(size))
        self.compact_test_points = tuple(range(size))

    def encode(self, x) -> Name:
        if not (0 <= x < self.size):
            raise ValueError(f"{x} outside finite:{self.size}")
        return Name.constant(x, f"pt {x}")

    def window_points(self, window: int) -> list:
        return list(range(self.size))

    def basis_sample(self, window: int) -> list[int]:
        return list(range(self.size))

    def basic_member(self, index: int, p: Name) -> SierpValue:
        return _scan_sierp(p, lambda i, v: i == 0 and v == index)

    def elem_subset(self, i: int, j: int) -> bool:
        return i == j

    def basic_meet(self, i: int, j: int) -> tuple[int, ...]:
        return (i,) if i == j else ()

    def basic_empty(self, i: int) -> bool:
        return not (0 <= i < self.size)

    def describe_basic(self, i: int) -> str:
        return f"{{{i}}}"

    def dense_point(self, k: int):
        return k % self.size

    def cylinder_image(self, word: Word) -> tuple[int, ...]:
        if word == ():
            return self.full_indices
        return (word[0],) if 0 <= word[0] < self.size else ()

    def word_symbols(self, prefix: Word, cap: int) -> list[int]:
        return list(range(min(self.size, cap + 1)))


class NatSpace(Space):
    """Discrete naturals; not compact, not Noetherian."""

    label = "nat"

    def encode(self, x) -> Name:
        return Name.constant(x, f"pt {x}")

    def window_points(self, window: int) -> list:
        return list(range(window))

    def basis_sample(self, window: int) -> list[int]:
        return list(range(window))

    def basic_member(self, index: int, p: Name) -> SierpValue:
        return _scan_sierp(p, lambda i, v: i == 0 and v == index)

    def elem_subset(self, i: int, j: int) -> bool:
        return i == j

    def basic_meet(self, i: int, j: int) -> tuple[int, ...]:
        return (i,) if i == j else ()

    def describe_basic(self, i: int) -> str:
        return f"{{{i}}}"

    def dense_point(self, k: int):
        return k

    def word_symbols(self, prefix: Word, cap: int) -> list[int]:
        return list(range(cap + 1))


class NatBelow(Space):
    """Naturals under the lower topology: basics L_n = {x : x >= n}.

    Ascending open chains stabilize (the open lattice is a reversed chain),
    so both variants are Noetherian; {0} is a compactness test point.
    """

    def __init__(self, with_inf: bool) -> None:
        self.with_inf = with_inf
        self.label = "nbar-less" if with_inf else "nless"
        self.full_indices = (0,)
        self.compact_test_points = (0,)

    def encode(self, x) -> Name:
        if x == INF:
            if not self.with_inf:
                raise ValueError("infinity not a point of nless")
            return Name.from_fn(lambda i: i, "pt inf")
        return Name.constant(x, f"pt {x}")

    def window_points(self, window: int) -> list:
        pts: list = list(range(window))
        if self.with_inf:
            pts.append(INF)
        return pts

    def basis_sample(self, window: int) -> list[int]:
        return list(range(window))

    def basic_member(self, index: int, p: Name) -> SierpValue:
        return _scan_sierp(p, lambda i, v: v >= index)

    def elem_subset(self, i: int, j: int) -> bool:
        return i >= j

    def basic_meet(self, i: int, j: int) -> tuple[int, ...]:
        return (max(i, j),)

    def describe_basic(self, i: int) -> str:
        return f"L{i}"

    def dense_point(self, k: int):
        return k

    def cylinder_image(self, word: Word) -> tuple[int, ...]:
        if word == ():
            return (0,)
        if any(word[i] > word[i + 1] for i in range(len(word) - 1)):
            return ()
        return (max(word),)

    def word_symbols(self, prefix: Word, cap: int) -> list[int]:
        lo = prefix[-1] if prefix else 0
        return list(range(lo, cap + 1))


class NatAbove(Space):
    """Naturals under the upper topology: basics {x : x < n}, plus the
    naturals part and the whole space. Indices: 0 = full, 1 = the naturals,
    n+2 = {x < n} (so index 2 is empty). Not Noetherian."""

    def __init__(self, with_inf: bool) -> None:
        self.with_inf = with_inf
        self.label = "nbar-gtr" if with_inf else "ngtr"
        self.full_indices = (0,)
        self.compact_test_points = (INF,) if with_inf else None

    def encode(self, x) -> Name:
        if x == INF:
            if not self.with_inf:
                raise ValueError("infinity not a point of ngtr")
            return Name.constant(0, "pt inf")
        return Name.constant(x + 1, f"pt {x}")

    def window_points(self, window: int) -> list:
        pts: list = list(range(window))
        if self.with_inf:
            pts.append(INF)
        return pts

    def basis_sample(self, window: int) -> list[int]:
        return [0, 1] + [n + 2 for n in range(window)]

    def basic_member(self, index: int, p: Name) -> SierpValue:
        if index == 0:
            return SierpValue.true_after(1)
        if index == 1:
            return _scan_sierp(p, lambda i, v: v >= 1)
        bound = index - 2
        return _scan_sierp(p, lambda i, v: v >= 1 and v - 1 < bound)

    def _key(self, i: int) -> tuple[int, int]:
        if i == 0:
            return (2, 0) if self.with_inf else (1, 0)
        if i == 1:
            return (1, 0)
        return (0, i - 2)

    def elem_subset(self, i: int, j: int) -> bool:
        ki, kj = self._key(i), self._key(j)
        if ki[0] != kj[0]:
            return ki[0] < kj[0]
        return ki[1] <= kj[1]

    def basic_meet(self, i: int, j: int) -> tuple[int, ...]:
        return (i,) if self.elem_subset(i, j) else (j,)

    def basic_empty(self, i: int) -> bool:
        return i == 2

    def describe_basic(self, i: int) -> str:
        if i == 0:
            return "FULL"
        if i == 1:
            return "N"
        return f"{{<{i - 2}}}"

    def dense_point(self, k: int):
        return k

    def cylinder_image(self, word: Word) -> tuple[int, ...]:
        best = None
        prev = None
        for s in word:
            if prev is not None and prev >= 1 and (s == 0 or s > prev):
                return ()
            if s >= 1:
                best = s - 1
            prev = s
        if best is None:
            return (0,)
        return (best + 3,)  # {x <= best} = {x < best+1}

    def word_symbols(self, prefix: Word, cap: int) -> list[int]:
        last = None
        for s in prefix:
            if s >= 1:
                last = s
        if last is None:
            return list(range(cap + 1))
        return list(range(1, min(last, cap) + 1))


class AlexandrovSpace(Space):
    """Av over a decidable quasiorder on naturals; basics are principal
    up-sets indexed by their generator. The order object must provide leq,
    carrier_window, downset, join_generators, minimal_elements,
    enumerate_carrier, describe_element, and a label."""

    def __init__(self, order) -> None:
        self.order = order
        self.label = f"av:{order.label}"
        mins = order.minimal_elements()
        self.full_indices = tuple(mins) if mins is not None else None
        self.compact_test_points = (
            tuple(mins) if (mins is not None and getattr(order, "wqo_asserted", False)) else None
        )

    def encode(self, x) -> Name:
        down = tuple(sorted(self.order.downset(x)))
        if not down:
            raise ValueError(f"{x} outside the order's carrier")
        return Name(lambda i, m: down[i % len(down)], label=f"pt {x}")

    def window_points(self, window: int) -> list:
        return list(self.order.carrier_window(window))

    def basis_sample(self, window: int) -> list[int]:
        return list(self.order.carrier_window(window))

    def basic_member(self, index: int, p: Name) -> SierpValue:
        leq = self.order.leq
        return _scan_sierp(p, lambda i, v: leq(index, v))

    def elem_subset(self, i: int, j: int) -> bool:
        return self.order.leq(j, i)

    def basic_meet(self, i: int, j: int) -> tuple[int, ...]:
        return tuple(self.order.join_generators(i, j))

    def describe_basic(self, i: int) -> str:
        return f"up{{{self.order.describe_element(i)}}}"

    def dense_point(self, k: int):
        return self.order.enumerate_carrier(k)

    def cylinder_image(self, word: Word) -> tuple[int, ...]:
        if self.full_indices is None:
            return None
        acc = self.full_indices
        for s in word:
            nxt: set[int] = set()
            for a in acc:
                nxt.update(self.basic_meet(a, s))
            acc = self.canonical(nxt)
            if not acc:
                return ()
        return acc

    def word_symbols(self, prefix: Word, cap: int) -> list[int]:
        return [g for g in self.order.carrier_window(cap + 1) if g <= cap]


class ProductSpace(Space):
    """Binary product; names interleave, basics are rectangles coded by the
    Cantor pairing of the component indices."""

    def __init__(self, left: Space, right: Space) -> None:
        self.left = left
        self.right = right
        self.label = f"prod({left.label},{right.label})"
        if left.full_indices is not None and right.full_indices is not None:
            self.full_indices = tuple(
                cantor_pair(i, j) for i in left.full_indices for j in right.full_indices
            )
        if left.compact_test_points is not None and right.compact_test_points is not None:
            self.compact_test_points = tuple(
                (a, b) for a in left.compact_test_points for b in right.compact_test_points
            )

    def encode(self, x) -> Name:
        a, b = x
        return pair_names(self.left.encode(a), self.right.encode(b))

    def window_points(self, window: int) -> list:
        side = max(2, int(window ** 0.5))
        return [
            (a, b)
            for a in self.left.window_points(side)
            for b in self.right.window_points(side)
        ]

    def basis_sample(self, window: int) -> list[int]:
        side = max(2, int(window ** 0.5))
        return [
            cantor_pair(i, j)
            for i in self.left.basis_sample(side)
            for j in self.right.basis_sample(side)
        ]

    def basic_member(self, index: int, p: Name) -> SierpValue:
        i, j = cantor_unpair(index)
        lname, rname = unpair_names(p)
        return sierp_and(self.left.basic_member(i, lname), self.right.basic_member(j, rname))

    def elem_subset(self, i: int, j: int) -> bool:
        ia, ib = cantor_unpair(i)
        ja, jb = cantor_unpair(j)
        return self.left._subset(ia, ja) and self.right._subset(ib, jb)

    def basic_meet(self, i: int, j: int) -> tuple[int, ...]:
        ia, ib = cantor_unpair(i)
        ja, jb = cantor_unpair(j)
        return tuple(
            cantor_pair(a, b)
            for a in self.left.basic_meet(ia, ja)
            for b in self.right.basic_meet(ib, jb)
        )

    def basic_empty(self, i: int) -> bool:
        a, b = cantor_unpair(i)
        return self.left.basic_empty(a) or self.right.basic_empty(b)

    def describe_basic(self, i: int) -> str:
        a, b = cantor_unpair(i)
        return f"{self.left.describe_basic(a)}x{self.right.describe_basic(b)}"

    def describe_point(self, x) -> str:
        a, b = x
        return f"({self.left.describe_point(a)},{self.right.describe_point(b)})"

    def dense_point(self, k: int):
        a, b = cantor_unpair(k)
        da = self.left.dense_point(a)
        db = self.right.dense_point(b)
        if da is None or db is None:
            return None
        return (da, db)

    def cylinder_image(self, word: Word) -> tuple[int, ...] | None:
        lword = word[0::2]
        rword = word[1::2]
        lcyl = self.left.cylinder_image(lword)
        rcyl = self.right.cylinder_image(rword)
        if lcyl is None or rcyl is None:
            return None
        return tuple(cantor_pair(a, b) for a in lcyl for b in rcyl)

    def word_symbols(self, prefix: Word, cap: int) -> list[int]:
        if len(prefix) % 2 == 0:
            return self.left.word_symbols(prefix[0::2], cap)
        return self.right.word_symbols(prefix[1::2], cap)


class CoproductSpace(Space):
    """Binary coproduct; points are (tag, x), names prefix the tag."""

    def __init__(self, left: Space, right: Space) -> None:
        self.left = left
        self.right = right
        self.label = f"sum({left.label},{right.label})"
        if left.full_indices is not None and right.full_indices is not None:
            self.full_indices = tuple(2 * i for i in left.full_indices) + tuple(
                2 * j + 1 for j in right.full_indices
            )
        if left.compact_test_points is not None and right.compact_test_points is not None:
            self.compact_test_points = tuple(
                (0, a) for a in left.compact_test_points
            ) + tuple((1, b) for b in right.compact_test_points)

    def _side(self, tag: int) -> Space:
        return self.left if tag == 0 else self.right

    def encode(self, x) -> Name:
        tag, val = x
        inner = self._side(tag).encode(val)
        return Name(lambda i, m: tag if i == 0 else inner.query(i - 1, m), label=f"pt {x}")

    def window_points(self, window: int) -> list:
        half = max(1, window // 2)
        return [(0, a) for a in self.left.window_points(half)] + [
            (1, b) for b in self.right.window_points(half)
        ]

    def basis_sample(self, window: int) -> list[int]:
        half = max(1, window // 2)
        return [2 * i for i in self.left.basis_sample(half)] + [
            2 * j + 1 for j in self.right.basis_sample(half)
        ]

    def basic_member(self, index: int, p: Name) -> SierpValue:
        tag, comp = index % 2, index // 2
        side = self._side(tag)
        shifted = Name(lambda i, m: p.query(i + 1, m), label="untag")
        inner = side.basic_member(comp, shifted)

        def recipe(meter: FuelMeter):
            if p.query(0, meter) != tag:
                return
            for budget in itertools.count():
                meter.spend(1)
                obs = inner.observe(budget)
                if obs.fired:
                    yield obs.payload
                    return

        return SierpValue(Process(recipe, "coprod"))

    def elem_subset(self, i: int, j: int) -> bool:
        if i % 2 != j % 2:
            return False
        return self._side(i % 2)._subset(i // 2, j // 2)

    def basic_meet(self, i: int, j: int) -> tuple[int, ...]:
        if i % 2 != j % 2:
            return ()
        tag = i % 2
        return tuple(2 * m + tag for m in self._side(tag).basic_meet(i // 2, j // 2))

    def basic_empty(self, i: int) -> bool:
        return self._side(i % 2).basic_empty(i // 2)

    def describe_basic(self, i: int) -> str:
        return f"in{i % 2}({self._side(i % 2).describe_basic(i // 2)})"

    def describe_point(self, x) -> str:
        tag, val = x
        return f"in{tag}({self._side(tag).describe_point(val)})"

    def dense_point(self, k: int):
        tag, idx = k % 2, k // 2
        val = self._side(tag).dense_point(idx)
        return None if val is None else (tag, val)

    def word_symbols(self, prefix: Word, cap: int) -> list[int]:
        if not prefix:
            return [0, 1]
        return self._side(prefix[0]).word_symbols(prefix[1:], cap)
