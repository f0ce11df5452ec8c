"""Reversible state primitives: trail, reversible ints, sparse sets.

Everything a solver mutates during search is registered on a :class:`Trail`.
The trail records undo thunks grouped into levels; restoring a level replays
the thunks in reverse order, bringing every reversible object back to the
value it held when the level was opened.  Restoration cost is proportional
to the number of *distinct* locations written since the checkpoint
(first-write-wins: a location is trailed at most once per level).
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator


class Inconsistency(Exception):
    """Recoverable domain wipeout.

    Raised by domain updates when a restriction empties the domain.  The
    search engine catches it and restores the trail; propagators themselves
    never need to handle it.
    """


class Trail:
    """Undo log with level checkpoints (saves are grouped per level).

    Writes performed while no level is open (e.g. during model building)
    are permanent: there is no checkpoint to restore them to.
    """

    __slots__ = ("_undo", "_marks", "magic")

    def __init__(self) -> None:
        self._undo: list[Callable[[], None]] = []
        self._marks: list[int] = []
        #: Generation counter, bumped on every save/restore.  Reversible
        #: objects compare it with the generation of their last trail entry
        #: to implement first-write-wins.
        self.magic = 0

    @property
    def level(self) -> int:
        """Number of open levels (0 when no checkpoint is active)."""
        return len(self._marks)

    def save_level(self) -> int:
        """Open a checkpoint and return its id (0 for the first one)."""
        self._marks.append(len(self._undo))
        self.magic += 1
        return len(self._marks) - 1

    def restore_level(self, level: int) -> None:
        """Restore all trailed state to its values when `level` was opened.

        Deeper checkpoints are discarded; `level` itself is consumed and can
        be re-opened by a new :meth:`save_level`.
        """
        if not 0 <= level < len(self._marks):
            raise ValueError(f"level {level} is not an open checkpoint")
        while len(self._marks) > level:
            mark = self._marks.pop()
            undo = self._undo
            while len(undo) > mark:
                undo.pop()()
        self.magic += 1

    def push(self, thunk: Callable[[], None]) -> None:
        """Record an undo thunk for the innermost open level.

        Callers must not push when no level is open (writes are permanent
        then); reversible objects guard this themselves.
        """
        self._undo.append(thunk)


class RevInt:
    """An integer restored by the trail on backtrack."""

    __slots__ = ("_trail", "_value", "_magic")

    def __init__(self, trail: Trail, value: int) -> None:
        self._trail = trail
        self._value = value
        self._magic = -1

    @property
    def value(self) -> int:
        return self._value

    def set(self, value: int) -> None:
        if value == self._value:
            return
        trail = self._trail
        if trail.level and self._magic != trail.magic:
            self._magic = trail.magic
            old = self._value
            trail.push(lambda: self._assign(old))
        self._value = value

    def increment(self, delta: int = 1) -> None:
        self.set(self._value + delta)

    def _assign(self, value: int) -> None:
        self._value = value
        self._magic = -1

    def __repr__(self) -> str:
        return f"RevInt({self._value})"


class RevIntArray:
    """A fixed-size array of integers with per-slot trailing."""

    __slots__ = ("_trail", "_values", "_magic")

    def __init__(self, trail: Trail, values: Iterable[int]) -> None:
        self._trail = trail
        self._values = list(values)
        self._magic = [-1] * len(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __getitem__(self, i: int) -> int:
        return self._values[i]

    def __setitem__(self, i: int, value: int) -> None:
        values = self._values
        if values[i] == value:
            return
        trail = self._trail
        if trail.level and self._magic[i] != trail.magic:
            self._magic[i] = trail.magic
            old = values[i]
            trail.push(lambda: self._assign(i, old))
        values[i] = value

    def _assign(self, i: int, value: int) -> None:
        self._values[i] = value
        self._magic[i] = -1

    def __iter__(self) -> Iterator[int]:
        return iter(self._values)

    def __repr__(self) -> str:
        return f"RevIntArray({self._values})"


class RevSparseSet:
    """Reversible subset of {0, …, n−1} with O(1) remove and restore.

    Elements live in a dense permutation array split by a size marker:
    the first `size` slots are the members.  Removal swaps the element
    behind the marker; restoring only rewinds the marker, which is valid
    because removed elements stay parked right behind it.

    The set can only shrink during search (insertion exists solely for
    construction, before any checkpoint is opened).
    """

    __slots__ = ("_trail", "_dense", "_pos", "_size", "_magic")

    def __init__(self, trail: Trail, n: int, members: Iterable[int] | None = None) -> None:
        self._trail = trail
        self._dense = list(range(n))
        self._pos = list(range(n))
        self._size = 0
        self._magic = -1
        if members is None:
            self._size = n
        else:
            for v in members:
                self.add(v)

    def __len__(self) -> int:
        return self._size

    def __contains__(self, v: int) -> bool:
        return self._pos[v] < self._size

    def __iter__(self) -> Iterator[int]:
        """Iterate current members (unspecified order; don't mutate while iterating)."""
        return iter(self._dense[: self._size])

    def add(self, v: int) -> None:
        """Construction-time insertion; forbidden once a checkpoint is open."""
        if self._trail.level:
            raise RuntimeError("RevSparseSet only shrinks during search")
        if v in self:
            return
        self._swap_to(v, self._size)
        self._size += 1

    def remove(self, v: int) -> None:
        """Remove `v` if present (no-op otherwise)."""
        if self._pos[v] >= self._size:
            return
        self._save_size()
        self._swap_to(v, self._size - 1)
        self._size -= 1

    def remove_all(self) -> None:
        self._save_size()
        self._size = 0

    def _save_size(self) -> None:
        trail = self._trail
        if trail.level and self._magic != trail.magic:
            self._magic = trail.magic
            old = self._size
            trail.push(lambda: self._restore_size(old))

    def _restore_size(self, size: int) -> None:
        self._size = size
        self._magic = -1

    def _swap_to(self, v: int, slot: int) -> None:
        dense, pos = self._dense, self._pos
        other = dense[slot]
        p = pos[v]
        dense[p], dense[slot] = other, v
        pos[v], pos[other] = slot, p

    def __repr__(self) -> str:
        return f"RevSparseSet({sorted(self)})"


class TriPartition:
    """Reversible partition of {0, …, n−1} into required / possible / excluded.

    One dense permutation ordered [R | P | X] with two reversible boundary
    markers.  Nodes move only from P to R or from P to X; they never leave
    R or X except by trail restore.  Each class is O(1) to test and
    contiguous to enumerate.
    """

    __slots__ = ("_trail", "_dense", "_pos", "_r_end", "_x_start")

    def __init__(self, trail: Trail, n: int, required: Iterable[int] = ()) -> None:
        self._trail = trail
        self._dense = list(range(n))
        self._pos = list(range(n))
        self._r_end = RevInt(trail, 0)
        self._x_start = RevInt(trail, n)
        for v in required:
            self.require(v)

    def is_required(self, v: int) -> bool:
        return self._pos[v] < self._r_end.value

    def is_excluded(self, v: int) -> bool:
        return self._pos[v] >= self._x_start.value

    def is_possible(self, v: int) -> bool:
        return self._r_end.value <= self._pos[v] < self._x_start.value

    def require(self, v: int) -> None:
        """Move a possible node to R (no-op if already required)."""
        if self.is_required(v):
            return
        if self.is_excluded(v):
            raise ValueError(f"node {v} is excluded; caller must wipe out instead")
        r_end = self._r_end.value
        self._swap(v, r_end)
        self._r_end.set(r_end + 1)

    def exclude(self, v: int) -> None:
        """Move a possible node to X (no-op if already excluded)."""
        if self.is_excluded(v):
            return
        if self.is_required(v):
            raise ValueError(f"node {v} is required; caller must wipe out instead")
        x_start = self._x_start.value - 1
        self._swap(v, x_start)
        self._x_start.set(x_start)

    def required(self) -> list[int]:
        return self._dense[: self._r_end.value]

    def possible(self) -> list[int]:
        return self._dense[self._r_end.value : self._x_start.value]

    def excluded(self) -> list[int]:
        return self._dense[self._x_start.value :]

    def _swap(self, v: int, slot: int) -> None:
        dense, pos = self._dense, self._pos
        other = dense[slot]
        p = pos[v]
        dense[p], dense[slot] = other, v
        pos[v], pos[other] = slot, p
