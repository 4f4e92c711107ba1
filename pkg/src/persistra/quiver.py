"""Finite persistence modules as representations of a linearly ordered quiver.

Indices into a ``GridModule`` are 0-based.  The index ``-1`` stands for the
virtual point below the grid and ``n`` for the one above it; both carry the
zero space.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import gf
from .geometry import DecoratedPoint, XReal, is_finite, minus, plus, xreal


@dataclass(frozen=True)
class FieldSpec:
    characteristic: int = 2

    def __post_init__(self) -> None:
        p = self.characteristic
        if p < 2 or any(p % k == 0 for k in range(2, int(p**0.5) + 1)):
            raise ValueError(f"{p} is not prime")


GF2 = FieldSpec(2)

# Matrices over GF(p) are plain numpy int64 arrays with entries in range(p).
FFMatrix = np.ndarray


class GridModule:
    """Vector spaces at grid points ``t_0 < ... < t_{n-1}`` joined by step maps."""

    __slots__ = ("grid", "dims", "steps", "field")

    def __init__(self, grid: Sequence, dims: Sequence[int], steps: Sequence, field: FieldSpec = GF2):
        p = field.characteristic
        grid = tuple(xreal(t) for t in grid)
        dims = tuple(int(d) for d in dims)
        if any(s >= t for s, t in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly ascending")
        if len(dims) != len(grid):
            raise ValueError("one dimension per grid point is required")
        if len(steps) != max(len(grid) - 1, 0):
            raise ValueError("a module on n grid points has n-1 steps")
        mats = []
        for i, s in enumerate(steps):
            m = gf.as_matrix(s, p, (dims[i + 1], dims[i]))
            m.setflags(write=False)
            mats.append(m)
        self.grid, self.dims, self.steps, self.field = grid, dims, tuple(mats), field

    def __len__(self) -> int:
        return len(self.grid)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridModule):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.dims == other.dims
            and self.field == other.field
            and all(np.array_equal(x, y) for x, y in zip(self.steps, other.steps))
        )

    def __repr__(self) -> str:
        return f"GridModule(grid={[str(t) for t in self.grid]}, dims={self.dims}, p={self.field.characteristic})"

    @property
    def p(self) -> int:
        return self.field.characteristic

    def dim(self, i: int) -> int:
        return self.dims[i] if 0 <= i < len(self.grid) else 0

    def structure_map(self, i: int, j: int) -> np.ndarray:
        """The composite ``v_i^j`` from the space at index ``i`` to the one at ``j``."""
        n = len(self.grid)
        if i > j:
            raise ValueError("structure maps only go up the grid")
        if i < 0 or j >= n:
            return gf.zeros(self.dim(j), self.dim(i))
        m = gf.identity(self.dims[i])
        for k in range(i, j):
            m = gf.matmul(self.steps[k], m, self.p)
        return m

    def index_of(self, t) -> int:
        return self.grid.index(xreal(t))


def rank_between(m: GridModule, i: int, j: int) -> int:
    n = len(m)
    if i > j:
        raise ValueError("rank_between needs i <= j")
    if i < -1 or j > n:
        raise IndexError(f"indices {i}, {j} out of range for a module on {n} points")
    if i < 0 or j >= n:
        return 0
    return gf.rank(m.structure_map(i, j), m.p)


def bracket_multiplicity(m: GridModule, i: int, j: int) -> int:
    """Multiplicity of the interval summand supported on grid indices ``i..j``."""
    n = len(m)
    if not 0 <= i <= j < n:
        raise IndexError(f"bracket [{i},{j}] out of range for a module on {n} points")
    r = lambda s, t: rank_between(m, s, t)
    return r(i, j) - r(i - 1, j) - r(i, j + 1) + r(i - 1, j + 1)


def localization_multiplicity(m: GridModule, a: int, b: int, c: int, d: int) -> int:
    """``dim (im v_b^c ∩ ker v_c^d) / (im v_a^c ∩ ker v_c^d)`` by explicit subspaces."""
    n = len(m)
    if not (-1 <= a < b <= c < d <= n):
        raise ValueError(f"need -1 <= a < b <= c < d <= n, got {(a, b, c, d)}")
    p = m.p
    kernel = gf.nullspace(m.structure_map(c, d), p) if d < n else gf.identity(m.dims[c])
    image_b = gf.column_basis(m.structure_map(b, c), p)
    image_a = gf.column_basis(m.structure_map(a, c), p) if a >= 0 else gf.zeros(m.dims[c], 0)
    top = gf.intersection(image_b, kernel, p)
    bottom = gf.intersection(image_a, kernel, p)
    return top.shape[1] - bottom.shape[1]


@dataclass(frozen=True)
class Barcode:
    """A finite multiset of decorated intervals, stored as sorted ``(interval, multiplicity)`` pairs."""

    items: tuple[tuple[DecoratedPoint, int], ...] = ()
    field: FieldSpec = GF2

    def __post_init__(self) -> None:
        merged: Counter = Counter()
        for pt, mult in self.items:
            if not isinstance(pt, DecoratedPoint):
                raise TypeError(f"{pt!r} is not a DecoratedPoint")
            if mult < 0:
                raise ValueError("multiplicities must be positive")
            merged[pt] += mult
        object.__setattr__(self, "items", tuple(sorted((pt, k) for pt, k in merged.items() if k > 0)))

    @classmethod
    def of(cls, intervals: Iterable, field: FieldSpec = GF2) -> "Barcode":
        """Build from an iterable of intervals (repeats add up) or a mapping to multiplicities."""
        if hasattr(intervals, "items"):
            return cls(tuple(intervals.items()), field)
        return cls(tuple(Counter(intervals).items()), field)

    def counter(self) -> Counter:
        return Counter(dict(self.items))

    def expanded(self) -> list[DecoratedPoint]:
        return [pt for pt, k in self.items for _ in range(k)]

    def __len__(self) -> int:
        return sum(k for _, k in self.items)

    def __iter__(self):
        return iter(self.expanded())

    def endpoints(self) -> list[Fraction]:
        values = {v for pt, _ in self.items for v in pt.coordinates if is_finite(v)}
        return sorted(values)

    def __str__(self) -> str:
        parts = [f"<{pt.birth}, {pt.death}>" + (f" x{k}" if k > 1 else "") for pt, k in self.items]
        return "{" + ", ".join(parts) + "}"


def rank_table(m: GridModule) -> np.ndarray:
    """All ranks ``r[i+1, j+1] = rank v_i^j``, padded with zero rows/columns for the virtual indices."""
    n = len(m)
    table = np.zeros((n + 2, n + 2), dtype=np.int64)
    for i in range(n):
        composite = gf.identity(m.dims[i])
        for j in range(i, n):
            if j > i:
                composite = gf.matmul(m.steps[j - 1], composite, m.p)
            r = gf.rank(composite, m.p)
            if r == 0:
                break
            table[i + 1, j + 1] = r
    return table


def decompose(m: GridModule) -> Barcode:
    """Interval decomposition via rank inclusion-exclusion; intervals are closed on the grid."""
    n = len(m)
    r = rank_table(m)
    bars: Counter = Counter()
    for i in range(n):
        for j in range(i, n):
            if r[i + 1, j + 1] == 0:
                break
            k = r[i + 1, j + 1] - r[i, j + 1] - r[i + 1, j + 2] + r[i, j + 2]
            if k:
                bars[DecoratedPoint(minus(m.grid[i]), plus(m.grid[j]))] += int(k)
    return Barcode.of(bars, m.field)


def sample_barcode(b: Barcode, grid: Sequence) -> GridModule:
    """Restrict a barcode module to a finite grid, using one basis vector per live interval."""
    grid = [xreal(t) for t in grid]
    bars = b.expanded()
    alive = [[k for k, pt in enumerate(bars) if pt.contains(t)] for t in grid]
    steps = []
    for here, there in zip(alive, alive[1:]):
        mat = gf.zeros(len(there), len(here))
        position = {k: r for r, k in enumerate(there)}
        for col, k in enumerate(here):
            if k in position:
                mat[position[k], col] = 1
        steps.append(mat)
    return GridModule(grid, [len(a) for a in alive], steps, b.field)


def direct_sum(m1: GridModule, m2: GridModule) -> GridModule:
    if m1.grid != m2.grid or m1.field != m2.field:
        raise ValueError("direct sums need a common grid and field")
    steps = []
    for s1, s2 in zip(m1.steps, m2.steps):
        top = np.concatenate([s1, gf.zeros(s1.shape[0], s2.shape[1])], axis=1)
        bottom = np.concatenate([gf.zeros(s2.shape[0], s1.shape[1]), s2], axis=1)
        steps.append(np.concatenate([top, bottom], axis=0))
    dims = [x + y for x, y in zip(m1.dims, m2.dims)]
    return GridModule(m1.grid, dims, steps, m1.field)


def interval_module(grid: Sequence, i: int, j: int, field: FieldSpec = GF2) -> GridModule:
    """The rank-one module supported on grid indices ``i..j``."""
    n = len(grid)
    dims = [1 if i <= k <= j else 0 for k in range(n)]
    steps = [gf.identity(1) if dims[k] and dims[k + 1] else gf.zeros(dims[k + 1], dims[k]) for k in range(n - 1)]
    return GridModule(grid, dims, steps, field)
