"""Filtered simplicial complexes, boundary-matrix persistence and extended persistence."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import gf
from .errors import ParseError
from .geometry import INF, DecoratedPoint, XReal, minus, xreal
from .quiver import Barcode, FieldSpec, GF2, GridModule, decompose, rank_table

Simplex = tuple  # ascending vertex ids


def _faces(s: Simplex) -> list[Simplex]:
    if len(s) == 1:
        return []
    return [s[:k] + s[k + 1:] for k in range(len(s))]


class FilteredComplex:
    """Simplices with filtration values, closed under faces and monotone along faces.

    Iteration order is by value, then dimension, then vertex tuple.
    """

    __slots__ = ("simplices", "values", "_index")

    def __init__(self, simplices: Iterable[tuple[Sequence[int], object]]):
        values: dict[Simplex, Fraction] = {}
        for verts, value in simplices:
            s = tuple(sorted(int(v) for v in verts))
            if not s or len(set(s)) != len(s):
                raise ValueError(f"bad simplex {verts!r}")
            if s in values:
                raise ValueError(f"simplex {s} listed twice")
            values[s] = xreal(value)
        for s, value in values.items():
            for f in _faces(s):
                if f not in values:
                    raise ValueError(f"face {f} of {s} is missing")
                if values[f] > value:
                    raise ValueError(f"face {f} has value {values[f]} above its coface {s} at {value}")
        order = sorted(values, key=lambda s: (values[s], len(s), s))
        self.simplices = tuple(order)
        self.values = values
        self._index = {s: i for i, s in enumerate(order)}

    def __len__(self) -> int:
        return len(self.simplices)

    def __iter__(self):
        return ((s, self.values[s]) for s in self.simplices)

    def index(self, s: Simplex) -> int:
        return self._index[s]

    def dimension(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    def vertices(self) -> list[int]:
        return sorted(s[0] for s in self.simplices if len(s) == 1)

    def sublevel(self, t) -> list[Simplex]:
        t = xreal(t)
        return [s for s in self.simplices if self.values[s] <= t]

    def critical_values(self) -> list[Fraction]:
        return sorted(set(self.values.values()))


def _parse_lines(text: str, source: str | None, keyword: str, min_fields: int):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == keyword:
            parts = parts[1:]
        if len(parts) < min_fields:
            raise ParseError(f"expected at least {min_fields} fields after '{keyword}'", number, source)
        yield number, parts


def _parse_value(text: str, number: int, source: str | None) -> Fraction:
    try:
        value = xreal(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad value {text!r}", number, source) from None
    if value in (INF, -INF):
        raise ParseError("filtration values must be finite", number, source)
    return value


def _parse_ids(parts: Sequence[str], number: int, source: str | None) -> list[int]:
    try:
        ids = [int(p) for p in parts]
    except ValueError:
        raise ParseError(f"vertex ids must be integers, got {' '.join(parts)!r}", number, source) from None
    if any(i < 0 for i in ids):
        raise ParseError("vertex ids must be nonnegative", number, source)
    return ids


def parse_filtration(text: str, source: str | None = None) -> FilteredComplex:
    """Lines ``simplex v0 .. vk value`` (the keyword is optional); ``#`` starts a comment."""
    entries = []
    where: dict[Simplex, int] = {}
    for number, parts in _parse_lines(text, source, "simplex", 2):
        ids = _parse_ids(parts[:-1], number, source)
        value = _parse_value(parts[-1], number, source)
        s = tuple(sorted(ids))
        if len(set(s)) != len(s):
            raise ParseError(f"repeated vertex in {s}", number, source)
        if s in where:
            raise ParseError(f"simplex {s} already given on line {where[s]}", number, source)
        where[s] = number
        entries.append((s, value))
    values = dict(entries)
    for s, value in entries:
        for f in _faces(s):
            if f not in values:
                raise ParseError(f"face {f} of simplex {s} is missing", where[s], source)
            if values[f] > value:
                raise ParseError(
                    f"value {value} of {s} is below the value {values[f]} of its face {f} (line {where[f]})",
                    where[s],
                    source,
                )
    return FilteredComplex(entries)


def read_filtration(path: str | Path) -> FilteredComplex:
    path = Path(path)
    return parse_filtration(path.read_text(), str(path))


def parse_vertex_values(text: str, source: str | None = None) -> dict[int, Fraction]:
    """Lines ``vertex id value``."""
    out: dict[int, Fraction] = {}
    for number, parts in _parse_lines(text, source, "vertex", 2):
        if len(parts) != 2:
            raise ParseError("expected 'vertex id value'", number, source)
        (vid,) = _parse_ids(parts[:1], number, source)
        if vid in out:
            raise ParseError(f"vertex {vid} given twice", number, source)
        out[vid] = _parse_value(parts[1], number, source)
    return out


def format_filtration(k: FilteredComplex) -> str:
    return "".join(f"simplex {' '.join(map(str, s))} {k.values[s]}\n" for s in k.simplices)


def lower_star(vertex_values: Mapping[int, object], simplices: Iterable) -> FilteredComplex:
    """Each simplex gets the largest value among its vertices."""
    items = simplices.simplices if isinstance(simplices, FilteredComplex) else simplices
    entries = []
    for s in items:
        s = tuple(sorted(int(v) for v in s))
        missing = [v for v in s if v not in vertex_values]
        if missing:
            raise ValueError(f"no value for vertices {missing}")
        entries.append((s, max(xreal(vertex_values[v]) for v in s)))
    return FilteredComplex(entries)


def closure(top_simplices: Iterable[Sequence[int]]) -> list[Simplex]:
    """All faces of the given simplices."""
    out = set()
    for s in top_simplices:
        s = tuple(sorted(s))
        for r in range(1, len(s) + 1):
            out.update(combinations(s, r))
    return sorted(out, key=lambda s: (len(s), s))


# --- persistence ----------------------------------------------------------------


def _boundary_column(s: Simplex, index: Mapping[Simplex, int], p: int) -> dict[int, int]:
    if len(s) == 1:
        return {}
    return {index[f]: (1 if k % 2 == 0 else p - 1) for k, f in enumerate(_faces(s))}


def reduce_boundary(k: FilteredComplex, field: FieldSpec = GF2) -> dict[int, int]:
    """Standard column reduction; returns ``pivot row -> column`` for every persistence pair."""
    p = field.characteristic
    index = {s: i for i, s in enumerate(k.simplices)}
    pivot_of: dict[int, int] = {}
    columns: dict[int, dict[int, int]] = {}
    for j, s in enumerate(k.simplices):
        col = _boundary_column(s, index, p)
        while col:
            low = max(col)
            other = pivot_of.get(low)
            if other is None:
                break
            factor = col[low] * pow(columns[other][low], -1, p) % p
            for r, val in columns[other].items():
                nv = (col.get(r, 0) - factor * val) % p
                if nv:
                    col[r] = nv
                else:
                    col.pop(r, None)
        columns[j] = col
        if col:
            pivot_of[max(col)] = j
    return pivot_of


def persistence(k: FilteredComplex, field: FieldSpec = GF2) -> dict[int, Barcode]:
    """Barcodes in every degree; pairs with equal values are dropped."""
    pairs = reduce_boundary(k, field)
    killers = set(pairs.values())
    bars: dict[int, Counter] = {d: Counter() for d in range(k.dimension() + 1)}
    for i, s in enumerate(k.simplices):
        if i in killers:
            continue
        birth = k.values[s]
        d = len(s) - 1
        if i in pairs:
            death = k.values[k.simplices[pairs[i]]]
            if death > birth:
                bars[d][DecoratedPoint(minus(birth), minus(death))] += 1
        else:
            bars[d][DecoratedPoint(minus(birth), minus(INF))] += 1
    return {d: Barcode.of(c, field) for d, c in bars.items()}


def sublevel_persistence(k: FilteredComplex, degree: int, field: FieldSpec = GF2) -> Barcode:
    return persistence(k, field).get(degree, Barcode((), field))


# --- chain-level helpers shared by the rank oracle and extended persistence ---------------------


def _simplices_of_dim(k: FilteredComplex, d: int) -> list[Simplex]:
    return sorted(s for s in k.simplices if len(s) == d + 1)


def _boundary_matrix(rows: Sequence[Simplex], cols: Sequence[Simplex], p: int) -> np.ndarray:
    pos = {s: i for i, s in enumerate(rows)}
    mat = gf.zeros(len(rows), len(cols))
    for j, s in enumerate(cols):
        if len(s) == 1:
            continue
        for k, f in enumerate(_faces(s)):
            mat[pos[f], j] = 1 if k % 2 == 0 else p - 1
    return mat


def _selector(universe: Sequence[Simplex], chosen: Iterable[Simplex]) -> np.ndarray:
    """Diagonal 0/1 matrix keeping the coordinates of ``chosen``."""
    keep = set(chosen)
    return np.diag([1 if s in keep else 0 for s in universe]).astype(np.int64)


class _Pair:
    """Relative chains of (K, L) written in the coordinates of all simplices of X."""

    def __init__(self, x: FilteredComplex, members: set, sub: set, d: int, p: int):
        self.p = p
        self.cells = _simplices_of_dim(x, d)
        above = _simplices_of_dim(x, d + 1)
        below = _simplices_of_dim(x, d - 1) if d > 0 else []
        keep = [s for s in self.cells if s in members and s not in sub]
        self.keep = _selector(self.cells, keep)
        self.chains = self.keep[:, [i for i, s in enumerate(self.cells) if s in members and s not in sub]]
        # relative boundary d -> d-1, restricted to K and with L projected away
        down = _boundary_matrix(below, self.cells, p) if below else gf.zeros(0, len(self.cells))
        keep_below = _selector(below, [s for s in below if s in members and s not in sub])
        rel_down = gf.matmul(gf.matmul(keep_below, down, p), self.chains, p) if below else gf.zeros(0, self.chains.shape[1])
        coeffs = gf.nullspace(rel_down, p) if self.chains.shape[1] else gf.zeros(0, 0)
        self.cycles = gf.matmul(self.chains, coeffs, p) if coeffs.size else gf.zeros(len(self.cells), 0)
        up_cols = [s for s in above if s in members and s not in sub]
        up = _boundary_matrix(self.cells, up_cols, p) if up_cols else gf.zeros(len(self.cells), 0)
        self.boundaries = gf.column_basis(gf.matmul(self.keep, up, p), p)


def homology_rank(pair_a: _Pair, pair_b: _Pair) -> int:
    """Rank of the map induced on homology, ``rank[B | P Z] - rank[B]``."""
    p = pair_a.p
    moved = gf.matmul(pair_b.keep, pair_a.cycles, p)
    both = np.concatenate([pair_b.boundaries, moved], axis=1)
    return gf.rank(both, p) - gf.rank(pair_b.boundaries, p)


def sublevel_rank_oracle(k: FilteredComplex, degree: int, s, t, field: FieldSpec = GF2) -> int:
    """Rank of ``H(X^s) -> H(X^t)`` from full boundary matrices, without the reduction algorithm."""
    p = field.characteristic
    members_s, members_t = set(k.sublevel(s)), set(k.sublevel(t))
    return homology_rank(_Pair(k, members_s, set(), degree, p), _Pair(k, members_t, set(), degree, p))


# --- extended persistence -------------------------------------------------------------------


@dataclass(frozen=True)
class ExtendedPersistence:
    """Ordinary, relative and extended barcodes, written in chart coordinates.

    The extended line ``R, +inf, backwards R`` is charted monotonically:
    a real ``a`` stays ``a``, the middle point becomes ``top + 1`` and the
    barred copy of ``a`` becomes ``2*top + 2 - a``, where ``top`` is the
    largest vertex value.
    """

    ordinary: Barcode
    relative: Barcode
    extended: Barcode
    top: Fraction

    def decode(self, value: XReal) -> tuple[str, Fraction | None]:
        """``("real", a)``, ``("infinity", None)`` or ``("bar", a)``."""
        if value <= self.top:
            return "real", value
        if value == self.top + 1:
            return "infinity", None
        return "bar", 2 * self.top + 2 - value

    def pairs(self, which: str) -> Counter:
        """Bars as pairs of labels such as ``("real", 0), ("bar", 2)``."""
        bars = getattr(self, which)
        out: Counter = Counter()
        for pt, k in bars.items:
            out[(self.decode(pt.birth.value), self.decode(pt.death.value))] += k
        return out


def _ep_stages(x: FilteredComplex, values: Mapping[int, Fraction]) -> tuple[list, list]:
    levels = sorted(set(values.values()))
    top = levels[-1]
    stages, chart = [], []
    for a in levels:
        stages.append(({s for s in x.simplices if max(values[v] for v in s) <= a}, set()))
        chart.append(a)
    everything = set(x.simplices)
    stages.append((everything, set()))
    chart.append(top + 1)
    for a in reversed(levels):
        stages.append((everything, {s for s in x.simplices if min(values[v] for v in s) >= a}))
        chart.append(2 * top + 2 - a)
    return stages, chart


def extended_module(simplices, vertex_values: Mapping[int, object], degree: int, field: FieldSpec = GF2):
    """Homology along the extended sequence as a grid module over the chart coordinates."""
    p = field.characteristic
    values = {int(v): xreal(a) for v, a in vertex_values.items()}
    x = lower_star(values, simplices)
    stages, chart = _ep_stages(x, values)
    pairs = [_Pair(x, members, sub, degree, p) for members, sub in stages]
    bases = [gf.complement_basis(pr.boundaries, pr.cycles, p) for pr in pairs]
    steps = []
    for k in range(len(pairs) - 1):
        nxt = pairs[k + 1]
        moved = gf.matmul(nxt.keep, bases[k], p)
        full = np.concatenate([bases[k + 1], nxt.boundaries], axis=1)
        coords = gf.solve(full, moved, p)
        if coords is None:
            raise ArithmeticError("relative cycle left the cycle space of the next pair")
        steps.append(coords[: bases[k + 1].shape[1]])
    module = GridModule(chart, [b.shape[1] for b in bases], steps, field)
    return module, pairs, x, values


def extended_persistence(simplices, vertex_values: Mapping[int, object], degree: int, field: FieldSpec = GF2) -> ExtendedPersistence:
    module, _, _, values = extended_module(simplices, vertex_values, degree, field)
    chart = module.grid
    levels = sorted(set(values.values()))
    top = levels[-1]
    n = len(levels)
    ordinary, relative, extended = Counter(), Counter(), Counter()
    for pt, k in decompose(module).items:
        i, j = chart.index(pt.birth.value), chart.index(pt.death.value)
        if j + 1 >= len(chart):
            raise ArithmeticError("a class survives the whole extended sequence")
        bar = DecoratedPoint(minus(chart[i]), minus(chart[j + 1]))
        if j + 1 <= n - 1:
            ordinary[bar] += k
        elif i >= n + 1:
            relative[bar] += k
        else:
            extended[bar] += k
    return ExtendedPersistence(Barcode.of(ordinary, field), Barcode.of(relative, field), Barcode.of(extended, field), top)


def extended_rank_oracle(simplices, vertex_values: Mapping[int, object], degree: int, field: FieldSpec = GF2) -> np.ndarray:
    """All ranks between stages of the extended sequence, straight from boundary matrices.

    Returned in the padded layout of :func:`persistra.quiver.rank_table`.
    """
    p = field.characteristic
    values = {int(v): xreal(a) for v, a in vertex_values.items()}
    x = lower_star(values, simplices)
    stages, _ = _ep_stages(x, values)
    pairs = [_Pair(x, members, sub, degree, p) for members, sub in stages]
    n = len(pairs)
    table = np.zeros((n + 2, n + 2), dtype=np.int64)
    for i in range(n):
        for j in range(i, n):
            table[i + 1, j + 1] = homology_rank(pairs[i], pairs[j])
    return table
