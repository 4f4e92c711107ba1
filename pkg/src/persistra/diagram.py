"""Decorated and undecorated diagrams, extraction from a measure, snapping, file I/O."""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .errors import ContractViolation, NonStabilization, ParseError
from .geometry import (
    INF,
    MINUS,
    PLUS,
    DecoratedPoint,
    DecoratedValue,
    Rect,
    XReal,
    format_xreal,
    in_rect,
    is_finite,
    xreal,
)
from .measure import RMeasure
from .quiver import Barcode, FieldSpec, GF2

HEADER = "#persistra-diagram v1"
UNDECORATED_HEADER = HEADER + " undecorated"


def _normalized(points) -> tuple:
    merged: Counter = Counter()
    for pt, k in (points.items() if hasattr(points, "items") else points):
        merged[pt] += k
    return tuple(sorted((pt, k) for pt, k in merged.items() if k > 0))


@dataclass(frozen=True)
class DecoratedDiagram:
    points: tuple = ()
    singular: frozenset = frozenset()
    note: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", _normalized(self.points))
        object.__setattr__(self, "singular", frozenset(self.singular))
        clash = {pt for pt, _ in self.points} & self.singular
        if clash:
            raise ValueError(f"points {sorted(map(str, clash))} are also marked singular")

    def counter(self) -> Counter:
        return Counter(dict(self.points))

    def __len__(self) -> int:
        return sum(k for _, k in self.points)

    def to_barcode(self, field: FieldSpec = GF2) -> Barcode:
        if self.singular:
            raise ValueError("a diagram with singular support is not a finite barcode")
        return Barcode(self.points, field)


@dataclass(frozen=True)
class UndecoratedDiagram:
    """Off-diagonal points ``(p, q)`` with ``p < q`` and their multiplicities."""

    points: tuple = ()

    def __post_init__(self) -> None:
        pts = _normalized(self.points)
        for (p, q), _ in pts:
            if not p < q:
                raise ValueError(f"point ({p}, {q}) is not strictly above the diagonal")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, pairs: Iterable) -> "UndecoratedDiagram":
        return cls(tuple(Counter((xreal(p), xreal(q)) for p, q in pairs).items()))

    def expanded(self) -> list[tuple[XReal, XReal]]:
        return [pt for pt, k in self.points for _ in range(k)]

    def __len__(self) -> int:
        return sum(k for _, k in self.points)


def diagram_of_barcode(b: Barcode) -> DecoratedDiagram:
    return DecoratedDiagram(b.items, note="finite barcode")


def undecorate(d: DecoratedDiagram | Barcode) -> UndecoratedDiagram:
    pts = d.points if isinstance(d, DecoratedDiagram) else d.items
    merged: Counter = Counter()
    for pt, k in pts:
        if not pt.on_diagonal:
            merged[pt.coordinates] += k
    return UndecoratedDiagram(tuple(merged.items()))


# --- extraction ----------------------------------------------------------------


def _axis_cuts(mu: RMeasure, lo: XReal, hi: XReal, resolution: Fraction) -> tuple[list | None, bool]:
    """Interior cut coordinates for one side of a cell, and whether they are exact grid cuts."""
    values = mu.grid_between(lo, hi)
    if values is not None:
        if not values:
            return None, True
        return [values[(len(values) - 1) // 2]], True
    if is_finite(lo) and is_finite(hi) and hi - lo >= resolution:
        return [(lo + hi) / 2], False
    return None, False


def _corner_probe(mu: RMeasure, pt: DecoratedPoint, cell: Rect, level: int) -> Rect:
    """A small rectangle around ``pt`` inside ``cell``; larger ``level`` means smaller."""
    scale = Fraction(1, 2**level)
    r, s = pt.birth.value, pt.death.value
    widths = [w for w in (cell.b - cell.a, cell.d - cell.c) if is_finite(w)]
    if is_finite(r) and is_finite(s) and s > r:
        widths.append(s - r)
    base = min(widths) / 2 if widths else Fraction(1)
    step = base * scale

    def side(value: DecoratedValue, lo: XReal, hi: XReal) -> tuple[XReal, XReal]:
        # probes toward an infinite end stay clear of the finite coordinates of pt and the cell
        v = value.value
        anchors = [x for x in (lo, hi, r, s) if is_finite(x)] or [Fraction(0)]
        if v == -INF:
            return -INF, min(anchors) - 2**level
        if v == INF:
            return max(anchors) + 2**level, INF
        return (v, v + step) if value.decoration == PLUS else (v - step, v)

    a, b = side(pt.birth, cell.a, cell.b)
    c, d = side(pt.death, cell.c, cell.d)
    return Rect(a, b, c, d)


def _multiplicity(mu: RMeasure, pt: DecoratedPoint, cell: Rect, exact: bool, max_level: int = 40):
    """Limit of the corner probes; two equal consecutive values declare stabilization."""
    previous = mu(_corner_probe(mu, pt, cell, 1))
    for level in range(2, max_level):
        current = mu(_corner_probe(mu, pt, cell, level))
        if current == previous:
            return current
        if exact:
            raise ContractViolation(f"grid-aligned measure changed between probe scales at {pt}")
        previous = current
    raise NonStabilization(f"corner probes at {pt} did not stabilize")


def _leaf_candidates(cell: Rect) -> list[DecoratedPoint]:
    out = []
    for birth in (DecoratedValue(cell.a, PLUS), DecoratedValue(cell.b, MINUS)):
        for death in (DecoratedValue(cell.c, PLUS), DecoratedValue(cell.d, MINUS)):
            if birth < death:
                pt = DecoratedPoint(birth, death)
                if in_rect(pt, cell):
                    out.append(pt)
    return out


def extract_diagram(mu: RMeasure, region: Rect, resolution=Fraction(1, 1024)) -> DecoratedDiagram:
    """Recover the decorated points of ``mu`` inside ``region`` by quadrant subdivision.

    Cells of measure zero are dropped.  Cells are cut at the measure's grid
    values when it declares them (exact), otherwise at dyadic midpoints down
    to ``resolution`` (positions then only accurate to that scale).  At a leaf
    every corner, with its inward tick, is probed by shrinking rectangles.
    """
    resolution = xreal(resolution)
    half_plane = mu.domain == "half-plane"
    points: Counter = Counter()
    singular: set = set()
    approximate = False
    stack = [region]
    while stack:
        cell = stack.pop()
        if half_plane and cell.d <= cell.a:
            continue
        valid = cell.in_half_plane or not half_plane
        value = mu(cell) if valid else None
        if value == 0:
            continue
        xcuts, xexact = _axis_cuts(mu, cell.a, cell.b, resolution)
        ycuts, yexact = _axis_cuts(mu, cell.c, cell.d, resolution)
        if xcuts or ycuts:
            xs = [cell.a] + (xcuts or []) + [cell.b]
            ys = [cell.c] + (ycuts or []) + [cell.d]
            children = [Rect(x0, x1, y0, y1) for x0, x1 in zip(xs, xs[1:]) for y0, y1 in zip(ys, ys[1:])]
            if value is not None and value != INF:
                total = sum(mu(child) for child in children)
                if total != value:
                    raise ContractViolation(f"measure is not additive on {cell}: {value} != {total}")
            stack.extend(children)
            continue
        exact = xexact and yexact
        approximate = approximate or not exact
        if not exact and value is not None and value != INF:
            # unresolved cell below the resolution: report its mass at the lower-left corner
            points[DecoratedPoint(DecoratedValue(cell.a, PLUS), DecoratedValue(cell.c, PLUS))] += value
            continue
        found = 0
        for pt in _leaf_candidates(cell):
            k = _multiplicity(mu, pt, cell, exact)
            if k == INF:
                singular.add(pt)
            elif k:
                points[pt] += k
                found += k
        if exact and value is not None and value != INF and found != value:
            raise ContractViolation(f"corner multiplicities {found} do not add up to {value} on {cell}")
    note = "exact (grid-aligned)" if not approximate else f"positions within {resolution}; heuristic stabilization"
    return DecoratedDiagram(tuple(points.items()), frozenset(singular), note)


def snap(d: DecoratedDiagram, grid: Sequence) -> Counter:
    """Multiplicity at each grid vertex ``(i, j)`` from the cell just below-left of it."""
    grid = [xreal(t) for t in grid]
    ext = [-INF] + grid + [INF]
    out: Counter = Counter()
    for i in range(len(grid)):
        for j in range(i, len(grid)):
            cell = Rect(ext[i], ext[i + 1], ext[j + 1], ext[j + 2])
            bad = [pt for pt in d.singular if in_rect(pt, cell)]
            if bad:
                raise ValueError(f"singular point {bad[0]} lies in the probe {cell}")
            k = sum(m for pt, m in d.points if in_rect(pt, cell))
            if k:
                out[(i, j)] = k
    return out


# --- file format -----------------------------------------------------------------


def _dec(text: str, line: int, source: str | None) -> int:
    text = text.strip()
    if text == "-":
        return MINUS
    if text == "+":
        return PLUS
    raise ParseError(f"decoration must be '+' or '-', got {text!r}", line, source)


def _value(text: str, line: int, source: str | None) -> XReal:
    try:
        return xreal(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad value {text.strip()!r}: {exc}", line, source) from None


def parse_diagram(text: str, source: str | None = None) -> DecoratedDiagram | UndecoratedDiagram:
    """Parse the line format; five columns give a decorated diagram, three an undecorated one."""
    decorated: Counter = Counter()
    plain: Counter = Counter()
    width = None
    lines = text.splitlines()
    if lines and lines[0].strip() == UNDECORATED_HEADER:
        width = 3
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split(",")
        if len(cols) not in (3, 5):
            raise ParseError(f"expected 3 or 5 comma-separated fields, got {len(cols)}", number, source)
        if width is not None and len(cols) != width:
            raise ParseError(f"expected {width} fields as in the records above, got {len(cols)}", number, source)
        width = len(cols)
        try:
            mult = int(cols[-1])
        except ValueError:
            raise ParseError(f"multiplicity {cols[-1].strip()!r} is not an integer", number, source) from None
        if mult < 1:
            raise ParseError("multiplicity must be positive", number, source)
        try:
            if width == 5:
                birth = DecoratedValue(_value(cols[0], number, source), _dec(cols[1], number, source))
                death = DecoratedValue(_value(cols[2], number, source), _dec(cols[3], number, source))
                decorated[DecoratedPoint(birth, death)] += mult
            else:
                p, q = _value(cols[0], number, source), _value(cols[1], number, source)
                if not p < q:
                    raise ValueError(f"point ({p}, {q}) is not above the diagonal")
                plain[(p, q)] += mult
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), number, source) from None
    if width == 3:
        return UndecoratedDiagram(tuple(plain.items()))
    return DecoratedDiagram(tuple(decorated.items()), note="read from file")


def format_diagram(d: DecoratedDiagram | UndecoratedDiagram | Barcode) -> str:
    lines = [UNDECORATED_HEADER if isinstance(d, UndecoratedDiagram) else HEADER]
    if isinstance(d, UndecoratedDiagram):
        for (p, q), k in d.points:
            lines.append(f"{format_xreal(p)},{format_xreal(q)},{k}")
    else:
        pts = d.items if isinstance(d, Barcode) else d.points
        for pt, k in pts:
            b, e = pt.birth, pt.death
            lines.append(
                f"{format_xreal(b.value)},{'+' if b.decoration == PLUS else '-'},"
                f"{format_xreal(e.value)},{'+' if e.decoration == PLUS else '-'},{k}"
            )
    return "\n".join(lines) + "\n"


def read_diagram(path: str | Path) -> DecoratedDiagram | UndecoratedDiagram:
    path = Path(path)
    return parse_diagram(path.read_text(), source=str(path))


def write_diagram(path: str | Path, d) -> None:
    Path(path).write_text(format_diagram(d))
