"""Rectangle measures: counts of diagram points in closed rectangles.

A measure is an oracle ``Rect -> int | inf``.  Grid-aligned measures declare
the finite set of coordinates where their points can sit, which makes limits
(multiplicities, measures at infinity) computable from a single probe.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

from .errors import NonStabilization
from .geometry import INF, DecoratedPoint, Rect, XReal, in_rect, is_finite, minus, plus, split_rect, xreal
from .quiver import Barcode, GridModule, rank_table

Count = Union[int, float]

LINES = ("left", "right", "bottom", "top")
CORNERS = ("top-left", "top-right", "bottom-left", "bottom-right")


@dataclass(frozen=True)
class RMeasure:
    """A rectangle oracle with optional grid, local grid and known singular points.

    ``domain`` is ``"half-plane"`` (rectangles crossing the diagonal evaluate
    to infinity) or ``"plane"``.  ``local_grid(lo, hi)`` returns the support
    coordinates strictly between ``lo`` and ``hi`` when that set is finite and
    ``None`` otherwise.
    """

    evaluate: Callable[[Rect], Count]
    grid: tuple | None = None
    domain: str = "half-plane"
    local_grid: Callable[[XReal, XReal], list | None] | None = None
    singular: frozenset = frozenset()
    name: str = "measure"

    def __call__(self, r: Rect) -> Count:
        if self.domain == "half-plane" and not r.in_half_plane:
            return INF
        return self.evaluate(r)

    def grid_between(self, lo: XReal, hi: XReal) -> list | None:
        if self.grid is not None:
            i = bisect.bisect_right(self.grid, lo)
            j = bisect.bisect_left(self.grid, hi)
            return list(self.grid[i:j])
        if self.local_grid is not None:
            return self.local_grid(lo, hi)
        return None

    @property
    def grid_aligned(self) -> bool:
        return self.grid is not None or self.local_grid is not None


def measure_of_barcode(b: Barcode) -> RMeasure:
    items = b.items

    def evaluate(r: Rect) -> int:
        return sum(k for pt, k in items if in_rect(pt, r))

    return RMeasure(evaluate, grid=tuple(b.endpoints()), name="barcode")


def measure_of_grid_module(m: GridModule) -> RMeasure:
    """The four-term rank formula, with rectangle sides snapped onto the grid.

    A side used as the source of a structure map snaps down to the largest
    grid point at or below it; a side used as the target snaps up.
    """
    n = len(m)
    grid = m.grid
    table = rank_table(m)

    def down(s: XReal) -> int:
        return bisect.bisect_right(grid, s) - 1

    def up(t: XReal) -> int:
        return bisect.bisect_left(grid, t)

    def rank(s: XReal, t: XReal) -> int:
        return int(table[down(s) + 1, up(t) + 1])

    def evaluate(r: Rect) -> int:
        return rank(r.b, r.c) - rank(r.a, r.c) - rank(r.b, r.d) + rank(r.a, r.d)

    return RMeasure(evaluate, grid=grid, name="grid-module")


WEBB_SINGULAR = DecoratedPoint(plus(-INF), plus(0))


def webb_measure() -> RMeasure:
    """Closed-form measure with points ``(-n^+, 0^+)`` for ``n = 1, 2, ...``.

    Every rectangle containing the limit point ``(-inf, 0^+)`` has infinite mass.
    """

    def evaluate(r: Rect) -> Count:
        if in_rect(WEBB_SINGULAR, r):
            return INF
        if not (r.c <= 0 < r.d):
            return 0
        if not is_finite(r.a):
            # a = -inf but the singular point is excluded, so the death test failed above
            return 0
        lo = 1 if not is_finite(r.b) else max(1, math.floor(-r.b) + 1)
        hi = math.floor(-r.a)
        return max(0, hi - lo + 1)

    def local_grid(lo: XReal, hi: XReal) -> list | None:
        if not is_finite(lo):
            return None
        values = set(range(math.floor(lo) + 1, 0))
        values.add(0)
        return sorted(xreal(v) for v in values if lo < v < hi)

    return RMeasure(evaluate, local_grid=local_grid, singular=frozenset({WEBB_SINGULAR}), name="webb")


def _probe_rect(line: str, interval: tuple[XReal, XReal], far: XReal) -> Rect:
    lo, hi = interval
    if line == "left":
        return Rect(-INF, -far, lo, hi)
    if line == "right":
        return Rect(far, INF, lo, hi)
    if line == "bottom":
        return Rect(lo, hi, -INF, -far)
    if line == "top":
        return Rect(lo, hi, far, INF)
    raise ValueError(f"unknown line {line!r}; expected one of {LINES}")


def _on_line(pt: DecoratedPoint, line: str, interval: tuple[XReal, XReal]) -> bool:
    lo, hi = interval
    side = {"left": (pt.birth.value == -INF, pt.death), "right": (pt.birth.value == INF, pt.death),
            "bottom": (pt.death.value == -INF, pt.birth), "top": (pt.death.value == INF, pt.birth)}[line]
    at_line, other = side
    return at_line and plus(lo) <= other <= minus(hi)


def measure_at_infinity(mu: RMeasure, line: str, interval: Sequence, bound=None) -> Count:
    """Limit of the measure of rectangles shrinking onto a segment of a line at infinity.

    ``interval`` is ``(lo, hi)`` along the line.  Grid-aligned measures are
    probed once just beyond their extreme grid value; otherwise ``bound`` must
    say how far out the finite support ends, or a declared singular point on
    the segment must force the answer to be infinite.
    """
    lo, hi = (xreal(v) for v in interval)
    if not lo < hi:
        raise ValueError("interval must have lo < hi")
    finite_ends = [abs(v) for v in (lo, hi) if is_finite(v)]
    if mu.grid is not None:
        extent = max([abs(v) for v in mu.grid] + finite_ends + [0])
        return mu(_probe_rect(line, (lo, hi), extent + 1))
    if bound is not None:
        extent = max([abs(xreal(bound))] + finite_ends)
        first = mu(_probe_rect(line, (lo, hi), extent + 1))
        second = mu(_probe_rect(line, (lo, hi), extent + 2))
        if first != second:
            raise NonStabilization(f"probes beyond {extent} disagree ({first} vs {second})")
        return second
    if any(_on_line(pt, line, (lo, hi)) for pt in mu.singular):
        return INF
    raise NonStabilization("measure declares no grid and no stabilization bound was supplied")


def measure_at_corner(mu: RMeasure, corner: str, bound=None) -> Count:
    """Limit of the measure of quadrants shrinking onto a corner of the extended plane."""
    if mu.grid is not None:
        extent = max([abs(v) for v in mu.grid] + [0]) + 1
    elif bound is not None:
        extent = abs(xreal(bound)) + 1
    else:
        raise NonStabilization("measure declares no grid and no stabilization bound was supplied")
    vertical, horizontal = corner.split("-")
    a, b = (-INF, -extent) if horizontal == "left" else (extent, INF)
    c, d = (extent, INF) if vertical == "top" else (-INF, -extent)
    return mu(Rect(a, b, c, d))


def check_split_additivity(mu: RMeasure, r: Rect, axis: str, at) -> bool:
    first, second = split_rect(r, axis, at)
    return mu(r) == mu(first) + mu(second)


def check_tiling_additivity(mu: RMeasure, r: Rect, xs: Iterable, ys: Iterable) -> bool:
    """Finite additivity over the product tiling cut at interior coordinates ``xs`` and ``ys``."""
    xs = [r.a] + sorted(xreal(x) for x in xs) + [r.b]
    ys = [r.c] + sorted(xreal(y) for y in ys) + [r.d]
    total = sum(mu(Rect(x0, x1, y0, y1)) for x0, x1 in zip(xs, xs[1:]) for y0, y1 in zip(ys, ys[1:]))
    return mu(r) == total


def check_monotone(mu: RMeasure, inner: Rect, outer: Rect) -> bool:
    if not outer.contains_rect(inner):
        raise ValueError("inner rectangle is not contained in the outer one")
    return mu(inner) <= mu(outer)


def check_subadditive(mu: RMeasure, r: Rect, cover: Sequence[Rect]) -> bool:
    """``mu(r) <= sum of mu over the cover``; the caller guarantees the cover contains ``r``."""
    return mu(r) <= sum(mu(s) for s in cover)


def probe_tameness(mu: RMeasure, probes: Sequence[Rect]) -> list[str]:
    return ["infinite" if mu(r) == INF else "finite" for r in probes]
