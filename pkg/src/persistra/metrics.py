"""The d-infinity geometry of the extended plane, delta-matchings and the bottleneck distance.

Undecorated points are pairs ``(p, q)`` of extended rationals.  The metric
splits the extended plane into strata (the plane, four lines at infinity and
four corners); points in different strata are infinitely far apart.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .geometry import INF, XReal, is_finite, xreal
from .diagram import UndecoratedDiagram

Point = tuple  # (p, q)


def dinf(alpha: Point, beta: Point) -> XReal:
    """Stratum-aware l-infinity distance."""
    worst = Fraction(0)
    for x, y in zip(alpha, beta):
        if is_finite(x) and is_finite(y):
            worst = max(worst, abs(x - y))
        elif x != y:
            return INF
    return worst


def _in_interval(x: XReal, lo: XReal, hi: XReal) -> bool:
    # open interval of the extended line; an infinite end includes itself
    return (lo < x or x == lo == -INF) and (x < hi or x == hi == INF)


@dataclass(frozen=True)
class DomainSpec:
    """An open region of the extended half-plane ``p < q``.

    ``boxes`` is a union of open boxes ``(a, b) x (c, d)``; an infinite side
    contains the corresponding line at infinity.  The default single box
    covering everything gives the whole extended half-plane.
    """

    boxes: tuple = ((-INF, INF, -INF, INF),)
    label: str = "half-plane"

    @classmethod
    def half_plane(cls) -> "DomainSpec":
        return cls()

    @classmethod
    def truncated(cls, top) -> "DomainSpec":
        """``{p < q < T}``: the half-plane cut off above the horizontal line ``q = T``."""
        top = xreal(top)
        return cls(((-INF, INF, -INF, top),), f"half-plane below q={top}")

    @classmethod
    def union(cls, boxes: Iterable[Sequence]) -> "DomainSpec":
        parsed = tuple(tuple(xreal(v) for v in box) for box in boxes)
        for a, b, c, d in parsed:
            if not (a < b and c < d):
                raise ValueError(f"degenerate box {(a, b, c, d)}")
        return cls(parsed, "box union")

    def contains(self, alpha: Point) -> bool:
        p, q = alpha
        if not p < q:
            return False
        return any(_in_interval(p, a, b) and _in_interval(q, c, d) for a, b, c, d in self.boxes)

    def edges(self, axis: int) -> list:
        values = set()
        for box in self.boxes:
            for v in box[2 * axis: 2 * axis + 2]:
                if is_finite(v):
                    values.add(v)
        return sorted(values)


HALF_PLANE = DomainSpec()


def _axis_reps(center: XReal, radius: XReal, cuts: list) -> list:
    """Points representing every face of the arrangement of ``cuts`` inside the open ball."""
    if not is_finite(center):
        return [center]
    lo = center - radius if is_finite(radius) else -INF
    hi = center + radius if is_finite(radius) else INF
    inner = [x for x in cuts if lo < x < hi]
    fences = inner or [center]
    left = lo if is_finite(lo) else min(fences) - 1
    right = hi if is_finite(hi) else max(fences) + 1
    pts = [left] + inner + [right]
    reps = list(inner)
    reps.extend((x + y) / 2 for x, y in zip(pts, pts[1:]))
    return reps


def _ball_inside(alpha: Point, radius: XReal, dom: DomainSpec) -> bool:
    p, q = alpha
    if is_finite(p) and is_finite(q) and 2 * radius > q - p:
        return False
    xs = _axis_reps(p, radius, dom.edges(0))
    ys = _axis_reps(q, radius, dom.edges(1))
    return all(dom.contains((x, y)) for x in xs for y in ys)


def exit_distance(alpha: Point, dom: DomainSpec = HALF_PLANE) -> XReal:
    """d-infinity distance from ``alpha`` to the complement of ``dom``, within its stratum."""
    alpha = (xreal(alpha[0]), xreal(alpha[1]))
    if not dom.contains(alpha):
        raise ValueError(f"point {alpha} is outside the domain ({dom.label})")
    p, q = alpha
    if dom == HALF_PLANE:
        return (q - p) / 2 if is_finite(p) and is_finite(q) else INF
    candidates = {INF}
    if is_finite(p) and is_finite(q):
        candidates.add((q - p) / 2)
    if is_finite(p):
        candidates.update(abs(p - x) for x in dom.edges(0))
    if is_finite(q):
        candidates.update(abs(q - y) for y in dom.edges(1))
    best = Fraction(0)
    for r in sorted(c for c in candidates if c > 0):
        if _ball_inside(alpha, r, dom):
            best = r
        else:
            break
    return best


def _reverse_offset_inside(sub: DomainSpec, delta: XReal, sup: DomainSpec) -> bool:
    """Whether ``sub`` shrunk by ``delta`` at its boundary lies inside ``sup``."""
    if sub == sup:
        return True
    xcuts = set(sub.edges(0)) | set(sup.edges(0))
    ycuts = set(sub.edges(1)) | set(sup.edges(1))
    for v in list(xcuts):
        xcuts.update((v - delta, v + delta))
    for v in list(ycuts):
        ycuts.update((v - delta, v + delta))
    # the two diagonal boundaries q = p and q = p + 2 delta meet every axis cut at a vertex
    for v in list(xcuts):
        ycuts.update((v, v + 2 * delta))
    for v in list(ycuts):
        xcuts.update((v, v - 2 * delta))

    def reps(cuts: set) -> list:
        pts = sorted(cuts) or [Fraction(0)]
        pts = [pts[0] - 1] + pts + [pts[-1] + 1]
        out = [-INF, INF] + pts
        for x, y in zip(pts, pts[1:]):
            w = y - x
            out.extend((x + w / 4, x + w / 2, x + 3 * w / 4))
        return out

    for x in reps(xcuts):
        for y in reps(ycuts):
            alpha = (x, y)
            if sub.contains(alpha) and exit_distance(alpha, sub) > delta and not sup.contains(alpha):
                return False
    return True


@dataclass(frozen=True)
class Matching:
    """A partial matching between the expanded point lists of two diagrams."""

    pairs: tuple
    unmatched_a: tuple
    unmatched_b: tuple
    delta: XReal
    a_points: tuple = field(default=(), repr=False)
    b_points: tuple = field(default=(), repr=False)
    dom_a: DomainSpec = field(default=HALF_PLANE, repr=False)
    dom_b: DomainSpec = field(default=HALF_PLANE, repr=False)

    def __post_init__(self) -> None:
        seen_a = [i for i, _ in self.pairs] + list(self.unmatched_a)
        seen_b = [j for _, j in self.pairs] + list(self.unmatched_b)
        if len(set(seen_a)) != len(seen_a) or len(set(seen_b)) != len(seen_b):
            raise ValueError("a point appears twice in the matching")
        if sorted(seen_a) != list(range(len(self.a_points))) or sorted(seen_b) != list(range(len(self.b_points))):
            raise ValueError("every point must be either paired or listed as unmatched")

    def to_csv(self) -> str:
        rows = ["a_index,b_index"]
        rows += [f"{i},{j}" for i, j in sorted(self.pairs)]
        rows += [f"{i},-1" for i in sorted(self.unmatched_a)]
        rows += [f"-1,{j}" for j in sorted(self.unmatched_b)]
        return "\n".join(rows) + "\n"


def _points(d) -> tuple:
    if isinstance(d, UndecoratedDiagram):
        return tuple(d.expanded())
    return tuple((xreal(p), xreal(q)) for p, q in d)


def is_delta_matching(m: Matching, delta=None) -> bool:
    """Check the conditions for an (unequal-domain) delta-matching."""
    delta = m.delta if delta is None else xreal(delta)
    if not _reverse_offset_inside(m.dom_b, delta, m.dom_a) or not _reverse_offset_inside(m.dom_a, delta, m.dom_b):
        return False
    if any(dinf(m.a_points[i], m.b_points[j]) > delta for i, j in m.pairs):
        return False
    for i in m.unmatched_a:
        alpha = m.a_points[i]
        if m.dom_b.contains(alpha) and exit_distance(alpha, m.dom_b) > delta:
            return False
    for j in m.unmatched_b:
        beta = m.b_points[j]
        if m.dom_a.contains(beta) and exit_distance(beta, m.dom_a) > delta:
            return False
    return True


def _must_match(points: Sequence, other: DomainSpec, delta: XReal) -> list[bool]:
    return [other.contains(x) and exit_distance(x, other) > delta for x in points]


def exists_delta_matching(a, dom_a: DomainSpec, b, dom_b: DomainSpec, delta) -> Matching | None:
    """A delta-matching between ``(a, dom_a)`` and ``(b, dom_b)`` if one exists.

    Reduction to a perfect matching: every point gets a diagonal twin on the
    other side, usable only when the point may stay unmatched; twins pair
    freely among themselves.
    """
    delta = xreal(delta)
    pa, pb = _points(a), _points(b)
    for x in pa:
        if not dom_a.contains(x):
            raise ValueError(f"point {x} lies outside its domain ({dom_a.label})")
    for y in pb:
        if not dom_b.contains(y):
            raise ValueError(f"point {y} lies outside its domain ({dom_b.label})")
    if not (_reverse_offset_inside(dom_b, delta, dom_a) and _reverse_offset_inside(dom_a, delta, dom_b)):
        return None
    n, m = len(pa), len(pb)
    must_a = _must_match(pa, dom_b, delta)
    must_b = _must_match(pb, dom_a, delta)
    # rows: a_0..a_{n-1}, twins of b; columns: b_0..b_{m-1}, twins of a
    rows, cols = [], []
    for i, x in enumerate(pa):
        for j, y in enumerate(pb):
            if dinf(x, y) <= delta:
                rows.append(i)
                cols.append(j)
        if not must_a[i]:
            rows.append(i)
            cols.append(m + i)
    for j in range(m):
        if not must_b[j]:
            rows.append(n + j)
            cols.append(j)
        for i in range(n):
            rows.append(n + j)
            cols.append(m + i)
    size = n + m
    if size == 0:
        return Matching((), (), (), delta, pa, pb, dom_a, dom_b)
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
    match = maximum_bipartite_matching(graph, perm_type="column")
    if (match < 0).any():
        return None
    pairs = tuple((i, int(match[i])) for i in range(n) if match[i] < m)
    unmatched_a = tuple(i for i in range(n) if match[i] >= m)
    matched_b = {j for _, j in pairs}
    unmatched_b = tuple(j for j in range(m) if j not in matched_b)
    return Matching(pairs, unmatched_a, unmatched_b, delta, pa, pb, dom_a, dom_b)


def _candidates(pa: Sequence, pb: Sequence, dom_a: DomainSpec, dom_b: DomainSpec) -> list:
    values = {Fraction(0)}
    for x in pa:
        for y in pb:
            values.add(dinf(x, y))
    for x in pa:
        if dom_b.contains(x):
            values.add(exit_distance(x, dom_b))
    for y in pb:
        if dom_a.contains(y):
            values.add(exit_distance(y, dom_a))
    return sorted(v for v in values if is_finite(v))


def bottleneck(a, b, dom: DomainSpec = HALF_PLANE) -> XReal:
    """Exact bottleneck distance: binary search over the finite set of candidate values."""
    pa, pb = _points(a), _points(b)
    cands = _candidates(pa, pb, dom, dom)
    lo, hi = 0, len(cands) - 1
    if exists_delta_matching(pa, dom, pb, dom, cands[hi]) is None:
        return INF
    while lo < hi:
        mid = (lo + hi) // 2
        if exists_delta_matching(pa, dom, pb, dom, cands[mid]) is not None:
            hi = mid
        else:
            lo = mid + 1
    return cands[lo]


def optimal_matching(a, b, delta, dom: DomainSpec = HALF_PLANE) -> Matching | None:
    """A delta-matching pairing as many points as possible, then minimising total displacement.

    Existence is decided by :func:`exists_delta_matching`; the assignment
    solver only chooses among valid matchings.
    """
    delta = xreal(delta)
    pa, pb = _points(a), _points(b)
    if exists_delta_matching(pa, dom, pb, dom, delta) is None:
        return None
    n, m = len(pa), len(pb)
    if n + m == 0:
        return Matching((), (), (), delta, pa, pb, dom, dom)
    big = 1e12
    leave = 4.0 * (float(delta) + 1.0)
    cost = np.full((n + m, m + n), big)
    for i, x in enumerate(pa):
        for j, y in enumerate(pb):
            d = dinf(x, y)
            if d <= delta:
                cost[i, j] = float(d)
        if not (dom.contains(x) and exit_distance(x, dom) > delta):
            cost[i, m + i] = leave
    for j, y in enumerate(pb):
        if not (dom.contains(y) and exit_distance(y, dom) > delta):
            cost[n + j, j] = leave
        cost[n + j, m:] = 0.0
    rows, cols = linear_sum_assignment(cost)
    if cost[rows, cols].max() >= big:
        return exists_delta_matching(pa, dom, pb, dom, delta)
    assignment = dict(zip(rows.tolist(), cols.tolist()))
    pairs = tuple((i, assignment[i]) for i in range(n) if assignment[i] < m)
    matched_b = {j for _, j in pairs}
    result = Matching(
        pairs,
        tuple(i for i in range(n) if assignment[i] >= m),
        tuple(j for j in range(m) if j not in matched_b),
        delta, pa, pb, dom, dom,
    )
    return result if is_delta_matching(result) else exists_delta_matching(pa, dom, pb, dom, delta)


def compose_matchings(m1: Matching, m2: Matching) -> Matching:
    """Link pairs through the shared middle diagram; the bound is the sum of the two."""
    if sorted(m1.b_points) != sorted(m2.a_points) or len(m1.b_points) != len(m2.a_points):
        raise ValueError("the matchings do not share their middle diagram")
    # identical middle points may be listed in different orders; align them by value
    slots: dict = {}
    for k, pt in enumerate(m2.a_points):
        slots.setdefault(pt, []).append(k)
    relabel = {}
    for k, pt in enumerate(m1.b_points):
        relabel[k] = slots[pt].pop(0)
    second = dict(m2.pairs)
    pairs = []
    for i, j in m1.pairs:
        k = relabel[j]
        if k in second:
            pairs.append((i, second[k]))
    linked_a = {i for i, _ in pairs}
    linked_c = {k for _, k in pairs}
    return Matching(
        tuple(pairs),
        tuple(i for i in range(len(m1.a_points)) if i not in linked_a),
        tuple(k for k in range(len(m2.b_points)) if k not in linked_c),
        m1.delta + m2.delta,
        m1.a_points,
        m2.b_points,
        m1.dom_a,
        m2.dom_b,
    )


def brute_force_bottleneck(a, b) -> XReal:
    """Minimum over every partial matching of its cost; exponential, for small oracles only."""
    pa, pb = _points(a), _points(b)

    def exit_cost(x):
        return exit_distance(x, HALF_PLANE)

    best = INF

    def search(i: int, used: frozenset, cost) -> None:
        nonlocal best
        if cost >= best:
            return
        if i == len(pa):
            rest = [exit_cost(pb[j]) for j in range(len(pb)) if j not in used]
            best = min(best, max([cost] + rest))
            return
        search(i + 1, used, max(cost, exit_cost(pa[i])))
        for j in range(len(pb)):
            if j not in used:
                search(i + 1, used | {j}, max(cost, dinf(pa[i], pb[j])))

    search(0, frozenset(), Fraction(0))
    return best


def translate_diagram(d: UndecoratedDiagram, eps) -> UndecoratedDiagram:
    """Apply ``(p, q) -> (p + eps, q - eps)`` to the points strictly above the line ``q - p = 2 eps``."""
    eps = xreal(eps)
    out = []
    for (p, q), k in d.points:
        if not is_finite(p) or not is_finite(q) or q - p > 2 * eps:
            out.append(((p + eps, q - eps), k))
    return UndecoratedDiagram(tuple(out))
