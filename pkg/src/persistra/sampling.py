"""Seeded random instances used by the property suites and the acceptance runner."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from . import gf
from .geometry import INF, MINUS, PLUS, DecoratedPoint, DecoratedValue, Rect, minus
from .quiver import Barcode, FieldSpec, GF2, GridModule


def grid_values(lo, hi, step) -> list[Fraction]:
    lo, hi, step = Fraction(lo), Fraction(hi), Fraction(step)
    n = int((hi - lo) / step)
    return [lo + k * step for k in range(n + 1)]


def random_decorated_value(rng: random.Random, values) -> DecoratedValue:
    return DecoratedValue(rng.choice(values), rng.choice((MINUS, PLUS)))


def random_interval(rng: random.Random, values, decorated: bool = True, infinite_rate: float = 0.0) -> DecoratedPoint:
    while True:
        p, q = rng.choice(values), rng.choice(values)
        if rng.random() < infinite_rate:
            q = INF
        if decorated:
            birth = DecoratedValue(p, rng.choice((MINUS, PLUS)))
            death = DecoratedValue(q, MINUS if q == INF else rng.choice((MINUS, PLUS)))
        else:
            birth, death = minus(p), minus(q)
        if birth < death:
            return DecoratedPoint(birth, death)


def random_barcode(
    rng: random.Random,
    max_intervals: int = 10,
    lo=0,
    hi=10,
    step=Fraction(1, 4),
    max_mult: int = 3,
    decorated: bool = True,
    infinite_rate: float = 0.0,
    field: FieldSpec = GF2,
) -> Barcode:
    values = grid_values(lo, hi, step)
    items = [
        (random_interval(rng, values, decorated, infinite_rate), rng.randint(1, max_mult))
        for _ in range(rng.randint(0, max_intervals))
    ]
    return Barcode(tuple(items), field)


def random_rect(rng: random.Random, values, half_plane: bool = True) -> Rect:
    """A rectangle with sides drawn from ``values``; in the half-plane unless told otherwise."""
    while True:
        a, b = sorted(rng.sample(values, 2))
        c, d = sorted(rng.sample(values, 2))
        if not half_plane or b <= c:
            return Rect(a, b, c, d)


def random_grid_module(rng: random.Random, n: int, max_dim: int, field: FieldSpec = GF2) -> GridModule:
    p = field.characteristic
    dims = [rng.randint(0, max_dim) for _ in range(n)]
    steps = [
        [[rng.randrange(p) for _ in range(dims[i])] for _ in range(dims[i + 1])] for i in range(n - 1)
    ]
    steps = [gf.as_matrix(s, p, (dims[i + 1], dims[i])) for i, s in enumerate(steps)]
    return GridModule(list(range(n)), dims, steps, field)


def random_complex(rng: random.Random, max_simplices: int = 20, max_vertices: int = 6) -> list[tuple]:
    """A face-closed simplicial complex of dimension at most 2, listed by simplices."""
    n = rng.randint(1, max_vertices)
    simplices = [(v,) for v in range(n)]
    edges = [e for e in combinations(range(n), 2) if rng.random() < 0.6]
    for e in edges:
        if len(simplices) >= max_simplices:
            break
        simplices.append(e)
    present = set(simplices)
    for tri in combinations(range(n), 3):
        if len(simplices) >= max_simplices:
            break
        if all(f in present for f in combinations(tri, 2)) and rng.random() < 0.5:
            simplices.append(tri)
    return simplices


def random_vertex_values(rng: random.Random, vertices, lo=0, hi=6, step=Fraction(1, 2)) -> dict[int, Fraction]:
    values = grid_values(lo, hi, step)
    return {v: rng.choice(values) for v in vertices}


def perturb_values(rng: random.Random, values: dict, delta, step=Fraction(1, 4)) -> dict[int, Fraction]:
    """Move each value by a multiple of ``step`` of size at most ``delta``."""
    moves = grid_values(-Fraction(delta), Fraction(delta), step)
    return {v: a + rng.choice(moves) for v, a in values.items()}


def random_filtration(rng: random.Random, max_simplices: int = 20, max_vertices: int = 6):
    """A random complex with random monotone values (not necessarily lower-star)."""
    from .filtration import FilteredComplex

    simplices = random_complex(rng, max_simplices, max_vertices)
    values: dict[tuple, Fraction] = {}
    for s in simplices:
        floor = max((values[f] for f in combinations(s, len(s) - 1)), default=Fraction(0)) if len(s) > 1 else Fraction(0)
        values[s] = floor + Fraction(rng.randint(0, 4), 2)
    return FilteredComplex(values.items())
