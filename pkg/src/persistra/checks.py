"""Randomized property suites, one per area, run by ``persistra check`` and the tests.

Every property draws its cases from a ``random.Random`` seeded by the suite
seed and the property name, so results are reproducible given ``--seed``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .diagram import extract_diagram, format_diagram, parse_diagram, undecorate
from .errors import InstanceTooLarge
from .filtration import lower_star, persistence, sublevel_rank_oracle
from .geometry import INF, PLUS, MINUS, DecoratedPoint, DecoratedValue, Rect, compare_decorated, in_rect, point_in_rect, split_rect
from .interleaving import (
    barcodes_interleaved,
    box_check,
    box_check_at_infinity,
    canonical_interleaving,
    lattice_for,
    smooth,
    truncate,
    verify_interleaving,
)
from .interpolation import interpolate
from .measure import (
    check_monotone,
    check_subadditive,
    check_tiling_additivity,
    measure_of_barcode,
    measure_of_grid_module,
)
from .metrics import HALF_PLANE, bottleneck, brute_force_bottleneck, exists_delta_matching, translate_diagram
from .quiver import Barcode, FieldSpec, GF2, bracket_multiplicity, decompose, direct_sum, localization_multiplicity, rank_between, sample_barcode
from . import sampling

GF3 = FieldSpec(3)
FULL_PLANE = Rect(-INF, INF, -INF, INF)


class Skip(Exception):
    """Raised by a property body when a drawn case falls outside the property's scope."""


@dataclass
class PropertyResult:
    suite: str
    name: str
    cases: int
    failures: list = field(default_factory=list)
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f", {self.skipped} skipped" if self.skipped else ""
        first = f" -- {self.failures[0]}" if self.failures else ""
        return f"[{status}] {self.suite}.{self.name}: {self.cases} cases{extra}{first}"


def _run(suite: str, name: str, seed: int, cases: int, body: Callable[[random.Random], str | None]) -> PropertyResult:
    rng = random.Random(f"{seed}/{suite}/{name}")
    result = PropertyResult(suite, name, cases)
    for k in range(cases):
        try:
            message = body(rng)
        except Skip:
            result.skipped += 1
            continue
        if message:
            result.failures.append(f"case {k}: {message}")
    return result


QUARTERS = sampling.grid_values(0, 10, Fraction(1, 4))
HALVES = sampling.grid_values(-2, 8, Fraction(1, 2))


# --- geometry ------------------------------------------------------------------------------


def _decorated_order(rng):
    x, y, z = (sampling.random_decorated_value(rng, HALVES[:6]) for _ in range(3))
    if sum([x < y, x == y, x > y]) != 1:
        return f"trichotomy fails for {x}, {y}"
    if (x <= y and y <= x) and x != y:
        return f"antisymmetry fails for {x}, {y}"
    if x <= y <= z and not x <= z:
        return f"transitivity fails for {x}, {y}, {z}"
    if compare_decorated(x, y) != (x > y) - (x < y):
        return "three-way comparison disagrees with the order"
    return None


def _nested_membership(rng):
    values = HALVES[:10]
    pt = sampling.random_interval(rng, values)
    inner = sampling.random_rect(rng, values)
    # grow outward while keeping b <= c, so the outer rectangle stays in the half-plane
    a = rng.choice([v for v in HALVES if v <= inner.a])
    b = rng.choice([v for v in values if inner.b <= v <= inner.c])
    c = rng.choice([v for v in values if b <= v <= inner.c])
    d = rng.choice([v for v in HALVES if v >= inner.d])
    outer = Rect(a, b, c, d)
    if point_in_rect(pt, inner) and not point_in_rect(pt, outer):
        return f"{pt} in {inner} but not in {outer}"
    return None


def _split_partition(rng):
    values = HALVES[:10]
    r = sampling.random_rect(rng, values)
    axis = rng.choice("xy")
    lo, hi = (r.a, r.b) if axis == "x" else (r.c, r.d)
    inside = sampling.grid_values(lo, hi, Fraction(1, 4))[1:-1]
    first, second = split_rect(r, axis, rng.choice(inside))
    for _ in range(10):
        pt = sampling.random_interval(rng, values)
        halves = in_rect(pt, first) + in_rect(pt, second)
        if halves != (1 if in_rect(pt, r) else 0):
            return f"{pt} lies in {halves} halves of {r}"
    return None


def geometry_suite(seed: int, cases: int) -> list[PropertyResult]:
    return [
        _run("geometry", "decorated_total_order", seed, cases, _decorated_order),
        _run("geometry", "nested_rectangle_membership", seed, cases, _nested_membership),
        _run("geometry", "split_partitions_points", seed, cases, _split_partition),
    ]


# --- quiver ---------------------------------------------------------------------------------


def _random_module(rng):
    return sampling.random_grid_module(rng, rng.randint(1, 6), 4, rng.choice((GF2, GF3)))


def _rank_monotone(rng):
    m = _random_module(rng)
    n = len(m)
    a, b, c, d = sorted(rng.randint(0, n - 1) for _ in range(4))
    if rank_between(m, b, c) < rank_between(m, a, d):
        return f"rank({b},{c}) < rank({a},{d})"
    return None


def _grid_closed_barcode(rng, grid, max_intervals=5):
    n = len(grid)
    items = []
    for _ in range(rng.randint(0, max_intervals)):
        i = rng.randrange(n)
        j = rng.randrange(i, n)
        items.append((DecoratedPoint(DecoratedValue(grid[i], MINUS), DecoratedValue(grid[j], PLUS)), rng.randint(1, 3)))
    return Barcode(tuple(items))


def _decompose_roundtrip(rng):
    grid = sorted(rng.sample(QUARTERS, rng.randint(1, 6)))
    b = _grid_closed_barcode(rng, grid)
    back = decompose(sample_barcode(b, grid))
    return None if back == b else f"{b} came back as {back}"


def rank_formula(m, a: int, b: int, c: int, d: int) -> int:
    r = lambda s, t: rank_between(m, s, t)
    return r(b, c) - r(a, c) - r(b, d) + r(a, d)


def _brackets_vs_localization(rng):
    m = _random_module(rng)
    n = len(m)
    for i in range(n):
        for j in range(i, n):
            if bracket_multiplicity(m, i, j) != localization_multiplicity(m, i - 1, i, j, j + 1):
                return f"bracket [{i},{j}] disagrees"
    for a in range(-1, n):
        for b in range(a + 1, n):
            for c in range(b, n):
                for d in range(c + 1, n + 1):
                    if rank_formula(m, a, b, c, d) != localization_multiplicity(m, a, b, c, d):
                        return f"quadruple {(a, b, c, d)} disagrees"
    return None


def _direct_sum_brackets(rng):
    n = rng.randint(1, 5)
    field_spec = rng.choice((GF2, GF3))
    m1 = sampling.random_grid_module(rng, n, 3, field_spec)
    m2 = sampling.random_grid_module(rng, n, 3, field_spec)
    s = direct_sum(m1, m2)
    for i in range(n):
        for j in range(i, n):
            if bracket_multiplicity(s, i, j) != bracket_multiplicity(m1, i, j) + bracket_multiplicity(m2, i, j):
                return f"bracket [{i},{j}] is not additive"
    return None


def quiver_suite(seed: int, cases: int) -> list[PropertyResult]:
    return [
        _run("quiver", "rank_monotonicity", seed, cases, _rank_monotone),
        _run("quiver", "decompose_sample_roundtrip", seed, cases, _decompose_roundtrip),
        _run("quiver", "bracket_equals_localization", seed, cases, _brackets_vs_localization),
        _run("quiver", "direct_sum_additivity", seed, cases, _direct_sum_brackets),
    ]


# --- measure ---------------------------------------------------------------------------------


def _tiling(rng):
    mu = measure_of_barcode(sampling.random_barcode(rng))
    r = sampling.random_rect(rng, QUARTERS)
    xs = {v for v in QUARTERS if r.a < v < r.b}
    ys = {v for v in QUARTERS if r.c < v < r.d}
    xs = rng.sample(sorted(xs), min(len(xs), rng.randint(0, 3)))
    ys = rng.sample(sorted(ys), min(len(ys), rng.randint(0, 3)))
    return None if check_tiling_additivity(mu, r, xs, ys) else f"tiling of {r} at {xs}, {ys}"


def _monotone(rng):
    mu = measure_of_barcode(sampling.random_barcode(rng))
    inner = sampling.random_rect(rng, QUARTERS)
    gap = inner.c - inner.b
    grow_b = gap * Fraction(rng.randint(0, 4), 8)
    grow_c = gap * Fraction(rng.randint(0, 4), 8)
    outer = Rect(inner.a - rng.randint(0, 4), inner.b + grow_b, inner.c - grow_c, inner.d + rng.randint(0, 4))
    return None if check_monotone(mu, inner, outer) else f"{inner} inside {outer}"


def _subadditive(rng):
    mu = measure_of_barcode(sampling.random_barcode(rng))
    r = sampling.random_rect(rng, QUARTERS)
    cover = []
    x = r.a
    while x < r.b:
        nx = min(r.b, x + Fraction(rng.randint(1, 8), 4))
        y = r.c
        while y < r.d:
            ny = min(r.d, y + Fraction(rng.randint(1, 8), 4))
            # enlarge each tile a little so the cover overlaps
            cover.append(Rect(x - Fraction(rng.randint(0, 1), 4), nx, y, ny + Fraction(rng.randint(0, 1), 4)))
            y = ny
        x = nx
    return None if check_subadditive(mu, r, cover) else f"cover of {r}"


def _grid_module_matches_barcode(rng):
    grid = sorted(rng.sample(QUARTERS, rng.randint(1, 6)))
    b = _grid_closed_barcode(rng, grid)
    via_module = measure_of_grid_module(sample_barcode(b, grid))
    direct = measure_of_barcode(b)
    sides = [-INF] + grid + [INF]
    for _ in range(20):
        r = sampling.random_rect(rng, sides)
        if via_module(r) != direct(r):
            return f"{r}: module {via_module(r)} vs barcode {direct(r)}"
    return None


def _grid_module_vs_decomposition(rng):
    m = _random_module(rng)
    via_module = measure_of_grid_module(m)
    via_bars = measure_of_barcode(decompose(m))
    sides = [-INF] + list(m.grid) + [INF]
    if len(sides) < 3:
        raise Skip
    for _ in range(20):
        r = sampling.random_rect(rng, sides)
        if via_module(r) != via_bars(r):
            return f"{r}: {via_module(r)} vs {via_bars(r)}"
    return None


def measure_suite(seed: int, cases: int) -> list[PropertyResult]:
    return [
        _run("measure", "tiling_additivity", seed, cases, _tiling),
        _run("measure", "monotonicity", seed, cases, _monotone),
        _run("measure", "subadditivity", seed, cases, _subadditive),
        _run("measure", "sampled_module_measure", seed, cases, _grid_module_matches_barcode),
        _run("measure", "module_measure_vs_decomposition", seed, cases, _grid_module_vs_decomposition),
    ]


# --- diagram -------------------------------------------------------------------------------------


def _roundtrip(rng):
    b = sampling.random_barcode(rng, infinite_rate=0.1)
    got = extract_diagram(measure_of_barcode(b), FULL_PLANE)
    if got.singular or got.points != b.items:
        return f"{b} extracted as {got.points}"
    return None


def _counting(rng):
    b = sampling.random_barcode(rng)
    mu = measure_of_barcode(b)
    got = extract_diagram(mu, FULL_PLANE)
    for _ in range(10):
        r = sampling.random_rect(rng, QUARTERS)
        if sum(k for pt, k in got.points if in_rect(pt, r)) != mu(r):
            return f"count in {r} differs from the measure"
    return None


def _resolution_invariance(rng):
    mu = measure_of_barcode(sampling.random_barcode(rng, max_intervals=5))
    first = extract_diagram(mu, FULL_PLANE, Fraction(1, 64))
    second = extract_diagram(mu, FULL_PLANE, Fraction(1, 4096))
    return None if first == second else "extraction changed with the resolution"


def diagram_suite(seed: int, cases: int) -> list[PropertyResult]:
    return [
        _run("diagram", "extraction_roundtrip", seed, cases, _roundtrip),
        _run("diagram", "counting_consistency", seed, cases, _counting),
        _run("diagram", "resolution_invariance", seed, max(1, cases // 4), _resolution_invariance),
    ]


# --- metrics -------------------------------------------------------------------------------------


def _random_points(rng, max_points=4, lo=0, hi=6):
    values = sampling.grid_values(lo, hi, Fraction(1, 2))
    out = []
    for _ in range(rng.randint(0, max_points)):
        p, q = sorted(rng.sample(values, 2))
        out.append((p, q))
    return out


def _bottleneck_axioms(rng):
    a, b, c = (_random_points(rng) for _ in range(3))
    if bottleneck(a, a) != 0:
        return "d(A, A) is not zero"
    if bottleneck(a, b) != bottleneck(b, a):
        return "not symmetric"
    if bottleneck(a, c) > bottleneck(a, b) + bottleneck(b, c):
        return f"triangle inequality fails for {a}, {b}, {c}"
    return None


def _matching_monotone(rng):
    a, b = _random_points(rng), _random_points(rng)
    ds = sampling.grid_values(0, 4, Fraction(1, 4))
    found = [exists_delta_matching(a, HALF_PLANE, b, HALF_PLANE, d) is not None for d in ds]
    if any(x and not y for x, y in zip(found, found[1:])):
        return f"success is not monotone in delta for {a}, {b}"
    return None


def _bottleneck_vs_exhaustive(rng):
    a, b = _random_points(rng), _random_points(rng)
    fast, slow = bottleneck(a, b), brute_force_bottleneck(a, b)
    return None if fast == slow else f"{a} vs {b}: {fast} != {slow}"


def _half_plane_reduction(rng):
    a, b = _random_points(rng), _random_points(rng)
    d = Fraction(rng.randint(0, 8), 4)
    exists = exists_delta_matching(a, HALF_PLANE, b, HALF_PLANE, d) is not None
    return None if exists == (brute_force_bottleneck(a, b) <= d) else f"existence at {d} disagrees for {a}, {b}"


def metrics_suite(seed: int, cases: int) -> list[PropertyResult]:
    return [
        _run("metrics", "bottleneck_axioms", seed, cases, _bottleneck_axioms),
        _run("metrics", "matching_monotone_in_delta", seed, cases, _matching_monotone),
        _run("metrics", "bottleneck_equals_exhaustive", seed, cases, _bottleneck_vs_exhaustive),
        _run("metrics", "half_plane_matching_reduction", seed, cases, _half_plane_reduction),
    ]


# --- interleaving ------------------------------------------------------------------------------


def _smoothing_law(rng):
    b = sampling.random_barcode(rng, infinite_rate=0.1)
    eps = rng.choice((Fraction(1, 4), Fraction(1), Fraction(3)))
    got = undecorate(smooth(b, eps))
    want = translate_diagram(undecorate(b), eps)
    return None if got == want else f"eps={eps}: {got.points} vs {want.points}"


def _small_barcode(rng, max_intervals=2, hi=4, infinite_rate=0.0):
    return sampling.random_barcode(rng, max_intervals, 0, hi, 1, 1, decorated=True, infinite_rate=infinite_rate)


def _smoothing_interleaves(rng):
    b = _small_barcode(rng)
    eps = rng.choice((Fraction(1, 2), Fraction(1)))
    try:
        ok = barcodes_interleaved(b, smooth(b, eps), eps)
    except InstanceTooLarge:
        raise Skip from None
    return None if ok else f"{b} and its {eps}-smoothing are not {eps}-interleaved"


def _single(rng, hi=5):
    p, q = sorted(rng.sample(range(hi + 1), 2))
    return Barcode.of([DecoratedPoint(DecoratedValue(p, MINUS), DecoratedValue(q, MINUS))])


def _interpolation_stability(rng):
    u, v = _single(rng), _single(rng)
    delta = bottleneck(undecorate(u), undecorate(v))
    if delta == 0 or delta == INF:
        raise Skip
    phi, psi = canonical_interleaving(u, v, delta)
    xs = [delta * k / 4 for k in range(5)]
    fam = interpolate(u, v, phi, psi, delta, xs, rng.choice(("image", "kernel", "cokernel")))
    diagrams = [undecorate(b) for _, b in fam.samples]
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            gap = xs[j] - xs[i]
            if exists_delta_matching(diagrams[i], HALF_PLANE, diagrams[j], HALF_PLANE, gap) is None:
                return f"{fam.variant} samples {xs[i]} and {xs[j]} are not {gap}-matched"
    if fam.samples[0][1] != u or fam.samples[-1][1] != v:
        return "family endpoints differ from the inputs"
    return None


def _composition(rng):
    u, v, w = _single(rng), _single(rng), _single(rng)
    d1 = bottleneck(undecorate(u), undecorate(v))
    d2 = bottleneck(undecorate(v), undecorate(w))
    grid = lattice_for([u, v, w], d1 + d2, extra=(d1, d2))
    phi1, psi1 = canonical_interleaving(u, v, d1, grid)
    phi2, psi2 = canonical_interleaving(v, w, d2, grid)
    if verify_interleaving(phi1.then(phi2), psi2.then(psi1), d1 + d2):
        return None
    return f"composite of {d1}- and {d2}-interleavings fails at {d1 + d2}"


def _truncation_law(rng):
    b = sampling.random_barcode(rng, infinite_rate=0.1)
    at = rng.choice(QUARTERS)
    mu, cut = measure_of_barcode(b), measure_of_barcode(truncate(b, at))
    for _ in range(20):
        r = sampling.random_rect(rng, QUARTERS)
        if r.d <= at:
            want = mu(r)
        elif r.c <= at:
            want = mu(Rect(r.a, r.b, r.c, INF))
        else:
            want = 0
        if cut(r) != want:
            return f"T={at}, {r}: {cut(r)} != {want}"
    return None


def _box_inequalities(rng):
    b = sampling.random_barcode(rng, infinite_rate=0.2)
    eps = rng.choice((Fraction(1, 4), Fraction(1)))
    mu, nu = measure_of_barcode(b), measure_of_barcode(smooth(b, eps))
    for _ in range(10):
        r = sampling.random_rect(rng, QUARTERS)
        if not box_check(mu, nu, eps, r):
            return f"box inequality fails on {r}"
    for line in ("left", "right", "bottom", "top"):
        lo, hi = sorted(rng.sample(QUARTERS, 2))
        if not box_check_at_infinity(mu, nu, eps, line, (lo, hi)):
            return f"box inequality at infinity fails on the {line} line over [{lo},{hi}]"
    return None


def interleaving_suite(seed: int, cases: int) -> list[PropertyResult]:
    few = max(1, cases // 10)
    return [
        _run("interleaving", "smoothing_translates_diagram", seed, cases, _smoothing_law),
        _run("interleaving", "smoothing_interleaves", seed, few, _smoothing_interleaves),
        _run("interleaving", "interpolation_stability", seed, max(1, cases // 40), _interpolation_stability),
        _run("interleaving", "composition_of_interleavings", seed, few, _composition),
        _run("interleaving", "truncation_measure_law", seed, cases, _truncation_law),
        _run("interleaving", "box_inequalities", seed, cases, _box_inequalities),
    ]


# --- filtration ------------------------------------------------------------------------------------


def _cuts(values):
    crit = sorted(set(values))
    mids = [(x + y) / 2 for x, y in zip(crit, crit[1:])]
    return [crit[0] - 1] + mids + [crit[-1] + 1]


def _rank_cross_validation(rng):
    k = sampling.random_filtration(rng)
    bars = persistence(k)
    cuts = _cuts(k.values.values())
    for d, barcode in bars.items():
        for i, s in enumerate(cuts):
            for t in cuts[i:]:
                from_bars = sum(m for pt, m in barcode.items if pt.contains(s) and pt.contains(t))
                if from_bars != sublevel_rank_oracle(k, d, s, t):
                    return f"degree {d}, cuts {s} -> {t}"
    return None


def _euler(rng):
    k = sampling.random_filtration(rng)
    bars = persistence(k)
    for t in _cuts(k.values.values()):
        alive = sum((-1) ** d * sum(m for pt, m in b.items if pt.contains(t)) for d, b in bars.items())
        chi = sum((-1) ** (len(s) - 1) for s in k.sublevel(t))
        if alive != chi:
            return f"at {t}: bars give {alive}, complex has {chi}"
    return None


def _sublevel_stability(rng):
    simplices = sampling.random_complex(rng)
    values = sampling.random_vertex_values(rng, [s[0] for s in simplices if len(s) == 1])
    moved = sampling.perturb_values(rng, values, Fraction(1, 2))
    first, second = persistence(lower_star(values, simplices)), persistence(lower_star(moved, simplices))
    for d in range(2):
        a = undecorate(first.get(d, Barcode()))
        b = undecorate(second.get(d, Barcode()))
        if bottleneck(a, b) > Fraction(1, 2):
            return f"degree {d}: distance {bottleneck(a, b)}"
    return None


def _input_order(rng):
    from .filtration import FilteredComplex

    k = sampling.random_filtration(rng)
    entries = list(k)
    rng.shuffle(entries)
    return None if persistence(FilteredComplex(entries)) == persistence(k) else "listing order changed the barcode"


def filtration_suite(seed: int, cases: int) -> list[PropertyResult]:
    return [
        _run("filtration", "rank_cross_validation", seed, max(1, cases // 4), _rank_cross_validation),
        _run("filtration", "euler_characteristic", seed, cases, _euler),
        _run("filtration", "sublevel_stability", seed, cases, _sublevel_stability),
        _run("filtration", "listing_order_independence", seed, cases, _input_order),
    ]


# --- file formats -----------------------------------------------------------------------------------


def _diagram_file_roundtrip(rng):
    b = sampling.random_barcode(rng, step=Fraction(1, 3), infinite_rate=0.1)
    back = parse_diagram(format_diagram(b))
    if back.points != b.items:
        return "decorated diagram changed through its file form"
    plain = undecorate(b)
    if parse_diagram(format_diagram(plain)) != plain:
        return "undecorated diagram changed through its file form"
    return None


def io_suite(seed: int, cases: int) -> list[PropertyResult]:
    return [_run("io", "diagram_file_roundtrip", seed, cases, _diagram_file_roundtrip)]


SUITES: dict[str, Callable[[int, int], list[PropertyResult]]] = {
    "geometry": geometry_suite,
    "quiver": quiver_suite,
    "measure": measure_suite,
    "diagram": diagram_suite,
    "metrics": metrics_suite,
    "interleaving": interleaving_suite,
    "filtration": filtration_suite,
    "io": io_suite,
}


def run_suites(name: str = "all", seed: int = 0, cases: int = 200) -> list[PropertyResult]:
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise KeyError(f"unknown suite {name!r}; choose from all, {', '.join(SUITES)}")
    out = []
    for n in names:
        out.extend(SUITES[n](seed, cases))
    return out
