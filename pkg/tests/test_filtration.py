from collections import Counter
from fractions import Fraction
from pathlib import Path
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from persistra.diagram import undecorate
from persistra.errors import ParseError
from persistra.filtration import (
    FilteredComplex,
    closure,
    extended_module,
    extended_persistence,
    extended_rank_oracle,
    format_filtration,
    lower_star,
    parse_filtration,
    parse_vertex_values,
    persistence,
    read_filtration,
    sublevel_persistence,
    sublevel_rank_oracle,
)
from persistra.geometry import DecoratedPoint
from persistra.metrics import bottleneck
from persistra.quiver import Barcode, FieldSpec, rank_table
from persistra import sampling

FIXTURES = Path(__file__).parent / "fixtures"
GF3 = FieldSpec(3)


def bars(*pairs, field=FieldSpec(2)):
    return Barcode.of([DecoratedPoint.of(b, d) for b, d in pairs], field)


def test_morse_curve_fixture():
    k = read_filtration(FIXTURES / "morse.flt")
    assert sublevel_persistence(k, 0) == bars(("1-", "+inf"), ("2-", "4-"), ("3-", "5-"))
    assert sublevel_persistence(k, 1) == bars(("6-", "+inf"))
    assert sublevel_persistence(k, 1, GF3) == bars(("6-", "+inf"), field=GF3)


def test_single_vertex():
    k = parse_filtration("simplex 0 5/2\n")
    assert persistence(k) == {0: bars(("5/2-", "+inf"))}
    assert sublevel_persistence(k, 1) == Barcode.of([])


def test_parse_small_complex_with_comments():
    text = "simplex 0 0\nsimplex 1 0\nsimplex 0 1 1\n"
    noisy = "# two points and an edge\n\n0 0   # vertex\nsimplex 1 0.0\n\n1 0 1\n"
    k = parse_filtration(text)
    assert len(k) == 3 and k.dimension() == 1 and k.vertices() == [0, 1]
    assert list(parse_filtration(noisy)) == list(k)
    assert parse_filtration(format_filtration(k)).values == k.values


def test_edge_below_its_vertex_is_rejected_with_a_line_number():
    with pytest.raises(ParseError) as info:
        parse_filtration("simplex 0 1 0\nsimplex 0 0\nsimplex 1 1\n", "bad.flt")
    assert info.value.line == 1 and "bad.flt:1:" in str(info.value)


@pytest.mark.parametrize(
    "text, line",
    [
        ("simplex 0 0\nsimplex 0 1 1\n", 2),
        ("simplex 0 0\nsimplex 0 x\n", 2),
        ("simplex 0 0\n\nsimplex 0 1\n", 3),
        ("simplex 0 +inf\n", 1),
        ("simplex -1 0\n", 1),
        ("simplex 0 0 0\n", 1),
        ("simplex 3\n", 1),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        parse_filtration(text)
    assert info.value.line == line


def test_vertex_value_file():
    values = parse_vertex_values((FIXTURES / "hexagon.vals").read_text())
    assert values[5] == Fraction(1, 2) and len(values) == 6
    with pytest.raises(ParseError):
        parse_vertex_values("vertex 0 1\nvertex 0 2\n")
    with pytest.raises(ParseError):
        parse_vertex_values("vertex 0\n")


def test_complex_validation():
    with pytest.raises(ValueError):
        FilteredComplex([((0, 1), 1)])
    with pytest.raises(ValueError):
        FilteredComplex([((0,), 2), ((1,), 0), ((0, 1), 1)])
    k = FilteredComplex([((1,), 0), ((0,), 0), ((0, 1), 0)])
    assert k.simplices == ((0,), (1,), (0, 1))
    assert k.sublevel(-1) == [] and k.critical_values() == [0]


def test_lower_star_examples():
    path = lower_star({0: 0, 1: 1, 2: 2}, closure([(0, 1), (1, 2)]))
    assert path.values[(0, 1)] == 1 and path.values[(1, 2)] == 2
    flat = lower_star({0: 3, 1: 3, 2: 3}, closure([(0, 1, 2)]))
    assert set(flat.values.values()) == {3}
    with pytest.raises(ValueError):
        lower_star({0: 0}, closure([(0, 1)]))


def test_triangle_merge_order():
    # vertex 1 arrives before the edge (0, 1) at value 1, which kills it at once: no bar
    k = lower_star({0: 0, 1: 1, 2: 2}, closure([(0, 1, 2)]))
    assert sublevel_persistence(k, 0) == bars(("0-", "+inf"))
    split = lower_star({0: 0, 1: 1, 2: 2}, [(0,), (1,), (2,), (0, 2), (1, 2)])
    assert sublevel_persistence(split, 0) == bars(("0-", "+inf"), ("1-", "2-"))


def test_ties_do_not_change_the_barcode():
    simplices = closure([(0, 1), (1, 2), (0, 2)])
    k = lower_star({0: 0, 1: 0, 2: 0}, simplices)
    shuffled = FilteredComplex(reversed(list(k)))
    assert persistence(k) == persistence(shuffled)
    assert persistence(k)[1] == bars(("0-", "+inf"))


def _alive(b, t):
    return sum(1 for pt in b.expanded() if pt.contains(t))


def _checked_complexes(seed, count):
    rng = random.Random(f"filtration-tests/{seed}")
    return [sampling.random_filtration(rng) for _ in range(count)]


@pytest.mark.parametrize("field", [FieldSpec(2), GF3])
def test_reduction_agrees_with_rank_oracle(field):
    for k in _checked_complexes(field.characteristic, 25):
        cuts = k.critical_values()
        for degree in (0, 1):
            b = sublevel_persistence(k, degree, field)
            for i, s in enumerate(cuts):
                for t in cuts[i:]:
                    got = sum(1 for pt in b.expanded() if pt.contains(s) and pt.contains(t))
                    assert got == sublevel_rank_oracle(k, degree, s, t, field)


def test_euler_characteristic_is_conserved():
    for k in _checked_complexes(7, 30):
        by_degree = persistence(k)
        for t in k.critical_values():
            chi = sum((-1) ** (len(s) - 1) for s in k.sublevel(t))
            assert sum((-1) ** d * _alive(b, t) for d, b in by_degree.items()) == chi


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_sublevel_stability(seed):
    rng = random.Random(seed)
    simplices = sampling.random_complex(rng)
    values = sampling.random_vertex_values(rng, range(max(v for s in simplices for v in s) + 1))
    moved = sampling.perturb_values(rng, values, Fraction(1, 2))
    for degree in (0, 1):
        a = undecorate(sublevel_persistence(lower_star(values, simplices), degree)).expanded()
        b = undecorate(sublevel_persistence(lower_star(moved, simplices), degree)).expanded()
        assert bottleneck(a, b) <= Fraction(1, 2)


def test_hexagon_extended_persistence():
    k = read_filtration(FIXTURES / "hexagon.flt")
    values = parse_vertex_values((FIXTURES / "hexagon.vals").read_text())
    h0 = extended_persistence(k.simplices, values, 0)
    h1 = extended_persistence(k.simplices, values, 1)
    assert h0.pairs("extended") == Counter({(("real", 0), ("bar", 4)): 1})
    assert h1.pairs("extended") == Counter({(("real", 4), ("bar", 0)): 1})
    for ep in (h0, h1):
        assert len(ep.ordinary) == 0 and len(ep.relative) == 0
    for degree in (0, 1):
        module, *_ = extended_module(k.simplices, values, degree)
        assert np.array_equal(rank_table(module), extended_rank_oracle(k.simplices, values, degree))


def test_extended_persistence_of_a_point_and_two_points():
    one = extended_persistence([(0,)], {0: 5}, 0)
    assert one.pairs("extended") == Counter({(("real", 5), ("bar", 5)): 1})
    two = extended_persistence([(0,), (1,)], {0: 1, 1: 2}, 0)
    assert len(two.ordinary) == 0 and len(two.relative) == 0
    assert two.pairs("extended") == Counter({(("real", 1), ("bar", 1)): 1, (("real", 2), ("bar", 2)): 1})


def test_extended_persistence_with_ordinary_and_relative_pairs():
    simplices = closure([(0, 1), (1, 2)])
    for field in (FieldSpec(2), GF3):
        # two minima and one maximum: an ordinary pair in degree 0
        ep = extended_persistence(simplices, {0: 0, 1: 3, 2: 1}, 0, field)
        assert ep.pairs("ordinary") == Counter({(("real", 1), ("real", 3)): 1})
        assert ep.pairs("extended") == Counter({(("real", 0), ("bar", 3)): 1})
        assert ep.pairs("relative") == Counter()
        # two maxima and one minimum: the superlevel sets split, giving a relative pair in degree 1
        values = {0: 3, 1: 0, 2: 2}
        h0, h1 = (extended_persistence(simplices, values, d, field) for d in (0, 1))
        assert h0.pairs("ordinary") == Counter() and h0.pairs("extended") == Counter({(("real", 0), ("bar", 3)): 1})
        assert h1.pairs("relative") == Counter({(("bar", 2), ("bar", 0)): 1})
        assert h1.pairs("ordinary") == h1.pairs("extended") == Counter()
        for d in (0, 1):
            module, *_ = extended_module(simplices, values, d, field)
            assert np.array_equal(rank_table(module), extended_rank_oracle(simplices, values, d, field))


def test_random_extended_modules_match_the_rank_oracle():
    rng = random.Random("extended-oracle")
    for _ in range(15):
        simplices = sampling.random_complex(rng, 12, 5)
        values = sampling.random_vertex_values(rng, range(max(v for s in simplices for v in s) + 1))
        for degree in (0, 1):
            module, *_ = extended_module(simplices, values, degree)
            assert np.array_equal(rank_table(module), extended_rank_oracle(simplices, values, degree))
