from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from persistra.diagram import (
    DecoratedDiagram,
    UndecoratedDiagram,
    diagram_of_barcode,
    extract_diagram,
    format_diagram,
    parse_diagram,
    snap,
    undecorate,
)
from persistra.errors import ContractViolation, ParseError
from persistra.geometry import INF, DecoratedPoint, Rect, in_rect, minus, plus
from persistra.measure import RMeasure, measure_of_barcode, webb_measure, WEBB_SINGULAR
from persistra.quiver import Barcode, decompose, sample_barcode
from tests.strategies import barcodes, half_plane_rects, quarters

EVERYWHERE = Rect(-INF, INF, -INF, INF)


def dp(b, d):
    return DecoratedPoint.of(b, d)


def test_diagram_of_barcode():
    bars = Barcode.of([dp("1-", "+inf"), dp("2-", "4-"), dp("3-", "5-")])
    assert diagram_of_barcode(bars).counter() == bars.counter()
    assert len(diagram_of_barcode(Barcode())) == 0
    one_point = diagram_of_barcode(Barcode.of([dp("2-", "2+")]))
    assert one_point.points == ((dp("2-", "2+"), 1),)


def test_undecorate_examples():
    assert undecorate(Barcode.of([dp("1-", "3-")])).points == (((1, 3), 1),)
    assert undecorate(Barcode.of([dp("2-", "2+")])).points == ()
    merged = undecorate(Barcode.of([dp("1-", "3-"), dp("1+", "3+")]))
    assert merged.points == (((1, 3), 2),)


def test_extraction_recovers_a_barcode_with_infinite_bars():
    bars = Barcode.of({dp("-inf", "2+"): 1, dp("0-", "+inf"): 2, dp("1+", "3/2-"): 1})
    assert extract_diagram(measure_of_barcode(bars), EVERYWHERE).points == bars.items


def test_webb_extraction():
    got = extract_diagram(webb_measure(), Rect(-Fraction(9, 2), -Fraction(1, 2), -Fraction(1, 2), Fraction(1, 2)))
    assert got.counter() == Counter({DecoratedPoint(plus(-n), plus(0)): 1 for n in range(1, 5)})
    assert not got.singular


def test_webb_singular_point_is_reported():
    got = extract_diagram(webb_measure(), Rect(-INF, -Fraction(1, 2), -Fraction(1, 2), Fraction(1, 2)))
    assert got.singular == {WEBB_SINGULAR}
    assert len(got) == 0


def test_zero_measure_gives_empty_diagram():
    assert len(extract_diagram(RMeasure(lambda r: 0), Rect(0, 4, 4, 8))) == 0


def test_non_additive_oracle_is_rejected():
    honest = measure_of_barcode(Barcode.of([dp("1-", "3-")]))
    broken = RMeasure(lambda r: honest(r) + 1, grid=(Fraction(1), Fraction(3)))
    with pytest.raises(ContractViolation):
        extract_diagram(broken, Rect(0, 2, 2, 4))


def test_snap_example():
    assert snap(DecoratedDiagram(((dp("1-", "3-"), 1),)), [1, 3]) == Counter({(0, 0): 1})
    assert snap(DecoratedDiagram(), [0, 1]) == Counter()


def test_snap_refuses_singular_probes():
    d = DecoratedDiagram(singular=frozenset({WEBB_SINGULAR}))
    with pytest.raises(ValueError):
        snap(d, [-1, 1])


def test_file_roundtrip_and_errors():
    bars = Barcode.of({dp("-inf", "1/3+"): 1, dp("2-", "+inf"): 3})
    text = format_diagram(bars)
    assert text.startswith("#persistra-diagram v1\n")
    assert parse_diagram(text).points == bars.items
    plain = UndecoratedDiagram.of([(0, 1), (0, 1), (2, 5)])
    assert parse_diagram(format_diagram(plain)) == plain
    assert parse_diagram(format_diagram(UndecoratedDiagram())) == UndecoratedDiagram()
    with pytest.raises(ParseError) as err:
        parse_diagram("#persistra-diagram v1\n0,-,1,-,1\n0,x,1,-,1\n", "d.csv")
    assert err.value.line == 3 and "d.csv:3" in str(err.value)
    with pytest.raises(ParseError):
        parse_diagram("1,2,3,4\n")
    with pytest.raises(ParseError):
        parse_diagram("2,1,1\n")


@given(barcodes(allow_infinite=True))
def test_extraction_roundtrip(b):
    assert extract_diagram(measure_of_barcode(b), EVERYWHERE).points == b.items


@given(barcodes(), st.lists(half_plane_rects(), min_size=1, max_size=5))
def test_counting_consistency(b, rects):
    mu = measure_of_barcode(b)
    got = extract_diagram(mu, EVERYWHERE)
    for r in rects:
        assert sum(k for pt, k in got.points if in_rect(pt, r)) == mu(r)


@settings(max_examples=25)
@given(barcodes(max_intervals=4))
def test_resolution_does_not_change_exact_extraction(b):
    mu = measure_of_barcode(b)
    assert extract_diagram(mu, EVERYWHERE, Fraction(1, 16)) == extract_diagram(mu, EVERYWHERE, Fraction(1, 1024))


@given(st.lists(quarters, min_size=1, max_size=5, unique=True), barcodes(max_intervals=5))
def test_snapping_matches_sampling(grid, b):
    grid = sorted(grid)
    snapped = snap(diagram_of_barcode(b), grid)
    sampled = decompose(sample_barcode(b, grid))
    expected = Counter()
    for pt, k in sampled.items:
        expected[(grid.index(pt.birth.value), grid.index(pt.death.value))] += k
    assert snapped == expected


@given(barcodes(allow_infinite=True))
def test_diagram_file_roundtrip(b):
    assert parse_diagram(format_diagram(b)).points == b.items
    plain = undecorate(b)
    assert parse_diagram(format_diagram(plain)) == plain
