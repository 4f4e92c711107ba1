"""Exact persistence diagrams, rectangle measures, matchings and interleavings over the rationals."""

from .diagram import (
    DecoratedDiagram,
    UndecoratedDiagram,
    diagram_of_barcode,
    extract_diagram,
    format_diagram,
    parse_diagram,
    read_diagram,
    snap,
    undecorate,
    write_diagram,
)
from .errors import ContractViolation, InstanceTooLarge, NonStabilization, ParseError
from .filtration import (
    ExtendedPersistence,
    FilteredComplex,
    extended_persistence,
    lower_star,
    parse_filtration,
    parse_vertex_values,
    persistence,
    sublevel_persistence,
)
from .geometry import INF, MINUS, PLUS, DecoratedPoint, DecoratedValue, Rect, compare_decorated, minus, plus, point_in_rect
from .interleaving import (
    ShiftedHom,
    barcodes_interleaved,
    box_check,
    brute_force_interleaving_exists,
    canonical_interleaving,
    smooth,
    truncate,
    verify_interleaving,
)
from .interpolation import InterpolationFamily, Vineyard, interpolate, vineyard
from .measure import RMeasure, measure_at_infinity, measure_of_barcode, measure_of_grid_module, probe_tameness, webb_measure
from .metrics import DomainSpec, HALF_PLANE, Matching, bottleneck, exists_delta_matching, exit_distance
from .quiver import Barcode, FieldSpec, GF2, GridModule, decompose, sample_barcode

__version__ = "0.1.0"
