"""Command-line entry point: ``persistra <command> ...``."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .diagram import DecoratedDiagram, UndecoratedDiagram, format_diagram, read_diagram, undecorate, write_diagram
from .errors import ContractViolation, ParseError
from .filtration import extended_persistence, parse_vertex_values, read_filtration, sublevel_persistence
from .geometry import Rect, format_xreal, xreal
from .interleaving import canonical_interleaving, smooth, truncate
from .interpolation import VARIANTS, interpolate, vineyard
from .measure import measure_of_barcode
from .metrics import bottleneck, translate_diagram
from .quiver import Barcode, FieldSpec

FORMATS = """\
file formats
  filtration (.flt)   one simplex per line: "simplex v0 v1 ... vk value"; the keyword
                      is optional, ids are nonnegative integers, values are rationals
                      such as 3, -1/2 or 0.25; "#" starts a comment.  Every face of a
                      simplex must be listed, with a value no larger than the simplex's.
  vertex values       one vertex per line: "vertex id value".
  diagram (.csv)      first line "#persistra-diagram v1"; then either decorated rows
                      "birth,dec,death,dec,multiplicity" with dec "+" or "-", or
                      undecorated rows "birth,death,multiplicity" (header then ends in
                      " undecorated").  Values are rationals, "-inf" or "+inf".
  vineyard (.csv)     "x,birth,death,track_id"; track_id -1 marks a trajectory that
                      enters or leaves through the diagonal.
  extended output     three diagram files <prefix>ord.csv, <prefix>rel.csv and
                      <prefix>ext.csv in chart coordinates: a value a stays a, the
                      point +inf is top+1 and the barred copy of a is 2*top+2-a, where
                      top is the largest vertex value (stated in a comment line).

exit status: 0 on success, 1 on a contract violation, 2 on a parse error.
"""


def _rational(text: str) -> Fraction:
    try:
        value = xreal(text)
    except (ValueError, ZeroDivisionError, TypeError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a rational number") from None
    if not isinstance(value, Fraction):
        raise argparse.ArgumentTypeError("an infinite value is not allowed here")
    return value


def _barcode_from(d) -> Barcode:
    if isinstance(d, UndecoratedDiagram):
        raise ContractViolation("this command needs a decorated diagram (five columns per row)")
    return d.to_barcode()


def _cmd_diagram(args) -> int:
    k = read_filtration(args.input)
    bars = sublevel_persistence(k, args.degree, FieldSpec(args.field))
    _emit(format_diagram(bars), args.out)
    return 0


def _cmd_bottleneck(args) -> int:
    first, second = (read_diagram(p) for p in (args.a, args.b))
    as_plain = lambda d: d if isinstance(d, UndecoratedDiagram) else undecorate(d)
    print(format_xreal(bottleneck(as_plain(first), as_plain(second))))
    return 0


def _cmd_smooth(args) -> int:
    d = read_diagram(args.input)
    if isinstance(d, UndecoratedDiagram):
        out = translate_diagram(d, args.epsilon)
    else:
        out = smooth(d.to_barcode(), args.epsilon)
    _emit(format_diagram(out), args.out)
    return 0


def _cmd_truncate(args) -> int:
    out = truncate(_barcode_from(read_diagram(args.input)), args.at)
    _emit(format_diagram(out), args.out)
    return 0


def _cmd_measure_probe(args) -> int:
    try:
        rect = Rect.parse(args.rect)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ParseError(f"bad rectangle {args.rect!r}: {exc}") from None
    mu = measure_of_barcode(_barcode_from(read_diagram(args.input)))
    print(format_xreal(mu(rect)))
    return 0


def _cmd_interpolate(args) -> int:
    u, v = (_barcode_from(read_diagram(p)) for p in (args.u, args.v))
    if args.steps < 2:
        raise ContractViolation("--steps must be at least 2")
    try:
        phi, psi = canonical_interleaving(u, v, args.delta)
    except ValueError as exc:
        raise ContractViolation(str(exc)) from None
    xs = [args.delta * k / (args.steps - 1) for k in range(args.steps)]
    family = interpolate(u, v, phi, psi, args.delta, xs, args.variant)
    for x, bars in family.samples:
        print(f"x={x}: {bars}")
    if args.vineyard:
        Path(args.vineyard).write_text(vineyard(family).to_csv())
    return 0


def _cmd_extended(args) -> int:
    k = read_filtration(args.input)
    values_path = Path(args.values)
    values = parse_vertex_values(values_path.read_text(), str(values_path))
    try:
        ep = extended_persistence(k.simplices, values, args.degree, FieldSpec(args.field))
    except ValueError as exc:
        raise ContractViolation(str(exc)) from None
    note = f"# chart: a -> a, +inf -> {ep.top + 1}, bar(a) -> {2 * ep.top + 2} - a\n"
    for name, bars in (("ord", ep.ordinary), ("rel", ep.relative), ("ext", ep.extended)):
        text = format_diagram(bars)
        header, _, body = text.partition("\n")
        Path(f"{args.out_prefix}{name}.csv").write_text(header + "\n" + note + body)
    for name in ("ordinary", "relative", "extended"):
        pairs = ", ".join(
            f"({_label(b)}, {_label(d)})" + (f" x{m}" if m > 1 else "") for (b, d), m in sorted(ep.pairs(name).items(), key=str)
        )
        print(f"{name}: {{{pairs}}}")
    return 0


def _label(decoded) -> str:
    kind, value = decoded
    if kind == "infinity":
        return "+inf"
    return f"~{value}" if kind == "bar" else str(value)


def _cmd_check(args) -> int:
    from .checks import run_suites

    try:
        results = run_suites(args.suite, args.seed, args.cases)
    except KeyError as exc:
        raise ContractViolation(exc.args[0]) from None
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} properties passed (seed {args.seed}, {args.cases} cases)")
    return 1 if failed else 0


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="persistra",
        description="Exact persistence diagrams, measures, matchings and interleavings.",
        epilog=FORMATS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str):
        return sub.add_parser(name, help=help_text, description=help_text, epilog=FORMATS,
                              formatter_class=argparse.RawDescriptionHelpFormatter)

    p = add("diagram", "sublevel-set barcode of a filtration file")
    p.add_argument("--input", required=True)
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--field", type=int, default=2, help="prime characteristic")
    p.add_argument("--out")
    p.set_defaults(run=_cmd_diagram)

    p = add("bottleneck", "exact bottleneck distance between two diagram files")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(run=_cmd_bottleneck)

    p = add("smooth", "shrink every interval by epsilon at both ends")
    p.add_argument("--epsilon", type=_rational, required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(run=_cmd_smooth)

    p = add("interpolate", "sample the interpolating family of the canonical interleaving")
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--delta", type=_rational, required=True)
    p.add_argument("--variant", choices=VARIANTS, default="image")
    p.add_argument("--steps", type=int, default=9, help="number of equally spaced samples in [0, delta]")
    p.add_argument("--vineyard", help="write trajectories to this CSV file")
    p.set_defaults(run=_cmd_interpolate)

    p = add("extended", "extended persistence of a lower-star filtration")
    p.add_argument("--input", required=True, help="filtration file giving the simplices")
    p.add_argument("--values", required=True, help="vertex value file")
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--field", type=int, default=2)
    p.add_argument("--out-prefix", default="ep_")
    p.set_defaults(run=_cmd_extended)

    p = add("truncate", "cut every interval off at a value T")
    p.add_argument("--at", type=_rational, required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(run=_cmd_truncate)

    p = add("measure-probe", "measure of one rectangle under a diagram's counting measure")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--rect", required=True, help="a,b,c,d for [a,b]x[c,d]; -inf and +inf allowed; write --rect=-1,... when a is negative")
    p.set_defaults(run=_cmd_measure_probe)

    p = add("check", "run the randomized property suites")
    p.add_argument("--suite", default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=200)
    p.set_defaults(run=_cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "field", None) is not None:
            FieldSpec(args.field)
        return args.run(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ContractViolation, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
