"""Shifted homomorphisms on uniform lattices, interleavings, smoothing, truncation and box checks.

Barcodes are turned into grid modules by sampling on a lattice ``hZ`` whose
even points ``2hZ`` contain every finite endpoint.  Odd lattice points stand
for the open gaps between endpoints, so open and closed ends stay distinct
and a lattice module determines the barcode it came from.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import gf
from .errors import ContractViolation, InstanceTooLarge
from .geometry import INF, DecoratedPoint, DecoratedValue, Rect, XReal, is_finite, minus, plus, thicken, xreal
from .measure import RMeasure, measure_at_corner, measure_at_infinity
from .metrics import HALF_PLANE, exists_delta_matching
from .quiver import Barcode, GridModule, decompose, sample_barcode

MAX_FREE_ENTRIES = 24


# --- lattices -------------------------------------------------------------------


def _fraction_gcd(values: Iterable[Fraction]) -> Fraction:
    values = [abs(Fraction(v)) for v in values if v != 0]
    if not values:
        return Fraction(0)
    den = math.lcm(*(v.denominator for v in values))
    num = math.gcd(*(int(v * den) for v in values))
    return Fraction(num, den)


def lattice_step(barcodes: Sequence[Barcode], extra: Iterable = ()) -> Fraction:
    """Half the largest step whose multiples contain every endpoint and every extra value."""
    values = [v for b in barcodes for v in b.endpoints()] + [xreal(v) for v in extra]
    g = _fraction_gcd(v for v in values if is_finite(v))
    return (g if g else Fraction(1)) / 2


def lattice_for(barcodes: Sequence[Barcode], delta=0, extra: Iterable = (), pad=None) -> tuple:
    """A window of the lattice ``hZ`` around all endpoints, padded by ``4*delta + 2h`` by default."""
    delta = xreal(delta)
    extra = list(extra)
    h = lattice_step(barcodes, [delta] + extra)
    ends = [v for b in barcodes for v in b.endpoints()] or [Fraction(0)]
    pad = 4 * delta + 2 * h if pad is None else xreal(pad)
    lo = math.floor((min(ends) - pad) / (2 * h)) * 2
    hi = math.ceil((max(ends) + pad) / (2 * h)) * 2
    return tuple(m * h for m in range(lo, hi + 1))


def _uniform_spacing(grid: Sequence) -> Fraction:
    if len(grid) < 2:
        raise ValueError("a lattice needs at least two points")
    h = grid[1] - grid[0]
    if any(y - x != h for x, y in zip(grid, grid[1:])):
        raise ValueError("grid is not a uniform lattice")
    return h


def lattice_spacing(grid: Sequence) -> Fraction:
    h = _uniform_spacing(grid)
    if (grid[0] / h).denominator != 1 or (grid[0] / h) % 2:
        raise ValueError("lattice must start at an even multiple of its spacing")
    return h


def _shift_index(grid: Sequence, delta: XReal) -> int:
    h = lattice_spacing(grid)
    k = xreal(delta) / h
    if k.denominator != 1 or k < 0:
        raise ValueError(f"degree {delta} is not a nonnegative multiple of the lattice spacing {h}")
    return int(k)


def decode_lattice_barcode(b: Barcode, grid: Sequence, first: int = 0, last: int | None = None) -> Barcode:
    """Turn closed lattice intervals back into decorated intervals of the real line.

    Bars touching the first or last sample are read as unbounded.
    """
    h = _uniform_spacing(grid)
    last = len(grid) - 1 if last is None else last
    lo, hi = grid[first], grid[last]
    out = []
    for pt, k in b.items:
        s, t = pt.birth.value, pt.death.value
        if s == lo:
            birth = plus(-INF)
        elif (s / h) % 2 == 0:
            birth = minus(s)
        else:
            birth = plus(s - h)
        if t == hi:
            death = minus(INF)
        elif (t / h) % 2 == 0:
            death = plus(t)
        else:
            death = minus(t + h)
        out.append((DecoratedPoint(birth, death), k))
    return Barcode(tuple(out), b.field)


def _rho(s: Fraction, h: Fraction) -> Fraction:
    """The coarse lattice point standing for ``s``: itself if even, else the midpoint of its gap."""
    if (s / (2 * h)).denominator == 1:
        return s
    return 2 * h * math.floor(s / (2 * h)) + h


def refine_module(m: GridModule, step) -> GridModule:
    """Resample a coarse lattice module onto the finer lattice with spacing ``step``."""
    h = lattice_spacing(m.grid)
    step = xreal(step)
    ratio = h / step
    if ratio.denominator != 1:
        raise ValueError("the new spacing must divide the old one")
    count = int((m.grid[-1] - m.grid[0]) / step)
    fine = [m.grid[0] + i * step for i in range(count + 1)]
    src = [m.index_of(_rho(s, h)) for s in fine]
    steps = [m.structure_map(a, b) for a, b in zip(src, src[1:])]
    return GridModule(fine, [m.dims[i] for i in src], steps, m.field)


# --- shifted homomorphisms -----------------------------------------------------------


class ShiftedHom:
    """A degree-``delta`` homomorphism between two modules on one lattice.

    ``maps[i]`` goes from the source space at index ``i`` to the target space
    at ``i + k`` with ``k = delta / h``; indices whose image would leave the
    window carry no map.
    """

    __slots__ = ("source", "target", "delta", "shift", "maps")

    def __init__(self, source: GridModule, target: GridModule, delta, maps: Sequence):
        if source.grid != target.grid or source.field != target.field:
            raise ValueError("source and target must share a lattice and a field")
        k = _shift_index(source.grid, delta)
        n = len(source)
        if len(maps) != max(n - k, 0):
            raise ValueError(f"expected {max(n - k, 0)} maps, got {len(maps)}")
        p = source.p
        mats = []
        for i, mat in enumerate(maps):
            m = gf.as_matrix(mat, p, (target.dims[i + k], source.dims[i]))
            m.setflags(write=False)
            mats.append(m)
        self.source, self.target, self.delta, self.shift, self.maps = source, target, xreal(delta), k, tuple(mats)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ShiftedHom):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.delta == other.delta
            and all(np.array_equal(x, y) for x, y in zip(self.maps, other.maps))
        )

    def __repr__(self) -> str:
        return f"ShiftedHom(delta={self.delta}, maps={len(self.maps)})"

    @classmethod
    def zero(cls, source: GridModule, target: GridModule, delta) -> "ShiftedHom":
        k = _shift_index(source.grid, delta)
        return cls(source, target, delta, [gf.zeros(target.dims[i + k], source.dims[i]) for i in range(len(source) - k)])

    @classmethod
    def shift_map(cls, module: GridModule, delta) -> "ShiftedHom":
        """The structure maps ``v_t^{t+delta}`` viewed as a degree-``delta`` endomorphism."""
        k = _shift_index(module.grid, delta)
        return cls(module, module, delta, [module.structure_map(i, i + k) for i in range(len(module) - k)])

    def commutes(self) -> bool:
        u, v, k, p = self.source, self.target, self.shift, self.source.p
        for i in range(len(self.maps) - 1):
            left = gf.matmul(self.maps[i + 1], u.steps[i], p)
            right = gf.matmul(v.steps[i + k], self.maps[i], p)
            if not np.array_equal(left, right):
                return False
        return True

    def then(self, other: "ShiftedHom") -> "ShiftedHom":
        """The composite ``other o self``; degrees add."""
        if self.target != other.source:
            raise ValueError("composable homomorphisms need matching middle modules")
        k = self.shift
        n = len(self.source)
        count = max(n - k - other.shift, 0)
        maps = [gf.matmul(other.maps[i + k], self.maps[i], self.source.p) for i in range(count)]
        return ShiftedHom(self.source, other.target, self.delta + other.delta, maps)

    def with_entry(self, i: int, row: int, col: int, value: int) -> "ShiftedHom":
        maps = [m.copy() for m in self.maps]
        maps[i][row, col] = value % self.source.p
        return ShiftedHom(self.source, self.target, self.delta, maps)


def _agrees_with_shift(composite: ShiftedHom, module: GridModule) -> bool:
    expected = ShiftedHom.shift_map(module, composite.delta)
    return all(np.array_equal(x, y) for x, y in zip(composite.maps, expected.maps))


def verify_interleaving(phi: ShiftedHom, psi: ShiftedHom, delta) -> bool:
    """Both maps commute with the structure maps and compose to the ``2 delta`` shifts."""
    delta = xreal(delta)
    if phi.source.grid != psi.source.grid:
        raise ValueError("the two homomorphisms live on different lattices")
    if phi.source != psi.target or phi.target != psi.source:
        raise ValueError("psi must run between the same two modules as phi, in the opposite direction")
    if phi.delta != delta or psi.delta != delta:
        raise ValueError(f"both homomorphisms must have degree {delta}")
    if not (phi.commutes() and psi.commutes()):
        return False
    return _agrees_with_shift(phi.then(psi), phi.source) and _agrees_with_shift(psi.then(phi), phi.target)


def _live_bars(b: Barcode, grid: Sequence) -> tuple[list, list]:
    bars = b.expanded()
    return bars, [[k for k, pt in enumerate(bars) if pt.contains(t)] for t in grid]


def _hom_from_pairing(u: Barcode, v: Barcode, pairs: dict, grid: Sequence, delta) -> ShiftedHom:
    k = _shift_index(grid, delta)
    _, alive_u = _live_bars(u, grid)
    _, alive_v = _live_bars(v, grid)
    maps = []
    for i in range(len(grid) - k):
        mat = gf.zeros(len(alive_v[i + k]), len(alive_u[i]))
        rows = {bar: r for r, bar in enumerate(alive_v[i + k])}
        for col, bar in enumerate(alive_u[i]):
            partner = pairs.get(bar)
            if partner is not None and partner in rows:
                mat[rows[partner], col] = 1
        maps.append(mat)
    return ShiftedHom(sample_barcode(u, grid), sample_barcode(v, grid), delta, maps)


def canonical_interleaving(u: Barcode, v: Barcode, delta, grid: Sequence | None = None) -> tuple[ShiftedHom, ShiftedHom]:
    """Identity maps between matched intervals, zero elsewhere, on a padded lattice.

    Intervals are paired by a delta-matching of the undecorated diagrams;
    the result is verified and a ``ValueError`` reports a ``delta`` that is
    too small for the decorations involved.
    """
    delta = xreal(delta)
    grid = lattice_for([u, v], delta) if grid is None else tuple(xreal(t) for t in grid)
    bars_u, bars_v = u.expanded(), v.expanded()
    idx_u = [k for k, pt in enumerate(bars_u) if not pt.on_diagonal]
    idx_v = [k for k, pt in enumerate(bars_v) if not pt.on_diagonal]
    matching = exists_delta_matching(
        [bars_u[k].coordinates for k in idx_u], HALF_PLANE, [bars_v[k].coordinates for k in idx_v], HALF_PLANE, delta
    )
    if matching is None:
        raise ValueError(f"no {delta}-matching between the two barcodes; delta is too small")
    forward = {idx_u[i]: idx_v[j] for i, j in matching.pairs}
    backward = {b: a for a, b in forward.items()}
    phi = _hom_from_pairing(u, v, forward, grid, delta)
    psi = _hom_from_pairing(v, u, backward, grid, delta)
    if not verify_interleaving(phi, psi, delta):
        raise ValueError(f"identity maps do not interleave at delta={delta}; delta is too small for these ends")
    return phi, psi


# --- exhaustive oracle ----------------------------------------------------------------


def _block_offsets(source: GridModule, target: GridModule, k: int) -> list[tuple[int, int, int]]:
    """(offset, rows, cols) of each map's entries inside one flat unknown vector."""
    out, offset = [], 0
    for i in range(len(source) - k):
        r, c = target.dims[i + k], source.dims[i]
        out.append((offset, r, c))
        offset += r * c
    return out


def _commutation_space(source: GridModule, target: GridModule, k: int) -> tuple[np.ndarray, list]:
    """Columns spanning all entry vectors of degree-k homomorphisms source -> target."""
    p = source.p
    blocks = _block_offsets(source, target, k)
    total = sum(r * c for _, r, c in blocks)
    rows = []
    for i in range(len(blocks) - 1):
        off0, r0, c0 = blocks[i]
        off1, r1, c1 = blocks[i + 1]
        u, v = source.steps[i], target.steps[i + k]
        # maps[i+1] @ u - v @ maps[i] == 0, entry (r, c)
        for r in range(r1):
            for c in range(c0):
                row = np.zeros(total, dtype=np.int64)
                for t in range(c1):
                    row[off1 + r * c1 + t] += u[t, c]
                for t in range(r0):
                    row[off0 + t * c0 + c] -= v[r, t]
                rows.append(np.mod(row, p))
    system = np.array(rows, dtype=np.int64).reshape(len(rows), total)
    return gf.nullspace(system, p) if total else gf.zeros(0, 0), blocks


def _unpack(vector: np.ndarray, blocks: list) -> list[np.ndarray]:
    return [vector[off: off + r * c].reshape(r, c) for off, r, c in blocks]


def _solve_partner(
    phi_maps: list, u: GridModule, v: GridModule, k: int, basis: np.ndarray, blocks: list
) -> np.ndarray | None:
    """Entry vector of some psi in span(basis) with psi.phi and phi.psi equal to the 2k shifts."""
    p = u.p
    total = basis.shape[0]
    rows, rhs = [], []
    n = len(u)
    # psi_{i+k} phi_i = u_i^{i+2k}
    for i in range(n - 2 * k):
        off, r_psi, c_psi = blocks[i + k]
        phi = phi_maps[i]
        target = u.structure_map(i, i + 2 * k)
        for r in range(r_psi):
            for c in range(phi.shape[1]):
                row = np.zeros(total, dtype=np.int64)
                for t in range(c_psi):
                    row[off + r * c_psi + t] = phi[t, c]
                rows.append(row)
                rhs.append(target[r, c])
    # phi_{j+k} psi_j = v_j^{j+2k}
    for j in range(n - 2 * k):
        off, r_psi, c_psi = blocks[j]
        phi = phi_maps[j + k]
        target = v.structure_map(j, j + 2 * k)
        for r in range(phi.shape[0]):
            for c in range(c_psi):
                row = np.zeros(total, dtype=np.int64)
                for t in range(r_psi):
                    row[off + t * c_psi + c] = phi[r, t]
                rows.append(row)
                rhs.append(target[r, c])
    if basis.shape[1] == 0:
        if not rows:
            return np.zeros(total, dtype=np.int64)
        ok = all(int(b) % p == 0 for b in rhs)
        return np.zeros(total, dtype=np.int64) if ok else None
    if not rows:
        return np.zeros(total, dtype=np.int64)
    a = gf.matmul(np.mod(np.array(rows, dtype=np.int64), p), basis, p)
    b = np.mod(np.array(rhs, dtype=np.int64).reshape(-1, 1), p)
    coeffs = gf.solve(a, b, p)
    if coeffs is None:
        return None
    return gf.matmul(basis, coeffs, p)[:, 0]


def brute_force_interleaving_exists(u: GridModule, v: GridModule, delta) -> bool:
    """Exhaustive GF(2) search for a delta-interleaving between two lattice modules.

    Entries forced by the commutation relations are eliminated first; the
    remaining free entries (at most 24 in total) are enumerated for the side
    with fewer of them, and the partner map is then found by solving the
    linear conditions that remain once one map is fixed.
    """
    if u.field.characteristic != 2 or v.field.characteristic != 2:
        raise ValueError("the exhaustive oracle works over GF(2) only")
    if u.grid != v.grid:
        raise ValueError("modules must share a lattice")
    k = _shift_index(u.grid, delta)
    space_uv, blocks_uv = _commutation_space(u, v, k)
    space_vu, blocks_vu = _commutation_space(v, u, k)
    free_uv, free_vu = space_uv.shape[1], space_vu.shape[1]
    if free_uv + free_vu > MAX_FREE_ENTRIES:
        raise InstanceTooLarge(f"{free_uv + free_vu} free entries exceed the limit of {MAX_FREE_ENTRIES}")
    if free_uv > free_vu:
        return brute_force_interleaving_exists(v, u, delta)
    for bits in itertools.product((0, 1), repeat=free_uv):
        vec = (
            gf.matmul(space_uv, np.array(bits, dtype=np.int64).reshape(-1, 1), 2)[:, 0]
            if free_uv
            else np.zeros(space_uv.shape[0], dtype=np.int64)
        )
        phi_maps = _unpack(vec, blocks_uv)
        found = _solve_partner(phi_maps, u, v, k, space_vu, blocks_vu)
        if found is None:
            continue
        phi = ShiftedHom(u, v, delta, phi_maps)
        psi = ShiftedHom(v, u, delta, _unpack(found, blocks_vu))
        if not verify_interleaving(phi, psi, delta):
            raise ContractViolation("solved interleaving failed verification")
        return True
    return False


def barcodes_interleaved(u: Barcode, v: Barcode, delta) -> bool:
    """Sample both barcodes on a padded common lattice and run the exhaustive oracle."""
    grid = lattice_for([u, v], delta)
    return brute_force_interleaving_exists(sample_barcode(u, grid), sample_barcode(v, grid), delta)


# --- barcode transformations -----------------------------------------------------------


def smooth(b: Barcode, eps) -> Barcode:
    """Shrink every interval by ``eps`` at both ends, keeping decorations."""
    eps = xreal(eps)
    if eps < 0:
        raise ValueError("smoothing amount must be nonnegative")
    out = []
    for pt, k in b.items:
        birth, death = pt.birth.shifted(eps), pt.death.shifted(-eps)
        if birth < death:
            out.append((DecoratedPoint(birth, death), k))
    return Barcode(tuple(out), b.field)


def truncate(b: Barcode, at) -> Barcode:
    """Cut every interval off at the real number ``at``.

    Intervals ending before ``at`` stay, those straddling it end at ``at^+``,
    and those starting after it disappear.
    """
    at = xreal(at)
    key = (at, 0)
    out = []
    for pt, k in b.items:
        if (pt.death.value, pt.death.decoration) < key:
            out.append((pt, k))
        elif (pt.birth.value, pt.birth.decoration) < key:
            out.append((DecoratedPoint(pt.birth, plus(at)), k))
    return Barcode(tuple(out), b.field)


# --- box inequalities ----------------------------------------------------------------------


def box_check(mu1: RMeasure, mu2: RMeasure, delta, r: Rect) -> bool:
    """Two-sided box inequality on ``r``; thickened rectangles crossing the diagonal count as infinite."""
    thick = thicken(r, delta)
    return mu1(r) <= mu2(thick) and mu2(r) <= mu1(thick)


def box_check_grid(mu1: RMeasure, mu2: RMeasure, delta, sides: Sequence, death_sides: Sequence | None = None) -> Rect | None:
    """First rectangle with sides in ``sides`` failing the box inequality, or ``None``.

    ``death_sides`` optionally gives a separate set of values for the vertical sides.
    """
    sides = sorted({xreal(s) for s in sides})
    vertical = sides if death_sides is None else sorted({xreal(s) for s in death_sides})
    pairs = list(itertools.combinations(sides, 2))
    vertical_pairs = list(itertools.combinations(vertical, 2))
    for a, b in pairs:
        for c, d in vertical_pairs:
            if b <= c:
                r = Rect(a, b, c, d)
                if not box_check(mu1, mu2, delta, r):
                    return r
    return None


def box_check_at_infinity(mu1: RMeasure, mu2: RMeasure, delta, line: str, interval: Sequence) -> bool:
    """Box inequalities for the measures at infinity along one line, in both directions."""
    delta = xreal(delta)
    lo, hi = (xreal(x) for x in interval)
    wide = (lo - delta, hi + delta)
    first = measure_at_infinity(mu1, line, (lo, hi)) <= measure_at_infinity(mu2, line, wide)
    second = measure_at_infinity(mu2, line, (lo, hi)) <= measure_at_infinity(mu1, line, wide)
    return first and second


def corner_masses_agree(mu1: RMeasure, mu2: RMeasure, corner: str = "top-left") -> bool:
    return measure_at_corner(mu1, corner) == measure_at_corner(mu2, corner)
