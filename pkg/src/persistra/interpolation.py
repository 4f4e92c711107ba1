"""One-parameter families between interleaved barcodes, and vineyards of their diagrams.

For ``x`` in ``[0, delta]`` and a lattice point ``t`` the family is built from
the block map

    Omega: U_{t-x} + V_{t+x-delta} -> U_{t+x} + V_{t-x+delta}
           [[u, psi], [phi, v]]

and its image (default), the kernel of the next map in the sequence, or the
cokernel of the previous one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import gf
from .diagram import undecorate
from .errors import ContractViolation
from .geometry import INF, XReal, format_xreal, xreal
from .interleaving import (
    ShiftedHom,
    _fraction_gcd,
    decode_lattice_barcode,
    lattice_spacing,
    refine_module,
    verify_interleaving,
)
from .metrics import exists_delta_matching, HALF_PLANE, optimal_matching
from .quiver import Barcode, GridModule, decompose

VARIANTS = ("image", "kernel", "cokernel")


@dataclass(frozen=True)
class InterpolationFamily:
    u: Barcode
    v: Barcode
    delta: XReal
    variant: str
    samples: tuple  # ((x, Barcode), ...) in increasing x

    def at(self, x) -> Barcode:
        x = xreal(x)
        for key, b in self.samples:
            if key == x:
                return b
        raise KeyError(f"no sample at x={x}")

    @property
    def xs(self) -> list:
        return [x for x, _ in self.samples]


def refine_hom(hom: ShiftedHom, step) -> ShiftedHom:
    """Resample a lattice homomorphism onto a finer lattice, one coarse map per fine index."""
    from .interleaving import _rho

    h = lattice_spacing(hom.source.grid)
    step = xreal(step)
    if step == h:
        return hom
    source, target = refine_module(hom.source, step), refine_module(hom.target, step)
    grid = source.grid
    k = int(hom.delta / step)
    maps = [hom.maps[hom.source.index_of(_rho(grid[i], h))] for i in range(len(grid) - k)]
    return ShiftedHom(source, target, hom.delta, maps)


def _block(rows: list[list[np.ndarray]], p: int) -> np.ndarray:
    return np.mod(np.block(rows), p) if rows else gf.zeros(0, 0)


class _Family:
    """Lattice data shared by all the block maps at one parameter value."""

    def __init__(self, phi: ShiftedHom, psi: ShiftedHom, kx: int):
        self.phi, self.psi, self.kx = phi, psi, kx
        self.u, self.v = phi.source, phi.target
        self.kd = phi.shift
        self.p = self.u.p

    def umap(self, i: int, j: int) -> np.ndarray:
        return self.u.structure_map(i, j)

    def vmap(self, i: int, j: int) -> np.ndarray:
        return self.v.structure_map(i, j)

    def omega(self, t: int) -> np.ndarray:
        x, d = self.kx, self.kd
        a, b, c, dd = t - x, t + x - d, t + x, t - x + d
        return _block(
            [[self.umap(a, c), self.psi.maps[b]], [self.phi.maps[a], self.vmap(b, dd)]], self.p
        )

    def omega_before(self, t: int) -> np.ndarray:
        # U_{t+x-2d} + V_{t-x-d} -> U_{t-x} + V_{t+x-d}
        x, d, p = self.kx, self.kd, self.p
        s, r = t + x - 2 * d, t - x - d
        return _block(
            [
                [self.umap(s, t - x), np.mod(-self.psi.maps[r], p)],
                [np.mod(-self.phi.maps[s], p), self.vmap(r, t + x - d)],
            ],
            p,
        )

    def omega_after(self, t: int) -> np.ndarray:
        # U_{t+x} + V_{t-x+d} -> U_{t-x+2d} + V_{t+x+d}
        x, d, p = self.kx, self.kd, self.p
        c, dd = t + x, t - x + d
        return _block(
            [
                [self.umap(c, t - x + 2 * d), np.mod(-self.psi.maps[dd], p)],
                [np.mod(-self.phi.maps[c], p), self.vmap(dd, t + x + d)],
            ],
            p,
        )

    def source_step(self, t: int) -> np.ndarray:
        # one lattice step on U_{t-x} + V_{t+x-d}
        x, d = self.kx, self.kd
        return _direct(self.u.steps[t - x], self.v.steps[t + x - d], self.p)

    def target_step(self, t: int) -> np.ndarray:
        x, d = self.kx, self.kd
        return _direct(self.u.steps[t + x], self.v.steps[t - x + d], self.p)

    def t_range(self) -> range:
        x, d, n = self.kx, self.kd, len(self.u)
        offsets = [-x, x - d, x, -x + d, x - 2 * d, -x - d, -x + 2 * d, x + d]
        return range(-min(offsets), n - max(offsets))


def _direct(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    top = np.concatenate([a, gf.zeros(a.shape[0], b.shape[1])], axis=1)
    bottom = np.concatenate([gf.zeros(b.shape[0], a.shape[1]), b], axis=1)
    return np.mod(np.concatenate([top, bottom], axis=0), p)


def _subquotient_module(fam: _Family, ts: range, variant: str) -> GridModule:
    p = fam.p
    bases, quotients = [], []
    for t in ts:
        if variant == "image":
            bases.append(gf.column_basis(fam.omega(t), p))
            quotients.append(None)
        elif variant == "kernel":
            bases.append(gf.nullspace(fam.omega_after(t), p))
            quotients.append(None)
        else:
            image = gf.column_basis(fam.omega_before(t), p)
            ambient = gf.identity(image.shape[0])
            bases.append(gf.complement_basis(image, ambient, p))
            quotients.append(image)
    steps = []
    for pos, t in enumerate(list(ts)[:-1]):
        move = fam.target_step(t) if variant != "cokernel" else fam.source_step(t)
        moved = gf.matmul(move, bases[pos], p)
        if variant == "cokernel":
            image_next = quotients[pos + 1]
            full = np.concatenate([bases[pos + 1], image_next], axis=1)
            coords = gf.solve(full, moved, p)
            if coords is None:
                raise ContractViolation("cokernel step left the ambient space")
            steps.append(coords[: bases[pos + 1].shape[1]])
        else:
            coords = gf.solve(bases[pos + 1], moved, p)
            if coords is None:
                raise ContractViolation(f"{variant} subspace is not carried into itself by the structure maps")
            steps.append(coords)
    grid = [fam.u.grid[t] for t in ts]
    dims = [b.shape[1] for b in bases]
    return GridModule(grid, dims, steps, fam.u.field)


def family_module(phi: ShiftedHom, psi: ShiftedHom, x, variant: str = "image") -> tuple[GridModule, tuple]:
    """The lattice module of the family at parameter ``x``, with its full lattice for decoding."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    h = lattice_spacing(phi.source.grid)
    kx = xreal(x) / h
    if kx.denominator != 1:
        raise ValueError(f"x={x} is not on the lattice of spacing {h}")
    fam = _Family(phi, psi, int(kx))
    ts = fam.t_range()
    if len(ts) < 2:
        raise ValueError("lattice window too small for this interleaving degree")
    return _subquotient_module(fam, ts, variant), ts


def interpolate(
    u: Barcode, v: Barcode, phi: ShiftedHom, psi: ShiftedHom, delta, xs: Sequence, variant: str = "image"
) -> InterpolationFamily:
    """Sample the interpolating family at each ``x`` in ``xs`` and decompose it."""
    delta = xreal(delta)
    if not verify_interleaving(phi, psi, delta):
        raise ValueError("the given maps are not a delta-interleaving")
    xs = sorted({xreal(x) for x in xs})
    if any(not 0 <= x <= delta for x in xs):
        raise ValueError("sample parameters must lie in [0, delta]")
    h = lattice_spacing(phi.source.grid)
    step = _fraction_gcd([2 * h] + [x for x in xs if x]) / 2
    phi, psi = refine_hom(phi, step), refine_hom(psi, step)
    grid = phi.source.grid
    ends = [e for b in (u, v) for e in b.endpoints()] or [Fraction(0)]
    if grid[0] > min(ends) - 3 * delta - step or grid[-1] < max(ends) + 3 * delta + step:
        raise ValueError("the lattice window must extend 3*delta past every endpoint")
    if decode_lattice_barcode(decompose(phi.source), grid) != u or decode_lattice_barcode(decompose(phi.target), grid) != v:
        raise ValueError("the interleaving maps are not defined on samples of u and v")
    samples = []
    for x in xs:
        module, ts = family_module(phi, psi, x, variant)
        bars = decode_lattice_barcode(decompose(module), module.grid)
        samples.append((x, bars))
    return InterpolationFamily(u, v, delta, variant, tuple(samples))


# --- vineyards ----------------------------------------------------------------------


@dataclass(frozen=True)
class Track:
    track_id: int
    points: tuple  # ((x, (p, q)), ...)
    ghost: bool


@dataclass(frozen=True)
class Vineyard:
    tracks: tuple

    def rows(self) -> list[tuple]:
        out = []
        for tr in self.tracks:
            for x, (p, q) in tr.points:
                out.append((x, p, q, -1 if tr.ghost else tr.track_id))
        return sorted(out, key=lambda r: (r[0], r[3], r[1], r[2]))

    def to_csv(self) -> str:
        lines = ["x,birth,death,track_id"]
        lines += [f"{x},{format_xreal(p)},{format_xreal(q)},{tid}" for x, p, q, tid in self.rows()]
        return "\n".join(lines) + "\n"


def vineyard(family: InterpolationFamily) -> Vineyard:
    """Chain matchings of consecutive samples into trajectories.

    Each consecutive pair at distance ``|y - x|`` must admit a matching of that
    size; a failure means the family violates stability.
    """
    samples = [(x, undecorate(b).expanded()) for x, b in family.samples]
    if not samples:
        return Vineyard(())
    first_x, last_x = samples[0][0], samples[-1][0]
    tracks: list[list] = []
    current: dict[int, int] = {}  # point index in the current sample -> track
    for k, pt in enumerate(samples[0][1]):
        tracks.append([(first_x, pt)])
        current[k] = len(tracks) - 1
    for (x, pts), (y, nxt) in zip(samples, samples[1:]):
        gap = y - x
        if exists_delta_matching(pts, HALF_PLANE, nxt, HALF_PLANE, gap) is None:
            raise ContractViolation(f"samples at {x} and {y} admit no {gap}-matching")
        m = optimal_matching(pts, nxt, gap)
        following: dict[int, int] = {}
        for i, j in m.pairs:
            tr = current[i]
            tracks[tr].append((y, nxt[j]))
            following[j] = tr
        for j in m.unmatched_b:
            tracks.append([(y, nxt[j])])
            following[j] = len(tracks) - 1
        current = following
    out = []
    for tid, pts in enumerate(tracks):
        ghost = pts[0][0] != first_x or pts[-1][0] != last_x
        out.append(Track(tid, tuple(pts), ghost))
    return Vineyard(tuple(out))


def track_length(track: Track) -> XReal:
    """Sum of d-infinity steps along a trajectory."""
    from .metrics import dinf

    total = Fraction(0)
    for (_, a), (_, b) in zip(track.points, track.points[1:]):
        total += dinf(a, b)
    return total
