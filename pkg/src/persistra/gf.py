"""Dense linear algebra over a prime field GF(p) with numpy integer arrays.

Matrices hold entries in ``range(p)``; every routine returns reduced arrays.
Column vectors are the convention for subspaces: a subspace is given by a
matrix whose columns span it.
"""

from __future__ import annotations

import numpy as np


def as_matrix(entries, p: int, shape: tuple[int, int] | None = None) -> np.ndarray:
    m = np.array(entries, dtype=np.int64)
    if shape is not None:
        m = m.reshape(shape)
    if m.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    return np.mod(m, p)


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def matmul(x: np.ndarray, y: np.ndarray, p: int) -> np.ndarray:
    if x.shape[1] != y.shape[0]:
        raise ValueError(f"shape mismatch {x.shape} @ {y.shape}")
    if x.shape[1] == 0:
        return zeros(x.shape[0], y.shape[1])
    return np.mod(x @ y, p)


def rref(m: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and the pivot columns."""
    a = np.mod(np.array(m, dtype=np.int64), p)
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            a[[r, k]] = a[[k, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = np.mod(a[r] * inv, p)
        others = np.nonzero(a[:, c])[0]
        for i in others:
            if i != r:
                a[i] = np.mod(a[i] - a[i, c] * a[r], p)
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: np.ndarray, p: int) -> int:
    if m.size == 0:
        return 0
    return len(rref(m, p)[1])


def nullspace(m: np.ndarray, p: int) -> np.ndarray:
    """Columns spanning the kernel of ``m``."""
    rows, cols = m.shape
    if cols == 0:
        return zeros(0, 0)
    a, pivots = rref(m, p) if rows else (zeros(0, cols), [])
    free = [c for c in range(cols) if c not in pivots]
    basis = zeros(cols, len(free))
    for j, f in enumerate(free):
        basis[f, j] = 1
        for i, pc in enumerate(pivots):
            basis[pc, j] = (-a[i, f]) % p
    return basis


def column_basis(m: np.ndarray, p: int) -> np.ndarray:
    """An independent subset of the columns of ``m`` spanning its column space."""
    if m.size == 0:
        return zeros(m.shape[0], 0)
    _, pivots = rref(m, p)
    return m[:, pivots].copy()


def solve(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """Some ``x`` with ``a @ x == b``, or ``None`` when the system is inconsistent."""
    rows, cols = a.shape
    if b.shape[0] != rows:
        raise ValueError("right-hand side has the wrong number of rows")
    k = b.shape[1]
    if rows == 0:
        return zeros(cols, k)
    aug = np.concatenate([a, b], axis=1)
    red, pivots = rref(aug, p)
    if any(pc >= cols for pc in pivots):
        return None
    x = zeros(cols, k)
    for i, pc in enumerate(pivots):
        x[pc] = red[i, cols:]
    return x


def inverse(m: np.ndarray, p: int) -> np.ndarray:
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("only square matrices are invertible")
    x = solve(m, identity(n), p)
    if x is None:
        raise ValueError("matrix is singular")
    return x


def is_isomorphism(m: np.ndarray, p: int) -> bool:
    return m.shape[0] == m.shape[1] and rank(m, p) == m.shape[0]


def intersection(u: np.ndarray, w: np.ndarray, p: int) -> np.ndarray:
    """Columns spanning ``span(u) ∩ span(w)`` (both given by spanning columns)."""
    n = u.shape[0]
    if u.shape[1] == 0 or w.shape[1] == 0:
        return zeros(n, 0)
    coeffs = nullspace(np.concatenate([u, np.mod(-w, p)], axis=1), p)
    if coeffs.shape[1] == 0:
        return zeros(n, 0)
    return column_basis(matmul(u, coeffs[: u.shape[1]], p), p)


def complement_basis(sub: np.ndarray, ambient: np.ndarray, p: int) -> np.ndarray:
    """Columns of ``ambient`` extending a basis of ``span(sub)`` to ``span(ambient)``.

    ``span(sub)`` must lie inside ``span(ambient)``.
    """
    stacked = np.concatenate([sub, ambient], axis=1)
    if stacked.size == 0:
        return zeros(ambient.shape[0], 0)
    _, pivots = rref(stacked, p)
    chosen = [c - sub.shape[1] for c in pivots if c >= sub.shape[1]]
    return ambient[:, chosen].copy()
