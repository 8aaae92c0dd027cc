"""Dense linear algebra over GF(2).

Matrices are plain ``numpy.uint8`` arrays holding 0/1 entries. Every routine
returns a fresh array; inputs are never modified in place.
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    """Operand dimensions do not agree."""


class NotACodeError(ValueError):
    """A generator matrix does not have full row rank."""


def as_gf2(a, *, ndim: int | None = None) -> np.ndarray:
    """Validate ``a`` as a binary array and return a uint8 copy.

    Raises ValueError if any entry is not 0 or 1 or the array is empty.
    """
    arr = np.array(a, dtype=np.int64, copy=True)
    if ndim is not None and arr.ndim != ndim:
        raise ShapeError(f"expected {ndim}-D binary array, got shape {arr.shape}")
    if arr.size == 0:
        raise ShapeError("empty GF(2) array")
    if np.any((arr != 0) & (arr != 1)):
        raise ValueError("GF(2) entries must be 0 or 1")
    return arr.astype(np.uint8)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


def matmul(a, b) -> np.ndarray:
    """Matrix product over GF(2).

    1-D operands are treated as row vectors on the left and column vectors
    on the right, mirroring ``numpy.matmul``.
    """
    A = as_gf2(a)
    B = as_gf2(b)
    inner_a = A.shape[-1]
    inner_b = B.shape[0]
    if inner_a != inner_b:
        raise ShapeError(f"cannot multiply {A.shape} by {B.shape}")
    # integer accumulation then parity; exact for any realistic size
    return (A.astype(np.int64) @ B.astype(np.int64) % 2).astype(np.uint8)


def row_echelon(a) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form over GF(2).

    Pivot search walks columns left to right and picks the lowest-index row
    holding a 1, so the result is fully deterministic.

    Returns:
        (R, pivots): R has the same shape as ``a``; ``pivots`` lists the
        pivot column of each nonzero row of R.
    """
    R = as_gf2(a, ndim=2)
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.flatnonzero(R[r:, c])
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            R[[r, p]] = R[[p, r]]
        # clear the column everywhere else (reduced form)
        mask = R[:, c].astype(bool)
        mask[r] = False
        R[mask] ^= R[r]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(a) -> int:
    """Rank of a binary matrix over GF(2)."""
    _, pivots = row_echelon(a)
    return len(pivots)


def systematic_form(g) -> tuple[np.ndarray, np.ndarray]:
    """Bring a full-row-rank generator matrix into the form ``[I_k | P]``.

    Row operations are applied freely. When the leading ``k`` columns are not
    independent, pivot columns are moved to the front and the column
    permutation is returned explicitly: ``G_sys`` spans the row space of
    ``G[:, perm]``.

    Returns:
        (G_sys, perm) with ``perm`` an int array of length n.

    Raises:
        NotACodeError: if ``g`` is rank deficient.
    """
    G = as_gf2(g, ndim=2)
    k, n = G.shape
    R, pivots = row_echelon(G)
    if len(pivots) < k:
        raise NotACodeError(f"generator has rank {len(pivots)} < k={k}")
    rest = [c for c in range(n) if c not in set(pivots)]
    perm = np.array(pivots + rest, dtype=np.int64)
    return R[:, perm], perm


def null_space(a) -> np.ndarray:
    """Basis of the right null space ``{x : a x = 0}`` as rows of a matrix.

    Returns a ``(n - rank) x n`` array; zero rows when the kernel is trivial.
    """
    A = as_gf2(a, ndim=2)
    n = A.shape[1]
    R, pivots = row_echelon(A)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, p in enumerate(pivots):
            basis[i, p] = R[row, f]
    return basis


def lift_to_real(a) -> np.ndarray:
    """Reinterpret the 0/1 entries of a GF(2) matrix as real numbers."""
    return as_gf2(a).astype(np.float64)


def weight(v) -> int:
    """Hamming weight of a binary vector."""
    return int(as_gf2(v).sum())
