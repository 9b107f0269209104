"""Exact linear algebra over Q and Z for small dense matrices.

Rationals are :class:`fractions.Fraction` (always reduced, positive
denominator, canonical zero ``0/1``).  Matrices are immutable tuples of rows.
Rank and determinant go through the fraction-free kernels after clearing
denominators row by row, which leaves both unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from . import _kernels

Rat = Fraction


def as_rat(x) -> Fraction:
    """Parse an int, Fraction or ``"p/q"`` string into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as a rational")


def rat_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class QMatrix:
    rows: tuple
    ncols: int

    def __init__(self, rows: Iterable[Sequence], ncols: int | None = None):
        rows = tuple(tuple(as_rat(x) for x in r) for r in rows)
        if ncols is None:
            if not rows:
                raise ValueError("ncols is required for an empty matrix")
            ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "ncols", ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def transpose(self) -> QMatrix:
        return QMatrix(zip(*self.rows), self.nrows) if self.rows else QMatrix([], 0)


@dataclass(frozen=True)
class IntMatrix:
    rows: tuple
    ncols: int

    def __init__(self, rows: Iterable[Sequence[int]], ncols: int | None = None):
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        if ncols is None:
            if not rows:
                raise ValueError("ncols is required for an empty matrix")
            ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "ncols", ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def transpose(self) -> IntMatrix:
        return IntMatrix(zip(*self.rows), self.nrows) if self.rows else IntMatrix([], 0)


def integral_row(row: Sequence[Fraction]) -> list[int]:
    """Scale a rational row by the lcm of its denominators."""
    d = lcm(*(q.denominator for q in row)) if row else 1
    return [int(q * d) for q in row]


def _int_rows(M) -> list[list[int]]:
    if isinstance(M, IntMatrix):
        return [list(r) for r in M.rows]
    if isinstance(M, QMatrix):
        return [integral_row(r) for r in M.rows]
    return [integral_row([as_rat(x) for x in r]) for r in M]


def q_rank(M) -> int:
    """Rank over Q (QMatrix, IntMatrix or nested sequences)."""
    return _kernels.int_rank(_int_rows(M))


def q_det(M) -> Fraction:
    rows = [[as_rat(x) for x in r] for r in (M.rows if hasattr(M, "rows") else M)]
    scale = Fraction(1)
    ints = []
    for r in rows:
        d = lcm(*(q.denominator for q in r)) if r else 1
        scale /= d
        ints.append([int(q * d) for q in r])
    return _kernels.int_det(ints) * scale


def rref(rows: Sequence[Sequence], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (nonzero rows, pivot columns)."""
    A = [[as_rat(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        p = A[r][c]
        A[r] = [x / p for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A[:r], pivots


def solve_left(basis: Sequence[Sequence], target: Sequence) -> list[Fraction] | None:
    """Coefficients x with sum x_i * basis[i] == target, or None.

    ``basis`` rows must be linearly independent.
    """
    k = len(basis)
    if k == 0:
        return [] if not any(target) else None
    aug = [[as_rat(b[j]) for b in basis] + [as_rat(t)] for j, t in enumerate(target)]
    red, piv = rref(aug, k + 1)
    if k in piv:
        return None
    x = [Fraction(0)] * k
    for row, c in zip(red, piv):
        x[c] = row[k]
    return x


def right_nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : M x = 0} over Q."""
    red, piv = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, c in zip(red, piv):
            x[c] = -row[f]
        basis.append(x)
    return basis


def hnf(M: IntMatrix) -> IntMatrix:
    """Row-style Hermite normal form; zero rows dropped."""
    return IntMatrix(_kernels.hnf([list(r) for r in M.rows], M.ncols), M.ncols)


def hnf_with_transform(rows: Sequence[Sequence[int]], ncols: int):
    """Return (H, U, rank) with U unimodular and ``U @ rows == H``.

    The first ``rank`` rows of H are the Hermite form; the remaining rows of
    U span the integer left kernel of ``rows``.
    """
    A = [list(map(int, r)) for r in rows]
    m = len(A)
    U = [[int(i == j) for j in range(m)] for i in range(m)]

    def sub(i, k, q):
        if q:
            A[i] = [x - q * y for x, y in zip(A[i], A[k])]
            U[i] = [x - q * y for x, y in zip(U[i], U[k])]

    r = 0
    for c in range(ncols):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if A[i][c]]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(A[i][c]))
            A[r], A[piv] = A[piv], A[r]
            U[r], U[piv] = U[piv], U[r]
            for i in range(r + 1, m):
                if A[i][c]:
                    sub(i, r, A[i][c] // A[r][c])
            if not any(A[i][c] for i in range(r + 1, m)):
                break
        if not A[r][c]:
            continue
        if A[r][c] < 0:
            A[r] = [-x for x in A[r]]
            U[r] = [-x for x in U[r]]
        for i in range(r):
            sub(i, r, A[i][c] // A[r][c])
        r += 1
    return A, U, r


def integer_left_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """HNF basis of {x in Z^m : x @ rows == 0}."""
    m = len(rows)
    if m == 0:
        return []
    _, U, r = hnf_with_transform(rows, ncols)
    return _kernels.hnf(U[r:], m)


def lattice_contains(A: IntMatrix, B: IntMatrix) -> bool:
    """True iff every row of B lies in the Z-row-lattice of A."""
    if A.ncols != B.ncols:
        raise ValueError("column counts differ")
    H = _kernels.hnf([list(r) for r in A.rows], A.ncols)
    pivots = [next(j for j, x in enumerate(h) if x) for h in H]
    for b in B.rows:
        v = list(b)
        for h, p in zip(H, pivots):
            if any(v[:p]):
                return False
            q, rem = divmod(v[p], h[p])
            if rem:
                return False
            if q:
                v = [x - q * y for x, y in zip(v, h)]
        if any(v):
            return False
    return True
