"""Pure-Python exact kernels over Python integers.

Reference implementation of the compiled core in ``_ckernels.pyx``; both
modules expose the same four functions with identical semantics.
"""

from itertools import combinations

__all__ = ["int_rank", "int_det", "hnf", "tau_minor_rank"]


def int_rank(rows):
    """Rank of an integer matrix by fraction-free (Bareiss) elimination.

    Pivot choice: first nonzero entry, scanning columns left to right.
    """
    M = [list(r) for r in rows]
    m = len(M)
    if m == 0:
        return 0
    n = len(M[0])
    rank = 0
    prev = 1
    for c in range(n):
        piv = -1
        for i in range(rank, m):
            if M[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rank:
            M[rank], M[piv] = M[piv], M[rank]
        prow = M[rank]
        p = prow[c]
        for i in range(rank + 1, m):
            row = M[i]
            x = row[c]
            if x:
                for j in range(c + 1, n):
                    row[j] = (p * row[j] - x * prow[j]) // prev
            else:
                for j in range(c + 1, n):
                    row[j] = (p * row[j]) // prev
            row[c] = 0
        prev = p
        rank += 1
        if rank == m:
            break
    return rank


def int_det(rows):
    """Determinant of a square integer matrix (Bareiss)."""
    M = [list(r) for r in rows]
    n = len(M)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n):
        piv = -1
        for i in range(k, n):
            if M[i][k]:
                piv = i
                break
        if piv < 0:
            return 0
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        prow = M[k]
        p = prow[k]
        for i in range(k + 1, n):
            row = M[i]
            x = row[k]
            for j in range(k + 1, n):
                row[j] = (p * row[j] - x * prow[j]) // prev
            row[k] = 0
        prev = p
    return sign * M[n - 1][n - 1]


def hnf(rows, ncols):
    """Row-style Hermite normal form of the row lattice; zero rows dropped.

    Pivots are positive and entries above each pivot lie in ``[0, pivot)``.
    """
    A = [list(r) for r in rows if any(r)]
    m = len(A)
    r = 0
    for c in range(ncols):
        if r == m:
            break
        while True:
            piv = -1
            best = 0
            for i in range(r, m):
                x = A[i][c]
                if x and (piv < 0 or abs(x) < best):
                    piv = i
                    best = abs(x)
            if piv < 0:
                break
            if piv != r:
                A[r], A[piv] = A[piv], A[r]
            prow = A[r]
            p = prow[c]
            clean = True
            for i in range(r + 1, m):
                row = A[i]
                x = row[c]
                if x:
                    q = x // p
                    for j in range(c, ncols):
                        row[j] -= q * prow[j]
                    if row[c]:
                        clean = False
            if clean:
                break
        if piv < 0:
            continue
        prow = A[r]
        if prow[c] < 0:
            for j in range(c, ncols):
                prow[j] = -prow[j]
        p = prow[c]
        for i in range(r):
            row = A[i]
            q = row[c] // p
            if q:
                for j in range(c, ncols):
                    row[j] -= q * prow[j]
        r += 1
    return A[:r]


def _nonzero_mixed_minor(A, B, R, C):
    k = len(C)
    for mask in range(1 << k):
        sub = []
        for i in R:
            ra = A[i]
            rb = B[i]
            sub.append([rb[c] if (mask >> t) & 1 else ra[c] for t, c in enumerate(C)])
        if int_det(sub):
            return True
    return False


def tau_minor_rank(A, B):
    """Symbolic rank of the matrix with entries ``A[i][j] + tau_j * B[i][j]``.

    A k-by-k minor with column set C expands (multilinearity in columns) as
    the sum over S in C of ``tau^S * det(M_S)``, where M_S takes the B-column
    for j in S and the A-column otherwise.  Distinct S give distinct
    squarefree monomials, so the minor vanishes iff every ``det(M_S)`` does.
    """
    r = len(A)
    if r == 0:
        return 0
    c = len(A[0])
    rank = 0
    for k in range(1, min(r, c) + 1):
        found = False
        for R in combinations(range(r), k):
            for C in combinations(range(c), k):
                if _nonzero_mixed_minor(A, B, R, C):
                    found = True
                    break
            if found:
                break
        if not found:
            break
        rank = k
    return rank
