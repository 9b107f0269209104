# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled exact kernels.

Each entry point runs on C ``long long`` when the input provably cannot
overflow, and otherwise hands the call to the arbitrary-precision
implementation in ``_pykernels``.  Results are identical either way.
"""

from libc.stdlib cimport malloc, free

from . import _pykernels

ctypedef long long i64

cdef extern from *:
    """
    static int _mul_ovf(long long a, long long b, long long *r) {
        return __builtin_mul_overflow(a, b, r);
    }
    static int _sub_ovf(long long a, long long b, long long *r) {
        return __builtin_sub_overflow(a, b, r);
    }
    """
    int _mul_ovf(long long a, long long b, long long *r) nogil
    int _sub_ovf(long long a, long long b, long long *r) nogil

__all__ = ["int_rank", "int_det", "hnf", "tau_minor_rank"]

# Every minor is bounded by the product of row L1 norms; keeping that
# product below 2**31 keeps all Bareiss cross products below 2**62.
cdef object _SAFE = 1 << 31
cdef object _ENTRY_MAX = 1 << 62


cdef bint _fits(rows, rows2=None):
    cdef object bound = 1
    cdef object s
    cdef Py_ssize_t i
    for i in range(len(rows)):
        s = 0
        if rows2 is None:
            for x in rows[i]:
                s += abs(x)
        else:
            for x, y in zip(rows[i], rows2[i]):
                s += max(abs(x), abs(y))
        if s > 1:
            bound *= s
            if bound >= _SAFE:
                return False
    return True


cdef int _rank_c(i64 *M, int m, int n) nogil:
    cdef int rank = 0, c, i, j, piv
    cdef i64 prev = 1, p, x, t
    for c in range(n):
        piv = -1
        for i in range(rank, m):
            if M[i * n + c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rank:
            for j in range(n):
                t = M[rank * n + j]
                M[rank * n + j] = M[piv * n + j]
                M[piv * n + j] = t
        p = M[rank * n + c]
        for i in range(rank + 1, m):
            x = M[i * n + c]
            for j in range(c + 1, n):
                M[i * n + j] = (p * M[i * n + j] - x * M[rank * n + j]) / prev
            M[i * n + c] = 0
        prev = p
        rank += 1
        if rank == m:
            break
    return rank


cdef i64 _det_c(i64 *M, int n) nogil:
    cdef int k, i, j, piv
    cdef i64 prev = 1, p, x, t, sign = 1
    if n == 0:
        return 1
    for k in range(n):
        piv = -1
        for i in range(k, n):
            if M[i * n + k] != 0:
                piv = i
                break
        if piv < 0:
            return 0
        if piv != k:
            for j in range(n):
                t = M[k * n + j]
                M[k * n + j] = M[piv * n + j]
                M[piv * n + j] = t
            sign = -sign
        p = M[k * n + k]
        for i in range(k + 1, n):
            x = M[i * n + k]
            for j in range(k + 1, n):
                M[i * n + j] = (p * M[i * n + j] - x * M[k * n + j]) / prev
            M[i * n + k] = 0
        prev = p
    return sign * M[n * n - 1]


cdef i64 *_load(rows, int m, int n) except NULL:
    cdef i64 *M = <i64 *> malloc(max(1, m * n) * sizeof(i64))
    cdef int i, j
    if M == NULL:
        raise MemoryError()
    for i in range(m):
        r = rows[i]
        for j in range(n):
            M[i * n + j] = r[j]
    return M


def int_rank(rows):
    cdef int m = len(rows)
    if m == 0:
        return 0
    cdef int n = len(rows[0])
    if not _fits(rows):
        return _pykernels.int_rank(rows)
    cdef i64 *M = _load(rows, m, n)
    cdef int r
    try:
        r = _rank_c(M, m, n)
    finally:
        free(M)
    return r


def int_det(rows):
    cdef int n = len(rows)
    if n == 0:
        return 1
    if not _fits(rows):
        return _pykernels.int_det(rows)
    cdef i64 *M = _load(rows, n, n)
    cdef i64 d
    try:
        d = _det_c(M, n)
    finally:
        free(M)
    return d


cdef inline i64 _floordiv(i64 a, i64 b) nogil:
    cdef i64 q = a / b
    if (a % b != 0) and ((a < 0) != (b < 0)):
        q -= 1
    return q


cdef inline i64 _iabs(i64 a) nogil:
    return -a if a < 0 else a


cdef int _axpy(i64 *dst, i64 *src, i64 q, int c0, int n) nogil:
    # dst[c0:n] -= q * src[c0:n]; returns 1 on overflow
    cdef int j
    cdef i64 t
    for j in range(c0, n):
        if _mul_ovf(q, src[j], &t):
            return 1
        if _sub_ovf(dst[j], t, &dst[j]):
            return 1
    return 0


cdef int _hnf_c(i64 *A, int m, int n) nogil:
    """In-place HNF; returns the rank, or -1 on overflow."""
    cdef int r = 0, c, i, j, piv
    cdef i64 best, x, p, q, t
    cdef bint clean
    for c in range(n):
        if r == m:
            break
        while True:
            piv = -1
            best = 0
            for i in range(r, m):
                x = A[i * n + c]
                if x != 0 and (piv < 0 or _iabs(x) < best):
                    piv = i
                    best = _iabs(x)
            if piv < 0:
                break
            if piv != r:
                for j in range(n):
                    t = A[r * n + j]
                    A[r * n + j] = A[piv * n + j]
                    A[piv * n + j] = t
            p = A[r * n + c]
            clean = True
            for i in range(r + 1, m):
                x = A[i * n + c]
                if x != 0:
                    q = _floordiv(x, p)
                    if _axpy(&A[i * n], &A[r * n], q, c, n):
                        return -1
                    if A[i * n + c] != 0:
                        clean = False
            if clean:
                break
        if piv < 0:
            continue
        if A[r * n + c] < 0:
            for j in range(c, n):
                A[r * n + j] = -A[r * n + j]
        p = A[r * n + c]
        for i in range(r):
            q = _floordiv(A[i * n + c], p)
            if q != 0:
                if _axpy(&A[i * n], &A[r * n], q, c, n):
                    return -1
        r += 1
    return r


def hnf(rows, ncols):
    cdef int n = ncols
    nz = [r for r in rows if any(r)]
    cdef int m = len(nz)
    if m == 0:
        return []
    for r in nz:
        for x in r:
            if abs(x) >= _ENTRY_MAX:
                return _pykernels.hnf(rows, ncols)
    cdef i64 *A = _load(nz, m, n)
    cdef int rk, i, j
    try:
        rk = _hnf_c(A, m, n)
        if rk < 0:
            return _pykernels.hnf(rows, ncols)
        return [[A[i * n + j] for j in range(n)] for i in range(rk)]
    finally:
        free(A)


cdef bint _next_comb(int *idx, int k, int n) nogil:
    cdef int i = k - 1, j
    while i >= 0 and idx[i] == n - k + i:
        i -= 1
    if i < 0:
        return False
    idx[i] += 1
    for j in range(i + 1, k):
        idx[j] = idx[j - 1] + 1
    return True


cdef bint _mixed_nonzero(i64 *A, i64 *B, int c, int *R, int *C, int k, i64 *buf) nogil:
    cdef unsigned long mask, top = (<unsigned long> 1) << k
    cdef int s, t
    for mask in range(top):
        for s in range(k):
            for t in range(k):
                if (mask >> t) & 1:
                    buf[s * k + t] = B[R[s] * c + C[t]]
                else:
                    buf[s * k + t] = A[R[s] * c + C[t]]
        if _det_c(buf, k) != 0:
            return True
    return False


cdef int _tau_rank_c(i64 *A, i64 *B, int r, int c, int *R, int *C, i64 *buf) nogil:
    cdef int k, i, rank = 0
    cdef bint found
    for k in range(1, (r if r < c else c) + 1):
        found = False
        for i in range(k):
            R[i] = i
        while True:
            for i in range(k):
                C[i] = i
            while True:
                if _mixed_nonzero(A, B, c, R, C, k, buf):
                    found = True
                    break
                if not _next_comb(C, k, c):
                    break
            if found or not _next_comb(R, k, r):
                break
        if not found:
            break
        rank = k
    return rank


def tau_minor_rank(A, B):
    cdef int r = len(A)
    if r == 0:
        return 0
    cdef int c = len(A[0])
    if c == 0:
        return 0
    if r > 60 or c > 60 or not _fits(A, B):
        return _pykernels.tau_minor_rank(A, B)
    cdef int k = r if r < c else c
    cdef i64 *Am = _load(A, r, c)
    cdef i64 *Bm = NULL
    cdef i64 *buf = NULL
    cdef int *R = NULL
    cdef int *C = NULL
    cdef int rank
    try:
        Bm = _load(B, r, c)
        buf = <i64 *> malloc(k * k * sizeof(i64))
        R = <int *> malloc(k * sizeof(int))
        C = <int *> malloc(k * sizeof(int))
        if buf == NULL or R == NULL or C == NULL:
            raise MemoryError()
        rank = _tau_rank_c(Am, Bm, r, c, R, C, buf)
    finally:
        free(Am)
        free(Bm)
        free(buf)
        free(R)
        free(C)
    return rank
