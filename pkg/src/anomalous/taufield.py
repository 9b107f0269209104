"""Exact coefficients in the Q-span of squarefree cusp-shape monomials.

A :class:`TauScalar` is a finite sum ``sum_S q_S * prod_{i in S} tau_i`` over
subsets S of {1..n}, stored as ``{bitmask: Fraction}``.  When the squarefree
products of the cusp shapes are linearly independent over Q, such a sum
vanishes as a number iff every stored coefficient is zero, so the zero test
here is exact.  Products that would create ``tau_i**2`` leave that span and
raise :class:`SquarefreeViolation` instead of guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Iterable, Mapping, Sequence

from . import _kernels
from .errors import SquarefreeViolation
from .qlinalg import QMatrix, as_rat, rat_str

MAX_CUSPS = 64


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        if i < 1:
            raise ValueError(f"cusp indices start at 1, got {i}")
        m |= 1 << (i - 1)
    return m


def indices_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


class TauScalar:
    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping[int, Fraction] | None = None):
        if not 0 <= n <= MAX_CUSPS:
            raise ValueError(f"cusp count must be in [0, {MAX_CUSPS}]")
        full = (1 << n) - 1
        clean = {}
        for mask, q in (terms or {}).items():
            if mask & ~full:
                raise ValueError(f"monomial {indices_of(mask)} involves a cusp beyond n={n}")
            q = as_rat(q)
            if q:
                clean[mask] = q
        self.n = n
        self._terms = clean
        self._hash = None

    @classmethod
    def const(cls, q, n: int) -> TauScalar:
        return cls(n, {0: as_rat(q)})

    @classmethod
    def tau(cls, i: int, n: int, q=1) -> TauScalar:
        return cls(n, {mask_of([i]): as_rat(q)})

    @classmethod
    def monomial(cls, indices: Iterable[int], n: int, q=1) -> TauScalar:
        return cls(n, {mask_of(indices): as_rat(q)})

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def items(self):
        """(mask, coefficient) pairs in increasing (popcount, mask) order."""
        return sorted(self._terms.items(), key=lambda kv: (bin(kv[0]).count("1"), kv[0]))

    def coeff(self, indices: Iterable[int] = ()) -> Fraction:
        return self._terms.get(mask_of(indices), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(m == 0 for m in self._terms)

    def _check(self, other: TauScalar):
        if self.n != other.n:
            raise ValueError(f"cusp counts differ ({self.n} vs {other.n})")

    def _coerce(self, other):
        if isinstance(other, TauScalar):
            self._check(other)
            return other
        return TauScalar.const(other, self.n)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for m, q in other._terms.items():
            out[m] = out.get(m, 0) + q
        return TauScalar(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return TauScalar(self.n, {m: -q for m, q in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, TauScalar):
            q = as_rat(other)
            return TauScalar(self.n, {m: c * q for m, c in self._terms.items()})
        self._check(other)
        out: dict[int, Fraction] = {}
        for m1, q1 in self._terms.items():
            for m2, q2 in other._terms.items():
                if m1 & m2:
                    raise SquarefreeViolation(
                        f"product repeats tau_{indices_of(m1 & m2)[0]}"
                    )
                m = m1 | m2
                out[m] = out.get(m, 0) + q1 * q2
        return TauScalar(self.n, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, TauScalar):
            return self.n == other.n and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({0: Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self._terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def evaluate(self, taus: Sequence) -> Fraction:
        """Substitute rational values for tau_1..tau_n."""
        if len(taus) != self.n:
            raise ValueError(f"need {self.n} tau values, got {len(taus)}")
        taus = [as_rat(t) for t in taus]
        total = Fraction(0)
        for m, q in self._terms.items():
            for i in indices_of(m):
                q *= taus[i - 1]
            total += q
        return total

    def __repr__(self):
        return f"TauScalar({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for m, q in self.items():
            mono = "*".join(f"t{i}" for i in indices_of(m))
            if not mono:
                parts.append(rat_str(q))
            elif q == 1:
                parts.append(mono)
            elif q == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{rat_str(q)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> list[dict]:
        return [{"tau_set": list(indices_of(m)), "q": rat_str(q)} for m, q in self.items()]

    @classmethod
    def from_json(cls, data: Sequence[Mapping], n: int) -> TauScalar:
        out: dict[int, Fraction] = {}
        for term in data:
            m = mask_of(term.get("tau_set", []))
            if len(set(term.get("tau_set", []))) != len(term.get("tau_set", [])):
                raise SquarefreeViolation(f"tau_set {term['tau_set']} repeats an index")
            out[m] = out.get(m, 0) + as_rat(term["q"])
        return cls(n, out)


def tau_add(x: TauScalar, y: TauScalar) -> TauScalar:
    return x + y


def tau_mul(x: TauScalar, y: TauScalar) -> TauScalar:
    return x * y


def tau_is_zero(x: TauScalar) -> bool:
    return x.is_zero()


@dataclass(frozen=True)
class JacobianEntry:
    """The value ``a + tau_col * b``."""

    a: Fraction
    b: Fraction
    col: int

    def scalar(self, n: int) -> TauScalar:
        return TauScalar(n, {0: self.a, mask_of([self.col]): self.b})


class JacobianMatrix:
    """Rows of entries ``a_ij + tau_j * b_ij``; column j only ever involves tau_j."""

    __slots__ = ("n", "a", "b")

    def __init__(self, a: Sequence[Sequence], b: Sequence[Sequence], n: int | None = None):
        a = tuple(tuple(as_rat(x) for x in r) for r in a)
        b = tuple(tuple(as_rat(x) for x in r) for r in b)
        if len(a) != len(b):
            raise ValueError("a and b parts have different row counts")
        if n is None:
            if not a:
                raise ValueError("n is required for an empty Jacobian")
            n = len(a[0])
        if any(len(r) != n for r in a + b):
            raise ValueError(f"every row must have {n} columns")
        self.n = n
        self.a = a
        self.b = b

    @classmethod
    def from_entries(cls, rows: Sequence[Sequence[JacobianEntry]], n: int) -> JacobianMatrix:
        for r in rows:
            for j, e in enumerate(r, start=1):
                if e.col != j:
                    raise ValueError(f"entry in column {j} carries tau_{e.col}")
        return cls([[e.a for e in r] for r in rows], [[e.b for e in r] for r in rows], n)

    @property
    def nrows(self) -> int:
        return len(self.a)

    def entry(self, i: int, j: int) -> JacobianEntry:
        """Entry at 0-based row i, 0-based column j."""
        return JacobianEntry(self.a[i][j], self.b[i][j], j + 1)

    def scalar(self, i: int, j: int) -> TauScalar:
        return self.entry(i, j).scalar(self.n)

    def rows(self) -> list[list[JacobianEntry]]:
        return [[self.entry(i, j) for j in range(self.n)] for i in range(self.nrows)]

    def with_rows(self, a_rows, b_rows) -> JacobianMatrix:
        return JacobianMatrix(self.a + tuple(map(tuple, a_rows)), self.b + tuple(map(tuple, b_rows)), self.n)

    def evaluate(self, taus: Sequence) -> QMatrix:
        taus = [as_rat(t) for t in taus]
        if len(taus) != self.n:
            raise ValueError(f"need {self.n} tau values")
        return QMatrix(
            [[x + t * y for x, y, t in zip(ra, rb, taus)] for ra, rb in zip(self.a, self.b)],
            self.n,
        )

    def integer_parts(self) -> tuple[list[list[int]], list[list[int]]]:
        """(A, B) with each row scaled by the lcm of its denominators."""
        A, B = [], []
        for ra, rb in zip(self.a, self.b):
            d = lcm(*(q.denominator for q in ra + rb)) if ra else 1
            A.append([int(q * d) for q in ra])
            B.append([int(q * d) for q in rb])
        return A, B

    def __eq__(self, other):
        return (
            isinstance(other, JacobianMatrix)
            and (self.n, self.a, self.b) == (other.n, other.a, other.b)
        )

    def __repr__(self):
        body = "; ".join(
            ", ".join(str(self.scalar(i, j)) for j in range(self.n)) for i in range(self.nrows)
        )
        return f"JacobianMatrix(n={self.n}, [{body}])"


def minor_det(J: JacobianMatrix, rows: Sequence[int], cols: Sequence[int]) -> TauScalar:
    """Laplace expansion (first row) of a square minor, 0-based indices."""
    if len(rows) != len(cols):
        raise ValueError("minor must be square")
    if not rows:
        return TauScalar.const(1, J.n)
    i, rest = rows[0], rows[1:]
    total = TauScalar(J.n)
    for t, j in enumerate(cols):
        e = J.scalar(i, j)
        if e.is_zero():
            continue
        sub = minor_det(J, rest, cols[:t] + cols[t + 1:])
        term = e * sub
        total = total - term if t % 2 else total + term
    return total


def minor_rank_laplace(J: JacobianMatrix) -> int:
    """Reference rank by explicit Laplace-expanded TauScalar minors (slow)."""
    rank = 0
    for k in range(1, min(J.nrows, J.n) + 1):
        hit = any(
            not minor_det(J, list(R), list(C)).is_zero()
            for R in combinations(range(J.nrows), k)
            for C in combinations(range(J.n), k)
        )
        if not hit:
            break
        rank = k
    return rank


def minor_rank(J: JacobianMatrix) -> int:
    """Largest k with a nonzero k-by-k minor, as an element of the tau span.

    The compiled kernel evaluates each minor's squarefree coefficients as
    integer determinants; this is the Laplace expansion with like monomials
    collected, so it agrees with :func:`minor_rank_laplace` exactly.
    """
    if J.nrows == 0 or J.n == 0:
        return 0
    A, B = J.integer_parts()
    return _kernels.tau_minor_rank(A, B)
