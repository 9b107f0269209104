"""Algebraic subgroups of G^{2n} given by integer relation matrices.

A row ``(a_1, b_1, ..., a_n, b_n)`` encodes the relation
``M_1^{a_1} L_1^{b_1} ... M_n^{a_n} L_n^{b_n} = 1``.  Coordinates are always
ordered ``(M_1, L_1, ..., M_n, L_n)``.  Subgroups are stored by the Hermite
normal form of their relation lattice, which makes equality of subgroups
equality of specs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import _kernels
from .errors import EmptyRelation, InputError, NotAnomalousConsistent, PreconditionError
from .qlinalg import IntMatrix, integer_left_kernel, integral_row, right_nullspace
from .taufield import JacobianMatrix

CuspSupport = frozenset


def cusp_support(indices: Iterable[int], n: int) -> frozenset:
    s = frozenset(int(i) for i in indices)
    bad = [i for i in s if not 1 <= i <= n]
    if bad:
        raise InputError(f"cusp indices {sorted(bad)} outside 1..{n}")
    return s


@dataclass(frozen=True)
class SubgroupSpec:
    n: int
    rel: IntMatrix

    def __post_init__(self):
        if self.rel.ncols != 2 * self.n:
            raise InputError(f"relation rows need {2 * self.n} entries, got {self.rel.ncols}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], n: int) -> SubgroupSpec:
        """Normalize ``rows``; an all-zero input gives the codimension-0 group."""
        rows = [list(map(int, r)) for r in rows]
        for i, r in enumerate(rows):
            if len(r) != 2 * n:
                raise InputError(f"row {i} has length {len(r)}, expected {2 * n}")
        return cls(n, IntMatrix(_kernels.hnf(rows, 2 * n), 2 * n))

    @property
    def codim(self) -> int:
        return self.rel.nrows

    @property
    def dim(self) -> int:
        return 2 * self.n - self.codim

    @property
    def rows(self) -> tuple:
        return self.rel.rows

    @property
    def key(self) -> tuple:
        return self.rel.rows

    def to_json(self) -> dict:
        return {"n": self.n, "rows": [list(r) for r in self.rel.rows]}

    def canonical_json(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"), sort_keys=True)

    def __str__(self):
        return "{" + ", ".join(relation_str(r) for r in self.rows) + "}" if self.rows else "{}"


def relation_str(row: Sequence[int]) -> str:
    parts = []
    for k, e in enumerate(row):
        if e:
            name = ("M", "L")[k % 2] + str(k // 2 + 1)
            parts.append(name if e == 1 else f"{name}^{e}")
    return ("*".join(parts) or "1") + "=1"


def normalize(raw, n: int) -> SubgroupSpec:
    """HNF of the row lattice; raises EmptyRelation if every row is zero."""
    rows = raw.rows if isinstance(raw, IntMatrix) else raw
    H = SubgroupSpec.from_rows(rows, n)
    if H.codim == 0:
        raise EmptyRelation("all relation rows are zero")
    return H


def from_json(obj) -> SubgroupSpec:
    if not isinstance(obj, dict):
        raise InputError("subgroup must be a JSON object with 'n' and 'rows'")
    for field in ("n", "rows"):
        if field not in obj:
            raise InputError(f"missing field '{field}'")
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InputError("field 'n' must be a positive integer")
    rows = obj["rows"]
    if not isinstance(rows, list):
        raise InputError("field 'rows' must be a list of integer lists")
    for i, r in enumerate(rows):
        if not isinstance(r, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in r):
            raise InputError(f"field 'rows[{i}]' must be a list of integers")
        if len(r) != 2 * n:
            raise InputError(f"field 'rows[{i}]' has length {len(r)}, expected {2 * n}")
    return normalize(rows, n)


def jacobian_from_rows(rows: Sequence[Sequence[int]], n: int) -> JacobianMatrix:
    """Row i, column j: ``a_ij + tau_j * b_ij`` read from columns 2j-1, 2j."""
    return JacobianMatrix([r[0::2] for r in rows], [r[1::2] for r in rows], n)


def jacobian(H: SubgroupSpec) -> JacobianMatrix:
    return jacobian_from_rows(H.rows, H.n)


def cusp_columns(S: Iterable[int]) -> list[int]:
    """0-based relation columns (M_i, L_i) of the cusps in S."""
    return sorted(c for i in S for c in (2 * i - 2, 2 * i - 1))


def support_subgroup(H: SubgroupSpec, S: Iterable[int]) -> SubgroupSpec:
    """Largest subgroup containing H whose relations only involve cusps in S.

    Its relation lattice is the intersection of H's lattice with the
    coordinate sublattice on S's columns: integer combinations x of H's
    rows whose off-S columns vanish, i.e. the integer left kernel of the
    off-S block, pushed forward through H.
    """
    S = cusp_support(S, H.n)
    off = [c for c in range(2 * H.n) if c not in set(cusp_columns(S))]
    if not H.rows:
        return H
    block = [[r[c] for c in off] for r in H.rows]
    X = integer_left_kernel(block, len(off)) if off else [
        [int(i == j) for j in range(H.codim)] for i in range(H.codim)
    ]
    rows = [[sum(x * r[c] for x, r in zip(xv, H.rows)) for c in range(2 * H.n)] for xv in X]
    return SubgroupSpec.from_rows(rows, H.n)


def saturate(H: SubgroupSpec) -> SubgroupSpec:
    """Relations of the identity component: (Q-span of the rows) meet Z^{2n}."""
    if not H.rows:
        return H
    K = [integral_row(k) for k in right_nullspace(H.rows, 2 * H.n)]
    if not K:
        return SubgroupSpec.from_rows([[int(i == j) for j in range(2 * H.n)] for i in range(2 * H.n)], H.n)
    cols = [[k[c] for k in K] for c in range(2 * H.n)]
    return SubgroupSpec.from_rows(integer_left_kernel(cols, len(K)), H.n)


@dataclass(frozen=True)
class BAnomalyDatum:
    """``dim_intersection = dim_subgroup + n - 2n + b`` with ambient G^{2n}, dim X = n."""

    b: int
    dim_intersection: int
    dim_subgroup: int
    n: int

    def __post_init__(self):
        if self.b < 0:
            raise NotAnomalousConsistent(f"b = {self.b} < 0")
        if self.dim_intersection - self.b != self.dim_subgroup + self.n - 2 * self.n:
            raise NotAnomalousConsistent("dimension count does not balance")


def b_value(H: SubgroupSpec, dim_XH: int) -> BAnomalyDatum:
    """Excess of ``dim(X n H)`` over the expected ``dim H + n - 2n``."""
    if dim_XH > H.n:
        raise PreconditionError(f"dim(X n H) = {dim_XH} exceeds dim X = {H.n}")
    b = dim_XH - (H.dim + H.n - 2 * H.n)
    if b < 0:
        raise NotAnomalousConsistent(
            f"b = {b} < 0: dimension {dim_XH} is below the expected {H.dim - H.n}"
        )
    return BAnomalyDatum(b, dim_XH, H.dim, H.n)
