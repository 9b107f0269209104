"""Anomaly decisions for subgroups and the deficient-subset procedures.

Dimensions are first-order: the tangent space of X n H at the identity is
``{x : J x = 0}`` for the Jacobian J of H, so ``dim = n - rank J``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Sequence

from .errors import (
    HypothesisFailed,
    InputError,
    InternalProofDeviation,
    NoCuspLocated,
    PreconditionError,
)
from .qlinalg import as_rat, q_rank, rat_str, rref, solve_left
from .subgroup import SubgroupSpec, b_value, jacobian
from .taufield import JacobianMatrix, minor_rank

MAX_PAIRS = 12


def _rank(J: JacobianMatrix, taus) -> int:
    return minor_rank(J) if taus is None else q_rank(J.evaluate(taus))


def _complete_cusps(J: JacobianMatrix, rank: int, taus) -> list[int]:
    out = []
    for i in range(J.n):
        e = [int(j == i) for j in range(J.n)]
        if _rank(J.with_rows([e], [[0] * J.n]), taus) == rank:
            out.append(i + 1)
    return out


@dataclass(frozen=True)
class AnomalyReport:
    subgroup: SubgroupSpec
    jacobian_rank: int
    codim: int
    anomalous: bool
    first_order_dim: int
    complete_cusps: tuple
    b: int | None
    mode: str = "symbolic"
    counterexample: bool = False

    def to_json(self) -> dict:
        out = {
            "subgroup": self.subgroup.to_json(),
            "relations": str(self.subgroup),
            "codim": self.codim,
            "jacobian_rank": self.jacobian_rank,
            "first_order_dim": self.first_order_dim,
            "anomalous": self.anomalous,
            "complete_cusps": list(self.complete_cusps),
            "b": self.b,
        }
        if self.counterexample:
            out["counterexample"] = True
        return out

    def summary_line(self) -> str:
        if not self.anomalous:
            verdict = "not anomalous"
        elif self.counterexample:
            verdict = "COUNTEREXAMPLE: anomalous with no complete cusp"
        else:
            verdict = "anomalous, complete cusps " + ",".join(map(str, self.complete_cusps)) + f", b={self.b}"
        return (f"{self.subgroup}: codim {self.codim}, rank {self.jacobian_rank}, "
                f"first-order dim {self.first_order_dim}; {verdict}")


def classify(H: SubgroupSpec, taus: Sequence | None = None) -> AnomalyReport:
    """Decide first-order anomaly of X n H.

    With ``taus`` the cusp shapes are the given rationals and the rank is an
    ordinary rank; otherwise shapes are symbolic and the independence
    hypothesis is in force, so an anomalous H without a complete cusp is
    flagged as a counterexample.
    """
    J = jacobian(H)
    if taus is not None:
        taus = [as_rat(t) for t in taus]
        if len(taus) != H.n:
            raise InputError(f"need {H.n} tau values, got {len(taus)}")
    rank = _rank(J, taus)
    fod = H.n - rank
    anomalous = fod > 0 and (rank < H.codim or H.codim > H.n)
    cusps: list[int] = []
    b = None
    if anomalous:
        cusps = _complete_cusps(J, rank, taus)
        b = b_value(H, fod).b
    return AnomalyReport(H, rank, H.codim, anomalous, fod, tuple(cusps), b,
                         "symbolic" if taus is None else "rational",
                         anomalous and not cusps and taus is None)


def locate_complete_cusps(H: SubgroupSpec, taus: Sequence | None = None) -> list[int]:
    """Cusps i whose tangent directions are cut out: rank [J; e_i] == rank J."""
    rep = classify(H, taus)
    if not rep.anomalous:
        raise PreconditionError("subgroup is not anomalous")
    if not rep.complete_cusps:
        raise NoCuspLocated(f"anomalous subgroup {H} has no complete cusp")
    return list(rep.complete_cusps)


def block_structure(H: SubgroupSpec) -> list[frozenset]:
    """Finest split of the cusps carrying H's relations into independent blocks.

    Cusps are linked when some row of the reduced echelon form of H involves
    both; this split does not depend on the chosen basis of the relations.
    Cusps on which no relation depends are omitted.
    """
    red, _ = rref(H.rows, 2 * H.n)
    parent = list(range(H.n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    used = set()
    for row in red:
        cusps = sorted({k // 2 + 1 for k, x in enumerate(row) if x})
        used.update(cusps)
        for c in cusps[1:]:
            parent[find(c)] = find(cusps[0])
    blocks: dict[int, set] = {}
    for c in sorted(used):
        blocks.setdefault(find(c), set()).add(c)
    return sorted((frozenset(b) for b in blocks.values()), key=min)


@dataclass(frozen=True)
class PairFamily:
    n: int
    pairs: tuple

    def __init__(self, pairs: Sequence[Sequence[Sequence]], n: int | None = None):
        pairs = tuple((tuple(as_rat(x) for x in v), tuple(as_rat(x) for x in w)) for v, w in pairs)
        n = len(pairs) if n is None else n
        if len(pairs) != n:
            raise InputError(f"expected {n} pairs, got {len(pairs)}")
        for i, (v, w) in enumerate(pairs, 1):
            if len(v) != n or len(w) != n:
                raise InputError(f"pair {i} must hold two vectors of length {n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "pairs", pairs)

    def vector(self, i: int, side: int) -> tuple:
        """side 0 is v_i, side 1 is w_i (i is 1-based)."""
        return self.pairs[i - 1][side]

    def span_rank(self, S) -> int:
        vecs = [x for i in S for x in self.pairs[i - 1]]
        return q_rank(vecs) if vecs else 0

    @classmethod
    def from_json(cls, obj) -> PairFamily:
        if not isinstance(obj, dict) or "pairs" not in obj:
            raise InputError("pair family must be a JSON object with 'pairs'")
        pairs = obj["pairs"]
        n = obj.get("n", len(pairs) if isinstance(pairs, list) else None)
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise InputError("field 'n' must be a positive integer")
        if not isinstance(pairs, list):
            raise InputError("field 'pairs' must be a list")
        for i, p in enumerate(pairs):
            if not (isinstance(p, list) and len(p) == 2 and all(isinstance(x, list) for x in p)):
                raise InputError(f"field 'pairs[{i}]' must be [v, w]")
        try:
            return cls(pairs, n)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"field 'pairs': {exc}") from None

    def to_json(self) -> dict:
        return {"n": self.n, "pairs": [[[rat_str(x) for x in v], [rat_str(x) for x in w]]
                                       for v, w in self.pairs]}


@dataclass(frozen=True)
class DeficientSubset:
    indices: tuple
    achieved_rank: int
    trace: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {"indices": list(self.indices), "achieved_rank": self.achieved_rank}


def independent_selection(F: PairFamily) -> tuple | None:
    """First full selection (0 = v_i, 1 = w_i) in lexicographic order that is independent."""
    for choice in product((0, 1), repeat=F.n):
        if q_rank([F.vector(i + 1, s) for i, s in enumerate(choice)]) == F.n:
            return choice
    return None


def check_hypothesis(F: PairFamily) -> bool:
    """Every choice of one vector per pair is linearly dependent."""
    return independent_selection(F) is None


def _require(F: PairFamily):
    if F.n > MAX_PAIRS:
        raise InputError(f"at most {MAX_PAIRS} pairs are supported")
    witness = independent_selection(F)
    if witness is not None:
        names = ", ".join(f"{'vw'[s]}{i}" for i, s in enumerate(witness, 1))
        raise HypothesisFailed(f"selection ({names}) is independent", witness)


def is_deficient(F: PairFamily, S: Sequence[int]) -> bool:
    """S is proper, nonempty when n > 1, and its pairs span at most |S| dimensions."""
    S = set(S)
    if not S <= set(range(1, F.n + 1)) or len(S) == F.n:
        return False
    if not S and F.n > 1:
        return False
    return F.span_rank(sorted(S)) <= len(S)


def deficient_subset_bruteforce(F: PairFamily) -> DeficientSubset:
    """Smallest nonempty proper S, first in lexicographic order, with rank <= |S|.

    For n = 1 no nonempty proper subset exists; the empty set is returned.
    """
    _require(F)
    for size in range(1, F.n):
        for S in combinations(range(1, F.n + 1), size):
            r = F.span_rank(S)
            if r <= size:
                return DeficientSubset(S, r)
    if F.n == 1:
        return DeficientSubset((), 0)
    raise InternalProofDeviation("no deficient subset although the hypothesis holds")


def _max_selection(F: PairFamily):
    """Largest independent partial selection: sizes descending, then lexicographic."""
    for h in range(F.n, -1, -1):
        for idx in combinations(range(1, F.n + 1), h):
            for choice in product((0, 1), repeat=h):
                vecs = [F.vector(i, s) for i, s in zip(idx, choice)]
                if not vecs or q_rank(vecs) == h:
                    return dict(zip(idx, choice))
    return {}


def deficient_subset_constructive(F: PairFamily) -> DeficientSubset:
    """Build the subset by the interchange argument.

    U is a maximum independent partial selection and U' the counters of U
    that extend it greedily.  If every selected pair contributed a counter,
    the unselected pairs are all zero and form the answer.  Otherwise,
    with V the selected vectors lacking a counter, V_1 collects the members
    of V needed to express unselected vectors, and V_{k+1} those (outside
    V_1..V_k) needed to express the counters of V_k.  When some V_k is
    empty the pairs of V_1 .. V_{k-1} are returned.  Every expansion and the
    final rank bound are checked; a failure raises InternalProofDeviation.
    """
    _require(F)
    n = F.n
    if n == 1:
        return DeficientSubset((), 0, {"vacuous": True})
    U = _max_selection(F)
    H = sorted(U)
    chosen = {i: F.vector(i, U[i]) for i in H}
    counter = {i: F.vector(i, 1 - U[i]) for i in H}
    basis = [chosen[i] for i in H]
    K = []
    for i in H:
        if q_rank(basis + [counter[j] for j in K] + [counter[i]]) == len(basis) + len(K) + 1:
            K.append(i)
    rest = [i for i in range(1, n + 1) if i not in U]
    trace = {"selection": {i: "vw"[U[i]] for i in H}, "counters": list(K)}
    if len(K) == len(H):
        S = rest if len(rest) < n else [1]
        trace["case"] = "h=k"
        return _validated(F, S, trace)
    HK = [i for i in H if i not in K]
    hk_basis = [chosen[i] for i in HK]

    def support(vectors) -> set:
        out = set()
        for vec in vectors:
            x = solve_left(hk_basis, vec)
            if x is None:
                raise InternalProofDeviation(f"vector {[rat_str(q) for q in vec]} leaves the span of V")
            out.update(i for i, q in zip(HK, x) if q)
        return out

    layer = support([x for i in rest for x in F.pairs[i - 1]])
    trace["layers"] = [sorted(layer)]
    if not layer:
        trace["case"] = "V1 empty"
        return _validated(F, rest, trace)
    covered = set(layer)
    while True:
        nxt = support([counter[i] for i in sorted(layer)]) - covered
        if not nxt:
            break
        trace["layers"].append(sorted(nxt))
        covered |= nxt
        layer = nxt
    trace["case"] = f"V{len(trace['layers']) + 1} empty"
    return _validated(F, sorted(covered), trace)


def _validated(F: PairFamily, S, trace) -> DeficientSubset:
    S = tuple(sorted(S))
    if not is_deficient(F, S):
        raise InternalProofDeviation(f"emitted subset {list(S)} is not deficient")
    return DeficientSubset(S, F.span_rank(S), trace)


def deficient_report(F: PairFamily) -> dict:
    """Hypothesis verdict plus the witness selection when it fails."""
    w = independent_selection(F)
    out = {"n": F.n, "hypothesis": w is None}
    if w is not None:
        out["witness"] = [f"{'vw'[s]}{i}" for i, s in enumerate(w, 1)]
    return out


__all__ = [
    "AnomalyReport", "DeficientSubset", "PairFamily", "block_structure", "check_hypothesis",
    "classify", "deficient_report", "deficient_subset_bruteforce", "deficient_subset_constructive",
    "independent_selection", "is_deficient", "locate_complete_cusps",
]
