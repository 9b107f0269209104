import random
from itertools import combinations, product

import pytest
import sympy
from hypothesis import given, strategies as st

from anomalous.anomaly import (
    PairFamily,
    block_structure,
    check_hypothesis,
    classify,
    deficient_subset_bruteforce,
    deficient_subset_constructive,
    independent_selection,
    is_deficient,
    locate_complete_cusps,
)
from anomalous.errors import HypothesisFailed, InputError, PreconditionError
from anomalous.subgroup import normalize
from anomalous.taufield import JacobianMatrix, minor_rank
from helpers import naive_rank, sampled_rank

E1, E2, Z = [1, 0], [0, 1], [0, 0]


def keep(i, n):
    rows = []
    for k in range(2):
        r = [0] * (2 * n)
        r[2 * (i - 1) + k] = 1
        rows.append(r)
    return rows


# ------------------------------------------------------------------ classify


def test_keeping_a_cusp_is_anomalous():
    rep = classify(normalize(keep(1, 2), 2))
    assert rep.anomalous and rep.jacobian_rank == 1 and rep.first_order_dim == 1
    assert rep.complete_cusps == (1,) and rep.b == 1
    assert not rep.counterexample


def test_diagonal_relations_are_not_anomalous():
    H = normalize([[1, 0, 1, 0], [0, 1, 0, 1]], 2)
    rep = classify(H)
    assert not rep.anomalous and rep.jacobian_rank == 2
    # the determinant is t2 - t1
    t1, t2 = sympy.symbols("t1 t2")
    assert sympy.Matrix([[1, 1], [t1, t2]]).det() == t2 - t1


def test_full_codimension_is_not_anomalous():
    rep = classify(normalize(keep(1, 2) + keep(2, 2), 2))
    assert rep.codim == 4 and rep.first_order_dim == 0 and not rep.anomalous


def test_rational_mode_can_find_coincidences():
    H = normalize([[1, 0, 1, 0], [0, 1, 0, 1]], 2)
    assert classify(H, taus=[2, 2]).anomalous
    assert not classify(H, taus=[2, 3]).anomalous


def test_locate_examples():
    assert locate_complete_cusps(normalize(keep(1, 2), 2)) == [1]
    H = normalize(keep(1, 3) + [[0, 0, 1, 1, 0, 0]], 3)
    assert 1 in locate_complete_cusps(H)
    with pytest.raises(PreconditionError):
        locate_complete_cusps(normalize([[1, 0, 1, 0], [0, 1, 0, 1]], 2))


def jacobian_rows(rows, n):
    return [r[0::2] for r in rows], [r[1::2] for r in rows]


@given(st.integers(0, 10**6))
def test_classification_depends_only_on_the_lattice(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    k = rng.randint(1, 2 * n)
    rows = [[rng.randint(-2, 2) for _ in range(2 * n)] for _ in range(k)]
    if not any(map(any, rows)):
        return
    H = normalize(rows, n)
    # a unimodular recombination of the rows plus a redundant combination
    mixed = [r[:] for r in rows]
    for _ in range(5):
        i, j = rng.randrange(k), rng.randrange(k)
        if i != j:
            f = rng.randint(-3, 3)
            mixed[i] = [x + f * y for x, y in zip(mixed[i], mixed[j])]
    mixed.append([sum(rng.randint(-1, 1) * r[c] for r in rows) for c in range(2 * n)])
    rep = classify(H)
    assert classify(normalize(mixed, n)).anomalous == rep.anomalous
    # independent rank oracle on the raw rows
    a, b = jacobian_rows(rows, n)
    assert rep.jacobian_rank == sampled_rank(a, b, rng, 10)


@given(st.integers(0, 10**6))
def test_located_cusps_cover_kept_cusps(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    i = rng.randint(1, n)
    extra = [[rng.randint(-2, 2) for _ in range(2 * n)] for _ in range(rng.randint(0, 2))]
    H = normalize(keep(i, n) + extra, n)
    rep = classify(H)
    if rep.anomalous:
        assert i in locate_complete_cusps(H)


def test_located_cusps_match_tangent_space_oracle():
    rng = random.Random(5)
    seen = 0
    for _ in range(300):
        n = rng.randint(2, 3)
        rows = [[rng.randint(-1, 1) for _ in range(2 * n)] for _ in range(rng.randint(1, n + 1))]
        if not any(map(any, rows)):
            continue
        H = normalize(rows, n)
        rep = classify(H)
        if not rep.anomalous:
            continue
        seen += 1
        a, b = jacobian_rows([list(r) for r in H.rows], n)
        # cusp i is complete iff appending e_i keeps the generic rank
        for i in range(1, n + 1):
            e = [int(j == i - 1) for j in range(n)]
            grown = sampled_rank(a + [e], b + [[0] * n], rng, 10)
            assert (i in rep.complete_cusps) == (grown == rep.jacobian_rank)
    assert seen > 0


# ------------------------------------------------------------------ block structure


def test_block_structure_examples():
    assert block_structure(normalize(keep(1, 2), 2)) == [frozenset({1})]
    assert block_structure(normalize([[1, 0, 1, 0]], 2)) == [frozenset({1, 2})]
    assert block_structure(normalize([[1, 0, 0, 0], [0, 0, 0, 1]], 2)) == [frozenset({1}), frozenset({2})]


def test_rank_deficient_pairs_live_on_one_cusp_n3():
    """Every 2-row subgroup of rank 2 in [-1,1]^6 with Jacobian rank 1 is single-cusp."""
    vals = (-1, 0, 1)
    rows = [r for r in product(vals, repeat=6) if any(r)]
    checked = 0
    for r1, r2 in combinations(rows, 2):
        if naive_rank([r1, r2]) < 2:
            continue
        a, b = jacobian_rows([r1, r2], 3)
        if minor_rank(JacobianMatrix(a, b)) >= 2:
            continue
        checked += 1
        blocks = block_structure(normalize([r1, r2], 3))
        assert len(blocks) == 1 and len(blocks[0]) == 1, (r1, r2)
    assert checked > 0


# ------------------------------------------------------------------ pair families


ZERO_PAIR = PairFamily([[E1, E2], [Z, Z]])
SCALED = PairFamily([[E1, [2, 0]], [E2, [0, 3]]])
N3 = PairFamily([[[1, 0, 0], [0, 1, 0]], [[0, 1, 0], [1, 0, 0]], [[1, 1, 0], [1, 1, 0]]])


def test_hypothesis_examples():
    assert check_hypothesis(ZERO_PAIR)
    assert not check_hypothesis(SCALED)
    assert independent_selection(SCALED) == (0, 0)
    assert check_hypothesis(N3)
    # every selection lies in span{e1, e2}
    for choice in product((0, 1), repeat=3):
        assert naive_rank([N3.vector(i + 1, s) for i, s in enumerate(choice)]) <= 2


def test_bruteforce_examples():
    S = deficient_subset_bruteforce(ZERO_PAIR)
    assert S.indices == (2,) and S.achieved_rank == 0
    S = deficient_subset_bruteforce(N3)
    assert S.indices == (3,) and S.achieved_rank == 1
    with pytest.raises(HypothesisFailed) as exc:
        deficient_subset_bruteforce(SCALED)
    assert exc.value.witness == (0, 0)


def test_constructive_examples():
    assert deficient_subset_constructive(ZERO_PAIR).indices == (2,)
    S = deficient_subset_constructive(N3)
    assert is_deficient(N3, S.indices) and S.achieved_rank <= len(S.indices)
    with pytest.raises(HypothesisFailed):
        deficient_subset_constructive(SCALED)


def test_single_pair_is_vacuous():
    F = PairFamily([[[0], [0]]])
    assert deficient_subset_bruteforce(F).indices == ()
    S = deficient_subset_constructive(F)
    assert S.indices == () and S.trace["vacuous"]


def test_pair_family_json():
    assert PairFamily.from_json(N3.to_json()) == N3
    with pytest.raises(InputError):
        PairFamily.from_json({"n": 2, "pairs": [[[1, 0], [0]], [[0, 1], [1, 0]]]})
    with pytest.raises(InputError):
        PairFamily.from_json({"pairs": [[[1, 0]]]})


def deficient_oracle(F):
    """Existence of a nonempty proper subset with rank at most its size, via sympy."""
    for size in range(1, F.n):
        for S in combinations(range(1, F.n + 1), size):
            vecs = [list(x) for i in S for x in F.pairs[i - 1]]
            if sympy.Matrix(vecs).rank() <= size:
                return True
    return False


def structured_family(rng, n):
    """Pairs confined to a random subspace of dimension below n, or with a zero pair."""
    kind = rng.randrange(3)
    if kind == 0:
        basis = [[rng.randint(-1, 1) for _ in range(n)] for _ in range(n - 1)]
        vec = lambda: [sum(rng.randint(-1, 1) * b[c] for b in basis) for c in range(n)]
    else:
        vec = lambda: [rng.randint(-1, 1) for _ in range(n)]
    pairs = [[vec(), vec()] for _ in range(n)]
    if kind == 1:
        pairs[rng.randrange(n)] = [[0] * n, [0] * n]
    return PairFamily(pairs)


@given(st.integers(0, 10**6))
def test_deficient_subsets_agree_with_oracle(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 4)
    F = structured_family(rng, n)
    if not check_hypothesis(F):
        with pytest.raises(HypothesisFailed):
            deficient_subset_constructive(F)
        return
    assert deficient_oracle(F)
    brute = deficient_subset_bruteforce(F)
    cons = deficient_subset_constructive(F)
    for S in (brute, cons):
        assert is_deficient(F, S.indices)
        assert S.achieved_rank == naive_rank([x for i in S.indices for x in F.pairs[i - 1]] or [[0]])
    assert len(brute.indices) <= len(cons.indices)
