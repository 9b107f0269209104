import random
from itertools import product

import pytest
from hypothesis import given, strategies as st

from anomalous.errors import EmptyRelation, InputError, NotAnomalousConsistent
from anomalous.qlinalg import lattice_contains, q_rank
from anomalous.subgroup import (
    BAnomalyDatum,
    b_value,
    from_json,
    jacobian,
    jacobian_from_rows,
    normalize,
    saturate,
    support_subgroup,
)
from anomalous.taufield import JacobianMatrix, TauScalar, minor_rank
from helpers import in_int_lattice, is_hnf, same_lattice


def test_duplicate_rows_collapse():
    H = normalize([[1, 0, 0, 0], [1, 0, 0, 0]], 2)
    assert H.rows == ((1, 0, 0, 0),) and H.codim == 1


def test_already_normal():
    H = normalize([[2, 0, 0, 0], [0, 2, 0, 0]], 2)
    assert H.rows == ((2, 0, 0, 0), (0, 2, 0, 0)) and H.codim == 2


def test_one_subtraction():
    raw = [[1, 1, 0, 0], [0, 1, 0, 0]]
    H = normalize(raw, 2)
    assert is_hnf(H.rows) and same_lattice([list(r) for r in H.rows], raw)
    assert H.rows == ((1, 0, 0, 0), (0, 1, 0, 0))


def test_all_zero_rows_are_rejected():
    with pytest.raises(EmptyRelation):
        normalize([[0, 0, 0, 0]], 2)


def test_row_length_is_checked():
    with pytest.raises(InputError):
        normalize([[1, 0, 0]], 2)


def test_jacobian_keeping_first_cusp():
    J = jacobian(normalize([[1, 0, 0, 0], [0, 1, 0, 0]], 2))
    assert J == JacobianMatrix([[1, 0], [0, 0]], [[0, 0], [1, 0]])
    assert J.scalar(1, 0) == TauScalar.tau(1, 2)


def test_jacobian_diagonal_relations():
    J = jacobian(normalize([[1, 0, 1, 0], [0, 1, 0, 1]], 2))
    # row i, column j: a_ij + tau_j b_ij read straight off (M1 M2, L1 L2)
    assert [[J.scalar(i, j) for j in range(2)] for i in range(2)] == [
        [TauScalar.const(1, 2), TauScalar.const(1, 2)],
        [TauScalar.tau(1, 2), TauScalar.tau(2, 2)],
    ]


def test_jacobian_single_entry():
    J = jacobian(normalize([[1, 1]], 1))
    assert J.scalar(0, 0) == TauScalar.const(1, 1) + TauScalar.tau(1, 1)


def test_support_kills_other_cusp():
    H = normalize([[1, 0, 0, 1], [0, 1, 0, -1]], 2)
    S = support_subgroup(H, {1})
    # the sum of the two rows is (1,1,0,0)
    assert [a + b for a, b in zip(*H.rows)] == [1, 1, 0, 0]
    assert S.rows == ((1, 1, 0, 0),)
    # nothing else supported on cusp 1 lies in the lattice
    for x in product(range(-4, 5), repeat=2):
        v = [x[0] * a + x[1] * b for a, b in zip(*H.rows)]
        if v[2] == v[3] == 0:
            assert in_int_lattice([list(S.rows[0])], v)


def test_support_fixed_point():
    H = normalize([[2, 1, 0, 0], [0, 3, 0, 0]], 2)
    assert support_subgroup(H, {1}) == H


def test_support_empty():
    H = normalize([[1, 0, 1, 0]], 2)
    assert support_subgroup(H, {1}).codim == 0


def test_b_value_examples():
    assert b_value(normalize([[1, 0, 0, 0], [0, 1, 0, 0]], 2), 1).b == 1
    assert b_value(normalize([[1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]], 3), 1).b == 0
    with pytest.raises(NotAnomalousConsistent):
        # dim H = 3, expected dimension 3 + 2 - 4 = 1 > 0
        b_value(normalize([[1, 0, 0, 0]], 2), 0)


def test_b_datum_checks_balance():
    with pytest.raises(NotAnomalousConsistent):
        BAnomalyDatum(b=1, dim_intersection=1, dim_subgroup=3, n=2)


def test_json_round_trip_and_errors():
    H = from_json({"n": 2, "rows": [[0, 1, 0, 0], [1, 1, 0, 0]]})
    assert H.canonical_json() == '{"n":2,"rows":[[1,0,0,0],[0,1,0,0]]}'
    assert from_json(H.to_json()) == H
    for bad in ({"rows": []}, {"n": 0, "rows": []}, {"n": 2, "rows": [[1, 0]]}, {"n": 2, "rows": [["a", 0, 0, 0]]}):
        with pytest.raises(InputError):
            from_json(bad)


def test_saturation():
    H = normalize([[2, 0, 0, 0], [0, 1, 0, 0]], 2)
    assert saturate(H).rows == ((1, 0, 0, 0), (0, 1, 0, 0))


# ------------------------------------------------------------------ properties


def raw_relations(n_max=3, rows_max=3):
    return st.integers(1, n_max).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.lists(st.lists(st.integers(-3, 3), min_size=2 * n, max_size=2 * n), min_size=1, max_size=rows_max).filter(
                lambda rows: any(map(any, rows))
            ),
        )
    )


@given(raw_relations(), st.randoms(use_true_random=False))
def test_normalize_idempotent_and_order_free(nr, rng):
    n, rows = nr
    H = normalize(rows, n)
    assert normalize(H.rel, n) == H
    shuffled = rows[:]
    rng.shuffle(shuffled)
    assert normalize(shuffled, n) == H
    assert H.codim == q_rank(rows)


@given(raw_relations(), st.sets(st.integers(1, 3)))
def test_support_rows_are_supported_combinations(nr, S):
    n, rows = nr
    S = {i for i in S if i <= n}
    H = normalize(rows, n)
    out = support_subgroup(H, S)
    for r in out.rows:
        assert all(not r[2 * j - 2] and not r[2 * j - 1] for j in range(1, n + 1) if j not in S)
        assert in_int_lattice([list(h) for h in H.rows], list(r))


@given(raw_relations())
def test_support_on_all_cusps_is_identity(nr):
    n, rows = nr
    H = normalize(rows, n)
    out = support_subgroup(H, range(1, n + 1))
    assert lattice_contains(out.rel, H.rel) and lattice_contains(H.rel, out.rel)


@given(raw_relations())
def test_jacobian_rank_survives_normalization(nr):
    n, rows = nr
    assert minor_rank(jacobian(normalize(rows, n))) == minor_rank(jacobian_from_rows(rows, n))


def test_support_subgroup_after_successful_fit():
    """H = (m+1 rows on cusps 1..m) + l generic rows: the support group has codim >= m+1
    whenever the first-row relation fits through the remaining s-forms."""
    from anomalous.series import LinearForm, PotentialSeries, theta_fit

    rng = random.Random(11)
    checked = 0
    for _ in range(20):
        m, l = 1, 1
        n = m + l + 1
        local = []
        while len(local) < m + 1 or q_rank(local) < m + 1:
            row = [rng.randint(-2, 2) if k < 2 * m else 0 for k in range(2 * n)]
            if any(row):
                local.append(row)
        local = local[: m + 1]
        if q_rank(local) < m + 1:
            continue
        generic = [[rng.randint(-2, 2) for _ in range(2 * n)] for _ in range(l)]
        H = normalize(local + generic, n)
        phi = PotentialSeries(n, {(4, 0, 0): 1, (0, 2, 2): 1}, D=6)
        forms = [LinearForm(tuple(r)) for r in local]
        try:
            fit = theta_fit(phi, forms[0], forms[1:], lift=False)
        except Exception:
            continue
        if fit.success:
            checked += 1
            assert support_subgroup(H, range(1, m + 1)).codim >= m + 1
    assert checked > 0
