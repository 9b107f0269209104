"""Independent oracles and random instance builders shared by the tests.

The oracles deliberately avoid the package's own kernels: ranks use a
plain Fraction elimination, polynomial algebra uses sympy.
"""

from fractions import Fraction
from itertools import product

import sympy

from anomalous.series import LinearForm, PotentialSeries
from anomalous.taufield import TauScalar


def naive_rank(rows):
    A = [[Fraction(x) for x in r] for r in rows]
    rank, ncols = 0, len(A[0]) if A else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for i in range(len(A)):
            if i != rank and A[i][c] != 0:
                f = A[i][c] / A[rank][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[rank])]
        rank += 1
    return rank


def in_int_lattice(A, b):
    """b is an integer combination of the independent rows of A (Fraction solve)."""
    if not A:
        return not any(b)
    M = sympy.Matrix(A).T
    sol, params = M.gauss_jordan_solve(sympy.Matrix(b))
    if params.shape[0]:
        return False
    return all(x.is_integer for x in sol)


def det_divisor(rows):
    """gcd of the maximal nonzero minors; the covolume of the row lattice in its span."""
    from itertools import combinations
    from math import gcd

    M = sympy.Matrix(rows)
    r = M.rank()
    if r == 0:
        return r, 0
    g = 0
    for R in combinations(range(M.rows), r):
        for C in combinations(range(M.cols), r):
            g = gcd(g, int(M.extract(list(R), list(C)).det()))
    return r, g


def same_lattice(basis, gens):
    """Row lattice of the independent ``basis`` equals that of ``gens``.

    Containment one way plus equal determinantal divisors forces equality.
    """
    return all(in_int_lattice(basis, g) for g in gens) and det_divisor(basis) == det_divisor(gens)


def is_hnf(rows):
    """Row-style Hermite shape: positive pivots stepping right, reduced entries above."""
    last = -1
    pivots = []
    for r in rows:
        p = next((j for j, x in enumerate(r) if x), None)
        if p is None or p <= last or r[p] <= 0:
            return False
        last = p
        pivots.append(p)
    for k, p in enumerate(pivots):
        for i in range(k):
            if not 0 <= rows[i][p] < rows[k][p]:
                return False
    return True


def random_rational(rng, big=10**6):
    return Fraction(rng.randint(-big, big), rng.randint(1, big))


def sampled_rank(a, b, rng, samples=25):
    """Max over random rational substitutions of the evaluated rank."""
    n = len(a[0])
    best = 0
    for _ in range(samples):
        t = [random_rational(rng) for _ in range(n)]
        rows = [[x + tj * y for x, y, tj in zip(ra, rb, t)] for ra, rb in zip(a, b)]
        best = max(best, naive_rank(rows))
    return best


U = sympy.symbols("u1:9")
T = sympy.symbols("t1:9")


def tau_sym(x: TauScalar):
    total = 0
    for mask, q in x.terms.items():
        term = sympy.Rational(q.numerator, q.denominator)
        for i in range(x.n):
            if mask >> i & 1:
                term *= T[i]
        total += term
    return total


def coeff_sym(c):
    if isinstance(c, TauScalar):
        return tau_sym(c)
    return sympy.Rational(c.numerator, c.denominator)


def poly_sym(p, n):
    return sympy.expand(sum(coeff_sym(c) * sympy.prod([U[i] ** e[i] for i in range(n)]) for e, c in p.items()))


def potential_sym(phi: PotentialSeries):
    return poly_sym(phi.as_dict(), phi.n)


def truncate_sym(expr, n, top):
    expr = sympy.expand(expr)
    if expr == 0:
        return expr
    P = sympy.Poly(expr, *U[:n])
    return sympy.expand(sum(c * sympy.prod([U[i] ** m[i] for i in range(n)])
                            for m, c in P.terms() if sum(m) <= top))


def random_tau_scalar(rng, n, max_terms=3):
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        terms[rng.randrange(1 << n)] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    return TauScalar(n, terms)


def random_potential(rng, n, D=8, mode="symbolic", density=0.4, variables=None):
    """Random even potential; ``variables`` restricts which u's appear."""
    variables = list(range(n)) if variables is None else list(variables)
    terms = {}
    for d in range(4, D + 1, 2):
        for half in product(range(d // 2 + 1), repeat=len(variables)):
            if sum(half) != d // 2 or rng.random() > density:
                continue
            e = [0] * n
            for v, h in zip(variables, half):
                e[v] = 2 * h
            if mode == "symbolic":
                c = random_tau_scalar(rng, n)
            else:
                c = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
            if c:
                terms[tuple(e)] = c
    tau = None
    if mode == "rational":
        tau = [Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 5)) for _ in range(n)]
    return PotentialSeries(n, terms, D, mode, tau)


def sum_potentials(parts, n, D, mode="symbolic"):
    terms = {}
    for p in parts:
        for e, c in p.higher_terms().items():
            terms[e] = terms.get(e, 0) + c
    return PotentialSeries(n, terms, D, mode)


def random_form(rng, n, cusps, lo=-3, hi=3):
    """Random linear form in u_j, v_j for j in ``cusps`` (1-based), nonzero u-part."""
    while True:
        u = {j: rng.randint(lo, hi) for j in cusps}
        v = {j: rng.randint(lo, hi) for j in cusps}
        if any(u.values()):
            return LinearForm.of(n, u, v)


def random_staircase(rng, l, width):
    """Forms y_k on u_1..u_width with stepping supports and nonzero coefficients in [-5,5]; None if no room."""
    starts = sorted(rng.sample(range(width - 1), l))
    ends = []
    for k, j in enumerate(starts):
        lo = max(j + 1, ends[-1] + 1 if ends else 0)
        hi = width - (l - k)
        if lo > hi:
            return None
        ends.append(rng.randint(lo, hi))
    forms = []
    for j, e in zip(starts, ends):
        forms.append([rng.choice([-5, -4, -3, -2, -1, 1, 2, 3, 4, 5]) if j <= i <= e else 0 for i in range(width)])
    return forms
