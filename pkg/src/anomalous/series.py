"""Truncated even potentials Phi(u_1..u_n), their log branches, and fits.

Series are sparse maps from exponent tuples to coefficients.  Coefficients
are :class:`TauScalar` values in ``"symbolic"`` mode and Fractions in
``"rational"`` mode, where concrete cusp shapes have been substituted.  The
quadratic part of every potential is ``sum tau_i u_i^2``; listing it is
optional.  All claims hold through total degree ``D - 1`` of the branch.

Fitting a target form as ``Theta(generators)`` needs division by
tau-dependent pivots, which the squarefree span does not support.  Symbolic
fits therefore run on several random rational cusp-shape samples and must
agree; see :func:`theta_fit`.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from .errors import (
    DependentGenerators,
    InputError,
    MalformedStaircase,
    ParityViolation,
    PreconditionError,
    UnstableFit,
)
from .qlinalg import as_rat, q_rank, rat_str, rref
from .taufield import MAX_CUSPS, JacobianMatrix, TauScalar, minor_rank

MODES = ("symbolic", "rational")
DEFAULT_D = 8

Exp = tuple


def grlex_key(e: Sequence[int]):
    """Total degree first, then larger exponents on earlier variables first."""
    return (sum(e), tuple(-x for x in e))


def monomial_str(e: Sequence[int], var: str = "u") -> str:
    parts = [f"{var}{i}" if x == 1 else f"{var}{i}^{x}" for i, x in enumerate(e, 1) if x]
    return "*".join(parts) or "1"


def _acc(out: dict, e, c):
    v = out[e] + c if e in out else c
    if v:
        out[e] = v
    else:
        out.pop(e, None)


def _unit(n: int, i: int) -> tuple:
    return tuple(int(j == i) for j in range(n))


def poly_mul(p: Mapping, q: Mapping, top: int) -> dict:
    """Product truncated to total degree ``top``."""
    out: dict = {}
    for e1, c1 in p.items():
        d1 = sum(e1)
        for e2, c2 in q.items():
            if d1 + sum(e2) <= top:
                _acc(out, tuple(x + y for x, y in zip(e1, e2)), c1 * c2)
    return out


def poly_diff(p: Mapping, i: int) -> dict:
    """Partial derivative in the 0-based variable i."""
    out: dict = {}
    for e, c in p.items():
        if e[i]:
            _acc(out, e[:i] + (e[i] - 1,) + e[i + 1:], c * e[i])
    return out


def poly_truncate(p: Mapping, top: int) -> dict:
    return {e: c for e, c in p.items() if sum(e) <= top}


def compositions(k: int, r: int):
    """Exponent tuples of length r summing to k, in descending lexicographic order."""
    if r == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in compositions(k - first, r - 1):
            yield (first,) + rest


def _check_mode(mode: str):
    if mode not in MODES:
        raise InputError(f"mode must be one of {MODES}, got {mode!r}")


class PotentialSeries:
    """Even truncated potential with quadratic part ``sum tau_i u_i^2``."""

    __slots__ = ("n", "D", "mode", "tau", "_terms")

    def __init__(self, n: int, terms: Mapping | None = None, D: int = DEFAULT_D,
                 mode: str = "symbolic", tau: Sequence | None = None):
        _check_mode(mode)
        if not isinstance(n, int) or not 1 <= n <= MAX_CUSPS:
            raise InputError(f"cusp count must be an integer in [1, {MAX_CUSPS}]")
        if not isinstance(D, int) or D < 2:
            raise InputError("truncation degree D must be an integer >= 2")
        if mode == "rational":
            if tau is None or len(tau) != n:
                raise InputError(f"rational mode needs {n} tau values")
            tau = tuple(as_rat(t) for t in tau)
        elif tau is not None:
            raise InputError("tau values are only accepted in rational mode")
        self.n, self.D, self.mode, self.tau = n, D, mode, tau
        quad = {tuple(2 * x for x in _unit(n, i)): self._quad(i) for i in range(n)}
        out = {e: c for e, c in quad.items() if c}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != n or not all(isinstance(x, int) and x >= 0 for x in e):
                raise InputError(f"exponent {list(e)} is not a length-{n} vector of naturals")
            if any(x % 2 for x in e):
                raise ParityViolation(f"monomial {monomial_str(e)} has an odd exponent", e)
            c = self._coerce(c)
            d = sum(e)
            if d < 2:
                raise InputError(f"monomial {monomial_str(e)} has degree {d} < 2")
            if d == 2:
                if c != quad[e]:
                    raise InputError(f"coefficient of {monomial_str(e)} must equal its cusp shape")
                continue
            if d <= D and c:
                _acc(out, e, c)
        self._terms = out

    def _quad(self, i: int):
        if self.mode == "symbolic":
            return TauScalar.tau(i + 1, self.n)
        return self.tau[i]

    def _coerce(self, c):
        if self.mode == "symbolic":
            if isinstance(c, TauScalar):
                if c.n != self.n:
                    raise InputError("coefficient has the wrong cusp count")
                return c
            return TauScalar.const(as_rat(c), self.n)
        if isinstance(c, TauScalar):
            raise InputError("rational mode takes rational coefficients")
        return as_rat(c)

    def zero(self):
        return TauScalar(self.n) if self.mode == "symbolic" else Fraction(0)

    def terms(self) -> list:
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]))

    def as_dict(self) -> dict:
        return dict(self._terms)

    def coeff(self, e: Sequence[int]):
        return self._terms.get(tuple(e), self.zero())

    def higher_terms(self) -> dict:
        return {e: c for e, c in self._terms.items() if sum(e) > 2}

    def shape(self, i: int):
        """Cusp shape of cusp i (1-based): tau_i symbolically, or its value."""
        return self._quad(i - 1)

    def substitute(self, taus: Sequence) -> PotentialSeries:
        """Rational-mode copy with tau_i := taus[i]."""
        if self.mode == "rational":
            raise PreconditionError("series is already rational")
        taus = [as_rat(t) for t in taus]
        return PotentialSeries(
            self.n, {e: c.evaluate(taus) for e, c in self.higher_terms().items()},
            self.D, "rational", taus,
        )

    def with_truncation(self, D: int) -> PotentialSeries:
        return PotentialSeries(self.n, self.higher_terms(), D, self.mode, self.tau)

    def __eq__(self, other):
        return (isinstance(other, PotentialSeries)
                and (self.n, self.D, self.mode, self.tau, self._terms)
                == (other.n, other.D, other.mode, other.tau, other._terms))

    def __repr__(self):
        return f"PotentialSeries(n={self.n}, D={self.D}, mode={self.mode}, {series_str(self._terms)})"

    def to_json(self) -> dict:
        out = {"n": self.n, "D": self.D, "mode": self.mode}
        if self.mode == "rational":
            out["tau"] = [rat_str(t) for t in self.tau]
        out["terms"] = [{"u": list(e), "coeff": coeff_json(c)} for e, c in self.terms()
                        if sum(e) > 2]
        return out

    @classmethod
    def from_json(cls, obj) -> PotentialSeries:
        if not isinstance(obj, dict):
            raise InputError("potential must be a JSON object")
        if "n" not in obj:
            raise InputError("missing field 'n'")
        n = obj["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise InputError("field 'n' must be a positive integer")
        D = obj.get("D", DEFAULT_D)
        mode = obj.get("mode", "symbolic")
        tau = obj.get("tau")
        try:
            if tau is not None:
                tau = [as_rat(t) for t in tau]
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"field 'tau': {exc}") from None
        terms = {}
        for k, t in enumerate(obj.get("terms", [])):
            where = f"field 'terms[{k}]'"
            if not isinstance(t, dict) or "u" not in t or "coeff" not in t:
                raise InputError(f"{where} needs 'u' and 'coeff'")
            e = t["u"]
            if not isinstance(e, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in e):
                raise InputError(f"{where}.u must be a list of integers")
            if len(e) != n or any(x < 0 for x in e):
                raise InputError(f"{where}.u must hold {n} nonnegative exponents")
            try:
                c = coeff_from_json(t["coeff"], n, mode)
            except (TypeError, ValueError, ZeroDivisionError, KeyError) as exc:
                raise InputError(f"{where}.coeff: {exc}") from None
            if tuple(e) in terms:
                raise InputError(f"{where} repeats monomial {monomial_str(e)}")
            terms[tuple(e)] = c
        try:
            return cls(n, terms, D, mode, tau)
        except ParityViolation as exc:
            idx = list(terms).index(exc.monomial) if exc.monomial in terms else None
            where = f"field 'terms[{idx}]': " if idx is not None else ""
            raise ParityViolation(where + str(exc), exc.monomial) from None


def coeff_json(c):
    return c.to_json() if isinstance(c, TauScalar) else rat_str(c)


def coeff_from_json(c, n: int, mode: str):
    if isinstance(c, list):
        if mode != "symbolic":
            raise ValueError("tau-monomial coefficients need symbolic mode")
        return TauScalar.from_json(c, n)
    if isinstance(c, bool) or not isinstance(c, (int, str)):
        raise ValueError(f"cannot read {c!r} as a coefficient")
    return as_rat(c)


def coeff_str(c) -> str:
    if isinstance(c, TauScalar):
        s = str(c)
        return f"({s})" if len(c.terms) > 1 else s
    return rat_str(c)


def series_str(p: Mapping, var: str = "u") -> str:
    if not p:
        return "0"
    parts = []
    for e, c in sorted(p.items(), key=lambda kv: grlex_key(kv[0])):
        mono = monomial_str(e, var)
        if mono == "1":
            parts.append(coeff_str(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{coeff_str(c)}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class LogBranch:
    """Components v_1..v_n as truncated series in u; built by hand or from a potential.

    Hand-built branches are not parity-checked on construction; use
    :meth:`parity_violations` to inspect them.
    """

    n: int
    D: int
    components: tuple
    mode: str = "symbolic"
    tau: tuple | None = None

    def component(self, i: int) -> dict:
        return dict(self.components[i - 1])

    def with_term(self, i: int, e: Sequence[int], c) -> LogBranch:
        comps = [dict(v) for v in self.components]
        _acc(comps[i - 1], tuple(e), c)
        return LogBranch(self.n, self.D, tuple(comps), self.mode, self.tau)

    def parity_violations(self) -> list[tuple[int, tuple]]:
        """(i, monomial) pairs where v_i is not odd in u_i and even elsewhere."""
        bad = []
        for i, v in enumerate(self.components, 1):
            for e in sorted(v, key=grlex_key):
                if any((x % 2) != (j == i - 1) for j, x in enumerate(e)):
                    bad.append((i, e))
        return bad

    def linear_part(self, i: int) -> dict:
        return {e: c for e, c in self.components[i - 1].items() if sum(e) == 1}

    def to_json(self) -> dict:
        return {"n": self.n, "D": self.D, "mode": self.mode, "v": [
            [{"u": list(e), "coeff": coeff_json(c)} for e, c in sorted(v.items(), key=lambda kv: grlex_key(kv[0]))]
            for v in self.components
        ]}


def branch_from_potential(phi: PotentialSeries) -> LogBranch:
    """v_i = (1/2) dPhi/du_i, through degree D - 1."""
    comps = []
    half = Fraction(1, 2)
    for i in range(phi.n):
        comps.append({e: c * half for e, c in poly_diff(phi.as_dict(), i).items()})
    return LogBranch(phi.n, phi.D, tuple(comps), phi.mode, phi.tau)


def _as_branch(x) -> LogBranch:
    return x if isinstance(x, LogBranch) else branch_from_potential(x)


def mixed_partial_check(x) -> bool:
    """dv_i/du_j == dv_j/du_i through degree D - 2 for all i < j."""
    br = _as_branch(x)
    top = br.D - 2
    for i, j in combinations(range(br.n), 2):
        if poly_truncate(poly_diff(br.components[i], j), top) != poly_truncate(poly_diff(br.components[j], i), top):
            return False
    return True


def _support(S, n: int, name: str) -> frozenset:
    S = frozenset(S)
    if any(not 1 <= i <= n for i in S):
        raise PreconditionError(f"{name} has indices outside 1..{n}")
    return S


def sgi_check(phi, A: Iterable[int]) -> bool:
    """Each v_i (i in A) involves only u_j with j in A."""
    br = _as_branch(phi)
    A = _support(A, br.n, "A")
    if not A or len(A) == br.n:
        raise PreconditionError("A must be a nonempty proper subset of the cusps")
    outside = [j - 1 for j in range(1, br.n + 1) if j not in A]
    return not any(e[j] for i in A for e in br.components[i - 1] for j in outside)


def wgi_check(phi, A: Iterable[int], B: Iterable[int], C: Iterable[int]) -> bool:
    """After u_j := 0 for j in C, each v_i (i in A) is free of u_j for j in B."""
    br = _as_branch(phi)
    A, B, C = (_support(S, br.n, nm) for S, nm in ((A, "A"), (B, "B"), (C, "C")))
    if not A or not B:
        raise PreconditionError("A and B must be nonempty")
    if A & B or A & C or B & C or (A | B | C) != frozenset(range(1, br.n + 1)):
        raise PreconditionError("A, B, C must partition the cusps")
    for i in A:
        for e in br.components[i - 1]:
            if any(e[j - 1] for j in C):
                continue
            if any(e[j - 1] for j in B):
                return False
    return True


_TOKEN = re.compile(r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*?\s*)?([uv])(\d+)\s*")


@dataclass(frozen=True)
class LinearForm:
    """Rational coefficients on (u_1, v_1, ..., u_n, v_n)."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(as_rat(c) for c in self.coeffs))
        if len(self.coeffs) % 2:
            raise InputError("a linear form needs an even number of coefficients")
        if not any(self.coeffs):
            raise InputError("a linear form must not be identically zero")

    @property
    def n(self) -> int:
        return len(self.coeffs) // 2

    @classmethod
    def of(cls, n: int, u: Mapping[int, object] = None, v: Mapping[int, object] = None) -> LinearForm:
        c = [Fraction(0)] * (2 * n)
        for i, q in (u or {}).items():
            c[2 * i - 2] = as_rat(q)
        for i, q in (v or {}).items():
            c[2 * i - 1] = as_rat(q)
        return cls(tuple(c))

    @classmethod
    def u(cls, i: int, n: int) -> LinearForm:
        return cls.of(n, u={i: 1})

    @classmethod
    def v(cls, i: int, n: int) -> LinearForm:
        return cls.of(n, v={i: 1})

    @classmethod
    def parse(cls, text: str, n: int) -> LinearForm:
        """Read forms such as ``"2*u1 - v2 + 1/2 u3"``."""
        c = [Fraction(0)] * (2 * n)
        pos, first = 0, True
        text = text.strip()
        if not text:
            raise InputError("empty linear form")
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos or (m.group(1) is None and not first):
                raise InputError(f"cannot parse linear form {text!r} at position {pos}")
            sign = -1 if m.group(1) == "-" else 1
            q = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            i = int(m.group(4))
            if not 1 <= i <= n:
                raise InputError(f"variable {m.group(3)}{i} outside 1..{n}")
            c[2 * i - 2 + (m.group(3) == "v")] += sign * q
            pos, first = m.end(), False
        return cls(tuple(c))

    def u_coeff(self, j: int) -> Fraction:
        return self.coeffs[2 * j - 2]

    def v_coeff(self, j: int) -> Fraction:
        return self.coeffs[2 * j - 1]

    def __str__(self):
        parts = []
        for k, q in enumerate(self.coeffs):
            if q:
                name = ("u", "v")[k % 2] + str(k // 2 + 1)
                parts.append(name if q == 1 else f"-{name}" if q == -1 else f"{rat_str(q)}*{name}")
        return " + ".join(parts).replace("+ -", "- ")


def combine(forms: Sequence[LinearForm], row: Sequence) -> LinearForm:
    """The form sum_k row[k] * forms[k]."""
    n2 = len(forms[0].coeffs)
    return LinearForm(tuple(sum((as_rat(r) * f.coeffs[j] for r, f in zip(row, forms)), Fraction(0)) for j in range(n2)))


def expand_form(form: LinearForm, br: LogBranch) -> dict:
    """The series a.u + b.v(u), through degree D - 1."""
    if form.n != br.n:
        raise InputError(f"form has {form.n} cusps, branch has {br.n}")
    out: dict = {}
    for j in range(1, br.n + 1):
        a, b = form.u_coeff(j), form.v_coeff(j)
        if a:
            _acc(out, _unit(br.n, j - 1), a)
        if b:
            for e, c in br.components[j - 1].items():
                _acc(out, e, c * b)
    return out


def linear_jacobian(forms: Sequence[LinearForm]) -> JacobianMatrix:
    """Linear parts of the forms as rows ``a_j + tau_j b_j``."""
    n = forms[0].n
    return JacobianMatrix([[f.u_coeff(j) for j in range(1, n + 1)] for f in forms],
                          [[f.v_coeff(j) for j in range(1, n + 1)] for f in forms], n)


@dataclass
class ThetaFit:
    """Outcome of fitting ``s0 = Theta(gens)`` through degree D - 1.

    ``theta`` maps exponent tuples over the generators to coefficients:
    Fractions in rational mode, TauScalars when a symbolic fit could be
    lifted, else None.  ``sample_thetas`` holds the per-sample rational
    coefficients that decided the verdict.
    """

    s0: LinearForm
    gens: tuple
    D: int
    mode: str
    success: bool
    failed_degree: int | None = None
    residual: tuple | None = None
    theta: dict | None = None
    samples: list = field(default_factory=list)
    sample_thetas: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "target": str(self.s0),
            "generators": [str(g) for g in self.gens],
            "D": self.D,
            "mode": self.mode,
            "success": self.success,
        }
        if not self.success:
            out["failed_degree"] = self.failed_degree
            out["residual_monomial"] = monomial_str(self.residual)
        elif self.theta is not None:
            out["theta"] = [{"s": list(b), "coeff": coeff_json(c)}
                            for b, c in sorted(self.theta.items(), key=lambda kv: grlex_key(kv[0]))]
        if self.mode == "symbolic":
            out["tau_samples"] = [[rat_str(t) for t in s] for s in self.samples]
        return out

    def theta_str(self) -> str:
        if self.theta is None:
            return "(coefficients not multilinear in tau)"
        return series_str(self.theta, "s")


def _fit_rational(br: LogBranch, s0: LinearForm, gens: Sequence[LinearForm]):
    """Degree-by-degree solve; returns (ok, failed_degree, residual, theta)."""
    n, top, r = br.n, br.D - 1, len(gens)
    target = expand_form(s0, br)
    G = [expand_form(g, br) for g in gens]
    lin = [{e: c for e, c in g.items() if sum(e) == 1} for g in G]
    one = {(0,) * n: Fraction(1)}
    pw: dict = {(0,) * r: one}
    lp: dict = {(0,) * r: one}

    def cached(cache, parts, beta, cut):
        if beta not in cache:
            i = next(k for k, x in enumerate(beta) if x)
            prev = beta[:i] + (beta[i] - 1,) + beta[i + 1:]
            cache[beta] = poly_mul(cached(cache, parts, prev, cut), parts[i], cut(beta))
        return cache[beta]

    def linprod(beta):
        return cached(lp, lin, beta, lambda b: sum(b))

    def power(beta):
        return cached(pw, G, beta, lambda b: top)

    acc: dict = {}
    theta: dict = {}
    for k in range(1, top + 1):
        resid = {}
        for e in set(target) | set(acc):
            if sum(e) == k:
                x = target.get(e, 0) - acc.get(e, 0)
                if x:
                    resid[e] = x
        if not resid:
            continue
        betas = list(compositions(k, r))
        cols = [linprod(b) for b in betas]
        monos = sorted(set(resid).union(*cols), key=grlex_key)
        M = len(monos)
        rows = [[col.get(m, 0) for m in monos] + [int(j == t) for j in range(len(betas))]
                for t, col in enumerate(cols)]
        red, piv = rref(rows, M + len(betas))
        if len(piv) < len(betas) or piv[-1] >= M:
            raise DependentGenerators("generator linear parts are dependent at this sample")
        vec = [as_rat(resid.get(m, 0)) for m in monos] + [Fraction(0)] * len(betas)
        for row, p in zip(red, piv):
            if vec[p]:
                f = vec[p]
                vec = [x - f * y for x, y in zip(vec, row)]
        left = next((monos[j] for j in range(M) if vec[j]), None)
        if left is not None:
            return False, k, left, theta
        for t, b in enumerate(betas):
            x = -vec[M + t]
            if x:
                theta[b] = x
                for e, c in power(b).items():
                    _acc(acc, e, c * x)
    return True, None, None, theta


def _random_tau(rng: random.Random, n: int) -> list[Fraction]:
    out = []
    for _ in range(n):
        p = 0
        while p == 0:
            p = rng.randint(-97, 97)
        out.append(Fraction(p, rng.randint(1, 13)))
    return out


def _lin_rank(gens, taus) -> int:
    return q_rank(linear_jacobian(gens).evaluate(taus))


def theta_fit(phi: PotentialSeries, s0: LinearForm, gens: Sequence[LinearForm], *,
              samples: int = 3, seed: int = 0, lift: bool = True) -> ThetaFit:
    """Find Theta with ``s0 = Theta(gens)`` through degree D - 1, if one exists.

    In symbolic mode the solve runs on ``samples`` (at least 3) random
    rational cusp shapes at which the generators stay independent; the
    verdict and failing degree must agree across samples or
    :class:`UnstableFit` is raised.  With ``lift`` the sample solutions are
    reassembled into TauScalar coefficients by multilinear interpolation on
    a 2^n grid, kept only if they reproduce every sample exactly.
    """
    gens = tuple(gens)
    if not gens:
        raise PreconditionError("at least one generator is required")
    if any(f.n != phi.n for f in (s0,) + gens):
        raise InputError(f"forms must have {phi.n} cusps")
    r = len(gens)
    J = linear_jacobian(gens)
    if phi.mode == "rational":
        if q_rank(J.evaluate(phi.tau)) < r:
            raise DependentGenerators("generator linear parts are dependent")
        ok, deg, res, th = _fit_rational(branch_from_potential(phi), s0, gens)
        return ThetaFit(s0, gens, phi.D, "rational", ok, deg, res, th if ok else None)
    if minor_rank(J) < r:
        raise DependentGenerators("generator linear parts are dependent over the tau span")
    if samples < 3:
        raise PreconditionError("symbolic fits need at least 3 samples")
    rng = random.Random(seed)
    taus_list, results = [], []
    while len(taus_list) < samples:
        taus = _random_tau(rng, phi.n)
        if _lin_rank(gens, taus) < r:
            continue
        taus_list.append(taus)
        results.append(_fit_rational(branch_from_potential(phi.substitute(taus)), s0, gens))
    verdicts = {(ok, deg) for ok, deg, _, _ in results}
    if len(verdicts) > 1:
        raise UnstableFit(f"samples disagree on the fit verdict: {sorted(verdicts, key=str)}")
    ok, deg, res, _ = results[0]
    fit = ThetaFit(s0, gens, phi.D, "symbolic", ok, deg, res, None, taus_list,
                   [th for _, _, _, th in results])
    if ok and lift:
        fit.theta = _lift(phi, s0, gens, rng, taus_list, fit.sample_thetas)
    return fit


def _lift(phi, s0, gens, rng, taus_list, sample_thetas, tries: int = 20):
    n, r = phi.n, len(gens)
    for _ in range(tries):
        grid = []
        for _ in range(n):
            t0 = t1 = _random_tau(rng, 1)[0]
            while t1 == t0:
                t1 = _random_tau(rng, 1)[0]
            grid.append((t0, t1))
        corners = list(product((0, 1), repeat=n))
        vals = []
        for bits in corners:
            taus = [grid[i][b] for i, b in enumerate(bits)]
            if _lin_rank(gens, taus) < r:
                break
            ok, _, _, th = _fit_rational(branch_from_potential(phi.substitute(taus)), s0, gens)
            if not ok:
                return None
            vals.append(th)
        else:
            break
    else:
        return None
    keys = set().union(*vals, *sample_thetas)
    lifted = {}
    for beta in keys:
        terms: dict[int, Fraction] = {}
        for bits, th in zip(corners, vals):
            f = th.get(beta, Fraction(0))
            if not f:
                continue
            # weight of this corner: prod_i (tau_i - t_other) / (t_this - t_other)
            lin = []
            for i, b in enumerate(bits):
                this, other = grid[i][b], grid[i][1 - b]
                d = this - other
                lin.append((-other / d, 1 / d))
            for mask in range(1 << n):
                w = f
                for i in range(n):
                    w *= lin[i][1] if mask >> i & 1 else lin[i][0]
                terms[mask] = terms.get(mask, 0) + w
        value = TauScalar(n, terms)
        for taus, th in zip(taus_list, sample_thetas):
            if value.evaluate(taus) != th.get(beta, 0):
                return None
        if value:
            lifted[beta] = value
    return lifted


def theta_t_independence(fit: ThetaFit, l: int) -> bool:
    """True iff no solved coefficient sits on a monomial involving the last l generators."""
    if not fit.success:
        raise PreconditionError("the fit did not succeed")
    r = len(fit.gens)
    if not 0 <= l <= r:
        raise PreconditionError(f"l must lie in [0, {r}]")
    thetas = fit.sample_thetas if fit.mode == "symbolic" else [fit.theta]
    return not any(c and any(beta[r - l:]) for th in thetas for beta, c in th.items())


def _staircase(forms: Sequence[Sequence]) -> list[list[Fraction]]:
    if not forms:
        raise MalformedStaircase("no forms given")
    forms = [[as_rat(x) for x in f] for f in forms]
    N = len(forms[0])
    if any(len(f) != N for f in forms):
        raise MalformedStaircase("forms have different lengths")
    prev = None
    for k, f in enumerate(forms, 1):
        nz = [i for i, x in enumerate(f) if x]
        if not nz:
            raise MalformedStaircase(f"form y{k} is zero")
        j, e = nz[0], nz[-1]
        if len(nz) != e - j + 1:
            raise MalformedStaircase(f"form y{k} has a zero coefficient inside its range")
        if j >= e:
            raise MalformedStaircase(f"form y{k} must involve at least two variables")
        if prev and not (prev[0] < j and prev[1] < e):
            raise MalformedStaircase(f"form y{k} does not step right of y{k - 1}")
        prev = (j, e)
    return forms


def odd_matrix_rank(forms: Sequence[Sequence], m: int) -> tuple[int, list[bool]]:
    """Rank of the odd-monomial coefficients of all degree-m products of the forms.

    Products run over exponent tuples in descending lexicographic order.
    The flag list says, per product, whether it has an odd monomial that no
    other product has.
    """
    if m < 1:
        raise PreconditionError("degree m must be positive")
    forms = _staircase(forms)
    N = len(forms[0])
    lin = [{_unit(N, i): x for i, x in enumerate(f) if x} for f in forms]
    one = {(0,) * N: Fraction(1)}
    prods = []
    for beta in compositions(m, len(forms)):
        p = one
        for f, k in zip(lin, beta):
            for _ in range(k):
                p = poly_mul(p, f, m)
        prods.append({e: c for e, c in p.items() if any(x % 2 for x in e)})
    odd = sorted(set().union(*prods), key=grlex_key)
    rank = q_rank([[p.get(e, 0) for e in odd] for p in prods]) if odd else 0
    unique = []
    for k, p in enumerate(prods):
        others = set().union(*(q for t, q in enumerate(prods) if t != k))
        unique.append(any(e not in others for e in p))
    return rank, unique


def two_cusp_fits(phi: PotentialSeries, a, b, c, d, **kw) -> tuple[ThetaFit, ThetaFit]:
    """Fits of ``a u1 + b v1 + c u2 + d v2`` against ``d u1 + b u2`` and of
    ``a u1 + b v1 - c u2 - d v2`` against ``d u1 - b u2``."""
    if phi.n != 2:
        raise PreconditionError("two-cusp check needs n = 2")
    a, b, c, d = (as_rat(x) for x in (a, b, c, d))
    if not b and not d:
        raise PreconditionError("(b, d) must not both be zero")
    first = theta_fit(phi, LinearForm((a, b, c, d)), [LinearForm((d, 0, b, 0))], **kw)
    second = theta_fit(phi, LinearForm((a, b, -c, -d)), [LinearForm((d, 0, -b, 0))], **kw)
    return first, second


def two_cusp_relation_check(phi: PotentialSeries, a, b, c, d, **kw) -> bool:
    first, second = two_cusp_fits(phi, a, b, c, d, **kw)
    return first.success and second.success
