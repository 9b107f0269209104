"""Command-line front end.

Exit codes: 0 success, 2 input or usage error, 3 internal invariant violation.
Reports are JSON by default; ``--format text`` renders a compact summary.
Identical inputs give identical bytes whatever ``--jobs`` is.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations, islice, product
from math import comb
from typing import Sequence

from . import __version__
from .anomaly import (
    PairFamily,
    classify,
    deficient_report,
    deficient_subset_bruteforce,
    deficient_subset_constructive,
    is_deficient,
)
from .errors import AnomalyError, InputError, InvariantViolation
from .qlinalg import as_rat, rat_str
from .series import (
    LinearForm,
    PotentialSeries,
    branch_from_potential,
    mixed_partial_check,
    series_str,
    sgi_check,
    theta_fit,
    theta_t_independence,
    two_cusp_fits,
    wgi_check,
)
from . import _kernels
from .subgroup import SubgroupSpec, from_json as subgroup_from_json, saturate

TOOL = "anomalous"
MAX_SCAN_CUSPS = 16
DEFAULT_MAX_CANDIDATES = 2_000_000


class UsageError(InputError):
    pass


# ---------------------------------------------------------------- input


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _in_file(path: str, loader):
    obj = load_json(path)
    try:
        return loader(obj)
    except InputError as exc:
        raise type(exc)(f"{path}: {exc}", *exc.args[1:]) from None


def load_potential(path: str) -> PotentialSeries:
    return _in_file(path, PotentialSeries.from_json)


def parse_taus(text: str | None, n: int):
    if text is None:
        return None
    try:
        taus = [as_rat(t) for t in text.replace(",", " ").split()]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--tau: cannot read {text!r} as rationals") from None
    if len(taus) != n:
        raise UsageError(f"--tau needs {n} values, got {len(taus)}")
    return taus


def resolve_mode(args, phi: PotentialSeries | None, n: int):
    """Return None (symbolic) or the list of substituted cusp shapes."""
    mode = args.mode or (phi.mode if phi else "symbolic")
    if mode == "symbolic":
        if args.tau:
            raise UsageError("--tau needs --mode rational")
        return None
    taus = parse_taus(args.tau, n)
    if taus is None and phi is not None and phi.mode == "rational":
        taus = list(phi.tau)
    if taus is None:
        raise UsageError("rational mode needs --tau or a rational manifold file")
    return taus


def apply_mode(phi: PotentialSeries, args) -> PotentialSeries:
    taus = resolve_mode(args, phi, phi.n)
    if args.truncation is not None:
        if args.truncation < 2:
            raise UsageError("--truncation must be at least 2")
        phi = phi.with_truncation(args.truncation)
    if taus is not None and phi.mode == "symbolic":
        phi = phi.substitute(taus)
    elif taus is not None and list(phi.tau) != taus:
        phi = PotentialSeries(phi.n, phi.higher_terms(), phi.D, "rational", taus)
    return phi


def header(command: str, **config) -> dict:
    return {"tool": TOOL, "version": __version__, "command": command, "config": config}


def _tau_json(taus):
    return None if taus is None else [rat_str(t) for t in taus]


# ---------------------------------------------------------------- check-subgroup


def cmd_check_subgroup(args) -> dict:
    phi = load_potential(args.input) if args.input else None
    H = _in_file(args.subgroup, subgroup_from_json)
    if phi is not None and phi.n != H.n:
        raise InputError(f"{args.subgroup}: subgroup has n={H.n} but the manifold has n={phi.n}")
    taus = resolve_mode(args, phi, H.n)
    rep = classify(H, taus)
    if rep.counterexample and classify(H, taus) != rep:
        raise InvariantViolation("classification is not reproducible")
    out = header("check-subgroup", n=H.n, mode="symbolic" if taus is None else "rational",
                 tau=_tau_json(taus))
    out["dimension_kind"] = "first-order"
    out["report"] = rep.to_json()
    return out


def text_check_subgroup(rep: dict) -> str:
    r = rep["report"]
    verdict = "anomalous" if r["anomalous"] else "not anomalous"
    lines = [f"subgroup {r['relations']} (n={rep['config']['n']}, {rep['config']['mode']})",
             f"codim {r['codim']}, jacobian rank {r['jacobian_rank']}, first-order dim {r['first_order_dim']}",
             verdict]
    if r["anomalous"]:
        lines.append("complete cusps: " + (", ".join(map(str, r["complete_cusps"])) or "none"))
        lines.append(f"b = {r['b']}")
    if r.get("counterexample"):
        lines.append("COUNTEREXAMPLE")
    return "\n".join(lines)


# ---------------------------------------------------------------- scan


def parse_codim(text: str, n: int) -> tuple[int, int]:
    try:
        lo, _, hi = text.partition("-")
        lo, hi = int(lo), int(hi or lo)
    except ValueError:
        raise UsageError(f"--codim: expected N or N-M, got {text!r}") from None
    if lo < 0 or hi < lo or hi > 2 * n:
        raise UsageError(f"--codim range {text!r} must lie within 0..{2 * n}")
    return lo, hi


def box_rows(n: int, c: int) -> list[tuple]:
    """Nonzero vectors in [-c, c]^{2n} whose first nonzero entry is positive."""
    rows = []
    for v in product(range(-c, c + 1), repeat=2 * n):
        nz = next((x for x in v if x), 0)
        if nz > 0:
            rows.append(v)
    return rows


@dataclass(frozen=True)
class ScanConfig:
    n: int
    codim: tuple
    max_coeff: int
    taus: tuple | None
    jobs: int = 1
    max_candidates: int = DEFAULT_MAX_CANDIDATES

    def candidates(self) -> int:
        R = ((2 * self.max_coeff + 1) ** (2 * self.n) - 1) // 2
        return sum(comb(R, k) for k in range(max(self.codim[0], 1), self.codim[1] + 1))

    def echo(self) -> dict:
        return {"n": self.n, "codim": list(self.codim), "max_coeff": self.max_coeff,
                "mode": "symbolic" if self.taus is None else "rational", "tau": _tau_json(self.taus)}


def _hnf_keys(task):
    n, k, rows, firsts = task
    out = set()
    for i in firsts:
        for rest in combinations(range(i + 1, len(rows)), k - 1):
            H = _kernels.hnf([list(rows[i])] + [list(rows[j]) for j in rest], 2 * n)
            if len(H) == k:
                out.add(tuple(map(tuple, H)))
    return sorted(out)


def _classify_keys(task):
    n, keys, taus = task
    out = []
    for key in keys:
        H = SubgroupSpec.from_rows(key, n)
        rep = classify(H, taus)
        entry = rep.to_json()
        if rep.anomalous:
            entry["identity_component"] = [list(r) for r in saturate(H).rows]
        out.append((key, entry, rep.counterexample))
    return out


def _chunks(seq: Sequence, size: int):
    it = iter(seq)
    while chunk := list(islice(it, size)):
        yield chunk


def _run(fn, tasks, jobs):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))


def scan(cfg: ScanConfig, anomalous_only: bool = False) -> dict:
    """Enumerate, deduplicate by Hermite form, and classify every subgroup in the box."""
    if cfg.n > MAX_SCAN_CUSPS:
        raise UsageError(f"scans support at most {MAX_SCAN_CUSPS} cusps")
    if cfg.max_coeff < 1:
        raise UsageError("--max-coeff must be at least 1")
    est = cfg.candidates()
    if est > cfg.max_candidates:
        raise UsageError(
            f"box too large: about {est} candidate relation sets "
            f"(limit {cfg.max_candidates}; raise --max-candidates or shrink the box)"
        )
    rows = box_rows(cfg.n, cfg.max_coeff) if cfg.codim[1] > 0 else []
    keys: set = set()
    for k in range(max(cfg.codim[0], 1), cfg.codim[1] + 1):
        firsts = list(range(len(rows)))
        step = max(1, len(firsts) // (8 * max(cfg.jobs, 1)))
        tasks = [(cfg.n, k, rows, chunk) for chunk in _chunks(firsts, step)]
        for part in _run(_hnf_keys, tasks, cfg.jobs):
            keys.update(part)
    ordered = sorted(keys)
    step = max(1, len(ordered) // (8 * max(cfg.jobs, 1)))
    tasks = [(cfg.n, chunk, cfg.taus) for chunk in _chunks(ordered, step)]
    results = [x for part in _run(_classify_keys, tasks, cfg.jobs) for x in part]

    entries, by_cusp, counter = [], {}, []
    n_anom = 0
    for key, entry, cx in results:
        if entry["anomalous"]:
            n_anom += 1
            for c in entry["complete_cusps"]:
                by_cusp.setdefault(str(c), []).append(entry["relations"])
        if cx:
            again = classify(SubgroupSpec.from_rows(key, cfg.n), cfg.taus)
            if again.to_json() != {k: v for k, v in entry.items() if k != "identity_component"}:
                raise InvariantViolation(f"counterexample {entry['relations']} did not re-verify")
            counter.append(entry["relations"])
        if entry["anomalous"] or not anomalous_only:
            entries.append(entry)
    out = header("scan", **cfg.echo())
    out["candidates"] = est
    out["summary"] = {"subgroups": len(results), "anomalous": n_anom,
                      "not_anomalous": len(results) - n_anom, "counterexamples": len(counter)}
    out["anomalous_by_cusp"] = {k: by_cusp[k] for k in sorted(by_cusp, key=int)}
    out["counterexamples"] = counter
    out["entries"] = entries
    return out


def cmd_scan(args) -> dict:
    phi = load_potential(args.input) if args.input else None
    n = phi.n if phi else args.n
    if n is None:
        raise UsageError("scan needs --input or --n")
    if phi and args.n is not None and args.n != n:
        raise UsageError(f"--n {args.n} disagrees with the manifold's n={n}")
    if args.jobs < 1:
        raise UsageError("--jobs must be positive")
    taus = resolve_mode(args, phi, n)
    cfg = ScanConfig(n, parse_codim(args.codim, n), args.max_coeff,
                     tuple(taus) if taus else None, args.jobs, args.max_candidates)
    return scan(cfg, args.anomalous_only)


def text_scan(rep: dict) -> str:
    c, s = rep["config"], rep["summary"]
    lines = [f"scan n={c['n']} codim {c['codim'][0]}-{c['codim'][1]} |coeff|<={c['max_coeff']} ({c['mode']})",
             f"{s['subgroups']} subgroups, {s['anomalous']} anomalous, {s['counterexamples']} counterexamples"]
    for cusp, rels in rep["anomalous_by_cusp"].items():
        lines.append(f"complete cusp {cusp}: {len(rels)}")
        lines.extend("  " + r for r in rels)
    lines.extend("COUNTEREXAMPLE " + r for r in rep["counterexamples"])
    return "\n".join(lines)


# ---------------------------------------------------------------- series


def _set_str(S) -> str:
    return "{" + ",".join(map(str, sorted(S))) + "}"


def _parse_set(text: str | None, name: str) -> list[int]:
    if text is None:
        raise UsageError(f"--{name} is required")
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"--{name}: expected cusp indices, got {text!r}") from None


def _proper_subsets(n: int):
    for k in range(1, n):
        yield from combinations(range(1, n + 1), k)


def _partitions(n: int):
    """(A, B, C) with all three nonempty, ordered by (A, B)."""
    out = []
    for labels in product(range(3), repeat=n):
        parts = [tuple(i + 1 for i, l in enumerate(labels) if l == t) for t in range(3)]
        if all(parts):
            out.append(tuple(parts))
    return sorted(out)


def cmd_series(args) -> dict:
    phi = apply_mode(load_potential(args.input), args)
    out = header(f"series {args.series_cmd}", n=phi.n, mode=phi.mode,
                 tau=_tau_json(phi.tau), truncation=phi.D)
    out["valid_through_degree"] = phi.D - 1
    kind = args.series_cmd
    if kind == "sgi":
        if phi.n < 2:
            raise UsageError("SGI needs at least two cusps")
        if phi.n > 10:
            raise UsageError("SGI search supports at most 10 cusps")
        br = branch_from_potential(phi)
        splits = [list(A) for A in _proper_subsets(phi.n) if sgi_check(br, A)]
        out["sgi"] = splits
        wgi = []
        if not splits:
            wgi = [{"A": list(A), "B": list(B), "C": list(C)}
                   for A, B, C in _partitions(phi.n) if wgi_check(br, A, B, C)]
        out["wgi"] = wgi
    elif kind == "wgi":
        A, B, C = (_parse_set(getattr(args, k), k) for k in ("A", "B", "C"))
        out["A"], out["B"], out["C"] = A, B, C
        out["wgi"] = wgi_check(phi, A, B, C)
    elif kind == "theta":
        if not args.target or not args.gens:
            raise UsageError("theta needs --target and --gens")
        s0 = LinearForm.parse(args.target, phi.n)
        gens = [LinearForm.parse(g, phi.n) for g in args.gens]
        fit = theta_fit(phi, s0, gens, seed=args.seed)
        out["fit"] = fit.to_json()
        if fit.success:
            out["theta"] = fit.theta_str()
            if args.l is not None:
                out["t_independent"] = theta_t_independence(fit, args.l)
    elif kind == "two-cusp":
        if not args.abcd:
            raise UsageError("two-cusp needs --abcd a,b,c,d")
        try:
            a, b, c, d = (int(x) for x in args.abcd.split(","))
        except ValueError:
            raise UsageError(f"--abcd: expected four integers, got {args.abcd!r}") from None
        if b == 0 and d == 0:
            raise UsageError("two-cusp needs (b, d) != (0, 0)")
        first, second = two_cusp_fits(phi, a, b, c, d, seed=args.seed)
        out["abcd"] = [a, b, c, d]
        out["relation"] = first.to_json()
        out["companion"] = second.to_json()
        out["holds"] = first.success and second.success
    elif kind == "parity":
        br = branch_from_potential(phi)
        out["parity_violations"] = [{"i": i, "u": list(e)} for i, e in br.parity_violations()]
        out["mixed_partials"] = mixed_partial_check(br)
        out["branch"] = [series_str(v) for v in br.components]
    return out


def text_series(rep: dict) -> str:
    c = rep["config"]
    head = f"{rep['command']} (n={c['n']}, {c['mode']}, through degree {rep['valid_through_degree']})"
    lines = [head]
    kind = rep["command"].split()[1]
    if kind == "sgi":
        if rep["sgi"]:
            lines.extend(f"SGI: A={_set_str(A)}" for A in rep["sgi"])
        else:
            lines.append("no SGI split")
            lines.extend(f"WGI: A={_set_str(w['A'])} from B={_set_str(w['B'])} keeping C={_set_str(w['C'])}"
                         for w in rep["wgi"])
    elif kind == "wgi":
        lines.append(f"WGI A={_set_str(rep['A'])} from B={_set_str(rep['B'])} keeping C={_set_str(rep['C'])}: "
                     + ("yes" if rep["wgi"] else "no"))
    elif kind == "theta":
        f = rep["fit"]
        if f["success"]:
            lines.append(f"success: Theta(s) = {rep['theta']}")
            if "t_independent" in rep:
                lines.append("independent of t: " + ("yes" if rep["t_independent"] else "no"))
        else:
            lines.append(f"failure at degree {f['failed_degree']} (unmatched {f['residual_monomial']})")
    elif kind == "two-cusp":
        for name in ("relation", "companion"):
            f = rep[name]
            verdict = "fits" if f["success"] else f"fails at degree {f['failed_degree']}"
            lines.append(f"{name}: {f['target']} in {f['generators'][0]}: {verdict}")
        lines.append("holds" if rep["holds"] else "does not hold")
    elif kind == "parity":
        lines.append("parity ok" if not rep["parity_violations"] else
                     f"{len(rep['parity_violations'])} parity violations")
        lines.append("mixed partials agree" if rep["mixed_partials"] else "mixed partials disagree")
        lines.extend(f"v{i} = {v}" for i, v in enumerate(rep["branch"], 1))
    return "\n".join(lines)


# ---------------------------------------------------------------- deficient


def cmd_deficient(args) -> dict:
    F = _in_file(args.input, PairFamily.from_json)
    out = header("deficient", n=F.n, method=args.method)
    out.update(deficient_report(F))
    if F.n == 1:
        out["vacuous"] = True
    if not out["hypothesis"]:
        return out
    methods = ["brute", "constructive"] if args.method == "both" else [args.method]
    results = {}
    for m in methods:
        fn = deficient_subset_bruteforce if m == "brute" else deficient_subset_constructive
        res = fn(F)
        results[m] = res
        out[m] = res.to_json() | {"valid": is_deficient(F, res.indices)}
    if args.method == "both":
        out["match"] = all(out[m]["valid"] for m in methods)
    return out


def text_deficient(rep: dict) -> str:
    lines = [f"pair family n={rep['n']}"]
    if not rep["hypothesis"]:
        lines.append("hypothesis fails; independent selection: " + ", ".join(rep["witness"]))
        return "\n".join(lines)
    lines.append("hypothesis holds" + (" (vacuous: no nonempty proper subset)" if rep.get("vacuous") else ""))
    for m in ("brute", "constructive"):
        if m in rep:
            r = rep[m]
            lines.append(f"{m}: S={_set_str(r['indices'])} rank {r['achieved_rank']}"
                         + ("" if r["valid"] else " INVALID"))
    if "match" in rep:
        lines.append("both valid" if rep["match"] else "MISMATCH")
    return "\n".join(lines)


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=TOOL, description="Anomalous subvarieties of A-polynomials, to first order.")
    p.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, manifold_required=True):
        sp.add_argument("--input", required=manifold_required, help="manifold (potential series) JSON file")
        sp.add_argument("--mode", choices=("symbolic", "rational"))
        sp.add_argument("--tau", help="cusp shapes for rational mode, e.g. '2,-1/3'")
        sp.add_argument("--format", choices=("json", "text"), default="json")

    sp = sub.add_parser("check-subgroup", help="classify one subgroup")
    common(sp, manifold_required=False)
    sp.add_argument("--subgroup", required=True, help="subgroup JSON file")

    sp = sub.add_parser("scan", help="classify every subgroup in a coefficient box")
    common(sp, manifold_required=False)
    sp.add_argument("--n", type=int, help="cusp count when no --input is given")
    sp.add_argument("--codim", required=True, help="N or N-M")
    sp.add_argument("--max-coeff", type=int, default=1)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--max-candidates", type=int, default=DEFAULT_MAX_CANDIDATES)
    sp.add_argument("--anomalous-only", action="store_true")
    sp.add_argument("--truncation", type=int, help=argparse.SUPPRESS)

    sp = sub.add_parser("series", help="potential-series checks")
    sp.add_argument("series_cmd", choices=("sgi", "wgi", "theta", "two-cusp", "parity"))
    common(sp)
    sp.add_argument("--truncation", type=int, help="truncation degree D")
    sp.add_argument("--A")
    sp.add_argument("--B")
    sp.add_argument("--C")
    sp.add_argument("--target", help="target linear form, e.g. 'v1'")
    sp.add_argument("--gens", nargs="+", help="generator forms, s-forms first then t-forms")
    sp.add_argument("--l", type=int, help="number of trailing t-forms to test for independence")
    sp.add_argument("--abcd", help="two-cusp relation coefficients a,b,c,d")
    sp.add_argument("--seed", type=int, default=0, help="seed for symbolic-mode tau samples")

    sp = sub.add_parser("deficient", help="deficient subset of a pair family")
    sp.add_argument("--input", required=True, help="pair family JSON file")
    sp.add_argument("--method", choices=("brute", "constructive", "both"), default="both")
    sp.add_argument("--format", choices=("json", "text"), default="json")
    return p


COMMANDS = {
    "check-subgroup": (cmd_check_subgroup, text_check_subgroup),
    "scan": (cmd_scan, text_scan),
    "series": (cmd_series, text_series),
    "deficient": (cmd_deficient, text_deficient),
}


def render(rep: dict, fmt: str, cmd: str) -> str:
    if fmt == "text":
        return COMMANDS[cmd][1](rep) + "\n"
    return json.dumps(rep, indent=2) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    run, _ = COMMANDS[args.cmd]
    try:
        rep = run(args)
    except InvariantViolation as exc:
        print(f"{TOOL}: internal invariant violated: {exc}", file=sys.stderr)
        return 3
    except InputError as exc:
        print(f"{TOOL}: error: {exc}", file=sys.stderr)
        return 2
    except AnomalyError as exc:
        print(f"{TOOL}: internal invariant violated: {exc}", file=sys.stderr)
        return 3
    sys.stdout.write(render(rep, args.format, args.cmd))
    return 0


if __name__ == "__main__":
    sys.exit(main())
