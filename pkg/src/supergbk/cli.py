"""Command-line entry point: ``supergbk <subcommand> ...``.

Every subcommand prints a report (plain text by default, ``--json`` for the
machine-readable form) and exits 0 when all requested checks pass, 1 when a
check fails or an internal error occurs, 2 on usage errors.  Published-form
discrepancies count as failures unless ``--allow-paper-diff`` is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import checks as C
from .conservation import density, flux
from .constraint import CONVENTIONS, EigenSystem, nonlinearized_spatial, nonlinearized_temporal
from .dynamics import MAX_GENERATORS, integrate_ode
from .hierarchy import FIELDS, NORMALIZATIONS, HierarchyConfig, bosonic, build_N, recurse
from .superpoly import NotExact, ParityMismatch, SPoly

MAX_ORDER = int(os.environ.get("SUPERGBK_MAX_ORDER", "8"))


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument types


def _k0(text: str):
    if text == "k0":
        return "k0"
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"k0 must be a rational or 'k0', got {text!r}") from None


def _bounded(name: str, lo: int, hi: int):
    def parse(text: str) -> int:
        try:
            n = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if not lo <= n <= hi:
            raise argparse.ArgumentTypeError(f"{name} must lie in {lo}..{hi}")
        return n

    return parse


def _span(text: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("span must look like A:B") from None
    if b < a:
        raise argparse.ArgumentTypeError("span end must not precede its start")
    return a, b


def _positive(text: str) -> float:
    x = float(text)
    if x <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


# ---------------------------------------------------------------------------
# subcommands


def _cmd_hierarchy(args) -> tuple[dict, list[C.CheckResult], str]:
    cfg = HierarchyConfig(args.k0, args.order, args.normalization)
    tab = recurse(cfg)
    results = []
    if args.order >= 3 and args.normalization == "zero":
        results.append(C.coefficient_table(args.k0))
    payload = {"table": tab.to_json_obj()}
    if args.latex:
        lines = []
        for m, row in enumerate(tab.rows):
            for name, p in row.as_dict().items():
                lines.append(f"{name}_{{{m}}} &= {p.latex()} \\\\")
        text = "\n".join(lines)
    else:
        text = "\n".join(
            f"m={m}: " + ", ".join(f"{k}={p}" for k, p in row.as_dict().items()) for m, row in enumerate(tab.rows)
        )
    return payload, results, text


VERIFY_TARGETS = (
    "zero-curvature",
    "lax-matrix",
    "flow",
    "bosonic",
    "supertrace",
    "bihamiltonian",
    "skew-adjoint",
    "recursion",
    "second-operator",
    "all",
)


def _cmd_verify(args) -> tuple[dict, list[C.CheckResult], str]:
    n, k0 = args.n, args.k0
    single = {
        "zero-curvature": lambda: [C.zero_curvature(n, k0)],
        "lax-matrix": lambda: [C.lax_matrix_n2()],
        "flow": lambda: [C.flow_n2()],
        "bosonic": lambda: [C.bosonic_n2()],
        "supertrace": lambda: [C.supertrace(n, k0, args.normalization)],
        "bihamiltonian": lambda: [C.bihamiltonian(n, k0)],
        "skew-adjoint": lambda: [C.skew_adjoint()],
        "recursion": lambda: [C.recursion(n, k0)],
        "second-operator": lambda: [C.second_operator(n, k0)],
    }
    if args.target == "all":
        results = []
        for m in range(1, n + 1):
            results += [C.zero_curvature(m, k0), C.supertrace(m, k0, args.normalization), C.bihamiltonian(m, k0)]
        results += [C.lax_matrix_n2(), C.flow_n2(), C.bosonic_n2(), C.skew_adjoint()]
    else:
        results = single[args.target]()
    payload = {}
    text = ""
    if args.target == "zero-curvature":
        N = build_N(n, HierarchyConfig(k0, max(n, 1)))
        payload["N"] = N.to_json_obj()
        text = N.latex() if args.latex else str(N)
    return payload, results, text


def _cmd_conservation(args) -> tuple[dict, list[C.CheckResult], str]:
    cfg = HierarchyConfig(args.k0, args.flow)
    results = [C.riccati(args.order + 1)]
    if args.order >= 3:
        results += [C.riccati_published(), C.density_flux_published()]
    laws = []
    for n in range(1, args.order + 1):
        chk = C.local_conservation(n, args.flow, args.k0)
        results.append(chk)
        sigma, theta = density(n), flux(n, args.flow, cfg)
        if args.bosonic:
            sigma, theta = bosonic(sigma), bosonic(theta)
        laws.append({"n": n, "sigma": str(sigma), "theta": str(theta), "residual": chk.residual})
    text = "\n".join(f"n={d['n']}: sigma = {d['sigma']}\n     theta = {d['theta']}" for d in laws)
    return {"laws": laws, "bosonic": args.bosonic}, results, text


def _cmd_sources(args) -> tuple[dict, list[C.CheckResult], str]:
    from .constraint import source_flow

    results = [C.source_terms(args.N), C.source_equations(args.N), C.source_eigenproblem()]
    fl = source_flow(EigenSystem(args.N), 2, HierarchyConfig(args.k0, 2))
    payload = {"flow": {f: str(fl[f]) for f in FIELDS}}
    text = "\n".join(f"{f}_t2 = {fl[f]}" for f in FIELDS)
    return payload, results, text


NONLINEAR_CHECKS = (
    "involution",
    "hamilton",
    "eigen",
    "integrals",
    "conservation",
    "published",
    "consistency",
    "all",
)


def _cmd_nonlinearize(args) -> tuple[dict, list[C.CheckResult], str]:
    N, conv = args.N, args.convention
    if args.check is None:
        wanted = ()
    elif args.check == "all":
        wanted = NONLINEAR_CHECKS[:-1]
    else:
        wanted = (args.check,)
    results = []
    for name in wanted:
        if name == "involution":
            results.append(C.involution(N, args.max_m, conv))
        elif name == "hamilton":
            flows = (args.n,) if args.n > 2 else ()
            results.append(C.hamilton_forms(N, conv, published=args.systems == "published", flows=flows))
        elif name == "eigen":
            results.append(C.eigen_property(N, "left" if conv == "printed" else "right"))
        elif name == "integrals":
            results.append(C.integral_values(N))
        elif name == "conservation":
            results.append(C.x_conservation(N, args.max_m, conv))
        elif name == "published":
            results += [C.spatial_system_published(N), C.temporal_published(N, (args.n,))]
        elif name == "consistency":
            results.append(C.temporal_consistency(N, args.n))
    es = EigenSystem(N)
    systems = {"x": nonlinearized_spatial(es), f"t{args.n}": nonlinearized_temporal(es, args.n)}
    payload = {"systems": {part: {f"{k[0]}[{k[1]}]": str(p) for k, p in s.rhs.items()} for part, s in systems.items()}}
    lines = []
    for part, s in systems.items():
        for k, p in s.rhs.items():
            name = f"{k[0]}[{k[1]}]"
            lines.append(f"{name}_{part} = {p.latex() if args.latex else p}")
    return payload, results, "\n".join(lines)


def _cmd_simulate(args) -> tuple[dict, list[C.CheckResult], str]:
    if args.K > MAX_GENERATORS:
        raise UsageError(f"K={args.K} exceeds SUPERGBK_MAX_GENERATORS={MAX_GENERATORS}")
    a, b = args.span
    length = b - a
    results = [
        C.drift(args.N, args.K, args.dt, length, args.part, args.seed, args.convention, args.tol),
    ]
    if args.order:
        results.append(C.drift_order(args.N, args.K, span=length, part=args.part, seed=args.seed, convention=args.convention))
    if args.rank:
        results.append(C.independence(args.N, args.K, args.seed, args.convention))
    if args.trajectory:
        _write_trajectory(args, a, length)
    drift = results[0].detail["drift"]
    text = "\n".join(f"{k:>4s}  {v:.3e}" for k, v in drift.items())
    return {"span": [a, b]}, results, "invariant  max drift\n" + text


def _write_trajectory(args, start: float, length: float) -> None:
    """Whitespace-separated columns: time, body of every variable, every invariant's body."""
    alg, variables, rhs, inv, x0 = C.simulation_setup(args.N, args.K, args.part, args.seed, args.convention)
    rows = [(start, x0)]
    every = max(1, args.every)

    def keep(n, s):
        if n % every == 0:
            rows.append((start + n * args.dt, s.copy()))

    integrate_ode(rhs, x0, args.dt, length, keep)
    names = [f"{v.family}[{v.index}]" for v in variables] + list(inv)
    with open(args.trajectory, "w") as fh:
        fh.write("# t " + " ".join(names) + "\n")
        for t, s in rows:
            vals = list(s[:, 0]) + [float(f(s)[0, 0]) for f in inv.values()]
            fh.write(f"{t:.10g} " + " ".join(f"{x:.12e}" for x in vals) + "\n")


# ---------------------------------------------------------------------------
# parser and driver


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="supergbk", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    out = common.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true", help="print the JSON report")
    out.add_argument("--latex", action="store_true", help="print LaTeX for the computed objects")
    common.add_argument("--allow-paper-diff", action="store_true", help="published-form discrepancies do not fail")
    common.add_argument("--timings", action="store_true", help="include per-check runtimes in the report")
    order = _bounded("order", 1, MAX_ORDER)
    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("hierarchy", parents=[common], help="coefficient table of the recursion")
    h.add_argument("--order", type=order, default=3)
    h.add_argument("--k0", type=_k0, default=Fraction(1))
    h.add_argument("--normalization", choices=NORMALIZATIONS, default="zero")

    v = sub.add_parser("verify", parents=[common], help="identities of the hierarchy")
    v.add_argument("target", choices=VERIFY_TARGETS)
    v.add_argument("--n", type=_bounded("n", 0, MAX_ORDER), default=2)
    v.add_argument("--k0", type=_k0, default="k0")
    v.add_argument("--normalization", choices=NORMALIZATIONS, default="vacuum")

    c = sub.add_parser("conservation", parents=[common], help="Riccati conservation laws")
    c.add_argument("--order", type=order, default=3)
    c.add_argument("--flow", type=_bounded("flow", 1, MAX_ORDER), default=2)
    c.add_argument("--k0", type=_k0, default=Fraction(2))
    c.add_argument("--bosonic", action="store_true", help="report densities and fluxes with alpha = beta = 0")

    s = sub.add_parser("sources", parents=[common], help="second flow with self-consistent sources")
    s.add_argument("--N", type=_bounded("N", 0, MAX_ORDER), default=2)
    s.add_argument("--k0", type=_k0, default=Fraction(2))

    n = sub.add_parser("nonlinearize", parents=[common], help="constrained finite-dimensional systems")
    n.add_argument("--N", type=_bounded("N", 1, MAX_ORDER), default=1)
    n.add_argument("--n", type=_bounded("n", 1, MAX_ORDER), default=2)
    n.add_argument("--check", choices=NONLINEAR_CHECKS)
    n.add_argument("--max-m", type=_bounded("max-m", 2, 2 * MAX_ORDER), default=6)
    n.add_argument("--convention", choices=CONVENTIONS, default="printed")
    n.add_argument(
        "--systems",
        choices=("published", "derived"),
        default="published",
        help="which x- and t2-systems the hamilton check compares with the Hamiltonian gradients",
    )

    m = sub.add_parser("simulate", parents=[common], help="RK4 integration over a Grassmann algebra")
    m.add_argument("--part", default="x", help="x or tN, e.g. t2")
    m.add_argument("--N", type=_bounded("N", 1, MAX_ORDER), default=2)
    m.add_argument("--K", type=_bounded("K", 0, 16), default=6)
    m.add_argument("--span", type=_span, default=(0.0, 1.0))
    m.add_argument("--dt", type=_positive, default=1e-3)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--tol", type=_positive, default=1e-8)
    m.add_argument("--convention", choices=CONVENTIONS, default="graded")
    m.add_argument("--order", action="store_true", help="also fit the drift order under step halving")
    m.add_argument("--rank", action="store_true", help="also check independence of the integrals")
    m.add_argument("--trajectory", metavar="PATH", help="write a whitespace-separated trajectory file")
    m.add_argument("--every", type=int, default=10, help="trajectory sampling stride in steps")
    return p


COMMANDS = {
    "hierarchy": _cmd_hierarchy,
    "verify": _cmd_verify,
    "conservation": _cmd_conservation,
    "sources": _cmd_sources,
    "nonlinearize": _cmd_nonlinearize,
    "simulate": _cmd_simulate,
}


def _config(args) -> dict:
    skip = {"command", "json", "latex", "timings"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, Fraction):
            v = str(v)
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def _exit_code(results: list[C.CheckResult], allow_paper_diff: bool) -> int:
    for r in results:
        if r.status == C.FAIL or (r.status == C.PAPER_DIFF and not allow_paper_diff):
            return 1
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, SPoly):
        return str(obj)
    return obj


def run(argv: list[str] | None = None, stdout=None) -> tuple[int, dict]:
    """Parse ``argv``, run the subcommand, print the report; returns ``(exit code, report)``."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), {}
    try:
        payload, results, text = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"supergbk: error: {exc}", file=sys.stderr)
        return 2, {}
    except (NotExact, ParityMismatch, ValueError, ArithmeticError) as exc:
        print(f"supergbk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1, {}
    code = _exit_code(results, args.allow_paper_diff)
    report = {
        "command": args.command,
        "config": _config(args),
        "checks": [r.to_json_obj(args.timings) for r in results],
        "exit": code,
        **payload,
    }
    report = _jsonable(report)
    if args.json:
        stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        if text:
            stdout.write(text + "\n")
        for r in results:
            line = f"{r.status.upper():18s} {r.check_id}"
            if args.timings:
                line += f"  ({r.runtime:.2f}s)"
            stdout.write(line + "\n")
            if r.status != C.PASS:
                stdout.write(f"    residual: {r.residual}\n")
                for d in r.discrepancies:
                    stdout.write(f"    {d.item}: computed - published = {d.difference}\n")
    return code, report


def main(argv: list[str] | None = None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
