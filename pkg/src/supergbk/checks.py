"""Named checks with a uniform result record, shared by the CLI and the test suite.

A check either verifies an identity among computed objects (``pass`` or
``fail``) or compares a computed object with its published form (``pass`` or
``paper-discrepancy``, the latter carrying both expressions).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import reference as ref
from .conservation import density, flux, riccati_coefficients, riccati_residual, verify_conservation
from .constraint import (
    H1,
    H2,
    EigenSystem,
    along,
    eigen_residual,
    f_k_integrals,
    generating_integrals,
    hamilton_mismatch,
    nonlinearized_spatial,
    nonlinearized_temporal,
    poisson,
    source_flow,
    source_vector,
    temporal_consistency_residual,
)
from .dynamics import (
    CompiledSystem,
    GrassmannAlgebra,
    differential_rank,
    fit_order,
    monitor,
    random_point,
)
from .hierarchy import (
    FIELDS,
    HierarchyConfig,
    apply_J,
    bihamiltonian_residual,
    bosonic,
    build_N,
    check_supertrace_identity,
    flow,
    is_total_derivative,
    recurse,
    recursion_residual,
    second_operator_residual,
    skew_residual,
    spectral_matrix,
)
from .laxmatrix import SuperMatrix, zero_curvature_residual
from .superpoly import SPoly, parse, substitute

PASS = "pass"
FAIL = "fail"
PAPER_DIFF = "paper-discrepancy"

__all__ = [
    "PASS",
    "FAIL",
    "PAPER_DIFF",
    "CheckResult",
    "coefficient_table",
    "zero_curvature",
    "lax_matrix_n2",
    "flow_n2",
    "bosonic_n2",
    "supertrace",
    "bihamiltonian",
    "skew_adjoint",
    "recursion",
    "second_operator",
    "riccati",
    "riccati_published",
    "density_flux_published",
    "local_conservation",
    "source_terms",
    "source_equations",
    "source_eigenproblem",
    "eigen_property",
    "spatial_system_published",
    "hamilton_forms",
    "temporal_published",
    "temporal_consistency",
    "integral_values",
    "involution",
    "x_conservation",
    "simulation_setup",
    "drift",
    "drift_order",
    "independence",
]


@dataclass
class CheckResult:
    check_id: str
    status: str
    residual: str | float = "0"
    discrepancies: list[ref.Discrepancy] = field(default_factory=list)
    detail: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == PASS

    def to_json_obj(self, timings: bool = False) -> dict:
        out = {"check": self.check_id, "status": self.status, "residual": self.residual}
        if self.discrepancies:
            out["discrepancies"] = [d.to_json_obj() for d in self.discrepancies]
        if self.detail:
            out["detail"] = self.detail
        if timings:
            out["runtime"] = round(self.runtime, 4)
        return out


def _timed(fn):
    def wrapper(*args, **kwargs):
        t = time.perf_counter()
        res = fn(*args, **kwargs)
        res.runtime = time.perf_counter() - t
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _identity(check_id: str, residuals: dict[str, SPoly], **detail) -> CheckResult:
    bad = {k: str(r) for k, r in residuals.items() if not r.is_zero()}
    if not bad:
        return CheckResult(check_id, PASS, "0", detail=detail)
    return CheckResult(check_id, FAIL, "; ".join(f"{k}: {v}" for k, v in bad.items()), detail=detail)


def _comparison(check_id: str, pairs: dict[str, tuple[SPoly, SPoly]], **detail) -> CheckResult:
    diffs = ref.compare(pairs)
    if not diffs:
        return CheckResult(check_id, PASS, "0", detail=detail)
    return CheckResult(check_id, PAPER_DIFF, f"{len(diffs)} of {len(pairs)} differ", diffs, detail)


def _k0(k0):
    return "k0" if k0 in (None, "k0") else k0


# ---------------------------------------------------------------------------
# hierarchy


@_timed
def coefficient_table(k0="k0") -> CheckResult:
    """Rows 1..3 of the recursion against the published coefficient list (symbolic seed)."""
    cfg = HierarchyConfig(_k0(k0), 3)
    tab = recurse(cfg)
    seed = {} if cfg.symbolic else {("k0", 0): SPoly.constant(cfg.k0)}
    pairs = {}
    for m in (1, 2, 3):
        row = tab[m].as_dict()
        for name in ("a", "b", "c", "rho", "delta"):
            pub = substitute(ref.coefficient(f"{name}{m}"), seed)
            pairs[f"{name}{m}"] = (pub, row[name])
    return _comparison("hierarchy.coefficients", pairs, k0=str(cfg.k0))


@_timed
def zero_curvature(n: int, k0="k0") -> CheckResult:
    cfg = HierarchyConfig(_k0(k0), max(n, 1))
    res = zero_curvature_residual(spectral_matrix(), build_N(n, cfg), flow(n, cfg))
    entries = {
        f"[{r + 1},{c + 1}] lambda^{k}": p for r in range(3) for c in range(3) for k, p in res[r, c].coeffs.items()
    }
    return _identity(f"verify.zero-curvature.n{n}", entries, k0=str(cfg.k0))


def _matrix_pairs(pub: SuperMatrix, comp: SuperMatrix) -> dict[str, tuple[SPoly, SPoly]]:
    pairs = {}
    for r in range(3):
        for c in range(3):
            P, C = pub[r, c], comp[r, c]
            for k in sorted(set(P.coeffs) | set(C.coeffs), reverse=True):
                pairs[f"N[{r + 1},{c + 1}] lambda^{k}"] = (P[k], C[k])
    return pairs


@_timed
def lax_matrix_n2() -> CheckResult:
    """Assembled ``N^(2)`` at ``k0 = 2`` against the published matrix."""
    return _comparison("verify.lax-matrix.n2", _matrix_pairs(ref.lax_n2(), build_N(2, HierarchyConfig(2, 2))))


@_timed
def flow_n2() -> CheckResult:
    fl = flow(2, HierarchyConfig(2, 2))
    return _comparison("verify.flow.n2", {f: (parse(ref.FLOW_N2[f]), fl[f]) for f in FIELDS})


@_timed
def bosonic_n2() -> CheckResult:
    fl = flow(2, HierarchyConfig(2, 2))
    return _comparison("verify.bosonic.n2", {f: (parse(ref.BOSONIC_N2[f]), bosonic(fl[f])) for f in ("v", "w")})


@_timed
def supertrace(n: int, k0="k0", normalization: str = "vacuum", side: str = "right") -> CheckResult:
    cfg = HierarchyConfig(_k0(k0), n + 1, normalization)
    rep = check_supertrace_identity(n, cfg, side)
    return _identity(
        f"verify.supertrace.n{n}",
        dict(zip(FIELDS, rep.residuals)),
        normalization=normalization,
        euler_side=side,
    )


@_timed
def bihamiltonian(n: int, k0="k0") -> CheckResult:
    cfg = HierarchyConfig(_k0(k0), n + 1)
    return _identity(f"verify.bihamiltonian.n{n}", dict(zip(FIELDS, bihamiltonian_residual(n, cfg))))


@_timed
def skew_adjoint() -> CheckResult:
    """``<X, JY> + <Y, JX>`` for generic vectors must be an exact x-derivative."""
    r = skew_residual()
    exact = is_total_derivative(r)
    return CheckResult("verify.skew-adjoint", PASS if exact else FAIL, str(r), detail={"total_derivative": exact})


@_timed
def recursion(m: int, k0="k0") -> CheckResult:
    cfg = HierarchyConfig(_k0(k0), m + 1)
    return _identity(f"verify.recursion.m{m}", dict(zip(FIELDS, recursion_residual(m, cfg))))


@_timed
def second_operator(n: int, k0="k0") -> CheckResult:
    cfg = HierarchyConfig(_k0(k0), n + 1)
    return _identity(f"verify.second-operator.n{n}", dict(zip(FIELDS, second_operator_residual(n, cfg))))


# ---------------------------------------------------------------------------
# conservation laws


@_timed
def riccati(n_max: int = 4) -> CheckResult:
    res = {}
    for k, (rf, rg) in enumerate(riccati_residual(n_max)):
        res[f"F lambda^{-k}"] = rf
        res[f"G lambda^{-k}"] = rg
    return _identity(f"conservation.riccati.n{n_max}", res)


@_timed
def riccati_published() -> CheckResult:
    f, g = riccati_coefficients(3)
    pairs = {}
    for k in (1, 2, 3):
        pairs[f"f{k}"] = (parse(ref.RICCATI[f"f{k}"]), f[k])
        pairs[f"g{k}"] = (parse(ref.RICCATI[f"g{k}"]), g[k])
    return _comparison("conservation.riccati-published", pairs)


@_timed
def density_flux_published() -> CheckResult:
    pairs = {
        "sigma1": (parse(ref.SIGMA1), density(1)),
        "theta1": (parse(ref.THETA1), flux(1, 2, HierarchyConfig("k0", 2))),
    }
    return _comparison("conservation.sigma-theta-published", pairs)


@_timed
def local_conservation(n: int, flow_index: int = 2, k0=2) -> CheckResult:
    chk = verify_conservation(n, flow_index, HierarchyConfig(_k0(k0), flow_index))
    return _identity(
        f"conservation.local.n{n}",
        {"D_t sigma - D_x theta": chk.residual},
        sigma=str(chk.density),
        theta=str(chk.flux),
        flow=flow_index,
    )


# ---------------------------------------------------------------------------
# sources


@_timed
def source_terms(N: int = 2) -> CheckResult:
    es = EigenSystem(N)
    comp = dict(zip(FIELDS, apply_J(source_vector(es))))
    pub = ref.sourced_terms(es)
    return _comparison(f"sources.terms.N{N}", {f: (pub[f], comp[f]) for f in FIELDS})


@_timed
def source_equations(N: int = 2) -> CheckResult:
    """Full sourced second flow (bulk plus source terms) against the published display."""
    es = EigenSystem(N)
    comp = source_flow(es, 2, HierarchyConfig(2, 2))
    pub = ref.sourced_terms(es)
    return _comparison(
        f"sources.equations.N{N}", {f: (parse(ref.FLOW_N2[f]) + pub[f], comp[f]) for f in FIELDS}
    )


@_timed
def source_eigenproblem() -> CheckResult:
    """The eigenfunction problem printed with the sources against the spectral problem."""
    pairs = {}
    for key, (p, c) in _matrix_pairs(ref.source_eigen_matrix(), spectral_matrix()).items():
        pairs[key.replace("N[", "M[")] = (p, c)
    return _comparison("sources.eigenproblem", pairs)


# ---------------------------------------------------------------------------
# eigenfunctions, constraint, nonlinearization


def _system(N: int, numeric: bool = False) -> EigenSystem:
    return EigenSystem.numeric(N) if numeric else EigenSystem(N)


@_timed
def eigen_property(N: int, convention: str = "right", numeric: bool = False) -> CheckResult:
    es = _system(N, numeric)
    res = {}
    for j in es.indices:
        for i, r in enumerate(eigen_residual(es, j, convention)):
            res[f"j={j} component {i + 1}"] = r
    return _identity(f"nonlinearize.eigen.N{N}", res, convention=convention, numeric_lambda=numeric)


@_timed
def spatial_system_published(N: int) -> CheckResult:
    es = EigenSystem(N)
    comp = nonlinearized_spatial(es).rhs
    pub = ref.spatial_system(es)
    pairs = {f"{k[0]}[{k[1]}]": (p, comp[k]) for k, p in pub.items()}
    return _comparison(f"nonlinearize.x-system-published.N{N}", pairs)


@_timed
def hamilton_forms(N: int, convention: str = "printed", published: bool = True, flows=(3, 4, 5)) -> CheckResult:
    """Each system equals the signed gradient of its Hamiltonian.

    With ``published=True`` the x- and t2-systems are the displayed ones;
    otherwise the derived ones.  Higher flows ``t_n`` are paired with ``F_{n+2}``.
    """
    es = EigenSystem(N)
    if published:
        x_rhs, t2_rhs = ref.spatial_system(es), ref.temporal_system_n2(es)
    else:
        x_rhs, t2_rhs = nonlinearized_spatial(es).rhs, nonlinearized_temporal(es, 2).rhs
    res = {}
    for k, d in hamilton_mismatch(x_rhs, H1(es), es, convention).items():
        res[f"x/H1 {k[0]}[{k[1]}]"] = d
    for k, d in hamilton_mismatch(t2_rhs, H2(es), es, convention).items():
        res[f"t2/H2 {k[0]}[{k[1]}]"] = d
    if flows:
        F = generating_integrals(es, max(flows) + 2)
        for n in flows:
            for k, d in hamilton_mismatch(nonlinearized_temporal(es, n).rhs, F[n + 2], es, convention).items():
                res[f"t{n}/F{n + 2} {k[0]}[{k[1]}]"] = d
    return _identity(f"nonlinearize.hamilton.N{N}", res, convention=convention, published_systems=published)


@_timed
def temporal_published(N: int, flows=(2, 3)) -> CheckResult:
    """Derived t2 system and the odd rows of the general t_n system against the displays."""
    es = EigenSystem(N)
    pairs = {}
    t2 = nonlinearized_temporal(es, 2).rhs
    for k, p in ref.temporal_system_n2(es).items():
        pairs[f"t2 {k[0]}[{k[1]}]"] = (p, t2[k])
    for n in flows:
        tn = nonlinearized_temporal(es, n).rhs
        for k, p in ref.temporal_odd_rows(es, n).items():
            pairs[f"t{n} {k[0]}[{k[1]}]"] = (p, tn[k])
    return _comparison(f"nonlinearize.t-system-published.N{N}", pairs)


@_timed
def temporal_consistency(N: int, n: int) -> CheckResult:
    """Hierarchy ``N^(n)`` under the constraint equals the matrix built from the constrained table."""
    res = {f"j={j} [{r + 1},{c + 1}]": d for (j, r, c), d in temporal_consistency_residual(EigenSystem(N), n).items()}
    return CheckResult(
        f"nonlinearize.temporal-consistency.N{N}.n{n}",
        PASS if not res else FAIL,
        "0" if not res else "; ".join(f"{k}: {v}" for k, v in res.items()),
    )


@_timed
def integral_values(N: int) -> CheckResult:
    """``F_0 = 1``, ``F_1 = 0``, ``F_2 = -2``, ``F_4 = H_2`` and the published ``F_3``."""
    es = EigenSystem(N)
    F = generating_integrals(es, 4)
    pairs = {
        "F0": (SPoly.constant(1), F[0]),
        "F1": (SPoly(), F[1]),
        "F2": (SPoly.constant(-2), F[2]),
        "F3": (ref.F3(es), F[3]),
        "F4": (ref.F4(es), F[4]),
    }
    return _comparison(f"nonlinearize.integrals.N{N}", pairs, F3_equals_minus_H1=(F[3] + H1(es)).is_zero())


@_timed
def involution(N: int, max_m: int = 6, convention: str = "printed") -> CheckResult:
    es = EigenSystem(N)
    F = generating_integrals(es, max_m)
    fk = f_k_integrals(es, convention)
    res = {}
    for m in range(2, max_m + 1):
        for n in range(m + 1, max_m + 1):
            res[f"{{F{m},F{n}}}"] = poisson(F[m], F[n], es, convention)
        for k, f in zip(es.indices, fk):
            res[f"{{F{m},f{k}}}"] = poisson(F[m], f, es, convention)
    for a in range(len(fk)):
        for b in range(a + 1, len(fk)):
            res[f"{{f{a + 1},f{b + 1}}}"] = poisson(fk[a], fk[b], es, convention)
    return _identity(f"nonlinearize.involution.N{N}", res, convention=convention, max_m=max_m)


@_timed
def x_conservation(N: int, max_m: int = 7, convention: str = "printed") -> CheckResult:
    """``d/dx`` of every ``F_m`` and ``f_k`` along the constrained x-flow."""
    es = EigenSystem(N)
    rhs = nonlinearized_spatial(es).rhs
    res = {f"dF{m}/dx": along(F, rhs) for m, F in enumerate(generating_integrals(es, max_m))}
    for k, f in zip(es.indices, f_k_integrals(es, convention)):
        res[f"df{k}/dx"] = along(f, rhs)
    return _identity(f"nonlinearize.x-conservation.N{N}", res, convention=convention)


# ---------------------------------------------------------------------------
# numerics


def simulation_setup(N: int = 2, K: int = 6, part: str = "x", seed: int = 0, convention: str = "graded"):
    """Algebra, variables, compiled right-hand side, named invariants and a seeded start."""
    es = EigenSystem.numeric(N)
    if part == "x":
        sys_ = nonlinearized_spatial(es)
    elif part.startswith("t") and part[1:].isdigit():
        sys_ = nonlinearized_temporal(es, int(part[1:]))
    else:
        raise ValueError(f"unknown flow {part!r}; use x or tN")
    variables = es.generators()
    alg = GrassmannAlgebra(K)
    rhs = CompiledSystem(alg, variables, [sys_.rhs[v.base] for v in variables])
    F = generating_integrals(es, 4)
    invariants = {f"F{m}": F[m] for m in (2, 3, 4)}
    for k, f in zip(es.indices, f_k_integrals(es, convention)):
        invariants[f"f{k}"] = f
    compiled = {name: CompiledSystem(alg, variables, [p]) for name, p in invariants.items()}
    return alg, variables, rhs, compiled, random_point(alg, variables, seed)


@_timed
def drift(
    N: int = 2,
    K: int = 6,
    dt: float = 1e-3,
    span: float = 1.0,
    part: str = "x",
    seed: int = 0,
    convention: str = "graded",
    tol: float = 1e-8,
) -> CheckResult:
    _, _, rhs, inv, x0 = simulation_setup(N, K, part, seed, convention)
    rep = monitor(rhs, inv, x0, dt, span)
    bad = {k: v for k, v in rep.drift.items() if v > tol}
    return CheckResult(
        f"simulate.drift.{part}.N{N}.K{K}",
        PASS if not bad else FAIL,
        rep.max_drift,
        detail={"dt": dt, "span": span, "seed": seed, "convention": convention, "tol": tol, "drift": rep.drift},
    )


@_timed
def drift_order(
    N: int = 2,
    K: int = 6,
    dts=(0.1, 0.05, 0.025, 0.0125),
    span: float = 1.0,
    part: str = "x",
    seed: int = 0,
    convention: str = "graded",
    names=("F3", "F4"),
    min_order: float = 3.7,
) -> CheckResult:
    """Fitted slope of log drift against log dt for each named invariant."""
    _, _, rhs, inv, x0 = simulation_setup(N, K, part, seed, convention)
    drifts = {k: [] for k in names}
    for dt in dts:
        rep = monitor(rhs, {k: inv[k] for k in names}, x0, dt, span)
        for k in names:
            drifts[k].append(rep.drift[k])
    orders = {k: fit_order(list(dts), v) for k, v in drifts.items()}
    ok = all(o >= min_order for o in orders.values())
    return CheckResult(
        f"simulate.order.{part}.N{N}.K{K}",
        PASS if ok else FAIL,
        min(orders.values()),
        detail={"dts": list(dts), "drift": drifts, "order": orders, "min_order": min_order},
    )


@_timed
def independence(N: int = 2, K: int = 6, seed: int = 0, convention: str = "graded", tol: float = 1e-8) -> CheckResult:
    """Rank of the differentials of ``{f_k}`` and ``F_2 .. F_{2N+3}`` at a seeded point."""
    es = EigenSystem.numeric(N)
    variables = es.generators()
    alg = GrassmannAlgebra(K)
    F = generating_integrals(es, 2 * N + 3)
    funcs = f_k_integrals(es, convention) + F[2:]
    x0 = random_point(alg, variables, seed)
    rank, sv = differential_rank(alg, variables, funcs, x0, tol)
    return CheckResult(
        f"simulate.independence.N{N}.K{K}",
        PASS if rank == len(funcs) else FAIL,
        float(sv[-1]),
        detail={
            "rank": rank,
            "functions": len(funcs),
            "singular_values": [float(f"{s:.6e}") for s in np.asarray(sv)],
            "seed": seed,
        },
    )
