"""Eigenfunction algebra, sources, the symmetry constraint and binary nonlinearization.

Generators: even ``phi1, phi2, psi1, psi2`` and odd ``phi3, psi3`` with index
``j = 1..N``, plus the odd ``phiN = alpha`` and ``psiN = 2 beta`` (index 0)
that replace the odd potentials after the constraint.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .hierarchy import FIELDS, HierarchyConfig, apply_J, build_N, flow, spectral_matrix
from .laxmatrix import SuperMatrix, supertranspose
from .superpoly import SPoly, Var, const, d_x, jet, partial_left, substitute

__all__ = [
    "EigenSystem",
    "HamiltonFormMismatch",
    "ConstrainedSystem",
    "source_flow",
    "source_vector",
    "grad_lambda",
    "eigen_residual",
    "apply_constraint",
    "tilde_table",
    "nonlinearized_spatial",
    "nonlinearized_temporal",
    "generating_integrals",
    "f_k_integrals",
    "poisson",
    "hamilton_rhs",
    "along",
    "CONVENTIONS",
    "H1",
    "H2",
    "hamilton_mismatch",
    "assert_hamilton_form",
    "temporal_matrix",
    "temporal_consistency_residual",
    "constrained_x_rules",
    "constrained_odd_derivatives",
]

HALF = Fraction(1, 2)
CONVENTIONS = ("printed", "graded")
EVEN_FAMILIES = ("phi1", "phi2", "psi1", "psi2")
ODD_FAMILIES = ("phi3", "psi3")


class HamiltonFormMismatch(AssertionError):
    """Right-hand sides and the signed Hamiltonian gradient disagree."""


@dataclass(frozen=True)
class EigenSystem:
    """``N`` copies of the spectral and adjoint eigenfunctions.

    ``lambdas`` holds distinct rationals, or is ``None`` for commuting
    symbols ``lam[j]``.
    """

    N: int
    lambdas: tuple | None = None

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("N must be non-negative")
        if self.lambdas is not None:
            lams = tuple(Fraction(x) for x in self.lambdas)
            if len(lams) != self.N:
                raise ValueError("need one eigenvalue per eigenfunction")
            if len(set(lams)) != len(lams):
                raise ValueError("eigenvalues must be pairwise distinct")
            object.__setattr__(self, "lambdas", lams)

    @classmethod
    def numeric(cls, N: int) -> "EigenSystem":
        return cls(N, tuple(range(1, N + 1)))

    @property
    def indices(self) -> range:
        return range(1, self.N + 1)

    def lam(self, j: int) -> SPoly:
        if self.lambdas is None:
            return const("lam", j)
        return SPoly.constant(self.lambdas[j - 1])

    def lam_power(self, j: int, k: int) -> SPoly:
        if k < 0:
            raise ValueError("negative eigenvalue power")
        if self.lambdas is None:
            return const("lam", j) ** k
        return SPoly.constant(self.lambdas[j - 1] ** k)

    # generators ----------------------------------------------------------
    @staticmethod
    def gen_var(family: str, j: int = 0) -> Var:
        odd = family in ODD_FAMILIES or family in ("phiN", "psiN")
        return Var(family, 0, 0 if family in ("phiN", "psiN") else j, odd)

    def g(self, family: str, j: int = 0) -> SPoly:
        return SPoly.from_var(self.gen_var(family, j))

    @property
    def phiN(self) -> SPoly:
        return self.g("phiN")

    @property
    def psiN(self) -> SPoly:
        return self.g("psiN")

    def generators(self) -> list[Var]:
        out = [self.gen_var(f, j) for j in self.indices for f in ("phi1", "phi2", "phi3", "psi1", "psi2", "psi3")]
        return out + [self.gen_var("phiN"), self.gen_var("psiN")]

    def conjugate_pairs(self) -> list[tuple[Var, Var]]:
        return [
            (self.gen_var(f"phi{i}", j), self.gen_var(f"psi{i}", j)) for i in (1, 2, 3) for j in self.indices
        ]

    def inner(self, psi: int | str, phi: int | str, power: int = 0) -> SPoly:
        """``<Lambda^power Psi_psi, Phi_phi> = sum_j lam_j^power psi_{psi j} phi_{phi j}``."""
        out = SPoly()
        for j in self.indices:
            out = out + self.lam_power(j, power) * self.g(f"psi{psi}", j) * self.g(f"phi{phi}", j)
        return out

    def phi_inner(self, i: int, k: int) -> SPoly:
        """``<Phi_i, Phi_k> = sum_j phi_{ij} phi_{kj}``."""
        out = SPoly()
        for j in self.indices:
            out = out + self.g(f"phi{i}", j) * self.g(f"phi{k}", j)
        return out

    # x-derivatives of eigenfunctions with the potentials left free ---------
    @cached_property
    def spectral_rules(self) -> dict[tuple[str, int], SPoly]:
        """``phi_x = M(lambda_j) phi`` and ``psi_x = -M(lambda_j)^St psi`` for every j."""
        rules: dict[tuple[str, int], SPoly] = {}
        M = spectral_matrix()
        Madj = -supertranspose(M)
        for j in self.indices:
            lam = self.lam(j)
            phis = [self.g(f"phi{i}", j) for i in (1, 2, 3)]
            psis = [self.g(f"psi{i}", j) for i in (1, 2, 3)]
            for i in range(3):
                rules[(f"phi{i + 1}", j)] = sum(
                    (M[i, k].evaluate(lam) * phis[k] for k in range(3)), SPoly()
                )
                rules[(f"psi{i + 1}", j)] = sum(
                    (Madj[i, k].evaluate(lam) * psis[k] for k in range(3)), SPoly()
                )
        return rules


# ---------------------------------------------------------------------------
# Section-3 style sources


def source_vector(es: EigenSystem) -> tuple[SPoly, SPoly, SPoly, SPoly]:
    """``(<Phi1,Phi2>, 2<Phi1,Phi1>, -2<Phi2,Phi3>, 2<Phi1,Phi3>)``."""
    return (
        es.phi_inner(1, 2),
        es.phi_inner(1, 1).scale(2),
        es.phi_inner(2, 3).scale(-2),
        es.phi_inner(1, 3).scale(2),
    )


def source_flow(es: EigenSystem, n: int = 2, config: HierarchyConfig | None = None) -> dict[str, SPoly]:
    """``flow(n) + J(source_vector)`` for the hierarchy with self-consistent sources."""
    config = config or HierarchyConfig(2, n)
    base = flow(n, config)
    src = apply_J(source_vector(es))
    return {f: base[f] + s for f, s in zip(FIELDS, src)}


# ---------------------------------------------------------------------------
# variational derivative of the eigenvalue


def grad_lambda(es: EigenSystem, j: int, convention: str = "right") -> tuple[SPoly, SPoly, SPoly, SPoly]:
    """Unnormalised ``delta lambda_j / delta u``.

    ``convention="left"`` gives the components with the ``(-1)^p(u)`` sign on
    the odd adjoint block; ``"right"`` (the default) flips the two odd
    components, matching the right-derivative Euler operator used for the
    Hamiltonians, i.e. the vector ``Str(phi psi^T dM/du)``.
    """
    p1, p2, p3 = (es.g(f"phi{i}", j) for i in (1, 2, 3))
    s1, s2, s3 = (es.g(f"psi{i}", j) for i in (1, 2, 3))
    g3 = s3 * p2 + s1 * p3
    g4 = s2 * p3 - s3 * p1
    if convention == "right":
        g3, g4 = -g3, -g4
    elif convention != "left":
        raise ValueError(f"unknown convention {convention!r}")
    return ((s1 * p1 - s2 * p2).scale(HALF), (s2 * p1).scale(-2), g3, g4)


def eigen_residual(es: EigenSystem, j: int, convention: str = "right") -> tuple[SPoly, SPoly, SPoly, SPoly]:
    """``(L - lambda_j) grad_lambda(j)`` with x-derivatives closed by the spectral problems.

    The first component is returned differentiated once: the recursion
    operator's first row is an antiderivative, fixed here by the zero boundary
    conditions, so its derivative is the meaningful residual.
    """
    x1, x2, x3, x4 = grad_lambda(es, j, convention)
    rules = es.spectral_rules
    D = lambda p: d_x(p, rules)  # noqa: E731
    v, w, a, b = jet("v"), jet("w"), jet("alpha"), jet("beta")
    lam = es.lam(j)
    q = Fraction(1, 4)
    nonlocal_arg = (v * D(x1) + w * D(x2) - a * D(x3) - b * D(x4)).scale(HALF)
    local1 = D(x1).scale(HALF) + (w.scale(HALF) + 1) * x2 + (a * x3).scale(q) - (b * x4).scale(q)
    r1 = nonlocal_arg + D(local1) - lam * D(x1)
    y2 = x1.scale(2) - D(x2).scale(HALF) + (v * x2).scale(HALF) + a * x4
    y3 = (
        (b * x1).scale(2)
        - (a * D(x1)).scale(2)
        - (a * (w + 1) * x2).scale(2)
        + D(x3)
        + (v * x3).scale(HALF)
        + (a * b - w.scale(2) - 2) * x4
    )
    y4 = (a * x1).scale(-2) + b * x2 - x3 - D(x4) + (v * x4).scale(HALF)
    return (r1, y2 - lam * x2, y3 - lam * x3, y4 - lam * x4)


# ---------------------------------------------------------------------------
# the constraint


def apply_constraint(es: EigenSystem) -> dict[tuple[str, int], SPoly]:
    """Substitution rules for the potentials in terms of the generators.

    ``v = -2<Psi2,Phi1>``, ``w = alpha beta + (<Psi1,Phi1> - <Psi2,Phi2>)/2``,
    ``alpha = phiN``, ``beta = psiN / 2``.
    """
    a = es.phiN
    b = es.psiN.scale(HALF)
    return {
        ("v", 0): es.inner(2, 1).scale(-2),
        ("w", 0): a * b + (es.inner(1, 1) - es.inner(2, 2)).scale(HALF),
        ("alpha", 0): a,
        ("beta", 0): b,
    }


def constrained_odd_derivatives(es: EigenSystem) -> tuple[SPoly, SPoly]:
    """``alpha_x`` and ``beta_x`` solved from the last two lines of the constraint."""
    rules = apply_constraint(es)
    v, a, b = rules[("v", 0)], rules[("alpha", 0)], rules[("beta", 0)]
    # -2 alpha_x + v alpha = <Psi2,Phi3> - <Psi3,Phi1>
    ax = (v * a - es.inner(2, 3) + es.inner(3, 1)).scale(HALF)
    # -2 beta_x - v beta = <Psi3,Phi2> + <Psi1,Phi3>
    bx = (-(v * b) - es.inner(3, 2) - es.inner(1, 3)).scale(HALF)
    return ax, bx


@dataclass
class ConstrainedSystem:
    es: EigenSystem
    rhs: dict[tuple[str, int], SPoly]
    hamiltonian: SPoly | None = None
    part: str = "x"

    def rhs_var(self, v: Var) -> SPoly:
        return self.rhs[v.base]


def constrained_x_rules(es: EigenSystem) -> dict[tuple[str, int], SPoly]:
    """x-derivatives of every generator after substituting the constraint."""
    sub = apply_constraint(es)
    rules: dict[tuple[str, int], SPoly] = {}
    for key, rhs in es.spectral_rules.items():
        rules[key] = substitute(rhs, sub)
    ax, bx = constrained_odd_derivatives(es)
    rules[("phiN", 0)] = ax
    rules[("psiN", 0)] = bx.scale(2)
    return rules


def _check_convention(convention: str) -> None:
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def hamilton_rhs(H: SPoly, es: EigenSystem, convention: str = "printed") -> dict[tuple[str, int], SPoly]:
    """Signed gradient of ``H`` (left partials).

    ``"printed"``: ``Phi = dH/dPsi``, ``Psi_{1,2} = -dH/dPhi``, ``Psi_3 = +dH/dPhi_3``,
    ``phiN = dH/dpsiN``, ``psiN = dH/dphiN``.
    ``"graded"`` flips the sign of the ``(phiN, psiN)`` rows; with it the
    gradient is the Hamiltonian vector field of the graded bracket.
    """
    _check_convention(convention)
    out: dict[tuple[str, int], SPoly] = {}
    for phi, psi in es.conjugate_pairs():
        out[phi.base] = partial_left(H, psi)
        g = partial_left(H, phi)
        out[psi.base] = g if phi.odd else -g
    sign = 1 if convention == "printed" else -1
    out[("phiN", 0)] = partial_left(H, es.gen_var("psiN")).scale(sign)
    out[("psiN", 0)] = partial_left(H, es.gen_var("phiN")).scale(sign)
    return out


def hamilton_mismatch(
    rhs: dict, H: SPoly, es: EigenSystem, convention: str = "printed"
) -> dict[tuple[str, int], SPoly]:
    """Rows where ``rhs`` differs from the signed gradient of ``H``, as ``rhs - gradient``."""
    grad = hamilton_rhs(H, es, convention)
    out = {}
    for k, g in grad.items():
        d = rhs[k] - g
        if d.terms:
            out[k] = d
    return out


def assert_hamilton_form(rhs: dict, H: SPoly, es: EigenSystem, convention: str = "printed") -> None:
    """Raise :class:`HamiltonFormMismatch` naming the rows where ``rhs`` is not the gradient of ``H``."""
    bad = hamilton_mismatch(rhs, H, es, convention)
    if bad:
        rows = ", ".join(f"{k[0]}[{k[1]}]" for k in bad)
        raise HamiltonFormMismatch(f"{convention} Hamilton form fails in rows {rows}")


def H1(es: EigenSystem) -> SPoly:
    """The Hamiltonian of the constrained spatial flow, as displayed."""
    I = es.inner
    phN, psN = es.phiN, es.psiN
    d = I(1, 1) - I(2, 2)
    return (
        -I(1, 1, 1)
        + I(2, 2, 1)
        - I(2, 1).scale(2)
        + I(1, 2)
        - I(2, 1) * d
        - phN * psN * I(2, 1)
        + phN * (I(3, 2) + I(1, 3))
        + (psN * (I(2, 3) - I(3, 1))).scale(HALF)
    )


def H2(es: EigenSystem) -> SPoly:
    """The Hamiltonian of the constrained t2 flow, as displayed."""
    I = es.inner
    phN, psN = es.phiN, es.psiN
    d = I(1, 1) - I(2, 2)
    return (
        I(1, 1, 2)
        - I(2, 2, 2)
        + I(2, 1, 1) * d
        + I(2, 1, 1).scale(2)
        - I(1, 2, 1)
        + I(2, 1) * I(1, 2)
        - phN * (I(1, 3, 1) + I(3, 2, 1))
        - ((I(2, 3) - I(3, 1)) * (I(3, 2) + I(1, 3))).scale(HALF)
        + ((I(2, 3, 1) - I(3, 1, 1)) * psN).scale(HALF)
        + phN * psN * I(2, 1, 1)
        + (d * d).scale(Fraction(1, 4))
    )


def tilde_table(es: EigenSystem, max_m: int) -> list[dict[str, SPoly]]:
    """Constrained coefficients ``a~, b~, c~, rho~, delta~`` for ``m = 0..max_m``.

    Rows 0 and 1 come from the hierarchy with ``k0 = 1`` under the constraint;
    rows ``m + 1 >= 2`` use ``sum_j lambda_j^(m-1) grad lambda_j``.
    """
    sub = apply_constraint(es)
    I = es.inner
    rows = [
        {"a": SPoly.constant(1), "b": SPoly(), "c": SPoly(), "rho": SPoly(), "delta": SPoly()},
        {
            "a": SPoly(),
            "b": SPoly.constant(-1),
            "c": sub[("w", 0)],
            "rho": -sub[("alpha", 0)],
            "delta": -sub[("beta", 0)],
        },
    ]
    for m1 in range(2, max_m + 1):
        k = m1 - 2
        rows.append(
            {
                "a": (I(1, 1, k) - I(2, 2, k)).scale(HALF),
                "b": I(2, 1, k),
                "c": I(2, 1, k) + I(1, 2, k).scale(HALF),
                "rho": (I(2, 3, k) - I(3, 1, k)).scale(-HALF),
                "delta": (I(3, 2, k) + I(1, 3, k)).scale(HALF),
            }
        )
    return rows[: max_m + 1]


def generating_integrals(es: EigenSystem, max_m: int) -> list[SPoly]:
    """``F_m = sum_i (a_i a_{m-i} - 2 b_i b_{m-i} + 2 b_i c_{m-i} + 2 rho_i delta_{m-i})``."""
    t = tilde_table(es, max_m)
    out = []
    for m in range(max_m + 1):
        F = SPoly()
        for i in range(m + 1):
            r, s = t[i], t[m - i]
            F = F + r["a"] * s["a"] - (r["b"] * s["b"]).scale(2) + (r["b"] * s["c"]).scale(2) + (r["rho"] * s["delta"]).scale(2)
        out.append(F)
    return out


def f_k_integrals(es: EigenSystem, convention: str = "printed") -> list[SPoly]:
    """``f_k = phi1k psi1k + phi2k psi2k + s phi3k psi3k`` with ``s = +1`` printed, ``-1`` graded.

    Only the graded pairing ``psi^T phi`` (odd factors in the order
    ``psi3 phi3``) is conserved by the spectral and adjoint problems.
    """
    _check_convention(convention)
    s = 1 if convention == "printed" else -1
    return [
        es.g("phi1", k) * es.g("psi1", k)
        + es.g("phi2", k) * es.g("psi2", k)
        + (es.g("phi3", k) * es.g("psi3", k)).scale(s)
        for k in es.indices
    ]


def poisson(f: SPoly, g: SPoly, es: EigenSystem, convention: str = "printed") -> SPoly:
    """Poisson bracket with left partials.

    ``"printed"``: ``sum (df/dphi dg/dpsi - (-1)^{p p} df/dpsi dg/dphi)`` over the
    eigenfunction pairs plus ``df/dphiN dg/dpsiN + df/dpsiN dg/dphiN``.
    ``"graded"`` reverses the sign of the odd ``(phi3, psi3)`` sector.  For even
    ``f`` and ``g`` it equals the derivative of ``f`` along the graded
    Hamiltonian field of ``g``, so the two conventions disagree whenever odd
    variables interact.
    """
    _check_convention(convention)
    out = SPoly()
    for phi, psi in es.conjugate_pairs():
        fp, fs = partial_left(f, phi), partial_left(f, psi)
        gp, gs = partial_left(g, phi), partial_left(g, psi)
        if phi.odd:
            term = fp * gs + fs * gp
            out = out + (term if convention == "printed" else -term)
        else:
            out = out + fp * gs - fs * gp
    pN, sN = es.gen_var("phiN"), es.gen_var("psiN")
    out = out + partial_left(f, pN) * partial_left(g, sN) + partial_left(f, sN) * partial_left(g, pN)
    return out


def along(p: SPoly, rhs: dict[tuple[str, int], SPoly]) -> SPoly:
    """Derivative of ``p`` along a vector field given on the generators."""
    return d_x(p, rhs)


def nonlinearized_spatial(es: EigenSystem) -> ConstrainedSystem:
    return ConstrainedSystem(es, constrained_x_rules(es), H1(es), "x")


def temporal_matrix(es: EigenSystem, n: int, j: int) -> list[list[SPoly]]:
    """``sum_{i<=n} N~_i lambda_j^(n-i) + diag(b~_{n+1}, -b~_{n+1}, 0)`` as a plain 3x3 array."""
    t = tilde_table(es, n + 1)
    A = B = C = R = D = SPoly()
    for i in range(n + 1):
        lp = es.lam_power(j, n - i)
        A = A + t[i]["a"] * lp
        B = B + t[i]["b"] * lp
        C = C + t[i]["c"] * lp
        R = R + t[i]["rho"] * lp
        D = D + t[i]["delta"] * lp
    A = A + t[n + 1]["b"]
    return [
        [A, B, R],
        [B.scale(-2) + C.scale(2), -A, D],
        [D, -R, SPoly()],
    ]


def temporal_consistency_residual(es: EigenSystem, n: int) -> dict[tuple[int, int, int], SPoly]:
    """Nonzero entries of ``N^(n)|constraint - temporal_matrix`` keyed by ``(j, row, col)``.

    ``N^(n)`` comes from the hierarchy with ``k0 = 1``; the constraint is
    substituted into every jet using the constrained x-derivatives.
    """
    sub = apply_constraint(es)
    rules = constrained_x_rules(es)
    Nn = build_N(n, HierarchyConfig(1, n))
    out = {}
    for j in es.indices:
        T = temporal_matrix(es, n, j)
        for r in range(3):
            for c in range(3):
                e = SPoly()
                for k, co in Nn[r, c].coeffs.items():
                    e = e + substitute(co, sub, rules) * es.lam_power(j, k)
                d = e - T[r][c]
                if d.terms:
                    out[(j, r, c)] = d
    return out


def nonlinearized_temporal(es: EigenSystem, n: int) -> ConstrainedSystem:
    """Constrained ``t_n`` flow of every generator."""
    rhs: dict[tuple[str, int], SPoly] = {}
    t = tilde_table(es, n + 1)
    for j in es.indices:
        V = temporal_matrix(es, n, j)
        Vm = SuperMatrix.from_rows(V)
        Vadj = -supertranspose(Vm)
        phis = [es.g(f"phi{i}", j) for i in (1, 2, 3)]
        psis = [es.g(f"psi{i}", j) for i in (1, 2, 3)]
        for i in range(3):
            rhs[(f"phi{i + 1}", j)] = sum((V[i][k] * phis[k] for k in range(3)), SPoly())
            rhs[(f"psi{i + 1}", j)] = sum((Vadj[i, k][0] * psis[k] for k in range(3)), SPoly())
    a, b = es.phiN, es.psiN.scale(HALF)
    r = t[n + 1]
    # alpha_t = alpha b_{n+1} - rho_{n+1},  beta_t = -beta b_{n+1} + delta_{n+1}
    rhs[("phiN", 0)] = a * r["b"] - r["rho"]
    rhs[("psiN", 0)] = (-(b * r["b"]) + r["delta"]).scale(2)
    F = generating_integrals(es, n + 2)[n + 2]
    return ConstrainedSystem(es, rhs, F, f"t{n}")
