"""Published closed forms, transcribed verbatim (misprints included).

These are comparison targets for the computed objects; nothing in the
package derives from them.  ``compare_*`` helpers return a
:class:`Discrepancy` list that is empty when the forms agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .constraint import EigenSystem
from .laxmatrix import LaurentPoly, SuperMatrix
from .superpoly import SPoly, Var, parse

__all__ = [
    "Discrepancy",
    "COEFFICIENTS",
    "coefficient",
    "lax_n2",
    "FLOW_N2",
    "BOSONIC_N2",
    "RICCATI",
    "SIGMA1",
    "THETA1",
    "ADJOINT_MATRIX",
    "grad_lambda_left",
    "sourced_terms",
    "spatial_system",
    "temporal_system_n2",
    "temporal_odd_rows",
    "F3",
    "F4",
    "compare",
]


@dataclass(frozen=True)
class Discrepancy:
    item: str
    published: SPoly
    computed: SPoly

    @property
    def difference(self) -> SPoly:
        return self.computed - self.published

    def to_json_obj(self) -> dict:
        return {
            "item": self.item,
            "published": str(self.published),
            "computed": str(self.computed),
            "computed_minus_published": str(self.difference),
        }


def compare(pairs: dict[str, tuple[SPoly, SPoly]]) -> list[Discrepancy]:
    """``pairs`` maps a label to ``(published, computed)``."""
    return [Discrepancy(k, p, c) for k, (p, c) in pairs.items() if not (p - c).is_zero()]


# ---------------------------------------------------------------------------
# hierarchy table, symbolic k0

COEFFICIENTS: dict[str, str] = {
    "a1": "0",
    "b1": "-k0",
    "c1": "k0*w",
    "rho1": "-k0*alpha",
    "delta1": "-k0*beta",
    "a2": "k0*w - k0*alpha*beta",
    "b2": "-1/2*k0*v",
    "c2": "1/2*k0*w_x + 1/2*k0*v*w",
    "rho2": "k0*alpha_x - 1/2*k0*v*alpha",
    "delta2": "-k0*beta_x - 1/2*k0*v*beta",
    "a3": "k0*(1/2*w_x + v + w*v - v*alpha*beta + alpha_x*beta - alpha*beta_x)",
    "b3": "k0*(1/4*v_x - w - 1/4*v**2 - alpha*alpha_x + alpha*beta)",
    "c3": "1/4*k0*(w_xx + D(w*v) + v*w_x + w*v**2) + 1/2*k0*(v_x + 2*w**2)"
    " - k0*(w*alpha*beta + alpha*alpha_x - 1/2*beta*beta_x)",
    "rho3": "k0*(-alpha_xx + v*alpha_x + 1/2*alpha*v_x - 1/4*alpha*v**2 - alpha*w - beta_x)",
    "delta3": "k0*(-beta_xx - v*beta_x - 1/2*beta*v_x - 1/4*beta*v**2 - beta*w + (2*w + 2)*alpha_x + w_x*alpha)",
}


def coefficient(name: str) -> SPoly:
    return parse(COEFFICIENTS[name])


def _laurent(p: SPoly) -> LaurentPoly:
    """Split an SPoly containing the symbol ``lam`` into a Laurent polynomial in it."""
    lam = Var("lam", 0, 0, False)
    buckets: dict[int, dict] = {}
    for m, c in p.terms.items():
        k = sum(e for v, e in m if v == lam)
        rest = tuple((v, e) for v, e in m if v != lam)
        buckets.setdefault(k, {})[rest] = buckets.get(k, {}).get(rest, 0) + c
    return LaurentPoly({k: SPoly(t) for k, t in buckets.items()})


_LAX_N2 = [
    ["2*lam**2 + 1/2*(v_x - v**2) - 2*alpha*alpha_x", "-2*lam - v", "2*alpha*lam + 2*alpha_x - v*alpha"],
    [
        "4*(1 + w)*lam + 2*w_x + 2*v*(1 + w)",
        "-2*lam**2 - 1/2*(v_x - v**2) + 2*alpha*alpha_x",
        "-2*beta*lam - 2*beta_x - v*beta",
    ],
    ["-2*beta*lam - 2*beta_x - v*beta", "-2*alpha*lam - 2*alpha_x + v*alpha", "0"],
]


def lax_n2() -> SuperMatrix:
    """The temporal Lax matrix of the second flow at ``k0 = 2``."""
    return SuperMatrix.from_rows([[_laurent(parse(e)) for e in row] for row in _LAX_N2])


FLOW_N2: dict[str, str] = {
    "v": "v_xx - 2*v*v_x - 4*w_x - 4*alpha*alpha_xx + 4*alpha_x*beta + 4*alpha*beta_x",
    "w": "-w_xx - 2*D(w*v) - 2*v_x + 2*(2*w + 2)*alpha_x + 2*w_x*alpha"
    " - (2*w*beta + 1/2*beta*v**2)*(1 + alpha) - 2*beta*beta_x",
    "alpha": "2*alpha_xx - 2*v*alpha_x + 2*beta_x - 1/2*alpha*v_x",
    "beta": "-2*beta_xx - 2*v*beta_x + 2*beta*alpha*alpha_x + 2*(2*w + 2)*alpha_x + 2*alpha*w_x - 3/2*beta*v_x",
}

BOSONIC_N2: dict[str, str] = {
    "v": "v_xx - 2*v*v_x - 4*w_x",
    "w": "-w_xx - 2*D(w*v) - 2*v_x",
}

# ---------------------------------------------------------------------------
# conservation laws

RICCATI: dict[str, str] = {
    "f1": "1 + w",
    "g1": "-beta",
    "f2": "1/2*w_x + 1/2*v*(1 + w)",
    "g2": "-beta_x + alpha*(1 + w) - 1/2*v*beta",
    "f3": "1/4*w_xx + 1/8*w_x**2 + 1/2*v*w_x + 1/4*(1 + w)*(w_x*v + v_x) + 1/8*v**2*(1 + w)*(3 + w) + 1/2*beta*beta_x",
    "g3": "-beta_xx - v*alpha_x + (alpha_x + alpha*v - beta)*(1 + w) + 3/2*alpha*w_x - 1/2*v_x*beta - 1/4*v**2*beta",
}

SIGMA1 = "w + 1 - alpha*beta"
THETA1 = "k0*(-1/2*w_x - v*(1 + w) + alpha*beta_x - alpha_x*beta + v*alpha*beta)"

# ---------------------------------------------------------------------------
# adjoint problem and eigenvalue gradient

ADJOINT_MATRIX = [
    ["lam - 1/2*v", "2*w + 2", "beta"],
    ["-1", "-lam + 1/2*v", "-alpha"],
    ["-alpha", "-beta", "0"],
]


def adjoint_matrix() -> SuperMatrix:
    return SuperMatrix.from_rows([[_laurent(parse(e)) for e in row] for row in ADJOINT_MATRIX])


def grad_lambda_left(es: EigenSystem, j: int) -> tuple[SPoly, SPoly, SPoly, SPoly]:
    """The displayed (unnormalised) eigenvalue gradient."""
    p1, p2, p3 = (es.g(f"phi{i}", j) for i in (1, 2, 3))
    s1, s2, s3 = (es.g(f"psi{i}", j) for i in (1, 2, 3))
    h = Fraction(1, 2)
    return ((s1 * p1 - s2 * p2).scale(h), (s2 * p1).scale(-2), s3 * p2 + s1 * p3, s2 * p3 - s3 * p1)


# ---------------------------------------------------------------------------
# sources


def sourced_terms(es: EigenSystem) -> dict[str, SPoly]:
    """The eigenfunction terms of the sourced second flow, field by field."""
    S = es.phi_inner
    a, b = parse("alpha"), parse("beta")
    from .superpoly import d_x

    return {
        "v": d_x(S(1, 1)).scale(-2),
        "w": -d_x(S(1, 2)) + a * S(2, 3) + b * S(1, 3),
        "alpha": -(a * S(1, 1)) - S(1, 3),
        "beta": b * S(1, 1) + S(2, 3),
    }


SOURCE_EIGEN_PROBLEM = [
    ["lam", "w - 1/2*v", "alpha"],
    ["2*v", "-lam", "beta"],
    ["beta", "-alpha", "0"],
]


def source_eigen_matrix() -> SuperMatrix:
    """Matrix of the eigenfunction problem displayed next to the sourced hierarchy."""
    return SuperMatrix.from_rows([[_laurent(parse(e)) for e in row] for row in SOURCE_EIGEN_PROBLEM])


# ---------------------------------------------------------------------------
# nonlinearized systems


class _Brackets:
    def __init__(self, es: EigenSystem):
        self.es = es
        I = es.inner
        self.P = I(1, 1) - I(2, 2)
        self.Q = I(2, 1)
        self.R = I(1, 2)
        self.S = I(2, 3) - I(3, 1)
        self.T = I(3, 2) + I(1, 3)
        self.pN = es.phiN
        self.sN = es.psiN

    def Qk(self, k):
        return self.es.inner(2, 1, k)

    def Sk(self, k):
        return self.es.inner(2, 3, k) - self.es.inner(3, 1, k)

    def Tk(self, k):
        return self.es.inner(3, 2, k) + self.es.inner(1, 3, k)


def spatial_system(es: EigenSystem) -> dict[tuple[str, int], SPoly]:
    """The displayed constrained x-flow."""
    B = _Brackets(es)
    h = Fraction(1, 2)
    P, Q, S, T, pN, sN = B.P, B.Q, B.S, B.T, B.pN, B.sN
    out: dict[tuple[str, int], SPoly] = {}
    for j in es.indices:
        lam = es.lam(j)
        p1, p2, p3 = (es.g(f"phi{i}", j) for i in (1, 2, 3))
        s1, s2, s3 = (es.g(f"psi{i}", j) for i in (1, 2, 3))
        out[("phi1", j)] = (-lam - Q) * p1 + p2 + pN * p3
        out[("phi2", j)] = -(P + pN * sN + 2) * p1 + (lam + Q) * p2 + (sN * p3).scale(h)
        out[("phi3", j)] = (sN * p1).scale(h) - pN * p2
        out[("psi1", j)] = (lam + Q) * s1 + (P + pN * sN + 2) * s2 + (sN * s3).scale(h)
        out[("psi2", j)] = -s1 + (-lam - Q) * s2 - pN * s3
        out[("psi3", j)] = -(pN * s1) - (sN * s2).scale(h)
    out[("phiN", 0)] = S.scale(-h) - Q * pN
    out[("psiN", 0)] = -T + Q * sN
    return out


def temporal_system_n2(es: EigenSystem) -> dict[tuple[str, int], SPoly]:
    """The displayed constrained t2-flow."""
    B = _Brackets(es)
    h = Fraction(1, 2)
    P, Q, R, S, T, pN, sN = B.P, B.Q, B.R, B.S, B.T, B.pN, B.sN
    I = es.inner
    Q1 = B.Qk(1)
    out: dict[tuple[str, int], SPoly] = {}
    for j in es.indices:
        lam = es.lam(j)
        lam2 = lam * lam
        p1, p2, p3 = (es.g(f"phi{i}", j) for i in (1, 2, 3))
        s1, s2, s3 = (es.g(f"psi{i}", j) for i in (1, 2, 3))
        diag = lam2 + Q1 + P.scale(h)
        odd_a = -(pN * lam) - S.scale(h)
        odd_b = -(sN * lam).scale(h) + T.scale(h)
        odd_c = pN * lam + S.scale(h)
        out[("phi1", j)] = diag * p1 + (-lam + Q) * p2 + odd_a * p3
        out[("phi2", j)] = ((P + pN * sN + 2) * lam + R) * p1 - diag * p2 + odd_b * p3
        out[("phi3", j)] = odd_b * p1 + odd_c * p2
        out[("psi1", j)] = (
            -diag * s1 + ((-(I(1, 1) + I(2, 2)) + pN * sN - 2) * lam - R) * s2 + odd_b * s3
        )
        out[("psi2", j)] = (lam - Q) * s1 + diag * s2 + odd_c * s3
        out[("psi3", j)] = odd_c * s1 + ((sN * lam).scale(h) - T.scale(h)) * s2
    out[("phiN", 0)] = B.Sk(1).scale(-h) - pN * Q1
    out[("psiN", 0)] = -B.Tk(1) + sN * Q1
    return out


def temporal_odd_rows(es: EigenSystem, n: int) -> dict[tuple[str, int], SPoly]:
    """The displayed ``phiN, psiN`` rows of the general constrained t_n-flow."""
    B = _Brackets(es)
    h = Fraction(1, 2)
    k = n - 1
    return {
        ("phiN", 0): B.Sk(k).scale(h) - B.pN * B.Qk(k),
        ("psiN", 0): -B.Tk(k) + B.sN * B.Qk(k),
    }


def F3(es: EigenSystem) -> SPoly:
    B = _Brackets(es)
    I = es.inner
    h = Fraction(1, 2)
    return (
        I(1, 1, 1)
        - I(2, 2, 1)
        + I(2, 1, 2).scale(4)
        - B.Q.scale(2)
        - B.R
        + B.Q * (B.P + B.pN * B.sN)
        - B.pN * (I(1, 3) + I(3, 2))
        + ((I(1, 3) - I(3, 2)) * B.sN).scale(h)
    )


def F4(es: EigenSystem) -> SPoly:
    """Printed identically to the t2 Hamiltonian."""
    from .constraint import H2

    return H2(es)
