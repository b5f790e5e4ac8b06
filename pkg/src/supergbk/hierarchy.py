"""The super gBK hierarchy: recursion table, Lax pair, flows and Hamiltonian data.

Coefficients are obtained from the stationary zero-curvature equation
``N_x = [M, N]`` order by order in ``lambda^-1``: the off-diagonal part of
``[diag(-1, 1, 0), N_{m+1}]`` is algebraic in row ``m``, and the diagonal
coefficient ``a_{m+1}`` needs one exact antiderivative.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

from .laxmatrix import LaurentPoly, SuperMatrix, commutator
from .superpoly import NotExact, SPoly, Var, const, d_x, euler_variational, integrate_x, jet

__all__ = [
    "FIELDS",
    "HierarchyConfig",
    "HierarchyRow",
    "HierarchyTable",
    "recurse",
    "spectral_matrix",
    "build_N",
    "flow",
    "apply_J",
    "apply_L",
    "apply_R",
    "gradient_vector",
    "hamiltonian",
    "check_supertrace_identity",
    "variational_gradient",
    "bosonic",
    "vacuum_value",
    "pairing",
    "skew_residual",
    "is_total_derivative",
    "bihamiltonian_residual",
    "recursion_residual",
    "second_operator_residual",
]

FIELDS = ("v", "w", "alpha", "beta")
FIELD_VARS = {f: Var(f, 0, 0, f in ("alpha", "beta")) for f in FIELDS}

K0Like = Union[int, Fraction, str, SPoly]
NORMALIZATIONS = ("zero", "vacuum")


def _v(k=0):
    return jet("v", k)


def _w(k=0):
    return jet("w", k)


def _a(k=0):
    return jet("alpha", k)


def _b(k=0):
    return jet("beta", k)


@dataclass(frozen=True)
class HierarchyConfig:
    """Seed ``a_0 = k0`` (a rational, or ``"k0"`` for a symbolic seed) and the maximal flow index.

    ``normalization`` fixes the constant in each antiderivative ``a_m``:
    ``"zero"`` drops it (the conventional table), ``"vacuum"`` makes ``a_m``
    vanish at the constant solution ``w = -1``, all other jets zero.
    """

    k0: K0Like = 1
    order: int = 3
    normalization: str = "zero"

    def __post_init__(self):
        if isinstance(self.k0, str):
            if self.k0 != "k0":
                object.__setattr__(self, "k0", Fraction(self.k0))
        if not isinstance(self.k0, (str, SPoly)) and Fraction(self.k0) == 0:
            raise ValueError("k0 must be nonzero")
        if self.order < 0:
            raise ValueError("order must be non-negative")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")

    def seed(self) -> SPoly:
        if isinstance(self.k0, SPoly):
            return self.k0
        if self.k0 == "k0":
            return const("k0")
        return SPoly.constant(Fraction(self.k0))

    @property
    def symbolic(self) -> bool:
        return isinstance(self.k0, (str, SPoly))


@dataclass(frozen=True)
class HierarchyRow:
    a: SPoly
    b: SPoly
    c: SPoly
    rho: SPoly
    delta: SPoly

    def as_dict(self) -> dict[str, SPoly]:
        return {"a": self.a, "b": self.b, "c": self.c, "rho": self.rho, "delta": self.delta}

    def gradient(self) -> tuple[SPoly, SPoly, SPoly, SPoly]:
        """The vector ``(a, -2b, -2delta, 2rho)`` on which the recursion operator acts."""
        return (self.a, self.b.scale(-2), self.delta.scale(-2), self.rho.scale(2))

    def block(self) -> SuperMatrix:
        """The ``lambda^0`` matrix ``[[a, b, rho], [-2b+2c, -a, delta], [delta, -rho, 0]]``."""
        return SuperMatrix.from_rows(
            [
                [self.a, self.b, self.rho],
                [self.b.scale(-2) + self.c.scale(2), -self.a, self.delta],
                [self.delta, -self.rho, SPoly()],
            ]
        )


@dataclass(frozen=True)
class HierarchyTable:
    config: HierarchyConfig
    rows: tuple[HierarchyRow, ...]

    def __getitem__(self, m: int) -> HierarchyRow:
        return self.rows[m]

    def __len__(self) -> int:
        return len(self.rows)

    def to_json_obj(self) -> dict:
        return {
            "k0": str(self.config.k0),
            "normalization": self.config.normalization,
            "rows": [{k: p.to_json_obj() for k, p in r.as_dict().items()} for r in self.rows],
        }


def spectral_matrix(lam: LaurentPoly | None = None) -> SuperMatrix:
    """The (2|1) spatial Lax matrix ``M(u, lambda)``."""
    lam = LaurentPoly.lam(1) if lam is None else lam
    v, w, a, b = _v(), _w(), _a(), _b()
    half_v = v.scale(Fraction(1, 2))
    return SuperMatrix.from_rows(
        [
            [-lam + half_v, 1, a],
            [w.scale(-2) - 2, lam - half_v, b],
            [b, -a, 0],
        ],
        even=True,
    )


def _M0() -> SuperMatrix:
    return spectral_matrix(LaurentPoly())


def vacuum_value(p: SPoly) -> SPoly:
    """``p`` evaluated at ``w = -1`` with every other jet set to zero."""
    out = SPoly()
    for m, c in p.terms.items():
        if all(v.is_const or (v.family == "w" and v.order == 0) for v, _ in m):
            term = SPoly.constant(c)
            for v, e in m:
                term = term * (SPoly.constant((-1) ** e) if v.family == "w" else SPoly.from_var(v, e))
            out = out + term
    return out


def _next_row(prev: HierarchyRow, normalization: str = "zero") -> HierarchyRow:
    # [diag(-1,1,0), X] has entries (d_i - d_j) X_ij with d = (-1, 1, 0)
    Nm = prev.block()
    R = Nm.d_x() - commutator(_M0(), Nm)
    r = lambda i, j: R[i, j][0]  # noqa: E731
    b = r(0, 1).scale(Fraction(-1, 2))
    c21 = r(1, 0).scale(Fraction(1, 2))
    rho = -r(0, 2)
    delta = r(2, 0)
    c = (c21 + b.scale(2)).scale(Fraction(1, 2))
    a = integrate_x(b * _w().scale(2) + c.scale(2) + _a() * delta + _b() * rho)
    if normalization == "vacuum":
        a = a - vacuum_value(a)
    return HierarchyRow(a, b, c, rho, delta)


@lru_cache(maxsize=32)
def _table(k0_key, order: int, normalization: str = "zero") -> tuple[HierarchyRow, ...]:
    seed = _seed_from_key(k0_key)
    rows = [HierarchyRow(seed, SPoly(), SPoly(), SPoly(), SPoly())]
    for _ in range(order + 1):
        rows.append(_next_row(rows[-1], normalization))
    return tuple(rows)


def _seed_key(cfg: HierarchyConfig):
    if isinstance(cfg.k0, SPoly):
        return ("poly", cfg.k0.to_json())
    if cfg.k0 == "k0":
        return ("sym",)
    return ("num", Fraction(cfg.k0))


def _seed_from_key(key) -> SPoly:
    if key[0] == "poly":
        return SPoly.from_json(key[1])
    if key[0] == "sym":
        return const("k0")
    return SPoly.constant(key[1])


def recurse(config: HierarchyConfig) -> HierarchyTable:
    """Rows ``m = 0 .. order + 1`` of ``(a_m, b_m, c_m, rho_m, delta_m)``.

    Raises :class:`~supergbk.superpoly.NotExact` if an antiderivative leaves
    the local differential polynomials.
    """
    return HierarchyTable(config, _table(_seed_key(config), config.order, config.normalization))


def _table_for(n: int, config: HierarchyConfig) -> HierarchyTable:
    cfg = config if config.order >= n else HierarchyConfig(config.k0, n, config.normalization)
    return recurse(cfg)


def build_N(n: int, config: HierarchyConfig) -> SuperMatrix:
    """``N^(n) = sum_{m<=n} N_m lambda^(n-m) + diag(b_{n+1}, -b_{n+1}, 0)``."""
    tab = _table_for(n, config)
    out = SuperMatrix.zero()
    for m in range(n + 1):
        out = out + tab[m].block() * LaurentPoly.lam(n - m)
    bn = tab[n + 1].b
    mod = SuperMatrix.from_rows([[bn, 0, 0], [0, -bn, 0], [0, 0, 0]])
    return out + mod


def flow(n: int, config: HierarchyConfig) -> dict[str, SPoly]:
    """``u_{t_n}`` read off the zero-curvature equation with ``N^(n)``."""
    r = _table_for(n, config)[n + 1]
    a, b = _a(), _b()
    return {
        "v": d_x(r.b).scale(2),
        "w": -d_x(r.a) + a * r.delta + b * r.rho,
        "alpha": a * r.b - r.rho,
        "beta": -(b * r.b) + r.delta,
    }


Vec4 = tuple[SPoly, SPoly, SPoly, SPoly]


def apply_J(x: Vec4) -> Vec4:
    """First Hamiltonian operator acting on ``(X_v, X_w, X_alpha, X_beta)``."""
    x1, x2, x3, x4 = (SPoly.coerce(t) for t in x)
    a, b = _a(), _b()
    h = Fraction(1, 2)
    return (
        -d_x(x2),
        -d_x(x1) - (a * x3).scale(h) + (b * x4).scale(h),
        -(a * x2).scale(h) - x4.scale(h),
        (b * x2).scale(h) - x3.scale(h),
    )


def apply_L(x: Vec4) -> Vec4:
    """Recursion operator acting on ``(X_1, X_2, X_3, X_4)``.

    The whole first row is taken as one antiderivative with zero constant:
    its four ``d^-1`` pieces are only exact together, and the local part is
    differentiated and folded in so that no stray constant survives.
    """
    x1, x2, x3, x4 = (SPoly.coerce(t) for t in x)
    v, w, a, b = _v(), _w(), _a(), _b()
    h, q = Fraction(1, 2), Fraction(1, 4)
    nonlocal_arg = (v * d_x(x1) + w * d_x(x2) - a * d_x(x3) - b * d_x(x4)).scale(h)
    local = d_x(x1).scale(h) + (w.scale(h) + 1) * x2 + (a * x3).scale(q) - (b * x4).scale(q)
    y1 = integrate_x(nonlocal_arg + d_x(local))
    y2 = x1.scale(2) - d_x(x2).scale(h) + (v * x2).scale(h) + a * x4
    y3 = (
        (b * x1).scale(2)
        - (a * d_x(x1)).scale(2)
        - ((a * (w + 1)) * x2).scale(2)
        + d_x(x3)
        + (v * x3).scale(h)
        + (a * b - w.scale(2) - 2) * x4
    )
    y4 = (a * x1).scale(-2) + b * x2 - x3 - d_x(x4) + (v * x4).scale(h)
    return (y1, y2, y3, y4)


def apply_R(x: Vec4) -> Vec4:
    """The second Hamiltonian operator exactly as printed (matrix of differential operators)."""
    x1, x2, x3, x4 = (SPoly.coerce(t) for t in x)
    v, w, a, b = _v(), _w(), _a(), _b()
    h, q = Fraction(1, 2), Fraction(1, 4)
    D = d_x
    y1 = D(x1).scale(-2) + D(D(x2)).scale(h) - D(v * x2).scale(h) + D(a * x4)
    y2 = (
        -(v * D(x1)).scale(h)
        - D(D(x1)).scale(h)
        - w * D(x2)
        - D(w * x2).scale(h)
        - D(x2)
        + (-D(a * x3).scale(q) - (v * a * x3).scale(q) - (b * x3).scale(h))
        + (D(b * x4).scale(q) + ((w + 1) * a * x4) + (v * b * x4).scale(q))
    )
    y3 = (a * D(x2)).scale(q) - (v * a * x2).scale(q) - (b * x2).scale(h) + x3.scale(h) + D(x4).scale(h) - (v * x4).scale(q)
    y4 = (
        a * D(x1)
        - (b * D(x2)).scale(q)
        + (w + 1) * a * x2
        + (v * b * x2).scale(q)
        - D(x3).scale(h)
        - (v * x3).scale(q)
        + (w + 1 - a * b) * x4
    )
    return (y1, y2, y3, y4)


def gradient_vector(m: int, config: HierarchyConfig) -> Vec4:
    return _table_for(m, config)[m].gradient()


def hamiltonian(n: int, config: HierarchyConfig) -> SPoly:
    """Density ``2 a_{n+1} / n`` of the Hamiltonian of the ``n``-th flow."""
    if n < 1:
        raise ValueError("hamiltonian density is defined for n >= 1")
    return _table_for(n, config)[n + 1].a.scale(Fraction(2, n))


def variational_gradient(density: SPoly, side: str = "right") -> Vec4:
    return tuple(euler_variational(density, f, side=side) for f in FIELDS)  # type: ignore[return-value]


@dataclass
class IdentityReport:
    n: int
    residuals: tuple[SPoly, ...]

    @property
    def ok(self) -> bool:
        return all(r.is_zero() for r in self.residuals)


def check_supertrace_identity(n: int, config: HierarchyConfig, side: str = "right") -> IdentityReport:
    """Residuals of ``delta/delta u int(-2 a_{n+1}) + n (a_n, -2b_n, -2delta_n, 2rho_n)``.

    Exact for every ``n`` with the vacuum normalization.  The zero-constant
    table leaves residuals that are combinations of lower gradients, since
    its ``a_m`` differ from the vacuum ones by constants.
    """
    tab = _table_for(n, config)
    lhs = variational_gradient(tab[n + 1].a.scale(-2), side)
    rhs = tab[n].gradient()
    return IdentityReport(n, tuple(l + r.scale(n) for l, r in zip(lhs, rhs)))


def bosonic(p: SPoly) -> SPoly:
    """Drop every term containing an odd potential (alpha = beta = 0)."""
    return SPoly({m: c for m, c in p.terms.items() if not any(v.odd for v, _ in m)})


def pairing(x: Vec4, y: Vec4) -> SPoly:
    """``sum_i x_i y_i``, factors kept in this order."""
    return sum((SPoly.coerce(p) * SPoly.coerce(q) for p, q in zip(x, y)), SPoly())


def generic_vector(prefix: str) -> Vec4:
    """A vector of free generators with the parities of a gradient (even, even, odd, odd)."""
    return tuple(SPoly.from_var(Var(f"{prefix}{i}", 0, 0, i > 2)) for i in range(1, 5))  # type: ignore[return-value]


def skew_residual(x: Vec4 | None = None, y: Vec4 | None = None) -> SPoly:
    """``<x, J y> + <y, J x>``; J is skew-adjoint when this is a total derivative."""
    x = generic_vector("X") if x is None else x
    y = generic_vector("Y") if y is None else y
    return pairing(x, apply_J(y)) + pairing(y, apply_J(x))


def is_total_derivative(p: SPoly) -> bool:
    try:
        integrate_x(p)
    except NotExact:
        return False
    return True


def bihamiltonian_residual(n: int, config: HierarchyConfig) -> Vec4:
    """``J L grad_n - u_{t_n}``."""
    g = gradient_vector(n, config)
    fl = flow(n, config)
    return tuple(p - fl[f] for p, f in zip(apply_J(apply_L(g)), FIELDS))  # type: ignore[return-value]


def recursion_residual(m: int, config: HierarchyConfig) -> Vec4:
    """``L grad_m - grad_{m+1}``; zero for the zero-constant table."""
    tab = _table_for(m + 1, config)
    return tuple(p - q for p, q in zip(apply_L(tab[m].gradient()), tab[m + 1].gradient()))  # type: ignore[return-value]


def second_operator_residual(n: int, config: HierarchyConfig) -> Vec4:
    """``R grad_n - u_{t_n}`` for the displayed second operator."""
    g = gradient_vector(n, config)
    fl = flow(n, config)
    return tuple(p - fl[f] for p, f in zip(apply_R(g), FIELDS))  # type: ignore[return-value]
