"""Numerical integration of the constrained flows over a finite Grassmann algebra.

Odd variables need concrete values, so every dynamical variable is an element
of the Grassmann algebra on ``K`` generators: a float vector of length
``2**K`` indexed by bitmasks of generators (bit ``i`` set means ``e_i`` is a
factor, written in increasing order).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .superpoly import SPoly, Var, partial_left

__all__ = [
    "GrassmannAlgebra",
    "GrassmannNumber",
    "CompiledSystem",
    "random_point",
    "rk4_step",
    "integrate_ode",
    "DriftReport",
    "monitor",
    "fit_order",
    "differential_rank",
    "MAX_GENERATORS",
    "AlgebraMismatch",
    "UnassignedGenerator",
    "NonFiniteState",
    "evaluate",
]

MAX_GENERATORS = int(os.environ.get("SUPERGBK_MAX_GENERATORS", "10"))


class AlgebraMismatch(ValueError):
    """Operands live in Grassmann algebras with different generator counts."""


class UnassignedGenerator(KeyError):
    """A polynomial mentions a variable with no value at the phase point."""


class NonFiniteState(FloatingPointError):
    """The integrator produced an overflow or NaN."""


def _popcount(m: int) -> int:
    return bin(m).count("1")


@lru_cache(maxsize=16)
def _product_table(K: int):
    """Index arrays ``(a, b, c, sign)`` with ``e_a e_b = sign e_c`` for disjoint masks."""
    size = 1 << K
    A, B, C, S = [], [], [], []
    for a in range(size):
        for b in range(size):
            if a & b:
                continue
            # count pairs (i in a, j in b) with i > j: each such e_i must pass e_j
            swaps = 0
            for j in range(K):
                if b >> j & 1:
                    swaps += _popcount(a >> (j + 1))
            A.append(a)
            B.append(b)
            C.append(a | b)
            S.append(-1.0 if swaps % 2 else 1.0)
    a = np.array(A, dtype=np.intp)
    b = np.array(B, dtype=np.intp)
    c = np.array(C, dtype=np.intp)
    s = np.array(S)
    scatter = np.zeros((len(c), size))
    scatter[np.arange(len(c)), c] = s
    return a, b, scatter


@dataclass(frozen=True)
class GrassmannAlgebra:
    K: int

    def __post_init__(self):
        if not 0 <= self.K <= MAX_GENERATORS:
            raise ValueError(f"K must lie in 0..{MAX_GENERATORS}")

    @property
    def size(self) -> int:
        return 1 << self.K

    @property
    def even_masks(self) -> np.ndarray:
        return np.array([m for m in range(self.size) if _popcount(m) % 2 == 0])

    @property
    def odd_masks(self) -> np.ndarray:
        return np.array([m for m in range(self.size) if _popcount(m) % 2 == 1])

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Batched product along the last axis."""
        a, b, scatter = _product_table(self.K)
        return (x[..., a] * y[..., b]) @ scatter

    def scalar(self, c: float) -> "GrassmannNumber":
        v = np.zeros(self.size)
        v[0] = c
        return GrassmannNumber(self, v)

    def generator(self, i: int) -> "GrassmannNumber":
        if not 0 <= i < self.K:
            raise IndexError("generator index out of range")
        v = np.zeros(self.size)
        v[1 << i] = 1.0
        return GrassmannNumber(self, v)


@dataclass
class GrassmannNumber:
    algebra: GrassmannAlgebra
    coeffs: np.ndarray

    def __add__(self, other):
        other = self._coerce(other)
        return GrassmannNumber(self.algebra, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return GrassmannNumber(self.algebra, self.coeffs - other.coeffs)

    def __neg__(self):
        return GrassmannNumber(self.algebra, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return GrassmannNumber(self.algebra, self.coeffs * other)
        other = self._coerce(other)
        return GrassmannNumber(self.algebra, self.algebra.mul(self.coeffs, other.coeffs))

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return GrassmannNumber(self.algebra, self.coeffs * other)
        return NotImplemented

    def _coerce(self, other) -> "GrassmannNumber":
        if isinstance(other, GrassmannNumber):
            if other.algebra != self.algebra:
                raise AlgebraMismatch("Grassmann numbers from different algebras")
            return other
        return self.algebra.scalar(float(other))

    @property
    def body(self) -> float:
        return float(self.coeffs[0])

    def parity(self) -> str:
        odd = np.abs(self.coeffs[self.algebra.odd_masks]).max(initial=0.0) if self.algebra.K else 0.0
        even = np.abs(self.coeffs[self.algebra.even_masks]).max(initial=0.0)
        if odd and even:
            return "mixed"
        return "odd" if odd else "even"


class CompiledSystem:
    """Polynomials over a fixed list of variables, evaluated in batch.

    Monomials of equal degree are evaluated together: one batched Grassmann
    product per factor position.  Factor order inside each monomial is the
    canonical one, so odd signs come out right.
    """

    def __init__(self, algebra: GrassmannAlgebra, variables: list[Var], polys: list[SPoly]):
        self.algebra = algebra
        self.variables = list(variables)
        index = {v: i for i, v in enumerate(self.variables)}
        self.n_out = len(polys)
        groups: dict[int, tuple[list, list, list]] = {}
        self.constants = np.zeros(self.n_out)
        for k, p in enumerate(polys):
            for mono, c in p.terms.items():
                idx = []
                for v, e in mono:
                    if v.is_const:
                        raise ValueError(f"substitute numeric eigenvalues before compiling ({v})")
                    if v not in index:
                        raise UnassignedGenerator(str(v))
                    idx.extend([index[v]] * e)
                if not idx:
                    self.constants[k] += float(c)
                    continue
                g = groups.setdefault(len(idx), ([], [], []))
                g[0].append(idx)
                g[1].append(float(c))
                g[2].append(k)
        self.groups = [
            (np.array(ix, dtype=np.intp), np.array(cs), np.array(tg, dtype=np.intp)) for ix, cs, tg in groups.values()
        ]

    def __call__(self, state: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n_out, self.algebra.size))
        out[:, 0] = self.constants
        for idx, coef, target in self.groups:
            acc = state[idx[:, 0]]
            for pos in range(1, idx.shape[1]):
                acc = self.algebra.mul(acc, state[idx[:, pos]])
            np.add.at(out, target, acc * coef[:, None])
        return out


def evaluate(p: SPoly, point: dict[Var, GrassmannNumber]) -> GrassmannNumber:
    """Value of ``p`` at a phase point mapping each variable to a Grassmann number."""
    if not point:
        raise UnassignedGenerator("empty phase point")
    variables = list(point)
    algebra = point[variables[0]].algebra
    if any(g.algebra != algebra for g in point.values()):
        raise AlgebraMismatch("phase point mixes Grassmann algebras")
    state = np.array([point[v].coeffs for v in variables])
    return GrassmannNumber(algebra, CompiledSystem(algebra, variables, [p])(state)[0])


def random_point(
    algebra: GrassmannAlgebra, variables: list[Var], seed: int = 0, soul: float = 0.0
) -> np.ndarray:
    """Seeded phase point.

    Even variables get a body uniform in ``[-1, 1]`` (plus, if ``soul > 0``, even
    nilpotent parts of that size); odd variables get a random linear
    combination of the generators with coefficients in ``[-1, 1]``.
    """
    rng = np.random.default_rng(seed)
    state = np.zeros((len(variables), algebra.size))
    even = algebra.even_masks[1:]
    gens = np.array([1 << i for i in range(algebra.K)], dtype=np.intp)
    for i, v in enumerate(variables):
        if v.odd:
            state[i, gens] = rng.uniform(-1.0, 1.0, len(gens))
        else:
            state[i, 0] = rng.uniform(-1.0, 1.0)
            if soul > 0 and len(even):
                state[i, even] = rng.uniform(-soul, soul, len(even))
    return state


def rk4_step(rhs, state: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(state)
    k2 = rhs(state + 0.5 * dt * k1)
    k3 = rhs(state + 0.5 * dt * k2)
    k4 = rhs(state + dt * k3)
    return state + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_ode(rhs, state: np.ndarray, dt: float, span: float, callback=None) -> np.ndarray:
    """Classical RK4 with ``round(span / dt)`` steps of exactly ``dt``."""
    if dt <= 0 or span < 0:
        raise ValueError("need dt > 0 and span >= 0")
    steps = int(round(span / dt))
    if abs(steps * dt - span) > 1e-9 * max(1.0, span):
        raise ValueError("span must be a multiple of dt")
    for n in range(steps):
        state = rk4_step(rhs, state, dt)
        if not np.isfinite(state).all():
            raise NonFiniteState(f"non-finite state after {n + 1} steps")
        if callback is not None:
            callback(n + 1, state)
    return state


@dataclass
class DriftReport:
    dt: float
    span: float
    drift: dict[str, float] = field(default_factory=dict)

    @property
    def max_drift(self) -> float:
        return max(self.drift.values(), default=0.0)

    def to_json_obj(self) -> dict:
        return {"dt": self.dt, "span": self.span, "drift": self.drift, "max_drift": self.max_drift}


def monitor(
    rhs, invariants: dict[str, CompiledSystem], state: np.ndarray, dt: float, span: float
) -> DriftReport:
    """Largest change of any Grassmann coefficient of each invariant over the run."""
    start = {k: f(state)[0] for k, f in invariants.items()}
    worst = {k: 0.0 for k in invariants}

    def cb(_n, s):
        for k, f in invariants.items():
            worst[k] = max(worst[k], float(np.abs(f(s)[0] - start[k]).max()))

    integrate_ode(rhs, state, dt, span, cb)
    return DriftReport(dt, span, worst)


def fit_order(dts: list[float], drifts: list[float]) -> float:
    """Least-squares slope of ``log drift`` against ``log dt``."""
    x = np.log(np.asarray(dts, dtype=float))
    y = np.log(np.asarray(drifts, dtype=float))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def differential_rank(
    algebra: GrassmannAlgebra,
    variables: list[Var],
    functions: list[SPoly],
    state: np.ndarray,
    tol: float = 1e-8,
) -> tuple[int, np.ndarray]:
    """Rank of the matrix whose rows are the differentials of ``functions`` at ``state``.

    A row lists every Grassmann coefficient of every partial derivative, so
    odd directions count through their expansion over the basis.  Rows are
    scaled to unit length (zero rows stay zero) and singular values below
    ``tol`` count as zero.
    """
    rows = []
    for f in functions:
        parts = [partial_left(f, v) for v in variables]
        comp = CompiledSystem(algebra, variables, parts)
        rows.append(comp(state).ravel())
    J = np.array(rows)
    norms = np.linalg.norm(J, axis=1)
    J = J / np.where(norms > 0, norms, 1.0)[:, None]
    sv = np.linalg.svd(J, compute_uv=False)
    return int((sv > tol).sum()), sv
