"""Supermatrices with entries in ``SPoly[lambda, lambda^-1]``.

The spectral parameter is a central even formal variable, so a Laurent
polynomial is simply a map from powers of lambda to :class:`SPoly`.
Matrices carry an ``(m|n)`` grading; the Lax matrices here are ``(2|1)``.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .superpoly import EVEN, MIXED, ODD, SPoly, Var, d_x, parity, partial_left, substitute

__all__ = [
    "LaurentPoly",
    "SuperMatrix",
    "DimensionMismatch",
    "GradingError",
    "mat_mul",
    "commutator",
    "supertrace",
    "supertranspose",
    "zero_curvature_residual",
    "sl21_basis",
]


class DimensionMismatch(ValueError):
    pass


class GradingError(ValueError):
    pass


class LaurentPoly:
    """Finite Laurent series ``sum_k coeffs[k] * lambda**k`` with SPoly coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[int, SPoly] | None = None):
        self.coeffs: dict[int, SPoly] = {}
        if coeffs:
            for k, c in coeffs.items():
                c = SPoly.coerce(c)
                if c.terms:
                    self.coeffs[k] = c

    @classmethod
    def const(cls, c) -> "LaurentPoly":
        return cls({0: SPoly.coerce(c)})

    @classmethod
    def lam(cls, power: int = 1, c=1) -> "LaurentPoly":
        return cls({power: SPoly.coerce(c)})

    @classmethod
    def coerce(cls, x) -> "LaurentPoly":
        if isinstance(x, LaurentPoly):
            return x
        return cls.const(x)

    def __add__(self, other):
        other = LaurentPoly.coerce(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-LaurentPoly.coerce(other))

    def __rsub__(self, other):
        return LaurentPoly.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, (LaurentPoly, SPoly)):
            return LaurentPoly({k: c.scale(other) for k, c in self.coeffs.items()})
        other = LaurentPoly.coerce(other)
        out: dict[int, SPoly] = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                p = a * b
                out[i + j] = out[i + j] + p if i + j in out else p
        return LaurentPoly(out)

    def __rmul__(self, other):
        if isinstance(other, SPoly):
            return LaurentPoly.coerce(other) * self
        return self * other

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            try:
                other = LaurentPoly.coerce(other)
            except Exception:
                return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, k: int) -> SPoly:
        return self.coeffs.get(k, SPoly())

    def powers(self) -> list[int]:
        return sorted(self.coeffs)

    def map(self, f: Callable[[SPoly], SPoly]) -> "LaurentPoly":
        return LaurentPoly({k: f(c) for k, c in self.coeffs.items()})

    def d_lambda(self) -> "LaurentPoly":
        return LaurentPoly({k - 1: c.scale(k) for k, c in self.coeffs.items() if k})

    def truncate(self, lo: int | None = None, hi: int | None = None) -> "LaurentPoly":
        return LaurentPoly(
            {k: c for k, c in self.coeffs.items() if (lo is None or k >= lo) and (hi is None or k <= hi)}
        )

    def evaluate(self, lam) -> SPoly:
        """Substitute lambda by an SPoly (e.g. a constant symbol); negative powers need a scalar."""
        out = SPoly()
        for k, c in self.coeffs.items():
            if k >= 0:
                out = out + c * (SPoly.coerce(lam) ** k)
            else:
                out = out + c.scale(Fraction(lam) ** k)
        return out

    def parity(self) -> str:
        pars = {parity(c) for c in self.coeffs.values()}
        if not pars:
            return EVEN
        return pars.pop() if len(pars) == 1 else MIXED

    def __repr__(self):
        return f"LaurentPoly({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs, reverse=True):
            c = self.coeffs[k]
            if k == 0:
                parts.append(f"({c})")
            else:
                parts.append(f"({c})*λ^{k}")
        return " + ".join(parts)

    def latex(self) -> str:
        if not self.coeffs:
            return "0"
        out = []
        for k in sorted(self.coeffs, reverse=True):
            c = self.coeffs[k].latex()
            if k == 0:
                out.append(c)
            else:
                lam = r"\lambda" if k == 1 else rf"\lambda^{{{k}}}"
                if c == "1":
                    out.append(lam)
                elif c == "-1":
                    out.append("-" + lam)
                else:
                    out.append(rf"\left({c}\right){lam}")
        s = " + ".join(out)
        return s.replace("+ -", "- ")

    def to_json_obj(self) -> dict:
        return {str(k): self.coeffs[k].to_json_obj() for k in sorted(self.coeffs)}

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "LaurentPoly":
        return cls({int(k): SPoly.from_json_obj(v) for k, v in obj.items()})


@dataclass(frozen=True)
class SuperMatrix:
    """Square matrix over Laurent polynomials with an ``(m|n)`` grading."""

    entries: tuple
    grading: tuple[int, int] = (2, 1)
    even: bool = field(default=False, compare=False)

    def __post_init__(self):
        rows = tuple(tuple(LaurentPoly.coerce(e) for e in row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        n = self.dim
        if any(len(r) != n for r in rows):
            raise DimensionMismatch("matrix must be square")
        if sum(self.grading) != n:
            raise DimensionMismatch(f"grading {self.grading} does not match size {n}")
        if self.even:
            self.check_even()

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], grading=(2, 1), even: bool = False) -> "SuperMatrix":
        return cls(tuple(tuple(r) for r in rows), grading, even)

    @classmethod
    def zero(cls, n: int = 3, grading=(2, 1)) -> "SuperMatrix":
        return cls(tuple(tuple(LaurentPoly() for _ in range(n)) for _ in range(n)), grading)

    @classmethod
    def identity(cls, n: int = 3, grading=(2, 1)) -> "SuperMatrix":
        return cls(
            tuple(tuple(LaurentPoly.const(1) if i == j else LaurentPoly() for j in range(n)) for i in range(n)),
            grading,
        )

    @property
    def dim(self) -> int:
        return len(self.entries)

    def is_odd_index(self, i: int) -> bool:
        return i >= self.grading[0]

    def check_even(self) -> None:
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                want = ODD if self.is_odd_index(i) != self.is_odd_index(j) else EVEN
                got = e.parity()
                if not e.is_zero() and got != want:
                    raise GradingError(f"entry ({i + 1},{j + 1}) has parity {got}, expected {want}")

    def __getitem__(self, ij: tuple[int, int]) -> LaurentPoly:
        i, j = ij
        return self.entries[i][j]

    def map(self, f: Callable[[LaurentPoly], LaurentPoly]) -> "SuperMatrix":
        return SuperMatrix(tuple(tuple(f(e) for e in row) for row in self.entries), self.grading)

    def map_coeffs(self, f: Callable[[SPoly], SPoly]) -> "SuperMatrix":
        return self.map(lambda e: e.map(f))

    def __add__(self, other: "SuperMatrix") -> "SuperMatrix":
        _check_dims(self, other)
        return SuperMatrix(
            tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.entries, other.entries)), self.grading
        )

    def __neg__(self):
        return self.map(lambda e: -e)

    def __sub__(self, other: "SuperMatrix") -> "SuperMatrix":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, SuperMatrix):
            return mat_mul(self, other)
        return self.map(lambda e: e * other)

    def __rmul__(self, other):
        return self.map(lambda e: other * e)

    def __eq__(self, other):
        if not isinstance(other, SuperMatrix):
            return NotImplemented
        return self.grading == other.grading and self.entries == other.entries

    def __hash__(self):
        return hash((self.entries, self.grading))

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def d_x(self, rules=None) -> "SuperMatrix":
        return self.map_coeffs(lambda c: d_x(c, rules))

    def d_lambda(self) -> "SuperMatrix":
        return self.map(lambda e: e.d_lambda())

    def partial(self, x: Var) -> "SuperMatrix":
        return self.map_coeffs(lambda c: partial_left(c, x))

    def substitute(self, rules, deriv_rules=None) -> "SuperMatrix":
        return self.map_coeffs(lambda c: substitute(c, rules, deriv_rules))

    def coefficient(self, k: int) -> "SuperMatrix":
        """Matrix of ``lambda**k`` coefficients."""
        return self.map(lambda e: LaurentPoly({0: e[k]}))

    def powers(self) -> list[int]:
        return sorted({k for row in self.entries for e in row for k in e.coeffs})

    def __str__(self):
        return "\n".join("[" + ", ".join(str(e) for e in row) + "]" for row in self.entries)

    def latex(self) -> str:
        cols = "c" * self.dim
        body = " \\\\\n".join(" & ".join(e.latex() for e in row) for row in self.entries)
        return f"\\left(\\begin{{array}}{{{cols}}}\n{body}\n\\end{{array}}\\right)"

    def to_json_obj(self) -> dict:
        return {
            "grading": list(self.grading),
            "entries": [[e.to_json_obj() for e in row] for row in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "SuperMatrix":
        return cls(
            tuple(tuple(LaurentPoly.from_json_obj(e) for e in row) for row in obj["entries"]),
            tuple(obj["grading"]),
        )

    @classmethod
    def from_json(cls, s: str) -> "SuperMatrix":
        return cls.from_json_obj(json.loads(s))


def _check_dims(a: SuperMatrix, b: SuperMatrix) -> None:
    if a.dim != b.dim or a.grading != b.grading:
        raise DimensionMismatch(f"{a.dim}x{a.dim}{a.grading} vs {b.dim}x{b.dim}{b.grading}")


def mat_mul(a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    """Row-by-column product; entry products use the supercommutative ring."""
    _check_dims(a, b)
    n = a.dim
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = LaurentPoly()
            for k in range(n):
                x, y = a.entries[i][k], b.entries[k][j]
                if x.coeffs and y.coeffs:
                    acc = acc + x * y
            row.append(acc)
        rows.append(tuple(row))
    return SuperMatrix(tuple(rows), a.grading)


def commutator(a: SuperMatrix, b: SuperMatrix) -> SuperMatrix:
    return mat_mul(a, b) - mat_mul(b, a)


def supertrace(a: SuperMatrix) -> LaurentPoly:
    """Even-block diagonal minus odd-block diagonal."""
    out = LaurentPoly()
    for i in range(a.dim):
        out = out - a.entries[i][i] if a.is_odd_index(i) else out + a.entries[i][i]
    return out


def supertranspose(a: SuperMatrix) -> SuperMatrix:
    """``[[A, B], [C, D]] -> [[A^T, -C^T], [B^T, D^T]]`` in block form."""
    n = a.dim
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            e = a.entries[j][i]
            # entry (i, j) of the result comes from (j, i); the upper-right block becomes -C^T
            if not a.is_odd_index(i) and a.is_odd_index(j):
                e = -e
            row.append(e)
        rows.append(tuple(row))
    return SuperMatrix(tuple(rows), a.grading)


def zero_curvature_residual(
    U: SuperMatrix,
    Nn: SuperMatrix,
    flow: Mapping[str, SPoly],
    deriv_rules=None,
) -> SuperMatrix:
    """``U_t - (Nn)_x + [U, Nn]`` with ``U_t`` obtained from the field flow by the chain rule."""
    Ut = U.map_coeffs(lambda c: time_derivative(c, flow))
    return Ut - Nn.d_x(deriv_rules) + commutator(U, Nn)


def time_derivative(p: SPoly, flow: Mapping[str, SPoly]) -> SPoly:
    """``D_t p`` where ``flow[f]`` is ``f_t`` for each potential family ``f``.

    Jets ``f^(k)`` evolve by ``d_x^k flow[f]``; derivatives act from the left
    position of each factor, so no Koszul sign arises (``D_t`` is even).
    """
    from .superpoly import _mono_poly  # local helper reuse

    cache: dict[Var, SPoly] = {}

    def dt(v: Var) -> SPoly:
        if v in cache:
            return cache[v]
        if v.family not in flow or v.is_const:
            r = SPoly()
        elif v.order == 0:
            r = flow[v.family]
        else:
            r = d_x(dt(Var(v.family, v.order - 1, v.index, v.odd)))
        cache[v] = r
        return r

    out = SPoly()
    for m, c in p.terms.items():
        for pos, (v, e) in enumerate(m):
            dv = dt(v)
            if not dv.terms:
                continue
            if v.odd:
                term = _mono_poly(m[:pos], c) * dv * _mono_poly(m[pos + 1 :])
            else:
                rest = m[:pos] + ((v, e - 1),) + m[pos + 1 :] if e > 1 else m[:pos] + m[pos + 1 :]
                term = _mono_poly(rest, c * e) * dv
            out = out + term
    return out


def sl21_basis() -> dict[str, SuperMatrix]:
    """The five generators e1..e5 of sl(2,1) used for the Lax matrices."""

    def mk(entries: dict[tuple[int, int], int]) -> SuperMatrix:
        rows = [[LaurentPoly() for _ in range(3)] for _ in range(3)]
        for (i, j), c in entries.items():
            rows[i][j] = LaurentPoly.const(c)
        return SuperMatrix.from_rows(rows)

    return {
        "e1": mk({(0, 0): 1, (1, 1): -1}),
        "e2": mk({(1, 0): 1}),
        "e3": mk({(0, 1): 1}),
        "e4": mk({(0, 2): 1, (2, 1): -1}),
        "e5": mk({(1, 2): 1, (2, 0): 1}),
    }
