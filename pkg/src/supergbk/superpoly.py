"""Exact supercommutative differential polynomials over Q.

A polynomial is a map from monomials to :class:`fractions.Fraction`
coefficients.  A monomial is a tuple of ``(Var, exponent)`` pairs sorted by
the variable key; odd variables always carry exponent 1, and their relative
order in the tuple *is* the canonical product order, so every reordering
performed while multiplying contributes a permutation sign.

Variables are jet coordinates ``Var(family, order, index, odd)``: ``order``
counts x-derivatives, ``index`` labels eigenfunction copies (0 for the
potentials).  Families listed in :data:`CONSTANT_FAMILIES` (``k0`` and the
eigenvalues ``lam``) are x-independent.
"""

from __future__ import annotations

import ast
import json
import re
from collections.abc import Iterable, Mapping
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Union

__all__ = [
    "Var",
    "SPoly",
    "NotExact",
    "ParityMismatch",
    "EVEN",
    "ODD",
    "MIXED",
    "CONSTANT_FAMILIES",
    "jet",
    "const",
    "var",
    "d_x",
    "integrate_x",
    "partial_left",
    "partial_right",
    "euler_variational",
    "parse",
    "substitute",
    "parity",
]

EVEN = "even"
ODD = "odd"
MIXED = "mixed"

CONSTANT_FAMILIES = frozenset({"k0", "lam", "gamma"})

Number = Union[int, Fraction]


class NotExact(ValueError):
    """Raised when a polynomial is not a total x-derivative."""


class ParityMismatch(ValueError):
    """Raised when a substitution would change the parity of a variable."""


class Var(NamedTuple):
    family: str
    order: int = 0
    index: int = 0
    odd: bool = False

    def raised(self, k: int = 1) -> "Var":
        return Var(self.family, self.order + k, self.index, self.odd)

    @property
    def base(self) -> tuple[str, int]:
        return (self.family, self.index)

    @property
    def is_const(self) -> bool:
        return self.family in CONSTANT_FAMILIES

    def __str__(self) -> str:
        name = _DISPLAY.get(self.family, self.family)
        if self.index:
            name = f"{name}[{self.index}]"
        if self.order == 0:
            return name
        if self.order <= 3:
            return f"{name}_{'x' * self.order}"
        return f"{name}_{self.order}x"


_DISPLAY = {"alpha": "α", "beta": "β", "lam": "λ"}

_LATEX = {
    "alpha": r"\alpha",
    "beta": r"\beta",
    "lam": r"\lambda",
    "k0": "k_0",
    "phi1": r"\phi_{1}",
    "phi2": r"\phi_{2}",
    "phi3": r"\phi_{3}",
    "psi1": r"\psi_{1}",
    "psi2": r"\psi_{2}",
    "psi3": r"\psi_{3}",
    "phiN": r"\phi_{N+1}",
    "psiN": r"\psi_{N+1}",
}

Monomial = tuple  # tuple[tuple[Var, int], ...]

ONE_MONO: Monomial = ()


def _mono_odd(m: Monomial) -> bool:
    return sum(1 for v, _ in m if v.odd) % 2 == 1


@lru_cache(maxsize=1 << 18)
def _mono_mul(a: Monomial, b: Monomial) -> tuple[int, Monomial]:
    """Product of two canonical monomials as ``(sign, monomial)``; sign 0 means zero."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    out = []
    i = j = 0
    swaps = 0
    # number of odd factors of ``a`` not yet emitted
    odd_left_a = sum(1 for v, _ in a if v.odd)
    while i < len(a) and j < len(b):
        va, ea = a[i]
        vb, eb = b[j]
        if va == vb:
            if va.odd:
                return 0, ONE_MONO
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            if va.odd:
                odd_left_a -= 1
            i += 1
        else:
            if vb.odd:
                swaps += odd_left_a
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return (-1 if swaps % 2 else 1), tuple(out)


def _as_fraction(c: Number) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class SPoly:
    """Immutable sparse polynomial in supercommuting variables."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None, *, _trusted: bool = False):
        if terms is None:
            self.terms: dict[Monomial, Fraction] = {}
        elif _trusted:
            self.terms = dict(terms)  # type: ignore[arg-type]
        else:
            self.terms = {m: _as_fraction(c) for m, c in terms.items() if c != 0}
        self._hash = None

    # construction ------------------------------------------------------
    @classmethod
    def constant(cls, c: Number) -> "SPoly":
        return cls({ONE_MONO: c})

    @classmethod
    def from_var(cls, v: Var, power: int = 1) -> "SPoly":
        if power == 0:
            return cls.constant(1)
        if v.odd and power > 1:
            return cls()
        return cls({((v, power),): 1})

    @classmethod
    def coerce(cls, x: "SPoly | Number") -> "SPoly":
        if isinstance(x, SPoly):
            return x
        return cls.constant(x)

    # arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = SPoly.coerce(other)
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for m, c in small.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return SPoly(out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return SPoly({m: -c for m, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        return self + (-SPoly.coerce(other))

    def __rsub__(self, other):
        return SPoly.coerce(other) - self

    def scale(self, c: Number) -> "SPoly":
        c = _as_fraction(c)
        if c == 0:
            return SPoly()
        return SPoly({m: k * c for m, k in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if not isinstance(other, SPoly):
            return self.scale(other)
        if not self.terms or not other.terms:
            return SPoly()
        out: dict[Monomial, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                sign, m = _mono_mul(ma, mb)
                if sign == 0:
                    continue
                c = ca * cb if sign > 0 else -(ca * cb)
                s = out.get(m, 0) + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return SPoly(out, _trusted=True)

    def __rmul__(self, other):
        # scalars are even, so left and right scaling agree
        return self.scale(other)

    def __truediv__(self, other: Number):
        return self.scale(1 / _as_fraction(other))

    def __pow__(self, n: int):
        out = SPoly.constant(1)
        for _ in range(n):
            out = out * self
        return out

    # comparison --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SPoly.constant(other)
        if not isinstance(other, SPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # inspection --------------------------------------------------------
    def variables(self) -> set[Var]:
        return {v for m in self.terms for v, _ in m}

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: (_degree(t[0]), t[0]))

    def constant_part(self) -> Fraction:
        return self.terms.get(ONE_MONO, Fraction(0))

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    def __repr__(self):
        return f"SPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        out = ""
        for i, (m, c) in enumerate(self.sorted_terms()):
            body = "*".join(str(v) if e == 1 else f"{v}^{e}" for v, e in m)
            mag = abs(c)
            if body:
                body = body if mag == 1 else f"{mag}*{body}"
            else:
                body = str(mag)
            if i == 0:
                out = body if c > 0 else f"-{body}"
            else:
                out += f" + {body}" if c > 0 else f" - {body}"
        return out

    def latex(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for m, c in self.sorted_terms():
            body = " ".join(_latex_var(v) + (f"^{{{e}}}" if e > 1 else "") for v, e in m)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not body:
                coef = _latex_frac(a)
            elif a == 1:
                coef = ""
            else:
                coef = _latex_frac(a) + " "
            out.append(f"{sign} {coef}{body}".rstrip())
        s = " ".join(out)
        return s[2:] if s.startswith("+ ") else s

    # serialization -----------------------------------------------------
    def to_json_obj(self) -> dict:
        terms = []
        for m, c in self.sorted_terms():
            terms.append(
                {
                    "coeff": f"{c.numerator}/{c.denominator}",
                    "vars": [
                        {"family": v.family, "order": v.order, "index": v.index, "odd": v.odd, "power": e}
                        for v, e in m
                    ],
                }
            )
        return {"terms": terms}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "SPoly":
        out = SPoly()
        for t in obj["terms"]:
            p = SPoly.constant(Fraction(t["coeff"]))
            for d in t["vars"]:
                p = p * SPoly.from_var(Var(d["family"], d["order"], d["index"], d["odd"]), d["power"])
            out = out + p
        return out

    @classmethod
    def from_json(cls, s: str) -> "SPoly":
        return cls.from_json_obj(json.loads(s))


def _degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _latex_frac(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return rf"\frac{{{c.numerator}}}{{{c.denominator}}}"


def _latex_var(v: Var) -> str:
    name = _LATEX.get(v.family, v.family)
    if v.index:
        if name.endswith("}") and "_{" in name:
            name = name[:-1] + f"{v.index}}}"
        else:
            name = f"{name}_{{{v.index}}}"
    if v.order == 0:
        return name
    sub = "x" * v.order if v.order <= 3 else f"{v.order}x"
    return rf"{{{name}}}_{{{sub}}}"


# ---------------------------------------------------------------------------
# constructors

FIELD_PARITY = {"v": False, "w": False, "alpha": True, "beta": True}


def jet(family: str, order: int = 0) -> SPoly:
    """Jet coordinate of one of the potentials ``v, w, alpha, beta``."""
    return SPoly.from_var(Var(family, order, 0, FIELD_PARITY[family]))


def const(family: str, index: int = 0) -> SPoly:
    """An x-independent even symbol such as ``k0`` or an eigenvalue ``lam[j]``."""
    if family not in CONSTANT_FAMILIES:
        raise ValueError(f"{family!r} is not a constant family")
    return SPoly.from_var(Var(family, 0, index, False))


def var(family: str, index: int = 0, odd: bool = False, order: int = 0) -> SPoly:
    return SPoly.from_var(Var(family, order, index, odd))


# ---------------------------------------------------------------------------
# parity


def parity(p: SPoly) -> str:
    """``EVEN``/``ODD`` for homogeneous polynomials, ``MIXED`` otherwise (zero is even)."""
    seen = {_mono_odd(m) for m in p.terms}
    if len(seen) > 1:
        return MIXED
    return ODD if seen == {True} else EVEN


# ---------------------------------------------------------------------------
# total derivative

DerivRules = Mapping[tuple[str, int], SPoly]


def _split(m: Monomial, pos: int) -> tuple[Monomial, Monomial]:
    return m[:pos], m[pos + 1 :]


def _mono_poly(m: Monomial, c: Fraction = Fraction(1)) -> SPoly:
    return SPoly({m: c}, _trusted=True) if c else SPoly()


def _dvar(v: Var, rules: DerivRules | None) -> SPoly:
    if v.is_const:
        return SPoly()
    if rules is not None and v.base in rules:
        if v.order != 0:
            raise ValueError(f"derivative rule for {v.base} cannot act on a jet of order {v.order}")
        return rules[v.base]
    return SPoly.from_var(v.raised())


def d_x(p: SPoly, rules: DerivRules | None = None) -> SPoly:
    """Total x-derivative.

    ``rules`` maps ``(family, index)`` to the x-derivative of that generator;
    families without a rule are treated as jets and get their order raised.
    """
    acc: dict[Monomial, Fraction] = {}
    for m, c in p.terms.items():
        for pos, (v, e) in enumerate(m):
            if v.is_const:
                continue
            if rules is None or v.base not in rules:
                # fast path: replace one copy of v by its raised jet
                rest = m[:pos] + ((v, e - 1),) + m[pos + 1 :] if e > 1 else m[:pos] + m[pos + 1 :]
                if v.odd:
                    left, right = m[:pos], m[pos + 1 :]
                    s1, t = _mono_mul(left, (((v.raised()), 1),))
                    s2, t = _mono_mul(t, right)
                    sign = s1 * s2
                    if sign == 0:
                        continue
                else:
                    sign, t = _mono_mul(rest, ((v.raised(), 1),))
                    if sign == 0:
                        continue
                coef = c * e if sign > 0 else -c * e
                s = acc.get(t, 0) + coef
                if s:
                    acc[t] = s
                else:
                    acc.pop(t, None)
                continue
            dv = _dvar(v, rules)
            if v.odd:
                left, right = _split(m, pos)
                term = _mono_poly(left, c) * dv * _mono_poly(right)
            else:
                rest = m[:pos] + ((v, e - 1),) + m[pos + 1 :] if e > 1 else m[:pos] + m[pos + 1 :]
                term = _mono_poly(rest, c * e) * dv
            for t, k in term.terms.items():
                s = acc.get(t, 0) + k
                if s:
                    acc[t] = s
                else:
                    acc.pop(t, None)
    return SPoly(acc, _trusted=True)


# ---------------------------------------------------------------------------
# antiderivative


def _jet_key(v: Var) -> tuple:
    return (v.order, v.family, v.index)


def _lead_key(m: Monomial) -> tuple:
    ks = []
    for v, e in m:
        if v.is_const:
            continue
        ks.extend([_jet_key(v)] * e)
    ks.sort(reverse=True)
    return tuple(ks)


def integrate_x(p: SPoly, max_steps: int = 100_000) -> SPoly:
    """Return ``q`` with ``d_x(q) == p`` and no constant term.

    Leading-term elimination: in the ranking that compares the multiset of
    jet variables from the highest derivative down, the leading term of
    ``d_x(m)`` is ``m`` with its top jet raised once, and distinct monomials
    have distinct leading terms.  So the leading term of an exact ``p`` must be
    linear in its top jet, which fixes one monomial of ``q`` at a time.

    Raises :class:`NotExact` if ``p`` is not a total derivative.
    """
    rem = p
    q_terms: dict[Monomial, Fraction] = {}
    steps = 0
    while rem.terms:
        steps += 1
        if steps > max_steps:
            raise NotExact("antiderivative search did not terminate")
        lead = max(rem.terms, key=_lead_key)
        c = rem.terms[lead]
        top = None
        for v, e in lead:
            if v.is_const:
                continue
            if top is None or _jet_key(v) > _jet_key(top[0]):
                top = (v, e)
        if top is None or top[0].order == 0 or top[1] != 1:
            raise NotExact(f"not a total derivative (leading term {_mono_poly(lead, c)})")
        tv = top[0]
        low = Var(tv.family, tv.order - 1, tv.index, tv.odd)
        # candidate monomial: replace the top jet by its antiderivative, keeping sign bookkeeping
        pos = next(i for i, (v, _) in enumerate(lead) if v == tv)
        left, right = lead[:pos], lead[pos + 1 :]
        cand = _mono_poly(left) * SPoly.from_var(low) * _mono_poly(right)
        if not cand.terms:
            raise NotExact(f"not a total derivative (leading term {_mono_poly(lead, c)})")
        ((nu, sgn),) = cand.terms.items()
        dnu = d_x(_mono_poly(nu, sgn))
        k = dnu.coefficient(lead)
        if k == 0:
            raise NotExact(f"not a total derivative (leading term {_mono_poly(lead, c)})")
        factor = c / k
        coef = sgn * factor
        q_terms[nu] = q_terms.get(nu, 0) + coef
        if q_terms[nu] == 0:
            del q_terms[nu]
        rem = rem - dnu.scale(factor)
    return SPoly(q_terms, _trusted=True)


# ---------------------------------------------------------------------------
# partial and variational derivatives


def partial_left(p: SPoly, x: Var) -> SPoly:
    """Left partial derivative with respect to the variable ``x``.

    For odd ``x`` the factor is first moved to the front of each monomial,
    picking up the sign of the transpositions.
    """
    out: dict[Monomial, Fraction] = {}
    for m, c in p.terms.items():
        for pos, (v, e) in enumerate(m):
            if v != x:
                continue
            if x.odd:
                n_before = sum(1 for u, _ in m[:pos] if u.odd)
                rest = m[:pos] + m[pos + 1 :]
                coef = -c if n_before % 2 else c
            else:
                rest = m[:pos] + ((v, e - 1),) + m[pos + 1 :] if e > 1 else m[:pos] + m[pos + 1 :]
                coef = c * e
            s = out.get(rest, 0) + coef
            if s:
                out[rest] = s
            else:
                out.pop(rest, None)
            break
    return SPoly(out, _trusted=True)


def partial_right(p: SPoly, x: Var) -> SPoly:
    """Right partial derivative: ``x`` is moved to the back of each monomial first.

    For an odd ``x`` this differs from :func:`partial_left` by ``(-1)^(p(q) + 1)``
    on each homogeneous piece ``q`` of ``p``.
    """
    if not x.odd:
        return partial_left(p, x)
    out: dict[Monomial, Fraction] = {}
    for m, c in p.terms.items():
        for pos, (v, _) in enumerate(m):
            if v != x:
                continue
            n_after = sum(1 for u, _ in m[pos + 1 :] if u.odd)
            rest = m[:pos] + m[pos + 1 :]
            coef = -c if n_after % 2 else c
            s = out.get(rest, 0) + coef
            if s:
                out[rest] = s
            else:
                out.pop(rest, None)
            break
    return SPoly(out, _trusted=True)


def euler_variational(p: SPoly, family: str, index: int = 0, side: str = "right") -> SPoly:
    """Variational derivative ``sum_k (-d_x)^k dp/du^(k)``.

    ``side`` picks right (default) or left partials; they differ only for odd
    fields.  Right derivatives are the ones for which the variational identity
    of the hierarchy holds with the gradient ``(a, -2b, -2delta, 2rho)``.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    partial = partial_right if side == "right" else partial_left
    orders = [v for v in p.variables() if v.family == family and v.index == index]
    if not orders:
        return SPoly()
    top = max(v.order for v in orders)
    proto = orders[0]
    out = SPoly()
    for k in range(top, -1, -1):
        # Horner form: out = dp/du^(k) - d_x(out)
        out = partial(p, Var(family, k, index, proto.odd)) - d_x(out)
    return out


# ---------------------------------------------------------------------------
# substitution


def substitute(
    p: SPoly,
    rules: Mapping[tuple[str, int], SPoly],
    deriv_rules: DerivRules | None = None,
    *,
    check_parity: bool = True,
) -> SPoly:
    """Homomorphic image of ``p`` under ``(family, index) -> SPoly`` rules.

    Jets of a substituted family are replaced by the corresponding total
    derivatives of the rule (computed with ``deriv_rules`` for the generators
    appearing in the replacement).  Odd variables must map to odd polynomials.
    """
    images: dict[Var, SPoly] = {}

    def image(v: Var) -> SPoly:
        if v in images:
            return images[v]
        if v.base not in rules:
            img = SPoly.from_var(v)
        elif v.order == 0:
            img = rules[v.base]
            if check_parity:
                par = parity(img)
                if img.terms and par != (ODD if v.odd else EVEN):
                    raise ParityMismatch(f"{v} is {'odd' if v.odd else 'even'} but its image is {par}")
        else:
            img = d_x(image(Var(v.family, v.order - 1, v.index, v.odd)), deriv_rules)
        images[v] = img
        return img

    out = SPoly()
    for m, c in p.terms.items():
        if all(v.base not in rules for v, _ in m):
            out = out + _mono_poly(m, c)
            continue
        term = SPoly.constant(c)
        for v, e in m:
            img = image(v)
            for _ in range(e):
                term = term * img
            if not term.terms:
                break
        out = out + term
    return out


# ---------------------------------------------------------------------------
# parsing

_JET_NAME = re.compile(r"^(v|w|alpha|beta)(?:_(x+))?$")


def parse(expr: str, odd_families: Iterable[str] = ()) -> SPoly:
    """Build an :class:`SPoly` from a Python-syntax expression.

    Names: ``v, w, alpha, beta`` with jet suffixes ``_x, _xx, ...``; the
    constants ``k0`` and ``lam``; ``fam[j]`` for an indexed generator, odd if
    ``fam`` is listed in ``odd_families``; ``D(e)`` for the total
    x-derivative.  Products keep their written order, which fixes the sign of
    odd factors.
    """
    odd = set(odd_families)
    tree = ast.parse(expr.replace("^", "**"), mode="eval")

    def ev(node) -> SPoly:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return SPoly.constant(node.value)
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return -ev(node.operand)
            if isinstance(node.op, ast.UAdd):
                return ev(node.operand)
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                    raise ValueError("exponents must be integer literals")
                return ev(node.left) ** node.right.value
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if right.variables() or not right.terms:
                    raise ValueError("can only divide by a nonzero number")
                return left.scale(1 / right.constant_part())
        if isinstance(node, ast.Name):
            if node.id in ("k0", "lam"):
                return const(node.id)
            m = _JET_NAME.match(node.id)
            if m:
                return jet(m.group(1), len(m.group(2) or ""))
            raise ValueError(f"unknown name {node.id!r}")
        if isinstance(node, ast.Subscript) and isinstance(node.value, ast.Name):
            idx = node.slice
            if not (isinstance(idx, ast.Constant) and isinstance(idx.value, int)):
                raise ValueError("generator index must be an integer literal")
            fam = node.value.id
            return var(fam, idx.value, odd=fam in odd)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "D":
            if len(node.args) != 1:
                raise ValueError("D takes one argument")
            return d_x(ev(node.args[0]))
        raise ValueError(f"unsupported syntax: {ast.dump(node)}")

    return ev(tree)
