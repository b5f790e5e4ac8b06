import json
from fractions import Fraction

import pytest
from conftest import EVEN_VARS, ODD_VARS, polys
from hypothesis import given, settings
from hypothesis import strategies as st

from supergbk.superpoly import (
    NotExact,
    ParityMismatch,
    SPoly,
    Var,
    const,
    d_x,
    euler_variational,
    integrate_x,
    jet,
    parity,
    parse,
    partial_left,
    partial_right,
    substitute,
    var,
)

a, b = jet("alpha"), jet("beta")
v, w = jet("v"), jet("w")


def test_odd_square_vanishes():
    assert (a * a).is_zero()
    assert (jet("alpha", 1) * jet("alpha", 1)).is_zero()


def test_odd_swap_sign():
    assert a * b == -(b * a)
    assert (a * b + b * a).is_zero()


def test_even_commutes_with_odd():
    assert v * a == a * v


def test_coefficients_are_exact():
    p = v.scale(Fraction(1, 3)) + v.scale(Fraction(2, 3))
    assert p == v
    assert p.coefficient(((Var("v"), 1),)) == 1


def test_parity_classification():
    assert parity(v * w) == "even"
    assert parity(a * v) == "odd"
    assert parity(a * b) == "even"
    assert parity(v + a) == "mixed"
    assert parity(SPoly()) == "even"


@given(polys(), polys(), polys())
def test_associative(p, q, r):
    assert (p * q) * r == p * (q * r)


@given(polys(), polys(), polys())
def test_distributive(p, q, r):
    assert p * (q + r) == p * q + p * r


@given(polys("odd"), polys("odd"))
def test_odd_elements_anticommute(p, q):
    assert (p * q + q * p).is_zero()


@given(polys("even"), polys())
def test_even_elements_are_central(p, q):
    assert p * q == q * p


@given(polys("odd"))
def test_odd_element_squares_to_zero(p):
    assert (p * p).is_zero()


@given(polys(), polys())
def test_d_x_graded_leibniz(p, q):
    # d_x is even, so no sign appears
    assert d_x(p * q) == d_x(p) * q + p * d_x(q)


@given(polys())
def test_integrate_inverts_d_x(p):
    p = p - SPoly.constant(p.constant_part())
    assert integrate_x(d_x(p)) == p


def test_integrate_rejects_non_derivative():
    with pytest.raises(NotExact):
        integrate_x(v * w)
    with pytest.raises(NotExact):
        integrate_x(jet("v", 1) * jet("v", 1) * jet("v", 2) + v)


def test_integrate_mixed_parity():
    p = a * jet("beta", 1) + jet("alpha", 1) * b
    assert integrate_x(p) == a * b


def test_constants_are_x_independent():
    k = const("k0")
    assert d_x(k * v) == k * jet("v", 1)
    assert d_x(const("lam", 2)).is_zero()


def test_d_x_with_rules():
    phi = var("phi1", 1)
    rules = {("phi1", 1): v * phi}
    assert d_x(phi * phi, rules) == (v * phi * phi).scale(2)


def test_partial_left_sign():
    # d/d alpha of (beta alpha) = -beta when differentiating from the left
    assert partial_left(b * a, Var("alpha", 0, 0, True)) == -b
    assert partial_right(b * a, Var("alpha", 0, 0, True)) == b


@given(polys())
def test_partials_agree_on_even_variables(p):
    for x in EVEN_VARS:
        assert partial_left(p, x) == partial_right(p, x)


@given(polys())
def test_left_right_partials_differ_by_parity(p):
    # for odd x: d_left(m)/dx = (-1)^(|m|+1) d_right(m)/dx on homogeneous m
    for x in ODD_VARS:
        for mono, c in p.terms.items():
            m = SPoly({mono: c})
            sign = 1 if parity(m) == "odd" else -1
            assert partial_left(m, x) == partial_right(m, x).scale(sign)


def test_euler_of_total_derivative_vanishes():
    p = d_x(v * w * a * jet("beta", 1))
    for fam in ("v", "w", "alpha", "beta"):
        assert euler_variational(p, fam).is_zero()
        assert euler_variational(p, fam, side="left").is_zero()


def test_euler_simple():
    assert euler_variational(v * v * w, "v") == (v * w).scale(2)
    assert euler_variational(jet("v", 1) * jet("v", 1), "v") == jet("v", 2).scale(-2)
    with pytest.raises(ValueError):
        euler_variational(v, "v", side="middle")


def test_substitute_jets_follow():
    p = jet("v", 1) * a
    out = substitute(p, {("v", 0): w * w})
    assert out == (w * jet("w", 1) * a).scale(2)


def test_substitute_rejects_parity_change():
    with pytest.raises(ParityMismatch):
        substitute(a, {("alpha", 0): v})


@pytest.mark.parametrize(
    "text, expected",
    [
        ("1/2*v_x", jet("v", 1).scale(Fraction(1, 2))),
        ("alpha*beta", a * b),
        ("-(w + 1)**2", -(w + 1) * (w + 1)),
        ("D(v*w)", d_x(v * w)),
        ("k0*lam", const("k0") * const("lam")),
        ("beta_xx", jet("beta", 2)),
    ],
)
def test_parse(text, expected):
    assert parse(text) == expected


def test_parse_indexed_generators():
    p = parse("phi3[2]*psi1[2]", odd_families=("phi3",))
    assert parity(p) == "odd"
    with pytest.raises(ValueError):
        parse("v**-1")


@given(polys())
def test_json_round_trip(p):
    assert SPoly.from_json(p.to_json()) == p
    assert json.loads(p.to_json()) == json.loads(SPoly.from_json(p.to_json()).to_json())


@settings(max_examples=20)
@given(polys(), st.integers(0, 3))
def test_power_matches_repeated_product(p, n):
    q = SPoly.constant(1)
    for _ in range(n):
        q = q * p
    assert p**n == q


def test_str_and_latex_render():
    p = parse("-3 + 1/2*v_x - alpha*alpha_x + v*w_x")
    assert str(p) == "-3 + 1/2*v_x - α*α_x + v*w_x"
    assert r"\alpha" in p.latex()
