from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from supergbk import reference as ref
from supergbk.hierarchy import (
    FIELDS,
    HierarchyConfig,
    apply_J,
    bihamiltonian_residual,
    bosonic,
    build_N,
    check_supertrace_identity,
    flow,
    generic_vector,
    is_total_derivative,
    pairing,
    recurse,
    recursion_residual,
    second_operator_residual,
    skew_residual,
    spectral_matrix,
    vacuum_value,
)
from supergbk.laxmatrix import SuperMatrix, zero_curvature_residual
from supergbk.superpoly import SPoly, const, jet, parity

k0 = const("k0")
v, w, a, b = jet("v"), jet("w"), jet("alpha"), jet("beta")


def zero(vec):
    return all(p.is_zero() for p in vec)


def test_config_validation():
    with pytest.raises(ValueError):
        HierarchyConfig(0)
    with pytest.raises(ValueError):
        HierarchyConfig(1, -1)
    with pytest.raises(ValueError):
        HierarchyConfig(1, 2, "affine")
    assert HierarchyConfig("3/2").k0 == Fraction(3, 2)


def test_first_rows():
    t = recurse(HierarchyConfig("k0", 2))
    assert t[0].as_dict() == {"a": k0, "b": SPoly(), "c": SPoly(), "rho": SPoly(), "delta": SPoly()}
    assert t[1].b == -k0
    assert t[1].c == k0 * w
    assert t[1].rho == -(k0 * a)
    assert t[1].delta == -(k0 * b)


@pytest.mark.parametrize("name", sorted(ref.COEFFICIENTS))
def test_coefficients_match_published_list(name):
    m = int(name[-1])
    row = recurse(HierarchyConfig("k0", 3))[m].as_dict()
    assert row[name[:-1]] == ref.coefficient(name)


def test_row_parities():
    for row in recurse(HierarchyConfig("k0", 4)).rows:
        for name, p in row.as_dict().items():
            if p.terms:
                assert parity(p) == ("odd" if name in ("rho", "delta") else "even"), name


@settings(max_examples=10, deadline=None)
@given(st.fractions(min_value=-4, max_value=4, max_denominator=5).filter(lambda x: x != 0))
def test_table_is_linear_in_seed(c):
    one = recurse(HierarchyConfig(1, 3)).rows
    scaled = recurse(HierarchyConfig(c, 3)).rows
    for r1, rc in zip(one, scaled):
        for key in ("a", "b", "c", "rho", "delta"):
            assert rc.as_dict()[key] == r1.as_dict()[key].scale(c)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
@pytest.mark.parametrize("seed", ["k0", 2])
def test_zero_curvature(n, seed):
    cfg = HierarchyConfig(seed, max(n, 1))
    assert zero_curvature_residual(spectral_matrix(), build_N(n, cfg), flow(n, cfg)).is_zero()


def test_lax_matrices_are_even():
    SuperMatrix(spectral_matrix().entries, even=True)
    SuperMatrix(build_N(3, HierarchyConfig("k0", 3)).entries, even=True)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_flow_parities(n):
    fl = flow(n, HierarchyConfig("k0", n))
    assert [parity(fl[f]) for f in FIELDS] == ["even", "even", "odd", "odd"]


def test_low_flows():
    assert all(p.is_zero() for p in flow(0, HierarchyConfig(1, 1)).values())
    fl = flow(1, HierarchyConfig(1, 1))
    assert all(fl[f] == -jet(f, 1) for f in FIELDS)


def test_bosonic_second_flow():
    fl = flow(2, HierarchyConfig(2, 2))
    assert bosonic(fl["v"]) == jet("v", 2) - (v * jet("v", 1)).scale(2) - jet("w", 1).scale(4)
    assert bosonic(fl["w"]) == -jet("w", 2) - (jet("w", 1) * v + w * jet("v", 1)).scale(2) - jet("v", 1).scale(2)


def test_vacuum_value():
    p = w * w + v * w + a * b + SPoly.constant(3) + k0 * w
    assert vacuum_value(p) == SPoly.constant(4) - k0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_supertrace_identity_vacuum_normalization(n):
    assert check_supertrace_identity(n, HierarchyConfig("k0", n + 1, "vacuum")).ok


def test_supertrace_identity_zero_table_leaves_constants():
    res = check_supertrace_identity(2, HierarchyConfig("k0", 3)).residuals
    assert res == (k0.scale(-2), SPoly(), SPoly(), SPoly())
    res3 = check_supertrace_identity(3, HierarchyConfig("k0", 4)).residuals
    assert res3 == (SPoly(), k0.scale(-4), (b * k0).scale(-4), (a * k0).scale(4))


def test_supertrace_identity_needs_right_derivatives():
    rep = check_supertrace_identity(1, HierarchyConfig("k0", 2, "vacuum"), side="left")
    assert not rep.ok
    assert rep.residuals[:2] == (SPoly(), SPoly())


@pytest.mark.parametrize("m", range(5))
def test_recursion_operator_steps_the_table(m):
    assert zero(recursion_residual(m, HierarchyConfig("k0", m + 1)))


def test_recursion_with_vacuum_table_off_by_constants():
    assert recursion_residual(1, HierarchyConfig("k0", 2, "vacuum"))[0] == -k0


@pytest.mark.parametrize("n", range(4))
@pytest.mark.parametrize("norm", ["zero", "vacuum"])
def test_bihamiltonian(n, norm):
    assert zero(bihamiltonian_residual(n, HierarchyConfig("k0", n + 1, norm)))


def test_first_operator_skew_adjoint():
    assert is_total_derivative(skew_residual())
    X, Y = generic_vector("X"), generic_vector("Y")
    # the ordering matters for odd components
    assert not is_total_derivative(pairing(X, apply_J(Y)) + pairing(apply_J(X), Y))


def test_displayed_second_operator_misses_flows():
    r = second_operator_residual(2, HierarchyConfig("k0", 3))
    assert r[0] == (a * jet("alpha", 2) * k0).scale(4)
    assert r[1] == (k0 * jet("v", 1) * w).scale(Fraction(-1, 2))
    assert zero(second_operator_residual(0, HierarchyConfig("k0", 1)))


def test_table_json_is_stable():
    cfg = HierarchyConfig(2, 3)
    assert recurse(cfg).to_json_obj() == recurse(cfg).to_json_obj()
    assert recurse(cfg).to_json_obj()["k0"] == "2"
