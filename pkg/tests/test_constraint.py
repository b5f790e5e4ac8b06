import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from supergbk import reference as ref
from supergbk.constraint import (
    H1,
    H2,
    EigenSystem,
    HamiltonFormMismatch,
    along,
    apply_constraint,
    assert_hamilton_form,
    eigen_residual,
    f_k_integrals,
    generating_integrals,
    grad_lambda,
    hamilton_mismatch,
    hamilton_rhs,
    nonlinearized_spatial,
    nonlinearized_temporal,
    poisson,
    source_flow,
    source_vector,
    temporal_consistency_residual,
)
from supergbk.hierarchy import FIELDS, HierarchyConfig, apply_J, flow
from supergbk.superpoly import SPoly, d_x, parity

ES1 = EigenSystem(1)
ES2 = EigenSystem(2)


def zero(vec):
    return all(p.is_zero() for p in vec)


def test_eigensystem_validation():
    with pytest.raises(ValueError):
        EigenSystem(-1)
    with pytest.raises(ValueError):
        EigenSystem(2, (1, 1))
    with pytest.raises(ValueError):
        EigenSystem(2, (1,))
    with pytest.raises(ValueError):
        ES1.lam_power(1, -1)


def test_generator_parities():
    gens = ES2.generators()
    assert len(gens) == 6 * 2 + 2
    odd = {v.family for v in gens if v.odd}
    assert odd == {"phi3", "psi3", "phiN", "psiN"}


def test_inner_products():
    es = EigenSystem(2, (3, 5))
    p = es.inner(1, 2, 2)
    assert p == es.g("psi1", 1) * es.g("phi2", 1) * 9 + es.g("psi1", 2) * es.g("phi2", 2) * 25


@pytest.mark.parametrize("es", [ES1, ES2, EigenSystem.numeric(3)])
def test_graded_pairing_is_conserved_by_the_spectral_problems(es):
    for f in f_k_integrals(es, "graded"):
        assert d_x(f, es.spectral_rules).is_zero()


def test_printed_pairing_is_not():
    assert not any(d_x(f, ES1.spectral_rules).is_zero() for f in f_k_integrals(ES1, "printed"))


def test_source_vector_and_terms():
    vec = source_vector(ES2)
    assert [parity(p) for p in vec] == ["even", "even", "odd", "odd"]
    comp = dict(zip(FIELDS, apply_J(vec)))
    pub = ref.sourced_terms(ES2)
    assert all(comp[f] == pub[f] for f in FIELDS)


def test_source_flow_without_sources_is_plain_flow():
    cfg = HierarchyConfig(2, 2)
    assert source_flow(EigenSystem(0), 2, cfg) == flow(2, cfg)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("numeric", [False, True])
def test_eigen_property(N, numeric):
    es = EigenSystem.numeric(N) if numeric else EigenSystem(N)
    for j in es.indices:
        assert zero(eigen_residual(es, j))


def test_displayed_gradient_fails_eigen_property():
    assert not zero(eigen_residual(ES1, 1, "left"))
    assert grad_lambda(ES1, 1, "left") == ref.grad_lambda_left(ES1, 1)
    with pytest.raises(ValueError):
        grad_lambda(ES1, 1, "up")


def test_gradient_parities():
    assert [parity(p) for p in grad_lambda(ES2, 2)] == ["even", "even", "odd", "odd"]


def test_constraint_rules():
    rules = apply_constraint(ES2)
    assert rules[("v", 0)] == ES2.inner(2, 1).scale(-2)
    assert rules[("alpha", 0)] == ES2.phiN
    assert parity(rules[("beta", 0)]) == "odd"


@pytest.mark.parametrize("es", [ES1, ES2])
def test_spatial_system_matches_display(es):
    rhs = nonlinearized_spatial(es).rhs
    pub = ref.spatial_system(es)
    assert set(rhs) == set(pub)
    assert all(rhs[k] == pub[k] for k in pub)


@pytest.mark.parametrize("es", [ES1, ES2])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_temporal_system_agrees_with_hierarchy(es, n):
    assert temporal_consistency_residual(es, n) == {}


@pytest.mark.parametrize("es", [ES1, ES2])
def test_integral_values(es):
    F = generating_integrals(es, 4)
    assert F[0] == SPoly.constant(1)
    assert F[1].is_zero()
    assert F[2] == SPoly.constant(-2)
    assert F[3] == -H1(es)
    assert F[4] == H2(es)
    assert F[3] != ref.F3(es)


@pytest.mark.parametrize("es", [ES1, ES2])
def test_graded_hamilton_forms(es):
    assert_hamilton_form(nonlinearized_spatial(es).rhs, H1(es), es, "graded")
    assert_hamilton_form(nonlinearized_temporal(es, 2).rhs, H2(es), es, "graded")
    F = generating_integrals(es, 6)
    for n in (3, 4):
        assert_hamilton_form(nonlinearized_temporal(es, n).rhs, F[n + 2], es, "graded")


def test_printed_hamilton_form_fails_in_the_extra_rows():
    bad = hamilton_mismatch(ref.spatial_system(ES2), H1(ES2), ES2, "printed")
    assert set(bad) == {("phiN", 0), ("psiN", 0)}
    with pytest.raises(HamiltonFormMismatch):
        assert_hamilton_form(ref.spatial_system(ES2), H1(ES2), ES2, "printed")
    bad2 = hamilton_mismatch(ref.temporal_system_n2(ES2), H2(ES2), ES2, "printed")
    assert {k[0] for k in bad2} == {"psi1"}


@pytest.mark.parametrize("conv", ["printed", "graded"])
def test_integrals_x_conserved(conv):
    rhs = nonlinearized_spatial(ES2).rhs
    for F in generating_integrals(ES2, 7):
        assert along(F, rhs).is_zero()
    fk_ok = [along(f, rhs).is_zero() for f in f_k_integrals(ES2, conv)]
    assert all(fk_ok) if conv == "graded" else not any(fk_ok)


def test_graded_involution():
    F = generating_integrals(ES2, 6)
    fk = f_k_integrals(ES2, "graded")
    for m in range(2, 7):
        for n in range(m + 1, 7):
            assert poisson(F[m], F[n], ES2, "graded").is_zero()
        for f in fk:
            assert poisson(F[m], f, ES2, "graded").is_zero()
    assert poisson(fk[0], fk[1], ES2, "graded").is_zero()


def test_printed_bracket_breaks_involution():
    F = generating_integrals(ES1, 4)
    assert not poisson(F[3], F[4], ES1, "printed").is_zero()
    assert poisson(F[2], F[3], ES1, "printed").is_zero()


def test_graded_bracket_is_derivative_along_hamiltonian_field():
    F = generating_integrals(ES1, 5)
    for m in (3, 4):
        for n in (3, 4, 5):
            assert poisson(F[m], F[n], ES1, "graded") == along(F[m], hamilton_rhs(F[n], ES1, "graded"))


_quadratics = st.lists(
    st.tuples(st.sampled_from(ES1.generators()), st.sampled_from(ES1.generators()), st.integers(-3, 3)),
    min_size=1,
    max_size=4,
)


def _even_poly(terms):
    out = SPoly()
    for x, y, c in terms:
        term = SPoly.from_var(x) * SPoly.from_var(y)
        if parity(term) == "even":
            out = out + term.scale(c)
    return out


@settings(max_examples=25, deadline=None)
@given(_quadratics, _quadratics)
def test_bracket_antisymmetric_on_even_functions(p, q):
    f, g = _even_poly(p), _even_poly(q)
    for conv in ("printed", "graded"):
        assert (poisson(f, g, ES1, conv) + poisson(g, f, ES1, conv)).is_zero()


@settings(max_examples=15, deadline=None)
@given(_quadratics, _quadratics, _quadratics)
def test_graded_bracket_leibniz(p, q, r):
    f, g, h = _even_poly(p), _even_poly(q), _even_poly(r)
    lhs = poisson(f, g * h, ES1, "graded")
    assert lhs == poisson(f, g, ES1, "graded") * h + g * poisson(f, h, ES1, "graded")


def test_unknown_convention():
    with pytest.raises(ValueError):
        poisson(SPoly(), SPoly(), ES1, "other")
