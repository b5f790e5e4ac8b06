import numpy as np
import pytest
from conftest import EVEN_VARS, ODD_VARS, polys
from hypothesis import given, settings
from hypothesis import strategies as st

from supergbk.constraint import EigenSystem, f_k_integrals, generating_integrals, nonlinearized_spatial
from supergbk.dynamics import (
    MAX_GENERATORS,
    AlgebraMismatch,
    CompiledSystem,
    GrassmannAlgebra,
    GrassmannNumber,
    NonFiniteState,
    UnassignedGenerator,
    differential_rank,
    evaluate,
    fit_order,
    integrate_ode,
    monitor,
    random_point,
)
from supergbk.superpoly import SPoly, Var

ALG = GrassmannAlgebra(4)


def element(draw, parity=None):
    coeffs = np.array(draw(st.lists(st.floats(-2, 2), min_size=ALG.size, max_size=ALG.size)))
    if parity == "even":
        coeffs[ALG.odd_masks] = 0.0
    elif parity == "odd":
        coeffs[ALG.even_masks] = 0.0
    return GrassmannNumber(ALG, coeffs)


@st.composite
def grassmann(draw, parity=None):
    return element(draw, parity)


def close(x, y):
    return np.allclose(x.coeffs, y.coeffs, atol=1e-9)


def test_generators_anticommute():
    e = [ALG.generator(i) for i in range(4)]
    for i in range(4):
        assert not (e[i] * e[i]).coeffs.any()
        for j in range(4):
            assert close(e[i] * e[j], -(e[j] * e[i])) or i == j


def test_top_form_sign():
    e = [ALG.generator(i) for i in range(4)]
    assert (e[0] * e[1] * e[2] * e[3]).coeffs[15] == 1.0
    assert (e[1] * e[0] * e[2] * e[3]).coeffs[15] == -1.0


@settings(max_examples=40, deadline=None)
@given(grassmann(), grassmann(), grassmann())
def test_associative(x, y, z):
    assert close((x * y) * z, x * (y * z))


@settings(max_examples=40, deadline=None)
@given(grassmann("odd"), grassmann("odd"), grassmann("even"))
def test_supercommutative(x, y, z):
    assert close(x * y, -(y * x))
    assert close(x * z, z * x)


@settings(max_examples=40, deadline=None)
@given(grassmann("odd"), grassmann("even"))
def test_parity_preserved_exactly(x, z):
    assert not (x * z).coeffs[ALG.even_masks].any()
    assert not (x * x).coeffs[ALG.odd_masks].any()
    assert (x * z).parity() in ("odd", "even")


def test_errors():
    with pytest.raises(ValueError):
        GrassmannAlgebra(MAX_GENERATORS + 1)
    with pytest.raises(AlgebraMismatch):
        ALG.scalar(1) + GrassmannAlgebra(3).scalar(1)
    with pytest.raises(IndexError):
        ALG.generator(4)
    with pytest.raises(UnassignedGenerator):
        CompiledSystem(ALG, [Var("v")], [SPoly.from_var(Var("w"))])


@st.composite
def phase_points(draw):
    point = {}
    for v in EVEN_VARS:
        point[v] = element(draw, "even")
    for v in ODD_VARS:
        point[v] = element(draw, "odd")
    return point


@settings(max_examples=30, deadline=None)
@given(polys(), polys(), phase_points())
def test_evaluation_is_a_homomorphism(p, q, point):
    assert close(evaluate(p * q, point), evaluate(p, point) * evaluate(q, point))
    assert close(evaluate(p + q, point), evaluate(p, point) + evaluate(q, point))


def test_evaluate_respects_canonical_order():
    a, b = ODD_VARS[0], ODD_VARS[2]
    point = {a: ALG.generator(0), b: ALG.generator(1)}
    ab = SPoly.from_var(a) * SPoly.from_var(b)
    assert close(evaluate(ab, point), ALG.generator(0) * ALG.generator(1))
    assert close(evaluate(-ab, point), ALG.generator(1) * ALG.generator(0))


def test_random_point_layout():
    es = EigenSystem.numeric(1)
    V = es.generators()
    x = random_point(ALG, V, seed=3)
    assert np.array_equal(x, random_point(ALG, V, seed=3))
    for row, v in zip(x, V):
        nonzero = np.flatnonzero(row)
        if v.odd:
            assert all(bin(m).count("1") == 1 for m in nonzero)
        else:
            assert list(nonzero) == [0]


def test_rk4_fourth_order_on_linear_growth():
    errs = []
    dts = [0.1, 0.05, 0.025]
    for dt in dts:
        out = integrate_ode(lambda s: s, np.array([[1.0]]), dt, 1.0)
        errs.append(abs(out[0, 0] - np.e))
    assert 3.8 < fit_order(dts, errs) < 4.2


def test_integrator_guards():
    with pytest.raises(ValueError):
        integrate_ode(lambda s: s, np.ones((1, 1)), 0.3, 1.0)
    with pytest.raises(ValueError):
        integrate_ode(lambda s: s, np.ones((1, 1)), -0.1, 1.0)
    with np.errstate(over="ignore"), pytest.raises(NonFiniteState):
        integrate_ode(lambda s: s**2, np.full((1, 1), 1e200), 0.1, 1.0)


def test_differential_rank_counts_dependence():
    x, y = Var("v"), Var("w")
    X, Y = SPoly.from_var(x), SPoly.from_var(y)
    state = np.array([[0.3, 0.0], [0.7, 0.0]])
    alg = GrassmannAlgebra(1)
    rank, _ = differential_rank(alg, [x, y], [X * Y, X + Y, X * Y * 2], state)
    assert rank == 2


def test_short_run_conserves_integrals():
    es = EigenSystem.numeric(1)
    V = es.generators()
    rhs = CompiledSystem(ALG, V, [nonlinearized_spatial(es).rhs[v.base] for v in V])
    F = generating_integrals(es, 4)
    inv = {"F2": F[2], "F3": F[3], "F4": F[4], "f1": f_k_integrals(es, "graded")[0]}
    rep = monitor(rhs, {k: CompiledSystem(ALG, V, [p]) for k, p in inv.items()}, random_point(ALG, V, 1), 0.01, 0.2)
    assert rep.drift["F2"] == 0.0
    assert rep.max_drift < 1e-8
