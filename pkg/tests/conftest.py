from fractions import Fraction

from hypothesis import strategies as st

from supergbk.superpoly import SPoly, Var

EVEN_VARS = [Var("v"), Var("v", 1), Var("w"), Var("w", 2), Var("phi1", 0, 1)]
ODD_VARS = [Var("alpha", 0, 0, True), Var("alpha", 1, 0, True), Var("beta", 0, 0, True), Var("psi3", 0, 2, True)]

coefficients = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def monomials(draw, parity=None):
    evens = draw(st.lists(st.sampled_from(EVEN_VARS), max_size=3))
    odds = draw(st.lists(st.sampled_from(ODD_VARS), max_size=3, unique=True))
    if parity == "even" and len(odds) % 2:
        odds = odds[:-1]
    elif parity == "odd" and len(odds) % 2 == 0:
        odds = odds[:-1] if odds else [draw(st.sampled_from(ODD_VARS))]
    # build through multiplication so the canonical sign is applied
    p = SPoly.constant(1)
    for v in draw(st.permutations(evens + odds)):
        p = p * SPoly.from_var(v)
    return p


@st.composite
def polys(draw, parity=None, max_terms=4):
    out = SPoly()
    for _ in range(draw(st.integers(0, max_terms))):
        out = out + draw(monomials(parity)).scale(draw(coefficients))
    return out


def odd_var(name="alpha", order=0):
    return SPoly.from_var(Var(name, order, 0, True))


HALF = Fraction(1, 2)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.EVALUATED:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
