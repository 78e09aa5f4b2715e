import pytest
from hypothesis import given, settings, strategies as st

from kappa_forge.dsl import (Assign, Bin, Call, Complex, DslSyntaxError, DslTypeError, EvalError, FormType,
                             Name, NameCollision, Neg, Num, Session, Str, UnknownName, parse, parse_program,
                             to_jsonable, unparse)
from kappa_forge.errors import SupportOverflow
from kappa_forge.symbolic import T, X, equals_within, star_mul


@pytest.fixture
def session():
    return Session(1.0)


def one(session, src):
    (line,) = session.execute(src)
    return line


# -- spec examples ------------------------------------------------------------------

def test_commutator_prints_symbolic_kappa(session):
    assert one(session, "comm(t,x)") == "(i/κ)·x"
    assert one(Session(2.0), "comm(t, x)") == "(i/κ)·x"


def test_d_of_x(session):
    assert one(session, "d(x)") == "dx·1"


def test_trace_of_symbolic_element_is_type_error(session):
    with pytest.raises(DslTypeError) as exc:
        session.execute("trace(t)")
    assert exc.value.pos == (1, 1)
    assert isinstance(exc.value, TypeError)


# -- evaluation ----------------------------------------------------------------------

def test_star_is_the_star_product(session):
    (_, _, v), = session.run("t*x")
    assert equals_within(v, star_mul(T, X, 1.0), 1e-14)


def test_scalars_and_arithmetic(session):
    assert one(session, "(0,1)*t") == "i·t"
    assert one(session, "2*x - x") == "x"
    assert one(session, "eval(t*x, 2, 3)") == "(6+3i)"


def test_operators_and_words(session):
    assert one(session, "act(P*eps, t*x)") == "2i/κ + t"
    assert one(session, 'act(2*N, word("x"))') == "-2·t"
    assert one(session, 'act(N*P + E, word("tx"))') == "0"


def test_forms(session):
    assert one(session, "wedge(d(x), d(t))") == "dx^psi+·(-1/2) + dx^psi-·(-1/2)"
    (_, t, _), = session.run("d(gauss1)")
    assert t == FormType("grid", 1)


def test_assignments_and_grids(session):
    lines = session.execute("g = gauss1*gauss2\ntrace(g)")
    assert lines[0].startswith("g = SpectralGrid(")
    assert lines[1].startswith("(0.3787")
    val = session.run("trace(g)")[0][2]
    assert to_jsonable(val)["type"] == "scalar"


def test_fixture_overrides(session):
    (_, t, v), = session.run("bump(v0=1.0, w=0.5)")
    assert t == "grid" and v.values[v.spec.i0].max() == 0


def test_json_values(session):
    assert to_jsonable(session.run("t")[0][2])["type"] == "element"
    assert to_jsonable(session.run('word("tx")')[0][2])["type"] == "word"
    assert to_jsonable(session.run("P")[0][2]) == {"type": "op", "expr": "P"}


# -- diagnostics ---------------------------------------------------------------------

@pytest.mark.parametrize("src,exc,pos", [
    ("1 +", DslSyntaxError, (1, 4)),
    ("t ** x", DslSyntaxError, (1, 4)),
    ("t\n  x $ 2", DslSyntaxError, (2, 5)),
    ("f(a=1, 2)", DslSyntaxError, (1, 8)),
    ("(t, 2)", DslSyntaxError, (1, 2)),
    ("foo + t", UnknownName, (1, 1)),
    ("frob(t)", UnknownName, (1, 1)),
    ("t * gauss1", DslTypeError, (1, 3)),
    ("a = t\nb = a*x\nc = trace(b)", DslTypeError, (3, 5)),
    ("act(N, t)", DslTypeError, (1, 1)),
    ("gtrace(d(t))", DslTypeError, (1, 1)),
    ("gtrace(wedge(d(gauss1), d(gauss2)))", DslTypeError, (1, 1)),
    ("gauss1 + 1", DslTypeError, (1, 8)),
    ("wedge(d(x), d(t)) * d(x)", DslTypeError, (1, 19)),
    ("t = x", NameCollision, (1, 1)),
    ("comm(t)", DslTypeError, (1, 1)),
])
def test_diagnostics_carry_location(session, src, exc, pos):
    with pytest.raises(exc) as info:
        session.execute(src)
    assert info.value.pos == pos
    assert f"line {pos[0]}, column {pos[1]}" in str(info.value)


def test_name_collision_on_redefinition(session):
    session.execute("a = t")
    with pytest.raises(NameCollision):
        session.execute("a = x")
    with pytest.raises(NameCollision):
        session.execute("gauss1 = gauss2")


def test_numeric_errors_are_located(session):
    with pytest.raises(EvalError) as info:
        session.execute("\neta(0, 3, gauss1)")
    assert info.value.pos == (2, 1)
    assert isinstance(info.value.__cause__, SupportOverflow)


# -- parser round trip ---------------------------------------------------------------

SUITE_EXPRESSIONS = [
    "comm(t, x)", "d(x)", "t*x - x*t", "-(t + x)*t", "a = (0,-1.5)*t", "act(compose, x)",
    "adj(t*x) - x*t", "T(0.3, t*t)", "wedge(d(x), d(t*x))", "gtrace(wedge(wedge(d(g1), d(g2)), d(g3)))",
    "phi(gauss1, gauss2, gauss3, bump1)", "eval(t, 1e-3, 2.5E+2)", "bump(v0=1.0, w=0.5)",
    "t - (x - t)", "t / 2 / kappa", "-(-t)", "i/kappa*x", 'word("tx")',
]


@pytest.mark.parametrize("src", SUITE_EXPRESSIONS)
def test_round_trip_suite_expressions(src):
    node = parse(src)
    assert parse(unparse(node)) == node


names = st.sampled_from(["t", "x", "one", "i", "kappa", "gauss1", "g_2"])
nums = st.floats(0, 1e6, allow_nan=False, allow_infinity=False)
leaves = st.one_of(nums.map(Num), names.map(Name),
                   st.builds(Complex, st.floats(-10, 10), st.floats(-10, 10)),
                   st.text("abcxt", max_size=4).map(Str))


def _extend(children):
    return st.one_of(
        children.map(Neg),
        st.builds(Bin, st.sampled_from("+-*/"), children, children),
        st.builds(Call, st.sampled_from(["d", "comm", "T", "wedge", "bump"]),
                  st.lists(children, max_size=3).map(tuple),
                  st.lists(st.tuples(st.sampled_from(["v0", "w"]), children), max_size=2).map(tuple)),
    )


asts = st.recursive(leaves, _extend, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(asts)
def test_round_trip_generated_asts(node):
    assert parse(unparse(node)) == node
    stmt = Assign("y", node)
    assert parse_program(unparse(stmt) + "\n" + unparse(node)) == [stmt, node]
