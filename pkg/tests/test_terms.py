import math

import pytest
from hypothesis import given, strategies as st

from conftest import MAGMA_SIG, MIXED_SIG, ground_terms, terms
from herbrandkit.errors import PositionError, SignatureError
from herbrandkit.terms import (
    App,
    Equation,
    Signature,
    Symbol,
    Var,
    apply_subst,
    canonical_names,
    compile_builder,
    compile_matcher,
    compose,
    format_position,
    format_term,
    ground_terms_up_to,
    is_ground,
    is_variant,
    match_term,
    mul,
    normalize_equation,
    normalize_variables,
    operation_count,
    replace_at,
    subterm_at,
    subterm_positions,
    unify,
    variables,
)
from herbrandkit.tptp import parse_term

x, y, z = Var("x"), Var("y"), Var("z")
a, b = App("a"), App("b")


def f(*args):
    return App("f", args)


def test_format_infix_and_prefix():
    assert format_term(mul(mul(mul(b, a), b), b)) == "((b*a)*b)*b"
    assert format_term(f(mul(x, y), y)) == "f(x*y,y)"
    assert format_term(a) == "a"


def test_positions_preorder_and_root_symbol():
    t = f(f(b, a), a)
    assert [p for p, _ in subterm_positions(t)] == [(), (0,), (0, 0), (0, 1), (1,)]
    assert format_position(()) == "ε"
    assert format_position((0, 1)) == "0.1"
    assert subterm_at(t, (0, 1)) == a
    assert replace_at(t, (0,), b) == f(b, a)
    with pytest.raises(PositionError):
        subterm_at(t, (2,))
    with pytest.raises(PositionError):
        replace_at(a, (0,), b)


def test_variables_first_occurrence_order():
    assert variables(f(y, f(x, y))) == ["y", "x"]
    assert Equation(f(y, x), f(z, y)).variables() == ["y", "x", "z"]


def test_unify_occurs_check_and_mgu():
    assert unify(x, f(x, a)) is None
    s = unify(f(x, f(y, a)), f(f(b, b), z))
    assert apply_subst(s, f(x, f(y, a))) == apply_subst(s, f(f(b, b), z))
    assert unify(f(x, a), f(b, b)) is None
    # idempotent
    s = unify(f(x, y), f(y, f(z, z)))
    assert all(apply_subst(s, t) == t for t in s.values())


def test_match_is_one_sided():
    assert match_term(f(x, x), f(a, a)) == {"x": a}
    assert match_term(f(x, x), f(a, b)) is None
    assert match_term(f(a, x), f(y, b)) is None


def test_normalize_and_variant():
    eq = normalize_equation(Equation(f(Var("Q"), Var("P")), Var("P")))
    assert eq == Equation(f(x, y), y)
    assert is_variant(Equation(f(x, y), x), Equation(z, f(z, y)))
    assert not is_variant(Equation(f(x, y), x), Equation(f(x, y), y))
    assert canonical_names(8) == ["x", "y", "z", "w", "u", "v", "x6", "x7"]


def test_signature_rejects_arity_clash():
    with pytest.raises(SignatureError):
        Signature.from_terms([f(a, b), App("f", (a,))])
    with pytest.raises(SignatureError):
        Signature((Symbol("a", 0), Symbol("a", 0)))
    sig = Signature.from_terms([f(a, b)])
    assert sig.names == ["f", "a", "b"]
    with pytest.raises(SignatureError):
        sig.check(App("g", (a,)))


def test_ground_universe_counts():
    # with c constants and one binary symbol, layer k has Catalan(k) * c^(k+1) terms
    terms_ = ground_terms_up_to(MAGMA_SIG, 4)
    catalan = [math.comb(2 * k, k) // (k + 1) for k in range(5)]
    assert len(terms_) == sum(catalan[k] * 2 ** (k + 1) for k in range(5))
    assert len(set(terms_)) == len(terms_)
    assert all(operation_count(t) <= 4 for t in terms_)
    assert [operation_count(t) for t in terms_] == sorted(operation_count(t) for t in terms_)
    assert terms_[:3] == [a, b, mul(a, a)]
    with pytest.raises(SignatureError):
        ground_terms_up_to(Signature((Symbol("f", 2),)), 1)


def test_ground_universe_mixed_arities():
    # a, b; g(a), g(b), f(a,a).. f(b,b): 2 + 2 + 4
    assert len(ground_terms_up_to(MIXED_SIG, 1)) == 8


@given(terms(MIXED_SIG, ("x", "y", "z")), terms(MIXED_SIG, ("x", "y")))
def test_unifier_unifies(s, t):
    sigma = unify(s, t)
    if sigma is not None:
        assert apply_subst(sigma, s) == apply_subst(sigma, t)


@given(terms(MIXED_SIG, ("x", "y", "z")), st.dictionaries(st.sampled_from("xyz"), ground_terms(MIXED_SIG, 4)))
def test_match_recovers_substitution(pattern, sigma):
    inst = apply_subst(sigma, pattern)
    found = match_term(pattern, inst)
    assert found is not None
    assert apply_subst(found, pattern) == inst
    assert compile_matcher(pattern)(inst) == found


@given(terms(MIXED_SIG, ("x", "y")), st.fixed_dictionaries({"x": ground_terms(MIXED_SIG, 3), "y": ground_terms(MIXED_SIG, 3)}))
def test_compiled_builder_agrees(t, sigma):
    assert compile_builder(t)(sigma) == apply_subst(sigma, t)


@given(terms(MIXED_SIG, ("x", "y")), terms(MIXED_SIG, ("x", "y")))
def test_compiled_matcher_agrees(pattern, subject):
    assert compile_matcher(pattern)(subject) == match_term(pattern, subject)


@given(terms(MIXED_SIG, ("x", "y", "z")))
def test_compose_is_sequential_application(t):
    s1 = {"x": f(y, a)}
    s2 = {"y": b, "z": x}
    assert apply_subst(compose(s1, s2), t) == apply_subst(s2, apply_subst(s1, t))


@given(terms(MIXED_SIG, ("x", "y", "z")))
def test_positions_roundtrip(t):
    for p, s in subterm_positions(t):
        assert subterm_at(t, p) == s
        assert replace_at(t, p, s) == t
    assert len(subterm_positions(t)) == t.size


@given(terms(MIXED_SIG, ("x", "y", "z")))
def test_format_parse_roundtrip(t):
    upper = apply_subst({v: Var(v.upper()) for v in variables(t)}, t)
    text = format_term(upper)
    parsed = parse_term(text)
    assert normalize_variables(parsed) == normalize_variables(t)
    assert is_ground(parsed) == is_ground(t)
