from collections import Counter
from functools import cmp_to_key

import pytest
from hypothesis import given, strategies as st

from conftest import MAGMA_SIG, MIXED_SIG, ground_terms, terms
from herbrandkit.errors import OrderingError
from herbrandkit.ordering import (
    Comparison,
    OrderingConfig,
    Precedence,
    default_ordering,
    extend_ordering,
    find_orientation,
    format_ordering_text,
    is_reduction_orientation,
    parse_ordering_text,
    parse_weights,
    smallest_constant,
)
from herbrandkit.terms import MUL, App, Equation, Signature, Symbol, Var, apply_subst, ground_terms_up_to, replace_at
from herbrandkit.tptp import parse_equation, parse_term

x, y = Var("x"), Var("y")
a, b = App("a"), App("b")


def f(*args):
    return App("f", args)


# -- textbook oracles, written independently of the implementation ----------


def lpo_oracle(prec: list[str], s, t) -> bool:
    if isinstance(s, Var):
        return False
    if isinstance(t, Var):
        return t in _subterms(s) and s != t
    if any(si == t or lpo_oracle(prec, si, t) for si in s.args):
        return True
    if not all(lpo_oracle(prec, s, tj) for tj in t.args):
        return False
    if s.fn != t.fn:
        return prec.index(s.fn) < prec.index(t.fn)
    for si, ti in zip(s.args, t.args):
        if si != ti:
            return lpo_oracle(prec, si, ti)
    return False


def _subterms(t):
    yield t
    if isinstance(t, App):
        for a_ in t.args:
            yield from _subterms(a_)


def _symbols(t):
    return [u.fn if isinstance(u, App) else None for u in _subterms(t)]


def kbo_oracle(prec: list[str], weights: dict, s, t) -> bool:
    def weight(u):
        return sum(weights[n] if n is not None else 1 for n in _symbols(u))

    vs = Counter(u.name for u in _subterms(s) if isinstance(u, Var))
    vt = Counter(u.name for u in _subterms(t) if isinstance(u, Var))
    if any(vs[v] < n for v, n in vt.items()):
        return False
    if isinstance(s, Var):
        return False
    if isinstance(t, Var):
        return s != t
    ws, wt = weight(s), weight(t)
    if ws != wt:
        return ws > wt
    if s.fn != t.fn:
        return prec.index(s.fn) < prec.index(t.fn)
    for si, ti in zip(s.args, t.args):
        if si != ti:
            return kbo_oracle(prec, weights, si, ti)
    return False


MIXED_PREC = ["f", "g", "b", "a"]
MIXED_WEIGHTS = {"f": 1, "g": 2, "a": 1, "b": 3}
LPO = OrderingConfig.lpo(MIXED_PREC)
KBO = OrderingConfig.kbo_config(MIXED_PREC, MIXED_SIG, MIXED_WEIGHTS)
mixed_terms = terms(MIXED_SIG, ("x", "y", "z"), max_leaves=6)


# -- worked examples ----------------------------------------------------------


def test_lpo_worked_example():
    cfg = OrderingConfig.lpo("f > b > a")
    assert cfg.compare(f(f(b, a), a), f(f(a, b), a)) is Comparison.GREATER
    assert cfg.compare(f(f(a, b), a), f(a, f(a, b))) is Comparison.GREATER
    assert cfg.compare(f(x, y), f(y, x)) is Comparison.INCOMPARABLE
    assert cfg.compare(f(x, a), x) is Comparison.GREATER
    assert cfg.compare(x, x) is Comparison.EQUAL


def test_kbo_variable_condition_and_weights():
    cfg = OrderingConfig.kbo_config("f > b > a", MIXED_SIG)
    assert cfg.compare(f(x, y), x) is Comparison.GREATER
    # equal weight, variables balanced, decided by precedence of the heads
    assert cfg.compare(f(x, a), f(a, x)) is Comparison.INCOMPARABLE
    # f(x,g(y)) vs f(y,y): each side has a variable more often than the other
    s = f(x, App("g", (y,)))
    t = f(y, y)
    assert cfg.compare(s, t) is Comparison.INCOMPARABLE
    heavy = OrderingConfig.kbo_config("f > b > a", MIXED_SIG, {"b": 5})
    assert heavy.compare(b, f(a, a)) is Comparison.GREATER


def test_default_ordering_is_unit_kbo_reverse_declaration():
    cfg = default_ordering(MAGMA_SIG)
    assert cfg.kind == "kbo"
    assert cfg.precedence.order == ("*", "b", "a")
    assert set(cfg.kbo.weights.values()) == {1}
    assert smallest_constant(MAGMA_SIG, cfg) == a


def test_kbo_admissibility_rules():
    sig = Signature((Symbol("a", 0), Symbol("i", 1), Symbol("f", 2)))
    with pytest.raises(OrderingError):
        OrderingConfig.kbo_config("i > f > a", sig, {"a": 0})
    with pytest.raises(OrderingError):
        OrderingConfig.kbo_config("i > f > a", sig, {"f": 0})
    with pytest.raises(OrderingError):
        OrderingConfig.kbo_config("f > i > a", sig, {"i": 0})
    with pytest.raises(OrderingError):
        OrderingConfig.kbo_config("i > f > a", sig, variable_weight=0)
    ok = OrderingConfig.kbo_config("i > f > a", sig, {"i": 0})
    assert ok.compare(App("i", (x,)), x) is Comparison.GREATER


def test_precedence_parsing():
    assert Precedence.parse("* > f0>a").order == ("*", "f0", "a")
    assert Precedence.parse("mul > a").order == (MUL, "a")
    with pytest.raises(OrderingError):
        Precedence.parse("a > b > a")
    with pytest.raises(OrderingError):
        OrderingConfig("rpo", Precedence(("a",)))


def test_ordering_file_roundtrip():
    cfg = parse_ordering_text(
        "# comment\nkind = kbo\nprecedence = mul > b > a\nweights = mul:1, a:1, b:2\n", MAGMA_SIG
    )
    assert cfg.kbo.weights["*"] == 1 and cfg.kbo.weights["b"] == 2
    again = parse_ordering_text(format_ordering_text(cfg), MAGMA_SIG)
    assert again.precedence == cfg.precedence
    assert again.kbo.weights == cfg.kbo.weights
    lpo = parse_ordering_text("kind: lpo\nprecedence: f > a")
    assert lpo.kind == "lpo"
    with pytest.raises(OrderingError):
        parse_ordering_text("kind = lpo")
    with pytest.raises(OrderingError):
        parse_ordering_text("precedence = a\ncolour = red")
    with pytest.raises(OrderingError):
        parse_weights("a:x")


def test_extend_ordering_puts_new_symbols_at_the_bottom():
    cfg = OrderingConfig.kbo_config("* > b", Signature((Symbol("b", 0), Symbol("*", 2))), {"b": 2})
    ext = extend_ordering(cfg, MAGMA_SIG)
    assert ext.precedence.order == ("*", "b", "a")
    assert ext.kbo.weights["b"] == 2 and ext.kbo.weights["a"] == 1
    assert extend_ordering(ext, MAGMA_SIG) is ext


# -- orientation search ---------------------------------------------------------


def test_find_orientation_sat118(sat118_dump):
    rules = list(sat118_dump.equations)
    res = find_orientation(rules, "lpo")
    assert res.found
    assert is_reduction_orientation(res.config, rules)
    assert find_orientation(rules, "lpo").config.precedence == res.config.precedence
    witness = OrderingConfig.lpo("* > f0 > f1 > f4 > f3 > f2 > b > a")
    assert is_reduction_orientation(witness, rules)
    # some rule has a right side with more occurrences of a variable than its left
    def unbalanced(r):
        lc = Counter(u.name for u in _subterms(r.lhs) if isinstance(u, Var))
        rc = Counter(u.name for u in _subterms(r.rhs) if isinstance(u, Var))
        return any(rc[v] > lc[v] for v in rc)

    assert any(unbalanced(r) for r in rules)
    assert not find_orientation(rules, "kbo", budget=2000).found


def test_find_orientation_negative_and_trivial_cases():
    comm = [parse_equation("X*Y = Y*X")]
    assert not find_orientation(comm, "lpo").found
    assert not find_orientation(comm, "kbo", budget=5000).found
    assert not find_orientation([Equation(f(x, a), y)], "lpo").found
    assert not find_orientation([Equation(x, f(x, x))], "lpo").found
    res = find_orientation([Equation(App("g", (x,)), x)], "kbo")
    assert res.found
    with pytest.raises(OrderingError):
        find_orientation(comm, "rpo")


def test_find_orientation_large_signature_uses_constraints():
    # nine symbols: beyond exhaustive search
    names = [f"c{i}" for i in range(8)]
    rules = [Equation(App("h", (App(n, ()),)), App(m, ())) for n, m in zip(names, names[1:])]
    rules.append(Equation(App("h", (App("h", (x,)),)), App("h", (x,))))
    res = find_orientation(rules, "lpo")
    assert res.found and is_reduction_orientation(res.config, rules)


# -- exhaustive and property checks -------------------------------------------------


@pytest.mark.parametrize(
    "cfg",
    [
        OrderingConfig.lpo("* > b > a"),
        OrderingConfig.kbo_config("* > b > a", MAGMA_SIG),
        OrderingConfig.kbo_config("* > a > b", MAGMA_SIG, {"a": 2}),
    ],
    ids=["lpo", "kbo", "kbo-weighted"],
)
def test_ground_total_and_transitive_up_to_three_operations(cfg):
    universe = ground_terms_up_to(MAGMA_SIG, 3)
    cmp = {Comparison.LESS: -1, Comparison.EQUAL: 0, Comparison.GREATER: 1}
    ordered = sorted(universe, key=cmp_to_key(lambda s, t: cmp[cfg.compare(s, t)]))
    # every pair agrees with the sorted position: total, asymmetric and transitive
    for i, s in enumerate(ordered):
        for t in ordered[i + 1 :]:
            assert cfg.compare(s, t) is Comparison.LESS


@given(mixed_terms, mixed_terms)
def test_lpo_matches_textbook_definition(s, t):
    assert LPO.greater(s, t) == lpo_oracle(MIXED_PREC, s, t)


@given(mixed_terms, mixed_terms)
def test_kbo_matches_textbook_definition(s, t):
    assert KBO.greater(s, t) == kbo_oracle(MIXED_PREC, MIXED_WEIGHTS, s, t)


@given(
    st.sampled_from([LPO, KBO]),
    mixed_terms,
    mixed_terms,
    st.fixed_dictionaries({"x": ground_terms(MIXED_SIG, 4), "y": mixed_terms}),
)
def test_stable_under_substitution_and_context(cfg, s, t, sigma):
    if not cfg.greater(s, t):
        return
    assert cfg.greater(apply_subst(sigma, s), apply_subst(sigma, t))
    ctx = f(App("g", (Var("z"),)), a)
    for pos in [(0, 0), (1,)]:
        assert cfg.greater(replace_at(ctx, pos, s), replace_at(ctx, pos, t))


@given(st.sampled_from([LPO, KBO]), mixed_terms, mixed_terms)
def test_compare_is_antisymmetric(cfg, s, t):
    assert cfg.compare(s, t) is cfg.compare(t, s).flip()
    assert not (cfg.greater(s, t) and cfg.greater(t, s))


def test_subterm_property_on_parsed_terms():
    t = parse_term("f(g(X),f(a,Y))")
    for cfg in (LPO, KBO):
        for u in _subterms(t):
            if u != t:
                assert cfg.compare(t, u) is Comparison.GREATER
