import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from conftest import MAGMA_SIG, problem, terms
from herbrandkit.errors import FragmentError, SignatureError
from herbrandkit.model import (
    FRESH_CONSTANT,
    INCONCLUSIVE,
    REFUTED,
    VERIFIED,
    HerbrandModel,
    axiom_instance_failures,
    check_axiom,
    evaluate,
    holds,
    verify_countermodel,
)
from herbrandkit.ordering import OrderingConfig
from herbrandkit.rewriting import Mode, RewriteSystem, normal_form
from herbrandkit.terms import App, Equation, Signature, apply_subst, ground_terms_up_to, variables
from herbrandkit.tptp import parse_equation, parse_term

a, b = App("a"), App("b")


def test_evaluate_examples(sat118_system):
    comm = RewriteSystem((parse_equation("f(X,Y) = f(Y,X)"),), OrderingConfig.lpo("f > b > a"))
    t = parse_term("f(f(b,a),a)")
    assert evaluate(HerbrandModel(comm, Signature.from_terms([t])), t) == parse_term("f(a,f(a,b))")
    with pytest.raises(SignatureError):
        evaluate(HerbrandModel(comm), t)
    m = HerbrandModel(sat118_system)
    assert evaluate(m, a) == a
    assert evaluate(m, parse_term("((b*a)*b)*b")) == App("f4")
    with pytest.raises(SignatureError):
        evaluate(m, App("zz"))


def test_holds_examples(sat118_system):
    m = HerbrandModel(sat118_system)
    assert holds(m, parse_equation("b*((a*b)*b) = a"))
    assert holds(m, parse_equation("a*b = a*b"))
    assert not holds(m, parse_equation("a = ((b*a)*b)*b"))
    with pytest.raises(FragmentError):
        holds(m, parse_equation("X*a = a"))


def test_fresh_constant_when_signature_has_none():
    system = RewriteSystem((parse_equation("i(i(X)) = X"),), OrderingConfig.lpo("i"), Mode.ORIENTED)
    m = HerbrandModel(system)
    assert m.signature.constants()[0].name == FRESH_CONSTANT
    c0 = App(FRESH_CONSTANT)
    assert evaluate(m, App("i", (App("i", (c0,)),))) == c0
    assert len(m.universe(2)) == 3


def test_sat118_at_bound_one(sat118_system, p118):
    report = verify_countermodel(HerbrandModel.for_problem(sat118_system, p118), p118, bound=1)
    assert report.verdict == VERIFIED
    assert report.disequations[0]["lhs_normal_form"] == "a"
    assert report.disequations[0]["rhs_normal_form"] == "f4"
    assert report.axioms[0].instances == 80**2
    assert report.axiom_failures == 0
    data = json.loads(report.to_json())
    assert data["confluence"]["status"] == "confluent_certified"
    assert data["termination"]["terminating"]
    assert "verdict: verified_countermodel_at_bound" in report.summary()


def test_477_verified_at_bound_two(p477, p477_dump):
    system = RewriteSystem(p477_dump.equations, OrderingConfig.lpo("* > a"), Mode.ORIENTED)
    report = verify_countermodel(HerbrandModel.for_problem(system, p477), p477, bound=2)
    assert report.verdict == VERIFIED
    # one constant: 1 + 1 + 2 terms, two variables
    assert report.axioms[0].instances == 16
    assert report.disequations[0]["distinct"]


def test_refuted_and_inconclusive_verdicts():
    empty = RewriteSystem((), OrderingConfig.lpo("a"), Mode.ORIENTED)
    p = problem([], ["a = a"])
    assert verify_countermodel(HerbrandModel(empty), p).verdict == REFUTED
    # certified system that violates an axiom
    idem = RewriteSystem((parse_equation("X*X = X"),), OrderingConfig.lpo("* > b > a"), Mode.ORIENTED)
    report = verify_countermodel(HerbrandModel(idem), problem(["X*Y = Y*X"], ["a = b"]), bound=1)
    assert report.verdict == REFUTED
    assert report.axioms[0].failures
    # unorientable system: confluence cannot be certified
    comm = RewriteSystem((parse_equation("X*Y = Y*X"),), OrderingConfig.lpo("* > b > a"))
    report = verify_countermodel(HerbrandModel(comm), problem(["X*Y = Y*X"], ["a = b"]), bound=1)
    assert report.verdict == INCONCLUSIVE
    with pytest.raises(ValueError):
        verify_countermodel(HerbrandModel(comm), problem(["X*Y = Y*X"]), bound=-1)


def test_failure_witnesses_are_real():
    idem = RewriteSystem((parse_equation("X*X = X"),), OrderingConfig.lpo("* > b > a"), Mode.ORIENTED, MAGMA_SIG)
    comm = parse_equation("X*Y = Y*X")
    failures, count = axiom_instance_failures(idem, comm, 1, limit=3)
    assert count == 36 and len(failures) == 3
    for f in failures:
        sigma = {k: parse_term(v) for k, v in f["substitution"].items()}
        assert normal_form(idem, apply_subst(sigma, comm.lhs)) != normal_form(idem, apply_subst(sigma, comm.rhs))


SYSTEMS = [
    RewriteSystem((parse_equation("X*Y = Y*X"),), OrderingConfig.lpo("* > b > a"), signature=MAGMA_SIG),
    RewriteSystem((parse_equation("X*X = X"), parse_equation("(X*Y)*Z = X*(Y*Z)")), OrderingConfig.lpo("* > b > a"), signature=MAGMA_SIG),
    RewriteSystem((parse_equation("X*(Y*Z) = X*Z"),), OrderingConfig.lpo("* > b > a"), Mode.ORIENTED, MAGMA_SIG),
]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SYSTEMS), terms(MAGMA_SIG, ("x", "y"), 4), terms(MAGMA_SIG, ("x", "y"), 4))
def test_class_grouping_matches_naive_instances(system, lhs, rhs):
    axiom = Equation(lhs, rhs)
    universe = ground_terms_up_to(MAGMA_SIG, 2)
    names = variables(rhs, variables(lhs))
    failing = 0
    for values in itertools.product(universe, repeat=len(names)):
        sigma = dict(zip(names, values))
        if normal_form(system, apply_subst(sigma, lhs)) != normal_form(system, apply_subst(sigma, rhs)):
            failing += 1
    cov = check_axiom(system, axiom, universe)
    assert cov.instances == len(universe) ** len(names)
    assert bool(cov.failures) == bool(failing)
    assert failing <= cov.instances
