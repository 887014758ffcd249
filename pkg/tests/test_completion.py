import dataclasses

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from conftest import problem
from herbrandkit.completion import (
    Limits,
    Refuted,
    ReplayError,
    ResourceOut,
    Saturated,
    complete,
    replay,
    saturate_or_load,
    trace_json,
    trace_lines,
)
from herbrandkit.errors import CompletionError
from herbrandkit.etp import equation, implication_problem
from herbrandkit.finite import search_finite_model
from herbrandkit.model import axiom_instance_failures
from herbrandkit.ordering import OrderingConfig
from herbrandkit.rewriting import check_ground_confluence
from herbrandkit.terms import is_variant
from herbrandkit.tptp import parse_equation, parse_saturation


def test_commutativity_saturates_with_itself():
    p = problem(["X*Y = Y*X"])
    out = complete(p)
    assert isinstance(out, Saturated)
    assert len(out.system.equations) == 1
    assert is_variant(out.system.equations[0], p.axioms[0])
    assert out.statistics.generated == 0


def test_477_is_saturated_without_consequences(p477):
    out = complete(p477)
    assert isinstance(out, Saturated)
    assert out.statistics.generated == 0
    assert list(out.system.equations) == list(p477.axioms)


def test_constant_operation_refutes_commutativity():
    p = problem(["X*Y = U*W"], ["a*b = b*a"])
    out = complete(p, limits=Limits(max_steps=1000))
    assert isinstance(out, Refuted)
    assert out.statistics.selected <= 1000
    last = out.trace[-1]
    assert last.kind == "refutation"
    assert [str(l.after) for l in last.chain][-1] == "b*a"
    replay(out.trace, p)
    lines = trace_lines(out.trace)
    assert lines[-1].startswith("    ε | 1 |")
    assert '"kind": "refutation"' in trace_json(out.trace)


def test_group_axioms_complete_to_ten_rules():
    p = problem(["e*X = X", "i(X)*X = e", "(X*Y)*Z = X*(Y*Z)"])
    out = complete(p, OrderingConfig.lpo("i > * > e"))
    assert isinstance(out, Saturated)
    assert len(out.system.equations) == 10
    assert check_ground_confluence(out.system).certified
    expected = [parse_equation(s) for s in ("i(i(X)) = X", "i(X*Y) = i(Y)*i(X)", "X*i(X) = e", "i(e) = e")]
    for eq in expected:
        assert any(is_variant(eq, got) for got in out.system.equations)
    replay(out.trace, p)


def test_associativity_saturation_is_confluent():
    p = problem(["(X*Y)*Z = X*(Y*Z)"])
    out = complete(p)
    assert isinstance(out, Saturated)
    assert check_ground_confluence(out.system).certified
    assert all(e.lhs != e.rhs for e in out.system.equations)


def test_associative_commutative_runs_out():
    # ordered rewriting alone cannot delete the permuted AC consequences
    p = problem(["(X*Y)*Z = X*(Y*Z)", "X*Y = Y*X"])
    out = complete(p, limits=Limits(max_steps=60))
    assert isinstance(out, ResourceOut)
    assert "step" in out.reason
    out = complete(p, limits=Limits(max_term_size=9))
    assert isinstance(out, ResourceOut)


def test_replay_rejects_tampering():
    p = problem(["X*Y = U*W"], ["a*b = b*a"])
    out = complete(p)
    replay(out.trace, p)
    last = out.trace[-1]
    bad_link = dataclasses.replace(last.chain[0], after=last.chain[0].before)
    tampered = out.trace[:-1] + (dataclasses.replace(last, chain=(bad_link,) + last.chain[1:]),)
    with pytest.raises(ReplayError):
        replay(tampered, p)
    with pytest.raises(ReplayError):
        replay(out.trace, problem(["X*Y = Y*X"], ["a*b = b*a"]))
    with pytest.raises(ReplayError):
        replay(out.trace[1:], p)


def test_replay_accepts_saturation_traces():
    p = problem(["(X*Y)*Z = X*(Y*Z)"])
    out = complete(p)
    replay(out.trace, p)
    assert any(inf.kind == "critical_pair" for inf in out.trace)


def test_saturate_or_load(sat118_dump, p118):
    system = saturate_or_load(p118, sat118_dump)
    assert len(system.equations) == 16
    comm = problem(["X*Y = Y*X"])
    assert len(saturate_or_load(comm).equations) == 1
    with pytest.raises(CompletionError) as info:
        saturate_or_load(problem(["X*Y = U*W"], ["a*b = b*a"]))
    assert info.value.reason == "refuted"
    bogus = parse_saturation("cnf(r1, plain, mul(X,Y) = X).\n")
    with pytest.raises(CompletionError) as info:
        saturate_or_load(problem(["X*Y = Y*X"], ["a = b"]), bogus)
    assert info.value.reason == "unsound_dump"
    with pytest.raises(CompletionError) as info:
        saturate_or_load(problem(["(X*Y)*Z = X*(Y*Z)", "X*Y = Y*X"]), limits=Limits(max_steps=30))
    assert info.value.reason == "resource_out"


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(2, 60), st.integers(2, 60))
def test_outcomes_agree_with_finite_models(i, j):
    # a refutation is a proof, so no finite model may exist; a saturation must entail the axioms
    p = implication_problem(equation(i), equation(j))
    out = complete(p, limits=Limits(max_steps=150, max_equations=600, max_term_size=25))
    if isinstance(out, Refuted):
        replay(out.trace, p)
        for n in (1, 2):
            assert search_finite_model(p, n) is None
    elif isinstance(out, Saturated):
        replay(out.trace, p)
        assert all(e.lhs != e.rhs for e in out.system.equations)
        for ax in p.axioms:
            failures, _ = axiom_instance_failures(out.system, ax, 1, limit=1)
            assert not failures
