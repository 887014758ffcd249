import itertools
from pathlib import Path

import pytest
from hypothesis import strategies as st

from herbrandkit.completion import oriented_system
from herbrandkit.terms import App, Signature, Symbol, Var
from herbrandkit.tptp import Problem, parse_equation, parse_problem, parse_saturation

DATA = Path(__file__).parent / "data"


def problem(axioms=(), disequations=()):
    return Problem.build([parse_equation(a) for a in axioms], [parse_equation(d) for d in disequations])


@pytest.fixture(scope="session")
def sat118_dump():
    return parse_saturation((DATA / "p118_saturation.p").read_text())


@pytest.fixture(scope="session")
def p118():
    return parse_problem((DATA / "p118_274.p").read_text())


@pytest.fixture(scope="session")
def p477():
    return parse_problem((DATA / "p477_1426.p").read_text())


@pytest.fixture(scope="session")
def p477_dump():
    return parse_saturation((DATA / "p477_saturation.p").read_text())


@pytest.fixture(scope="session")
def sat118_system(sat118_dump, p118):
    sig = p118.signature.merge(sat118_dump.signature)
    return oriented_system(sat118_dump.equations, sig)


# -- hypothesis strategies ---------------------------------------------------

MAGMA_SIG = Signature((Symbol("a", 0), Symbol("b", 0), Symbol("*", 2)))
MIXED_SIG = Signature((Symbol("a", 0), Symbol("b", 0), Symbol("g", 1), Symbol("f", 2)))


def terms(sig: Signature, variables=(), max_leaves: int = 8):
    leaves = [st.just(App(c.name, ())) for c in sig.constants()]
    leaves += [st.just(Var(v)) for v in variables]

    def extend(children):
        options = [
            st.tuples(*[children] * s.arity).map(lambda args, n=s.name: App(n, args))
            for s in sig.functions()
        ]
        return st.one_of(options)

    return st.recursive(st.one_of(leaves), extend, max_leaves=max_leaves)


def ground_terms(sig: Signature = MAGMA_SIG, max_leaves: int = 8):
    return terms(sig, (), max_leaves)


# -- naive finite-model oracle ------------------------------------------------


def naive_models(p: Problem, n: int):
    """Every interpretation in cell order with the first constant at 0."""
    syms = p.signature.constants() + p.signature.functions()
    cells = [(s.name, args) for s in syms for args in itertools.product(range(n), repeat=s.arity)]
    for values in itertools.product(range(n), repeat=len(cells)):
        if p.signature.constants() and values[0] != 0:
            continue
        table = dict(zip(cells, values))

        def ev(t, env):
            if isinstance(t, Var):
                return env[t.name]
            return table[(t.fn, tuple(ev(a, env) for a in t.args))]

        ok = all(
            ev(ax.lhs, env) == ev(ax.rhs, env)
            for ax in p.axioms
            for env in (dict(zip(ax.variables(), vs)) for vs in itertools.product(range(n), repeat=len(ax.variables())))
        ) and all(ev(d.lhs, {}) != ev(d.rhs, {}) for d in p.disequations)
        if ok:
            yield values
