"""The Herbrand model induced by a saturated equation set.

Its domain is the ground terms of the signature; two terms denote the same
element when their normal forms coincide.  Countermodel verification checks
the disequations exactly and the axioms on every grounding substitution
into a bounded slice of the universe.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

from .errors import FragmentError
from .ordering import extend_ordering
from .rewriting import (
    ConfluenceReport,
    RewriteSystem,
    check_ground_confluence,
    check_preordered,
    normal_form,
)
from .terms import (
    App,
    Equation,
    Signature,
    Symbol,
    Term,
    apply_subst,
    format_term,
    Var,
    ground_terms_up_to,
    is_ground,
)
from .tptp import Problem

FRESH_CONSTANT = "c0"

VERIFIED = "verified_countermodel_at_bound"
REFUTED = "refuted_model"
INCONCLUSIVE = "inconclusive"


class HerbrandModel:
    """Ground terms modulo normal-form equality under ``system``.

    ``signature`` may add symbols the system does not mention (for instance
    the Skolem constants of a goal); they are placed at the bottom of the
    precedence.  A signature without constants gets the fresh constant
    ``c0`` so that the universe is not empty.
    """

    def __init__(self, system: RewriteSystem, signature: Signature | None = None):
        sig = system.signature if signature is None else system.signature.merge(signature)
        if not sig.constants():
            name = FRESH_CONSTANT
            while name in sig:
                name += "_"
            sig = Signature(sig.symbols + (Symbol(name, 0),))
        ordering = extend_ordering(system.ordering, sig)
        if ordering is not system.ordering or sig != system.signature:
            system = RewriteSystem(system.equations, ordering, system.mode, sig, system.step_cap)
        self.system = system
        self.signature = sig

    @classmethod
    def for_problem(cls, system: RewriteSystem, problem: Problem) -> HerbrandModel:
        return cls(system, problem.signature)

    def evaluate(self, t: Term) -> Term:
        """The normal form of ground ``t``: its domain element."""
        self.signature.check(t)
        return normal_form(self.system, t)

    def holds(self, eq: Equation) -> bool:
        if not (is_ground(eq.lhs) and is_ground(eq.rhs)):
            raise FragmentError("only ground equations can be decided in the model")
        return self.evaluate(eq.lhs) == self.evaluate(eq.rhs)

    def universe(self, bound: int) -> list[Term]:
        return ground_terms_up_to(self.signature, bound)


def evaluate(m: HerbrandModel, t: Term) -> Term:
    return m.evaluate(t)


def holds(m: HerbrandModel, eq: Equation) -> bool:
    return m.holds(eq)


# ---------------------------------------------------------------------------
# bounded axiom checking


@dataclass
class AxiomCoverage:
    equation: Equation
    instances: int = 0
    combinations: int = 0
    failures: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "axiom": str(self.equation),
            "instances_checked": self.instances,
            "class_combinations": self.combinations,
            "failures": self.failures,
        }


def check_axiom(
    system: RewriteSystem,
    axiom: Equation,
    universe: list[Term],
    limit: int | None = None,
) -> AxiomCoverage:
    """Check ``axiom`` on every substitution of its variables into ``universe``.

    Normal forms satisfy nf(f(s1..sn)) = nf(f(nf(s1)..nf(sn))), so an
    instance's verdict depends only on the normal forms substituted.  The
    universe is therefore grouped into normal-form classes, one
    representative per class is tried, and the instance count is the
    product of the class sizes.  Up to ``limit`` failures are recorded,
    each with a concrete witness substitution.
    """
    for t in universe:
        system._require_known(t)
    rw = system.rewriter
    classes: dict[Term, list[Term]] = {}
    for t in universe:
        classes.setdefault(rw.normal_form(t), []).append(t)
    reps = list(classes)
    names = axiom.variables()
    lhs = _evaluator(axiom.lhs, names, rw)
    rhs = _evaluator(axiom.rhs, names, rw)
    sizes = {c: len(ms) for c, ms in classes.items()}
    cov = AxiomCoverage(axiom)
    for choice in itertools.product(reps, repeat=len(names)):
        cov.combinations += 1
        cov.instances += math.prod(sizes[c] for c in choice)
        if limit is not None and len(cov.failures) >= limit:
            continue
        lnf, rnf = lhs(choice), rhs(choice)
        if lnf != rnf:
            witness = {v: classes[c][0] for v, c in zip(names, choice)}
            cov.failures.append(
                {
                    "substitution": {v: format_term(t) for v, t in witness.items()},
                    "lhs_normal_form": format_term(lnf),
                    "rhs_normal_form": format_term(rnf),
                }
            )
    return cov


def _evaluator(t: Term, names: list[str], rw):
    """Closure mapping normal forms for ``names`` to the normal form of ``t``.

    Each application is rebuilt over argument normal forms and normalized
    at the root, which equals normalizing the full instance.
    """
    if isinstance(t, Var):
        i = names.index(t.name)
        return lambda env: env[i]
    if not t.args:
        value = rw.normal_form(t)
        return lambda env: value
    fn = t.fn
    nf = rw.normal_form_at_root
    parts = [_evaluator(a, names, rw) for a in t.args]
    if len(parts) == 2:
        left, right = parts
        return lambda env: nf(App(fn, (left(env), right(env))))
    return lambda env: nf(App(fn, tuple(p(env) for p in parts)))


def axiom_instance_failures(
    system: RewriteSystem, axiom: Equation, bound: int, limit: int | None = None
) -> tuple[list[dict], int]:
    """Failures and instance count for ``axiom`` over terms with at most ``bound`` operations."""
    model = HerbrandModel(system)
    cov = check_axiom(model.system, axiom, model.universe(bound), limit)
    return cov.failures, cov.instances


# ---------------------------------------------------------------------------
# reports


@dataclass
class ModelReport:
    bound: int
    ordering: dict
    mode: str
    disequations: list[dict]
    axioms: list[AxiomCoverage]
    confluence: ConfluenceReport
    preordered: dict
    verdict: str
    reasons: list[str]

    @property
    def axiom_failures(self) -> int:
        return sum(len(a.failures) for a in self.axioms)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "reasons": self.reasons,
            "bound": self.bound,
            "ordering": self.ordering,
            "mode": self.mode,
            "disequations": self.disequations,
            "axioms": [a.to_dict() for a in self.axioms],
            "confluence": self.confluence.to_dict(),
            "termination": {
                "terminating": self.confluence.terminating,
                "preordered": self.preordered,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def summary(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        for d in self.disequations:
            mark = "distinct" if d["distinct"] else "EQUAL"
            lines.append(
                f"disequation {d['disequation']}: {d['lhs_normal_form']} vs {d['rhs_normal_form']} ({mark})"
            )
        for a in self.axioms:
            lines.append(
                f"axiom {a.equation}: {a.instances} instances at bound {self.bound}, "
                f"{len(a.failures)} failures"
            )
            for f in a.failures[:3]:
                lines.append(f"  witness {f['substitution']}: {f['lhs_normal_form']} vs {f['rhs_normal_form']}")
        lines.append(f"confluence: {self.confluence.status} ({self.confluence.reason})")
        lines.extend(f"note: {r}" for r in self.reasons)
        return "\n".join(lines)


def verify_countermodel(
    m: HerbrandModel, p: Problem, bound: int = 2, failure_limit: int = 10
) -> ModelReport:
    """Check that ``m`` satisfies the axioms of ``p`` and falsifies its goal.

    The verdict is ``verified_countermodel_at_bound`` only when every
    disequation has distinct normal forms, no axiom instance up to ``bound``
    fails, and confluence is certified.  Joined disequation sides refute the
    model outright.  An axiom failure refutes it when confluence is
    certified and is otherwise inconclusive, since normal-form equality of a
    non-confluent system is not a congruence.
    """
    if bound < 0:
        raise ValueError("bound must be non-negative")
    if not all(s in m.signature for s in p.signature.names):
        m = HerbrandModel(m.system, p.signature)
    system = m.system
    diseqs = []
    for d in p.disequations:
        lnf, rnf = m.evaluate(d.lhs), m.evaluate(d.rhs)
        diseqs.append(
            {
                "disequation": f"{format_term(d.lhs)} != {format_term(d.rhs)}",
                "lhs_normal_form": format_term(lnf),
                "rhs_normal_form": format_term(rnf),
                "distinct": lnf != rnf,
            }
        )
    universe = m.universe(bound)
    axioms = [check_axiom(system, ax, universe, failure_limit) for ax in p.axioms]
    confluence = check_ground_confluence(system)
    pre = check_preordered(system)

    reasons = []
    joined = [d for d in diseqs if not d["distinct"]]
    failed = [a for a in axioms if a.failures]
    if joined:
        verdict = REFUTED
        reasons.append("a disequation's sides have the same normal form")
    elif failed and confluence.certified:
        verdict = REFUTED
        reasons.append("an axiom instance does not hold in the model")
    elif failed:
        verdict = INCONCLUSIVE
        reasons.append("an axiom instance failed but confluence is not certified")
    elif not confluence.certified:
        verdict = INCONCLUSIVE
        reasons.append(f"confluence not certified: {confluence.reason}")
    else:
        verdict = VERIFIED
    return ModelReport(
        bound,
        system.ordering.to_dict(),
        system.mode.value,
        diseqs,
        axioms,
        confluence,
        pre.to_dict(),
        verdict,
        reasons,
    )
