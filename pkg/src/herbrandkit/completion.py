"""Desk-scale unfailing completion with proof recording.

The loop is a DISCOUNT-style given-clause procedure: the selected passive
equation is simplified by the active ones, discarded when trivial or a
variant of an active equation, used to back-simplify the active set, and
overlapped with it to produce ordered critical pairs.  Ground disequations
are re-normalized after every activation, and joining both sides of one
ends the run with a refutation.

Every derived equation carries a proof: a chain of equational steps from its
left side to its right side citing earlier equations.  :func:`replay`
re-checks these chains independently of the loop.
"""

from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import CompletionError, FragmentError, SignatureError
from .ordering import (
    OrderingConfig,
    default_ordering,
    extend_ordering,
    find_orientation,
    is_reduction_orientation,
    smallest_constant,
)
from .rewriting import (
    DEFAULT_STEP_CAP,
    Mode,
    Rewriter,
    RewriteStep,
    RewriteSystem,
    _directions,
    overlaps,
)
from .terms import (
    Equation,
    Position,
    Term,
    Var,
    apply_subst,
    format_position,
    format_term,
    is_variant,
    normalize_equation,
    normalize_variables,
    replace_at,
    subterm_at,
)
from .tptp import Problem, SaturationDump


@dataclass(frozen=True)
class Limits:
    max_steps: int = 1000
    max_equations: int = 5000
    max_term_size: int = 40


@dataclass
class Statistics:
    selected: int = 0
    generated: int = 0
    simplified: int = 0
    deleted: int = 0
    back_simplified: int = 0

    def to_dict(self) -> dict:
        return dict(vars(self))


@dataclass(frozen=True)
class ProofLink:
    """One equational step ``before = after`` by an instance of an equation."""

    before: Term
    after: Term
    equation: int
    position: Position
    direction: str
    substitution: Mapping[str, Term]

    def reversed(self) -> ProofLink:
        flip = "rl" if self.direction == "lr" else "lr"
        return ProofLink(self.after, self.before, self.equation, self.position, flip, self.substitution)

    def line(self) -> str:
        return (
            f"{format_position(self.position)} | {self.equation} | {self.direction} | "
            f"{format_term(self.before)} -> {format_term(self.after)}"
        )

    def to_dict(self) -> dict:
        return {
            "position": list(self.position),
            "rule_index": self.equation,
            "direction": self.direction,
            "before": format_term(self.before),
            "after": format_term(self.after),
        }


@dataclass(frozen=True)
class Inference:
    """How equation ``id`` (or, for a refutation, a goal) was obtained."""

    kind: str
    id: int | None
    lhs: Term
    rhs: Term
    parents: tuple[int, ...] = ()
    chain: tuple[ProofLink, ...] = ()

    def line(self) -> str:
        label = f"[{self.kind}]" if self.id is None else f"{self.id}: [{self.kind}]"
        parents = f" from {','.join(map(str, self.parents))}" if self.parents else ""
        op = "!=" if self.kind == "refutation" else "="
        return f"{label} {format_term(self.lhs)} {op} {format_term(self.rhs)}{parents}"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "id": self.id,
            "lhs": format_term(self.lhs),
            "rhs": format_term(self.rhs),
            "parents": list(self.parents),
            "chain": [link.to_dict() for link in self.chain],
        }


@dataclass(frozen=True)
class Refuted:
    trace: tuple[Inference, ...]
    statistics: Statistics
    kind: str = "refuted"


@dataclass(frozen=True)
class Saturated:
    system: RewriteSystem
    trace: tuple[Inference, ...]
    statistics: Statistics
    kind: str = "saturated"


@dataclass(frozen=True)
class ResourceOut:
    statistics: Statistics
    reason: str
    trace: tuple[Inference, ...] = ()
    kind: str = "resource_out"


CompletionOutcome = Refuted | Saturated | ResourceOut


def _link(step: RewriteStep, eq_ids: Sequence[int] | None = None) -> ProofLink:
    eq = step.equation_index if eq_ids is None else eq_ids[step.equation_index]
    return ProofLink(step.before, step.after, eq, step.position, step.direction, dict(step.substitution))


class _Completion:
    def __init__(self, problem: Problem, ordering: OrderingConfig, limits: Limits):
        self.problem = problem
        self.ordering = ordering
        self.limits = limits
        self.stats = Statistics()
        self.trace: list[Inference] = []
        self.equations: dict[int, Equation] = {}
        try:
            fill = smallest_constant(problem.signature, ordering)
        except SignatureError:
            fill = None
        self.active = Rewriter(ordering, Mode.ORDERED, fill, DEFAULT_STEP_CAP)
        self.passive: dict[int, Equation] = {}
        self._by_size: list[tuple[int, int]] = []
        self._by_age: list[int] = []
        self._ids = itertools.count(1)
        self._pick = 0
        self.incomplete = False

    # -- bookkeeping --------------------------------------------------------

    def record(self, kind: str, eq: Equation, parents=(), chain=()) -> int:
        i = next(self._ids)
        self.equations[i] = eq
        self.trace.append(Inference(kind, i, eq.lhs, eq.rhs, tuple(parents), tuple(chain)))
        return i

    def push(self, i: int) -> None:
        eq = self.equations[i]
        self.passive[i] = eq
        heapq.heappush(self._by_size, (eq.lhs.size + eq.rhs.size, i))
        heapq.heappush(self._by_age, i)

    def pop(self) -> int:
        # five smallest-first picks for every oldest-first pick
        heap = self._by_age if self._pick % 6 == 5 else self._by_size
        self._pick += 1
        while True:
            item = heapq.heappop(heap)
            i = item if isinstance(item, int) else item[1]
            if i in self.passive:
                del self.passive[i]
                return i

    # -- the loop -----------------------------------------------------------

    def run(self) -> CompletionOutcome:
        for ax in self.problem.axioms:
            self.push(self.record("axiom", normalize_equation(ax)))
        refuted = self.check_goals()
        if refuted:
            return refuted
        while self.passive:
            if self.stats.selected >= self.limits.max_steps:
                return ResourceOut(self.stats, f"step limit {self.limits.max_steps} reached", tuple(self.trace))
            self.stats.selected += 1
            gid = self.pop()
            gid = self.simplify(gid)
            if gid is None:
                continue
            given = self.equations[gid]
            if given.lhs.size > self.limits.max_term_size or given.rhs.size > self.limits.max_term_size:
                self.incomplete = True
                self.stats.deleted += 1
                continue
            self.activate(gid)
            refuted = self.check_goals()
            if refuted:
                return refuted
            self.back_simplify(gid)
            self.generate(gid)
            if len(self.passive) + len(self.active.equations) > self.limits.max_equations:
                return ResourceOut(
                    self.stats, f"equation limit {self.limits.max_equations} reached", tuple(self.trace)
                )
        if self.incomplete:
            return ResourceOut(
                self.stats,
                f"equations above term size {self.limits.max_term_size} were discarded",
                tuple(self.trace),
            )
        ids = sorted(self.active.equations)
        system = RewriteSystem(
            tuple(self.active.equations[i] for i in ids),
            self.ordering,
            Mode.ORDERED,
            self.problem.signature,
        )
        return Saturated(system, tuple(self.trace), self.stats)

    def simplify(self, gid: int) -> int | None:
        eq = self.equations[gid]
        lsteps = self.active.normalize_steps(eq.lhs)
        rsteps = self.active.normalize_steps(eq.rhs)
        lhs = lsteps[-1].after if lsteps else eq.lhs
        rhs = rsteps[-1].after if rsteps else eq.rhs
        if lhs == rhs:
            self.stats.deleted += 1
            return None
        if any(is_variant(Equation(lhs, rhs), a) for a in self.active.equations.values()):
            self.stats.deleted += 1
            return None
        if not lsteps and not rsteps:
            return gid
        self.stats.simplified += 1
        chain = [_link(s).reversed() for s in reversed(lsteps)]
        chain.append(ProofLink(eq.lhs, eq.rhs, gid, (), "lr", {v: Var(v) for v in eq.variables()}))
        chain += [_link(s) for s in rsteps]
        new = normalize_equation(Equation(lhs, rhs))
        return self.record("simplify", new, (gid,) + _cited(chain), chain)

    def activate(self, gid: int) -> None:
        self.active.add(gid, self.equations[gid])

    def check_goals(self) -> Refuted | None:
        for d in self.problem.disequations:
            ls = self.active.normalize_steps(d.lhs)
            rs = self.active.normalize_steps(d.rhs)
            lnf = ls[-1].after if ls else d.lhs
            rnf = rs[-1].after if rs else d.rhs
            if lnf == rnf:
                chain = [_link(s) for s in ls] + [_link(s).reversed() for s in reversed(rs)]
                self.trace.append(
                    Inference("refutation", None, d.lhs, d.rhs, _cited(chain), tuple(chain))
                )
                return Refuted(tuple(self.trace), self.stats)
        return None

    def back_simplify(self, gid: int) -> None:
        given = Rewriter(self.ordering, Mode.ORDERED, self.active.fill_constant)
        given.add(gid, self.equations[gid])
        for i in [i for i in self.active.equations if i != gid]:
            eq = self.active.equations[i]
            if given.find_step(eq.lhs) or given.find_step(eq.rhs):
                self.active.remove(i)
                self.stats.back_simplified += 1
                self.push(i)

    def generate(self, gid: int) -> None:
        given = [(gid, self.equations[gid])]
        others = list(self.active.equations.items())
        g_dirs = [d for i, eq in given for d in _directions(i, eq, self.ordering)]
        a_dirs = [d for i, eq in others for d in _directions(i, eq, self.ordering)]
        pairs = list(overlaps(g_dirs, a_dirs, self.ordering))
        pairs += [cp for cp in overlaps(a_dirs, g_dirs, self.ordering) if cp.outer[0] != gid]
        for cp in pairs:
            if cp.left == cp.right:
                continue
            chain = (
                ProofLink(cp.left, cp.peak, cp.inner[0], cp.position, _flip(cp.inner[1]), cp.inner_subst),
                ProofLink(cp.peak, cp.right, cp.outer[0], (), cp.outer[1], cp.outer_subst),
            )
            new = normalize_equation(Equation(cp.left, cp.right))
            i = self.record("critical_pair", new, (cp.outer[0], cp.inner[0]), chain)
            self.stats.generated += 1
            self.push(i)


def _flip(direction: str) -> str:
    return "rl" if direction == "lr" else "lr"


def _cited(chain) -> tuple[int, ...]:
    return tuple(dict.fromkeys(link.equation for link in chain))


def complete(
    problem: Problem, ordering: OrderingConfig | None = None, limits: Limits = Limits()
) -> CompletionOutcome:
    """Run unfailing completion on ``problem``.

    Returns :class:`Refuted` when a disequation's sides become joinable,
    :class:`Saturated` when the passive queue empties with nothing discarded,
    and :class:`ResourceOut` when a limit is hit.
    """
    for d in problem.disequations:
        if not d.is_ground():
            raise FragmentError("disequations must be ground")
    if ordering is None:
        ordering = default_ordering(problem.signature)
    ordering.covers(problem.signature.names)
    return _Completion(problem, ordering, limits).run()


# ---------------------------------------------------------------------------
# replay


class ReplayError(CompletionError):
    pass


def replay(trace: Sequence[Inference], problem: Problem | None = None) -> None:
    """Re-check every proof chain of a completion trace.

    Each link must replace, at its position, an instance of one side of a
    previously justified equation by the same instance of the other side.
    Chains must connect the recorded sides up to variable renaming.  Axioms
    must come from ``problem`` when it is given.  Raises :class:`ReplayError`.
    """
    known: dict[int, Equation] = {}
    axioms = {normalize_equation(a) for a in problem.axioms} if problem else None
    for inf in trace:
        if inf.kind == "axiom":
            eq = Equation(inf.lhs, inf.rhs)
            if axioms is not None and normalize_equation(eq) not in axioms:
                raise ReplayError(f"axiom {inf.id} is not an input axiom")
            known[inf.id] = eq
            continue
        if not inf.chain:
            raise ReplayError(f"inference {inf.id} ({inf.kind}) has no proof chain")
        for link in inf.chain:
            _check_link(link, known, inf)
        for a, b in zip(inf.chain, inf.chain[1:]):
            if a.after != b.before:
                raise ReplayError(f"proof chain of {inf.id} is broken")
        start, end = inf.chain[0].before, inf.chain[-1].after
        if inf.kind == "refutation":
            if (start, end) != (inf.lhs, inf.rhs):
                raise ReplayError("refutation chain does not connect the disequation sides")
            if problem is not None and Equation(inf.lhs, inf.rhs) not in problem.disequations:
                raise ReplayError("refuted disequation is not part of the problem")
            continue
        if normalize_variables(start, end) != (inf.lhs, inf.rhs) and normalize_variables(
            end, start
        ) != (inf.lhs, inf.rhs):
            raise ReplayError(f"proof chain of {inf.id} does not prove the recorded equation")
        known[inf.id] = Equation(inf.lhs, inf.rhs)


def _check_link(link: ProofLink, known: dict[int, Equation], inf: Inference) -> None:
    eq = known.get(link.equation)
    if eq is None:
        raise ReplayError(f"inference {inf.id} cites unknown equation {link.equation}")
    src, dst = (eq.lhs, eq.rhs) if link.direction == "lr" else (eq.rhs, eq.lhs)
    try:
        at = subterm_at(link.before, link.position)
    except Exception as exc:
        raise ReplayError(f"inference {inf.id}: bad position") from exc
    if apply_subst(link.substitution, src) != at:
        raise ReplayError(
            f"inference {inf.id}: {format_term(at)} at {format_position(link.position)} "
            f"is not an instance of equation {link.equation}"
        )
    if replace_at(link.before, link.position, apply_subst(link.substitution, dst)) != link.after:
        raise ReplayError(f"inference {inf.id}: step by equation {link.equation} does not match")


def trace_lines(trace: Sequence[Inference]) -> list[str]:
    """One line per inference, followed by its proof steps indented."""
    out = []
    for inf in trace:
        out.append(inf.line())
        out.extend("    " + link.line() for link in inf.chain)
    return out


def trace_json(trace: Sequence[Inference]) -> str:
    return json.dumps([inf.to_dict() for inf in trace], indent=2)


# ---------------------------------------------------------------------------
# loading or producing a saturated system


def oriented_system(
    equations: Sequence[Equation],
    signature,
    ordering: OrderingConfig | None = None,
) -> RewriteSystem:
    """Wrap equations as a rewrite system, finding an ordering if needed.

    With an explicit ``ordering`` the system is oriented when every equation
    decreases as written and ordered otherwise.  Without one, the default
    KBO is tried, then an LPO and a KBO orientation search; if all fail the
    equations are used for ordered rewriting under the default ordering.
    """
    if ordering is not None:
        ordering = extend_ordering(ordering, signature)
        mode = Mode.ORIENTED if is_reduction_orientation(ordering, equations) else Mode.ORDERED
        return RewriteSystem(tuple(equations), ordering, mode, signature)
    default = default_ordering(signature)
    if is_reduction_orientation(default, equations):
        return RewriteSystem(tuple(equations), default, Mode.ORIENTED, signature)
    for kind in ("lpo", "kbo"):
        found = find_orientation(equations, kind, budget=50_000, signature=signature)
        if found.config is not None:
            cfg = extend_ordering(found.config, signature)
            return RewriteSystem(tuple(equations), cfg, Mode.ORIENTED, signature)
    return RewriteSystem(tuple(equations), default, Mode.ORDERED, signature)


def saturate_or_load(
    problem: Problem,
    dump: SaturationDump | None = None,
    ordering: OrderingConfig | None = None,
    limits: Limits = Limits(),
    sanity_bound: int = 1,
) -> RewriteSystem:
    """A rewrite system for the model of ``problem``.

    A supplied dump is preferred; it must pass a sanity pass (every axiom
    instance over ground terms with at most ``sanity_bound`` operations
    joins).  Otherwise completion runs and must saturate.
    """
    from .model import axiom_instance_failures

    if dump is not None:
        sig = problem.signature.merge(dump.signature)
        system = oriented_system(dump.equations, sig, ordering)
        for ax in problem.axioms:
            failures, _ = axiom_instance_failures(system, ax, sanity_bound, limit=1)
            if failures:
                raise CompletionError(
                    f"the saturation does not entail axiom {ax} (instance {failures[0]['substitution']})",
                    "unsound_dump",
                )
        return system
    outcome = complete(problem, ordering, limits)
    if isinstance(outcome, Refuted):
        raise CompletionError(
            "refuted: the disequation follows from the axioms, no countermodel exists", "refuted"
        )
    if isinstance(outcome, ResourceOut):
        raise CompletionError(f"completion ran out of resources: {outcome.reason}", "resource_out")
    return outcome.system
