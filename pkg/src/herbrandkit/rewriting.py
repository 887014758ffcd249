"""Ordered rewriting, normalization, critical pairs and convergence checks.

A :class:`RewriteSystem` is a list of equations with a reduction ordering.
In ``ORDERED`` mode an equation ``l = r`` may be used in either direction on
any instance ``σ(l) -> σ(r)`` with ``σ(l) > σ(r)``; variables of ``r`` left
unbound by matching are set to the smallest constant.  In ``ORIENTED`` mode
equations are plain rules read left to right.

Normal forms are computed innermost-leftmost, equations in input order, the
left-to-right direction before the right-to-left one.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import RewriteError, SignatureError
from .ordering import Comparison, OrderingConfig, is_reduction_orientation, smallest_constant
from .terms import (
    App,
    Equation,
    Position,
    Signature,
    Term,
    Var,
    apply_subst,
    compile_builder,
    compile_matcher,
    format_position,
    format_term,
    is_ground,
    match_term,
    replace_at,
    subterm_positions,
    unify,
    variables,
)

DEFAULT_STEP_CAP = 100_000
MEMO_LIMIT = 2_000_000
INNERMOST = "innermost"
OUTERMOST = "outermost"


class Mode(str, enum.Enum):
    ORDERED = "ordered"
    ORIENTED = "oriented"


@dataclass(frozen=True)
class RewriteStep:
    position: Position
    equation_index: int
    direction: str
    substitution: Mapping[str, Term]
    before: Term
    after: Term

    def line(self) -> str:
        return (
            f"{format_position(self.position)} | {self.equation_index} | {self.direction} | "
            f"{format_term(self.before)} -> {format_term(self.after)}"
        )

    def to_dict(self) -> dict:
        return {
            "position": list(self.position),
            "rule_index": self.equation_index,
            "direction": self.direction,
            "substitution": {k: format_term(v) for k, v in self.substitution.items()},
            "before": format_term(self.before),
            "after": format_term(self.after),
        }


@dataclass(frozen=True)
class NormalizationTrace:
    start: Term
    steps: tuple[RewriteStep, ...]
    result: Term

    def lines(self) -> list[str]:
        return [s.line() for s in self.steps]

    def to_dict(self) -> dict:
        return {
            "start": format_term(self.start),
            "steps": [s.to_dict() for s in self.steps],
            "result": format_term(self.result),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class _Entry:
    index: int
    direction: str
    lhs: Term
    rhs: Term
    extra: tuple[str, ...]
    check: bool
    match: Callable = field(compare=False, repr=False, default=None)
    build: Callable = field(compare=False, repr=False, default=None)

    @property
    def key(self) -> tuple[int, int]:
        return (self.index, 0 if self.direction == "lr" else 1)


def _heads_compatible(lhs: App, arg_heads: tuple) -> bool:
    for a, h in zip(lhs.args, arg_heads):
        if isinstance(a, App) and a.fn != h:
            return False
    return True


class Rewriter:
    """Matching and normalization over a mutable set of equations.

    This is the engine behind :class:`RewriteSystem`; completion uses it
    directly because its equation set changes as the loop runs.  With
    ``allow_open`` variables in query terms are treated as constants and the
    ordering check is done on the non-ground instance.
    """

    def __init__(
        self,
        ordering: OrderingConfig,
        mode: Mode = Mode.ORDERED,
        fill_constant: Term | None = None,
        step_cap: int = DEFAULT_STEP_CAP,
    ):
        self.ordering = ordering
        self.mode = Mode(mode)
        self.fill_constant = fill_constant
        self.step_cap = step_cap
        self.equations: dict[int, Equation] = {}
        self._by_head: dict[str | None, list[_Entry]] = {}
        self._candidates: dict = {}
        self._nf: dict[Term, Term] = {}
        self._normal: set[Term] = set()
        self.skipped_fills = 0

    # -- equation set -------------------------------------------------------

    def add(self, index: int, eq: Equation) -> None:
        if index in self.equations:
            raise ValueError(f"equation {index} already present")
        self.equations[index] = eq
        directions = [("lr", eq.lhs, eq.rhs)]
        if self.mode is Mode.ORDERED:
            directions.append(("rl", eq.rhs, eq.lhs))
        for direction, l, r in directions:
            check = False
            if self.mode is Mode.ORDERED:
                cmp = self.ordering.compare(l, r)
                if cmp in (Comparison.LESS, Comparison.EQUAL):
                    continue
                check = cmp is not Comparison.GREATER
            lvars = set(variables(l))
            extra = tuple(v for v in variables(r) if v not in lvars)
            head = l.fn if isinstance(l, App) else None
            entry = _Entry(
                index, direction, l, r, extra, check, compile_matcher(l), compile_builder(r)
            )
            bucket = self._by_head.setdefault(head, [])
            bucket.append(entry)
            bucket.sort(key=lambda e: e.key)
        self._changed()

    def remove(self, index: int) -> Equation:
        eq = self.equations.pop(index)
        for head, bucket in list(self._by_head.items()):
            self._by_head[head] = [e for e in bucket if e.index != index]
        self._changed()
        return eq

    def _changed(self) -> None:
        self._candidates.clear()
        self._nf.clear()
        self._normal.clear()

    def _entries_for(self, key) -> list[_Entry]:
        own = self._by_head.get(key[0], []) if key is not None else []
        hit = [e for e in own if _heads_compatible(e.lhs, key[1:])]
        hit = sorted(hit + self._by_head.get(None, []), key=lambda e: e.key)
        self._candidates[key] = hit
        return hit

    # -- single steps -------------------------------------------------------

    def root_step(self, t: Term) -> tuple[_Entry, dict[str, Term], Term] | None:
        # candidates are keyed by the head symbol and the heads of the arguments
        key = (t.fn, *[a.fn for a in t.args]) if t.fn is not None else None
        entries = self._candidates.get(key)
        if entries is None:
            entries = self._entries_for(key)
        for e in entries:
            sigma = e.match(t)
            if sigma is None:
                continue
            if e.extra:
                if self.fill_constant is None:
                    raise RewriteError(
                        f"equation {e.index} needs a constant for {', '.join(e.extra)} "
                        "but the signature has none"
                    )
                for v in e.extra:
                    sigma[v] = self.fill_constant
            r = e.build(sigma)
            if e.check and self.ordering.compare(t, r) is not Comparison.GREATER:
                if e.extra:
                    self.skipped_fills += 1
                continue
            return e, sigma, r
        return None

    def find_step(self, t: Term, strategy: str = INNERMOST) -> RewriteStep | None:
        """First redex of ``t`` under the strategy, as a :class:`RewriteStep`."""
        if strategy == INNERMOST:
            hit = self._innermost(t, ())
        elif strategy == OUTERMOST:
            hit = self._outermost(t)
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        if hit is None:
            return None
        pos, (e, sigma, r) = hit
        return RewriteStep(pos, e.index, e.direction, sigma, t, replace_at(t, pos, r))

    def _innermost(self, t: Term, pos: Position):
        if t in self._normal:
            return None
        if isinstance(t, App):
            for i, a in enumerate(t.args):
                hit = self._innermost(a, pos + (i,))
                if hit is not None:
                    return hit
        found = self.root_step(t)
        if found is None:
            self._normal.add(t)
            return None
        return pos, found

    def _outermost(self, t: Term):
        for pos, s in subterm_positions(t):
            found = self.root_step(s)
            if found is not None:
                return pos, found
        return None

    # -- normal forms -------------------------------------------------------

    def normal_form(self, t: Term) -> Term:
        """Innermost normal form, memoized.

        Arguments are normalized before the root is tried, so the result
        equals the innermost-leftmost step-by-step normal form, and
        ``nf(f(s1..sn)) = nf(f(nf(s1)..nf(sn)))`` holds exactly.
        """
        hit = self._nf.get(t)
        if hit is not None:
            return hit
        if len(self._nf) > MEMO_LIMIT:
            self._nf.clear()
        budget = [self.step_cap]
        return self._nf_loop(t, budget)

    def normal_form_at_root(self, t: App) -> Term:
        """Normal form of ``t`` whose arguments are already normal forms."""
        hit = self._nf.get(t)
        if hit is not None:
            return hit
        found = self.root_step(t)
        if found is None:
            self._nf[t] = t
            return t
        if len(self._nf) > MEMO_LIMIT:
            self._nf.clear()
        result = self._nf_loop(found[2], [self.step_cap])
        self._nf[t] = result
        return result

    def _nf_loop(self, t: Term, budget: list[int]) -> Term:
        seen = [t]
        cur = t
        while True:
            hit = self._nf.get(cur)
            if hit is not None:
                result = hit
                break
            if isinstance(cur, App) and cur.args:
                args = tuple(self._nf.get(a) or self._nf_loop(a, budget) for a in cur.args)
                if any(x is not y for x, y in zip(args, cur.args)):
                    cur = App(cur.fn, args)
                    hit = self._nf.get(cur)
                    if hit is not None:
                        result = hit
                        break
                    seen.append(cur)
            found = self.root_step(cur)
            if found is None:
                result = cur
                break
            budget[0] -= 1
            if budget[0] < 0:
                raise RewriteError(
                    f"normalization exceeded {self.step_cap} steps; an equation is used "
                    "on an instance that does not decrease"
                )
            cur = found[2]
            seen.append(cur)
        for s in seen:
            self._nf[s] = result
        self._nf[result] = result
        return result

    def normalize_steps(self, t: Term, strategy: str = INNERMOST) -> list[RewriteStep]:
        steps: list[RewriteStep] = []
        cur = t
        while True:
            step = self.find_step(cur, strategy)
            if step is None:
                return steps
            steps.append(step)
            if len(steps) > self.step_cap:
                raise RewriteError(
                    f"normalization exceeded {self.step_cap} steps; an equation is used "
                    "on an instance that does not decrease"
                )
            cur = step.after


# ---------------------------------------------------------------------------
# rewrite systems


@dataclass(frozen=True)
class RewriteSystem:
    equations: tuple[Equation, ...]
    ordering: OrderingConfig
    mode: Mode = Mode.ORDERED
    signature: Signature | None = None
    step_cap: int = DEFAULT_STEP_CAP

    def __post_init__(self):
        object.__setattr__(self, "equations", tuple(self.equations))
        object.__setattr__(self, "mode", Mode(self.mode))
        sig = self.signature if self.signature is not None else Signature()
        sig = sig.extend(t for e in self.equations for t in (e.lhs, e.rhs))
        object.__setattr__(self, "signature", sig)
        self.ordering.covers(sig.names)

    @cached_property
    def rewriter(self) -> Rewriter:
        try:
            fill = smallest_constant(self.signature, self.ordering)
        except SignatureError:
            fill = None
        rw = Rewriter(self.ordering, self.mode, fill, self.step_cap)
        for i, eq in enumerate(self.equations):
            rw.add(i, eq)
        return rw

    def with_ordering(self, ordering: OrderingConfig, mode: Mode | None = None) -> RewriteSystem:
        return RewriteSystem(
            self.equations, ordering, mode or self.mode, self.signature, self.step_cap
        )

    def _require_known(self, t: Term) -> None:
        if not is_ground(t):
            raise RewriteError(f"term {format_term(t)} is not ground")
        for _, s in subterm_positions(t):
            if isinstance(s, App) and s.fn not in self.ordering.precedence:
                raise SignatureError(f"symbol {s.fn} is not in the ordering's precedence")


def rewrite_step(E: RewriteSystem, t: Term, strategy: str = INNERMOST) -> RewriteStep | None:
    """One rewrite step on ground ``t``, or None when ``t`` is a normal form."""
    E._require_known(t)
    return E.rewriter.find_step(t, strategy)


def normalize(E: RewriteSystem, t: Term, strategy: str = INNERMOST) -> NormalizationTrace:
    """Rewrite ground ``t`` to a fixed point, recording every step."""
    E._require_known(t)
    steps = E.rewriter.normalize_steps(t, strategy)
    result = steps[-1].after if steps else t
    return NormalizationTrace(t, tuple(steps), result)


def normal_form(E: RewriteSystem, t: Term) -> Term:
    """The innermost normal form of ground ``t`` without a trace."""
    E._require_known(t)
    return E.rewriter.normal_form(t)


def equal_in_model(E: RewriteSystem, s: Term, t: Term) -> bool:
    return normal_form(E, s) == normal_form(E, t)


# ---------------------------------------------------------------------------
# critical pairs


@dataclass(frozen=True)
class CriticalPair:
    """Two one-step reducts of ``peak``.

    ``left`` rewrites the inner equation at ``position``; ``right`` rewrites
    the outer one at the root.  ``outer``/``inner`` name (equation index,
    direction); the two substitutions are over each equation's own variables.
    """

    peak: Term
    left: Term
    right: Term
    position: Position
    unifier: Mapping[str, Term]
    outer: tuple[int, str]
    inner: tuple[int, str]
    outer_subst: Mapping[str, Term] = field(default_factory=dict)
    inner_subst: Mapping[str, Term] = field(default_factory=dict)

    @property
    def trivial(self) -> bool:
        return self.left == self.right

    def to_dict(self) -> dict:
        return {
            "peak": format_term(self.peak),
            "left": format_term(self.left),
            "right": format_term(self.right),
            "position": list(self.position),
            "outer": list(self.outer),
            "inner": list(self.inner),
            "trivial": self.trivial,
        }


_RENAME_SUFFIX = "'"


def _directions(index: int, eq: Equation, ordering: OrderingConfig | None):
    """(index, direction, lhs, rhs) for every usable direction of ``eq``."""
    if ordering is None:
        return [(index, "lr", eq.lhs, eq.rhs)]
    out = []
    for direction, l, r in (("lr", eq.lhs, eq.rhs), ("rl", eq.rhs, eq.lhs)):
        if ordering.compare(l, r) not in (Comparison.LESS, Comparison.EQUAL):
            out.append((index, direction, l, r))
    return out


def overlaps(
    outer_dirs: Iterable[tuple[int, str, Term, Term]],
    inner_dirs: Sequence[tuple[int, str, Term, Term]],
    ordering: OrderingConfig | None,
) -> Iterator[CriticalPair]:
    """Critical pairs from overlapping each inner left side into each outer one.

    With an ``ordering`` (ordered mode) a pair is dropped when either used
    instance is refuted as non-decreasing; incomparable instances are kept.
    """
    for oi, od, ol, orr in outer_dirs:
        if isinstance(ol, Var):
            continue
        outer_vars = variables(ol, variables(orr))
        for ii, idr, il, ir in inner_dirs:
            inner_vars = variables(il, variables(ir))
            ren = {v: Var(v + _RENAME_SUFFIX) for v in inner_vars}
            il2, ir2 = apply_subst(ren, il), apply_subst(ren, ir)
            for pos, sub in subterm_positions(ol):
                if isinstance(sub, Var):
                    continue
                # a root self-overlap is trivial unless the right side has extra variables
                if not pos and (oi, od) == (ii, idr) and set(variables(orr)) <= set(variables(ol)):
                    continue
                mgu = unify(sub, il2)
                if mgu is None:
                    continue
                inner_l, inner_r = apply_subst(mgu, il2), apply_subst(mgu, ir2)
                peak, right = apply_subst(mgu, ol), apply_subst(mgu, orr)
                if ordering is not None:
                    if ordering.compare(inner_l, inner_r) in (Comparison.LESS, Comparison.EQUAL):
                        continue
                    if ordering.compare(peak, right) in (Comparison.LESS, Comparison.EQUAL):
                        continue
                left = replace_at(peak, pos, inner_r)
                yield CriticalPair(
                    peak,
                    left,
                    right,
                    pos,
                    mgu,
                    (oi, od),
                    (ii, idr),
                    {v: apply_subst(mgu, Var(v)) for v in outer_vars},
                    {v: apply_subst(mgu, ren[v]) for v in inner_vars},
                )


def critical_pairs(E: RewriteSystem) -> list[CriticalPair]:
    """All critical pairs of ``E``, including trivial ones (see ``trivial``)."""
    ordering = E.ordering if E.mode is Mode.ORDERED else None
    dirs = [d for i, eq in enumerate(E.equations) for d in _directions(i, eq, ordering)]
    return list(overlaps(dirs, dirs, ordering))


# ---------------------------------------------------------------------------
# desk checks


@dataclass(frozen=True)
class PairVerdict:
    pair: CriticalPair
    joinable: bool
    left_nf: Term
    right_nf: Term

    def to_dict(self) -> dict:
        d = self.pair.to_dict()
        d.update(
            joinable=self.joinable,
            left_normal_form=format_term(self.left_nf),
            right_normal_form=format_term(self.right_nf),
        )
        return d


CONFLUENT = "confluent_certified"
NOT_CONFLUENT = "not_confluent"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConfluenceReport:
    status: str
    terminating: bool
    reason: str
    pairs: tuple[PairVerdict, ...] = ()
    witness: PairVerdict | None = None

    @property
    def certified(self) -> bool:
        return self.status == CONFLUENT

    @property
    def nontrivial(self) -> int:
        return sum(1 for p in self.pairs if not p.pair.trivial)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "terminating": self.terminating,
            "reason": self.reason,
            "critical_pairs": len(self.pairs),
            "nontrivial_pairs": self.nontrivial,
            "joinable_pairs": sum(1 for p in self.pairs if p.joinable),
            "witness": self.witness.to_dict() if self.witness else None,
        }


def oriented_rules(E: RewriteSystem) -> list[Equation] | None:
    """The equations as terminating rules, or None if one cannot be oriented.

    Oriented systems must decrease as written; in ordered mode each equation
    may be flipped to its decreasing direction.
    """
    rules = []
    for eq in E.equations:
        cmp = E.ordering.compare(eq.lhs, eq.rhs)
        if cmp is Comparison.GREATER:
            rules.append(eq)
        elif cmp is Comparison.LESS and E.mode is Mode.ORDERED:
            rules.append(eq.flipped())
        else:
            return None
    return rules


def check_ground_confluence(E: RewriteSystem) -> ConfluenceReport:
    """Knuth-Bendix/Newman check: terminating and all critical pairs joinable.

    Termination is established by every rule decreasing under ``E.ordering``;
    otherwise the verdict is inconclusive.
    """
    rules = oriented_rules(E)
    if rules is None:
        return ConfluenceReport(
            INCONCLUSIVE,
            False,
            f"some equation does not decrease under {E.ordering.describe()}; termination not established",
        )
    trs = RewriteSystem(tuple(rules), E.ordering, Mode.ORIENTED, E.signature, E.step_cap)
    rw = Rewriter(E.ordering, Mode.ORIENTED, None, E.step_cap)
    for i, r in enumerate(trs.equations):
        rw.add(i, r)
    verdicts = []
    witness = None
    for cp in critical_pairs(trs):
        ln, rn = rw.normal_form(cp.left), rw.normal_form(cp.right)
        v = PairVerdict(cp, ln == rn, ln, rn)
        verdicts.append(v)
        if not v.joinable and witness is None:
            witness = v
    reason = f"all rules decrease under {E.ordering.describe()}"
    if witness is not None:
        return ConfluenceReport(
            NOT_CONFLUENT, True, reason + "; a critical pair is not joinable", tuple(verdicts), witness
        )
    return ConfluenceReport(
        CONFLUENT, True, reason + "; every critical pair is joinable", tuple(verdicts)
    )


@dataclass(frozen=True)
class PreorderReport:
    oriented: tuple[bool, ...]

    @property
    def oriented_count(self) -> int:
        return sum(self.oriented)

    @property
    def unoriented_count(self) -> int:
        return len(self.oriented) - self.oriented_count

    @property
    def all_oriented(self) -> bool:
        return all(self.oriented)

    def to_dict(self) -> dict:
        return {
            "per_equation": list(self.oriented),
            "oriented": self.oriented_count,
            "unoriented": self.unoriented_count,
        }


def check_preordered(E: RewriteSystem) -> PreorderReport:
    """Whether each equation, as written, has ``lhs > rhs``."""
    return PreorderReport(
        tuple(E.ordering.compare(e.lhs, e.rhs) is Comparison.GREATER for e in E.equations)
    )


def is_terminating_as_written(E: RewriteSystem) -> bool:
    return is_reduction_orientation(E.ordering, E.equations)
