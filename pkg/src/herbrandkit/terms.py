"""First-order terms, signatures, substitutions, matching and unification.

Terms are immutable and hashable.  A term is either a :class:`Var` or an
:class:`App` of a function symbol (named by a string) to a tuple of
argument terms; constants are applications with no arguments.  Arities are
tracked by :class:`Signature`, not by the terms themselves.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import PositionError, SignatureError

Position = tuple[int, ...]
Substitution = Mapping[str, "Term"]

#: Name of the single binary operation of magma problems.  It prints infix.
MUL = "*"

#: Internal variable names, assigned in first-occurrence order.
VARIABLE_NAMES = ("x", "y", "z", "w", "u", "v")


class Var:
    __slots__ = ("name", "_hash")

    #: Variables have no head symbol; this lets head lookups skip type tests.
    fn = None

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("V", name))

    def __eq__(self, other):
        return self is other or (type(other) is Var and other.name == self.name)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r})"

    def __str__(self):
        return self.name


class App:
    __slots__ = ("fn", "args", "_hash", "_size")

    def __init__(self, fn: str, args: Sequence[Term] = ()):
        self.fn = fn
        self.args = args = tuple(args)
        self._hash = hash((fn, *[a._hash for a in args]))
        self._size = 0

    @property
    def size(self) -> int:
        if not self._size:
            self._size = 1 + sum(a.size for a in self.args)
        return self._size

    def __eq__(self, other):
        if self is other:
            return True
        return (
            type(other) is App
            and self._hash == other._hash
            and self.fn == other.fn
            and self.args == other.args
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if not self.args:
            return f"App({self.fn!r})"
        return f"App({self.fn!r}, {list(self.args)!r})"

    def __str__(self):
        return format_term(self)


Var.size = 1  # type: ignore[attr-defined]

Term = Var | App


def const(name: str) -> App:
    return App(name, ())


def mul(left: Term, right: Term) -> App:
    return App(MUL, (left, right))


def format_term(t: Term) -> str:
    """Render ``t`` with prefix notation, except ``*`` which prints infix."""
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.fn
    if t.fn == MUL and len(t.args) == 2:
        return f"{_operand(t.args[0])}*{_operand(t.args[1])}"
    return f"{t.fn}({','.join(format_term(a) for a in t.args)})"


def _operand(t: Term) -> str:
    s = format_term(t)
    if isinstance(t, App) and t.fn == MUL and len(t.args) == 2:
        return f"({s})"
    return s


@dataclass(frozen=True)
class Equation:
    """An equation ``lhs = rhs``.  In oriented contexts it reads left to right."""

    lhs: Term
    rhs: Term

    def __str__(self):
        return f"{format_term(self.lhs)} = {format_term(self.rhs)}"

    def flipped(self) -> Equation:
        return Equation(self.rhs, self.lhs)

    def variables(self) -> list[str]:
        return _eq_vars(self)

    def is_ground(self) -> bool:
        return is_ground(self.lhs) and is_ground(self.rhs)


def _eq_vars(eq: Equation) -> list[str]:
    out: list[str] = []
    variables(eq.lhs, out)
    variables(eq.rhs, out)
    return out


# ---------------------------------------------------------------------------
# signatures


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int

    def __post_init__(self):
        if not self.name:
            raise SignatureError("symbol name must be non-empty")
        if self.arity < 0:
            raise SignatureError(f"negative arity for {self.name}")


@dataclass(frozen=True)
class Signature:
    """Symbols in declaration order; lookup by name is injective."""

    symbols: tuple[Symbol, ...] = ()
    _by_name: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        table = {}
        for s in self.symbols:
            if s.name in table:
                raise SignatureError(f"symbol {s.name} declared twice")
            table[s.name] = s
        object.__setattr__(self, "_by_name", table)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def get(self, name: str) -> Symbol:
        try:
            return self._by_name[name]
        except KeyError:
            raise SignatureError(f"unknown symbol {name}") from None

    def arity(self, name: str) -> int:
        return self.get(name).arity

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.symbols]

    def constants(self) -> list[Symbol]:
        return [s for s in self.symbols if s.arity == 0]

    def functions(self) -> list[Symbol]:
        return [s for s in self.symbols if s.arity > 0]

    def extend(self, terms: Iterable[Term]) -> Signature:
        """Return a signature with every symbol occurring in ``terms`` added.

        New symbols are appended in first-occurrence order.  A symbol used
        with two different arities raises :class:`SignatureError`.
        """
        table = dict(self._by_name)
        order = list(self.symbols)
        stack: list[Term] = []
        for t in terms:
            stack.append(t)
            while stack:
                s = stack.pop()
                if isinstance(s, Var):
                    continue
                known = table.get(s.fn)
                if known is None:
                    sym = Symbol(s.fn, len(s.args))
                    table[s.fn] = sym
                    order.append(sym)
                elif known.arity != len(s.args):
                    raise SignatureError(
                        f"symbol {s.fn} used with arity {len(s.args)} and {known.arity}"
                    )
                stack.extend(reversed(s.args))
        if len(order) == len(self.symbols):
            return self
        return Signature(tuple(order))

    def merge(self, other: Signature) -> Signature:
        order = list(self.symbols)
        for s in other.symbols:
            known = self._by_name.get(s.name)
            if known is None:
                order.append(s)
            elif known.arity != s.arity:
                raise SignatureError(f"symbol {s.name} has arities {known.arity} and {s.arity}")
        return Signature(tuple(order))

    @classmethod
    def from_terms(cls, terms: Iterable[Term]) -> Signature:
        return cls().extend(terms)

    def check(self, t: Term) -> None:
        """Raise unless every symbol of ``t`` is declared with the right arity."""
        for _, s in subterm_positions(t):
            if isinstance(s, App):
                sym = self.get(s.fn)
                if sym.arity != len(s.args):
                    raise SignatureError(f"{s.fn} expects {sym.arity} arguments, got {len(s.args)}")


# ---------------------------------------------------------------------------
# basic queries


def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    return all(is_ground(a) for a in t.args)


def variables(t: Term, out: list[str] | None = None) -> list[str]:
    """Variable names of ``t`` in first-occurrence (left-to-right) order."""
    if out is None:
        out = []
    if isinstance(t, Var):
        if t.name not in out:
            out.append(t.name)
    else:
        for a in t.args:
            variables(a, out)
    return out


def occurs(name: str, t: Term) -> bool:
    if isinstance(t, Var):
        return t.name == name
    return any(occurs(name, a) for a in t.args)


def var_counts(t: Term, counts: dict[str, int] | None = None) -> dict[str, int]:
    if counts is None:
        counts = {}
    if isinstance(t, Var):
        counts[t.name] = counts.get(t.name, 0) + 1
    else:
        for a in t.args:
            var_counts(a, counts)
    return counts


def operation_count(t: Term) -> int:
    """Number of applications of non-constant symbols in ``t``."""
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + sum(operation_count(a) for a in t.args)


def term_size(t: Term) -> int:
    return t.size


def subterm_positions(t: Term) -> list[tuple[Position, Term]]:
    """All (position, subterm) pairs of ``t`` in pre-order, root first."""
    out: list[tuple[Position, Term]] = []
    stack: list[tuple[Position, Term]] = [((), t)]
    while stack:
        pos, s = stack.pop()
        out.append((pos, s))
        if isinstance(s, App):
            for i in range(len(s.args) - 1, -1, -1):
                stack.append((pos + (i,), s.args[i]))
    return out


def subterm_at(t: Term, p: Position) -> Term:
    for i in p:
        if isinstance(t, Var) or not 0 <= i < len(t.args):
            raise PositionError(f"position {format_position(p)} is not valid in {t}")
        t = t.args[i]
    return t


def replace_at(t: Term, p: Position, s: Term) -> Term:
    """Return ``t`` with the subterm at ``p`` replaced by ``s``."""
    if not p:
        return s
    if isinstance(t, Var) or not 0 <= p[0] < len(t.args):
        raise PositionError(f"position {format_position(p)} is not valid in {t}")
    i = p[0]
    args = list(t.args)
    args[i] = replace_at(args[i], p[1:], s)
    return App(t.fn, args)


def format_position(p: Position) -> str:
    return ".".join(str(i) for i in p) if p else "ε"


# ---------------------------------------------------------------------------
# substitutions, matching, unification


def apply_subst(sigma: Substitution, t: Term) -> Term:
    """Simultaneously replace variables of ``t``; unbound variables stay."""
    if not sigma:
        return t
    return _apply(sigma, t)


def _apply(sigma: Substitution, t: Term) -> Term:
    if isinstance(t, Var):
        return sigma.get(t.name, t)
    if not t.args:
        return t
    args = tuple(_apply(sigma, a) for a in t.args)
    if all(x is y for x, y in zip(args, t.args)):
        return t
    return App(t.fn, args)


def match_term(pattern: Term, subject: Term) -> dict[str, Term] | None:
    """The substitution σ with σ(pattern) = subject, if one exists."""
    sigma: dict[str, Term] = {}
    return sigma if _match(pattern, subject, sigma) else None


def _match(p: Term, s: Term, sigma: dict[str, Term]) -> bool:
    if isinstance(p, Var):
        bound = sigma.get(p.name)
        if bound is None:
            sigma[p.name] = s
            return True
        return bound == s
    if isinstance(s, Var) or p.fn != s.fn or len(p.args) != len(s.args):
        return False
    for pa, sa in zip(p.args, s.args):
        if not _match(pa, sa, sigma):
            return False
    return True


def compile_matcher(pattern: Term) -> Callable[[Term], dict[str, Term] | None]:
    """A specialized equivalent of ``lambda s: match_term(pattern, s)``.

    The pattern is unrolled into straight-line Python so that matching in
    inner loops avoids one function call per pattern node.
    """
    lines = ["def match(s):"]
    bound: dict[str, str] = {}
    fresh = itertools.count()

    def gen(p: Term, expr: str) -> None:
        local = f"t{next(fresh)}"
        lines.append(f"    {local} = {expr}")
        if isinstance(p, Var):
            if p.name in bound:
                lines.append(f"    if {local} != {bound[p.name]}: return None")
            else:
                bound[p.name] = local
            return
        lines.append(
            f"    if type({local}) is not App or {local}.fn != {p.fn!r} "
            f"or len({local}.args) != {len(p.args)}: return None"
        )
        for i, a in enumerate(p.args):
            gen(a, f"{local}.args[{i}]")

    gen(pattern, "s")
    body = ", ".join(f"{name!r}: {local}" for name, local in bound.items())
    lines.append(f"    return {{{body}}}")
    namespace: dict = {"App": App}
    exec("\n".join(lines), namespace)
    return namespace["match"]


def compile_builder(t: Term) -> Callable[[Mapping[str, Term]], Term]:
    """A specialized equivalent of ``lambda sigma: apply_subst(sigma, t)``
    for substitutions binding every variable of ``t``."""
    consts: list[Term] = []

    def gen(u: Term) -> str:
        if isinstance(u, Var):
            return f"sg[{u.name!r}]"
        if is_ground(u):
            consts.append(u)
            return f"c{len(consts) - 1}"
        inner = ", ".join(gen(a) for a in u.args)
        return f"App({u.fn!r}, ({inner},))"

    expr = gen(t)
    namespace: dict = {"App": App}
    namespace.update((f"c{i}", c) for i, c in enumerate(consts))
    exec(f"def build(sg):\n    return {expr}", namespace)
    return namespace["build"]


def unify(s: Term, t: Term) -> dict[str, Term] | None:
    """Most general unifier of ``s`` and ``t`` (idempotent), or None."""
    bindings: dict[str, Term] = {}
    todo = [(s, t)]
    while todo:
        a, b = todo.pop()
        a = _walk(a, bindings)
        b = _walk(b, bindings)
        if a == b:
            continue
        if isinstance(a, Var):
            if _occurs_bound(a.name, b, bindings):
                return None
            bindings[a.name] = b
        elif isinstance(b, Var):
            if _occurs_bound(b.name, a, bindings):
                return None
            bindings[b.name] = a
        else:
            if a.fn != b.fn or len(a.args) != len(b.args):
                return None
            todo.extend(zip(a.args, b.args))
    return {name: _resolve(term, bindings) for name, term in bindings.items()}


def _walk(t: Term, bindings: dict[str, Term]) -> Term:
    while isinstance(t, Var) and t.name in bindings:
        t = bindings[t.name]
    return t


def _occurs_bound(name: str, t: Term, bindings: dict[str, Term]) -> bool:
    t = _walk(t, bindings)
    if isinstance(t, Var):
        return t.name == name
    return any(_occurs_bound(name, a, bindings) for a in t.args)


def _resolve(t: Term, bindings: dict[str, Term]) -> Term:
    t = _walk(t, bindings)
    if isinstance(t, Var) or not t.args:
        return t
    return App(t.fn, [_resolve(a, bindings) for a in t.args])


def compose(first: Substitution, second: Substitution) -> dict[str, Term]:
    """The substitution applying ``first`` and then ``second``."""
    out = {k: apply_subst(second, v) for k, v in first.items()}
    for k, v in second.items():
        out.setdefault(k, v)
    return out


def rename_apart(t: Term, suffix: str) -> Term:
    """Append ``suffix`` to every variable name of ``t``."""
    names = variables(t)
    return apply_subst({n: Var(n + suffix) for n in names}, t)


def canonical_names(count: int) -> list[str]:
    names = list(VARIABLE_NAMES[:count])
    names.extend(f"x{i}" for i in range(len(VARIABLE_NAMES), count))
    return names


def normalize_variables(*terms: Term) -> tuple[Term, ...]:
    """Rename variables jointly to x, y, z, w, u, v, x6, ... by first occurrence."""
    order: list[str] = []
    for t in terms:
        variables(t, order)
    names = canonical_names(len(order))
    sigma = {old: Var(new) for old, new in zip(order, names) if old != new}
    return tuple(apply_subst(sigma, t) for t in terms)


def normalize_equation(eq: Equation) -> Equation:
    lhs, rhs = normalize_variables(eq.lhs, eq.rhs)
    return Equation(lhs, rhs)


def is_variant(a: Equation, b: Equation) -> bool:
    """True iff ``b`` is ``a`` up to renaming, in either orientation."""
    na = normalize_equation(a)
    return na == normalize_equation(b) or na == normalize_equation(b.flipped())


# ---------------------------------------------------------------------------
# Herbrand universe


def ground_terms_up_to(sig: Signature, max_ops: int) -> list[Term]:
    """Every ground term with at most ``max_ops`` non-constant applications.

    Ordered by operation count; within a count, by function symbol in
    declaration order, then by how operations are split among arguments
    (leftmost argument smallest first), then lexicographically by argument.
    """
    constants = sig.constants()
    if not constants:
        raise SignatureError("signature has no constants: the Herbrand universe is empty")
    if max_ops < 0:
        raise ValueError("max_ops must be non-negative")
    functions = sig.functions()
    by_ops: list[list[Term]] = [[App(c.name, ()) for c in constants]]
    for k in range(1, max_ops + 1):
        layer: list[Term] = []
        for f in functions:
            for split in _compositions(k - 1, f.arity):
                pools = [by_ops[i] for i in split]
                for args in itertools.product(*pools):
                    layer.append(App(f.name, args))
        by_ops.append(layer)
    return [t for layer in by_ops for t in layer]


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered ways to write ``total`` as ``parts`` non-negative summands."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest
