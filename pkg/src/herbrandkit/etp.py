"""Magma equations with at most four operations, and implication problems.

Equations are enumerated by total operation count, then left-side
operation count (never more than the right side), then the shape of each
side, then the pattern of variable identifications written as a
restricted-growth string.  Shapes of a given size are ordered by the size of
their left subtree, then recursively.  An equation is kept the first time
its class under variable renaming and side swap appears.  Equations
``s = s`` are dropped, except ``x = x`` itself.  This yields 4694 equations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterator

from .errors import TptpSyntaxError
from .terms import (
    MUL,
    VARIABLE_NAMES,
    App,
    Equation,
    Term,
    Var,
    apply_subst,
    format_term,
    operation_count,
    variables,
)
from .tptp import Problem

MAX_OPERATIONS = 4
EXPECTED_COUNT = 4694
SKOLEM_NAMES = ("a", "b", "c", "d", "e", "f")


@dataclass(frozen=True)
class MagmaEquation:
    lhs: Term
    rhs: Term

    def __post_init__(self):
        for side in (self.lhs, self.rhs):
            _check_magma(side)

    def __str__(self):
        return f"{format_term(self.lhs)} = {format_term(self.rhs)}"

    @property
    def operations(self) -> int:
        return operation_count(self.lhs) + operation_count(self.rhs)

    @property
    def equation(self) -> Equation:
        return Equation(self.lhs, self.rhs)

    @property
    def canonical(self) -> bool:
        return canonicalize(self) == self


def _check_magma(t: Term) -> None:
    if isinstance(t, Var):
        return
    if t.fn != MUL or len(t.args) != 2:
        raise ValueError(f"{format_term(t)} is not a magma term")
    for a in t.args:
        _check_magma(a)


# ---------------------------------------------------------------------------
# shapes and keys

Shape = tuple  # () is a leaf, (left, right) an operation


@lru_cache(maxsize=None)
def shapes(k: int) -> tuple[Shape, ...]:
    """Binary tree shapes with ``k`` internal nodes in enumeration order."""
    if k == 0:
        return ((),)
    return tuple((a, b) for i in range(k) for a in shapes(i) for b in shapes(k - 1 - i))


@lru_cache(maxsize=None)
def _shape_index(k: int) -> dict[Shape, int]:
    return {s: i for i, s in enumerate(shapes(k))}


def _shape(t: Term) -> Shape:
    return () if isinstance(t, Var) else (_shape(t.args[0]), _shape(t.args[1]))


def _leaves(t: Term) -> list[str]:
    if isinstance(t, Var):
        return [t.name]
    return _leaves(t.args[0]) + _leaves(t.args[1])


def _fill(shape: Shape, labels: Iterator[int]) -> Term:
    if shape == ():
        return Var(VARIABLE_NAMES[next(labels)])
    left = _fill(shape[0], labels)
    right = _fill(shape[1], labels)
    return App(MUL, (left, right))


def _growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """Restricted-growth strings of length ``n`` in lexicographic order."""

    def rec(prefix: list[int], top: int):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in range(top + 1):
            prefix.append(v)
            yield from rec(prefix, max(top, v + 1))
            prefix.pop()

    yield from rec([], 0)


def _key(lhs: Term, rhs: Term) -> tuple | None:
    """Position of the oriented equation in enumeration order (None if lhs is larger)."""
    kl, kr = operation_count(lhs), operation_count(rhs)
    if kl > kr:
        return None
    first: dict[str, int] = {}
    labels = tuple(first.setdefault(v, len(first)) for v in _leaves(lhs) + _leaves(rhs))
    return (
        kl + kr,
        kl,
        _shape_index(kl)[_shape(lhs)],
        _shape_index(kr)[_shape(rhs)],
        labels,
    )


def _rename(lhs: Term, rhs: Term) -> MagmaEquation:
    names = variables(rhs, variables(lhs))
    sigma = {v: Var(VARIABLE_NAMES[i]) for i, v in enumerate(names)}
    return MagmaEquation(apply_subst(sigma, lhs), apply_subst(sigma, rhs))


def canonicalize(eq: MagmaEquation | Equation) -> MagmaEquation:
    """The representative of ``eq`` under renaming and side swap.

    Variables are renamed x, y, z, w, u, v by first occurrence, and the
    orientation that comes first in enumeration order is chosen.
    """
    if len(set(_leaves(eq.lhs) + _leaves(eq.rhs))) > len(VARIABLE_NAMES):
        raise ValueError("too many variables for a magma equation")
    candidates = [(eq.lhs, eq.rhs), (eq.rhs, eq.lhs)]
    keyed = [(k, l, r) for l, r in candidates if (k := _key(l, r)) is not None]
    _, l, r = min(keyed, key=lambda item: item[0])
    return _rename(l, r)


# ---------------------------------------------------------------------------
# enumeration


@lru_cache(maxsize=None)
def enumerate_equations(max_operations: int = MAX_OPERATIONS) -> tuple[MagmaEquation, ...]:
    """All canonical equations with at most ``max_operations`` operations."""
    seen: set[MagmaEquation] = set()
    out: list[MagmaEquation] = []
    for k in range(max_operations + 1):
        for kl in range(k // 2 + 1):
            for sl in shapes(kl):
                for sr in shapes(k - kl):
                    n = _leaf_count(sl) + _leaf_count(sr)
                    for g in _growth_strings(n):
                        it = iter(g)
                        lhs, rhs = _fill(sl, it), _fill(sr, it)
                        canon = canonicalize(Equation(lhs, rhs))
                        if canon in seen:
                            continue
                        seen.add(canon)
                        if lhs == rhs and k > 0:
                            continue
                        out.append(MagmaEquation(lhs, rhs))
    return tuple(out)


def _leaf_count(shape: Shape) -> int:
    return 1 if shape == () else _leaf_count(shape[0]) + _leaf_count(shape[1])


@lru_cache(maxsize=None)
def _numbers(max_operations: int = MAX_OPERATIONS) -> dict[MagmaEquation, int]:
    return {eq: i for i, eq in enumerate(enumerate_equations(max_operations), 1)}


def equation_number(eq: MagmaEquation | Equation) -> int:
    """1-based index of ``eq`` (any renaming or orientation) in the enumeration."""
    try:
        return _numbers()[canonicalize(eq)]
    except KeyError:
        raise ValueError(f"{format_term(eq.lhs)} = {format_term(eq.rhs)} is not enumerated") from None


def equation(number: int) -> MagmaEquation:
    eqs = enumerate_equations()
    if not 1 <= number <= len(eqs):
        raise ValueError(f"equation numbers run from 1 to {len(eqs)}")
    return eqs[number - 1]


def implication_count(n: int | None = None) -> int:
    """Ordered pairs of distinct equations."""
    n = len(enumerate_equations()) if n is None else n
    return n * n - n


# ---------------------------------------------------------------------------
# problems


def implication_problem(premise: MagmaEquation | Equation, conclusion: MagmaEquation | Equation) -> Problem:
    """Axiom ``premise`` and the negated ``conclusion`` with Skolem constants."""
    names = variables(conclusion.rhs, variables(conclusion.lhs))
    if len(names) > len(SKOLEM_NAMES):
        raise ValueError("too many variables to skolemize")
    sigma = {v: App(SKOLEM_NAMES[i], ()) for i, v in enumerate(names)}
    goal = Equation(apply_subst(sigma, conclusion.lhs), apply_subst(sigma, conclusion.rhs))
    return Problem.build([Equation(premise.lhs, premise.rhs)], [goal])


# ---------------------------------------------------------------------------
# text formats

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(\S))")


def parse_magma_equation(text: str) -> MagmaEquation:
    """Parse ``lhs = rhs`` where identifiers are variables and ``*`` is the operation.

    ``*`` associates to the left, so ``x*y*z`` is ``(x*y)*z``.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        tokens.append(m.group(1) or m.group(2))
        pos = m.end()
    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else None

    def atom() -> Term:
        nonlocal i
        tok = peek()
        if tok == "(":
            i += 1
            t = expr()
            if peek() != ")":
                raise TptpSyntaxError(f"expected ')' in {text!r}")
            i += 1
            return t
        if tok is None or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            raise TptpSyntaxError(f"unexpected {tok!r} in {text!r}")
        i += 1
        return Var(tok)

    def expr() -> Term:
        nonlocal i
        t = atom()
        while peek() == "*":
            i += 1
            t = App(MUL, (t, atom()))
        return t

    lhs = expr()
    if peek() != "=":
        raise TptpSyntaxError(f"expected '=' in {text!r}")
    i += 1
    rhs = expr()
    if peek() is not None:
        raise TptpSyntaxError(f"trailing input {peek()!r} in {text!r}")
    return MagmaEquation(lhs, rhs)


def format_equation_list(eqs=None, numbered: bool = True) -> str:
    eqs = enumerate_equations() if eqs is None else eqs
    if numbered:
        return "".join(f"{i}: {eq}\n" for i, eq in enumerate(eqs, 1))
    return "".join(f"{eq}\n" for eq in eqs)


def load_index_mapping(path: str | Path) -> dict[int, int]:
    """Read ``internal external`` integer pairs, one per line; ``#`` starts a comment."""
    mapping: dict[int, int] = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ValueError(f"{path}:{n}: expected two integers")
        mapping[int(parts[0])] = int(parts[1])
    return mapping
