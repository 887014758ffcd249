"""Backtracking search for finite models of small unit-equational problems.

All table cells live in one flat list: constants first, then the cells of
each function symbol in declaration order, argument tuples in row-major
order.  Cells are filled in that order, values ascending, with the first
constant fixed to 0.  After every assignment each axiom instance and
disequation whose cells are all known is re-checked, and a violation
prunes the branch.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field

from .errors import SearchLimitError
from .terms import Signature, Term, Var, format_term
from .tptp import Problem

DEFAULT_CEILING = 4
HARD_CEILING = 6

UNKNOWN = -1


@dataclass(frozen=True)
class FiniteInterpretation:
    """A finite structure over the domain ``0..size-1``.

    ``tables`` maps each function symbol to a nested list indexed by its
    arguments (a matrix for binary symbols); ``constants`` maps constant
    names to elements.
    """

    size: int
    tables: dict[str, list]
    constants: dict[str, int]

    def __post_init__(self):
        for name, value in self.constants.items():
            if not 0 <= value < self.size:
                raise ValueError(f"constant {name} = {value} outside the domain")
        for name, table in self.tables.items():
            for v in _flatten(table):
                if not 0 <= v < self.size:
                    raise ValueError(f"table of {name} has entry {v} outside the domain")

    def apply(self, fn: str, args: tuple[int, ...]) -> int:
        if not args:
            return self.constants[fn]
        cell = self.tables[fn]
        for a in args:
            cell = cell[a]
        return cell

    def evaluate(self, t: Term, env: dict[str, int] | None = None) -> int:
        if isinstance(t, Var):
            return env[t.name]
        return self.apply(t.fn, tuple(self.evaluate(a, env) for a in t.args))

    def to_dict(self) -> dict:
        return {"size": self.size, "constants": dict(self.constants), "tables": dict(self.tables)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> FiniteInterpretation:
        return cls(data["size"], dict(data["tables"]), dict(data["constants"]))

    def format(self) -> str:
        lines = [f"domain size {self.size}"]
        for name, value in self.constants.items():
            lines.append(f"{name} = {value}")
        for name, table in self.tables.items():
            lines.extend(_format_table(name, table, self.size))
        return "\n".join(lines)


def _flatten(table) -> list[int]:
    if isinstance(table, list):
        return [v for row in table for v in _flatten(row)]
    return [table]


def _format_table(name: str, table, n: int) -> list[str]:
    depth = 0
    probe = table
    while isinstance(probe, list):
        depth += 1
        probe = probe[0] if probe else 0
    if depth == 2:
        width = len(str(n - 1))
        head = " " * (width + 1) + "| " + " ".join(str(j).rjust(width) for j in range(n))
        lines = [f"{name}:", head, "-" * len(head)]
        for i, row in enumerate(table):
            lines.append(f"{str(i).rjust(width)} | " + " ".join(str(v).rjust(width) for v in row))
        return lines
    if depth == 1:
        return [f"{name}: " + " ".join(f"{i}->{v}" for i, v in enumerate(table))]
    lines = [f"{name}:"]
    for args in itertools.product(range(n), repeat=depth):
        cell = table
        for a in args:
            cell = cell[a]
        lines.append(f"  {name}({','.join(map(str, args))}) = {cell}")
    return lines


# ---------------------------------------------------------------------------
# search


class _Layout:
    """Offsets of every symbol's cells in the flat cell list."""

    def __init__(self, sig: Signature, n: int):
        self.n = n
        self.offsets: dict[str, int] = {}
        self.arity: dict[str, int] = {}
        pos = 0
        for sym in sig.constants() + sig.functions():
            self.offsets[sym.name] = pos
            self.arity[sym.name] = sym.arity
            pos += n**sym.arity
        self.total = pos
        self.first_constant = 0 if sig.constants() else None

    def compile(self, t: Term, names: list[str], cells: list[int]):
        """A closure giving the value of ``t`` under an assignment, or UNKNOWN."""
        n = self.n
        if isinstance(t, Var):
            i = names.index(t.name)
            return lambda env: env[i]
        off = self.offsets[t.fn]
        if not t.args:
            return lambda env: cells[off]
        if len(t.args) == 1:
            arg = self.compile(t.args[0], names, cells)

            def unary(env):
                a = arg(env)
                return UNKNOWN if a < 0 else cells[off + a]

            return unary
        if len(t.args) == 2:
            left = self.compile(t.args[0], names, cells)
            right = self.compile(t.args[1], names, cells)

            def binary(env):
                a = left(env)
                if a < 0:
                    return UNKNOWN
                b = right(env)
                return UNKNOWN if b < 0 else cells[off + a * n + b]

            return binary
        parts = [self.compile(a, names, cells) for a in t.args]

        def general(env):
            idx = 0
            for p in parts:
                v = p(env)
                if v < 0:
                    return UNKNOWN
                idx = idx * n + v
            return cells[off + idx]

        return general

    def interpretation(self, cells: list[int]) -> FiniteInterpretation:
        n = self.n
        constants, tables = {}, {}
        for name, off in self.offsets.items():
            k = self.arity[name]
            if k == 0:
                constants[name] = cells[off]
            else:
                tables[name] = _nest(cells[off : off + n**k], n, k)
        return FiniteInterpretation(n, tables, constants)


def _nest(flat: list[int], n: int, k: int):
    if k == 1:
        return list(flat)
    step = n ** (k - 1)
    return [_nest(flat[i * step : (i + 1) * step], n, k - 1) for i in range(n)]


def _check_size(n: int, ceiling: int) -> None:
    if n < 1:
        raise ValueError("domain size must be positive")
    if ceiling > HARD_CEILING:
        raise SearchLimitError(f"ceiling {ceiling} is above the hard limit {HARD_CEILING}")
    if n > ceiling:
        raise SearchLimitError(f"domain size {n} is above the ceiling {ceiling}")
    if n > DEFAULT_CEILING:
        warnings.warn(f"exhaustive search at size {n} may take very long", RuntimeWarning, stacklevel=3)


@dataclass
class SearchStats:
    nodes: int = 0


def search_finite_model(
    p: Problem, n: int, ceiling: int = DEFAULT_CEILING, stats: SearchStats | None = None
) -> FiniteInterpretation | None:
    """The first model of ``p`` of size ``n`` in the fixed cell order, or None."""
    _check_size(n, ceiling)
    stats = stats if stats is not None else SearchStats()
    layout = _Layout(p.signature, n)
    cells = [UNKNOWN] * layout.total
    checks = []
    for ax in p.axioms:
        names = ax.variables()
        envs = list(itertools.product(range(n), repeat=len(names)))
        checks.append(
            (True, layout.compile(ax.lhs, names, cells), layout.compile(ax.rhs, names, cells), envs)
        )
    for d in p.disequations:
        checks.append((False, layout.compile(d.lhs, [], cells), layout.compile(d.rhs, [], cells), [()]))

    def consistent() -> bool:
        for positive, lhs, rhs, envs in checks:
            for env in envs:
                a = lhs(env)
                if a < 0:
                    continue
                b = rhs(env)
                if b < 0:
                    continue
                if (a != b) if positive else (a == b):
                    return False
        return True

    if not consistent():
        return None

    def extend(k: int) -> bool:
        if k == layout.total:
            return True
        values = (0,) if k == layout.first_constant else range(n)
        for v in values:
            cells[k] = v
            stats.nodes += 1
            if consistent() and extend(k + 1):
                return True
        cells[k] = UNKNOWN
        return False

    if extend(0):
        return layout.interpretation(cells)
    return None


@dataclass
class FiniteReport:
    max_size: int
    results: list[tuple[int, FiniteInterpretation | None]] = field(default_factory=list)

    @property
    def witness(self) -> FiniteInterpretation | None:
        for _, m in self.results:
            if m is not None:
                return m
        return None

    def summary(self) -> str:
        lines = []
        for n, m in self.results:
            lines.append(f"size {n}: " + ("model found" if m is not None else "no model"))
        if self.witness is None:
            lines.append(f"no model up to size {self.max_size}")
        else:
            lines.append(self.witness.format())
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "max_size": self.max_size,
            "sizes": [
                {"size": n, "model": m.to_dict() if m is not None else None} for n, m in self.results
            ],
            "verdict": "model found" if self.witness is not None else f"no model up to size {self.max_size}",
        }


def no_finite_model_up_to(p: Problem, max_size: int, ceiling: int = DEFAULT_CEILING) -> FiniteReport:
    """Search every size from 1 to ``max_size``.

    An empty result is evidence about these sizes only, not a proof that no
    finite model exists.
    """
    _check_size(max_size, ceiling)
    report = FiniteReport(max_size)
    for n in range(1, max_size + 1):
        report.results.append((n, search_finite_model(p, n, ceiling)))
    return report


# ---------------------------------------------------------------------------
# independent verification


def violations(p: Problem, m: FiniteInterpretation) -> list[str]:
    """Every axiom instance and disequation that ``m`` falsifies.

    Evaluation is recursive over the nested tables and shares no code with
    the search.
    """
    missing = [
        s.name
        for s in p.signature
        if (s.arity == 0 and s.name not in m.constants) or (s.arity > 0 and s.name not in m.tables)
    ]
    if missing:
        return [f"no interpretation for {', '.join(missing)}"]
    out = []
    for ax in p.axioms:
        names = ax.variables()
        for values in itertools.product(range(m.size), repeat=len(names)):
            env = dict(zip(names, values))
            if m.evaluate(ax.lhs, env) != m.evaluate(ax.rhs, env):
                out.append(f"axiom {ax} fails at {env}")
    for d in p.disequations:
        if m.evaluate(d.lhs) == m.evaluate(d.rhs):
            out.append(f"disequation {format_term(d.lhs)} != {format_term(d.rhs)} fails")
    return out


def is_model(p: Problem, m: FiniteInterpretation) -> bool:
    return not violations(p, m)
