"""Reading and writing the unit-equational subset of TPTP CNF, and TRS export.

Only ``cnf`` statements whose formula is a single equality or disequality
literal are accepted.  Variables (upper-case identifiers) are renamed per
clause to x, y, z, w, u, v, x6, ... in first-occurrence order.  The magma
operation is spelled ``mul`` in TPTP text and ``*`` internally; term syntax
also accepts infix ``*`` (left-associative).

A clause may carry the bare annotation ``oriented`` as its fourth argument,
``cnf(r1, plain, l = r, oriented).``, which marks the equation as a rule
directed left to right.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import FragmentError, TptpSyntaxError, UnorientedError
from .ordering import Comparison, OrderingConfig
from .terms import (
    MUL,
    App,
    Equation,
    Signature,
    Term,
    Var,
    canonical_names,
    is_ground,
    normalize_variables,
    variables,
)

TPTP_MUL = "mul"


@dataclass(frozen=True)
class Problem:
    """Universally quantified axioms plus ground disequations."""

    signature: Signature
    axioms: tuple[Equation, ...] = ()
    disequations: tuple[Equation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "axioms", tuple(self.axioms))
        object.__setattr__(self, "disequations", tuple(self.disequations))
        for d in self.disequations:
            if not d.is_ground():
                raise FragmentError(f"disequation {d.lhs} != {d.rhs} is not ground")

    @classmethod
    def build(cls, axioms: Iterable[Equation] = (), disequations: Iterable[Equation] = ()) -> Problem:
        """Infer the signature from symbol occurrences, in order."""
        axioms = tuple(axioms)
        disequations = tuple(disequations)
        sig = Signature.from_terms(t for e in axioms + disequations for t in (e.lhs, e.rhs))
        return cls(sig, axioms, disequations)


@dataclass(frozen=True)
class SaturationDump:
    equations: tuple[Equation, ...]
    orientation_hints: tuple[bool | None, ...] = ()
    disequations: tuple[Equation, ...] = ()
    skipped_lines: int = 0
    signature: Signature = field(default_factory=Signature)

    @property
    def all_oriented(self) -> bool:
        return bool(self.orientation_hints) and all(self.orientation_hints)


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>%[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<neq>!=)
  | (?P<punct>[(),.=~|&*\[\]:!?])
  | (?P<upper>[A-Z][A-Za-z0-9_]*)
  | (?P<lower>[a-z][A-Za-z0-9_]*)
  | (?P<dollar>\$\$?[a-z][A-Za-z0-9_]*)
  | (?P<quoted>'(?:[^'\\]|\\.)*')
  | (?P<number>[0-9]+)
  | (?P<dquoted>"(?:[^"\\]|\\.)*")
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, line_offset: int = 0) -> list[_Tok]:
    out: list[_Tok] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise TptpSyntaxError(
                f"unexpected character {text[pos]!r}", line + line_offset, pos - line_start + 1
            )
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "line_comment", "block_comment"):
            if kind == "neq":
                kind = "punct"
            out.append(_Tok(kind, chunk, line + line_offset, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    out.append(_Tok("eof", "", line + line_offset, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, tokens: list[_Tok]):
        self.toks = tokens
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str) -> TptpSyntaxError:
        return TptpSyntaxError(msg, self.cur.line, self.cur.col)

    def advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.cur.kind == "punct" and self.cur.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            got = self.cur.text or "end of input"
            raise self.error(f"expected {text!r}, found {got!r}")

    def name(self) -> str:
        tok = self.cur
        if tok.kind in ("lower", "number", "upper"):
            self.i += 1
            return tok.text
        if tok.kind == "quoted":
            self.i += 1
            return tok.text[1:-1]
        raise self.error(f"expected a name, found {tok.text!r}")

    # terms -----------------------------------------------------------------

    def term(self) -> Term:
        left = self.atom_term()
        while self.accept("*"):
            left = App(MUL, (left, self.atom_term()))
        return left

    def atom_term(self) -> Term:
        tok = self.cur
        if self.accept("("):
            t = self.term()
            self.expect(")")
            return t
        if tok.kind == "upper":
            self.i += 1
            return Var(tok.text)
        if tok.kind in ("lower", "quoted", "number"):
            name = self.name()
            if name == TPTP_MUL:
                name = MUL
            args: list[Term] = []
            if self.accept("("):
                args.append(self.term())
                while self.accept(","):
                    args.append(self.term())
                self.expect(")")
            return App(name, args)
        if tok.kind == "dollar":
            raise FragmentError(f"defined symbol {tok.text} is outside the unit-equational fragment")
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    # literals --------------------------------------------------------------

    def literal(self) -> tuple[bool, Equation]:
        """Return (positive, equation)."""
        if self.accept("~"):
            positive, eq = self.literal()
            return not positive, eq
        if self.cur.kind == "punct" and self.cur.text == "(":
            save = self.i
            self.i += 1
            try:
                res = self.literal()
                self.expect(")")
            except (TptpSyntaxError, FragmentError):
                self.i = save
            else:
                if self.cur.kind == "punct" and self.cur.text in ("=", "!=", "*"):
                    self.i = save
                else:
                    return res
        if self.cur.kind == "dollar":
            raise FragmentError(f"{self.cur.text} literal is outside the unit-equational fragment")
        start = self.cur
        lhs = self.term()
        if self.accept("="):
            return True, Equation(lhs, self.term())
        if self.accept("!="):
            return False, Equation(lhs, self.term())
        if isinstance(lhs, App):
            raise FragmentError(
                f"predicate {lhs.fn} at line {start.line}: only equality literals are supported"
            )
        raise self.error("expected '=' or '!='")


@dataclass
class _Clause:
    name: str
    role: str
    positive: bool
    equation: Equation
    oriented: bool | None
    line: int


def _parse_statement(p: _Parser) -> _Clause:
    tok = p.cur
    if tok.kind != "lower":
        raise p.error(f"expected a cnf statement, found {tok.text!r}")
    if tok.text in ("fof", "tff", "thf", "tcf"):
        raise FragmentError(
            f"{tok.text} input at line {tok.line} is not supported; clausify externally to cnf"
        )
    if tok.text == "include":
        raise FragmentError(f"include directive at line {tok.line} is not supported")
    if tok.text != "cnf":
        raise p.error(f"expected 'cnf', found {tok.text!r}")
    p.advance()
    p.expect("(")
    name = p.name()
    p.expect(",")
    role = p.name()
    p.expect(",")
    positive, eq = p.literal()
    if p.cur.kind == "punct" and p.cur.text in ("|", "&"):
        raise FragmentError(f"clause {name} at line {tok.line} is not a unit clause")
    oriented: bool | None = None
    if p.accept(","):
        oriented = _annotation(p)
    p.expect(")")
    p.expect(".")
    lhs, rhs = normalize_variables(eq.lhs, eq.rhs)
    return _Clause(name, role, positive, Equation(lhs, rhs), oriented, tok.line)


def _annotation(p: _Parser) -> bool | None:
    """Consume the annotation field; report whether it says ``oriented``."""
    depth = 0
    oriented = None
    while True:
        tok = p.cur
        if tok.kind == "eof":
            raise p.error("unterminated annotation")
        if tok.kind == "punct" and tok.text in "([":
            depth += 1
        elif tok.kind == "punct" and tok.text in ")]":
            if depth == 0:
                return oriented
            depth -= 1
        elif tok.kind == "lower" and tok.text == "oriented" and depth == 0:
            oriented = True
        p.advance()


def _clauses(text: str) -> list[_Clause]:
    p = _Parser(_tokenize(text))
    out = []
    while p.cur.kind != "eof":
        out.append(_parse_statement(p))
    return out


# ---------------------------------------------------------------------------
# public parsing API


def parse_problem(text: str) -> Problem:
    """Parse a unit-equational CNF problem.

    Positive unit clauses become axioms, negative ones disequations, which
    must be ground.
    """
    axioms: list[Equation] = []
    diseqs: list[Equation] = []
    for c in _clauses(text):
        if c.positive:
            if c.role == "conjecture":
                raise FragmentError(
                    f"clause {c.name}: give the negated conjecture as a disequation instead"
                )
            axioms.append(c.equation)
        else:
            if not c.equation.is_ground():
                raise FragmentError(f"disequation {c.name} at line {c.line} is not ground")
            diseqs.append(c.equation)
    return Problem.build(axioms, diseqs)


_STATEMENT_START = re.compile(r"^\s*cnf\s*\(")


def parse_saturation(text: str) -> SaturationDump:
    """Parse a saturated clause set as printed by a prover.

    Lines outside ``cnf`` statements (status output, banners) are skipped
    and counted; blank and ``%`` comment lines are not counted.  A ``cnf``
    statement that fails to parse is skipped as well, but a well-formed
    clause outside the fragment still raises :class:`FragmentError`.
    """
    equations: list[Equation] = []
    hints: list[bool | None] = []
    diseqs: list[Equation] = []
    skipped = 0
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i]
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            i += 1
            continue
        if not _STATEMENT_START.match(line):
            skipped += 1
            i += 1
            continue
        j = i
        chunk = line
        while not _complete_statement(chunk) and j + 1 < len(lines):
            j += 1
            chunk += "\n" + lines[j]
        try:
            p = _Parser(_tokenize(chunk, line_offset=i))
            clause = _parse_statement(p)
            if p.cur.kind != "eof":
                raise p.error("trailing text after statement")
        except TptpSyntaxError:
            skipped += j - i + 1
            i = j + 1
            continue
        if clause.positive:
            equations.append(clause.equation)
            hints.append(clause.oriented)
        else:
            diseqs.append(clause.equation)
        i = j + 1
    sig = Signature.from_terms(t for e in equations + diseqs for t in (e.lhs, e.rhs))
    return SaturationDump(tuple(equations), tuple(hints), tuple(diseqs), skipped, sig)


def _complete_statement(chunk: str) -> bool:
    depth = 0
    for ch in chunk:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
    return depth <= 0 and chunk.rstrip().endswith(".")


def parse_term(text: str) -> Term:
    """Parse a single term; upper-case identifiers are variables."""
    p = _Parser(_tokenize(text))
    t = p.term()
    if p.cur.kind != "eof":
        raise p.error(f"unexpected {p.cur.text!r} after term")
    return t


def parse_equation(text: str) -> Equation:
    """Parse ``l = r`` with variables renamed to the internal names."""
    p = _Parser(_tokenize(text))
    positive, eq = p.literal()
    if p.cur.kind != "eof":
        raise p.error(f"unexpected {p.cur.text!r} after equation")
    if not positive:
        raise FragmentError("expected an equation, got a disequation")
    lhs, rhs = normalize_variables(eq.lhs, eq.rhs)
    return Equation(lhs, rhs)


# ---------------------------------------------------------------------------
# writing

_LOWER_WORD = re.compile(r"^[a-z][A-Za-z0-9_]*$")


def _tptp_symbol(name: str) -> str:
    if name == MUL:
        return TPTP_MUL
    if _LOWER_WORD.match(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def tptp_term(t: Term, var_names: dict[str, str]) -> str:
    if isinstance(t, Var):
        return var_names[t.name]
    name = _tptp_symbol(t.fn)
    if not t.args:
        return name
    return f"{name}({','.join(tptp_term(a, var_names) for a in t.args)})"


def _tptp_vars(eq: Equation) -> dict[str, str]:
    order = eq.variables()
    return {v: n.upper() for v, n in zip(order, canonical_names(len(order)))}


def _cnf_line(name: str, role: str, eq: Equation, positive: bool, annotation: str = "") -> str:
    names = _tptp_vars(eq)
    op = "=" if positive else "!="
    body = f"{tptp_term(eq.lhs, names)} {op} {tptp_term(eq.rhs, names)}"
    extra = f", {annotation}" if annotation else ""
    return f"cnf({name}, {role}, {body}{extra})."


def write_problem(p: Problem) -> str:
    lines = [_cnf_line(f"ax{i}", "axiom", eq, True) for i, eq in enumerate(p.axioms, 1)]
    lines += [
        _cnf_line(f"goal{i}", "negated_conjecture", eq, False)
        for i, eq in enumerate(p.disequations, 1)
    ]
    return "".join(line + "\n" for line in lines)


def write_saturation(equations: Sequence[Equation], oriented: bool = False) -> str:
    annotation = "oriented" if oriented else ""
    return "".join(
        _cnf_line(f"e{i}", "plain", eq, True, annotation) + "\n" for i, eq in enumerate(equations, 1)
    )


# ---------------------------------------------------------------------------
# TRS export

_TRS_IDENT = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
_TRS_ALIASES = {MUL: "m"}


def trs_aliases(names: Iterable[str]) -> dict[str, str]:
    """Map every symbol name to an identifier legal in the TRS format."""
    names = list(dict.fromkeys(names))
    taken = {n for n in names if _TRS_IDENT.match(n)}
    out: dict[str, str] = {}
    for n in names:
        if _TRS_IDENT.match(n):
            out[n] = n
            continue
        base = _TRS_ALIASES.get(n) or ("s" + "".join(f"{ord(c):x}" for c in n))
        alias = base
        k = 1
        while alias in taken:
            alias = f"{base}{k}"
            k += 1
        taken.add(alias)
        out[n] = alias
    return out


def _trs_term(t: Term, aliases: dict[str, str]) -> str:
    if isinstance(t, Var):
        return t.name
    name = aliases[t.fn]
    if not t.args:
        return name
    return f"{name}({','.join(_trs_term(a, aliases) for a in t.args)})"


def write_trs(rules: Sequence[Equation], ordering: OrderingConfig | None = None) -> str:
    """Emit ``rules`` in the (VAR ...)(RULES ...) format of termination tools.

    Each rule must be a proper rewrite rule: non-variable left side and no
    variable on the right that is missing on the left.  When ``ordering``
    is given every rule must also satisfy ``l > r`` under it.
    """
    for i, r in enumerate(rules):
        if isinstance(r.lhs, Var) or not set(variables(r.rhs)) <= set(variables(r.lhs)):
            raise UnorientedError(
                f"rule {i} ({r}) is not a rewrite rule; run the pre-orderedness check "
                "or an orientation search first"
            )
        if ordering is not None and ordering.compare(r.lhs, r.rhs) is not Comparison.GREATER:
            raise UnorientedError(
                f"rule {i} ({r}) does not decrease under {ordering.describe()}; run the "
                "pre-orderedness check or an orientation search first"
            )
    symbols: list[str] = []
    var_order: list[str] = []
    for r in rules:
        for t in (r.lhs, r.rhs):
            variables(t, var_order)
            _collect_symbols(t, symbols)
    aliases = trs_aliases(symbols)
    lines = []
    renamed = {k: v for k, v in aliases.items() if k != v}
    if renamed:
        table = ", ".join(f"{k} = {v}" for k, v in renamed.items())
        lines.append(f"(COMMENT symbol aliases: {table})")
    lines.append("(VAR " + " ".join(var_order) + ")" if var_order else "(VAR)")
    lines.append("(RULES")
    for r in rules:
        lines.append(f"  {_trs_term(r.lhs, aliases)} -> {_trs_term(r.rhs, aliases)}")
    lines.append(")")
    return "\n".join(lines) + "\n"


def _collect_symbols(t: Term, out: list[str]) -> None:
    if isinstance(t, App):
        if t.fn not in out:
            out.append(t.fn)
        for a in t.args:
            _collect_symbols(a, out)


__all__ = [
    "Problem",
    "SaturationDump",
    "parse_problem",
    "parse_saturation",
    "parse_term",
    "parse_equation",
    "write_problem",
    "write_saturation",
    "write_trs",
    "trs_aliases",
    "is_ground",
]
