"""Reduction orderings on terms: LPO and KBO.

Both are total on ground terms once the precedence is total, which is what
ordered rewriting needs.  :func:`find_orientation` searches for a precedence
(and, for KBO, small weights) under which every rule of a system decreases.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import OrderingError, SignatureError
from .terms import MUL, App, Equation, Signature, Term, Var, occurs, var_counts, variables


class Comparison(enum.Enum):
    GREATER = ">"
    LESS = "<"
    EQUAL = "="
    INCOMPARABLE = "?"

    def flip(self) -> Comparison:
        return _FLIP[self]


_FLIP = {
    Comparison.GREATER: Comparison.LESS,
    Comparison.LESS: Comparison.GREATER,
    Comparison.EQUAL: Comparison.EQUAL,
    Comparison.INCOMPARABLE: Comparison.INCOMPARABLE,
}


def _symbol_name(text: str) -> str:
    return MUL if text == "mul" else text


@dataclass(frozen=True)
class Precedence:
    """Total strict order on symbol names, listed from greatest to least."""

    order: tuple[str, ...]
    rank: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        order = tuple(self.order)
        object.__setattr__(self, "order", order)
        if len(set(order)) != len(order):
            raise OrderingError(f"precedence lists a symbol twice: {' > '.join(order)}")
        n = len(order)
        object.__setattr__(self, "rank", {name: n - i for i, name in enumerate(order)})

    @classmethod
    def parse(cls, text: str) -> Precedence:
        """Parse ``"f > b > a"`` (whitespace optional).

        ``mul`` names the binary operation ``*``, as in TPTP input.
        """
        names = [_symbol_name(p.strip()) for p in text.split(">")]
        if any(not n for n in names):
            raise OrderingError(f"malformed precedence {text!r}")
        return cls(tuple(names))

    def __contains__(self, name: str) -> bool:
        return name in self.rank

    def __str__(self):
        return " > ".join(self.order)

    def greater(self, f: str, g: str) -> bool:
        try:
            return self.rank[f] > self.rank[g]
        except KeyError as exc:
            raise OrderingError(f"symbol {exc.args[0]} is missing from the precedence") from None

    def extended(self, names: Iterable[str]) -> Precedence:
        """Append unknown ``names`` below every listed symbol."""
        extra = [n for n in names if n not in self.rank]
        return Precedence(self.order + tuple(dict.fromkeys(extra))) if extra else self


@dataclass(frozen=True)
class KboConfig:
    """Weights for KBO; admissibility is validated against the arities."""

    precedence: Precedence
    weights: Mapping[str, int]
    variable_weight: int = 1
    arities: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "weights", dict(self.weights))
        object.__setattr__(self, "arities", dict(self.arities))
        if self.variable_weight <= 0:
            raise OrderingError("variable weight must be positive")
        zero_unary = []
        for name, arity in self.arities.items():
            w = self.weights.get(name)
            if w is None:
                raise OrderingError(f"symbol {name} has no KBO weight")
            if w < 0:
                raise OrderingError(f"negative weight for {name}")
            if arity == 0 and w < self.variable_weight:
                raise OrderingError(
                    f"constant {name} has weight {w} below the variable weight {self.variable_weight}"
                )
            if w == 0:
                if arity != 1:
                    raise OrderingError(f"only a unary symbol may have weight 0, not {name}")
                zero_unary.append(name)
        if len(zero_unary) > 1:
            raise OrderingError(f"more than one unary symbol of weight 0: {zero_unary}")
        if zero_unary:
            f = zero_unary[0]
            if any(g != f and not self.precedence.greater(f, g) for g in self.arities):
                raise OrderingError(f"weight-0 unary symbol {f} must be precedence-maximal")

    def __hash__(self):
        return hash((self.precedence, tuple(sorted(self.weights.items())), self.variable_weight))


@dataclass(frozen=True)
class OrderingConfig:
    kind: str
    precedence: Precedence
    kbo: KboConfig | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in ("kbo", "lpo"):
            raise OrderingError(f"unknown ordering kind {self.kind!r}")
        if kind == "kbo" and self.kbo is None:
            raise OrderingError("KBO ordering requires weights")

    @classmethod
    def lpo(cls, precedence: Precedence | str | Sequence[str]) -> OrderingConfig:
        return cls("lpo", _as_precedence(precedence))

    @classmethod
    def kbo_config(
        cls,
        precedence: Precedence | str | Sequence[str],
        signature: Signature,
        weights: Mapping[str, int] | None = None,
        variable_weight: int = 1,
    ) -> OrderingConfig:
        prec = _as_precedence(precedence)
        w = {name: 1 for name in prec.order}
        w.update((s.name, 1) for s in signature)
        if weights:
            w.update(weights)
        arities = {s.name: s.arity for s in signature}
        return cls("kbo", prec, KboConfig(prec, w, variable_weight, arities))

    def describe(self) -> str:
        text = f"{self.kind.upper()} {self.precedence}"
        if self.kbo is not None and any(v != 1 for v in self.kbo.weights.values()):
            ws = ", ".join(f"{k}:{v}" for k, v in self.kbo.weights.items())
            text += f" weights {ws}"
        return text

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "precedence": list(self.precedence.order)}
        if self.kbo is not None:
            out["weights"] = dict(self.kbo.weights)
            out["variable_weight"] = self.kbo.variable_weight
        return out

    def covers(self, names: Iterable[str]) -> None:
        missing = [n for n in names if n not in self.precedence]
        if missing:
            raise OrderingError(f"symbols missing from the precedence: {', '.join(missing)}")

    def compare(self, s: Term, t: Term) -> Comparison:
        key = (s, t)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if s == t:
            res = Comparison.EQUAL
        elif self.greater(s, t):
            res = Comparison.GREATER
        elif self.greater(t, s):
            res = Comparison.LESS
        else:
            res = Comparison.INCOMPARABLE
        if len(self._cache) > 200_000:
            self._cache.clear()
        self._cache[key] = res
        return res

    def greater(self, s: Term, t: Term) -> bool:
        if self.kind == "lpo":
            return _lpo_gt(self.precedence, s, t)
        return _kbo_gt(self.kbo, s, t)


def _as_precedence(p) -> Precedence:
    if isinstance(p, Precedence):
        return p
    if isinstance(p, str):
        return Precedence.parse(p)
    return Precedence(tuple(p))


def compare(cfg: OrderingConfig, s: Term, t: Term) -> Comparison:
    return cfg.compare(s, t)


def default_ordering(signature: Signature) -> OrderingConfig:
    """KBO, unit weights, precedence = reverse declaration order."""
    prec = Precedence(tuple(reversed(signature.names)))
    return OrderingConfig.kbo_config(prec, signature)


# ---------------------------------------------------------------------------
# LPO


def _lpo_gt(prec: Precedence, s: Term, t: Term) -> bool:
    if isinstance(s, Var):
        return False
    if isinstance(t, Var):
        return occurs(t.name, s)
    for si in s.args:
        if si == t or _lpo_gt(prec, si, t):
            return True
    if s.fn == t.fn and len(s.args) == len(t.args):
        for i, (si, ti) in enumerate(zip(s.args, t.args)):
            if si != ti:
                if not _lpo_gt(prec, si, ti):
                    return False
                return all(_lpo_gt(prec, s, tj) for tj in t.args[i + 1:])
        return False
    if prec.greater(s.fn, t.fn):
        return all(_lpo_gt(prec, s, tj) for tj in t.args)
    return False


# ---------------------------------------------------------------------------
# KBO


def _weight(kbo: KboConfig, t: Term) -> int:
    if isinstance(t, Var):
        return kbo.variable_weight
    try:
        w = kbo.weights[t.fn]
    except KeyError:
        raise OrderingError(f"symbol {t.fn} has no KBO weight") from None
    return w + sum(_weight(kbo, a) for a in t.args)


def _kbo_gt(kbo: KboConfig, s: Term, t: Term) -> bool:
    if s == t or isinstance(s, Var):
        return False
    if isinstance(t, Var):
        return occurs(t.name, s)
    sc = var_counts(s)
    for name, n in var_counts(t).items():
        if sc.get(name, 0) < n:
            return False
    ws, wt = _weight(kbo, s), _weight(kbo, t)
    if ws != wt:
        return ws > wt
    if s.fn != t.fn or len(s.args) != len(t.args):
        return kbo.precedence.greater(s.fn, t.fn)
    for si, ti in zip(s.args, t.args):
        if si != ti:
            return _kbo_gt(kbo, si, ti)
    return False


# ---------------------------------------------------------------------------
# derived operations


def extend_ordering(cfg: OrderingConfig, signature: Signature) -> OrderingConfig:
    """Add symbols of ``signature`` missing from ``cfg`` below all others.

    Existing comparisons are unchanged; new symbols get KBO weight 1.
    """
    missing = [n for n in signature.names if n not in cfg.precedence]
    if not missing:
        return cfg
    prec = cfg.precedence.extended(missing)
    if cfg.kind == "lpo":
        return OrderingConfig.lpo(prec)
    return OrderingConfig.kbo_config(prec, signature, dict(cfg.kbo.weights), cfg.kbo.variable_weight)


def smallest_constant(sig: Signature, cfg: OrderingConfig) -> App:
    constants = [App(c.name, ()) for c in sig.constants()]
    if not constants:
        raise SignatureError("signature has no constants")
    best = constants[0]
    for c in constants[1:]:
        if cfg.compare(best, c) is Comparison.GREATER:
            best = c
    return best


def is_reduction_orientation(cfg: OrderingConfig, rules: Iterable[Equation | tuple[Term, Term]]) -> bool:
    """True iff every rule ``l -> r`` satisfies ``l > r``."""
    for rule in rules:
        l, r = (rule.lhs, rule.rhs) if isinstance(rule, Equation) else rule
        if cfg.compare(l, r) is not Comparison.GREATER:
            return False
    return True


@dataclass(frozen=True)
class OrientationResult:
    config: OrderingConfig | None
    exhausted: bool = False
    candidates_tried: int = 0

    @property
    def found(self) -> bool:
        return self.config is not None


EXHAUSTIVE_LIMIT = 7


def find_orientation(
    rules: Sequence[Equation],
    kind: str = "lpo",
    budget: int = 200_000,
    signature: Signature | None = None,
) -> OrientationResult:
    """Search for an ordering of ``kind`` under which every rule decreases.

    Signatures of at most seven symbols are searched exhaustively over all
    precedences.  Larger ones are solved by collecting, per rule, the
    alternative sets of precedence facts that make it decrease, and picking a
    consistent combination by backtracking.  A result with ``config=None``
    and ``exhausted=True`` means the budget ran out; absence is never a proof
    that no orientation of another kind exists.
    """
    kind = kind.lower()
    rules = list(rules)
    sig = signature if signature is not None else Signature()
    sig = sig.extend(t for r in rules for t in (r.lhs, r.rhs))
    for r in rules:
        # a rule whose right side has a variable missing on the left never decreases
        if isinstance(r.lhs, Var) or not set(variables(r.rhs)) <= set(variables(r.lhs)):
            return OrientationResult(None)
    if kind == "lpo":
        return _search_weights(rules, sig, [None], budget)
    if kind == "kbo":
        return _search_weights(rules, sig, _weight_candidates(sig), budget)
    raise OrderingError(f"unknown ordering kind {kind!r}")


def _weight_candidates(sig: Signature):
    names = sig.names
    yield {n: 1 for n in names}
    for total in range(1, 2 * len(names) + 1):
        for combo in itertools.product((1, 2, 3), repeat=len(names)):
            if sum(combo) - len(names) == total:
                yield dict(zip(names, combo))


def _search_weights(rules, sig: Signature, weight_iter, budget: int) -> OrientationResult:
    tried = 0
    for weights in weight_iter:
        if tried >= budget:
            return OrientationResult(None, exhausted=True, candidates_tried=tried)
        if len(sig) <= EXHAUSTIVE_LIMIT:
            res = _exhaustive(rules, sig, weights, budget - tried)
        else:
            res = _constraint_search(rules, sig, weights, budget - tried)
        tried += res.candidates_tried
        if res.found or res.exhausted:
            return OrientationResult(res.config, res.exhausted, tried)
    return OrientationResult(None, exhausted=False, candidates_tried=tried)


def _make_config(order: Sequence[str], sig: Signature, weights) -> OrderingConfig | None:
    prec = Precedence(tuple(order))
    if weights is None:
        return OrderingConfig.lpo(prec)
    try:
        return OrderingConfig.kbo_config(prec, sig, weights)
    except OrderingError:
        return None


def _exhaustive(rules, sig: Signature, weights, budget: int) -> OrientationResult:
    tried = 0
    for perm in itertools.permutations(sig.names):
        if tried >= budget:
            return OrientationResult(None, exhausted=True, candidates_tried=tried)
        tried += 1
        cfg = _make_config(perm, sig, weights)
        if cfg is not None and is_reduction_orientation(cfg, rules):
            return OrientationResult(cfg, candidates_tried=tried)
    return OrientationResult(None, candidates_tried=tried)


# Disjunctive normal forms of precedence facts: a list of alternatives, each a
# frozenset of (greater, smaller) pairs.  TRUE is [frozenset()], FALSE is [].
_TRUE = [frozenset()]
_FALSE: list = []
_DNF_CAP = 512


class _BudgetOut(Exception):
    pass


def _dnf_or(a, b):
    return _absorb(a + b)


def _dnf_and(a, b):
    if not a or not b:
        return []
    out = []
    for x in a:
        for y in b:
            z = x | y
            if _consistent(z):
                out.append(z)
    return _absorb(out)


def _absorb(alts):
    alts = sorted(set(alts), key=lambda a: (len(a), sorted(a)))
    kept = []
    for a in alts:
        if not any(k <= a for k in kept):
            kept.append(a)
    if len(kept) > _DNF_CAP:
        raise _BudgetOut
    return kept


def _consistent(pairs) -> bool:
    graph: dict[str, set[str]] = {}
    for f, g in pairs:
        if f == g:
            return False
        graph.setdefault(f, set()).add(g)
    return not _has_cycle(graph)


def _has_cycle(graph: dict[str, set[str]]) -> bool:
    state: dict[str, int] = {}

    def visit(n):
        state[n] = 1
        for m in graph.get(n, ()):
            st = state.get(m, 0)
            if st == 1 or (st == 0 and visit(m)):
                return True
        state[n] = 2
        return False

    return any(state.get(n, 0) == 0 and visit(n) for n in list(graph))


def _lpo_dnf(s: Term, t: Term, memo: dict):
    key = (s, t)
    if key in memo:
        return memo[key]
    if isinstance(s, Var):
        res = _FALSE
    elif isinstance(t, Var):
        res = _TRUE if occurs(t.name, s) else _FALSE
    else:
        res = []
        for si in s.args:
            if si == t:
                res = _TRUE
                break
            res = _dnf_or(res, _lpo_dnf(si, t, memo))
        if res != _TRUE:
            if s.fn == t.fn and len(s.args) == len(t.args):
                for i, (si, ti) in enumerate(zip(s.args, t.args)):
                    if si != ti:
                        part = _lpo_dnf(si, ti, memo)
                        for tj in t.args[i + 1:]:
                            part = _dnf_and(part, _lpo_dnf(s, tj, memo))
                        res = _dnf_or(res, part)
                        break
            else:
                part = [frozenset({(s.fn, t.fn)})]
                for tj in t.args:
                    part = _dnf_and(part, _lpo_dnf(s, tj, memo))
                res = _dnf_or(res, part)
    memo[key] = res
    return res


def _kbo_dnf(weights, s: Term, t: Term):
    if s == t or isinstance(s, Var):
        return _FALSE
    if isinstance(t, Var):
        return _TRUE if occurs(t.name, s) else _FALSE
    sc = var_counts(s)
    if any(sc.get(n, 0) < k for n, k in var_counts(t).items()):
        return _FALSE

    def weight(u):
        return 1 if isinstance(u, Var) else weights[u.fn] + sum(weight(a) for a in u.args)

    ws, wt = weight(s), weight(t)
    if ws != wt:
        return _TRUE if ws > wt else _FALSE
    if s.fn != t.fn or len(s.args) != len(t.args):
        return [frozenset({(s.fn, t.fn)})]
    for si, ti in zip(s.args, t.args):
        if si != ti:
            return _kbo_dnf(weights, si, ti)
    return _FALSE


def _constraint_search(rules, sig: Signature, weights, budget: int) -> OrientationResult:
    try:
        if weights is None:
            memo: dict = {}
            options = [_lpo_dnf(r.lhs, r.rhs, memo) for r in rules]
        else:
            options = [_kbo_dnf(weights, r.lhs, r.rhs) for r in rules]
    except _BudgetOut:
        return OrientationResult(None, exhausted=True, candidates_tried=1)
    if any(not alts for alts in options):
        return OrientationResult(None, candidates_tried=1)
    # most constrained rules first
    order = sorted(range(len(options)), key=lambda i: len(options[i]))
    tried = 0

    def search(k: int, facts: frozenset):
        nonlocal tried
        if k == len(order):
            return facts
        for alt in options[order[k]]:
            tried += 1
            if tried > budget:
                raise _BudgetOut
            merged = facts | alt
            if merged is not facts and not _consistent(merged):
                continue
            found = search(k + 1, merged)
            if found is not None:
                return found
        return None

    try:
        facts = search(0, frozenset())
    except _BudgetOut:
        return OrientationResult(None, exhausted=True, candidates_tried=tried)
    if facts is None:
        return OrientationResult(None, candidates_tried=tried)
    cfg = _make_config(_linearize(facts, sig.names), sig, weights)
    if cfg is None or not is_reduction_orientation(cfg, rules):
        return OrientationResult(None, candidates_tried=tried)
    return OrientationResult(cfg, candidates_tried=tried)


def _linearize(facts, names: Sequence[str]) -> list[str]:
    """Topological order (greatest first), ties broken by declaration order."""
    below: dict[str, set[str]] = {n: set() for n in names}
    above_count = {n: 0 for n in names}
    for f, g in facts:
        if g not in below[f]:
            below[f].add(g)
            above_count[g] += 1
    out: list[str] = []
    ready = [n for n in names if above_count[n] == 0]
    while ready:
        n = ready.pop(0)
        out.append(n)
        for m in names:
            if m in below[n]:
                above_count[m] -= 1
                if above_count[m] == 0:
                    ready.append(m)
        ready.sort(key=names.index)
    return out


# ---------------------------------------------------------------------------
# configuration files

_KEY_VALUE = re.compile(r"^\s*([A-Za-z_]+)\s*[=:]\s*(.*?)\s*$")


def parse_ordering_text(text: str, signature: Signature | None = None) -> OrderingConfig:
    """Read the key-value ordering format.

    Recognized keys: ``kind`` (kbo or lpo), ``precedence`` (``f > g > a``),
    ``weights`` (``f:2, a:1``) and ``variable_weight``.  Lines starting with
    ``#`` are comments.  Symbols of ``signature`` missing from a KBO weight
    list get weight 1.
    """
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        m = _KEY_VALUE.match(line)
        if not m:
            raise OrderingError(f"ordering config line {lineno}: expected key = value")
        values[m.group(1).lower()] = m.group(2)
    kind = values.pop("kind", "kbo").lower()
    if "precedence" not in values:
        raise OrderingError("ordering config needs a precedence")
    prec = Precedence.parse(values.pop("precedence"))
    weights = parse_weights(values.pop("weights", ""))
    var_weight = int(values.pop("variable_weight", "1"))
    if values:
        raise OrderingError(f"unknown ordering config keys: {', '.join(sorted(values))}")
    if kind == "lpo":
        return OrderingConfig.lpo(prec)
    sig = signature if signature is not None else Signature()
    return OrderingConfig.kbo_config(prec, sig, weights, var_weight)


def parse_weights(text: str) -> dict[str, int]:
    weights: dict[str, int] = {}
    for item in filter(None, (p.strip() for p in text.split(","))):
        name, sep, value = item.rpartition(":")
        if not sep or not name.strip():
            raise OrderingError(f"malformed weight entry {item!r}")
        try:
            weights[_symbol_name(name.strip())] = int(value)
        except ValueError:
            raise OrderingError(f"weight of {name.strip()} is not an integer") from None
    return weights


def load_ordering(path: str | Path, signature: Signature | None = None) -> OrderingConfig:
    return parse_ordering_text(Path(path).read_text(), signature)


def format_ordering_text(cfg: OrderingConfig) -> str:
    lines = [f"kind = {cfg.kind}", f"precedence = {cfg.precedence}"]
    if cfg.kbo is not None:
        lines.append("weights = " + ", ".join(f"{k}:{v}" for k, v in cfg.kbo.weights.items()))
        lines.append(f"variable_weight = {cfg.kbo.variable_weight}")
    return "\n".join(lines) + "\n"
