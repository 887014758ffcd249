"""Exception hierarchy shared by all modules."""


class HerbrandError(Exception):
    """Base class for every error raised by this package."""


class SignatureError(HerbrandError):
    """Arity clash, unknown symbol, or an empty Herbrand universe."""


class PositionError(HerbrandError):
    """A position does not address a subterm of the given term."""


class OrderingError(HerbrandError):
    """Malformed or inadmissible ordering configuration."""


class TptpSyntaxError(HerbrandError):
    """Input text does not follow the supported TPTP grammar."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class FragmentError(HerbrandError):
    """Input lies outside the unit-equational fragment.

    Raised for non-unit clauses, predicate symbols other than equality,
    non-ground disequations and non-ground queries against a model.
    """


class UnorientedError(HerbrandError):
    """A rule set could not be shown to decrease under the ordering."""


class RewriteError(HerbrandError):
    """Normalization could not proceed (non-ground input, step cap, ...)."""


class CompletionError(HerbrandError):
    """Completion ended without the requested saturated system.

    ``reason`` is ``"refuted"`` when the goal follows from the axioms,
    ``"resource_out"`` when a limit was hit, ``"unsound_dump"`` when a
    supplied saturation fails the sanity pass, and ``"replay"`` for a proof
    that does not check.
    """

    def __init__(self, message: str, reason: str = "replay"):
        self.reason = reason
        super().__init__(message)


class SearchLimitError(HerbrandError):
    """A requested finite domain size exceeds the configured ceiling."""
