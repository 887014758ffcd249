"""Herbrand countermodels for unit-equational problems.

A saturated set of equations together with a reduction ordering defines a
model whose elements are ground normal forms.  This package parses TPTP
CNF problems and saturation dumps, performs ordered rewriting, runs a small
unfailing completion, certifies confluence, verifies countermodels on
bounded instances, searches for finite models and enumerates small magma
equations.
"""

from .completion import Limits, Refuted, ResourceOut, Saturated, complete, replay, saturate_or_load
from .errors import HerbrandError
from .etp import MagmaEquation, canonicalize, enumerate_equations, equation_number, implication_problem
from .finite import FiniteInterpretation, no_finite_model_up_to, search_finite_model
from .model import HerbrandModel, ModelReport, verify_countermodel
from .ordering import Comparison, OrderingConfig, Precedence, compare, find_orientation
from .rewriting import Mode, RewriteSystem, check_ground_confluence, critical_pairs, normalize
from .terms import App, Equation, Signature, Symbol, Var, ground_terms_up_to
from .tptp import Problem, SaturationDump, parse_problem, parse_saturation, write_problem, write_trs

__version__ = "0.1.0"
