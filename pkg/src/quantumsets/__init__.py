"""Quantum set theory over finite-dimensional Hilbert spaces.

Submodules: :mod:`projmath` (projection lattice and implications),
:mod:`logic` (generated logics, commutants, Boolean domains), :mod:`universe`
(quantum sets), :mod:`lang` (formula syntax), :mod:`evaluation` (truth values
and theorem checks), :mod:`reals` (quantum reals and observables) and
:mod:`cli`.
"""

from .errors import (
    ConsistencyError,
    DimensionError,
    NotAProjectionError,
    ParseError,
    QuantumSetError,
    SemanticError,
)
from .evaluation import Environment, Evaluator, truth_value
from .lang import parse, to_text
from .logic import boolean_domain, generate_logic
from .projmath import Projection, StateVector, Tolerance, identity, zero
from .reals import (
    Interval,
    Observable,
    QReal,
    RationalGrid,
    in_interval_value,
    perfectly_correlated,
    prob,
    to_operator,
    to_qreal,
)
from .universe import QSet, check_embed, empty, make_qset

__version__ = "0.1.0"
