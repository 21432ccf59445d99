"""Exact analysis of probabilistic automata: distribution bisimulations,
bisimulation metrics, modal logic bounds and trace equivalences."""

from .automaton import (Automaton, Dist, classify, direct_sum, ensure_extended, extend_input_enabled,
                        make_automaton, parallel_compose, parse_dist, parse_model, serialize_model)
from .errors import CapExceeded, ModelError, NotEnabled, PabisimError, RejectedInput

__version__ = "0.1.0"

__all__ = [
    "Automaton", "Dist", "classify", "direct_sum", "ensure_extended", "extend_input_enabled",
    "make_automaton", "parallel_compose", "parse_dist", "parse_model", "serialize_model",
    "CapExceeded", "ModelError", "NotEnabled", "PabisimError", "RejectedInput",
]
