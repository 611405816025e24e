"""Conformance testing engine for sampled CPS trajectories."""

from cpsconf._core import (
    DegreeResult,
    FalsificationResult,
    Formula,
    HybridAutomaton,
    System,
    Trace,
    binary_search_epsilon,
    conformance_robustness,
    epsilon_star,
    falsify,
    is_close,
    load_automaton,
    nav_benchmark,
    offset_guards,
    parse_formula,
    pwc_formula,
    read_trace,
    robustness,
    scale_dynamics,
    tau_star,
    write_trace,
)

__all__ = [
    "DegreeResult",
    "FalsificationResult",
    "Formula",
    "HybridAutomaton",
    "System",
    "Trace",
    "binary_search_epsilon",
    "conformance_robustness",
    "epsilon_star",
    "falsify",
    "is_close",
    "load_automaton",
    "nav_benchmark",
    "offset_guards",
    "parse_formula",
    "pwc_formula",
    "read_trace",
    "robustness",
    "scale_dynamics",
    "tau_star",
    "write_trace",
]

__version__ = "0.1.0"
