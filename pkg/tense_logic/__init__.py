"""Many-valued tense logic evaluated over consistent quantum histories."""

from tense_logic.consistency import ChReport, ch_certify, ch_residual, decoherence_functional
from tense_logic.errors import (
    InputError,
    NonCHWarning,
    RangeViolation,
    TenseLogicError,
)
from tense_logic.logic import History, NormalForm, Proposition, normalize, parse, parse_template
from tense_logic.model import QuantumModel, load_model, load_model_file, rabi_model, save_model
from tense_logic.valuation import (
    EvalOptions,
    TruthValue,
    tau_disjunction,
    tau_history,
    tau_prop,
    tau_time_sweep,
)
from tense_logic.verify import TheoremReport, oracle_tau_bruteforce, run_suite

__all__ = [
    "ChReport",
    "EvalOptions",
    "History",
    "InputError",
    "NonCHWarning",
    "NormalForm",
    "Proposition",
    "QuantumModel",
    "RangeViolation",
    "TenseLogicError",
    "TheoremReport",
    "TruthValue",
    "ch_certify",
    "ch_residual",
    "decoherence_functional",
    "load_model",
    "load_model_file",
    "normalize",
    "oracle_tau_bruteforce",
    "parse",
    "parse_template",
    "rabi_model",
    "run_suite",
    "save_model",
    "tau_disjunction",
    "tau_history",
    "tau_prop",
    "tau_time_sweep",
]
