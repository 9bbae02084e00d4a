"""Truth values of tensed propositions.

Histories are valued by the Born-rule chain, disjunctions by inclusion-exclusion
over their subset conjunctions, and negations through the complement normal
form (or arithmetically, on request). Two history formulas are available:

* ``general``: the squared norm of the projected chain, nonnegative by construction;
* ``ch_fast``: the real part of the one-sided chain expectation, valid when the
  consistent-histories condition holds; its discarded imaginary part is reported.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Iterable, List, Sequence, Tuple, TypeVar

import numpy as np

from tense_logic.errors import (
    BlowUpGuard,
    DimensionMismatch,
    InputError,
    NonCHWarning,
    RangeViolation,
    StrictModeViolation,
)
from tense_logic.linalg import DEFAULT_TOL, StateVector
from tense_logic.logic import (
    And,
    History,
    NormalForm,
    Not,
    Or,
    Proposition,
    conjoin,
    instantiate,
    normalize,
    subset_conjunctions,
    tense_of,
)
from tense_logic.model import QuantumModel

logger = logging.getLogger(__name__)

MODES = ("general", "ch_fast")
NEGATIONS = ("structural", "arithmetic")
MAX_DISJUNCTION = 20
# Absolute tolerance for tau == 0 / tau == 1 decisions.
ZERO_ONE_TOL = 1e-7

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class EvalOptions:
    """How truth values are computed.

    Attributes:
        mode: ``general`` or ``ch_fast``.
        tolerance: Range-check and imaginary-residual tolerance.
        clamp: Clamp values within tolerance of [0, 1] for presentation.
        check_range: Raise RangeViolation when a disjunction leaves [0, 1].
        negation: ``structural`` (complement normal form) or ``arithmetic`` (1 - tau).
        warn_non_ch: Issue NonCHWarning for large ch_fast imaginary parts.
    """

    mode: str = "general"
    tolerance: float = DEFAULT_TOL
    clamp: bool = False
    check_range: bool = True
    negation: str = "structural"
    warn_non_ch: bool = True

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise InputError(f"Unknown evaluation mode {self.mode!r}; expected one of {MODES}")
        if self.negation not in NEGATIONS:
            raise InputError(f"Unknown negation path {self.negation!r}; expected one of {NEGATIONS}")
        if not self.tolerance > 0:
            raise InputError(f"Tolerance must be positive, got {self.tolerance}")


@dataclass(frozen=True)
class TruthValue:
    """A truth value with its diagnostics.

    ``value`` equals ``raw`` unless clamping for presentation moved it onto
    the nearest boundary, in which case ``clamped`` is set.
    """

    value: float
    raw: float
    imag_residual: float = 0.0
    clamped: bool = False

    def to_dict(self) -> dict:
        return {
            "tau": self.value,
            "raw": self.raw,
            "imag_residual": self.imag_residual,
            "clamped": self.clamped,
        }


def _make_value(raw: float, imag_residual: float, opts: EvalOptions) -> TruthValue:
    value = raw
    if opts.clamp and -opts.tolerance <= raw <= 1 + opts.tolerance:
        value = min(max(raw, 0.0), 1.0)
    return TruthValue(value=value, raw=raw, imag_residual=imag_residual, clamped=value != raw)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Map preserving input order; ``workers > 1`` runs on a thread pool."""
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# History chains

def chain_vector(model: QuantumModel, steps: Sequence[Tuple[float, frozenset]], vector: StateVector) -> StateVector:
    """Apply the Heisenberg projectors of ``steps`` to ``vector`` in the given order.

    Consecutive evolutions are fused, so the cost is one evolution and one
    mask per step; the result is expressed back in the time-0 frame.
    """
    propagator = model.propagator
    psi = vector
    current = 0.0
    for t, ev in steps:
        psi = propagator.evolve(psi, t - current)
        psi = model.mask(ev) * psi
        current = t
    return propagator.evolve(psi, -current)


def _check_history(model: QuantumModel, history: History) -> None:
    for t, ev in history.steps:
        if ev and (min(ev) < 0 or max(ev) >= model.dim_s):
            raise DimensionMismatch(
                f"History step at t={t!r} uses indices {sorted(ev)} but the model has dim_s={model.dim_s}"
            )


@lru_cache(maxsize=1 << 16)
def _history_value(model: QuantumModel, history: History, mode: str) -> Tuple[float, float]:
    if not history.steps:
        return 1.0, 0.0
    if history.has_empty_event:
        return 0.0, 0.0
    e0 = model.initial_state
    if mode == "general":
        psi = chain_vector(model, history.steps, e0)
        return float(np.vdot(psi, psi).real), 0.0
    phi = chain_vector(model, history.steps[::-1], e0)
    amplitude = np.vdot(e0, phi)
    return float(amplitude.real), float(abs(amplitude.imag))


def clear_cache() -> None:
    _history_value.cache_clear()


def tau_history(model: QuantumModel, history: History, opts: EvalOptions = EvalOptions()) -> TruthValue:
    """Truth value of a single history.

    Raises:
        DimensionMismatch: A step references indices outside the model's experience basis.
    """
    _check_history(model, history)
    raw, imag = _history_value(model, history, opts.mode)
    if opts.mode == "ch_fast" and imag > opts.tolerance and opts.warn_non_ch:
        message = f"ch_fast imaginary residual {imag:.3e} exceeds tolerance for history {history}"
        logger.warning(message)
        warnings.warn(message, NonCHWarning, stacklevel=2)
    return _make_value(raw, imag, opts)


def check_disjunction_size(n: int) -> None:
    if n > MAX_DISJUNCTION:
        raise BlowUpGuard(
            f"Inclusion-exclusion over {n} disjuncts needs {2 ** n - 1} terms; limit is {MAX_DISJUNCTION} disjuncts"
        )


def tau_disjunction(
    model: QuantumModel,
    nf: NormalForm,
    opts: EvalOptions = EvalOptions(),
    canonical: bool = True,
) -> TruthValue:
    """Inclusion-exclusion over all non-empty subsets of disjuncts.

    Args:
        canonical: Sum in canonical disjunct order (bit-stable result); False
            keeps the given order.

    Raises:
        BlowUpGuard: More than MAX_DISJUNCTION disjuncts.
        RangeViolation: Result outside [-tol, 1 + tol] with ``opts.check_range``.
    """
    if canonical:
        nf = nf.canonical()
    check_disjunction_size(len(nf))
    for history in nf.disjuncts:
        _check_history(model, history)

    total = 0.0
    imag = 0.0
    for subset, history in subset_conjunctions(nf):
        if history.has_empty_event:
            continue
        raw, residual = _history_value(model, history, opts.mode)
        total += raw if len(subset) % 2 else -raw
        imag = max(imag, residual)

    if opts.check_range and not -opts.tolerance <= total <= 1 + opts.tolerance:
        raise RangeViolation(total, opts.tolerance)
    if opts.mode == "ch_fast" and imag > opts.tolerance and opts.warn_non_ch:
        message = f"ch_fast imaginary residual {imag:.3e} exceeds tolerance"
        logger.warning(message)
        warnings.warn(message, NonCHWarning, stacklevel=2)
    return _make_value(total, imag, opts)


def tau_disjunction_recursive(
    model: QuantumModel,
    disjuncts: Sequence[History],
    opts: EvalOptions = EvalOptions(),
) -> TruthValue:
    """tau(h1 | ... | hn) = tau(h1 | ... | h(n-1)) + tau(hn) - tau((h1 & hn) | ... | (h(n-1) & hn)).

    Evaluated in the given order, so comparing orderings tests that
    inclusion-exclusion is well defined.
    """
    check_disjunction_size(len(disjuncts))

    def recurse(histories: Tuple[History, ...]) -> float:
        if not histories:
            return 0.0
        last = histories[-1]
        value = _history_value(model, last, opts.mode)[0]
        if len(histories) == 1:
            return value
        head = histories[:-1]
        return recurse(head) + value - recurse(tuple(conjoin(h, last) for h in head))

    return _make_value(recurse(tuple(disjuncts)), 0.0, opts)


def tau_prop(model: QuantumModel, prop: Proposition, opts: EvalOptions = EvalOptions()) -> TruthValue:
    """Normalize ``prop`` against ``model`` and evaluate the disjunction.

    A top-level negation follows ``opts.negation``: ``structural`` evaluates the
    complement normal form, ``arithmetic`` returns 1 - tau of the operand.
    """
    if isinstance(prop, Not) and opts.negation == "arithmetic":
        inner = tau_prop(model, prop.child, replace(opts, clamp=False))
        return _make_value(1.0 - inner.raw, inner.imag_residual, opts)
    return tau_disjunction(model, normalize(prop, model), opts)


def evaluate_history_breakdown(
    model: QuantumModel,
    nf: NormalForm,
    opts: EvalOptions = EvalOptions(),
) -> List[Tuple[History, TruthValue]]:
    """Per-disjunct truth values, in canonical order."""
    return [(h, tau_history(model, h, opts)) for h in nf.canonical().disjuncts]


def tau_time_sweep(
    model: QuantumModel,
    template: Proposition,
    grid: Sequence[float],
    opts: EvalOptions = EvalOptions(),
    workers: int = 1,
) -> List[Tuple[float, TruthValue]]:
    """Evaluate ``template`` at every grid time, preserving grid order.

    Raises:
        InputError: Grid times not strictly positive and ascending.
    """
    grid = [float(t) for t in grid]
    if any(t <= 0 for t in grid):
        raise InputError("Sweep grid times must be > 0 (F requires t > 0)")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InputError("Sweep grid times must be strictly ascending")
    logger.info(f"Sweeping {len(grid)} grid points with {workers} worker(s)")

    def evaluate(t: float) -> Tuple[float, TruthValue]:
        return t, tau_prop(model, instantiate(template, t), opts)

    return parallel_map(evaluate, grid, workers)


def metalanguage_truth(model: QuantumModel, prop: Proposition, opts: EvalOptions = EvalOptions()) -> bool:
    """Bivalent reading of connectives that cross tense sublattices.

    A single-sublattice formula is true iff its truth value is 1; a
    cross-sublattice conjunction or disjunction is read classically over its
    parts.

    Raises:
        StrictModeViolation: Negation of a cross-sublattice formula.
    """
    if tense_of(prop) is not None:
        return abs(tau_prop(model, prop, opts).raw - 1.0) <= ZERO_ONE_TOL
    if isinstance(prop, And):
        return all(metalanguage_truth(model, child, opts) for child in prop.children)
    if isinstance(prop, Or):
        return any(metalanguage_truth(model, child, opts) for child in prop.children)
    if isinstance(prop, Not):
        raise StrictModeViolation("negation of a cross-tense formula has no metalanguage reading")
    raise StrictModeViolation(f"Cannot read {prop} in the metalanguage")
