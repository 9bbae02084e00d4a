"""Numerical check of the consistent-histories (CH) condition.

For a history h of length n, each binary refinement alpha picks at step i
either the event (alpha_i = 0) or its complement (alpha_i = 1). CH demands
that the decoherence functional <E0| C_alpha C_beta^dagger |E0> vanishes
for alpha != beta. All 2^n refinement vectors C_alpha^dagger |E0> are built
by a prefix tree, one evolution per step for the whole layer, and the
functional is read off as their Gram matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from tense_logic.errors import LengthGuard
from tense_logic.linalg import DEFAULT_TOL
from tense_logic.logic import History, NormalForm, subset_conjunctions
from tense_logic.model import QuantumModel
from tense_logic.valuation import check_disjunction_size, chain_vector

logger = logging.getLogger(__name__)

MAX_HISTORY_LENGTH = 12

Refinement = Tuple[int, ...]


@dataclass(frozen=True)
class ChReport:
    """Largest off-diagonal decoherence-functional modulus over the checked pairs."""

    max_residual: float = 0.0
    worst_pair: Optional[Tuple[Refinement, Refinement]] = None
    n_pairs_checked: int = 0
    skipped_trivial: int = 0
    worst_history: Optional[History] = None
    n_histories: int = 0

    def certified(self, tol: float = DEFAULT_TOL) -> bool:
        return self.max_residual <= tol

    def merge(self, other: "ChReport") -> "ChReport":
        worst = self if self.max_residual >= other.max_residual else other
        return ChReport(
            max_residual=worst.max_residual,
            worst_pair=worst.worst_pair if worst.n_pairs_checked else (self.worst_pair or other.worst_pair),
            n_pairs_checked=self.n_pairs_checked + other.n_pairs_checked,
            skipped_trivial=self.skipped_trivial + other.skipped_trivial,
            worst_history=worst.worst_history if worst.n_pairs_checked else (self.worst_history or other.worst_history),
            n_histories=self.n_histories + other.n_histories,
        )

    def to_dict(self) -> dict:
        return {
            "ch_residual": self.max_residual,
            "worst_pair": None if self.worst_pair is None else ["".join(map(str, a)) for a in self.worst_pair],
            "worst_history": None if self.worst_history is None else str(self.worst_history),
            "n_pairs_checked": self.n_pairs_checked,
            "skipped_trivial": self.skipped_trivial,
            "n_histories": self.n_histories,
        }


def _bits(index: int, n: int) -> Refinement:
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


def refinement_vectors(model: QuantumModel, history: History) -> np.ndarray:
    """Rows are the 2^n refinement vectors in lexicographic order of alpha.

    Vectors stay in the frame of the last step time; the Gram matrix is
    unchanged by that common unitary.
    """
    vectors = model.initial_state[np.newaxis, :]
    current = 0.0
    for t, ev in history.steps:
        if t != current:
            vectors = vectors @ model.propagator.unitary(t - current).T
            current = t
        event_mask = model.mask(ev)
        complement_mask = model.mask(model.complement(ev))
        vectors = np.stack([vectors * event_mask, vectors * complement_mask], axis=1).reshape(-1, model.dim)
    return vectors


def pair_counts(n: int) -> Tuple[int, int]:
    """(checked, skipped) pair counts for a history of length n."""
    if n == 0:
        return 0, 0
    size = 2 ** n
    skipped = 4 ** (n - 1)
    return size * (size - 1) // 2 - skipped, skipped


@lru_cache(maxsize=1 << 14)
def _cached_residual(model: QuantumModel, history: History) -> ChReport:
    n = len(history)
    checked, skipped = pair_counts(n)
    if checked == 0:
        return ChReport(skipped_trivial=skipped, n_histories=1)

    vectors = refinement_vectors(model, history)
    best = -1.0
    best_pair = (0, 0)
    # Pairs that differ at the last step are orthogonal exactly; only
    # same-last-bit blocks are compared.
    for last in (0, 1):
        block = vectors[last::2]
        gram = np.abs(block.conj() @ block.T)
        rows, cols = np.triu_indices(block.shape[0], k=1)
        values = gram[rows, cols]
        k = int(np.argmax(values))
        if values[k] > best:
            best = float(values[k])
            best_pair = (2 * int(rows[k]) + last, 2 * int(cols[k]) + last)

    return ChReport(
        max_residual=best,
        worst_pair=(_bits(best_pair[0], n), _bits(best_pair[1], n)),
        n_pairs_checked=checked,
        skipped_trivial=skipped,
        worst_history=history,
        n_histories=1,
    )


def ch_residual(model: QuantumModel, history: History, tol: float = DEFAULT_TOL) -> ChReport:
    """Max |<E0| C_alpha C_beta^dagger |E0>| over refinement pairs alpha < beta.

    Raises:
        LengthGuard: History longer than MAX_HISTORY_LENGTH.
    """
    if len(history) > MAX_HISTORY_LENGTH:
        raise LengthGuard(
            f"CH check of a length-{len(history)} history needs {4 ** len(history)} pairs; "
            f"limit is length {MAX_HISTORY_LENGTH}"
        )
    report = _cached_residual(model, history)
    if report.max_residual > tol:
        logger.debug(f"CH residual {report.max_residual:.3e} above {tol:g} for {history}")
    return report


def ch_certify(model: QuantumModel, nf: NormalForm, tol: float = DEFAULT_TOL) -> ChReport:
    """Aggregate CH report over every distinct subset conjunction inclusion-exclusion evaluates."""
    nf = nf.canonical()
    check_disjunction_size(len(nf))
    report = ChReport()
    seen = set()
    for _, history in subset_conjunctions(nf):
        if history.has_empty_event or history in seen:
            continue
        seen.add(history)
        report = report.merge(ch_residual(model, history, tol))
    logger.debug(f"Certified {report.n_histories} histories: max residual {report.max_residual:.3e}")
    return report


def decoherence_functional(
    model: QuantumModel,
    history: History,
    alpha: Sequence[int],
    beta: Sequence[int],
) -> complex:
    """Single entry <E0| C_alpha C_beta^dagger |E0>."""
    if len(alpha) != len(history) or len(beta) != len(history):
        raise ValueError(f"Refinements must have length {len(history)}")

    def refined(bits: Sequence[int]) -> Tuple[Tuple[float, frozenset], ...]:
        return tuple(
            (t, ev if bit == 0 else model.complement(ev))
            for (t, ev), bit in zip(history.steps, bits)
        )

    e0 = model.initial_state
    psi_alpha = chain_vector(model, refined(alpha), e0)
    psi_beta = chain_vector(model, refined(beta), e0)
    return complex(np.vdot(psi_alpha, psi_beta))
