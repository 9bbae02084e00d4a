"""Theorem-suite runner and brute-force oracles.

Each theorem about the valuation becomes a ``TheoremCheck``: it derives the
propositions to evaluate from a few seeded random inputs and measures how far
the computed truth values are from satisfying the theorem. Checks that depend
on the consistent-histories condition run only on cases whose propositions are
CH-certified; filtered cases are counted, and a theorem with no remaining cases
is reported as inconclusive.
"""

from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from tense_logic.consistency import ch_certify
from tense_logic.errors import BadTimeOrder, InputError, NotCommutingFamily
from tense_logic.linalg import DEFAULT_TOL
from tense_logic.logic import (
    EventAnd,
    EventExpr,
    EventName,
    EventNot,
    EventOr,
    EventSet,
    FutureAtom,
    History,
    NormalForm,
    Not,
    NowAtom,
    Proposition,
    conj,
    disj,
    format_proposition,
    normalize,
)
from tense_logic.model import (
    Event,
    QuantumModel,
    generate_commuting_model,
    generate_dephasing_model,
    generate_random_model,
    rabi_model,
)
from tense_logic.valuation import (
    ZERO_ONE_TOL,
    EvalOptions,
    parallel_map,
    tau_disjunction,
    tau_history,
)

logger = logging.getLogger(__name__)

FAMILIES = ("commuting", "dephasing", "rabi", "generic")
THEOREM_TOL_FACTOR = 100

DEFAULT_PRESETS: Dict[str, Any] = {
    "commuting": {"dim_min": 2, "dim_max": 8, "n_events": 3},
    "dephasing": {
        "default": "splitting_dominant",
        "presets": {
            "splitting_dominant": {"n_env_qubits": 3, "system_splitting": 1.0, "couplings": [0.05, 0.1, 0.2]},
            "coupling_dominant": {"n_env_qubits": 3, "system_splitting": 0.1, "couplings": [5.0, 10.0, 20.0]},
        },
    },
    "generic": {"dim_s_min": 2, "dim_s_max": 4, "dim_e_min": 1, "dim_e_max": 2, "n_events": 3},
    "time_grid": [0.5, 1.0, 1.5, 2.0],
    "boundary_rate": 0.3,
    "now_rate": 0.2,
}


def load_presets(path: Optional[Path] = None) -> Dict[str, Any]:
    """Load family presets, falling back to the built-in defaults."""
    presets_path = Path(path) if path else Path(__file__).parent / "presets.json"
    if not presets_path.exists():
        logger.warning(f"Presets file not found: {presets_path}; using built-in defaults")
        return copy.deepcopy(DEFAULT_PRESETS)
    try:
        with open(presets_path, "r", encoding="utf-8") as f:
            return json.load(f)
    except Exception as e:
        logger.warning(f"Failed to load presets: {e}")
        return copy.deepcopy(DEFAULT_PRESETS)


def dephasing_preset(presets: Dict[str, Any], name: Optional[str] = None) -> Dict[str, Any]:
    section = presets["dephasing"]
    name = name or section["default"]
    if name not in section["presets"]:
        raise InputError(f"Unknown dephasing preset {name!r}; available: {sorted(section['presets'])}")
    return section["presets"][name]


def make_model(family: str, model_seed: int, presets: Dict[str, Any], preset: Optional[str] = None) -> QuantumModel:
    """Seeded model of one family."""
    rng = np.random.default_rng(model_seed)
    if family == "commuting":
        cfg = presets["commuting"]
        dim = int(rng.integers(cfg["dim_min"], cfg["dim_max"] + 1))
        return generate_commuting_model(dim, cfg["n_events"], model_seed)
    if family == "dephasing":
        cfg = dephasing_preset(presets, preset)
        return generate_dephasing_model(cfg["n_env_qubits"], cfg["system_splitting"], cfg["couplings"], model_seed)
    if family == "rabi":
        return rabi_model()
    if family == "generic":
        cfg = presets["generic"]
        dim_s = int(rng.integers(cfg["dim_s_min"], cfg["dim_s_max"] + 1))
        dim_e = int(rng.integers(cfg["dim_e_min"], cfg["dim_e_max"] + 1))
        return generate_random_model(dim_s, dim_e, cfg["n_events"], model_seed)
    raise InputError(f"Unknown family {family!r}; expected one of {FAMILIES}")


# Random propositions

class PropositionGenerator:
    """Seeded random propositions over a model's named events.

    Times come from a coarse grid. At ``boundary_rate`` the generator emits
    boundary structures: tautological or contradictory event expressions,
    duplicated same-time atoms and complement pairs.
    """

    def __init__(
        self,
        rng: np.random.Generator,
        model: QuantumModel,
        time_grid: Sequence[float],
        boundary_rate: float = 0.3,
        now_rate: float = 0.2,
    ) -> None:
        if len(time_grid) < 2:
            raise InputError("Time grid needs at least two points")
        self.rng = rng
        self.model = model
        self.time_grid = [float(t) for t in time_grid]
        self.boundary_rate = boundary_rate
        self.now_rate = now_rate
        self.names = sorted(model.events)
        self.proper_names = [n for n in self.names if 0 < len(model.events[n]) < model.dim_s]

    def _pick(self, items: Sequence[Any]) -> Any:
        return items[int(self.rng.integers(len(items)))]

    def _boundary(self) -> bool:
        return bool(self.rng.random() < self.boundary_rate)

    def event(self) -> EventExpr:
        if not self.names:
            return EventSet(self.model.full_event)
        name = EventName(self._pick(self.names))
        if self._boundary():
            kind = int(self.rng.integers(3))
            if kind == 0:
                return EventOr((name, EventNot(name)))
            if kind == 1:
                return EventAnd((name, EventNot(name)))
            return EventNot(name)
        return name

    def atom(self, t: float) -> Proposition:
        return NowAtom(self.event()) if t == 0 else FutureAtom(t, self.event())

    def _times(self, k: int, allow_now: bool = True) -> List[float]:
        times = sorted(float(t) for t in self.rng.choice(self.time_grid, size=k, replace=False))
        if allow_now and self.rng.random() < self.now_rate:
            times[0] = 0.0
        return times

    def history(self, max_steps: int = 3) -> Proposition:
        k = int(self.rng.integers(1, min(max_steps, len(self.time_grid)) + 1))
        times = self._times(k)
        atoms = [self.atom(t) for t in times]
        if self._boundary():
            atoms.append(self.atom(self._pick(times)))
        return conj(*atoms)

    def one_time_pair(self) -> Tuple[Proposition, Proposition]:
        t1, t2 = self._times(2)
        return self.atom(t1), self.atom(t2)

    def disjunction(self, max_disjuncts: int) -> Proposition:
        n = int(self.rng.integers(1, max_disjuncts + 1))
        parts = [self.history() for _ in range(n)]
        if max_disjuncts >= 2 and self._boundary():
            t = float(self._pick(self.time_grid))
            ev = self.event()
            parts = parts[: max_disjuncts - 2] + [FutureAtom(t, ev), FutureAtom(t, EventNot(ev))]
        return disj(*parts)

    def proper_chain(self) -> Proposition:
        """History of two or three future steps, each with a proper non-empty event."""
        k = int(self.rng.integers(2, min(3, len(self.time_grid)) + 1))
        times = self._times(k, allow_now=False)
        if self.proper_names:
            return conj(*(FutureAtom(t, EventName(self._pick(self.proper_names))) for t in times))
        return conj(*(FutureAtom(t, EventSet(frozenset({0}))) for t in times))


@dataclass(frozen=True)
class SuiteCase:
    """One seeded model with the random inputs every theorem draws from."""

    index: int
    model_seed: int
    model: QuantumModel
    h1: Proposition
    h2: Proposition
    o1: Proposition
    o2: Proposition
    p: Proposition
    q: Proposition
    r: Proposition
    chain: Proposition
    now: Proposition


def build_case(
    family: str,
    seed: int,
    index: int,
    presets: Dict[str, Any],
    preset: Optional[str] = None,
) -> SuiteCase:
    rng = np.random.default_rng([seed, index])
    model_seed = int(rng.integers(2 ** 31))
    model = make_model(family, model_seed, presets, preset)
    gen = PropositionGenerator(
        rng,
        model,
        presets["time_grid"],
        boundary_rate=presets.get("boundary_rate", 0.3),
        now_rate=presets.get("now_rate", 0.2),
    )
    o1, o2 = gen.one_time_pair()
    return SuiteCase(
        index=index,
        model_seed=model_seed,
        model=model,
        h1=gen.history(),
        h2=gen.history(),
        o1=o1,
        o2=o2,
        p=gen.disjunction(2),
        q=gen.disjunction(2),
        r=gen.disjunction(3),
        chain=gen.proper_chain(),
        now=NowAtom(gen.event()),
    )


# Theorem checks

class CaseEvaluator:
    """Truth values and CH residuals for one model, memoised per proposition."""

    def __init__(self, model: QuantumModel, tol: float = DEFAULT_TOL) -> None:
        self.model = model
        self.tol = tol
        self.general = EvalOptions(tolerance=tol, check_range=False)
        self.fast = EvalOptions(mode="ch_fast", tolerance=tol, check_range=False, warn_non_ch=False)
        self._normal_forms: Dict[Proposition, NormalForm] = {}

    def normal_form(self, prop: Proposition) -> NormalForm:
        nf = self._normal_forms.get(prop)
        if nf is None:
            nf = normalize(prop, self.model)
            self._normal_forms[prop] = nf
        return nf

    def tau(self, prop: Proposition) -> float:
        return tau_disjunction(self.model, self.normal_form(prop), self.general).raw

    def tau_fast(self, prop: Proposition) -> float:
        return tau_disjunction(self.model, self.normal_form(prop), self.fast).raw

    def residual(self, props: Sequence[Proposition]) -> float:
        return max(ch_certify(self.model, self.normal_form(p), self.tol).max_residual for p in props)


def _is_zero(x: float) -> bool:
    return abs(x) <= ZERO_ONE_TOL


def _is_one(x: float) -> bool:
    return abs(x - 1.0) <= ZERO_ONE_TOL


def _out_of_range(x: float) -> float:
    return max(0.0, -x, x - 1.0)


def _conjunction_is_one(conjunction: float, left: float, right: float) -> float:
    """Violation of: tau(a & b) = 1 iff tau(a) = tau(b) = 1."""
    if _is_one(conjunction):
        return max(abs(left - 1.0), abs(right - 1.0))
    if _is_one(left) and _is_one(right):
        return abs(conjunction - 1.0)
    return 0.0


def _zero_propagates(premise: float, conjunction: float) -> float:
    return abs(conjunction) if _is_zero(premise) else 0.0


def _additivity(ev: CaseEvaluator, props: Sequence[Proposition]) -> float:
    both, split, whole = (ev.tau(p) for p in props)
    return abs(both + split - whole)


def _t13(ev: CaseEvaluator, props: Sequence[Proposition]) -> float:
    both, either, p, q = (ev.tau(x) for x in props)
    violations = [_conjunction_is_one(both, p, q)]
    if _is_zero(p) or _is_zero(q):
        violations.append(abs(both))
    if _is_zero(either):
        violations.append(max(abs(p), abs(q)))
    elif _is_zero(p) and _is_zero(q):
        violations.append(abs(either))
    if _is_one(p) or _is_one(q):
        violations.append(abs(either - 1.0))
    return max(violations)


@dataclass(frozen=True)
class TheoremCheck:
    """One theorem as a numeric violation measure.

    Attributes:
        inputs: SuiteCase fields the check draws from.
        derive: Builds the evaluated propositions from the inputs.
        violation: Distance from satisfying the theorem; 0 when it holds.
        needs_ch: Run only on CH-certified cases.
        product_state: Evaluate on the model's product-state variant.
    """

    theorem_id: str
    description: str
    inputs: Tuple[str, ...]
    derive: Callable[..., Tuple[Proposition, ...]]
    violation: Callable[[CaseEvaluator, Sequence[Proposition]], float]
    needs_ch: bool = True
    product_state: bool = False

    def propositions(self, case: SuiteCase) -> Tuple[Proposition, ...]:
        return self.derive(*(getattr(case, name) for name in self.inputs))

    def evaluate(self, model: QuantumModel, *inputs: Proposition, tol: float = DEFAULT_TOL) -> float:
        """Violation for explicit inputs, without CH filtering."""
        if self.product_state:
            model = model.with_product_state()
        return self.violation(CaseEvaluator(model, tol), self.derive(*inputs))


_CHECKS = [
    TheoremCheck(
        "T1", "0 <= tau(h) <= 1", ("h1",),
        lambda h: (h,),
        lambda ev, ps: _out_of_range(ev.tau(ps[0])),
        needs_ch=False,
    ),
    TheoremCheck(
        "T2", "tau(h1 & h2) = 1 iff tau(h1) = tau(h2) = 1", ("h1", "h2"),
        lambda a, b: (conj(a, b), a, b),
        lambda ev, ps: _conjunction_is_one(*(ev.tau(p) for p in ps)),
        needs_ch=False,
    ),
    TheoremCheck(
        "T3", "tau(h1) = 0 implies tau(h1 & h2) = 0, one-time h1 before h2", ("o1", "o2"),
        lambda a, b: (a, conj(a, b)),
        lambda ev, ps: _zero_propagates(ev.tau(ps[0]), ev.tau(ps[1])),
        needs_ch=False,
    ),
    TheoremCheck(
        "T4", "tau(h1 & h2) + tau(h1 & ~h2) = tau(h1), one-time h1 before h2", ("o1", "o2"),
        lambda a, b: (conj(a, b), conj(a, Not(b)), a),
        _additivity,
        needs_ch=False,
    ),
    TheoremCheck(
        "T5", "tau(h1) = 0 implies tau(h1 & h2) = 0", ("h1", "h2"),
        lambda a, b: (a, conj(a, b)),
        lambda ev, ps: _zero_propagates(ev.tau(ps[0]), ev.tau(ps[1])),
    ),
    TheoremCheck(
        "T6", "tau(p & h) + tau(p & ~h) = tau(p), p a history, h one-time", ("h1", "o2"),
        lambda p, h: (conj(p, h), conj(p, Not(h)), p),
        _additivity,
    ),
    TheoremCheck(
        "T7", "tau(h1 & h2) <= tau(h1)", ("h1", "h2"),
        lambda a, b: (conj(a, b), a),
        lambda ev, ps: max(0.0, ev.tau(ps[0]) - ev.tau(ps[1])),
    ),
    TheoremCheck(
        "T8", "tau(h1) + tau(h2) - 1 <= tau(h1 & h2)", ("h1", "h2"),
        lambda a, b: (a, b, conj(a, b)),
        lambda ev, ps: max(0.0, ev.tau(ps[0]) + ev.tau(ps[1]) - 1.0 - ev.tau(ps[2])),
    ),
    TheoremCheck(
        "T9", "tau(p & h) + tau(p & ~h) = tau(p), p a disjunction, h one-time", ("r", "o2"),
        lambda p, h: (conj(p, h), conj(p, Not(h)), p),
        _additivity,
    ),
    TheoremCheck(
        "T10", "0 <= tau(h1 | ... | hn) <= 1", ("r",),
        lambda p: (p,),
        lambda ev, ps: _out_of_range(ev.tau(ps[0])),
    ),
    TheoremCheck(
        "T11", "tau(p | q) = tau(p) + tau(q) - tau(p & q)", ("p", "q"),
        lambda p, q: (disj(p, q), p, q, conj(p, q)),
        lambda ev, ps: abs(ev.tau(ps[0]) - ev.tau(ps[1]) - ev.tau(ps[2]) + ev.tau(ps[3])),
    ),
    TheoremCheck(
        "T12", "tau(~p) = 1 - tau(p)", ("p",),
        lambda p: (Not(p), p),
        lambda ev, ps: abs(ev.tau(ps[0]) - (1.0 - ev.tau(ps[1]))),
    ),
    TheoremCheck(
        "T13", "zero/one laws for p & q and p | q", ("p", "q"),
        lambda p, q: (conj(p, q), disj(p, q), p, q),
        _t13,
    ),
    TheoremCheck(
        "L2", "general and ch_fast history values agree", ("chain",),
        lambda h: (h,),
        lambda ev, ps: abs(ev.tau(ps[0]) - ev.tau_fast(ps[0])),
    ),
    TheoremCheck(
        "L3", "tau(h1) = tau(h1 & h2) + tau(h1 & ~h2)", ("h1", "h2"),
        lambda a, b: (conj(a, b), conj(a, Not(b)), a),
        _additivity,
    ),
    TheoremCheck(
        "L4", "tau(~h) = 1 - tau(h)", ("h1",),
        lambda h: (Not(h), h),
        lambda ev, ps: abs(ev.tau(ps[0]) - (1.0 - ev.tau(ps[1]))),
    ),
    TheoremCheck(
        "AX1", "0 <= tau(p) <= 1", ("p",),
        lambda p: (p,),
        lambda ev, ps: _out_of_range(ev.tau(ps[0])),
    ),
    TheoremCheck(
        "AX2", "tau(N(E)) is 0 or 1 for a product initial state", ("now",),
        lambda n: (n,),
        lambda ev, ps: min(abs(ev.tau(ps[0])), abs(1.0 - ev.tau(ps[0]))),
        needs_ch=False,
        product_state=True,
    ),
    TheoremCheck(
        "AX3", "tau(p & q) + tau(p | q) = tau(p) + tau(q)", ("p", "q"),
        lambda p, q: (conj(p, q), disj(p, q), p, q),
        lambda ev, ps: abs(ev.tau(ps[0]) + ev.tau(ps[1]) - ev.tau(ps[2]) - ev.tau(ps[3])),
    ),
    TheoremCheck(
        "AX4", "tau(p & q) <= tau(p) and tau(q) <= tau(p | q)", ("p", "q"),
        lambda p, q: (conj(p, q), p, q, disj(p, q)),
        lambda ev, ps: max(0.0, ev.tau(ps[0]) - ev.tau(ps[1]), ev.tau(ps[2]) - ev.tau(ps[3])),
    ),
]

THEOREM_CHECKS: Dict[str, TheoremCheck] = {check.theorem_id: check for check in _CHECKS}


@dataclass(frozen=True)
class TheoremReport:
    """Aggregate of one theorem over all cases of a suite run."""

    theorem_id: str
    n_cases: int
    n_filtered: int
    max_violation: float
    worst_case: Optional[Tuple[int, str]]
    passed: bool
    tolerance: float

    @property
    def status(self) -> str:
        if self.n_cases == 0:
            return "inconclusive"
        return "passed" if self.passed else "failed"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theorem_id": self.theorem_id,
            "status": self.status,
            "n_cases": self.n_cases,
            "n_filtered": self.n_filtered,
            "max_violation": self.max_violation,
            "worst_case_seed": None if self.worst_case is None else self.worst_case[0],
            "worst_case": None if self.worst_case is None else self.worst_case[1],
            "tolerance": self.tolerance,
        }


# (theorem_id, filtered, violation, propositions)
CaseOutcome = Tuple[str, bool, float, Tuple[Proposition, ...]]


def _run_case(case: SuiteCase, checks: Sequence[TheoremCheck], tol: float, ch_filter: bool) -> List[CaseOutcome]:
    evaluator = CaseEvaluator(case.model, tol)
    product_evaluator = None
    outcomes = []
    for check in checks:
        props = check.propositions(case)
        if check.product_state:
            if product_evaluator is None:
                product_evaluator = CaseEvaluator(case.model.with_product_state(), tol)
            ev = product_evaluator
        else:
            ev = evaluator
        if check.needs_ch and ch_filter and ev.residual(props) > tol:
            outcomes.append((check.theorem_id, True, 0.0, props))
            continue
        outcomes.append((check.theorem_id, False, check.violation(ev, props), props))
    logger.debug(f"Case {case.index} (model seed {case.model_seed}) done")
    return outcomes


def run_suite(
    family: str,
    n_cases: int,
    seed: int,
    tol: float = DEFAULT_TOL,
    ch_filter: bool = True,
    workers: int = 1,
    preset: Optional[str] = None,
    presets: Optional[Dict[str, Any]] = None,
    theorems: Optional[Sequence[str]] = None,
) -> List[TheoremReport]:
    """Run the theorem checks over ``n_cases`` seeded cases of a model family.

    The result depends only on the arguments: cases are seeded by
    ``(seed, case index)`` and reduced in case order whatever ``workers`` is.

    Args:
        family: One of FAMILIES.
        n_cases: Number of cases, at least 1.
        seed: Suite seed.
        tol: Linear-algebra and CH-certification tolerance; theorem tolerance
            is THEOREM_TOL_FACTOR times this.
        ch_filter: Skip CH-dependent checks on uncertified cases.
        workers: Thread-pool size for case evaluation.
        preset: Dephasing preset name.
        presets: Preset mapping (defaults to presets.json).
        theorems: Subset of THEOREM_CHECKS ids to run.
    """
    if n_cases < 1:
        raise InputError(f"n_cases must be >= 1, got {n_cases}")
    if family not in FAMILIES:
        raise InputError(f"Unknown family {family!r}; expected one of {FAMILIES}")
    presets = presets or load_presets()
    if family == "dephasing":
        dephasing_preset(presets, preset)
    ids = list(theorems) if theorems else list(THEOREM_CHECKS)
    unknown = [t for t in ids if t not in THEOREM_CHECKS]
    if unknown:
        raise InputError(f"Unknown theorem ids: {unknown}")
    checks = [THEOREM_CHECKS[t] for t in ids]
    theorem_tol = THEOREM_TOL_FACTOR * tol

    logger.info(f"Running {n_cases} {family} cases (seed={seed}, ch_filter={ch_filter}, workers={workers})")

    def run_one(index: int) -> Tuple[int, List[CaseOutcome]]:
        case = build_case(family, seed, index, presets, preset)
        return case.model_seed, _run_case(case, checks, tol, ch_filter)

    results = parallel_map(run_one, range(n_cases), workers)

    reports = []
    for position, check in enumerate(checks):
        n_checked = 0
        n_filtered = 0
        max_violation = 0.0
        worst_case = None
        for model_seed, outcomes in results:
            _, filtered, violation, props = outcomes[position]
            if filtered:
                n_filtered += 1
                continue
            n_checked += 1
            if worst_case is None or violation > max_violation:
                max_violation = violation
                worst_case = (model_seed, "; ".join(format_proposition(p) for p in props))
        reports.append(TheoremReport(
            theorem_id=check.theorem_id,
            n_cases=n_checked,
            n_filtered=n_filtered,
            max_violation=max_violation,
            worst_case=worst_case,
            passed=n_checked > 0 and max_violation <= theorem_tol,
            tolerance=theorem_tol,
        ))
        logger.info(f"{check.theorem_id}: {reports[-1].status} ({n_checked} cases, {n_filtered} filtered)")
    return reports


def overall_status(reports: Sequence[TheoremReport]) -> str:
    """``failed`` if any report failed, else ``inconclusive`` if any was, else ``passed``."""
    statuses = {r.status for r in reports}
    if "failed" in statuses:
        return "failed"
    if "inconclusive" in statuses:
        return "inconclusive"
    return "passed"


def format_report(reports: Sequence[TheoremReport]) -> str:
    """Fixed-width table; identical reports give identical text."""
    lines = []
    lines.append("=" * 80)
    lines.append("THEOREM SUITE")
    lines.append("=" * 80)
    lines.append(f"{'theorem':<8} {'status':<13} {'cases':>6} {'filtered':>9} {'max_violation':>14}  worst case")
    lines.append("-" * 80)
    for r in reports:
        worst = "-" if r.worst_case is None else f"seed={r.worst_case[0]}: {r.worst_case[1]}"
        lines.append(
            f"{r.theorem_id:<8} {r.status:<13} {r.n_cases:>6} {r.n_filtered:>9} {r.max_violation:>14.3e}  {worst}"
        )
    lines.append("-" * 80)
    lines.append(f"overall: {overall_status(reports)}")
    return "\n".join(lines)


# Oracles

def oracle_tau_bruteforce(model: QuantumModel, nf: NormalForm) -> float:
    """Truth value of a disjunction by elementary probability on a diagonal Hamiltonian.

    Basis index k carries weight |<k|E0>|^2; a history holds at k iff k's
    system index lies in every step's event.

    Raises:
        NotCommutingFamily: The Hamiltonian is not diagonal.
    """
    h = model.hamiltonian
    off_diagonal = h - np.diag(np.diag(h))
    if off_diagonal.size and np.max(np.abs(off_diagonal)) > model.tol:
        raise NotCommutingFamily("Brute-force oracle requires a diagonal Hamiltonian")
    weights = np.abs(model.initial_state) ** 2
    total = 0.0
    for k, weight in enumerate(weights):
        system_index = k // model.dim_e
        if any(all(system_index in ev for _, ev in history.steps) for history in nf.disjuncts):
            total += float(weight)
    return total


def oracle_theorem4_asymmetry(
    model: QuantumModel,
    t1: float,
    t2: float,
    ev_a: Event,
    ev_b: Event,
) -> Tuple[float, float]:
    """Additivity defect of h1 = F_t1(A), h2 = F_t2(B), marginalising either conjunct.

    Returns:
        ``lhs_ordered`` = tau(h1 & h2) + tau(h1 & ~h2) - tau(h1), which vanishes
        without CH, and ``lhs_reversed`` = tau(h1 & h2) + tau(~h1 & h2) - tau(h2),
        which need not: interposing a fact at t1 changes the value at t2.

    Raises:
        BadTimeOrder: Unless 0 < t1 < t2.
    """
    if not 0 < t1 < t2:
        raise BadTimeOrder(f"Asymmetry oracle needs 0 < t1 < t2, got t1={t1}, t2={t2}")
    ev_a = model.check_event(ev_a)
    ev_b = model.check_event(ev_b)
    opts = EvalOptions(check_range=False)

    def tau(*steps: Tuple[float, Event]) -> float:
        return tau_history(model, History(steps), opts).raw

    h1 = (t1, ev_a)
    h2 = (t2, ev_b)
    not_h1 = (t1, model.complement(ev_a))
    not_h2 = (t2, model.complement(ev_b))
    both = tau(h1, h2)
    lhs_ordered = both + tau(h1, not_h2) - tau(h1)
    lhs_reversed = both + tau(not_h1, h2) - tau(h2)
    return lhs_ordered, lhs_reversed
