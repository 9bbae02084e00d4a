"""Quantum universe models: system (experience) factor tensored with an environment.

A model fixes the universal Hamiltonian, the named experience events (subsets of
the system's experience basis), and the initial component |E0> = |eta_0>|env>.
Models are immutable after construction and validated on the way in.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from types import MappingProxyType
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from tense_logic.errors import (
    DimensionCap,
    IndexOutOfRange,
    NegativeTime,
    ParseError,
    ValidationError,
)
from tense_logic.linalg import (
    DEFAULT_TOL,
    MAX_DIM,
    ComplexMatrix,
    Propagator,
    StateVector,
    as_matrix,
    hermiticity_defect,
    max_abs_diff,
)

logger = logging.getLogger(__name__)

Event = FrozenSet[int]

EVENT_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class QuantumModel:
    """A small quantum universe H_S (x) H_env with a fixed experience basis."""

    dim_s: int
    dim_e: int
    hamiltonian: ComplexMatrix
    events: Mapping[str, Event]
    initial_experience: int
    initial_environment: StateVector
    # Set only by generators that need a superposed |E0>; initial_experience is then unused.
    initial_state_override: Optional[StateVector] = None
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self) -> None:
        hamiltonian = as_matrix(self.hamiltonian)
        environment = np.asarray(self.initial_environment, dtype=np.complex128)
        override = None
        if self.initial_state_override is not None:
            override = np.asarray(self.initial_state_override, dtype=np.complex128)
        events = {name: frozenset(int(i) for i in indices) for name, indices in self.events.items()}

        _validate(self.dim_s, self.dim_e, hamiltonian, events, self.initial_experience,
                  environment, override, self.tol)

        for array in (hamiltonian, environment, override):
            if array is not None:
                array.setflags(write=False)
        object.__setattr__(self, "hamiltonian", hamiltonian)
        object.__setattr__(self, "initial_environment", environment)
        object.__setattr__(self, "initial_state_override", override)
        object.__setattr__(self, "events", MappingProxyType(events))

    @property
    def dim(self) -> int:
        return self.dim_s * self.dim_e

    @property
    def is_product_state(self) -> bool:
        return self.initial_state_override is None

    @cached_property
    def full_event(self) -> Event:
        return frozenset(range(self.dim_s))

    @cached_property
    def propagator(self) -> Propagator:
        logger.debug(f"Diagonalising Hamiltonian of dimension {self.dim}")
        return Propagator(self.hamiltonian, tol=self.tol)

    @cached_property
    def initial_state(self) -> StateVector:
        if self.initial_state_override is not None:
            state = self.initial_state_override.copy()
        else:
            eta = np.zeros(self.dim_s, dtype=np.complex128)
            eta[self.initial_experience] = 1.0
            state = np.kron(eta, self.initial_environment)
        state.setflags(write=False)
        return state

    @cached_property
    def _masks(self) -> Dict[Event, np.ndarray]:
        return {}

    def check_event(self, indices: Iterable[int]) -> Event:
        ev = frozenset(int(i) for i in indices)
        bad = sorted(i for i in ev if i < 0 or i >= self.dim_s)
        if bad:
            raise IndexOutOfRange(f"Event indices {bad} outside experience basis 0..{self.dim_s - 1}")
        return ev

    def complement(self, ev: Event) -> Event:
        return self.full_event - ev

    def mask(self, ev: Event) -> np.ndarray:
        """Diagonal of Pi_A (x) 1 as a 0/1 vector over the full space."""
        cached = self._masks.get(ev)
        if cached is None:
            system = np.zeros(self.dim_s)
            system[sorted(ev)] = 1.0
            cached = np.repeat(system, self.dim_e)
            cached.setflags(write=False)
            self._masks[ev] = cached
        return cached

    def apply_heisenberg(self, vector: StateVector, ev: Event, t: float) -> StateVector:
        """Apply the Heisenberg projector of ``ev`` at time ``t`` to ``vector``."""
        if t < 0:
            raise NegativeTime(f"Heisenberg projector requires t >= 0, got {t}")
        if t == 0:
            return self.mask(ev) * vector
        psi = self.propagator.evolve(vector, t)
        return self.propagator.evolve(self.mask(ev) * psi, -t)

    def with_product_state(self) -> "QuantumModel":
        """Same Hamiltonian and events, initial state |eta_0>|env>."""
        if self.is_product_state:
            return self
        return QuantumModel(
            dim_s=self.dim_s,
            dim_e=self.dim_e,
            hamiltonian=self.hamiltonian,
            events=dict(self.events),
            initial_experience=self.initial_experience,
            initial_environment=self.initial_environment,
            tol=self.tol,
        )

    def equals(self, other: "QuantumModel", tol: float = DEFAULT_TOL) -> bool:
        """Exact on integer and event fields, tolerance-equal on arrays."""
        if (self.dim_s, self.dim_e, self.initial_experience) != (other.dim_s, other.dim_e, other.initial_experience):
            return False
        if dict(self.events) != dict(other.events):
            return False
        if (self.initial_state_override is None) != (other.initial_state_override is None):
            return False
        if self.initial_state_override is not None and \
                max_abs_diff(self.initial_state_override, other.initial_state_override) > tol:
            return False
        return (max_abs_diff(self.hamiltonian, other.hamiltonian) <= tol
                and max_abs_diff(self.initial_environment, other.initial_environment) <= tol)


def _validate(
    dim_s: int,
    dim_e: int,
    hamiltonian: np.ndarray,
    events: Dict[str, Event],
    initial_experience: int,
    environment: np.ndarray,
    override: Optional[np.ndarray],
    tol: float,
) -> None:
    if dim_s < 1 or dim_e < 1:
        raise ValidationError("dimensions positive", f"dim_s={dim_s}, dim_e={dim_e}")
    dim = dim_s * dim_e
    if dim > MAX_DIM:
        raise DimensionCap(f"Total dimension {dim} exceeds the cap of {MAX_DIM}")
    if hamiltonian.shape != (dim, dim):
        raise ValidationError("hamiltonian dimension", f"expected {(dim, dim)}, got {hamiltonian.shape}")
    for where, values in (("hamiltonian", hamiltonian), ("initial_environment", environment),
                          ("initial_state", override)):
        if values is not None and not np.all(np.isfinite(values)):
            raise ValidationError("finite entries", f"{where} contains NaN or infinity")
    defect = hermiticity_defect(hamiltonian)
    if defect > tol:
        raise ValidationError("hamiltonian not Hermitian", f"max |H - H^dagger| = {defect:.3e}")
    for name, indices in events.items():
        if not EVENT_NAME_RE.match(name):
            raise ValidationError("event name invalid", repr(name))
        if any(i < 0 or i >= dim_s for i in indices):
            raise ValidationError("event index out of range", f"{name}={sorted(indices)} with dim_s={dim_s}")
    if not 0 <= initial_experience < dim_s:
        raise ValidationError("initial_experience out of range", str(initial_experience))
    if environment.shape != (dim_e,):
        raise ValidationError("initial_environment dimension", f"expected {dim_e}, got {environment.shape}")
    if abs(np.linalg.norm(environment) - 1.0) > tol:
        raise ValidationError("initial_environment not normalized", f"norm={np.linalg.norm(environment)!r}")
    if override is not None:
        if override.shape != (dim,):
            raise ValidationError("initial_state dimension", f"expected {dim}, got {override.shape}")
        if abs(np.linalg.norm(override) - 1.0) > tol:
            raise ValidationError("initial_state not normalized", f"norm={np.linalg.norm(override)!r}")


def event_projector(model: QuantumModel, ev: Iterable[int]) -> ComplexMatrix:
    """Pi_A (x) 1 as a dense matrix."""
    ev = model.check_event(ev)
    return np.diag(model.mask(ev)).astype(np.complex128)


def heisenberg_projector(model: QuantumModel, ev: Iterable[int], t: float) -> ComplexMatrix:
    """exp(iHt) (Pi_A (x) 1) exp(-iHt)."""
    if t < 0:
        raise NegativeTime(f"Heisenberg projector requires t >= 0, got {t}")
    projector = event_projector(model, ev)
    if t == 0:
        return projector
    u = model.propagator.unitary(t)
    return u.conj().T @ projector @ u


def initial_state(model: QuantumModel) -> StateVector:
    return model.initial_state


# Model files

def _complex_pairs(values: Sequence[complex]) -> List[List[float]]:
    return [[float(np.real(z)), float(np.imag(z))] for z in values]


def _decode_complex(value: Any, where: str) -> complex:
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        raise ValidationError("complex number as [re, im]", f"{where}: {value!r}")
    return complex(value[0], value[1])


def _decode_vector(values: Any, where: str) -> np.ndarray:
    if not isinstance(values, list):
        raise ValidationError("vector as list of [re, im]", where)
    return np.array([_decode_complex(v, f"{where}[{i}]") for i, v in enumerate(values)], dtype=np.complex128)


def _require_int(data: Dict[str, Any], key: str) -> int:
    if key not in data:
        raise ValidationError("required field", key)
    value = data[key]
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValidationError("integer field", f"{key}={value!r}")
    return value


def load_model(text: str, tol: float = DEFAULT_TOL) -> QuantumModel:
    """Parse and validate model-file content.

    Raises:
        ParseError: Text is not valid JSON (carries line and column).
        ValidationError: A structural or physical invariant fails.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"Malformed model file: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(data, dict):
        raise ValidationError("top-level object", type(data).__name__)

    dim_s = _require_int(data, "dim_s")
    dim_e = _require_int(data, "dim_e")
    if "hamiltonian" not in data or not isinstance(data["hamiltonian"], list):
        raise ValidationError("required field", "hamiltonian")
    rows = [_decode_vector(row, f"hamiltonian[{r}]") for r, row in enumerate(data["hamiltonian"])]
    lengths = sorted({len(row) for row in rows})
    if len(lengths) > 1:
        raise ValidationError("hamiltonian dimension", f"ragged rows with lengths {lengths}")
    hamiltonian = np.array(rows, dtype=np.complex128)
    raw_events = data.get("events")
    if not isinstance(raw_events, dict):
        raise ValidationError("required field", "events")
    events = {}
    for name, indices in raw_events.items():
        if not isinstance(indices, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in indices):
            raise ValidationError("event as list of indices", name)
        events[name] = indices
    if "initial_environment" not in data:
        raise ValidationError("required field", "initial_environment")
    environment = _decode_vector(data["initial_environment"], "initial_environment")
    override = None
    if data.get("initial_state") is not None:
        override = _decode_vector(data["initial_state"], "initial_state")

    model = QuantumModel(
        dim_s=dim_s,
        dim_e=dim_e,
        hamiltonian=hamiltonian,
        events=events,
        initial_experience=_require_int(data, "initial_experience"),
        initial_environment=environment,
        initial_state_override=override,
        tol=tol,
    )
    logger.info(f"Loaded model: dim_s={dim_s}, dim_e={dim_e}, events={sorted(events)}")
    return model


def save_model(model: QuantumModel) -> str:
    """Serialise to the model-file format, one matrix row per line."""
    rows = [json.dumps(_complex_pairs(row)) for row in model.hamiltonian]
    events = {name: sorted(indices) for name, indices in model.events.items()}
    lines = [
        "{",
        f'  "dim_s": {model.dim_s},',
        f'  "dim_e": {model.dim_e},',
        '  "hamiltonian": [',
        ",\n".join(f"    {row}" for row in rows),
        "  ],",
        f'  "events": {json.dumps(events)},',
        f'  "initial_experience": {model.initial_experience},',
        f'  "initial_environment": {json.dumps(_complex_pairs(model.initial_environment))}',
    ]
    if model.initial_state_override is not None:
        lines[-1] += ","
        lines.append(f'  "initial_state": {json.dumps(_complex_pairs(model.initial_state_override))}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_model_file(path: Path, tol: float = DEFAULT_TOL) -> QuantumModel:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Model file not found: {path}")
    logger.info(f"Loading model from {path}")
    with open(path, "r", encoding="utf-8") as f:
        return load_model(f.read(), tol=tol)


def save_model_file(model: QuantumModel, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(save_model(model))


# Generators

def event_names(n: int) -> List[str]:
    """A, B, C, ... then E26, E27, ..."""
    return [chr(ord("A") + k) if k < 26 else f"E{k}" for k in range(n)]


def _random_events(rng: np.random.Generator, dim_s: int, n_events: int) -> Dict[str, List[int]]:
    events: Dict[str, List[int]] = {}
    for name in event_names(n_events):
        size = int(rng.integers(1, dim_s)) if dim_s > 1 else 1
        events[name] = sorted(int(i) for i in rng.choice(dim_s, size=size, replace=False))
    events["FULL"] = list(range(dim_s))
    return events


def _random_unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def rabi_model() -> QuantumModel:
    """Two-level system, H = sigma_x, starting in experience 0."""
    return QuantumModel(
        dim_s=2,
        dim_e=1,
        hamiltonian=SIGMA_X,
        events={"A": [0], "B": [1], "FULL": [0, 1]},
        initial_experience=0,
        initial_environment=np.array([1.0]),
    )


def generate_commuting_model(dim: int, n_events: int, seed: int) -> QuantumModel:
    """Diagonal Hamiltonian with a superposed initial state; CH holds exactly.

    All Heisenberg projectors equal the bare event projectors, so every
    decoherence-functional off-diagonal contains a factor Pi (1 - Pi) = 0.
    ``initial_experience`` is unused (the model carries a full initial state).
    """
    if not 2 <= dim <= MAX_DIM:
        raise DimensionCap(f"Commuting model dimension must be in [2, {MAX_DIM}], got {dim}")
    rng = np.random.default_rng(seed)
    diagonal = rng.normal(size=dim)
    state = _random_unit_vector(rng, dim)
    events = _random_events(rng, dim, n_events)
    logger.info(f"Generated commuting model: dim={dim}, n_events={n_events}, seed={seed}")
    return QuantumModel(
        dim_s=dim,
        dim_e=1,
        hamiltonian=np.diag(diagonal).astype(np.complex128),
        events=events,
        initial_experience=0,
        initial_environment=np.array([1.0]),
        initial_state_override=state,
    )


def dephasing_hamiltonian(system_splitting: float, couplings: Sequence[float]) -> np.ndarray:
    """splitting * sigma_x (x) 1 + sum_k c_k sigma_z (x) sigma_z^(k)."""
    n = len(couplings)
    dim_e = 2 ** n
    h = system_splitting * np.kron(SIGMA_X, np.eye(dim_e))
    for k, coupling in enumerate(couplings):
        z_k = np.kron(np.kron(np.eye(2 ** k), SIGMA_Z), np.eye(2 ** (n - k - 1)))
        h = h + coupling * np.kron(SIGMA_Z, z_k)
    return h.astype(np.complex128)


def generate_dephasing_model(
    n_env_qubits: int,
    system_splitting: float,
    couplings: Sequence[float],
    seed: int,
) -> QuantumModel:
    """System qubit with transverse splitting, dephased by Ising couplings to environment qubits.

    Events: A = {0}, B = {1}, FULL = {0, 1}; the system starts in experience 0
    and the environment in a seeded random pure state.
    """
    if not 0 <= n_env_qubits <= 5:
        raise DimensionCap(f"Dephasing model supports at most 5 environment qubits, got {n_env_qubits}")
    couplings = [float(c) for c in couplings]
    if len(couplings) != n_env_qubits:
        raise ValidationError("one coupling per environment qubit",
                              f"{len(couplings)} couplings for {n_env_qubits} qubits")
    rng = np.random.default_rng(seed)
    environment = _random_unit_vector(rng, 2 ** n_env_qubits)
    logger.info(
        f"Generated dephasing model: n_env={n_env_qubits}, splitting={system_splitting}, "
        f"couplings={couplings}, seed={seed}"
    )
    return QuantumModel(
        dim_s=2,
        dim_e=2 ** n_env_qubits,
        hamiltonian=dephasing_hamiltonian(system_splitting, couplings),
        events={"A": [0], "B": [1], "FULL": [0, 1]},
        initial_experience=0,
        initial_environment=environment,
    )


def generate_random_model(dim_s: int, dim_e: int, n_events: int, seed: int) -> QuantumModel:
    """Random Hermitian Hamiltonian with a product initial state (no CH in general)."""
    dim = dim_s * dim_e
    if dim_s < 2 or dim > MAX_DIM:
        raise DimensionCap(f"Random model needs dim_s >= 2 and dim_s*dim_e <= {MAX_DIM}")
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    hamiltonian = (x + x.conj().T) / 2
    environment = _random_unit_vector(rng, dim_e)
    initial_experience = int(rng.integers(dim_s))
    events = _random_events(rng, dim_s, n_events)
    return QuantumModel(
        dim_s=dim_s,
        dim_e=dim_e,
        hamiltonian=hamiltonian,
        events=events,
        initial_experience=initial_experience,
        initial_environment=environment,
    )
