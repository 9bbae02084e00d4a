"""Shared fixtures for the tense_logic test suite."""

import math
from pathlib import Path

import numpy as np
import pytest

from tense_logic.model import (
    QuantumModel,
    generate_commuting_model,
    generate_dephasing_model,
    rabi_model,
)

MODELS_DIR = Path(__file__).parent.parent / "artifacts" / "models"

QUARTER_PI = math.pi / 4
HALF_PI = math.pi / 2


@pytest.fixture
def models_dir() -> Path:
    return MODELS_DIR


@pytest.fixture
def rabi() -> QuantumModel:
    """H = sigma_x on one qubit, starting in experience 0."""
    return rabi_model()


@pytest.fixture
def commuting() -> QuantumModel:
    return generate_commuting_model(6, 3, seed=11)


@pytest.fixture
def weak_dephasing() -> QuantumModel:
    """Splitting dominates the couplings: close to the Rabi model, far from CH."""
    return generate_dephasing_model(3, 1.0, [0.001, 0.002, 0.004], seed=5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)
