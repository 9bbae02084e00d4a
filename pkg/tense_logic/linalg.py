"""Dense complex linear algebra for the evaluation engine.

Matrices and state vectors are plain ``numpy`` arrays of dtype ``complex128``.
Time evolution uses natural units (hbar = 1) and is computed exactly from a
Hermitian eigendecomposition rather than a series expansion.
"""

from __future__ import annotations

import logging
from typing import Tuple

import numpy as np

from tense_logic.errors import DimensionCap, NotHermitian, NotSquare

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
MAX_DIM = 64

# Carriers for operators (H, U(t), projectors) and for |E0>.
ComplexMatrix = np.ndarray
StateVector = np.ndarray


def as_matrix(m) -> ComplexMatrix:
    """Coerce nested lists or arrays to a complex128 matrix."""
    return np.asarray(m, dtype=np.complex128)


def max_abs_diff(a: ComplexMatrix, b: ComplexMatrix) -> float:
    """Largest entrywise modulus of ``a - b``; the tolerance-parameterized equality measure."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"Shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def matrices_close(a: ComplexMatrix, b: ComplexMatrix, tol: float = DEFAULT_TOL) -> bool:
    return max_abs_diff(a, b) <= tol


def _require_square(m: ComplexMatrix) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"Matrix is not square: shape {m.shape}")


def _require_dim_cap(dim: int) -> None:
    if dim > MAX_DIM:
        raise DimensionCap(f"Dimension {dim} exceeds the dense-storage cap of {MAX_DIM}")


def hermiticity_defect(m: ComplexMatrix) -> float:
    return max_abs_diff(m, m.conj().T)


def is_hermitian(m: ComplexMatrix, tol: float = DEFAULT_TOL) -> bool:
    m = as_matrix(m)
    _require_square(m)
    return hermiticity_defect(m) <= tol


def hermitian_eigen(m: ComplexMatrix, tol: float = DEFAULT_TOL) -> Tuple[np.ndarray, ComplexMatrix]:
    """Eigendecomposition ``m = V diag(w) V^dagger`` with ``w`` ascending.

    Args:
        m: Square Hermitian matrix.
        tol: Maximum tolerated entry of ``|m - m^dagger|``.

    Returns:
        Tuple of real eigenvalues (ascending) and the unitary eigenvector matrix.
    """
    m = as_matrix(m)
    _require_square(m)
    _require_dim_cap(m.shape[0])
    defect = hermiticity_defect(m)
    if defect > tol:
        raise NotHermitian(f"Matrix not Hermitian: max |m - m^dagger| = {defect:.3e} > {tol:g}")
    # Symmetrize so rounding noise below tol cannot leak into the spectrum.
    eigenvalues, eigenvectors = np.linalg.eigh((m + m.conj().T) / 2)
    return eigenvalues, eigenvectors


def evolution_operator(h: ComplexMatrix, t: float, tol: float = DEFAULT_TOL) -> ComplexMatrix:
    """U(t) = exp(-iHt) for Hermitian ``h``; negative ``t`` gives the inverse."""
    return Propagator(h, tol=tol).unitary(t)


def is_projector(m: ComplexMatrix, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``m`` is idempotent and Hermitian within ``tol``."""
    m = as_matrix(m)
    _require_square(m)
    return max_abs_diff(m @ m, m) <= tol and hermiticity_defect(m) <= tol


class Propagator:
    """Time evolution generated by a fixed Hermitian matrix.

    The eigendecomposition is computed once; ``evolve`` then costs two
    matrix-vector products per call.
    """

    def __init__(self, h: ComplexMatrix, tol: float = DEFAULT_TOL) -> None:
        self.eigenvalues, self.eigenvectors = hermitian_eigen(h, tol=tol)
        self._adjoint = self.eigenvectors.conj().T
        self.dim = self.eigenvalues.shape[0]

    def _phases(self, t: float) -> np.ndarray:
        return np.exp(-1j * self.eigenvalues * t)

    def unitary(self, t: float) -> ComplexMatrix:
        return (self.eigenvectors * self._phases(t)) @ self._adjoint

    def evolve(self, vector: StateVector, t: float) -> StateVector:
        """Return U(t) applied to ``vector``."""
        if t == 0:
            return np.array(vector, dtype=np.complex128)
        return self.eigenvectors @ (self._phases(t) * (self._adjoint @ vector))
