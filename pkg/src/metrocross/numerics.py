"""Dense linear algebra helpers for registers of at most a few qubits.

Qubit 0 is the most significant bit of a basis index throughout the package.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from metrocross.errors import NonHermitianInput, NotPSD

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
SQRT_TOL = 1e-9


class EigenDecomposition(NamedTuple):
    """Eigenvalues sorted descending with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.atleast_2d(a), np.atleast_2d(b))


def kron_all(*mats: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = kron(out, m)
    return out


def hermiticity_error(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def eigh(a: np.ndarray) -> EigenDecomposition:
    """Hermitian eigendecomposition, eigenvalues in descending order.

    Raises:
        NonHermitianInput: if ``a`` deviates from ``a^dagger`` by more than
            ``HERMITIAN_TOL`` in any entry.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {a.shape}")
    err = hermiticity_error(a)
    if err > HERMITIAN_TOL:
        raise NonHermitianInput(f"matrix is not Hermitian (max deviation {err:.3g})")
    w, v = np.linalg.eigh(a)
    return EigenDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def clip_spectrum(w: np.ndarray) -> np.ndarray:
    """Zero out roundoff-negative eigenvalues; reject genuinely negative ones."""
    lowest = float(np.min(w)) if w.size else 0.0
    if lowest < -PSD_TOL:
        raise NotPSD(f"eigenvalue {lowest:.3g} below -{PSD_TOL:g}")
    return np.clip(w, 0.0, None)


def matrix_sqrt_psd(a: np.ndarray) -> np.ndarray:
    w, v = eigh(a)
    w = clip_spectrum(w)
    return (v * np.sqrt(w)) @ v.conj().T


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian matrix with real and imaginary entries in [-1, 1]."""
    x = rng.uniform(-1, 1, (dim, dim)) + 1j * rng.uniform(-1, 1, (dim, dim))
    h = (x + x.conj().T) / 2
    return h / max(1.0, float(np.max(np.abs(h))))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
