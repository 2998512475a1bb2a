"""Quantum and classical Fisher information.

The phase QFI uses the spectral formula

    J = sum_{j,k: l_j + l_k > cutoff} 2 |<j| d rho |k>|^2 / (l_j + l_k)

with ``d rho = i [G, rho]`` for the diagonal generator ``G`` that counts
excitations on the phase-carrying qubits. Because every channel here is
phase covariant the value does not depend on the phase, so it is evaluated
at ``phi = 0`` unless asked otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from metrocross.channels import KrausChannel, SiteMap, apply_channel
from metrocross.errors import DimensionMismatch, NonHermitianInput, ParamOutOfRange, SingularEigenvalue
from metrocross.numerics import HERMITIAN_TOL, clip_spectrum, eigh, hermiticity_error

SPECTRAL_CUTOFF = 1e-12
BURES_STEP = 1e-4
FD_STEP = 1e-6
EIGEN_FLOOR = 1e-12
DERIVATIVE_FLOOR = 1e-9


@dataclass(frozen=True)
class PhaseGenerator:
    n_qubits: int
    phase_sites: frozenset[int]

    @property
    def diagonal(self) -> np.ndarray:
        """Number of excited phase-carrying qubits for each basis index."""
        idx = np.arange(2**self.n_qubits)
        g = np.zeros(idx.shape, dtype=float)
        for site in self.phase_sites:
            g += (idx >> (self.n_qubits - 1 - site)) & 1
        return g

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal).astype(complex)


@dataclass(frozen=True)
class QfiResult:
    value: float
    discarded_weight: float
    phi_eval: float = 0.0


def phase_generator(sites: SiteMap) -> PhaseGenerator:
    return PhaseGenerator(sites.n_qubits, sites.phase_sites)


def _as_state(psi: np.ndarray, dim: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.shape != (dim,):
        raise DimensionMismatch(f"state of length {psi.size} does not fit dimension {dim}")
    return psi


def encode_phase(rho: np.ndarray, g: PhaseGenerator, phi: float) -> np.ndarray:
    """``U rho U^dagger`` with ``U = exp(i phi G)``, using that ``G`` is diagonal."""
    d = np.exp(1j * phi * g.diagonal)
    return d[:, None] * rho * d.conj()[None, :]


def output_state(psi: np.ndarray, ch: KrausChannel, sites: SiteMap, phi: float = 0.0) -> np.ndarray:
    """Noisy, phase-encoded image of the pure input ``psi``.

    Noise is applied first; the order does not matter for phase-covariant
    channels.
    """
    psi = _as_state(psi, sites.dim)
    rho = apply_channel(np.outer(psi, psi.conj()), ch, sites)
    if phi:
        rho = encode_phase(rho, phase_generator(sites), phi)
    return rho


def drho_analytic(rho_phi: np.ndarray, g: PhaseGenerator) -> np.ndarray:
    """Exact phase derivative ``i (G rho - rho G)`` of an encoded state."""
    diag = g.diagonal
    return 1j * (diag[:, None] * rho_phi - rho_phi * diag[None, :])


def qfi_eigen(rho_phi: np.ndarray, drho: np.ndarray, phi_eval: float = 0.0) -> QfiResult:
    """QFI from the eigendecomposition of ``rho_phi``.

    Pairs with ``l_j + l_k <= SPECTRAL_CUTOFF`` are dropped.
    ``discarded_weight`` is the total weight of eigenvalues that fall below
    the cutoff.
    """
    if drho.shape != rho_phi.shape:
        raise DimensionMismatch(f"derivative shape {drho.shape} differs from state shape {rho_phi.shape}")
    err = hermiticity_error(drho)
    if err > HERMITIAN_TOL:
        raise NonHermitianInput(f"state derivative is not Hermitian (max deviation {err:.3g})")
    w, v = eigh(rho_phi)
    w = clip_spectrum(w)
    d = v.conj().T @ drho @ v
    denom = w[:, None] + w[None, :]
    keep = denom > SPECTRAL_CUTOFF
    value = float(np.sum(2 * np.abs(d[keep]) ** 2 / denom[keep]))
    discarded = float(np.sum(w[w <= SPECTRAL_CUTOFF / 2]))
    return QfiResult(value, discarded, phi_eval)


def phase_qfi(psi: np.ndarray, ch: KrausChannel, sites: SiteMap, phi: float = 0.0) -> float:
    """QFI of the pure input ``psi`` sent through ``ch`` on ``sites``."""
    rho = output_state(psi, ch, sites, phi)
    return qfi_eigen(rho, drho_analytic(rho, phase_generator(sites)), phi).value


def phase_qfi_with_gradient(psi: np.ndarray, ch: KrausChannel, sites: SiteMap) -> tuple[float, np.ndarray]:
    """Phase QFI and its Wirtinger gradient ``dJ/d conj(psi)``.

    The QFI is ``max_X 2 Tr(rho' X) - Tr(rho X^2)`` with the symmetric
    logarithmic derivative ``L`` as maximizer, so to first order
    ``dJ = Tr(d rho_in M)`` with ``M = E^dagger(2i[L, G] - L^2)``. For a pure
    input this gives ``dJ = 2 Re <M psi, d psi>``.
    """
    psi = _as_state(psi, sites.dim)
    g = phase_generator(sites).diagonal
    rho = apply_channel(np.outer(psi, psi.conj()), ch, sites)
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    d = v.conj().T @ (1j * (g[:, None] * rho - rho * g[None, :])) @ v
    denom = w[:, None] + w[None, :]
    keep = denom > SPECTRAL_CUTOFF
    value = float(np.sum(2 * np.abs(d[keep]) ** 2 / denom[keep]))
    sld_eig = np.where(keep, 2 * d / np.where(keep, denom, 1.0), 0.0)
    sld = v @ sld_eig @ v.conj().T
    m = 2j * (sld * g[None, :] - g[:, None] * sld) - sld @ sld
    m = apply_channel(m, ch.adjoint(), sites)
    return value, m @ psi


def bures_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Root fidelity ``Tr sqrt(sqrt(sigma) rho sqrt(sigma))``, clipped to [0, 1].

    The inner matrix is formed on the support of ``sigma`` only. On the full
    space its null directions carry roundoff eigenvalues near 1e-17 whose
    square roots (about 3e-9) would swamp the fidelity deficit that
    :func:`qfi_bures` divides by ``dt**2``.
    """
    rho, sigma = np.asarray(rho), np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"shapes {rho.shape} and {sigma.shape} differ")
    clip_spectrum(eigh(rho).eigenvalues)
    w, v = eigh(sigma)
    w = clip_spectrum(w)
    keep = w > SPECTRAL_CUTOFF
    half = v[:, keep] * np.sqrt(w[keep])
    inner = half.conj().T @ rho @ half
    inner = (inner + inner.conj().T) / 2
    mu = clip_spectrum(np.linalg.eigvalsh(inner))
    return float(min(1.0, np.sum(np.sqrt(mu))))


def qfi_bures(
    state_at: Callable[[float], np.ndarray],
    t: float,
    dt: float = BURES_STEP,
    valid_range: tuple[float, float] = (0.0, 1.0),
) -> float:
    """QFI for a parameter ``t`` from the local decay of the Bures fidelity.

    Uses the symmetric difference ``8 (1 - F[rho(t - dt/2), rho(t + dt/2)]) / dt^2``.
    """
    lo, hi = valid_range
    if dt <= 0:
        raise ParamOutOfRange(f"step dt={dt} must be positive")
    if t - dt / 2 < lo or t + dt / 2 > hi:
        raise ParamOutOfRange(f"t={t} with dt={dt} leaves the valid range [{lo}, {hi}]")
    f = bures_fidelity(state_at(t - dt / 2), state_at(t + dt / 2))
    return 8.0 * (1.0 - f) / dt**2


def classical_fisher(
    eigenvalue_fn: Callable[[float], np.ndarray],
    t: float,
    derivative_fn: Callable[[float], np.ndarray] | None = None,
    delta: float = FD_STEP,
) -> float:
    """Fisher information ``sum_i l_i'^2 / l_i`` of a parametrized spectrum.

    ``eigenvalue_fn`` must return the eigenvalues in a consistent order for
    nearby ``t``. Derivatives come from a central difference unless
    ``derivative_fn`` is given.
    """
    lam = np.asarray(eigenvalue_fn(t), dtype=float)
    if derivative_fn is not None:
        dlam = np.asarray(derivative_fn(t), dtype=float)
    else:
        dlam = (np.asarray(eigenvalue_fn(t + delta)) - np.asarray(eigenvalue_fn(t - delta))) / (2 * delta)
    small = lam < EIGEN_FLOOR
    if np.any(small & (np.abs(dlam) >= DERIVATIVE_FLOOR)):
        raise SingularEigenvalue(f"vanishing eigenvalue with non-vanishing derivative at t={t}")
    keep = ~small
    return float(np.sum(dlam[keep] ** 2 / lam[keep]))


def parameter_qfi_with_gradient(
    psi: np.ndarray, smap: np.ndarray, dsmap: np.ndarray
) -> tuple[float, np.ndarray]:
    """QFI for a channel parameter and its gradient ``dJ/d conj(psi)``.

    ``smap`` is the superoperator of the channel at the parameter value and
    ``dsmap`` its derivative, both acting on row-major vectorized matrices.
    The gradient follows as in :func:`phase_qfi_with_gradient`, with
    ``M = 2 E'^dagger(L) - E^dagger(L^2)``.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    dim = psi.size
    vec = np.outer(psi, psi.conj()).ravel()
    rho = (smap @ vec).reshape(dim, dim)
    drho = (dsmap @ vec).reshape(dim, dim)
    rho = (rho + rho.conj().T) / 2
    drho = (drho + drho.conj().T) / 2
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    d = v.conj().T @ drho @ v
    denom = w[:, None] + w[None, :]
    keep = denom > SPECTRAL_CUTOFF
    value = float(np.sum(2 * np.abs(d[keep]) ** 2 / denom[keep]))
    sld = v @ np.where(keep, 2 * d / np.where(keep, denom, 1.0), 0.0) @ v.conj().T
    m = 2 * (dsmap.conj().T @ sld.ravel()) - smap.conj().T @ (sld @ sld).ravel()
    return value, m.reshape(dim, dim) @ psi
