"""Qubit noise channels as Kraus sets, phase encoding, and site embedding.

Every channel here is phase covariant: it commutes with the encoding
``diag(1, exp(i phi))``. Multi-qubit noise is applied as independent copies
of a single-qubit map, one site after another.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from metrocross.errors import DimensionMismatch, NotCPTP, ParamOutOfRange, UnknownChannelKind

COMPLETENESS_TOL = 1e-10

PAULI_XY = "pauli-xy"
DEPOLARIZING = "depolarizing"
AMPLITUDE_DAMPING = "amplitude-damping"
PHASE_COVARIANT = "phase-covariant"
IDENTITY = "identity"

#: Channel families with a single noise parameter in [0, 1].
NOISE_FAMILIES = (PAULI_XY, DEPOLARIZING, AMPLITUDE_DAMPING)

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Single-qubit CPTP map ``rho -> sum_i K_i rho K_i^dagger``.

    ``params`` records the parameter values under the symbol the caller used
    (``eta`` or ``t`` for the depolarizing family), which only affects output
    labelling.
    """

    kraus_ops: tuple[np.ndarray, ...]
    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    @property
    def param_name(self) -> str:
        return next(iter(self.params), "")

    @property
    def param_value(self) -> float:
        return float(next(iter(self.params.values()), 0.0))

    def completeness_error(self) -> float:
        total = sum(k.conj().T @ k for k in self.kraus_ops)
        return float(np.max(np.abs(total - np.eye(self.dim))))

    def adjoint(self) -> KrausChannel:
        """Heisenberg-picture map ``X -> sum_i K_i^dagger X K_i``."""
        return KrausChannel(tuple(k.conj().T for k in self.kraus_ops), self.kind + "-adjoint", self.params)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)


@dataclass(frozen=True)
class PhaseCovariantParams:
    """Parameters of the general phase-covariant qubit map.

    ``kappa`` shifts the Bloch vector along z, ``eta_par`` scales its z
    component and ``eta_perp`` its x-y component.
    """

    kappa: float
    eta_par: float
    eta_perp: float

    def __post_init__(self) -> None:
        if not -1.0 <= self.kappa <= 1.0:
            raise ParamOutOfRange(f"kappa={self.kappa} outside [-1, 1]")
        if not 0.0 <= self.eta_par <= 1.0:
            raise ParamOutOfRange(f"eta_par={self.eta_par} outside [0, 1]")
        if not 0.0 < self.eta_perp < 1.0:
            raise ParamOutOfRange(f"eta_perp={self.eta_perp} outside (0, 1)")
        if not cptp_conditions_hold(self.kappa, self.eta_par, self.eta_perp):
            raise NotCPTP(
                f"(kappa, eta_par, eta_perp)=({self.kappa}, {self.eta_par}, {self.eta_perp}) "
                "violates eta_par + |kappa| <= 1 or 1 + eta_par >= sqrt(4 eta_perp^2 + kappa^2)"
            )


def cptp_conditions_hold(kappa: float, eta_par: float, eta_perp: float) -> bool:
    return eta_par + abs(kappa) <= 1.0 and 1.0 + eta_par >= np.sqrt(4 * eta_perp**2 + kappa**2)


@dataclass(frozen=True, init=False)
class SiteMap:
    """Which qubits of an ``n_qubits`` register see the noise and the phase."""

    n_qubits: int
    noisy_sites: frozenset[int]
    phase_sites: frozenset[int]

    def __init__(self, n_qubits: int, noisy_sites: Iterable[int] = (), phase_sites: Iterable[int] | None = None):
        noisy = frozenset(int(s) for s in noisy_sites)
        phase = noisy if phase_sites is None else frozenset(int(s) for s in phase_sites)
        if n_qubits < 1:
            raise DimensionMismatch("a register needs at least one qubit")
        bad = [s for s in noisy | phase if not 0 <= s < n_qubits]
        if bad:
            raise DimensionMismatch(f"site indices {sorted(bad)} outside a {n_qubits}-qubit register")
        object.__setattr__(self, "n_qubits", int(n_qubits))
        object.__setattr__(self, "noisy_sites", noisy)
        object.__setattr__(self, "phase_sites", phase)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits


def _check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ParamOutOfRange(f"{name}={value} outside [0, 1]")
    return value


def identity_channel() -> KrausChannel:
    return KrausChannel((I2.copy(),), IDENTITY, {})


def pauli_xy(eta: float) -> KrausChannel:
    """sigma_x and sigma_y flips, each with probability eta/2."""
    eta = _check_unit_interval("eta", eta)
    ops = (np.sqrt(1 - eta) * I2, np.sqrt(eta / 2) * SIGMA_X, np.sqrt(eta / 2) * SIGMA_Y)
    return KrausChannel(ops, PAULI_XY, {"eta": eta})


def depolarizing(eta: float, symbol: str = "eta") -> KrausChannel:
    """``(1 - eta) rho + eta I/2``.

    Args:
        eta: depolarizing probability.
        symbol: ``"eta"`` for phase estimation, ``"t"`` when the probability
            itself is the estimated parameter. Only used for labelling.
    """
    if symbol not in ("eta", "t"):
        raise ValueError(f"symbol must be 'eta' or 't', got {symbol!r}")
    eta = _check_unit_interval(symbol, eta)
    ops = (np.sqrt(1 - 3 * eta / 4) * I2,) + tuple(np.sqrt(eta / 4) * s for s in (SIGMA_X, SIGMA_Y, SIGMA_Z))
    return KrausChannel(ops, DEPOLARIZING, {symbol: eta})


def amplitude_damping(eta: float) -> KrausChannel:
    """Decay ``|1> -> |0>`` with probability eta."""
    eta = _check_unit_interval("eta", eta)
    k1 = np.array([[1, 0], [0, np.sqrt(1 - eta)]], dtype=complex)
    k2 = np.array([[0, np.sqrt(eta)], [0, 0]], dtype=complex)
    return KrausChannel((k1, k2), AMPLITUDE_DAMPING, {"eta": eta})


def phase_covariant(p: PhaseCovariantParams) -> KrausChannel:
    """Four-operator Kraus form of the general phase-covariant map.

    The published operator list carries ``sqrt(lambda_+)`` on both diagonal
    operators. That set is only trace preserving when ``lambda_+ = lambda_-``;
    otherwise the second diagonal operator is rebuilt with ``sqrt(lambda_-)``,
    which restores completeness. The angle uses the identity
    ``tan t = 2 eta_perp / (kappa + s) = (s - kappa) / (2 eta_perp)`` with
    ``s = sqrt(kappa^2 + 4 eta_perp^2)`` so the ``eta_perp -> 0`` corners stay
    finite.
    """
    kappa, eta_par, eta_perp = p.kappa, p.eta_par, p.eta_perp
    s = np.sqrt(kappa**2 + 4 * eta_perp**2)
    angle = np.arctan2(np.sqrt(max(s - kappa, 0.0)), np.sqrt(max(s + kappa, 0.0)))
    lam_plus = (1 + eta_par + s) / 2
    lam_minus = max((1 + eta_par - s) / 2, 0.0)
    c, sn = np.cos(angle), np.sin(angle)
    head = (
        np.sqrt(max((1 - eta_par + kappa) / 2, 0.0)) * np.array([[0, 1], [0, 0]], dtype=complex),
        np.sqrt(max((1 - eta_par - kappa) / 2, 0.0)) * np.array([[0, 0], [1, 0]], dtype=complex),
        np.sqrt(lam_plus) * np.array([[c, 0], [0, sn]], dtype=complex),
    )
    params = {"kappa": kappa, "eta_par": eta_par, "eta_perp": eta_perp}
    for lam4 in (lam_plus, lam_minus):
        k4 = np.sqrt(lam4) * np.array([[-sn, 0], [0, c]], dtype=complex)
        ch = KrausChannel(head + (k4,), PHASE_COVARIANT, params)
        err = ch.completeness_error()
        if err <= COMPLETENESS_TOL:
            return ch
    raise NotCPTP(f"Kraus completeness violated by {err:.3g}")


def make_channel(kind: str, value: float = 0.0, symbol: str = "eta") -> KrausChannel:
    """Construct one of the single-parameter families by name."""
    if kind == PAULI_XY:
        return pauli_xy(value)
    if kind == DEPOLARIZING:
        return depolarizing(value, symbol)
    if kind == AMPLITUDE_DAMPING:
        return amplitude_damping(value)
    if kind == IDENTITY:
        return identity_channel()
    raise UnknownChannelKind(f"unknown channel kind {kind!r}; expected one of {NOISE_FAMILIES + (IDENTITY,)}")


def phase_unitary(phi: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * phi)])


def apply_single_site(rho: np.ndarray, kraus_ops: Iterable[np.ndarray], site: int, n_qubits: int) -> np.ndarray:
    """Apply a single-qubit Kraus map to one site of an ``n_qubits`` register."""
    left, right = 2**site, 2 ** (n_qubits - site - 1)
    r = rho.reshape(left, 2, right, left, 2, right)
    out = np.zeros_like(r, dtype=complex)
    for k in kraus_ops:
        out += np.einsum("ab,ibjxcy,dc->iajxdy", k, r, k.conj(), optimize=False)
    return out.reshape(rho.shape)


def apply_channel(rho: np.ndarray, ch: KrausChannel, sites: SiteMap) -> np.ndarray:
    """Apply ``ch`` independently on every noisy site; other qubits are untouched."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (sites.dim, sites.dim):
        raise DimensionMismatch(f"density matrix shape {rho.shape} does not fit {sites.n_qubits} qubits")
    if ch.dim != 2:
        raise DimensionMismatch("only single-qubit channels can be embedded")
    for site in sorted(sites.noisy_sites):
        rho = apply_single_site(rho, ch.kraus_ops, site, sites.n_qubits)
    return rho


def superoperator(ch: KrausChannel, sites: SiteMap) -> np.ndarray:
    """Matrix ``S`` with ``E(rho).ravel() == S @ rho.ravel()`` for the embedded channel.

    Useful when the same channel is applied to many states.
    """
    dim = sites.dim
    cols = np.empty((dim * dim, dim * dim), dtype=complex)
    basis = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim * dim):
        basis.flat[idx] = 1.0
        cols[:, idx] = apply_channel(basis, ch, sites).ravel()
        basis.flat[idx] = 0.0
    return cols
