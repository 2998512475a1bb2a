"""Estimating the depolarizing probability ``t`` itself.

Here the unknown is the noise strength, not a phase. The depolarizing map is
built with the ``t`` label; ``p`` in the sequential closed forms is the same
parameter. All closed forms are singular at ``t = 0`` or ``t = 1``, so
every function requires ``0 < t < 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from metrocross.channels import SiteMap, apply_channel, depolarizing, superoperator
from metrocross.errors import NoSignChange, ParamOutOfRange
from metrocross.fisher import BURES_STEP, classical_fisher, parameter_qfi_with_gradient, qfi_bures
from metrocross.optimizer import OptimizerOptions, maximize, plus_state

SEQUENTIAL_1 = "sequential_1"
SEQUENTIAL_2 = "sequential_2"
SEQUENTIAL_3 = "sequential_3"
NOON_HALF = "noon_half"
ANCILLA = "ancilla"
OPTIMAL_TWO_PROBE = "optimal_two_probe"
CASES = (SEQUENTIAL_1, SEQUENTIAL_2, SEQUENTIAL_3, NOON_HALF, ANCILLA, OPTIMAL_TWO_PROBE)

#: Grid bounds used for sweeps; the closed forms blow up at the endpoints.
T_MIN, T_MAX = 0.01, 0.99

#: Relative gain over the single-pass probe that counts as an entanglement advantage.
ADVANTAGE_THRESHOLD = 1e-4


@dataclass(frozen=True)
class DepolEstimationCase:
    t: float
    strategy: str

    def __post_init__(self) -> None:
        _check_t(self.t)
        if self.strategy not in CASES:
            raise ValueError(f"unknown case {self.strategy!r}; expected one of {CASES}")


def _check_t(t: float) -> float:
    t = float(t)
    if not 0.0 < t < 1.0:
        raise ParamOutOfRange(f"t={t} must lie strictly inside (0, 1)")
    return t


# closed forms ------------------------------------------------------------------


def sequential_fi(t: float, passes: int) -> float:
    """Fisher information of one probe sent ``passes`` times through the channel."""
    p = _check_t(t)
    if passes == 1:
        return 1 / (2 * p - p**2)
    if passes == 2:
        return 4 * (p - 1) ** 2 / ((2 - p) * p * (p**2 - 2 * p + 2))
    if passes == 3:
        return -9 * (p - 1) ** 4 / (p * (p**2 - 3 * p + 3) * (p**3 - 3 * p**2 + 3 * p - 2))
    raise ParamOutOfRange(f"closed forms exist for 1, 2 or 3 passes, got {passes}")


def noon_fi(t: float) -> float:
    """Published two-probe maximally-entangled QFI, evaluated as printed.

    This expression does not equal the QFI of the Bell state with both
    qubits through the channel; :func:`noon_fi_exact` gives that value.
    """
    t = _check_t(t)
    return 0.75 * (t - 1) ** 2 * (2 * t - t**2) * (3 / (3 * t**2 - 6 * t + 4) + 4 / ((t - 2) ** 2 * t**2))


def noon_spectrum(t: float) -> np.ndarray:
    """Eigenvalues of the Bell state after depolarizing both qubits: one singlet-free weight, three equal."""
    a, b = 1 - 3 * t / 4, t / 4
    p0 = a * a + 3 * b * b
    p1 = 2 * a * b + 2 * b * b
    return np.array([p0, p1, p1, p1])


def noon_spectrum_derivative(t: float) -> np.ndarray:
    d0 = -1.5 * (1 - 0.75 * t) + 0.375 * t
    d1 = 0.5 - 0.5 * t
    return np.array([d0, d1, d1, d1])


def noon_fi_exact(t: float) -> float:
    """QFI of the Bell state with both qubits depolarized.

    The output is Bell-diagonal with t-independent eigenvectors, so the QFI
    is the classical Fisher information of its spectrum.
    """
    t = _check_t(t)
    return classical_fisher(noon_spectrum, t, derivative_fn=noon_spectrum_derivative)


def ancilla_fi(t: float) -> float:
    t = _check_t(t)
    return 3 / (4 * t - 3 * t**2)


# numeric pipelines ---------------------------------------------------------------


def depolarized_state(psi: np.ndarray, sites: SiteMap, t: float) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return apply_channel(np.outer(psi, psi.conj()), depolarizing(t, symbol="t"), sites)


def bures_qfi_of_state(psi: np.ndarray, sites: SiteMap, t: float, dt: float = BURES_STEP) -> float:
    """Bures QFI for ``t`` of the pure input ``psi`` depolarized on ``sites``."""
    _check_t(t)
    return qfi_bures(lambda s: depolarized_state(psi, sites, s), t, dt)


def sequential_fi_numeric(t: float, passes: int) -> float:
    """Fisher information of the spectrum of ``E^passes(|+><+|)`` built by composing channels."""
    _check_t(t)
    if passes < 1:
        raise ParamOutOfRange(f"passes must be positive, got {passes}")
    sites = SiteMap(1, (0,))

    def spectrum(s: float) -> np.ndarray:
        rho = np.outer(plus_state(1), plus_state(1).conj())
        ch = depolarizing(s, symbol="t")
        for _ in range(passes):
            rho = apply_channel(rho, ch, sites)
        return np.sort(np.linalg.eigvalsh(rho))

    return classical_fisher(spectrum, t)


def bell_state() -> np.ndarray:
    return np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def noon_fi_numeric(t: float, dt: float = BURES_STEP) -> float:
    return bures_qfi_of_state(bell_state(), SiteMap(2, (0, 1)), t, dt)


def ancilla_fi_numeric(t: float, dt: float = BURES_STEP) -> float:
    return bures_qfi_of_state(bell_state(), SiteMap(2, (0,)), t, dt)


def bures_objective(sites: SiteMap, t: float, dt: float = BURES_STEP):
    """``psi -> Bures QFI`` at fixed ``t``, with both shifted channels precomputed."""
    _check_t(t)
    if t - dt / 2 < 0 or t + dt / 2 > 1:
        raise ParamOutOfRange(f"t={t} with dt={dt} leaves [0, 1]")
    maps = {s: superoperator(depolarizing(s, symbol="t"), sites) for s in (t - dt / 2, t + dt / 2)}
    dim = sites.dim

    def objective(psi: np.ndarray) -> float:
        psi = np.asarray(psi, dtype=complex).ravel()
        vec = np.outer(psi, psi.conj()).ravel()
        return qfi_bures(lambda s: (maps[s] @ vec).reshape(dim, dim), t, dt)

    return objective


def bures_options(n_starts: int = 8, seed: int = 42) -> OptimizerOptions:
    """Search options matched to the roundoff floor of the finite-difference Bures QFI.

    With ``dt = 1e-4`` the fidelity is resolved to about ``1e-16``, which
    puts the QFI noise near ``1e-7``; simplex tolerances at that level never
    trigger and every start runs to the iteration cap.
    """
    return OptimizerOptions(n_starts=n_starts, seed=seed, max_iters=4000, f_tol=1e-5, x_tol=1e-4)


def optimal_two_probe_fi(t: float, opt: OptimizerOptions | None = None) -> tuple[float, np.ndarray]:
    """Maximize the Bures QFI over two-qubit probes with both qubits depolarized."""
    sites = SiteMap(2, (0, 1))
    report = maximize(bures_objective(sites, t), 2, opt or bures_options(), seeds=[bell_state()])
    return report.best_value, report.best_state


def bell_pairs_state() -> np.ndarray:
    """Two Bell pairs on a register ordered (probe, probe, ancilla, ancilla), pairing qubits 0-2 and 1-3."""
    psi = np.zeros(16, dtype=complex)
    for a in (0, 1):
        for b in (0, 1):
            psi[(a << 3) | (b << 2) | (a << 1) | b] = 0.5
    return psi


def depolarizing_maps(sites: SiteMap, t: float, h: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Superoperator of the embedded depolarizing map at ``t`` and its exact derivative.

    The map is a polynomial of degree ``len(noisy_sites)`` in ``t``; for up
    to two noisy sites the central difference is exact up to roundoff.
    """
    if len(sites.noisy_sites) > 2:
        raise ValueError("exact derivative implemented for at most two noisy sites")
    lo, hi = max(0.0, t - h), min(1.0, t + h)
    smap = superoperator(depolarizing(t, symbol="t"), sites)
    dsmap = (superoperator(depolarizing(hi, symbol="t"), sites) - superoperator(depolarizing(lo, symbol="t"), sites)) / (hi - lo)
    return smap, dsmap


def spectral_t_qfi(psi: np.ndarray, sites: SiteMap, t: float) -> float:
    """QFI for ``t`` from the eigendecomposition of the output and its exact derivative."""
    _check_t(t)
    smap, dsmap = depolarizing_maps(sites, t)
    return parameter_qfi_with_gradient(psi, smap, dsmap)[0]


@dataclass(frozen=True)
class FourQubitCheck:
    t: float
    spectral_value: float
    bures_value: float
    reference: float
    state: np.ndarray

    @property
    def excess(self) -> float:
        return self.bures_value - self.reference

    @property
    def spectral_excess(self) -> float:
        return self.spectral_value - self.reference


def four_qubit_ancilla_search(t: float, opt: OptimizerOptions | None = None) -> FourQubitCheck:
    """Best two-probe, two-ancilla state for estimating ``t``, compared with two Bell pairs.

    The search maximizes the spectral QFI. The finite-difference Bures QFI
    is not usable as a search objective here: noiseless ancillas allow
    nearly rank-deficient outputs, where ``dt = 1e-4`` is no longer small
    against the smallest eigenvalues and the estimate runs away. The Bures
    QFI is evaluated at the optimum as an independent check.
    """
    _check_t(t)
    sites = SiteMap(4, (0, 1))
    smap, dsmap = depolarizing_maps(sites, t)
    report = maximize(
        lambda psi: parameter_qfi_with_gradient(psi, smap, dsmap)[0],
        4,
        opt or OptimizerOptions(n_starts=8),
        value_and_grad=lambda psi: parameter_qfi_with_gradient(psi, smap, dsmap),
        seeds=[bell_pairs_state()],
    )
    bures = bures_qfi_of_state(report.best_state, sites, t)
    return FourQubitCheck(t, report.best_value, bures, 2 * ancilla_fi(t), report.best_state)


def four_qubit_ancilla_check(t: float, opt: OptimizerOptions | None = None) -> float:
    """Excess Bures QFI of the best four-qubit probe over two Bell pairs, ``best - 2 J_anc(t)``."""
    return four_qubit_ancilla_search(t, opt).excess


# crossovers -----------------------------------------------------------------------


def noon_sequential_crossover(lo: float = 0.05, hi: float = 0.6, exact: bool = False) -> float:
    """``t`` where the plotted ``J_NOON / 2`` meets the single-pass probe."""
    fn = noon_fi_exact if exact else noon_fi
    f = lambda t: fn(t) / 2 - sequential_fi(t, 1)  # noqa: E731
    if np.sign(f(lo)) == np.sign(f(hi)):
        raise NoSignChange(f"no NOON crossing on [{lo}, {hi}]")
    return float(brentq(f, lo, hi, xtol=1e-12))


def two_probe_advantage(t: float, opt: OptimizerOptions | None = None) -> float:
    """Relative gain of the optimized two-probe QFI per use over the single-pass probe."""
    j1 = sequential_fi(t, 1)
    return (optimal_two_probe_fi(t, opt)[0] / 2 - j1) / j1


def two_probe_sequential_crossover(
    lo: float = 0.25,
    hi: float = 0.6,
    tol: float = 1e-3,
    threshold: float = ADVANTAGE_THRESHOLD,
    opt: OptimizerOptions | None = None,
) -> float:
    """Largest ``t`` at which the optimized two-probe state still beats the single-pass probe.

    Two unentangled probes are feasible for the two-probe search, so past
    the crossing the advantage is zero rather than negative. The crossing
    is bisected on ``advantage > threshold`` instead of a sign change.
    """
    a_lo, a_hi = two_probe_advantage(lo, opt), two_probe_advantage(hi, opt)
    if not (a_lo > threshold >= a_hi):
        raise NoSignChange(
            f"two-probe advantage is {a_lo:.3g} at t={lo} and {a_hi:.3g} at t={hi}; "
            f"expected it to drop below {threshold:g} inside the bracket"
        )
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if two_probe_advantage(mid, opt) > threshold:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def figure_rows(ts: Sequence[float], opt: OptimizerOptions | None = None) -> list[dict[str, float]]:
    """Per-use Fisher information of every plotted scheme at each ``t``."""
    rows = []
    for t in ts:
        two_probe, _ = optimal_two_probe_fi(t, opt)
        rows.append(
            {
                "t": float(t),
                "sequential_1": sequential_fi(t, 1),
                "sequential_2_per_use": sequential_fi(t, 2) / 2,
                "sequential_3_per_use": sequential_fi(t, 3) / 3,
                "noon_half": noon_fi(t) / 2,
                "noon_exact_half": noon_fi_exact(t) / 2,
                "optimal_two_probe_half": two_probe / 2,
                "ancilla": ancilla_fi(t),
            }
        )
    return rows
