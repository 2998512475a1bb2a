"""Metrology strategies, their optimized QFI per N channel uses, and crossovers.

A strategy is a block of probes (which see the noise and the phase) and
noiseless ancillas, repeated until N channel uses are spent. QFI is additive
over independent blocks, so ``total = repetitions * block``.

Closed-form references in this module keep the published expressions and
state the normalization they correspond to:

* ``amplitude_damping_ancilla_closed_form`` is the QFI of two uses (the
  ancilla-assisted block used twice); a single block carries half of it.
* ``amplitude_damping_parallel_closed_form`` is written in the efficiency
  ``1 - eta``; :func:`amplitude_damping_parallel_qfi` evaluates it at the
  efficiency, which is what matches the optimized two-probe QFI.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from metrocross.channels import (
    AMPLITUDE_DAMPING,
    DEPOLARIZING,
    NOISE_FAMILIES,
    PAULI_XY,
    KrausChannel,
    SiteMap,
    make_channel,
)
from metrocross.errors import NoSignChange, ParamOutOfRange, UnknownChannelKind, UnsupportedStrategy
from metrocross.fisher import phase_qfi, phase_qfi_with_gradient
from metrocross.optimizer import ConvergenceReport, OptimizerOptions, fix_gauge, maximize, plus_state

log = logging.getLogger(__name__)

PARALLEL = "parallel"
ANCILLA = "ancilla_assisted"
INTERMEDIATE = "intermediate"
CLASSICAL = "classical"
SEQUENTIAL = "sequential"
KINDS = (PARALLEL, ANCILLA, INTERMEDIATE, CLASSICAL, SEQUENTIAL)

#: Relative QFI difference below which two optimized strategies count as tied.
TIE_TOL = 1e-9

ALIASES = {"ancilla": ANCILLA, "ancilla-assisted": ANCILLA, "anc": ANCILLA, "inter": INTERMEDIATE}


def canonical_kind(name: str) -> str:
    name = ALIASES.get(name.strip().lower(), name.strip().lower())
    if name not in KINDS:
        raise UnsupportedStrategy(f"unknown strategy {name!r}; expected one of {KINDS}")
    return name


@dataclass(frozen=True)
class StrategyConfig:
    kind: str
    n_uses: int
    block_probes: int
    block_ancillas: int
    repetitions: int

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise UnsupportedStrategy(f"unknown strategy {self.kind!r}")
        if self.n_uses < 1 or self.block_probes < 1 or self.repetitions < 1 or self.block_ancillas < 0:
            raise UnsupportedStrategy(f"invalid block layout {self}")
        if self.kind != SEQUENTIAL and self.n_uses != self.block_probes * self.repetitions:
            raise UnsupportedStrategy(f"{self.kind}: n_uses must equal block_probes * repetitions")
        expected = {
            PARALLEL: (self.n_uses, 0, 1),
            ANCILLA: (1, 1, self.n_uses),
            INTERMEDIATE: (2, 1, self.n_uses // 2),
            CLASSICAL: (1, 0, self.n_uses),
        }.get(self.kind)
        if expected and (self.block_probes, self.block_ancillas, self.repetitions) != expected:
            raise UnsupportedStrategy(f"{self.kind} requires (probes, ancillas, repetitions) = {expected}")

    @classmethod
    def make(cls, kind: str, n_uses: int) -> StrategyConfig:
        kind = canonical_kind(kind)
        if kind == PARALLEL:
            return cls(kind, n_uses, n_uses, 0, 1)
        if kind == ANCILLA:
            return cls(kind, n_uses, 1, 1, n_uses)
        if kind == INTERMEDIATE:
            if n_uses % 2:
                raise UnsupportedStrategy(f"intermediate strategy needs an even number of uses, got {n_uses}")
            return cls(kind, n_uses, 2, 1, n_uses // 2)
        if kind == CLASSICAL:
            return cls(kind, n_uses, 1, 0, n_uses)
        return cls(kind, n_uses, 1, 0, 1)

    @property
    def block_qubits(self) -> int:
        return self.block_probes + self.block_ancillas

    def site_map(self) -> SiteMap:
        probes = range(self.block_probes)
        return SiteMap(self.block_qubits, probes, probes)


@dataclass
class StrategyEvaluation:
    eta: float
    total_qfi: float
    block_qfi: float
    optimal_state: np.ndarray
    optimizer_report: ConvergenceReport | None = None
    config: StrategyConfig | None = field(default=None, repr=False)


# closed forms ---------------------------------------------------------------


def pauli_xy_ancilla_closed_form(eta: float) -> float:
    return 1 - eta


def pauli_xy_parallel_bell_closed_form(eta: float) -> float:
    return 4 * (eta - 1) ** 4 / (2 * eta**2 - 2 * eta + 1)


def depolarizing_ancilla_closed_form(eta: float) -> float:
    return 2 * (1 - eta) ** 2 / (2 - eta)


def amplitude_damping_alpha(eta: float) -> float:
    """Ground-state amplitude of the optimal ancilla-assisted amplitude-damping probe."""
    s = np.sqrt(1 - eta)
    return float(np.sqrt(s / (1 + s)))


def amplitude_damping_ancilla_closed_form(eta: float) -> float:
    """Published ancilla-assisted QFI; equals two uses of the block."""
    return 8 * (1 - eta) / (np.sqrt(1 - eta) + 1) ** 2


def amplitude_damping_ancilla_block_qfi(eta: float) -> float:
    return amplitude_damping_ancilla_closed_form(eta) / 2


def amplitude_damping_epsilon(eta: float) -> float:
    """Ground-state amplitude of the optimal two-probe state ``e|00> + sqrt(1-e^2)|11>``.

    Symmetric under ``eta -> 1 - eta`` and singular at 0 and 1.
    """
    if not 0.0 < eta < 1.0:
        raise ParamOutOfRange(f"need 0 < eta < 1, got {eta}")
    e = eta
    num = e * (e * (2 * (e - 3) * e + 7) - 4) - np.sqrt((e - 1) ** 4 * (2 * (e - 1) * e + 1)) + 1
    return float(np.sqrt(num / ((e - 1) ** 3 * e)) / np.sqrt(2))


def amplitude_damping_parallel_closed_form(x: float) -> float:
    """Published two-probe QFI expression, as printed, in its own variable ``x``."""
    return 8 * (x**2 - np.sqrt(2 * x**2 - 2 * x + 1) - x + 1) / (x - 1) ** 2


def amplitude_damping_parallel_qfi(eta: float) -> float:
    """Two-probe QFI of the epsilon-family optimum at damping ``eta``.

    The published expression is a function of the efficiency, so it is
    evaluated at ``1 - eta``.
    """
    return amplitude_damping_parallel_closed_form(1 - eta)


def ancilla_state(a: float) -> np.ndarray:
    """``a|00> + sqrt(1 - a^2)|11>`` with qubit 0 the probe."""
    return np.array([a, 0, 0, np.sqrt(max(0.0, 1 - a * a))], dtype=complex)


def bell_state() -> np.ndarray:
    return ancilla_state(1 / np.sqrt(2))


def classical_reference(channel_kind: str, eta: float, n: int) -> float:
    """QFI of N uses of the unentangled ``|+>`` probe."""
    if not 0.0 <= eta <= 1.0:
        raise ParamOutOfRange(f"eta={eta} outside [0, 1]")
    if channel_kind in (PAULI_XY, DEPOLARIZING):
        return n * (1 - eta) ** 2
    if channel_kind == AMPLITUDE_DAMPING:
        return n * (1 - eta)
    raise UnknownChannelKind(f"no classical reference for {channel_kind!r}")


def literature_bound(channel_kind: str, eta: float, n: int) -> float | None:
    """Asymptotic upper bound on the parallel strategy, or None where none applies.

    The amplitude-damping bound is returned as printed (``N eta / (1 - eta)``);
    see :func:`amplitude_damping_bound_efficiency_form` for the same
    expression read with eta as the efficiency.
    """
    if channel_kind == PAULI_XY:
        return None
    if channel_kind not in (DEPOLARIZING, AMPLITUDE_DAMPING):
        raise UnknownChannelKind(f"no literature bound for {channel_kind!r}")
    if not 0.0 < eta < 1.0:
        raise ParamOutOfRange(f"bound diverges or vanishes at eta={eta}; need 0 < eta < 1")
    if channel_kind == DEPOLARIZING:
        q = (1 - eta) ** 1.25
        return n * q / (1 - q)
    return n * eta / (1 - eta)


def amplitude_damping_bound_efficiency_form(eta: float, n: int) -> float:
    """``N (1 - eta) / eta``: the printed bound with eta read as the efficiency."""
    if not 0.0 < eta < 1.0:
        raise ParamOutOfRange(f"need 0 < eta < 1, got {eta}")
    return n * (1 - eta) / eta


# optimization -----------------------------------------------------------------


def closed_form_seeds(cfg: StrategyConfig, channel_kind: str, eta: float) -> list[np.ndarray]:
    """States known to be optimal (or nearly) in some regime, used as starts."""
    seeds: list[np.ndarray] = []
    if cfg.block_probes == 1 and cfg.block_ancillas == 1:
        if channel_kind == AMPLITUDE_DAMPING and eta < 1:
            seeds.append(ancilla_state(amplitude_damping_alpha(eta)))
        seeds.append(bell_state())
    elif cfg.block_probes == 2 and cfg.block_ancillas == 0:
        if channel_kind == AMPLITUDE_DAMPING and 0 < eta < 1:
            seeds.append(ancilla_state(amplitude_damping_epsilon(eta)))
        seeds.append(bell_state())
    elif cfg.block_probes == 2 and cfg.block_ancillas == 1:
        seeds.append(np.kron(bell_state(), [1, 0]))
    return seeds


def canonical_ancilla_frame(psi: np.ndarray, n_probes: int, n_ancillas: int) -> np.ndarray:
    """Rotate the noiseless ancillas into a canonical basis.

    Any unitary on the ancillas leaves the QFI unchanged. The frame chosen
    makes the coefficient matrix (probe index x ancilla index) lower
    triangular with a non-negative diagonal, so an optimum of the form
    ``a|0>|0> + b|1>|1>`` is reported as such regardless of which ancilla
    basis the optimizer wandered into.
    """
    if n_ancillas == 0:
        return psi
    coeff = np.asarray(psi, dtype=complex).reshape(2**n_probes, 2**n_ancillas)
    q, r = np.linalg.qr(coeff.conj().T, mode="complete")
    diag = np.diag(r)
    phases = np.ones(q.shape[1], dtype=complex)
    nz = np.abs(diag) > 1e-14
    phases[: diag.size][nz] = (diag[nz] / np.abs(diag[nz])).conj()
    q = q * phases.conj()[None, :]
    out = (coeff @ q).ravel()
    return fix_gauge(out)


def _fixed_classical(cfg: StrategyConfig, ch: KrausChannel, eta: float) -> StrategyEvaluation:
    psi = plus_state(1)
    block = phase_qfi(psi, ch, cfg.site_map())
    return StrategyEvaluation(eta, cfg.repetitions * block, block, psi, None, cfg)


def evaluate(
    cfg: StrategyConfig,
    channel_kind: str,
    eta: float,
    opt: OptimizerOptions | None = None,
    *,
    seeds: Sequence[np.ndarray] = (),
    channel: KrausChannel | None = None,
) -> StrategyEvaluation:
    """Optimize the block state of ``cfg`` and return QFI per ``cfg.n_uses`` uses.

    Args:
        cfg: strategy layout.
        channel_kind: one of the single-parameter families, ignored when
            ``channel`` is given.
        eta: noise parameter.
        opt: optimizer options.
        seeds: extra starting states (e.g. a previous optimum).
        channel: explicit channel, for families outside the single-parameter ones.
    """
    opt = opt or OptimizerOptions()
    if cfg.kind == SEQUENTIAL:
        raise UnsupportedStrategy("the sequential strategy is only defined for noise estimation")
    ch = channel if channel is not None else make_channel(channel_kind, eta)
    if cfg.kind == CLASSICAL and not opt.optimize_classical:
        return _fixed_classical(cfg, ch, eta)

    sites = cfg.site_map()
    report = maximize(
        lambda psi: phase_qfi(psi, ch, sites),
        cfg.block_qubits,
        opt,
        value_and_grad=lambda psi: phase_qfi_with_gradient(psi, ch, sites),
        seeds=list(seeds) + closed_form_seeds(cfg, channel_kind, eta),
    )
    state = canonical_ancilla_frame(report.best_state, cfg.block_probes, cfg.block_ancillas)
    block = report.best_value
    return StrategyEvaluation(eta, cfg.repetitions * block, block, state, report, cfg)


@dataclass(frozen=True)
class CrossoverResult:
    eta: float
    bracket: tuple[float, float]
    qfi_a: float
    qfi_b: float
    iterations: int

    @property
    def bracket_width(self) -> float:
        return self.bracket[1] - self.bracket[0]

    @property
    def efficiency(self) -> float:
        return 1 - self.eta


def crossover(
    cfg_a: StrategyConfig,
    cfg_b: StrategyConfig,
    channel_kind: str,
    eta_lo: float,
    eta_hi: float,
    tol: float = 1e-3,
    opt: OptimizerOptions | None = None,
) -> CrossoverResult:
    """Bisect the noise level where the optimized totals of two strategies meet.

    Each midpoint re-optimizes both strategies, seeding them with the latest
    optimum found for each.

    Raises:
        NoSignChange: if ``total(a) - total(b)`` has the same sign at both ends.
    """
    if not 0.0 <= eta_lo < eta_hi <= 1.0:
        raise ParamOutOfRange(f"invalid bracket [{eta_lo}, {eta_hi}]")
    if channel_kind not in NOISE_FAMILIES:
        raise UnknownChannelKind(f"crossover needs one of {NOISE_FAMILIES}, got {channel_kind!r}")
    warm: dict[str, list[np.ndarray]] = {"a": [], "b": []}

    def diff(eta: float) -> tuple[float, float, float]:
        ea = evaluate(cfg_a, channel_kind, eta, opt, seeds=warm["a"])
        eb = evaluate(cfg_b, channel_kind, eta, opt, seeds=warm["b"])
        warm["a"] = [ea.optimal_state]
        warm["b"] = [eb.optimal_state]
        d = ea.total_qfi - eb.total_qfi
        return (0.0 if is_tie(ea.total_qfi, eb.total_qfi) else d), ea.total_qfi, eb.total_qfi

    lo, hi = eta_lo, eta_hi
    f_lo, qa, qb = diff(lo)
    if f_lo == 0:
        return CrossoverResult(lo, (lo, lo), qa, qb, 0)
    f_hi, qa, qb = diff(hi)
    if f_hi == 0:
        return CrossoverResult(hi, (hi, hi), qa, qb, 0)
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoSignChange(
            f"{cfg_a.kind} - {cfg_b.kind} has the same sign at eta={eta_lo} ({f_lo:.3g}) and eta={eta_hi} ({f_hi:.3g})"
        )
    iterations = 0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        f_mid, qa, qb = diff(mid)
        iterations += 1
        log.debug("bisection %d: eta=%.6f diff=%.3g", iterations, mid, f_mid)
        if f_mid == 0:
            return CrossoverResult(mid, (mid, mid), qa, qb, iterations)
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    mid = (lo + hi) / 2
    _, qa, qb = diff(mid)
    return CrossoverResult(mid, (lo, hi), qa, qb, iterations)


def is_tie(qa: float, qb: float) -> bool:
    """Equal within ``TIE_TOL`` relative, excluding the trivial tie where both vanish."""
    scale = max(abs(qa), abs(qb))
    return scale > TIE_TOL and abs(qa - qb) <= TIE_TOL * scale


def fig4_qfis(eta: float) -> tuple[float, float, float]:
    """QFIs of the alpha-state for the three amplitude-damping layouts.

    (i) both qubits damped and phase encoded, (ii) both damped but only the
    first encoded, (iii) the first damped and encoded, the second noiseless.
    """
    if not 0.0 < eta < 1.0:
        raise ParamOutOfRange(f"need 0 < eta < 1, got {eta}")
    ch = make_channel(AMPLITUDE_DAMPING, eta)
    psi = ancilla_state(amplitude_damping_alpha(eta))
    qfi_i = phase_qfi(psi, ch, SiteMap(2, (0, 1), (0, 1)))
    qfi_ii = phase_qfi(psi, ch, SiteMap(2, (0, 1), (0,)))
    qfi_iii = phase_qfi(psi, ch, SiteMap(2, (0,), (0,)))
    return qfi_i, qfi_ii, qfi_iii


def fig4_factors(eta: float) -> tuple[float, float]:
    """Ratios QFI(i)/QFI(ii) and QFI(iii)/QFI(ii) of :func:`fig4_qfis`."""
    qfi_i, qfi_ii, qfi_iii = fig4_qfis(eta)
    return qfi_i / qfi_ii, qfi_iii / qfi_ii
