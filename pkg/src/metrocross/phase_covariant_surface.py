"""Two-use QFI difference between the ancilla-assisted and parallel strategies
over the general phase-covariant family.

For each grid point ``(kappa, eta_par)`` the transverse scaling is fixed by
``eta_perp = sqrt(1 + eta_par^2 - kappa^2) / 2``. That choice always meets
the second CPTP inequality with equality, so it sits on the boundary of the
admissible region; it is not the largest admissible ``eta_perp`` in general
(at ``kappa = 0, eta_par = 1`` the bound allows ``eta_perp = 1``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from metrocross.channels import PHASE_COVARIANT, PhaseCovariantParams, cptp_conditions_hold, phase_covariant
from metrocross.errors import MetrocrossError
from metrocross.optimizer import OptimizerOptions
from metrocross.strategies import StrategyConfig, evaluate

log = logging.getLogger(__name__)

NUDGE = 1e-9
DEFAULT_POINTS = 41


@dataclass(frozen=True)
class SurfacePoint:
    kappa: float
    eta_par: float
    eta_perp: float
    qfi_ancilla: float
    qfi_parallel: float

    @property
    def difference(self) -> float:
        return self.qfi_ancilla - self.qfi_parallel


@dataclass
class SurfaceResult:
    points: list[SurfacePoint] = field(default_factory=list)
    skipped: list[tuple[float, float, str]] = field(default_factory=list)
    failed: list[tuple[float, float, str]] = field(default_factory=list)

    def minimum(self) -> SurfacePoint:
        return min(self.points, key=lambda p: p.difference)

    def lookup(self, kappa: float, eta_par: float, tol: float = 1e-12) -> SurfacePoint | None:
        for p in self.points:
            if abs(p.kappa - kappa) <= tol and abs(p.eta_par - eta_par) <= tol:
                return p
        return None


def eta_perp_choice(kappa: float, eta_par: float) -> float:
    return float(np.sqrt(max(1 + eta_par**2 - kappa**2, 0.0)) / 2)


def admissible_params(kappa: float, eta_par: float) -> PhaseCovariantParams:
    """Channel parameters at a grid point, nudged by ``NUDGE`` off the boundary when roundoff demands it.

    Raises:
        NotCPTP or ParamOutOfRange: if the point is infeasible beyond roundoff.
    """
    if 1.0 < eta_par + abs(kappa) <= 1.0 + NUDGE:
        eta_par = max(0.0, 1.0 - abs(kappa))
    eta_perp = eta_perp_choice(kappa, eta_par)
    if eta_perp <= 0.0:
        eta_perp = NUDGE
    elif eta_perp >= 1.0:
        eta_perp = 1.0 - NUDGE
    if not cptp_conditions_hold(kappa, eta_par, eta_perp) and cptp_conditions_hold(kappa, eta_par, eta_perp - NUDGE):
        eta_perp -= NUDGE
    return PhaseCovariantParams(kappa, eta_par, eta_perp)


def surface_point(kappa: float, eta_par: float, opt: OptimizerOptions | None = None) -> SurfacePoint:
    """Optimized two-use QFIs at one grid point; the ancilla block is counted twice."""
    params = admissible_params(kappa, eta_par)
    ch = phase_covariant(params)
    anc = evaluate(StrategyConfig.make("ancilla", 2), PHASE_COVARIANT, 0.0, opt, channel=ch)
    par = evaluate(StrategyConfig.make("parallel", 2), PHASE_COVARIANT, 0.0, opt, channel=ch)
    return SurfacePoint(params.kappa, params.eta_par, params.eta_perp, anc.total_qfi, par.total_qfi)


def default_grid(points: int = DEFAULT_POINTS) -> tuple[np.ndarray, np.ndarray]:
    return np.linspace(-1.0, 1.0, points), np.linspace(0.0, 1.0, points)


def surface(
    grid_kappa: Sequence[float],
    grid_eta_par: Sequence[float],
    opt: OptimizerOptions | None = None,
) -> SurfaceResult:
    """Evaluate the difference on the grid, ordered by (kappa index, eta_par index).

    Infeasible points are listed in ``skipped``; points whose optimization
    fails are listed in ``failed`` without stopping the sweep.
    """
    result = SurfaceResult()
    for kappa in grid_kappa:
        for eta_par in grid_eta_par:
            kappa_f, eta_f = float(kappa), float(eta_par)
            try:
                params = admissible_params(kappa_f, eta_f)
            except MetrocrossError as exc:
                result.skipped.append((kappa_f, eta_f, str(exc)))
                continue
            try:
                result.points.append(surface_point(params.kappa, params.eta_par, opt))
            except MetrocrossError as exc:
                log.warning("surface point (%g, %g) failed: %s", kappa_f, eta_f, exc)
                result.failed.append((kappa_f, eta_f, str(exc)))
    return result
