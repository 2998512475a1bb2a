"""Deterministic multi-start maximization over pure qubit states.

States are searched on the unit sphere of either the full register or a
restricted subspace (real amplitudes, permutation-symmetric amplitudes, or
both). Objectives that can supply a gradient are polished with L-BFGS;
black-box objectives use an adaptive Nelder-Mead simplex. Either way each
start is restarted from its own endpoint until it stops improving.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from metrocross.errors import BadLength, OptimizerFailure

log = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]
ValueAndGrad = Callable[[np.ndarray], "tuple[float, np.ndarray]"]

GAUGE_TOL = 1e-12
MAX_RESTARTS = 5


@dataclass(frozen=True)
class OptimizerOptions:
    n_starts: int = 32
    seed: int = 42
    max_iters: int = 2000
    f_tol: float = 1e-10
    x_tol: float = 1e-8
    restrict_real: bool = False
    restrict_symmetric: bool = False
    optimize_classical: bool = False

    def __post_init__(self) -> None:
        if self.n_starts < 1:
            raise ValueError("n_starts must be at least 1")
        if self.max_iters < 1 or self.f_tol <= 0 or self.x_tol <= 0:
            raise ValueError("max_iters and tolerances must be positive")


@dataclass(frozen=True)
class StateParametrization:
    """Gauge-fixed coordinates of a pure state.

    ``params`` are the exponential-map coordinates of the state around
    ``|0...0>`` in the chosen subspace basis: zero is ``|0...0>``, and the
    decoded state always has its first non-negligible amplitude real and
    non-negative.
    """

    n_qubits: int
    params: np.ndarray
    real: bool = False
    symmetric: bool = False

    def state(self) -> np.ndarray:
        return decode(self)


@dataclass
class ConvergenceReport:
    best_value: float
    best_params: np.ndarray
    best_state: np.ndarray
    starts_converged: int
    spread: float
    start_values: list[float] = field(default_factory=list)
    seed_values: list[float] = field(default_factory=list)


@lru_cache(maxsize=None)
def subspace_basis(n_qubits: int, symmetric: bool) -> np.ndarray:
    """Orthonormal columns spanning the search subspace.

    The symmetric subspace is spanned by normalized Dicke states ordered by
    excitation number, so its first column is ``|0...0>`` as well.
    """
    dim = 2**n_qubits
    if not symmetric:
        return np.eye(dim)
    weights = np.array([bin(i).count("1") for i in range(dim)])
    basis = np.zeros((dim, n_qubits + 1))
    for k in range(n_qubits + 1):
        mask = weights == k
        basis[mask, k] = 1 / np.sqrt(mask.sum())
    basis.setflags(write=False)
    return basis


def n_params(n_qubits: int, real: bool = False, symmetric: bool = False) -> int:
    k = n_qubits + 1 if symmetric else 2**n_qubits
    return k - 1 if real else 2 * (k - 1)


def fix_gauge(psi: np.ndarray) -> np.ndarray:
    """Remove the global phase so the first non-negligible amplitude is real and positive."""
    psi = np.asarray(psi, dtype=complex)
    nz = np.flatnonzero(np.abs(psi) > GAUGE_TOL)
    if nz.size == 0:
        return psi
    a = psi[nz[0]]
    return psi * (abs(a) / a)


def decode(p: StateParametrization) -> np.ndarray:
    basis = subspace_basis(p.n_qubits, p.symmetric)
    k = basis.shape[1]
    params = np.asarray(p.params, dtype=float)
    if params.shape != (n_params(p.n_qubits, p.real, p.symmetric),):
        raise BadLength(
            f"expected {n_params(p.n_qubits, p.real, p.symmetric)} parameters, got {params.size}"
        )
    c = params if p.real else params[: k - 1] + 1j * params[k - 1 :]
    r = float(np.linalg.norm(c))
    u = np.zeros(k, dtype=complex)
    u[0] = np.cos(r)
    if r > 0:
        u[1:] = np.sin(r) * c / r
    psi = basis @ u
    return fix_gauge(psi / np.linalg.norm(psi))


def encode(psi: np.ndarray, n_qubits: int, real: bool = False, symmetric: bool = False) -> StateParametrization:
    """Inverse of :func:`decode` up to global phase.

    Raises:
        ValueError: if ``psi`` does not lie in the requested subspace.
    """
    basis = subspace_basis(n_qubits, symmetric)
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.shape != (basis.shape[0],):
        raise BadLength(f"state of length {psi.size} does not fit {n_qubits} qubits")
    psi = fix_gauge(psi / np.linalg.norm(psi))
    u = basis.T @ psi
    if abs(np.linalg.norm(u) - 1) > 1e-9:
        raise ValueError("state is not permutation symmetric")
    if real and np.max(np.abs(u.imag)) > 1e-9:
        raise ValueError("state has complex amplitudes after gauge fixing")
    r = float(np.arccos(np.clip(u[0].real, -1.0, 1.0)))
    c = u[1:] * (r / np.sin(r)) if r > 0 else np.zeros(u.size - 1, dtype=complex)
    params = c.real.copy() if real else np.concatenate([c.real, c.imag])
    return StateParametrization(n_qubits, params, real, symmetric)


def ghz_state(n_qubits: int) -> np.ndarray:
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def plus_state(n_qubits: int) -> np.ndarray:
    return np.full(2**n_qubits, 2 ** (-n_qubits / 2), dtype=complex)


def zero_state(n_qubits: int) -> np.ndarray:
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[0] = 1
    return psi


def default_seeds(n_qubits: int) -> list[np.ndarray]:
    return [ghz_state(n_qubits), plus_state(n_qubits), zero_state(n_qubits)]


class _Search:
    """One maximization problem in subspace coordinates."""

    def __init__(self, objective, value_and_grad, n_qubits, opt):
        self.objective = objective
        self.value_and_grad = value_and_grad
        self.n_qubits = n_qubits
        self.opt = opt
        self.basis = subspace_basis(n_qubits, opt.restrict_symmetric)
        self.k = self.basis.shape[1]

    def project(self, psi: np.ndarray) -> np.ndarray | None:
        """Closest subspace state, or None if ``psi`` has no weight there."""
        u = self.basis.T @ np.asarray(psi, dtype=complex)
        if self.opt.restrict_real:
            u = fix_gauge(u).real.astype(complex)
        norm = np.linalg.norm(u)
        if norm < 1e-9:
            return None
        return self.basis @ (u / norm)

    def random_state(self, rng: np.random.Generator) -> np.ndarray:
        u = rng.normal(size=self.k) + (0 if self.opt.restrict_real else 1j * rng.normal(size=self.k))
        return self.basis @ (u / np.linalg.norm(u))

    def value(self, psi: np.ndarray) -> float:
        return float(self.objective(psi))

    # gradient route: unnormalized coordinates c with psi = B c / |c|
    def _to_coords(self, psi):
        u = self.basis.T @ psi
        return u.real.copy() if self.opt.restrict_real else np.concatenate([u.real, u.imag])

    def _from_coords(self, x):
        c = x.astype(complex) if self.opt.restrict_real else x[: self.k] + 1j * x[self.k :]
        norm = np.linalg.norm(c)
        return c, norm

    def _fun_grad(self, x):
        c, norm = self._from_coords(x)
        if not np.isfinite(norm) or norm == 0:
            return np.inf, np.zeros_like(x)
        psi = self.basis @ (c / norm)
        value, h = self.value_and_grad(psi)
        g = self.basis.T @ (h - (psi.conj() @ h) * psi) / norm
        grad = 2 * g.real if self.opt.restrict_real else 2 * np.concatenate([g.real, g.imag])
        return -value, -grad

    def _local_grad(self, psi):
        x = self._to_coords(psi)
        res = minimize(
            self._fun_grad, x, jac=True, method="L-BFGS-B",
            options={"maxiter": self.opt.max_iters, "ftol": self.opt.f_tol * 1e-3, "gtol": self.opt.x_tol * 1e-2},
        )
        c, norm = self._from_coords(res.x)
        return self.basis @ (c / norm), -float(res.fun), res.nit < self.opt.max_iters

    # derivative-free route: exponential-map coordinates
    def _local_simplex(self, psi):
        real, sym = self.opt.restrict_real, self.opt.restrict_symmetric
        x0 = encode(psi, self.n_qubits, real, sym).params

        def f(x):
            val = self.value(decode(StateParametrization(self.n_qubits, x, real, sym)))
            return -val if np.isfinite(val) else np.inf

        res = minimize(
            f, x0, method="Nelder-Mead",
            options={"maxiter": self.opt.max_iters, "xatol": self.opt.x_tol, "fatol": self.opt.f_tol, "adaptive": True},
        )
        psi_out = decode(StateParametrization(self.n_qubits, res.x, real, sym))
        return psi_out, -float(res.fun), res.nit < self.opt.max_iters

    def local(self, psi: np.ndarray) -> tuple[np.ndarray, float, bool]:
        step = self._local_grad if self.value_and_grad is not None else self._local_simplex
        best_psi, best_val = psi, self.value(psi)
        converged = False
        for _ in range(MAX_RESTARTS):
            psi_new, _, converged = step(best_psi)
            val = self.value(psi_new)
            if not np.isfinite(val) or val <= best_val + self.opt.f_tol * max(1.0, abs(best_val)):
                if np.isfinite(val) and val > best_val:
                    best_psi, best_val = psi_new, val
                break
            best_psi, best_val = psi_new, val
        return best_psi, best_val, converged


def maximize(
    objective: Objective,
    n_qubits: int,
    opt: OptimizerOptions | None = None,
    *,
    value_and_grad: ValueAndGrad | None = None,
    seeds: Sequence[np.ndarray] = (),
) -> ConvergenceReport:
    """Maximize ``objective(psi)`` over normalized ``n_qubits`` states.

    Args:
        objective: real function of a state vector; must be invariant under
            global phase.
        n_qubits: register size.
        opt: search options. Structured seeds (``seeds`` first, then GHZ,
            ``|+>^n`` and ``|0...0>``) are always searched; pseudo-random
            starts drawn from ``opt.seed`` fill up to ``opt.n_starts``.
        value_and_grad: optional ``psi -> (value, dJ/d conj(psi))``; when
            given, starts are polished with L-BFGS instead of a simplex.
        seeds: caller-provided structured starting states.

    Raises:
        OptimizerFailure: if no start reaches a finite objective value.
    """
    opt = opt or OptimizerOptions()
    search = _Search(objective, value_and_grad, n_qubits, opt)
    rng = np.random.default_rng(opt.seed)

    structured: list[np.ndarray] = []
    for s in list(seeds) + default_seeds(n_qubits):
        s = np.asarray(s, dtype=complex).ravel()
        if s.size != 2**n_qubits:
            raise BadLength(f"seed of length {s.size} does not fit {n_qubits} qubits")
        p = search.project(s / np.linalg.norm(s))
        if p is not None and not any(abs(np.vdot(p, q)) > 1 - 1e-12 for q in structured):
            structured.append(p)
    starts = structured + [search.random_state(rng) for _ in range(max(0, opt.n_starts - len(structured)))]

    seed_values = [search.value(s) for s in structured]
    candidates: list[tuple[float, np.ndarray]] = []
    values, converged = [], []
    for i, start in enumerate(starts):
        try:
            psi, val, ok = search.local(start)
        except (FloatingPointError, np.linalg.LinAlgError) as exc:
            log.debug("start %d failed: %s", i, exc)
            values.append(np.nan)
            continue
        values.append(val)
        if np.isfinite(val):
            candidates.append((val, psi))
            if ok:
                converged.append(val)
    for val, s in zip(seed_values, structured):
        if np.isfinite(val):
            candidates.append((val, s))
    if not candidates:
        raise OptimizerFailure(f"no start reached a finite objective value ({len(starts)} starts)")

    best_val = max(v for v, _ in candidates)
    for val, s in zip(seed_values, structured):
        if np.isfinite(val) and best_val < val - opt.f_tol:
            psi, v, _ = search.local(s)
            candidates.append((v, psi))
            best_val = max(best_val, v)

    # among equal-value optima report the one closest to the first structured seed
    ref = structured[0]
    floor = best_val - opt.f_tol * max(1.0, abs(best_val))
    floor = max([floor] + [v for v in seed_values if np.isfinite(v)])
    tied = [psi for v, psi in candidates if v >= floor]
    best_psi = max(tied, key=lambda psi: abs(np.vdot(ref, psi)))
    best_psi = fix_gauge(best_psi / np.linalg.norm(best_psi))
    best_value = search.value(best_psi)

    spread = float(max(converged) - min(converged)) if converged else float("nan")
    params = encode(best_psi, n_qubits, False, False).params
    return ConvergenceReport(
        best_value=best_value,
        best_params=params,
        best_state=best_psi,
        starts_converged=len(converged),
        spread=spread,
        start_values=values,
        seed_values=seed_values,
    )
