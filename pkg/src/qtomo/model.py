"""Shared error pipeline for four-outcome tomography models.

Any model that exposes a 4x4 transfer matrix T (probabilities = T @ S for
Bloch 4-vectors S) gets its Fisher matrix, per-state error Delta and
state-averaged qTTF from the functions here.  The two concrete models,
the two-meter coupling and the parameterized circuit, both route through
this module.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np
from scipy.optimize import minimize

from .core import QuadratureRule, bloch_from_state, make_quadrature, worker_count

__all__ = [
    "SIGN_MATRIX",
    "SingularInformationError",
    "TomographyModel",
    "RestartOutcome",
    "OptimizationResult",
    "fisher_from_transfer",
    "fisher_matrix_form",
    "coefficient_rows_from_transfer",
    "delta_from_transfer",
    "delta_surface",
    "qttf_from_transfer",
    "minimize_with_restarts",
    "default_rule",
]

# Outcome sign patterns for the ordering (++, +-, -+, --): row 0 carries the
# first meter's sign k, row 1 the second meter's sign l, row 2 the product kl.
SIGN_MATRIX = np.array(
    [
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, 1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
    ]
)

# Probabilities at or below this are treated as vanished outcomes.
PROBABILITY_FLOOR = 1e-12

# Fisher eigenvalues below this mark an unidentifiable direction.
EIGENVALUE_FLOOR = 1e-12

_OUTCOME_LABELS = ("++", "+-", "-+", "--")


class SingularInformationError(ArithmeticError):
    """An outcome probability vanished; the Fisher matrix is undefined."""

    def __init__(self, outcome: int, probability: float):
        self.outcome = outcome
        self.probability = probability
        super().__init__(
            f"outcome {_OUTCOME_LABELS[outcome]} has probability "
            f"{probability:.3e}; information matrix is singular"
        )


class TomographyModel(Protocol):
    """Minimal contract shared by the concrete measurement models."""

    def transfer_matrix(self) -> np.ndarray: ...

    def probabilities(self, rho: np.ndarray) -> np.ndarray: ...


def _as_bloch(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state)
    if state.shape == (4,) and not np.iscomplexobj(state):
        return state.astype(float)
    return bloch_from_state(state)


def fisher_from_transfer(tmat: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Fisher matrix over (s1, s2, s3) for one input state.

    F_{mu nu} = sum_q T[q, mu] T[q, nu] / p_q with p = T @ S.  Raises
    SingularInformationError naming the first vanished outcome.
    """
    s = _as_bloch(state)
    p = tmat @ s
    if p.min() <= PROBABILITY_FLOOR:
        q = int(np.argmin(p))
        raise SingularInformationError(q, float(p[q]))
    ts = tmat[:, 1:]
    return ts.T @ (ts / p[:, None])


def coefficient_rows_from_transfer(tmat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Recover the sign-basis coefficient blocks from a transfer matrix.

    Returns (d0, d) where d0 has shape (3,) and d has shape (3, 3) with
    rows indexed by the sign patterns (k, l, kl) and columns by the Bloch
    component.  They satisfy T[:, 0] = 1/4 + SIGN_MATRIX.T @ d0 and
    T[:, 1:] = SIGN_MATRIX.T @ d; the inversion uses V V^T = 4 I.
    """
    d0 = 0.25 * SIGN_MATRIX @ (tmat[:, 0] - 0.25)
    d = 0.25 * SIGN_MATRIX @ tmat[:, 1:]
    return d0, d


def fisher_matrix_form(tmat: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Fisher matrix assembled as D^T (V P^-1 V^T) D.

    Algebraically identical to fisher_from_transfer because
    V^T D reproduces the s-columns of T; kept as an independent assembly
    path for the identity checks.
    """
    s = _as_bloch(state)
    p = tmat @ s
    if p.min() <= PROBABILITY_FLOOR:
        q = int(np.argmin(p))
        raise SingularInformationError(q, float(p[q]))
    _, d = coefficient_rows_from_transfer(tmat)
    middle = SIGN_MATRIX @ np.diag(1.0 / p) @ SIGN_MATRIX.T
    return d.T @ middle @ d


def delta_from_transfer(tmat: np.ndarray, state: np.ndarray) -> float:
    """Tr(F^-1) for one state; inf when F is singular or an outcome dies."""
    try:
        fisher = fisher_from_transfer(tmat, state)
    except SingularInformationError:
        return math.inf
    eigs = np.linalg.eigvalsh(fisher)
    if eigs.min() < EIGENVALUE_FLOOR:
        return math.inf
    return float(np.sum(1.0 / eigs))


def delta_surface(tmat: np.ndarray, bloch_nodes: np.ndarray) -> np.ndarray:
    """Vectorized Tr(F^-1) over Bloch columns, inf-tagged where singular."""
    p = tmat @ bloch_nodes
    ts = tmat[:, 1:]
    bad = p.min(axis=0) <= PROBABILITY_FLOOR
    safe_p = np.where(p <= PROBABILITY_FLOOR, 1.0, p)
    fish = np.einsum("qm,qn,qk->kmn", ts, ts, 1.0 / safe_p)
    eigs = np.linalg.eigvalsh(fish)
    bad |= eigs.min(axis=1) < EIGENVALUE_FLOOR
    with np.errstate(divide="ignore"):
        totals = np.sum(1.0 / np.maximum(eigs, 1e-300), axis=1)
    return np.where(bad, np.inf, totals)


def qttf_from_transfer(tmat: np.ndarray, rule: QuadratureRule) -> float:
    """Quadrature average of Tr(F^-1); inf as soon as any node is singular."""
    values = delta_surface(tmat, rule.bloch_nodes())
    if not np.all(np.isfinite(values)):
        return math.inf
    return rule.integrate(values)


def default_rule() -> QuadratureRule:
    """The 64x64 rule used wherever callers do not pass their own."""
    return make_quadrature(64, 64)


@dataclass(frozen=True)
class RestartOutcome:
    """One local search: where it started, where it ended, what it found."""

    start: np.ndarray
    params: np.ndarray
    value: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class OptimizationResult:
    params: np.ndarray
    value: float
    restarts: tuple[RestartOutcome, ...]


def minimize_with_restarts(
    objective: Callable[[np.ndarray], float],
    starts: Sequence[np.ndarray],
    *,
    xatol: float = 1e-6,
    fatol: float = 1e-6,
    maxiter: int = 2000,
) -> OptimizationResult:
    """Nelder-Mead from each start; the best end point wins.

    Non-finite objective values are fine (the simplex retreats from them).
    Restarts run on a thread pool sized by QTOMO_THREADS; with the default
    of one worker the loop is plain and sequential.
    """
    options = {"xatol": xatol, "fatol": fatol, "maxiter": maxiter}

    def run(x0: np.ndarray) -> RestartOutcome:
        res = minimize(objective, x0, method="Nelder-Mead", options=options)
        return RestartOutcome(
            start=np.asarray(x0, dtype=float),
            params=res.x,
            value=float(res.fun),
            iterations=int(res.nit),
            converged=bool(res.success),
        )

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, starts))
    else:
        outcomes = [run(x0) for x0 in starts]
    best = min(outcomes, key=lambda o: o.value)
    return OptimizationResult(
        params=best.params, value=best.value, restarts=tuple(outcomes)
    )
