"""Twelve-parameter estimation circuit on a (meter A, system, meter B) register.

Four generic one-qubit gates, two CNOTs fanned out from the system, and
x-basis readout of both meters.  The circuit family contains measurement
settings whose average error reaches the four-outcome optimum of 8.0, a
little over twice the best single-shot error of the two-meter coupling
on a per-component basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import HADAMARD, SIGMA, QuadratureRule, check_density, cnot_matrix, kron3
from .model import (
    OptimizationResult,
    default_rule,
    minimize_with_restarts,
    qttf_from_transfer,
)

__all__ = [
    "REFERENCE_OPTIMUM",
    "CircuitModel",
    "u3",
    "build_circuit",
    "circuit_transfer_matrix",
    "qttf_circuit",
    "optimize_circuit",
]

# A parameter set that attains the family's optimal average error of 8.0
# under the half-angle gate convention (see build_circuit).  Layout: one
# (theta, phi, lambda) triple per gate, ordered A1, A2, B1, B2.
REFERENCE_OPTIMUM = (
    0.59, 1.58, 2.52,
    2.55, 1.94, 0.31,
    0.70, 4.31, 3.46,
    0.67, 6.47, 4.47,
)

_IDENTITY2 = np.eye(2, dtype=complex)

# Register layout (A, S, B); qubit 0 is the leftmost factor.
_CNOT_S_TO_A = cnot_matrix(control=1, target=0)
_CNOT_S_TO_B = cnot_matrix(control=1, target=2)


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    """Generic one-qubit gate with full-angle entries.

    [[cos(theta), -e^{i lam} sin(theta)],
     [e^{i phi} sin(theta), e^{i(phi+lam)} cos(theta)]]

    Note the full angle: u3(pi/2, 0, pi) is the bit flip.  Hardware gate
    sets usually put theta/2 in the entries; build_circuit handles that
    choice explicitly.
    """
    ct, st = math.cos(theta), math.sin(theta)
    return np.array(
        [
            [ct, -np.exp(1.0j * lam) * st],
            [np.exp(1.0j * phi) * st, np.exp(1.0j * (phi + lam)) * ct],
        ]
    )


def _gate(triple: np.ndarray, half_angle: bool) -> np.ndarray:
    theta, phi, lam = triple
    if half_angle:
        theta = theta / 2.0
    return u3(theta, phi, lam)


@dataclass(frozen=True)
class CircuitModel:
    """Compiled circuit: the 8x8 block unitary plus its transfer matrix."""

    params: tuple[float, ...]
    half_angle: bool
    unitary: np.ndarray = field(repr=False, compare=False)
    _tmat: np.ndarray = field(repr=False, compare=False)

    def transfer_matrix(self) -> np.ndarray:
        return self._tmat

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        return simulate_circuit_probabilities(rho, self.unitary)

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self._tmat))


def _block_unitary(params: np.ndarray, half_angle: bool) -> np.ndarray:
    triples = params.reshape(4, 3)
    gate_a1 = _gate(triples[0], half_angle)
    gate_a2 = _gate(triples[1], half_angle)
    gate_b1 = _gate(triples[2], half_angle)
    gate_b2 = _gate(triples[3], half_angle)

    unitary = kron3(gate_a1, _IDENTITY2, _IDENTITY2)
    unitary = _CNOT_S_TO_A @ unitary
    unitary = kron3(gate_a2, HADAMARD, gate_b1) @ unitary
    unitary = _CNOT_S_TO_B @ unitary
    unitary = kron3(_IDENTITY2, HADAMARD, gate_b2) @ unitary
    return unitary


def simulate_circuit_probabilities(rho0: np.ndarray, unitary: np.ndarray) -> np.ndarray:
    """Meter outcome probabilities (++, +-, -+, --) for a block unitary.

    Input is rho0 on the system with both meters in |+>; readout applies
    Hadamards to the meters and takes the z-basis diagonal.
    """
    rho0 = check_density(rho0)
    plus = np.full((2, 2), 0.5, dtype=complex)
    rho = kron3(plus, rho0, plus)
    full = kron3(HADAMARD, _IDENTITY2, HADAMARD) @ unitary
    final = full @ rho @ full.conj().T
    diag = np.real(np.diagonal(final))
    probs = np.empty(4)
    for idx, (i, j) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        # meter A is qubit 0, meter B qubit 2; system traced out
        probs[idx] = diag[4 * i + j] + diag[4 * i + j + 2]
    return probs


def build_circuit(params, half_angle: bool = True) -> CircuitModel:
    """Assemble the circuit and extract its transfer matrix.

    Parameters
    ----------
    params:
        Twelve reals, a (theta, phi, lambda) triple for each of the gates
        A1, A2, B1, B2.
    half_angle:
        Interpret each theta as hardware gates do, with theta/2 inside the
        matrix entries.  This is the convention under which
        REFERENCE_OPTIMUM reaches the average error 8.0; pass False to
        feed the triples to u3 unchanged.
    """
    arr = np.asarray(params, dtype=float)
    if arr.shape != (12,):
        raise ValueError("expected 12 circuit parameters")
    unitary = _block_unitary(arr, half_angle)

    def probs(rho: np.ndarray) -> np.ndarray:
        return simulate_circuit_probabilities(rho, unitary)

    eye = np.eye(2, dtype=complex)
    column0 = probs(0.5 * eye)
    tmat = np.empty((4, 4))
    tmat[:, 0] = column0
    for mu in (1, 2, 3):
        tmat[:, mu] = probs(0.5 * (eye + SIGMA[mu])) - column0
    return CircuitModel(
        params=tuple(arr), half_angle=half_angle, unitary=unitary, _tmat=tmat
    )


def circuit_transfer_matrix(model: CircuitModel) -> np.ndarray:
    """The cached 4x4 transfer matrix of a built circuit."""
    return model.transfer_matrix()


def qttf_circuit(
    params,
    rule: QuadratureRule | None = None,
    half_angle: bool = True,
) -> float:
    """Pure-state average of Tr(F^-1) for the circuit at these parameters."""
    if rule is None:
        rule = default_rule()
    model = build_circuit(params, half_angle=half_angle)
    return qttf_from_transfer(model.transfer_matrix(), rule)


def optimize_circuit(
    restarts: int = 50,
    seed: int = 0,
    rule: QuadratureRule | None = None,
    half_angle: bool = True,
) -> OptimizationResult:
    """Minimize the circuit qTTF over all twelve parameters.

    Nelder-Mead from uniform starts in [0, 2 pi]^12.  The landscape is
    benign enough that most restarts land on the global value 8.0.
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    if rule is None:
        rule = default_rule()
    rng = np.random.default_rng(seed)
    starts = rng.uniform(0.0, 2.0 * math.pi, size=(restarts, 12))

    def objective(x: np.ndarray) -> float:
        return qttf_circuit(x, rule, half_angle=half_angle)

    return minimize_with_restarts(objective, list(starts), maxiter=4000)
