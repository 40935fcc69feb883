"""One-parameter estimation of a single Bloch component.

A meter qubit prepared in |+> picks up a controlled phase theta from the
system qubit and is read out in the x basis.  The outcome statistics
determine s_z alone, with a Fisher error that depends on the input state
only through the polar angle.
"""
from __future__ import annotations

import math

import numpy as np

from .core import PAULI_EIGENSTATES, QuadratureRule, bloch_from_state, make_quadrature

__all__ = [
    "NonInformativeCouplingError",
    "probabilities_single",
    "estimate_sz",
    "fisher_inverse_single",
    "fisher_inverse_angle_form",
    "qttf_single",
    "qttf_single_quadrature",
    "max_error_single",
    "two_design_average",
]

# Below this, sin^2(theta/2) is treated as zero and the meter learns nothing.
_COUPLING_FLOOR = 1e-12


class NonInformativeCouplingError(ValueError):
    """The coupling angle is a multiple of 2*pi; outcomes carry no signal."""


def _sin2_half(theta: float) -> float:
    return math.sin(theta / 2.0) ** 2


def probabilities_single(psi: np.ndarray, theta: float) -> tuple[float, float]:
    """Meter outcome probabilities (P0, P1) for input state psi.

    P0 = (1 + cos^2(theta/2))/2 + sin^2(theta/2) s_z / 2 and P1 is its
    complement; both are clipped to [0, 1] against round-off only.
    """
    s_z = bloch_from_state(psi)[3]
    s2 = _sin2_half(theta)
    p1 = 0.5 * s2 * (1.0 - s_z)
    p1 = min(max(p1, 0.0), 1.0)
    return 1.0 - p1, p1


def estimate_sz(p0: float, p1: float, theta: float) -> float:
    """Invert the outcome statistics for s_z.

    Accepts probabilities or empirical frequencies; they must sum to 1
    within 1e-9.  Raises NonInformativeCouplingError when theta gives the
    meter no sensitivity.
    """
    if abs(p0 + p1 - 1.0) > 1e-9:
        raise ValueError(f"P0 + P1 = {p0 + p1}, expected 1")
    s2 = _sin2_half(theta)
    if s2 < _COUPLING_FLOOR:
        raise NonInformativeCouplingError(
            f"sin^2(theta/2) = {s2:.2e}; s_z is not identifiable"
        )
    return (p0 - p1 - math.cos(theta / 2.0) ** 2) / s2


def fisher_inverse_single(psi: np.ndarray, theta: float) -> float:
    """Per-shot estimation error F^-1 = 4 P0 P1 / sin^4(theta/2)."""
    s2 = _sin2_half(theta)
    if s2 < _COUPLING_FLOOR:
        return math.inf
    p0, p1 = probabilities_single(psi, theta)
    return 4.0 * p0 * p1 / s2**2


def fisher_inverse_angle_form(alpha1: float, theta: float) -> float:
    """F^-1 written in the angle chart: 4 sin^2(a1)(csc^2(theta/2) - sin^2(a1)).

    Independent of the azimuth; agrees with the probability form for pure
    states at the same polar angle.
    """
    s2 = _sin2_half(theta)
    if s2 < _COUPLING_FLOOR:
        return math.inf
    sa2 = math.sin(alpha1) ** 2
    return 4.0 * sa2 * (1.0 / s2 - sa2)


def qttf_single(theta: float) -> float:
    """Pure-state average of F^-1, in closed form: (2/3)(2+cos t)csc^2(t/2).

    Monotonically decreasing on (0, pi] with minimum 2/3 at theta = pi;
    returns inf at non-informative couplings.
    """
    s2 = _sin2_half(theta)
    if s2 < _COUPLING_FLOOR:
        return math.inf
    return (2.0 / 3.0) * (2.0 + math.cos(theta)) / s2


def qttf_single_quadrature(theta: float, rule: QuadratureRule | None = None) -> float:
    """Same average evaluated by quadrature; cross-checks the closed form."""
    if rule is None:
        rule = make_quadrature(64, 64)
    values = np.array([fisher_inverse_angle_form(a1, theta) for a1 in rule.alpha1])
    return rule.integrate(values)


def max_error_single(theta: float) -> float:
    """Worst-case F^-1 over input states.

    The maximizer of 4 x (csc^2(theta/2) - x) over x = sin^2(a1) in [0, 1]
    sits at x = csc^2(theta/2)/2 when that is reachable (theta >= pi/2) and
    at the boundary x = 1 otherwise, so the supremum is

        csc^4(theta/2)          for theta in [pi/2, pi],
        4 (csc^2(theta/2) - 1)  for theta in (0, pi/2).

    Both branches meet at 4 for theta = pi/2.
    """
    if not 0.0 < theta <= math.pi:
        raise ValueError(f"theta must lie in (0, pi], got {theta}")
    s2 = _sin2_half(theta)
    if s2 < _COUPLING_FLOOR:
        return math.inf
    csc2 = 1.0 / s2
    if csc2 <= 2.0:
        return csc2**2
    return 4.0 * (csc2 - 1.0)


def two_design_average(theta: float) -> float:
    """Mean of F^-1 over the six Pauli eigenstates.

    F^-1 is a quadratic polynomial in the state, so this finite average
    equals the full pure-state average exactly.
    """
    vals = [fisher_inverse_single(psi, theta) for psi in PAULI_EIGENSTATES]
    return float(np.mean(vals))
