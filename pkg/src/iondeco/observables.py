"""GHZ targets and probability observables.

The targets live in the m = n = 1 block, basis order
(|g,1,1>, |e,1,1>, |g,0,0>, |e,0,0>):

    |GHZ-/+> = (-1)^p / sqrt(2) * (|g,0,0> -/+ i |e,1,1>)

P(t) = tr(rho(t) |GHZ><GHZ|) is defined through the density matrix.  A
corrected closed form for P(T) (an exact identity with the reference engine)
and the published closed form (kept verbatim for auditing; it exceeds 1 in
the decoherence-free limit) are both provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engines import DensityMatrix
from .errors import ValidationError
from .model import ModeIndices, Spectrum

GHZ_BASIS = ModeIndices(1, 1).basis_order()

SIGNS = ("minus", "plus")


def _check_sign(sign: str) -> float:
    if sign not in SIGNS:
        raise ValidationError(f"sign must be one of {SIGNS}, got {sign!r}")
    return 1.0 if sign == "minus" else -1.0


@dataclass(frozen=True)
class GHZTarget:
    """One of the two orthogonal maximally entangled targets, as a projector."""

    sign: str
    p_phase: int  # global phase (-1)^p, physically irrelevant, kept for bookkeeping
    vector: np.ndarray
    projector: np.ndarray
    basis_order: tuple[str, str, str, str]


def ghz_state(sign: str, p: int = 0) -> GHZTarget:
    """Build (|g,0,0> -/+ i |e,1,1>) / sqrt(2) and its projector."""
    upper = _check_sign(sign)
    vector = np.zeros(4, dtype=complex)
    vector[2] = 1.0 / math.sqrt(2.0)
    vector[1] = -upper * 1j / math.sqrt(2.0)
    vector = (-1.0) ** p * vector
    return GHZTarget(
        sign=sign,
        p_phase=p,
        vector=vector,
        projector=np.outer(vector, vector.conj()),
        basis_order=GHZ_BASIS,
    )


def p_ghz(rho: DensityMatrix, target: GHZTarget) -> float:
    """Raw overlap tr(rho * projector); clamp with clamp_probability for reporting."""
    if rho.basis_order != target.basis_order:
        raise ValidationError(f"basis mismatch: {rho.basis_order} vs {target.basis_order}")
    return float(np.trace(rho.entries @ target.projector).real)


def clamp_probability(value: float) -> float:
    """Reporting-layer clamp to [0, 1]; raw values stay available upstream."""
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class ClosedFormCoefficients:
    """Coefficients of the corrected closed-form P(T), functions of alpha alone.

    a_coeff and b_coeff are the state-decomposition amplitudes with
    a_coeff^2 + b_coeff^2 = 1/2.
    """

    alpha: float
    c0: float
    c_mu: float
    c_a: float
    c_plus: float
    c_minus: float
    a_coeff: float
    b_coeff: float


def closed_form_coefficients(alpha: float) -> ClosedFormCoefficients:
    if alpha <= 1.0:
        raise ValidationError(f"alpha must exceed 1, got {alpha}")
    a2 = alpha * alpha
    omega_over_a = math.sqrt(a2 - 1.0)  # omega in units of the sideband coupling
    return ClosedFormCoefficients(
        alpha=alpha,
        c0=(a2 + 1.0) / (4.0 * a2),
        c_mu=(a2 - 1.0) / (4.0 * a2),
        c_a=(a2 - 1.0) / (4.0 * a2),
        c_plus=(alpha - 1.0) ** 2 / (8.0 * a2),
        c_minus=(alpha + 1.0) ** 2 / (8.0 * a2),
        a_coeff=math.sqrt((alpha + omega_over_a) / (4.0 * alpha)),
        b_coeff=math.sqrt((alpha - omega_over_a) / (4.0 * alpha)),
    )


def closed_form_pghz(t_scaled, alpha: float, r: float, sign: str):
    """Corrected closed-form target probability as a function of scaled time.

    Identity with p_ghz(evolve_eigenbasis(...)); accepts a scalar or an array
    of scaled times T = a*t.  Upper signs (sign="minus"):

        P(T) = c0 + c_mu e^{-2 a^2 T R} cos(2 a T) + c_a e^{-2 T R} sin(2 T)
               + c_plus e^{-2 (a+1)^2 T R} sin(2 (a+1) T)
               - c_minus e^{-2 (a-1)^2 T R} sin(2 (a-1) T)      (a = alpha)
    """
    upper = _check_sign(sign)
    if r < 0:
        raise ValidationError(f"r must be nonnegative, got {r}")
    c = closed_form_coefficients(alpha)
    t_scaled = np.asarray(t_scaled, dtype=float)
    value = (
        c.c0
        + c.c_mu * np.exp(-2.0 * alpha * alpha * t_scaled * r) * np.cos(2.0 * alpha * t_scaled)
        + upper * c.c_a * np.exp(-2.0 * t_scaled * r) * np.sin(2.0 * t_scaled)
        + upper * c.c_plus * np.exp(-2.0 * (alpha + 1.0) ** 2 * t_scaled * r) * np.sin(2.0 * (alpha + 1.0) * t_scaled)
        - upper * c.c_minus * np.exp(-2.0 * (alpha - 1.0) ** 2 * t_scaled * r) * np.sin(2.0 * (alpha - 1.0) * t_scaled)
    )
    return value if value.ndim else float(value)


def published_pghz(t_scaled, alpha: float, r: float):
    """The published closed-form P(T), evaluated exactly as printed.

    Kept verbatim as an audit target: its two rapid terms carry Omega^2/(2 mu^2)
    coefficients and the last two decay exponents are unsquared.  The output is
    deliberately not clamped -- it is not a probability (it reaches 1.2344 at
    T = pi/4 in the decoherence-free limit).
    """
    a2 = alpha * alpha
    lead = (a2 - 1.0) / (2.0 * a2)
    c_plus = (alpha - 1.0) ** 2 / (8.0 * a2)
    c_minus = (alpha + 1.0) ** 2 / (8.0 * a2)
    t_scaled = np.asarray(t_scaled, dtype=float)
    value = (
        0.5
        + lead * np.exp(-2.0 * a2 * t_scaled * r) * np.cos(2.0 * alpha * t_scaled)
        + lead * (np.exp(-2.0 * t_scaled * r) * np.sin(2.0 * t_scaled) - 1.0)
        + c_plus * np.exp(-2.0 * (alpha + 1.0) * t_scaled * r) * np.sin(2.0 * (alpha + 1.0) * t_scaled)
        - c_minus * np.exp(-2.0 * (alpha - 1.0) * t_scaled * r) * np.sin(2.0 * (alpha - 1.0) * t_scaled)
    )
    return value if value.ndim else float(value)


def purity(rho: DensityMatrix) -> float:
    return float(np.trace(rho.entries @ rho.entries).real)


def populations(rho: DensityMatrix) -> np.ndarray:
    """Diagonal occupations in the block basis."""
    return np.diag(rho.entries).real.copy()


def eigenbasis_coherences(rho: DensityMatrix, spectrum: Spectrum) -> np.ndarray:
    """|rho_pq| for p < q in the eigenbasis, ordered (01, 02, 03, 12, 13, 23)."""
    if rho.basis_order != spectrum.basis_order:
        raise ValidationError("basis mismatch between state and spectrum")
    v = spectrum.eigenvectors
    rho_eig = v.T @ rho.entries @ v
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    return np.array([abs(rho_eig[p, q]) for p, q in pairs])
