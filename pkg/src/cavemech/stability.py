"""Dynamical stability of steady branches and the parametric threshold.

The linearized fluctuation dynamics in real quadratures u = Re(da),
v = Im(da), dQ, w = dQdot/omega_n form a real 4x4 drift matrix. A branch is
stable when every eigenvalue has negative real part; blue-detuned pumping
anti-damps the mechanical pair and loses stability above a pump-power
threshold, located here by bisection on the margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import SystemParams, cooperativity, make_drive
from .steady import SteadyState, default_branch, shifted_detuning


@dataclass(frozen=True)
class StabilityReport:
    """Eigenvalues (rad/s, sorted by descending real part), the verdict, the
    margin -max(Re), and the weak-coupling damping estimate gamma_n*(1 - C)
    for blue pumping. The estimate is first-order in C; the eigenvalues are
    exact and govern ``stable``."""

    eigenvalues: tuple[complex, complex, complex, complex]
    stable: bool
    margin: float
    effective_damping: float


def dynamics_matrix(params: SystemParams, ss: SteadyState) -> np.ndarray:
    """Real 4x4 drift matrix over (Re da, Im da, dQ, dQdot/omega_n).

    Entries are algebraic in (kappa, shifted detuning, lambda_c*a_s,
    omega_n, gamma_n). With the pump off it is block diagonal: a cavity
    block with eigenvalues -kappa +- i*delta_p and a mechanical block with
    -gamma_n/2 +- i*sqrt(omega_n^2 - gamma_n^2/4).
    """
    kappa, wn, gam = params.kappa, params.omega_n, params.gamma_n
    dtil = shifted_detuning(params, ss)
    lam_as = params.lambda_c * ss.a_s
    return np.array([
        [-kappa, dtil, 0.0, 0.0],
        [-dtil, -kappa, lam_as, 0.0],
        [0.0, 0.0, 0.0, wn],
        [4.0 * lam_as, 0.0, -wn, -gam],
    ])


def stability_report(params: SystemParams, ss: SteadyState) -> StabilityReport:
    """Eigen-classification of one steady branch.

    The matrix is pre-scaled by omega_n so the eigensolver works near unit
    magnitude; eigenvalues are rescaled back.
    """
    a = dynamics_matrix(params, ss) / params.omega_n
    eig = np.linalg.eigvals(a) * params.omega_n
    eig = sorted((complex(z) for z in eig), key=lambda z: -z.real)
    margin = -eig[0].real
    c = cooperativity(params, ss.n_p)
    return StabilityReport(
        eigenvalues=tuple(eig),
        stable=margin > 0.0,
        margin=margin,
        effective_damping=params.gamma_n * (1.0 - c),
    )


def pair_continuously(previous, current):
    """Reorder ``current`` eigenvalues to minimally displace from
    ``previous`` (greedy nearest-neighbor matching); keeps branches
    continuous along a parameter sweep."""
    remaining = list(current)
    ordered = []
    for z in previous:
        j = min(range(len(remaining)), key=lambda k: abs(remaining[k] - z))
        ordered.append(remaining.pop(j))
    return ordered


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of a threshold search. ``found`` is False when the margin
    never changes sign inside the bracket (red detuning, typically)."""

    found: bool
    power: float | None
    n_p: float | None
    bracket: tuple[float, float]


def _margin_at(params: SystemParams, delta_p: float, power: float) -> tuple[float, float]:
    drive = make_drive(params, power, 0.0, delta_p, delta=delta_p)
    ss = default_branch(params, drive)
    return stability_report(params, ss).margin, ss.n_p


def instability_threshold(params: SystemParams, delta_p: float,
                          bracket: tuple[float, float] = (0.0, 100e-12),
                          rel_tol: float = 1e-3) -> ThresholdResult:
    """Pump power where the lowest-branch stability margin crosses zero.

    Bisection on power inside ``bracket``; relative power tolerance
    ``rel_tol``. Returns found=False when both ends are stable (no
    threshold in the bracket), e.g. for red detuning.
    """
    lo, hi = bracket
    if not (0.0 <= lo < hi):
        raise ValueError(f"bad bracket {bracket!r}")
    m_lo, _ = _margin_at(params, delta_p, lo)
    m_hi, _ = _margin_at(params, delta_p, hi)
    if m_lo <= 0:
        raise ValueError("lower bracket end is already unstable")
    if m_hi > 0:
        return ThresholdResult(found=False, power=None, n_p=None, bracket=bracket)
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        m_mid, _ = _margin_at(params, delta_p, mid)
        if m_mid > 0:
            lo = mid
        else:
            hi = mid
    power = 0.5 * (lo + hi)
    _, n_p = _margin_at(params, delta_p, power)
    return ThresholdResult(found=True, power=power, n_p=n_p, bracket=bracket)


def characteristic_margin(params: SystemParams, ss: SteadyState) -> float:
    """Independent cross-check of the eigen margin: the drift matrix's
    characteristic polynomial factors as

        (s^2 + gamma_n s + omega_n^2) ((s+kappa)^2 + dtil^2)
            - 4 omega_n (lambda_c a_s)^2 dtil = 0

    whose roots are found here via numpy's quartic companion solve. Agrees
    with stability_report to solver precision; exists so tests can confirm
    the eigensolver against an algebraically derived object.
    """
    kappa, wn, gam = params.kappa, params.omega_n, params.gamma_n
    dtil = shifted_detuning(params, ss)
    g2 = (params.lambda_c * ss.a_s) ** 2
    # expand in s: (s^2+gam s+wn^2)(s^2+2 kappa s+kappa^2+dtil^2) - 4 wn g2 dtil,
    # then substitute s = omega_n*sigma so the companion solve sees O(1) numbers
    c = [
        1.0,
        (gam + 2 * kappa) / wn,
        (wn * wn + kappa * kappa + dtil * dtil + 2 * kappa * gam) / wn**2,
        (gam * (kappa * kappa + dtil * dtil) + 2 * kappa * wn * wn) / wn**3,
        (wn * wn * (kappa * kappa + dtil * dtil) - 4.0 * wn * g2 * dtil) / wn**4,
    ]
    roots = np.roots(c) * wn
    return -float(max(r.real for r in roots))


__all__ = [
    "StabilityReport", "ThresholdResult",
    "dynamics_matrix", "stability_report", "instability_threshold",
    "pair_continuously", "characteristic_margin",
]
