"""Steady states of the pumped cavity/resonator system.

The pump photon number n_p solves the real cubic

    n_p * [kappa^2 + (delta_p - omega_n*alpha*n_p)^2] = |E_p|^2,

with alpha = 2*lambda_c^2/omega_n^2. Depending on drive and detuning the
cubic has one or three positive roots (two exactly at a fold). The steady
cavity amplitude is phase-referenced so a_s = sqrt(n_p) is real and
non-negative, and q_s = 2*lambda_c*n_p/omega_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .params import DriveConfig, SystemParams

BRANCH_ONLY = "only-root"
BRANCH_LOWER = "lower"
BRANCH_MIDDLE = "middle"
BRANCH_UPPER = "upper"

# residual acceptance: |f(n_p)| <= RESIDUAL_BOUND * max(|E_p|^2, kappa^2 n_p)
RESIDUAL_BOUND = 1e-10

# two roots closer than this (relative) are reported as a degenerate pair
_DEGENERACY_RTOL = 1e-6


class NoSuchBranchError(LookupError):
    """Requested branch (e.g. 'middle') does not exist at this drive."""


@dataclass(frozen=True)
class SteadyState:
    """One root of the photon-number cubic with its derived amplitudes.

    ``drive`` records the operating point the root belongs to;
    ``dynamically_stable`` is filled from the linearized eigenvalue analysis
    and ``degenerate`` marks a fold-point double root.
    """

    n_p: float
    a_s: float
    q_s: float
    branch: str
    dynamically_stable: bool
    drive: DriveConfig
    degenerate: bool = False


def shifted_detuning(params: SystemParams, ss: SteadyState) -> float:
    """Effective cavity-pump detuning delta_p - lambda_c*q_s."""
    return ss.drive.delta_p - params.lambda_c * ss.q_s


def _cubic_residual(n: float, kappa: float, delta_p: float, wn_alpha: float,
                    e2: float) -> float:
    shift = delta_p - wn_alpha * n
    return n * (kappa * kappa + shift * shift) - e2


def _newton_polish(n: float, kappa: float, delta_p: float, wn_alpha: float,
                   e2: float, iters: int = 3) -> float:
    # damped Newton; the closed form alone loses digits near folds
    for _ in range(iters):
        shift = delta_p - wn_alpha * n
        f = n * (kappa * kappa + shift * shift) - e2
        df = kappa * kappa + shift * shift - 2.0 * n * shift * wn_alpha
        if df == 0.0:
            break
        step = f / df
        # natural n scale keeps the damping from trapping a start at 0
        limit = 0.5 * abs(n) + e2 / (kappa * kappa + delta_p * delta_p)
        if abs(step) > limit:
            step = math.copysign(limit, step)
        n -= step
    return n


def photon_number_roots(params: SystemParams, drive: DriveConfig) -> list[float]:
    """All non-negative real roots of the photon-number cubic, ascending.

    Closed-form solution of the depressed cubic in the scaled variable
    m = omega_n*alpha*n_p/kappa followed by a short Newton polish per root.
    Zero pump returns [0.0]. List length is 1, 2 (fold degeneracy) or 3.
    """
    kappa = params.kappa
    delta_p = drive.delta_p
    e2 = drive.e_p * drive.e_p
    if e2 == 0.0:
        return [0.0]
    wn_alpha = params.omega_n * params.alpha  # = 2*lambda_c^2/omega_n
    if wn_alpha == 0.0:
        return [e2 / (kappa * kappa + delta_p * delta_p)]

    # m^3 - 2 d m^2 + (1 + d^2) m - e = 0 with d = delta_p/kappa
    d = delta_p / kappa
    e = wn_alpha * e2 / kappa**3
    c2, c1, c0 = -2.0 * d, 1.0 + d * d, -e

    # depressed form t^3 + p t + q, m = t - c2/3
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2**3 / 27.0 - c2 * c1 / 3.0 + c0
    shiftm = -c2 / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    ms: list[float]
    if disc > 0.0:
        s = math.sqrt(disc)
        u = math.copysign(abs(-q / 2.0 + s) ** (1.0 / 3.0), -q / 2.0 + s)
        v = math.copysign(abs(-q / 2.0 - s) ** (1.0 / 3.0), -q / 2.0 - s)
        ms = [u + v + shiftm]
    elif disc == 0.0 and p == 0.0:
        ms = [shiftm]  # triple root
    else:
        # three real roots, trigonometric branch
        r = math.sqrt(-p / 3.0)
        arg = 3.0 * q / (2.0 * p * r)
        arg = min(1.0, max(-1.0, arg))
        phi = math.acos(arg)
        ms = [2.0 * r * math.cos((phi - 2.0 * math.pi * k) / 3.0) + shiftm
              for k in range(3)]

    scale = kappa / wn_alpha
    roots = sorted(max(m, 0.0) * scale for m in ms)
    roots = [_newton_polish(n, kappa, delta_p, wn_alpha, e2) for n in roots]

    # collapse the duplicate the trig branch produces at a fold; the
    # surviving pair is flagged degenerate by steady_state()
    out: list[float] = []
    for n in sorted(roots):
        if out and abs(n - out[-1]) <= _DEGENERACY_RTOL * max(abs(n), 1e-300):
            continue
        out.append(n)
    return out


def _branch_labels(count: int) -> list[str]:
    if count == 1:
        return [BRANCH_ONLY]
    if count == 2:
        return [BRANCH_LOWER, BRANCH_UPPER]
    return [BRANCH_LOWER, BRANCH_MIDDLE, BRANCH_UPPER]


def steady_state(params: SystemParams, drive: DriveConfig,
                 selection: str = "lowest"):
    """Steady state(s) for the given drive.

    selection: "lowest" | "middle" | "highest" | "all". "middle" raises
    NoSuchBranchError unless three branches exist. Each returned state is
    classified by the linearized stability analysis.
    """
    roots = photon_number_roots(params, drive)
    labels = _branch_labels(len(roots))
    degenerate = len(roots) == 2

    from . import stability  # deferred: stability consumes SteadyState

    states = []
    for n_p, label in zip(roots, labels):
        ss = SteadyState(
            n_p=n_p,
            a_s=math.sqrt(n_p),
            q_s=2.0 * params.lambda_c * n_p / params.omega_n,
            branch=label,
            dynamically_stable=True,
            drive=drive,
            degenerate=degenerate,
        )
        stable = stability.stability_report(params, ss).stable
        if not stable:
            ss = replace(ss, dynamically_stable=False)
        states.append(ss)

    if selection == "all":
        return tuple(states)
    if selection == "lowest":
        return states[0]
    if selection == "highest":
        return states[-1]
    if selection == "middle":
        if len(states) != 3:
            raise NoSuchBranchError(
                f"no middle branch: cubic has {len(states)} root(s) here")
        return states[1]
    raise ValueError(f"unknown selection {selection!r}")


def default_branch(params: SystemParams, drive: DriveConfig) -> SteadyState:
    """Branch used for response calculations: the lowest dynamically stable
    root (the one reached by ramping the pump up from zero); falls back to
    the lowest root if none is stable."""
    states = steady_state(params, drive, selection="all")
    for ss in states:
        if ss.dynamically_stable:
            return ss
    return states[0]


def residual(params: SystemParams, drive: DriveConfig, n_p: float) -> float:
    """Cubic residual of a candidate root (diagnostic, same scaling as the
    acceptance bound)."""
    return _cubic_residual(n_p, params.kappa, drive.delta_p,
                           params.omega_n * params.alpha, drive.e_p**2)


__all__ = [
    "SteadyState", "NoSuchBranchError", "RESIDUAL_BOUND",
    "BRANCH_ONLY", "BRANCH_LOWER", "BRANCH_MIDDLE", "BRANCH_UPPER",
    "photon_number_roots", "steady_state", "default_branch",
    "shifted_detuning", "residual",
]
