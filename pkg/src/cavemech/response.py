"""Small-signal sideband response and transmission.

Linearizing the mean-field dynamics about a steady state and inserting the
two-sideband ansatz da = a_+ e^{-i delta t} + a_- e^{+i delta t},
dQ = Q_+ e^{-i delta t} + c.c. yields a 3x3 complex linear system in
(a_+, conj(a_-), Q_+). That direct solve is the source of truth here; the
published closed form for a_+ is implemented alongside it and their
agreement is tracked per point.

Transmission uses t_p = 1 - c*kappa*(a_+/E_s) with c = 1 ("critical",
default), c = sqrt(2/kappa) ("literal") or c = 2 ("single-sided").
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import DriveConfig, SystemParams, cooperativity, make_drive
from .steady import SteadyState, default_branch, shifted_detuning

NORMALIZATIONS = ("critical", "literal", "single-sided")

# direct-solve matrix condition number beyond which a point is flagged
POLE_CONDITION = 1e12

DEFAULT_POINTS = 2001


class PoleError(ArithmeticError):
    """Response evaluated at (numerically) a parametric pole."""

    def __init__(self, delta: float, detail: str = ""):
        super().__init__(f"response pole at delta={delta!r} rad/s {detail}".rstrip())
        self.delta = delta


@dataclass(frozen=True)
class ClosedFormTerms:
    """Ingredients of the closed-form a_+ at one signal-pump detuning."""

    eta: complex
    alpha: float
    beta: complex
    theta: complex


def closed_form_terms(params: SystemParams, n_p: float, delta: float) -> ClosedFormTerms:
    wn = params.omega_n
    eta = wn * wn / (wn * wn - delta * delta - 1j * params.gamma_n * delta)
    alpha = params.alpha
    core = alpha * eta * wn * n_p
    return ClosedFormTerms(eta=eta, alpha=alpha, beta=core * core,
                           theta=1j * alpha * wn * n_p * (eta + 1.0))


def response_closed_form(params: SystemParams, ss: SteadyState, delta: float) -> complex:
    """Closed-form signal-sideband amplitude a_+.

    Note the bare pump detuning delta_p appears here, not the shifted
    delta_p - lambda_c*q_s: the theta term absorbs the static pull, making
    this algebraically identical to the direct solve.
    """
    drive = ss.drive
    if drive.e_s <= 0:
        raise ValueError("closed form needs a signal drive, e_s > 0")
    t = closed_form_terms(params, ss.n_p, delta)
    kappa, dp = params.kappa, drive.delta_p
    num = 1j * (delta + dp) - (kappa + t.theta)
    den = (delta + 1j * kappa) ** 2 + (t.theta - 1j * dp) ** 2 + t.beta
    scale = abs(delta + 1j * kappa) ** 2 + abs(t.theta - 1j * dp) ** 2 + abs(t.beta)
    if abs(den) < 1e-14 * scale:
        raise PoleError(delta, "(closed-form denominator vanished)")
    return num / den * drive.e_s


def _system_matrix(params: SystemParams, ss: SteadyState, delta: float) -> np.ndarray:
    """3x3 matrix over (a_+, conj(a_-), Q_+); mechanical row scaled by
    1/omega_n so all rows share a rad/s magnitude."""
    kappa, wn, gam = params.kappa, params.omega_n, params.gamma_n
    lam_as = params.lambda_c * ss.a_s
    dtil = shifted_detuning(params, ss)
    return np.array([
        [kappa + 1j * (dtil - delta), 0.0, -1j * lam_as],
        [0.0, kappa - 1j * (dtil + delta), 1j * lam_as],
        [-2.0 * lam_as, -2.0 * lam_as,
         (wn * wn - delta * delta - 1j * gam * delta) / wn],
    ], dtype=complex)


def response_direct_solve(params: SystemParams, ss: SteadyState,
                          delta: float) -> tuple[complex, complex, complex]:
    """Solve the linearized sideband system; returns (a_+, a_-, Q_+).

    With the pump off this reduces exactly to the bare-cavity line
    a_+ = E_s/(kappa + i(delta_p - delta)), a_- = Q_+ = 0.
    """
    drive = ss.drive
    if drive.e_s <= 0:
        raise ValueError("direct solve needs a signal drive, e_s > 0")
    m = _system_matrix(params, ss, delta)
    if np.linalg.cond(m) > POLE_CONDITION:
        raise PoleError(delta, "(sideband system singular)")
    sol = np.linalg.solve(m, np.array([drive.e_s, 0.0, 0.0], dtype=complex))
    return complex(sol[0]), complex(np.conj(sol[1])), complex(sol[2])


def transmission(a_plus: complex, e_s: float, params: SystemParams,
                 normalization: str = "critical") -> complex:
    """Output/input signal amplitude ratio t_p for the given sideband."""
    if e_s <= 0:
        raise ValueError("e_s must be positive")
    chi = a_plus / e_s
    if normalization == "critical":
        return 1.0 - params.kappa * chi
    if normalization == "literal":
        return 1.0 - math.sqrt(2.0 * params.kappa) * chi
    if normalization == "single-sided":
        return 1.0 - 2.0 * params.kappa * chi
    raise ValueError(f"unknown normalization {normalization!r}; "
                     f"expected one of {NORMALIZATIONS}")


@dataclass(frozen=True)
class ResponsePoint:
    """Response at a single signal detuning. ``a_plus`` is from the direct
    solve; ``closedform_deviation`` is its relative distance to the closed
    form. ``flagged`` marks parametric-pole points (values are NaN)."""

    delta: float
    delta_s: float
    a_plus: complex
    a_minus: complex
    q_plus: complex
    t_p: complex
    transmission: float
    closedform_deviation: float
    stable: bool
    flagged: bool = False


SPECTRUM_COLUMNS = (
    "delta_s_rad_s", "transmission", "re_tp", "im_tp",
    "re_a_plus", "im_a_plus", "re_a_minus", "im_a_minus",
    "closedform_deviation", "stable_flag",
)


@dataclass(frozen=True)
class Spectrum:
    """Ordered response points plus the context they were computed in."""

    points: tuple[ResponsePoint, ...]
    params: SystemParams
    drive: DriveConfig
    state: SteadyState
    normalization: str

    def rows(self):
        """Rows matching SPECTRUM_COLUMNS, for serialization."""
        for p in self.points:
            yield (p.delta_s, p.transmission, p.t_p.real, p.t_p.imag,
                   p.a_plus.real, p.a_plus.imag, p.a_minus.real, p.a_minus.imag,
                   p.closedform_deviation, int(p.stable))

    @property
    def flagged_count(self) -> int:
        return sum(1 for p in self.points if p.flagged)


def auto_span(params: SystemParams, n_p: float) -> float:
    """Half-width of the default sweep window: 50x the wider of the cavity
    line and the pump-dressed mechanical line."""
    c = cooperativity(params, n_p)
    return 50.0 * max(params.kappa, params.gamma_n * (1.0 + c))


def response_point(params: SystemParams, ss: SteadyState, delta: float,
                   normalization: str = "critical") -> ResponsePoint:
    drive = ss.drive
    stable = ss.dynamically_stable
    try:
        a_plus, a_minus, q_plus = response_direct_solve(params, ss, delta)
        try:
            cf = response_closed_form(params, ss, delta)
            deviation = abs(cf - a_plus) / max(abs(a_plus), 1e-300)
        except PoleError:
            deviation = math.nan
        t_p = transmission(a_plus, drive.e_s, params, normalization)
        return ResponsePoint(delta=delta, delta_s=delta - drive.delta_p,
                             a_plus=a_plus, a_minus=a_minus, q_plus=q_plus,
                             t_p=t_p, transmission=abs(t_p) ** 2,
                             closedform_deviation=deviation, stable=stable)
    except PoleError:
        nanc = complex(math.nan, math.nan)
        return ResponsePoint(delta=delta, delta_s=delta - drive.delta_p,
                             a_plus=nanc, a_minus=nanc, q_plus=nanc, t_p=nanc,
                             transmission=math.nan, closedform_deviation=math.nan,
                             stable=stable, flagged=True)


def sweep_spectrum(params: SystemParams, drive: DriveConfig,
                   delta_s_grid=None, normalization: str = "critical",
                   points: int = DEFAULT_POINTS,
                   state: SteadyState | None = None) -> Spectrum:
    """Response across a signal-cavity detuning grid.

    The steady state is solved once (lowest dynamically stable branch unless
    ``state`` is given) and each grid point re-tunes only the signal. Pole
    points are flagged, never raised.
    """
    if state is None:
        state = default_branch(params, drive)
    if delta_s_grid is None:
        half = auto_span(params, state.n_p)
        delta_s_grid = np.linspace(-half, half, points)
    else:
        delta_s_grid = np.asarray(delta_s_grid, dtype=float)
        if delta_s_grid.size == 0 or np.any(np.diff(delta_s_grid) <= 0):
            raise ValueError("delta_s grid must be non-empty and increasing")
    pts = tuple(
        response_point(params, state, float(ds) + drive.delta_p, normalization)
        for ds in delta_s_grid
    )
    return Spectrum(points=pts, params=params, drive=drive, state=state,
                    normalization=normalization)


@dataclass(frozen=True)
class GainPoint:
    pump_power: float
    gain: float
    n_p: float
    cooperativity: float
    stable: bool


def gain_curve(params: SystemParams, powers, delta_p: float | None = None,
               signal_power: float = 1e-18,
               normalization: str = "critical") -> list[GainPoint]:
    """Transistor characteristic: |t_p|^2 at cavity resonance (delta_s = 0)
    versus pump power, blue pumping by default.

    At delta_s = 0 the signal sits on the cavity line and |delta| = omega_n
    on the mechanical sideband, the doubly resonant operating point. Points
    on a dynamically unstable branch carry stable=False.
    """
    if delta_p is None:
        delta_p = -params.omega_n
    powers = [float(p) for p in powers]
    if any(b <= a for a, b in zip(powers, powers[1:])):
        raise ValueError("pump powers must be strictly ascending")
    out = []
    for power in powers:
        drive = make_drive(params, power, signal_power, delta_p, delta=delta_p)
        ss = default_branch(params, drive)
        pt = response_point(params, ss, delta_p, normalization)
        out.append(GainPoint(pump_power=power, gain=pt.transmission,
                             n_p=ss.n_p,
                             cooperativity=cooperativity(params, ss.n_p),
                             stable=ss.dynamically_stable))
    return out


def transparency_fwhm(params: SystemParams, drive: DriveConfig,
                      state: SteadyState | None = None,
                      normalization: str = "critical") -> float:
    """Full width at half maximum of the transmission feature at delta_s = 0.

    Marches outward from the center in steps small against the dressed
    mechanical linewidth, then bisects the half-maximum crossing on each
    side. Intended for the pump-dressed transparency window, whose width
    grows with pump power.
    """
    if state is None:
        state = default_branch(params, drive)

    def level(ds: float) -> float:
        return response_point(params, state, ds + drive.delta_p,
                              normalization).transmission

    t0 = level(0.0)
    half = 0.5 * t0
    c = cooperativity(params, state.n_p)
    step = params.gamma_n * (1.0 + c) / 200.0
    limit = 5.0 * params.kappa

    edges = []
    for sign in (+1.0, -1.0):
        lo = 0.0
        x = step
        while x <= limit and level(sign * x) > half:
            lo = x
            x *= 1.5
        if x > limit:
            raise ValueError("no half-maximum crossing found within 5*kappa")
        hi = x
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if level(sign * mid) > half:
                lo = mid
            else:
                hi = mid
        edges.append(0.5 * (lo + hi))
    return edges[0] + edges[1]


__all__ = [
    "NORMALIZATIONS", "POLE_CONDITION", "DEFAULT_POINTS",
    "PoleError", "ClosedFormTerms", "ResponsePoint", "Spectrum", "GainPoint",
    "SPECTRUM_COLUMNS", "closed_form_terms", "response_closed_form",
    "response_direct_solve", "transmission", "response_point",
    "sweep_spectrum", "auto_span", "gain_curve", "transparency_fwhm",
]
