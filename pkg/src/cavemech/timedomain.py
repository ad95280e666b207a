"""Nonlinear mean-field integration and lock-in style demodulation.

This is the brute-force oracle for the linearized response: integrate the
full equations of motion in the lab frame (pump rotating frame, so the
signal appears as es*e^{-i delta t}), then least-squares fit the steady
oscillation to extract the sideband amplitudes.

Gauge note. The linear-response module phase-references the pump so the
steady amplitude a_s is real. A lab simulation with pump phase psi sits in
a gauge rotated by R = arg(kappa + i*dtil) - psi relative to that
convention: the lab initial condition built by :func:`ansatz_initial` is

    a(0) = a_s e^{-iR} + a_plus + a_minus e^{-2iR}
    q(0) = q_s + 2 Re(Q_plus e^{iR}),   qdot(0) = 2 delta Im(Q_plus e^{iR})

and the demodulated e^{-i delta t} coefficient is gauge-invariant: it can be
compared to the direct solve's a_plus with no rotation. The e^{+i delta t}
coefficient picks up e^{-2iR} and the DC term e^{-iR}.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .params import DriveConfig, SystemParams, with_delta
from .response import response_direct_solve
from .steady import SteadyState, default_branch, shifted_detuning

# sample spacing must satisfy dt * max(omega_n, |delta_p|, kappa) < 0.1
RESOLUTION_LIMIT = 0.1
_DEFAULT_SAMPLE_FRACTION = 0.08

# demodulation window requirements
MIN_WINDOW_BEATS = 100.0
DRIFT_LIMIT = 1e-3

ESCAPE_FACTOR = 1e6

_MAX_SAMPLES = 50_000_000  # storage guard; long runs must decimate


class NotConvergedError(RuntimeError):
    """Trace has not reached a steady oscillation over the fit window."""


@dataclass(frozen=True)
class TimeTrace:
    """Uniformly sampled trajectory. ``fast_rate`` is the stiffest system
    rate, kept so the resolution check travels with the data. ``escaped``
    marks a run stopped by the divergence guard at ``escape_time``."""

    t: np.ndarray
    a: np.ndarray
    q: np.ndarray
    q_dot: np.ndarray
    fast_rate: float
    escaped: bool = False
    escape_time: float | None = None

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else math.inf

    @property
    def resolution_ok(self) -> bool:
        """Whether sampling is dense enough for demodulation-grade use."""
        return self.dt * self.fast_rate < RESOLUTION_LIMIT


def _fast_rate(params: SystemParams, drive: DriveConfig) -> float:
    return max(params.omega_n, abs(drive.delta_p), params.kappa)


def integrate(params: SystemParams, drive: DriveConfig, t_final: float,
              initial: tuple[complex, float, float] | None = None,
              rtol: float = 1e-10, sample_dt: float | None = None,
              backend: str | None = None,
              max_steps: int = 4_000_000_000) -> TimeTrace:
    """Integrate the mean-field equations from t=0 to at least t_final.

    initial is (a0, q0, qdot0), default all zero. sample_dt defaults to the
    demodulation-grade spacing 0.08/fast_rate; pass something coarser for
    long settling runs (integration accuracy is unaffected, only storage).
    Divergence (|a| beyond 1e6 times the steady scale) returns a truncated
    trace flagged escaped rather than raising.
    """
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    fast = _fast_rate(params, drive)
    if sample_dt is None:
        sample_dt = _DEFAULT_SAMPLE_FRACTION / fast
    n = int(math.ceil(t_final / sample_dt))
    if n < 2:
        raise ValueError("fewer than two samples; shrink sample_dt or extend t_final")
    if n > _MAX_SAMPLES:
        raise ValueError(
            f"{n} samples would not fit in memory; pass a coarser sample_dt")
    t_samples = (np.arange(n, dtype=float) + 1.0) * sample_dt

    a0, q0, qd0 = initial if initial is not None else (0j, 0.0, 0.0)
    a0 = complex(a0)

    ss = default_branch(params, drive)
    amp_scale = max(math.sqrt(ss.n_p), abs(a0), 1.0)
    q_scale = max(ss.q_s, abs(q0), 1e-9)

    ep = drive.e_p * cmath.exp(1j * drive.pump_phase)
    y0 = np.array([a0.real, a0.imag, q0, qd0], dtype=float)
    out = np.empty((n, 4), dtype=float)

    _, core = _kernels.get_core(backend)
    status, _steps, filled, t_end = core(
        y0, t_samples, params.kappa, params.gamma_n, params.omega_n,
        drive.delta_p, params.lambda_c, ep.real, ep.imag, drive.e_s,
        drive.delta, rtol, amp_scale, q_scale,
        (ESCAPE_FACTOR * amp_scale) ** 2, 1e-3 / fast, max_steps, out)

    if status == _kernels.STATUS_BUDGET:
        raise RuntimeError(f"step budget {max_steps} exhausted at t={t_end:.3e}s")

    sl = slice(0, filled)
    return TimeTrace(
        t=t_samples[sl], a=out[sl, 0] + 1j * out[sl, 1],
        q=out[sl, 2], q_dot=out[sl, 3], fast_rate=fast,
        escaped=(status == _kernels.STATUS_ESCAPED),
        escape_time=(t_end if status == _kernels.STATUS_ESCAPED else None),
    )


def gauge_rotation(params: SystemParams, ss: SteadyState) -> float:
    """Angle R relating the lab frame to the real-a_s convention frame."""
    if ss.drive.e_p == 0:
        return 0.0
    dtil = shifted_detuning(params, ss)
    return math.atan2(dtil, params.kappa) - ss.drive.pump_phase


def ansatz_initial(params: SystemParams, drive: DriveConfig,
                   state: SteadyState | None = None) -> tuple[complex, float, float]:
    """Lab-frame initial condition on the analytic steady orbit.

    Starting here, a stable configuration only has to hold its orbit over
    the fit window instead of settling from scratch, which is what makes
    sub-second oracle runs possible (the slowest transient decays at
    ~gamma_n/2).
    """
    ss = state if state is not None else default_branch(params, drive)
    if drive.e_s > 0:
        a_plus, a_minus, q_plus = response_direct_solve(params, ss, drive.delta)
    else:
        a_plus = a_minus = q_plus = 0j
    r = gauge_rotation(params, ss)
    eir = cmath.exp(1j * r)
    a0 = ss.a_s / eir + a_plus + a_minus / (eir * eir)
    qp_lab = q_plus * eir
    q0 = ss.q_s + 2.0 * qp_lab.real
    qd0 = 2.0 * drive.delta * qp_lab.imag
    return a0, q0, qd0


def demodulate(trace: TimeTrace, delta: float,
               window: float = 0.25) -> tuple[complex, complex]:
    """Fit the trailing ``window`` fraction of the trace to
    dc + c_plus e^{-i delta t} + c_minus e^{+i delta t}; returns (c_plus, c_minus).

    Raises NotConvergedError when the window is shorter than 100 beat
    periods, the trace escaped, or the beat-averaged |a| envelope drifts by
    more than 0.1% across the window (advice: extend t_final).
    """
    if not 0.0 < window <= 1.0:
        raise ValueError("window must be a fraction in (0, 1]")
    if trace.escaped:
        raise NotConvergedError("trace diverged before the fit window")
    if not trace.resolution_ok:
        raise NotConvergedError(
            "sampling too coarse to demodulate; rerun with finer sample_dt")
    if delta == 0:
        raise ValueError("delta must be nonzero to separate the sidebands")

    n = trace.t.size
    # round the sample count up so the window never falls short of the
    # requested fraction by a truncated partial sample
    start = n - min(max(math.ceil(window * n), 2), n)
    ts = trace.t[start:]
    amps = trace.a[start:]

    beat = 2.0 * math.pi / abs(delta)
    # the n-sample window covers (n-1) spacings plus the sample itself;
    # the relative slack keeps an exactly-100-beat window from tripping
    # on the last ulp of the time accumulation
    duration = ts[-1] - ts[0] + trace.dt
    if duration < MIN_WINDOW_BEATS * beat * (1.0 - 1e-9):
        raise NotConvergedError(
            f"fit window covers {duration / beat:.1f} beat periods, "
            f"need {MIN_WINDOW_BEATS:g}; extend t_final")

    per_beat = max(int(round(beat / trace.dt)), 1)
    nchunks = amps.size // per_beat
    means = np.abs(amps[: nchunks * per_beat]).reshape(nchunks, per_beat).mean(axis=1)
    center = means.mean()
    drift = (means.max() - means.min()) / max(center, 1e-300)
    if drift > DRIFT_LIMIT:
        raise NotConvergedError(
            f"envelope drift {drift:.2e} over the window exceeds {DRIFT_LIMIT}; "
            "extend t_final")

    design = np.column_stack([
        np.ones_like(ts), np.exp(-1j * delta * ts), np.exp(1j * delta * ts)])
    coef, *_ = np.linalg.lstsq(design, amps, rcond=None)
    return complex(coef[1]), complex(coef[2])


@dataclass(frozen=True)
class OraclePoint:
    delta: float
    demodulated: complex
    direct: complex
    rel_deviation: float
    converged: bool
    detail: str = ""


@dataclass(frozen=True)
class DeviationReport:
    """Per-point demodulated-vs-direct comparison plus summary statistics
    over the converged points."""

    points: tuple[OraclePoint, ...]
    max_deviation: float
    median_deviation: float

    @property
    def all_converged(self) -> bool:
        return all(p.converged for p in self.points)


def oracle_compare(params: SystemParams, drive: DriveConfig, deltas,
                   rtol: float = 1e-10, n_beats: float = 400.0,
                   backend: str | None = None) -> DeviationReport:
    """Integrate/demodulate at each signal detuning and compare the
    invariant e^{-i delta t} coefficient against the direct solve.

    Non-converged points are flagged and carried through, never raised.
    The default 400 beat periods leaves the trailing-25% window at the
    100-beat minimum.
    """
    pts = []
    for delta in (float(d) for d in deltas):
        d_k = with_delta(params, drive, delta)
        ss = default_branch(params, d_k)
        direct, _, _ = response_direct_solve(params, ss, delta)
        t_final = n_beats * 2.0 * math.pi / abs(delta)
        try:
            trace = integrate(params, d_k, t_final,
                              initial=ansatz_initial(params, d_k, ss),
                              rtol=rtol, backend=backend)
            c_plus, _ = demodulate(trace, delta)
        except NotConvergedError as err:
            pts.append(OraclePoint(delta=delta, demodulated=complex("nan"),
                                   direct=direct, rel_deviation=math.nan,
                                   converged=False, detail=str(err)))
            continue
        dev = abs(c_plus - direct) / max(abs(direct), 1e-300)
        pts.append(OraclePoint(delta=delta, demodulated=c_plus, direct=direct,
                               rel_deviation=dev, converged=True))

    devs = [p.rel_deviation for p in pts if p.converged]
    return DeviationReport(
        points=tuple(pts),
        max_deviation=max(devs) if devs else math.nan,
        median_deviation=float(np.median(devs)) if devs else math.nan,
    )


__all__ = [
    "TimeTrace", "NotConvergedError", "OraclePoint", "DeviationReport",
    "RESOLUTION_LIMIT", "MIN_WINDOW_BEATS", "DRIFT_LIMIT", "ESCAPE_FACTOR",
    "integrate", "ansatz_initial", "gauge_rotation", "demodulate",
    "oracle_compare",
]
