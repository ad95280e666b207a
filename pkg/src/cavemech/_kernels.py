"""Adaptive Dormand-Prince 4(5) cores for the mean-field equations of motion.

One scalar-state implementation, shipped twice: compiled with numba when
available, and as-is in pure Python over numpy buffers otherwise. Select
with the CAVEMECH_BACKEND env var ("numba" | "numpy") or per call; the
default prefers numba. The right-hand side is written out inline at every
stage because the compiled path must not close over Python functions.

State layout: u = Re(a), v = Im(a), q, qd = dq/dt. Lab frame, pump allowed
a constant complex amplitude (ep_re, ep_im), signal drive es*e^{-i delta t}.
Status codes: 0 done, 1 escaped (|a|^2 > escape2), 2 step budget exhausted.
"""

from __future__ import annotations

import math
import os

STATUS_OK = 0
STATUS_ESCAPED = 1
STATUS_BUDGET = 2


def _dp45_core(y0, t_samples, kap, gam, wn, dp, lam_, ep_re, ep_im, es, delta,
               rtol, scale_a, scale_q, escape2, h0, max_steps, out):
    a21 = 0.2
    a31 = 3.0 / 40.0; a32 = 9.0 / 40.0
    a41 = 44.0 / 45.0; a42 = -56.0 / 15.0; a43 = 32.0 / 9.0
    a51 = 19372.0 / 6561.0; a52 = -25360.0 / 2187.0
    a53 = 64448.0 / 6561.0; a54 = -212.0 / 729.0
    a61 = 9017.0 / 3168.0; a62 = -355.0 / 33.0; a63 = 46732.0 / 5247.0
    a64 = 49.0 / 176.0; a65 = -5103.0 / 18656.0
    b1 = 35.0 / 384.0; b3 = 500.0 / 1113.0; b4 = 125.0 / 192.0
    b5 = -2187.0 / 6784.0; b6 = 11.0 / 84.0
    e1 = 71.0 / 57600.0; e3 = -71.0 / 16695.0; e4 = 71.0 / 1920.0
    e5 = -17253.0 / 339200.0; e6 = 22.0 / 525.0; e7 = -1.0 / 40.0

    wn2 = wn * wn
    u = y0[0]; v = y0[1]; q = y0[2]; qd = y0[3]
    t = 0.0
    k1u = -kap * u + dp * v - lam_ * q * v + ep_re + es
    k1v = -kap * v - dp * u + lam_ * q * u + ep_im
    k1q = qd
    k1qd = -wn2 * q - gam * qd + 2.0 * wn * lam_ * (u * u + v * v)
    h = h0
    steps = 0
    atol_u = rtol * scale_a
    atol_q = rtol * scale_q
    atol_qd = rtol * scale_q * wn
    n = t_samples.shape[0]

    for i in range(n):
        t_target = t_samples[i]
        while t < t_target:
            if steps > max_steps:
                return STATUS_BUDGET, steps, i, t
            if h > t_target - t:
                h = t_target - t

            tt = t + 0.2 * h
            y1 = u + h * a21 * k1u; y2 = v + h * a21 * k1v
            y3 = q + h * a21 * k1q; y4 = qd + h * a21 * k1qd
            k2u = -kap * y1 + dp * y2 - lam_ * y3 * y2 + ep_re + es * math.cos(delta * tt)
            k2v = -kap * y2 - dp * y1 + lam_ * y3 * y1 + ep_im - es * math.sin(delta * tt)
            k2q = y4
            k2qd = -wn2 * y3 - gam * y4 + 2.0 * wn * lam_ * (y1 * y1 + y2 * y2)

            tt = t + 0.3 * h
            y1 = u + h * (a31 * k1u + a32 * k2u); y2 = v + h * (a31 * k1v + a32 * k2v)
            y3 = q + h * (a31 * k1q + a32 * k2q); y4 = qd + h * (a31 * k1qd + a32 * k2qd)
            k3u = -kap * y1 + dp * y2 - lam_ * y3 * y2 + ep_re + es * math.cos(delta * tt)
            k3v = -kap * y2 - dp * y1 + lam_ * y3 * y1 + ep_im - es * math.sin(delta * tt)
            k3q = y4
            k3qd = -wn2 * y3 - gam * y4 + 2.0 * wn * lam_ * (y1 * y1 + y2 * y2)

            tt = t + 0.8 * h
            y1 = u + h * (a41 * k1u + a42 * k2u + a43 * k3u)
            y2 = v + h * (a41 * k1v + a42 * k2v + a43 * k3v)
            y3 = q + h * (a41 * k1q + a42 * k2q + a43 * k3q)
            y4 = qd + h * (a41 * k1qd + a42 * k2qd + a43 * k3qd)
            k4u = -kap * y1 + dp * y2 - lam_ * y3 * y2 + ep_re + es * math.cos(delta * tt)
            k4v = -kap * y2 - dp * y1 + lam_ * y3 * y1 + ep_im - es * math.sin(delta * tt)
            k4q = y4
            k4qd = -wn2 * y3 - gam * y4 + 2.0 * wn * lam_ * (y1 * y1 + y2 * y2)

            tt = t + (8.0 / 9.0) * h
            y1 = u + h * (a51 * k1u + a52 * k2u + a53 * k3u + a54 * k4u)
            y2 = v + h * (a51 * k1v + a52 * k2v + a53 * k3v + a54 * k4v)
            y3 = q + h * (a51 * k1q + a52 * k2q + a53 * k3q + a54 * k4q)
            y4 = qd + h * (a51 * k1qd + a52 * k2qd + a53 * k3qd + a54 * k4qd)
            k5u = -kap * y1 + dp * y2 - lam_ * y3 * y2 + ep_re + es * math.cos(delta * tt)
            k5v = -kap * y2 - dp * y1 + lam_ * y3 * y1 + ep_im - es * math.sin(delta * tt)
            k5q = y4
            k5qd = -wn2 * y3 - gam * y4 + 2.0 * wn * lam_ * (y1 * y1 + y2 * y2)

            tt = t + h
            y1 = u + h * (a61 * k1u + a62 * k2u + a63 * k3u + a64 * k4u + a65 * k5u)
            y2 = v + h * (a61 * k1v + a62 * k2v + a63 * k3v + a64 * k4v + a65 * k5v)
            y3 = q + h * (a61 * k1q + a62 * k2q + a63 * k3q + a64 * k4q + a65 * k5q)
            y4 = qd + h * (a61 * k1qd + a62 * k2qd + a63 * k3qd + a64 * k4qd + a65 * k5qd)
            k6u = -kap * y1 + dp * y2 - lam_ * y3 * y2 + ep_re + es * math.cos(delta * tt)
            k6v = -kap * y2 - dp * y1 + lam_ * y3 * y1 + ep_im - es * math.sin(delta * tt)
            k6q = y4
            k6qd = -wn2 * y3 - gam * y4 + 2.0 * wn * lam_ * (y1 * y1 + y2 * y2)

            nu = u + h * (b1 * k1u + b3 * k3u + b4 * k4u + b5 * k5u + b6 * k6u)
            nv = v + h * (b1 * k1v + b3 * k3v + b4 * k4v + b5 * k5v + b6 * k6v)
            nq = q + h * (b1 * k1q + b3 * k3q + b4 * k4q + b5 * k5q + b6 * k6q)
            nqd = qd + h * (b1 * k1qd + b3 * k3qd + b4 * k4qd + b5 * k5qd + b6 * k6qd)
            k7u = -kap * nu + dp * nv - lam_ * nq * nv + ep_re + es * math.cos(delta * tt)
            k7v = -kap * nv - dp * nu + lam_ * nq * nu + ep_im - es * math.sin(delta * tt)
            k7q = nqd
            k7qd = -wn2 * nq - gam * nqd + 2.0 * wn * lam_ * (nu * nu + nv * nv)

            eu = h * (e1 * k1u + e3 * k3u + e4 * k4u + e5 * k5u + e6 * k6u + e7 * k7u)
            ev = h * (e1 * k1v + e3 * k3v + e4 * k4v + e5 * k5v + e6 * k6v + e7 * k7v)
            eq = h * (e1 * k1q + e3 * k3q + e4 * k4q + e5 * k5q + e6 * k6q + e7 * k7q)
            eqd = h * (e1 * k1qd + e3 * k3qd + e4 * k4qd + e5 * k5qd + e6 * k6qd + e7 * k7qd)

            wu = atol_u + rtol * max(abs(u), abs(nu))
            wv = atol_u + rtol * max(abs(v), abs(nv))
            wq = atol_q + rtol * max(abs(q), abs(nq))
            wqd = atol_qd + rtol * max(abs(qd), abs(nqd))
            err = math.sqrt(0.25 * ((eu / wu) ** 2 + (ev / wv) ** 2
                                    + (eq / wq) ** 2 + (eqd / wqd) ** 2))

            if err <= 1.0:
                t = t + h
                u = nu; v = nv; q = nq; qd = nqd
                k1u = k7u; k1v = k7v; k1q = k7q; k1qd = k7qd
                if u * u + v * v > escape2:
                    return STATUS_ESCAPED, steps, i, t

            if err > 0.0:
                fac = 0.9 * err ** -0.2
            else:
                fac = 5.0
            if fac < 0.2:
                fac = 0.2
            elif fac > 5.0:
                fac = 5.0
            h = h * fac
            steps += 1

        out[i, 0] = u; out[i, 1] = v; out[i, 2] = q; out[i, 3] = qd

    return STATUS_OK, steps, n, t


try:  # compiled twin; cache persists across processes
    import numba

    _dp45_numba = numba.njit(cache=True)(_dp45_core)
except ImportError:  # pragma: no cover - exercised only without numba
    _dp45_numba = None

_BACKENDS = {"numpy": _dp45_core}
if _dp45_numba is not None:
    _BACKENDS["numba"] = _dp45_numba

ENV_VAR = "CAVEMECH_BACKEND"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def resolve_backend(name: str | None = None) -> str:
    """Backend to use: explicit arg, else $CAVEMECH_BACKEND, else the
    fastest available."""
    chosen = name or os.environ.get(ENV_VAR) or (
        "numba" if "numba" in _BACKENDS else "numpy")
    if chosen not in _BACKENDS:
        raise ValueError(
            f"backend {chosen!r} not available; have {available_backends()}")
    return chosen


def get_core(backend: str | None = None):
    """(name, stepper) for the requested backend."""
    name = resolve_backend(backend)
    return name, _BACKENDS[name]


__all__ = [
    "STATUS_OK", "STATUS_ESCAPED", "STATUS_BUDGET", "ENV_VAR",
    "available_backends", "resolve_backend", "get_core",
]
