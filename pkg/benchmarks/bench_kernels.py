"""Wall-time comparison of the integrator backends.

Runs the same 400-beat two-tone trace (0.3 pW blue pump, signal on the
mechanical sideband) through the jitted kernel and the pure-numpy fallback,
then demodulates both and checks the sideband amplitudes agree. The first
jitted call is timed separately so compilation cost is visible.

    python3 benchmarks/bench_kernels.py [--beats N] [--repeat K]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

import cavemech as cm
from cavemech._kernels import available_backends


def one_trace(params, drive, t_final, y0, backend):
    t0 = time.perf_counter()
    trace = cm.integrate(params, drive, t_final, initial=y0, backend=backend)
    return time.perf_counter() - t0, trace


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--beats", type=float, default=400.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    params = cm.default_params()
    drive = cm.make_drive(params, 0.3e-12, 0.3e-18, -params.omega_n,
                          delta=params.omega_n)
    state = cm.default_branch(params, drive)
    y0 = cm.ansatz_initial(params, drive, state=state)
    t_final = args.beats * 2.0 * math.pi / drive.delta

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"trace: {args.beats:g} beat periods, "
          f"n_p = {state.n_p:.2f}, rtol = 1e-10")

    results = {}
    for backend in backends:
        if backend == "numba":
            warm, _ = one_trace(params, drive, t_final, y0, backend)
            print(f"numba first call (includes compile/cache load): {warm:.3f} s")
        times = []
        trace = None
        for _ in range(args.repeat):
            dt, trace = one_trace(params, drive, t_final, y0, backend)
            times.append(dt)
        best = min(times)
        c_plus, c_minus = cm.demodulate(trace, drive.delta)
        results[backend] = (best, c_plus, c_minus)
        print(f"{backend:>6}: best of {args.repeat}  {best:.4f} s")

    if len(results) == 2:
        t_nb, cp_nb, cm_nb = results["numba"]
        t_np, cp_np, _ = results["numpy"]
        print(f"speedup numpy/numba: {t_np / t_nb:.1f}x")
        rel = abs(cp_nb - cp_np) / abs(cp_np)
        print(f"demodulated sideband agreement: {rel:.3e} relative")
        direct, _, _ = cm.response_direct_solve(params, state, drive.delta)
        dev = abs(cp_nb - direct) / abs(direct)
        print(f"deviation from direct linear response: {dev:.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
