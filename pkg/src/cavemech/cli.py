"""Batch front-end: named experiments in, CSV/JSON artifacts out.

Subcommands: spectrum, gain, threshold, oracle, preset {fig2a,fig2b,fig3b,nms}.
Every run is described by an ExperimentSpec; the spec is embedded in the JSON
metadata it produces and re-parses to an equivalent spec, so any artifact can
be regenerated. CSV payloads carry no timestamp and rerun byte-identically;
the JSON sidecar holds the clock, resolved parameters, and stability flags.
Files are written atomically (temp + rename). Exit codes: 0 ok, 2 validation
error, 3 flagged-point quota exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .params import (SystemParams, build_params, cooperativity, default_params,
                     make_drive, parse_config_text, parse_power, parse_quantity)
from .response import (NORMALIZATIONS, SPECTRUM_COLUMNS, auto_span, gain_curve,
                       sweep_spectrum)
from .stability import instability_threshold, stability_report
from .steady import steady_state
from .timedomain import oracle_compare

KINDS = ("spectrum", "gain_curve", "threshold", "oracle_compare", "steady_map")
FORMATS = ("csv", "json", "both")
LAMBDA_UNITS = ("angular", "hz")

_POINT_DEFAULTS = {"spectrum": 2001, "gain_curve": 101, "threshold": 21,
                   "oracle_compare": 21, "steady_map": 0}


class SpecValidationError(ValueError):
    """Experiment spec failed validation (missing file, bad grid, ...)."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Complete, serializable description of one batch experiment.

    delta_p is kept symbolic ("blue" = -omega_n, "red" = +omega_n, or a
    tagged quantity string) so a spec file stays meaningful across parameter
    sets. pump_powers are in watts, ascending.
    """

    kind: str
    pump_powers: tuple[float, ...]
    delta_p: str = "blue"
    params_ref: str | None = None
    signal_power: float = 1e-18
    span: float | None = None
    points: int | None = None
    normalization: str = "critical"
    lambda_units: str = "angular"
    out_dir: str = "cavemech-out"
    formats: str = "both"
    max_flagged: int = 0
    plot: bool = False
    tag: str | None = None
    bracket_max: float = 100e-12

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise SpecValidationError(f"unknown kind {self.kind!r}; have {KINDS}")
        if self.params_ref is not None and not Path(self.params_ref).is_file():
            raise SpecValidationError(f"params file not found: {self.params_ref}")
        if not self.pump_powers:
            raise SpecValidationError("pump_powers must be non-empty")
        if any(p < 0 for p in self.pump_powers):
            raise SpecValidationError("pump powers must be non-negative")
        if any(b <= a for a, b in zip(self.pump_powers, self.pump_powers[1:])):
            raise SpecValidationError("pump_powers must be strictly ascending")
        if self.signal_power < 0:
            raise SpecValidationError("signal_power must be non-negative")
        if self.normalization not in NORMALIZATIONS:
            raise SpecValidationError(
                f"unknown normalization {self.normalization!r}")
        if self.lambda_units not in LAMBDA_UNITS:
            raise SpecValidationError(f"unknown lambda_units {self.lambda_units!r}")
        if self.formats not in FORMATS:
            raise SpecValidationError(f"unknown format {self.formats!r}")
        points = self.resolved_points
        if self.kind != "steady_map" and points < 2:
            raise SpecValidationError("points must be at least 2")
        if self.span is not None and self.span <= 0:
            raise SpecValidationError("span must be positive")
        if self.bracket_max <= 0:
            raise SpecValidationError("bracket_max must be positive")
        if self.max_flagged < 0:
            raise SpecValidationError("max_flagged must be non-negative")

    @property
    def resolved_points(self) -> int:
        return self.points if self.points is not None else _POINT_DEFAULTS[self.kind]


def spec_to_dict(spec: ExperimentSpec) -> dict:
    d = asdict(spec)
    d["pump_powers"] = list(spec.pump_powers)
    return d


def parse_spec(d: dict) -> ExperimentSpec:
    """Inverse of spec_to_dict; unknown keys rejected."""
    known = set(ExperimentSpec.__dataclass_fields__)
    extra = set(d) - known
    if extra:
        raise SpecValidationError(f"unknown spec fields: {sorted(extra)}")
    d = dict(d)
    d["pump_powers"] = tuple(float(p) for p in d.get("pump_powers", ()))
    return ExperimentSpec(**d)


def _resolve_delta_p(params: SystemParams, token: str) -> float:
    if token == "blue":
        return -params.omega_n
    if token == "red":
        return params.omega_n
    try:
        return parse_quantity(token)
    except Exception as err:
        raise SpecValidationError(f"cannot parse delta_p {token!r}: {err}") from err


def _load_params(spec: ExperimentSpec) -> SystemParams:
    if spec.params_ref is None:
        return default_params()
    text = Path(spec.params_ref).read_text()
    return build_params(parse_config_text(text), lambda_units=spec.lambda_units)


# ---------------------------------------------------------------------------
# output plumbing

def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_text(data)
    os.replace(tmp, path)


def _write_csv(path: Path, columns, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    _atomic_write(path, buf.getvalue())


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _write_json(path: Path, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True,
                                   default=_json_default) + "\n")


def _power_tag(power: float) -> str:
    for unit, scale in (("W", 1.0), ("mW", 1e-3), ("uW", 1e-6), ("nW", 1e-9),
                        ("pW", 1e-12), ("fW", 1e-15)):
        if power >= scale:
            return f"{power / scale:g}{unit}"
    return "0W" if power == 0 else f"{power:g}W"


def _metadata(spec: ExperimentSpec, params: SystemParams, **extra) -> dict:
    meta = {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "spec": spec_to_dict(spec),
        "params": {
            "omega_c": params.omega_c, "omega_n": params.omega_n,
            "kappa": params.kappa, "gamma_n": params.gamma_n,
            "lambda_c": params.lambda_c, "q_n": params.q_n,
            "resolved_sideband": params.resolved_sideband,
        },
    }
    meta.update(extra)
    return meta


def _maybe_plot(spec: ExperimentSpec, path: Path, series, xlabel: str,
                ylabel: str, logy: bool = False) -> list[Path]:
    """series: iterable of (label, x, y). Returns written paths."""
    if not spec.plot:
        return []
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for label, x, y in series:
        ax.plot(x, y, label=label, linewidth=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logy:
        ax.set_yscale("log")
    if len(series) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return [path]


# ---------------------------------------------------------------------------
# experiment runners; each returns (written files, flagged point count)

def _stability_block(params, ss) -> dict:
    rep = stability_report(params, ss)
    return {
        "branch": ss.branch,
        "stable": rep.stable,
        "margin": rep.margin,
        "effective_damping": rep.effective_damping,
        "eigenvalues": list(rep.eigenvalues),
        "n_p": ss.n_p,
        "cooperativity": cooperativity(params, ss.n_p),
    }


def _run_spectrum(spec: ExperimentSpec, params: SystemParams, out: Path):
    dp = _resolve_delta_p(params, spec.delta_p)
    points = spec.resolved_points
    tag = spec.tag or "spectrum"

    if spec.span is not None:
        half = spec.span
    else:
        # shared axis across the power ladder: widest auto window wins
        halves = []
        for power in spec.pump_powers:
            drive = make_drive(params, power, spec.signal_power, dp, delta=dp)
            from .steady import default_branch
            halves.append(auto_span(params, default_branch(params, drive).n_p))
        half = max(halves)
    grid = np.linspace(-half, half, points)

    files, flagged, series = [], 0, []
    for power in spec.pump_powers:
        drive = make_drive(params, power, spec.signal_power, dp, delta=dp)
        spectrum = sweep_spectrum(params, drive, delta_s_grid=grid,
                                  normalization=spec.normalization)
        flagged += spectrum.flagged_count
        rows = list(spectrum.rows())
        base = out / f"{tag}_{_power_tag(power)}"
        if spec.formats in ("csv", "both"):
            _write_csv(base.with_suffix(".csv"), SPECTRUM_COLUMNS, rows)
            files.append(base.with_suffix(".csv"))
        if spec.formats in ("json", "both"):
            meta = _metadata(
                spec, params,
                drive={"pump_power": power, "signal_power": spec.signal_power,
                       "delta_p": dp, "e_p": drive.e_p, "e_s": drive.e_s},
                normalization=spec.normalization,
                stability=_stability_block(params, spectrum.state),
                flagged_points=spectrum.flagged_count,
                columns=list(SPECTRUM_COLUMNS),
                rows=rows,
            )
            _write_json(base.with_suffix(".json"), meta)
            files.append(base.with_suffix(".json"))
        series.append((_power_tag(power), grid,
                       [p.transmission for p in spectrum.points]))

    files += _maybe_plot(spec, out / f"{tag}.svg", series,
                         "signal-cavity detuning (rad/s)", "|t_p|^2")
    return files, flagged


_GAIN_COLUMNS = ("pump_power_w", "gain", "n_p", "cooperativity", "stable_flag")


def _run_gain(spec: ExperimentSpec, params: SystemParams, out: Path):
    dp = _resolve_delta_p(params, spec.delta_p)
    tag = spec.tag or "gain"
    curve = gain_curve(params, spec.pump_powers, delta_p=dp,
                       signal_power=spec.signal_power,
                       normalization=spec.normalization)
    rows = [(g.pump_power, g.gain, g.n_p, g.cooperativity, int(g.stable))
            for g in curve]
    files = []
    base = out / tag
    if spec.formats in ("csv", "both"):
        _write_csv(base.with_suffix(".csv"), _GAIN_COLUMNS, rows)
        files.append(base.with_suffix(".csv"))
    if spec.formats in ("json", "both"):
        meta = _metadata(spec, params, delta_p=dp,
                         normalization=spec.normalization,
                         columns=list(_GAIN_COLUMNS), rows=rows,
                         unstable_points=sum(1 for g in curve if not g.stable))
        _write_json(base.with_suffix(".json"), meta)
        files.append(base.with_suffix(".json"))
    files += _maybe_plot(spec, out / f"{tag}.svg",
                         [("gain", [g.pump_power for g in curve],
                           [g.gain for g in curve])],
                         "pump power (W)", "gain |t_p|^2")
    return files, 0


_THRESHOLD_COLUMNS = ("pump_power_w", "stability_margin", "stable_flag")


def _run_threshold(spec: ExperimentSpec, params: SystemParams, out: Path):
    from .steady import default_branch

    dp = _resolve_delta_p(params, spec.delta_p)
    tag = spec.tag or "threshold"
    result = instability_threshold(params, dp, bracket=(0.0, spec.bracket_max))

    rows = []
    for power in np.linspace(0.0, spec.bracket_max, spec.resolved_points):
        drive = make_drive(params, float(power), 0.0, dp, delta=dp)
        rep = stability_report(params, default_branch(params, drive))
        rows.append((float(power), rep.margin, int(rep.stable)))

    files = []
    base = out / tag
    if spec.formats in ("csv", "both"):
        _write_csv(base.with_suffix(".csv"), _THRESHOLD_COLUMNS, rows)
        files.append(base.with_suffix(".csv"))
    if spec.formats in ("json", "both"):
        meta = _metadata(spec, params, delta_p=dp,
                         threshold={"found": result.found, "power": result.power,
                                    "n_p": result.n_p,
                                    "bracket": list(result.bracket)},
                         columns=list(_THRESHOLD_COLUMNS), rows=rows)
        _write_json(base.with_suffix(".json"), meta)
        files.append(base.with_suffix(".json"))

    if result.found:
        print(f"instability threshold: {result.power:.6e} W "
              f"(n_p = {result.n_p:.4f})")
    else:
        print(f"no instability threshold in (0, {spec.bracket_max:.3e}] W")
    print(f"{'power (W)':>14} {'margin (rad/s)':>16} stable")
    for power, margin, stable in rows:
        print(f"{power:>14.6e} {margin:>16.6e} {'yes' if stable else 'NO'}")

    files += _maybe_plot(spec, out / f"{tag}.svg",
                         [("margin", [r[0] for r in rows], [r[1] for r in rows])],
                         "pump power (W)", "stability margin (rad/s)")
    return files, 0


_ORACLE_COLUMNS = ("delta_rad_s", "re_demodulated", "im_demodulated",
                   "re_direct", "im_direct", "rel_deviation", "converged_flag")


def _run_oracle(spec: ExperimentSpec, params: SystemParams, out: Path):
    from .steady import default_branch

    dp = _resolve_delta_p(params, spec.delta_p)
    tag = spec.tag or "oracle"
    power = spec.pump_powers[-1]
    drive = make_drive(params, power, spec.signal_power or power * 1e-6,
                       dp, delta=params.omega_n)
    if spec.span is not None:
        half = spec.span
    else:
        n_p = default_branch(params, drive).n_p
        half = 5.0 * params.gamma_n * (1.0 + cooperativity(params, n_p))
    deltas = params.omega_n + np.linspace(-half, half, spec.resolved_points)

    report = oracle_compare(params, drive, deltas)
    rows = [(p.delta, p.demodulated.real, p.demodulated.imag,
             p.direct.real, p.direct.imag, p.rel_deviation, int(p.converged))
            for p in report.points]
    flagged = sum(1 for p in report.points if not p.converged)

    files = []
    base = out / tag
    if spec.formats in ("csv", "both"):
        _write_csv(base.with_suffix(".csv"), _ORACLE_COLUMNS, rows)
        files.append(base.with_suffix(".csv"))
    if spec.formats in ("json", "both"):
        meta = _metadata(spec, params, delta_p=dp, pump_power=power,
                         max_deviation=report.max_deviation,
                         median_deviation=report.median_deviation,
                         flagged_points=flagged,
                         columns=list(_ORACLE_COLUMNS), rows=rows)
        _write_json(base.with_suffix(".json"), meta)
        files.append(base.with_suffix(".json"))

    print(f"oracle comparison at {_power_tag(power)}: max deviation "
          f"{report.max_deviation:.3e}, median {report.median_deviation:.3e}, "
          f"{flagged} non-converged point(s)")
    files += _maybe_plot(spec, out / f"{tag}.svg",
                         [("deviation", [r[0] for r in rows],
                           [r[5] for r in rows])],
                         "signal-pump detuning (rad/s)", "relative deviation",
                         logy=True)
    return files, flagged


_STEADY_COLUMNS = ("pump_power_w", "branch", "n_p", "q_s",
                   "stable_flag", "degenerate_flag")


def _run_steady_map(spec: ExperimentSpec, params: SystemParams, out: Path):
    dp = _resolve_delta_p(params, spec.delta_p)
    tag = spec.tag or "steady_map"
    rows = []
    for power in spec.pump_powers:
        drive = make_drive(params, power, 0.0, dp, delta=dp)
        for ss in steady_state(params, drive, selection="all"):
            rows.append((power, ss.branch, ss.n_p, ss.q_s,
                         int(ss.dynamically_stable), int(ss.degenerate)))
    files = []
    base = out / tag
    if spec.formats in ("csv", "both"):
        _write_csv(base.with_suffix(".csv"), _STEADY_COLUMNS, rows)
        files.append(base.with_suffix(".csv"))
    if spec.formats in ("json", "both"):
        meta = _metadata(spec, params, delta_p=dp,
                         columns=list(_STEADY_COLUMNS), rows=rows)
        _write_json(base.with_suffix(".json"), meta)
        files.append(base.with_suffix(".json"))
    return files, 0


_RUNNERS = {
    "spectrum": _run_spectrum,
    "gain_curve": _run_gain,
    "threshold": _run_threshold,
    "oracle_compare": _run_oracle,
    "steady_map": _run_steady_map,
}


def run(spec: ExperimentSpec) -> int:
    """Validate and execute one experiment; returns the process exit code
    (0, or 3 when flagged points exceed the spec's quota)."""
    spec.validate()
    params = _load_params(spec)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    files, flagged = _RUNNERS[spec.kind](spec, params, out)
    for f in files:
        print(f"wrote {f}")
    if flagged > spec.max_flagged:
        print(f"error: {flagged} flagged point(s) exceed the quota "
              f"{spec.max_flagged}", file=sys.stderr)
        return 3
    return 0


# ---------------------------------------------------------------------------
# presets

def preset_spec(name: str, params: SystemParams, base: ExperimentSpec) -> ExperimentSpec:
    """Concrete experiment for a named preset, window sizes resolved against
    the given parameter set."""
    pico = 1e-12
    nano = 1e-9
    if name == "fig2a":
        # red-detuned ladder: transparency window deepens to unity, then broadens
        return replace(base, kind="spectrum", delta_p="red", tag="fig2a",
                       pump_powers=(0.0, 0.01 * nano, 0.05 * nano, 0.2 * nano,
                                    1.0 * nano, 10.0 * nano),
                       span=50.0 * params.kappa)
    if name == "fig2b":
        # blue-detuned ladder: attenuation at low power, amplification at high
        return replace(base, kind="spectrum", delta_p="blue", tag="fig2b",
                       pump_powers=(0.0, 0.3 * pico, 0.5 * pico, 0.6 * pico,
                                    0.8 * pico, 0.9 * pico),
                       span=50.0 * params.kappa)
    if name == "fig3b":
        points = base.points or 101
        return replace(base, kind="gain_curve", delta_p="blue", tag="fig3b",
                       points=points,
                       pump_powers=tuple(np.linspace(0.0, 1.0 * pico, points)))
    if name == "nms":
        # strong red pump: two hybridized lines split by 2*lambda_c*sqrt(n_p)
        drive = make_drive(params, 10.0 * nano, base.signal_power,
                           params.omega_n, delta=params.omega_n)
        from .steady import default_branch
        g = params.lambda_c * math.sqrt(default_branch(params, drive).n_p)
        return replace(base, kind="spectrum", delta_p="red", tag="nms",
                       pump_powers=(10.0 * nano,), span=4.0 * g)
    raise SpecValidationError(f"unknown preset {name!r}")


PRESET_NAMES = ("fig2a", "fig2b", "fig3b", "nms")


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--params", metavar="FILE", default=None,
                   help="flat key=value parameter file (default: built-in device)")
    p.add_argument("--out", metavar="DIR", default="cavemech-out")
    p.add_argument("--normalization", choices=NORMALIZATIONS, default="critical")
    p.add_argument("--lambda-units", choices=LAMBDA_UNITS, default="angular",
                   help="reading of bare coupling values in the params file")
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--format", choices=FORMATS, default="both")
    p.add_argument("--max-flagged", type=int, default=0)
    p.add_argument("--plot", action="store_true",
                   help="also write an SVG rendering of each sweep")


def _powers_arg(text: str) -> tuple[float, ...]:
    return tuple(parse_power(tok) for tok in text.split(",") if tok.strip())


def _base_spec(args, kind: str) -> ExperimentSpec:
    return ExperimentSpec(
        kind=kind, pump_powers=(0.0,),
        params_ref=args.params, out_dir=args.out,
        normalization=args.normalization, lambda_units=args.lambda_units,
        points=args.points, formats=args.format,
        max_flagged=args.max_flagged, plot=args.plot,
    )


def build_spec(args) -> ExperimentSpec:
    """Translate parsed CLI arguments into an ExperimentSpec."""
    cmd = args.command
    if cmd == "spectrum":
        spec = _base_spec(args, "spectrum")
        return replace(spec, pump_powers=_powers_arg(args.pump_power),
                       delta_p=args.delta_p,
                       signal_power=parse_power(args.signal_power),
                       span=args.span)
    if cmd == "gain":
        spec = _base_spec(args, "gain_curve")
        lo = parse_power(args.power_min)
        hi = parse_power(args.power_max)
        if hi <= lo:
            raise SpecValidationError("--power-max must exceed --power-min")
        n = spec.resolved_points
        return replace(spec, delta_p=args.delta_p,
                       pump_powers=tuple(np.linspace(lo, hi, n)))
    if cmd == "threshold":
        spec = _base_spec(args, "threshold")
        return replace(spec, delta_p=args.delta_p,
                       pump_powers=(parse_power(args.bracket_max),),
                       bracket_max=parse_power(args.bracket_max))
    if cmd == "oracle":
        spec = _base_spec(args, "oracle_compare")
        return replace(spec, delta_p=args.delta_p,
                       pump_powers=(parse_power(args.pump_power),),
                       signal_power=parse_power(args.pump_power) * 1e-6)
    if cmd == "preset":
        spec = _base_spec(args, "spectrum")
        return preset_spec(args.name, _load_params(spec), spec)
    raise SpecValidationError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cavemech",
        description="cavity/nanoresonator two-tone response experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="transmission vs signal-cavity detuning")
    _add_common(p)
    p.add_argument("--pump-power", default="0.3pW",
                   help="comma-separated ascending list, SI suffixes ok")
    p.add_argument("--delta-p", default="blue",
                   help='"blue", "red", or a tagged value like "2pi * 1 MHz"')
    p.add_argument("--signal-power", default="1aW")
    p.add_argument("--span", type=float, default=None,
                   help="half-width of the detuning grid, rad/s (default auto)")

    p = sub.add_parser("gain", help="transistor gain vs pump power")
    _add_common(p)
    p.add_argument("--delta-p", default="blue")
    p.add_argument("--power-min", default="0")
    p.add_argument("--power-max", default="1pW")

    p = sub.add_parser("threshold", help="parametric instability power search")
    _add_common(p)
    p.add_argument("--delta-p", default="blue")
    p.add_argument("--bracket-max", default="100pW")

    p = sub.add_parser("oracle", help="time-domain vs linear-response check")
    _add_common(p)
    p.add_argument("--pump-power", default="0.3pW")
    p.add_argument("--delta-p", default="blue")

    p = sub.add_parser("preset", help="named figure-style experiment")
    _add_common(p)
    p.add_argument("name", choices=PRESET_NAMES)

    args = parser.parse_args(argv)
    try:
        spec = build_spec(args)
        return run(spec)
    except SpecValidationError as err:
        json.dump({"error": "validation", "detail": str(err)}, sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
