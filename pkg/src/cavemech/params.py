"""Physical parameters and drive configuration.

Everything internal lives in a single unit system: angular frequencies and
rates in rad/s, powers in watts, field amplitudes in sqrt(photon)*rad/s.
External config values may carry unit tags ("2pi * 6.3 MHz", "250 rad/s",
"0.3 pW"); the parsers here normalize them.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping

HBAR = 1.054571817e-34  # J*s

# gamma_n vs omega_n/q_n agreement required of a *constructed* SystemParams
_GAMMA_QN_EXACT = 1e-12
# tolerance when both are user-supplied (covers rounded data-sheet values)
_GAMMA_QN_SUPPLIED = 0.02


class ParamError(ValueError):
    """Raised for missing, non-positive, or mutually inconsistent parameters."""


@dataclass(frozen=True)
class SystemParams:
    """Device constants of the coupled cavity/resonator system, all in rad/s.

    ``lambda_c`` is the cavity pull per unit dimensionless resonator
    amplitude. ``q_n`` always satisfies gamma_n == omega_n / q_n after
    construction; use :func:`build_params` rather than the raw constructor
    when starting from mixed-unit inputs.
    """

    omega_c: float
    omega_n: float
    kappa: float
    gamma_n: float
    lambda_c: float
    q_n: float | None = None
    mass: float | None = None
    g_pull: float | None = None

    def __post_init__(self):
        for name in ("omega_c", "omega_n", "kappa", "gamma_n", "lambda_c"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ParamError(f"{name} must be a finite positive number, got {v!r}")
        if self.q_n is not None:
            dev = abs(self.gamma_n - self.omega_n / self.q_n) / self.gamma_n
            if dev > _GAMMA_QN_EXACT:
                raise ParamError(
                    f"gamma_n={self.gamma_n!r} and omega_n/q_n="
                    f"{self.omega_n / self.q_n!r} disagree (rel {dev:.3e}); "
                    "construct via build_params to reconcile supplied values"
                )

    @property
    def resolved_sideband(self) -> bool:
        """True when the mechanical frequency exceeds the cavity linewidth."""
        return self.omega_n > self.kappa

    @property
    def alpha(self) -> float:
        """Dimensionless Kerr-like coefficient 2*lambda_c^2/omega_n^2.

        omega_n * alpha * n_p is the static cavity frequency pull produced
        by n_p intracavity photons.
        """
        return 2.0 * self.lambda_c**2 / self.omega_n**2


def default_params() -> SystemParams:
    """Representative device: 7.5 GHz superconducting cavity, 6.3 MHz
    nanomechanical resonator, 600 kHz cavity linewidth, Q_n = 1e6."""
    omega_n = 2 * math.pi * 6.3e6
    return SystemParams(
        omega_c=2 * math.pi * 7.5e9,
        omega_n=omega_n,
        kappa=2 * math.pi * 600e3,
        gamma_n=omega_n / 1e6,
        lambda_c=250.0,
        q_n=1e6,
    )


# ---------------------------------------------------------------------------
# external-value parsing

_FREQ_SCALE = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_POWER_SCALE = {
    "w": 1.0, "mw": 1e-3, "uw": 1e-6, "nw": 1e-9, "pw": 1e-12,
    "fw": 1e-15, "aw": 1e-18,
}

_VALUE_RE = re.compile(
    r"""^\s*
    (?P<twopi>2\s*pi\s*\*\s*)?
    (?P<num>[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?)
    \s*(?P<unit>[a-zA-Z/]*)\s*$""",
    re.VERBOSE,
)


def parse_quantity(text: str | float, *, bare_is_angular: bool = True) -> float:
    """Parse a frequency/rate value with an optional unit tag into rad/s.

    Accepted forms: ``"2pi * 7.5 GHz"``, ``"600 kHz"`` (cyclic, multiplied
    by 2*pi), ``"250 rad/s"``, or a bare number. A bare number is taken as
    rad/s when ``bare_is_angular`` (the default), else as cyclic Hz.
    """
    if isinstance(text, (int, float)):
        val = float(text)
        return val if bare_is_angular else 2 * math.pi * val
    m = _VALUE_RE.match(text)
    if not m:
        raise ParamError(f"cannot parse quantity {text!r}")
    val = float(m.group("num"))
    unit = m.group("unit").lower()
    if m.group("twopi"):
        val *= 2 * math.pi
        if unit in _FREQ_SCALE:
            return val * _FREQ_SCALE[unit]
        if unit in ("", "rad/s"):
            return val
        raise ParamError(f"unit {unit!r} not valid after a 2pi* prefix in {text!r}")
    if unit == "rad/s":
        return val
    if unit in _FREQ_SCALE:
        return 2 * math.pi * val * _FREQ_SCALE[unit]
    if unit == "":
        return val if bare_is_angular else 2 * math.pi * val
    raise ParamError(f"unknown frequency unit {unit!r} in {text!r}")


def parse_power(text: str | float) -> float:
    """Parse a power with an SI suffix (``"0.3 pW"``, ``"10nW"``) into watts."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _VALUE_RE.match(text)
    if not m or m.group("twopi"):
        raise ParamError(f"cannot parse power {text!r}")
    val = float(m.group("num"))
    unit = m.group("unit").lower()
    if unit == "":
        return val
    if unit in _POWER_SCALE:
        return val * _POWER_SCALE[unit]
    raise ParamError(f"unknown power unit {unit!r} in {text!r}")


def parse_config_text(text: str) -> dict[str, str]:
    """Parse a flat ``key = value`` document (``#`` comments, order-free)."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParamError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, val = body.partition("=")
        key = key.strip().lower()
        if key in out:
            raise ParamError(f"line {lineno}: duplicate key {key!r}")
        out[key] = val.strip()
    return out


_PARAM_ALIASES = {"lambda": "lambda_c", "lam": "lambda_c"}
_PARAM_KEYS = {"omega_c", "omega_n", "kappa", "gamma_n", "lambda_c",
               "q_n", "mass", "g_pull"}


def build_params(raw: Mapping[str, object], lambda_units: str = "angular") -> SystemParams:
    """Build a :class:`SystemParams` from an external-config record.

    Parameters
    ----------
    raw:
        Mapping with keys omega_c, omega_n, kappa, lambda (or lambda_c),
        and at least one of gamma_n / q_n. Values may be numbers (rad/s)
        or tagged strings. lambda_c may instead be derived from g_pull and
        mass. Unrelated keys (powers, detunings) are ignored so a single
        config file can feed both params and drive.
    lambda_units:
        How to read a *bare* coupling value: "angular" (rad/s, default) or
        "hz" (multiplied by 2*pi). Explicit unit tags always win.

    Notes
    -----
    When gamma_n and q_n are both supplied they must agree within 2%
    (rounded published values pass); gamma_n is then recomputed as
    omega_n/q_n so the stored pair is exactly consistent. A missing q_n is
    derived from gamma_n.
    """
    rec: dict[str, object] = {}
    for key, val in raw.items():
        k = _PARAM_ALIASES.get(key.lower(), key.lower())
        if k in _PARAM_KEYS:
            rec[k] = val

    for name in ("omega_c", "omega_n", "kappa"):
        if name not in rec:
            raise ParamError(f"missing mandatory field {name!r}")
    omega_c = parse_quantity(rec["omega_c"])
    omega_n = parse_quantity(rec["omega_n"])
    kappa = parse_quantity(rec["kappa"])

    if "lambda_c" in rec:
        lambda_c = parse_quantity(rec["lambda_c"],
                                  bare_is_angular=(lambda_units == "angular"))
    elif "g_pull" in rec and "mass" in rec:
        g = parse_quantity(rec["g_pull"])
        mass = float(rec["mass"])  # kg, no unit tag
        if mass <= 0:
            raise ParamError("mass must be positive")
        lambda_c = g * math.sqrt(HBAR / (2 * omega_n * mass))
    else:
        raise ParamError("missing coupling: give lambda_c or both g_pull and mass")

    gamma_raw = rec.get("gamma_n")
    q_raw = rec.get("q_n")
    if gamma_raw is None and q_raw is None:
        raise ParamError("missing damping: give gamma_n or q_n")
    if q_raw is not None:
        q_n = float(q_raw)  # dimensionless, no unit tag
        if q_n <= 0:
            raise ParamError("q_n must be positive")
        gamma_from_q = omega_n / q_n
        if gamma_raw is not None:
            gamma_n = parse_quantity(gamma_raw)
            dev = abs(gamma_n - gamma_from_q) / gamma_n
            if dev > _GAMMA_QN_SUPPLIED:
                raise ParamError(
                    f"gamma_n={gamma_n:.6g} inconsistent with omega_n/q_n="
                    f"{gamma_from_q:.6g} (rel {dev:.3e} > {_GAMMA_QN_SUPPLIED})"
                )
        gamma_n = gamma_from_q
    else:
        gamma_n = parse_quantity(gamma_raw)
        if gamma_n <= 0:
            raise ParamError("gamma_n must be positive")
        q_n = omega_n / gamma_n

    mass = float(rec["mass"]) if "mass" in rec else None
    g_pull = parse_quantity(rec["g_pull"]) if "g_pull" in rec else None
    return SystemParams(omega_c=omega_c, omega_n=omega_n, kappa=kappa,
                        gamma_n=gamma_n, lambda_c=lambda_c, q_n=q_n,
                        mass=mass, g_pull=g_pull)


def serialize_params(p: SystemParams) -> dict[str, str]:
    """Round-trippable flat record; build_params(serialize_params(p)) == p."""
    rec = {
        "omega_c": f"{p.omega_c!r} rad/s",
        "omega_n": f"{p.omega_n!r} rad/s",
        "kappa": f"{p.kappa!r} rad/s",
        "lambda_c": f"{p.lambda_c!r} rad/s",
        "gamma_n": f"{p.gamma_n!r} rad/s",
    }
    if p.q_n is not None:
        # serialize gamma_n only: q_n is regenerated exactly as omega_n/gamma_n
        del rec["gamma_n"]
        rec["q_n"] = repr(p.omega_n / p.gamma_n)
    if p.mass is not None:
        rec["mass"] = repr(p.mass)
    if p.g_pull is not None:
        rec["g_pull"] = f"{p.g_pull!r} rad/s"
    return rec


# ---------------------------------------------------------------------------
# drive

def drive_amplitude(power: float, omega: float, kappa: float) -> float:
    """Field amplitude sqrt(2*power*kappa/(hbar*omega)) for a drive of the
    given power (W) at carrier omega (rad/s) into a cavity of linewidth kappa.

    Zero power gives exactly zero; scales as sqrt(power).
    """
    if omega <= 0 or kappa <= 0:
        raise ParamError(f"omega and kappa must be positive, got {omega}, {kappa}")
    if power < 0:
        raise ParamError(f"power must be non-negative, got {power}")
    return math.sqrt(2.0 * power * kappa / (HBAR * omega))


def cooperativity(params: SystemParams, n_p: float) -> float:
    """4*lambda_c^2*n_p / (gamma_n*kappa); linear in the pump photon number."""
    if n_p < 0:
        raise ParamError(f"n_p must be non-negative, got {n_p}")
    return 4.0 * params.lambda_c**2 * n_p / (params.gamma_n * params.kappa)


@dataclass(frozen=True)
class DriveConfig:
    """Two-tone drive: pump at omega_p = omega_c - delta_p, signal at
    omega_s = omega_p + delta.

    e_p and e_s are the derived field amplitudes |E| = sqrt(2 P kappa / hbar omega);
    pump_phase is the lab-frame pump phase (radians). It never enters |E_p|
    and physical response observables are independent of it.
    """

    pump_power: float
    signal_power: float
    delta_p: float
    delta: float
    e_p: float
    e_s: float
    omega_p: float
    omega_s: float
    pump_phase: float = 0.0

    def __post_init__(self):
        if self.pump_power < 0 or self.signal_power < 0:
            raise ParamError("powers must be non-negative")
        if (self.e_p == 0) != (self.pump_power == 0):
            raise ParamError("e_p must be zero exactly when pump_power is zero")

    @property
    def delta_s(self) -> float:
        """Signal-cavity detuning omega_s - omega_c = delta - delta_p."""
        return self.delta - self.delta_p


def make_drive(params: SystemParams, pump_power: float, signal_power: float,
               delta_p: float, delta: float, pump_phase: float = 0.0) -> DriveConfig:
    """Construct a DriveConfig with amplitudes derived from the exact carrier
    frequencies omega_p = omega_c - delta_p and omega_s = omega_p + delta."""
    omega_p = params.omega_c - delta_p
    omega_s = omega_p + delta
    if omega_p <= 0 or omega_s <= 0:
        raise ParamError("carrier frequencies must come out positive")
    return DriveConfig(
        pump_power=pump_power,
        signal_power=signal_power,
        delta_p=delta_p,
        delta=delta,
        e_p=drive_amplitude(pump_power, omega_p, params.kappa),
        e_s=drive_amplitude(signal_power, omega_s, params.kappa),
        omega_p=omega_p,
        omega_s=omega_s,
        pump_phase=pump_phase,
    )


def with_delta(params: SystemParams, drive: DriveConfig, delta: float) -> DriveConfig:
    """Same drive retuned to a new signal-pump detuning (e_s tracks omega_s)."""
    return make_drive(params, drive.pump_power, drive.signal_power,
                      drive.delta_p, delta, drive.pump_phase)


__all__ = [
    "HBAR", "ParamError", "SystemParams", "DriveConfig",
    "default_params", "build_params", "serialize_params",
    "parse_quantity", "parse_power", "parse_config_text",
    "drive_amplitude", "cooperativity", "make_drive", "with_delta",
]
