"""Two-tone response of a microwave cavity coupled to a nanomechanical mode.

A strong pump plus a weak probe drive a cavity whose frequency is pulled by
the displacement of a mechanical resonator. The package computes the pumped
steady state (cubic photon-number equation with branch bookkeeping), the
linearized probe response in closed form and by direct solve, dynamical
stability of the stationary point, and full nonlinear time integration with
lock-in demodulation as an independent cross-check. A batch CLI turns named
experiments into CSV/JSON artifacts.
"""

__version__ = "0.1.0"

from .params import (HBAR, DriveConfig, ParamError, SystemParams,
                     build_params, cooperativity, default_params,
                     drive_amplitude, make_drive, parse_config_text,
                     parse_power, parse_quantity, serialize_params,
                     with_delta)
from .response import (ClosedFormTerms, GainPoint, PoleError, ResponsePoint,
                       Spectrum, auto_span, closed_form_terms, gain_curve,
                       response_closed_form, response_direct_solve,
                       response_point, sweep_spectrum, transmission,
                       transparency_fwhm)
from .stability import (StabilityReport, ThresholdResult, characteristic_margin,
                        dynamics_matrix, instability_threshold,
                        stability_report)
from .steady import (NoSuchBranchError, SteadyState, default_branch,
                     photon_number_roots, shifted_detuning, steady_state)
from .timedomain import (DeviationReport, NotConvergedError, OraclePoint,
                         TimeTrace, ansatz_initial, demodulate, gauge_rotation,
                         integrate, oracle_compare)

__all__ = [
    "__version__", "HBAR",
    "SystemParams", "DriveConfig", "ParamError",
    "build_params", "default_params", "serialize_params",
    "parse_quantity", "parse_power", "parse_config_text",
    "drive_amplitude", "make_drive", "with_delta", "cooperativity",
    "SteadyState", "NoSuchBranchError",
    "photon_number_roots", "steady_state", "default_branch", "shifted_detuning",
    "ClosedFormTerms", "ResponsePoint", "Spectrum", "GainPoint", "PoleError",
    "closed_form_terms", "response_closed_form", "response_direct_solve",
    "response_point", "transmission", "sweep_spectrum", "gain_curve", "auto_span",
    "transparency_fwhm",
    "StabilityReport", "ThresholdResult",
    "dynamics_matrix", "stability_report", "instability_threshold",
    "characteristic_margin",
    "TimeTrace", "NotConvergedError", "OraclePoint", "DeviationReport",
    "integrate", "ansatz_initial", "gauge_rotation", "demodulate",
    "oracle_compare",
]
