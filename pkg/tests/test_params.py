import math

import pytest

import cavemech as cm
from cavemech.params import (HBAR, DriveConfig, ParamError, SystemParams,
                             build_params, cooperativity, drive_amplitude,
                             make_drive, parse_config_text, parse_power,
                             parse_quantity, serialize_params, with_delta)

TWO_PI = 2.0 * math.pi


class TestParseQuantity:
    def test_two_pi_prefix(self):
        assert parse_quantity("2pi * 7.5 GHz") == pytest.approx(TWO_PI * 7.5e9)
        assert parse_quantity("2pi*6.3 MHz") == pytest.approx(TWO_PI * 6.3e6)

    def test_cyclic_units_multiply_by_two_pi(self):
        assert parse_quantity("600 kHz") == pytest.approx(TWO_PI * 600e3)
        assert parse_quantity("40 Hz") == pytest.approx(TWO_PI * 40.0)

    def test_rad_s_passes_through(self):
        assert parse_quantity("250 rad/s") == 250.0

    def test_bare_number_default_angular(self):
        assert parse_quantity("250") == 250.0
        assert parse_quantity(250.0) == 250.0

    def test_bare_number_cyclic_mode(self):
        assert parse_quantity("250", bare_is_angular=False) == pytest.approx(TWO_PI * 250)

    def test_two_pi_with_bare_number(self):
        assert parse_quantity("2pi * 40") == pytest.approx(TWO_PI * 40.0)

    @pytest.mark.parametrize("bad", ["", "fast", "1.2.3 Hz", "5 parsec", "2pi * 3 pW"])
    def test_rejects_garbage(self, bad):
        with pytest.raises(ParamError):
            parse_quantity(bad)


class TestParsePower:
    @pytest.mark.parametrize("text,watts", [
        ("0.3 pW", 0.3e-12),
        ("10nW", 1e-8),
        ("1 aW", 1e-18),
        ("2 W", 2.0),
        ("4e-13", 4e-13),
    ])
    def test_si_suffixes(self, text, watts):
        assert parse_power(text) == pytest.approx(watts, rel=1e-15)

    def test_numeric_passthrough(self):
        assert parse_power(0.5e-12) == 0.5e-12

    @pytest.mark.parametrize("bad", ["0.3 GHz", "2pi * 1 pW", "much"])
    def test_rejects_non_power(self, bad):
        with pytest.raises(ParamError):
            parse_power(bad)


class TestParseConfigText:
    def test_key_values_with_comments(self):
        text = """
        # device A
        omega_c = 2pi * 7.5 GHz
        kappa = 600 kHz  # loaded
        lambda = 250 rad/s
        """
        rec = parse_config_text(text)
        assert rec == {"omega_c": "2pi * 7.5 GHz", "kappa": "600 kHz",
                       "lambda": "250 rad/s"}

    def test_duplicate_key_rejected(self):
        with pytest.raises(ParamError, match="duplicate"):
            parse_config_text("kappa = 1\nkappa = 2\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ParamError, match="key = value"):
            parse_config_text("kappa 600 kHz")


class TestBuildParams:
    def record(self, **over):
        rec = {
            "omega_c": "2pi * 7.5 GHz",
            "omega_n": "2pi * 6.3 MHz",
            "kappa": "2pi * 600 kHz",
            "lambda": "250 rad/s",
            "q_n": "1e6",
        }
        rec.update(over)
        return rec

    def test_matches_defaults(self, params):
        # parsing multiplies 2pi in a different order than the stock
        # constructor, so agreement is to the ulp, not bitwise
        built = build_params(self.record())
        for name in ("omega_c", "omega_n", "kappa", "gamma_n", "lambda_c", "q_n"):
            assert getattr(built, name) == pytest.approx(
                getattr(params, name), rel=1e-14)

    def test_bare_lambda_angular_vs_hz(self):
        p_ang = build_params(self.record(**{"lambda": "250"}))
        p_hz = build_params(self.record(**{"lambda": "250"}), lambda_units="hz")
        assert p_ang.lambda_c == 250.0
        assert p_hz.lambda_c == pytest.approx(TWO_PI * 250.0)

    def test_explicit_tag_beats_lambda_units(self):
        p = build_params(self.record(**{"lambda": "250 rad/s"}), lambda_units="hz")
        assert p.lambda_c == 250.0

    def test_gamma_and_q_reconciled(self, params):
        # a rounded data-sheet gamma_n (1.1% off omega_n/q_n) is accepted
        # and replaced by the exact quotient
        p = build_params(self.record(gamma_n="40 rad/s"))
        assert p.gamma_n == pytest.approx(params.omega_n / 1e6, rel=1e-15)

    def test_gamma_q_conflict_rejected(self):
        with pytest.raises(ParamError, match="inconsistent"):
            build_params(self.record(gamma_n="45 rad/s"))

    def test_gamma_only_derives_q(self, params):
        rec = self.record()
        del rec["q_n"]
        rec["gamma_n"] = "39.5840674352314 rad/s"
        p = build_params(rec)
        assert p.q_n == pytest.approx(1e6, rel=1e-12)

    def test_coupling_from_pull_and_mass(self):
        rec = self.record()
        del rec["lambda"]
        rec["g_pull"] = "6.849e15 rad/s"
        rec["mass"] = "1e-15"
        p = build_params(rec)
        omega_n = TWO_PI * 6.3e6
        expected = 6.849e15 * math.sqrt(HBAR / (2 * omega_n * 1e-15))
        assert p.lambda_c == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("drop", ["omega_c", "omega_n", "kappa"])
    def test_missing_mandatory(self, drop):
        rec = self.record()
        del rec[drop]
        with pytest.raises(ParamError, match="missing mandatory"):
            build_params(rec)

    def test_missing_coupling(self):
        rec = self.record()
        del rec["lambda"]
        with pytest.raises(ParamError, match="coupling"):
            build_params(rec)

    def test_missing_damping(self):
        rec = self.record()
        del rec["q_n"]
        with pytest.raises(ParamError, match="damping"):
            build_params(rec)

    def test_unrelated_keys_ignored(self):
        p = build_params(self.record(pump_power="0.3 pW", note="x"))
        assert p.kappa == pytest.approx(TWO_PI * 600e3)

    def test_serialize_round_trip(self, params):
        assert build_params(serialize_params(params)) == params


class TestSystemParams:
    def test_rejects_nonpositive(self, params):
        with pytest.raises(ParamError):
            SystemParams(omega_c=params.omega_c, omega_n=params.omega_n,
                         kappa=0.0, gamma_n=params.gamma_n, lambda_c=250.0)

    def test_rejects_inconsistent_q(self, params):
        with pytest.raises(ParamError, match="disagree"):
            SystemParams(omega_c=params.omega_c, omega_n=params.omega_n,
                         kappa=params.kappa, gamma_n=40.0, lambda_c=250.0,
                         q_n=1e6)

    def test_alpha(self, params):
        assert params.alpha == pytest.approx(
            2 * params.lambda_c**2 / params.omega_n**2, rel=1e-15)

    def test_resolved_sideband(self, params):
        assert params.resolved_sideband
        bad_cavity = SystemParams(
            omega_c=params.omega_c, omega_n=params.kappa / 2,
            kappa=params.kappa, gamma_n=1.0, lambda_c=250.0)
        assert not bad_cavity.resolved_sideband


class TestDrive:
    def test_amplitude_definition(self, params):
        power = 0.9e-12
        omega = params.omega_c + params.omega_n
        amp = drive_amplitude(power, omega, params.kappa)
        assert amp**2 == pytest.approx(2 * power * params.kappa / (HBAR * omega),
                                       rel=1e-14)

    def test_amplitude_sqrt_power_scaling(self, params):
        a1 = drive_amplitude(1e-12, params.omega_c, params.kappa)
        a4 = drive_amplitude(4e-12, params.omega_c, params.kappa)
        assert a4 == pytest.approx(2 * a1, rel=1e-14)
        assert drive_amplitude(0.0, params.omega_c, params.kappa) == 0.0

    def test_amplitude_rejects_negative_power(self, params):
        with pytest.raises(ParamError):
            drive_amplitude(-1e-12, params.omega_c, params.kappa)

    def test_make_drive_exact_carriers(self, params):
        d = make_drive(params, 0.9e-12, 1e-18, -params.omega_n,
                       delta=params.omega_n)
        assert d.omega_p == params.omega_c + params.omega_n
        assert d.omega_s == d.omega_p + d.delta
        assert d.delta_s == pytest.approx(d.delta - d.delta_p)
        # blue pumping at 0.9 pW, amplitude frozen against an independent
        # evaluation of 2 P kappa / (hbar omega_p)
        assert d.e_p**2 == pytest.approx(1.364337e18, rel=1e-6)

    def test_pump_off_amplitude_zero(self, params):
        d = make_drive(params, 0.0, 1e-18, params.omega_n, delta=params.omega_n)
        assert d.e_p == 0.0
        assert d.e_s > 0.0

    def test_consistency_guard(self, params):
        with pytest.raises(ParamError, match="e_p"):
            DriveConfig(pump_power=0.0, signal_power=0.0, delta_p=0.0,
                        delta=1.0, e_p=5.0, e_s=0.0,
                        omega_p=params.omega_c, omega_s=params.omega_c)

    def test_with_delta_retunes_signal(self, params):
        d = make_drive(params, 0.3e-12, 1e-18, -params.omega_n,
                       delta=params.omega_n, pump_phase=0.7)
        d2 = with_delta(params, d, 2 * params.omega_n)
        assert d2.delta == 2 * params.omega_n
        assert d2.pump_phase == 0.7
        assert d2.e_p == d.e_p
        # e_s tracks the retuned carrier
        assert d2.e_s == pytest.approx(
            drive_amplitude(d.signal_power, d2.omega_s, params.kappa), rel=1e-14)

    def test_unphysical_carrier_rejected(self, params):
        with pytest.raises(ParamError, match="carrier"):
            make_drive(params, 1e-12, 0.0, 2 * params.omega_c, delta=0.0)


class TestCooperativity:
    def test_linear_in_photon_number(self, params):
        assert cooperativity(params, 0.0) == 0.0
        c1 = cooperativity(params, 100.0)
        assert cooperativity(params, 200.0) == pytest.approx(2 * c1, rel=1e-14)

    def test_unity_photon_number(self, params):
        n_star = params.gamma_n * params.kappa / (4 * params.lambda_c**2)
        assert cooperativity(params, n_star) == pytest.approx(1.0, rel=1e-14)

    def test_rejects_negative(self, params):
        with pytest.raises(ParamError):
            cooperativity(params, -1.0)
