import math

import pytest

import cavemech as cm
from cavemech.params import HBAR, SystemParams, make_drive
from cavemech.steady import (BRANCH_LOWER, BRANCH_MIDDLE, BRANCH_ONLY,
                             BRANCH_UPPER, RESIDUAL_BOUND, NoSuchBranchError,
                             default_branch, photon_number_roots, residual,
                             shifted_detuning, steady_state)


def assert_residual_ok(params, drive, n_p):
    bound = RESIDUAL_BOUND * max(drive.e_p**2, params.kappa**2 * n_p)
    assert abs(residual(params, drive, n_p)) <= bound


@pytest.fixture(scope="module")
def bistable():
    """Large coupling plus red-side detuning pushes the cubic into its
    three-root region; e_for() dials the nondimensional drive strength."""
    base = cm.default_params()
    p = SystemParams(omega_c=base.omega_c, omega_n=base.omega_n,
                     kappa=base.kappa, gamma_n=base.gamma_n, lambda_c=250e3)
    dp = 3.0 * p.kappa

    def drive_for(e_cubic):
        e2 = e_cubic * p.kappa**3 / (p.omega_n * p.alpha)
        power = e2 * HBAR * (p.omega_c - dp) / (2 * p.kappa)
        return make_drive(p, power, 0.0, dp, delta=dp)

    return p, drive_for


class TestPhotonNumberRoots:
    def test_pump_off(self, params):
        d = make_drive(params, 0.0, 0.0, -params.omega_n, delta=params.omega_n)
        assert photon_number_roots(params, d) == [0.0]

    @pytest.mark.parametrize("power,expected", [
        (0.3e-12, 287.6326),
        (0.5e-12, 479.3877),
        (0.9e-12, 862.8978),
    ])
    def test_blue_single_root_values(self, params, power, expected):
        d = make_drive(params, power, 0.0, -params.omega_n, delta=params.omega_n)
        roots = photon_number_roots(params, d)
        assert len(roots) == 1
        assert roots[0] == pytest.approx(expected, rel=1e-6)

    def test_strong_red_pump_value(self, params):
        d = make_drive(params, 10e-9, 0.0, params.omega_n, delta=params.omega_n)
        (n_p,) = photon_number_roots(params, d)
        assert n_p == pytest.approx(9.6185e6, rel=1e-4)

    def test_residuals_across_regimes(self, params):
        for power in (1e-15, 0.3e-12, 0.9e-12, 1e-10, 10e-9):
            for dp in (-params.omega_n, 0.0, params.omega_n):
                d = make_drive(params, power, 0.0, dp, delta=params.omega_n)
                for n in photon_number_roots(params, d):
                    assert_residual_ok(params, d, n)

    def test_roots_ascending_and_positive(self, bistable):
        p, drive_for = bistable
        roots = photon_number_roots(p, drive_for(4.0))
        assert len(roots) == 3
        assert roots == sorted(roots)
        assert all(n > 0 for n in roots)
        for n in roots:
            assert_residual_ok(p, drive_for(4.0), n)

    def test_single_root_outside_fold_region(self, bistable):
        p, drive_for = bistable
        assert len(photon_number_roots(p, drive_for(2.0))) == 1
        assert len(photon_number_roots(p, drive_for(6.0))) == 1

    def test_monotone_in_power_on_blue_side(self, params):
        powers = [k * 0.1e-12 for k in range(1, 11)]
        last = 0.0
        for power in powers:
            d = make_drive(params, power, 0.0, -params.omega_n,
                           delta=params.omega_n)
            (n_p,) = photon_number_roots(params, d)
            assert n_p > last
            last = n_p

    def test_phase_does_not_move_roots(self, params):
        d0 = make_drive(params, 0.5e-12, 0.0, -params.omega_n,
                        delta=params.omega_n)
        d1 = make_drive(params, 0.5e-12, 0.0, -params.omega_n,
                        delta=params.omega_n, pump_phase=2.3)
        assert photon_number_roots(params, d0) == photon_number_roots(params, d1)


class TestSteadyState:
    def test_pump_off_state(self, params):
        d = make_drive(params, 0.0, 0.0, -params.omega_n, delta=params.omega_n)
        ss = steady_state(params, d)
        assert ss.branch == BRANCH_ONLY
        assert ss.n_p == 0.0 and ss.a_s == 0.0 and ss.q_s == 0.0
        assert ss.dynamically_stable

    def test_derived_amplitudes(self, params):
        d = make_drive(params, 0.3e-12, 0.0, -params.omega_n,
                       delta=params.omega_n)
        ss = steady_state(params, d)
        assert ss.a_s == pytest.approx(math.sqrt(ss.n_p), rel=1e-14)
        assert ss.q_s == pytest.approx(
            2 * params.lambda_c * ss.n_p / params.omega_n, rel=1e-14)
        assert shifted_detuning(params, ss) == pytest.approx(
            d.delta_p - params.lambda_c * ss.q_s, rel=1e-14)

    def test_strong_red_static_shift(self, params):
        d = make_drive(params, 10e-9, 0.0, params.omega_n, delta=params.omega_n)
        ss = steady_state(params, d)
        assert ss.q_s == pytest.approx(121.4946, rel=1e-6)

    def test_branch_labels_and_selection(self, bistable):
        p, drive_for = bistable
        d = drive_for(4.0)
        states = steady_state(p, d, selection="all")
        assert [s.branch for s in states] == [BRANCH_LOWER, BRANCH_MIDDLE,
                                              BRANCH_UPPER]
        assert steady_state(p, d, selection="lowest").n_p == states[0].n_p
        assert steady_state(p, d, selection="highest").n_p == states[2].n_p
        assert steady_state(p, d, selection="middle").n_p == states[1].n_p

    def test_middle_branch_statically_unstable(self, bistable):
        p, drive_for = bistable
        states = steady_state(p, drive_for(4.0), selection="all")
        assert states[0].dynamically_stable
        assert not states[1].dynamically_stable

    def test_middle_raises_when_absent(self, bistable):
        p, drive_for = bistable
        with pytest.raises(NoSuchBranchError):
            steady_state(p, drive_for(2.0), selection="middle")

    def test_unknown_selection(self, params):
        d = make_drive(params, 0.0, 0.0, 0.0, delta=params.omega_n)
        with pytest.raises(ValueError, match="selection"):
            steady_state(params, d, selection="best")

    def test_default_branch_prefers_stable(self, bistable):
        p, drive_for = bistable
        d = drive_for(4.0)
        chosen = default_branch(p, d)
        assert chosen.dynamically_stable
        assert chosen.branch == BRANCH_LOWER

    def test_fold_pair_flagged_degenerate(self, bistable):
        # bisect the upper fold: root count drops 3 -> 1 through a window
        # where the merging pair collapses to a flagged double root
        p, drive_for = bistable
        lo, hi = 4.0, 6.0
        fold_drive = None
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            k = len(photon_number_roots(p, drive_for(mid)))
            if k == 2:
                fold_drive = drive_for(mid)
                break
            if k == 3:
                lo = mid
            else:
                hi = mid
        assert fold_drive is not None, "no degenerate window found at the fold"
        states = steady_state(p, fold_drive, selection="all")
        assert [s.branch for s in states] == [BRANCH_LOWER, BRANCH_UPPER]
        assert all(s.degenerate for s in states)
