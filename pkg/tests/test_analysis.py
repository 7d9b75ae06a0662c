"""Closed-form bound and profile-fit tests.

Several bracket endpoints collapse to exact pi expressions at alpha = 1/2
because Gamma(3/2) = sqrt(pi)/2; those identities are asserted to 1e-12.
Other frozen decimals were generated once at high precision and pinned.
"""

import math

import numpy as np
import pytest

from fraclogistic.analysis import (
    BoundBracket,
    CheckResult,
    EnvelopeConstants,
    FitError,
    VerificationReport,
    blowup_bracket,
    comparison_brackets,
    decay_envelope,
    describe_blowup,
    envelope_root,
    existence_horizon,
    fit_blowup_profile,
    profile_coefficient,
    verify_run,
)
from fraclogistic.solver import (
    Nonlinearity,
    ProblemSpec,
    Trajectory,
    TrajectoryStatus,
    solve,
)

# Frozen high-precision values (60-digit arithmetic, rounded to double).
BRACKET_HALF_2_LOWER = 0.02181661564992912
BRACKET_HALF_5_LOWER = 0.0024240684055476798
BRACKET_03_2_LOWER = 0.0017764926809241517
ENVELOPE_HALF_AT_1 = 1.1472878598687424
PROFILE_COEFF = {
    0.3: 0.4977963921079173,
    0.5: 0.5641895835477563,  # exactly 1/sqrt(pi)
    0.7: 0.6835331246576228,
    0.9: 0.8715691138868996,
}


class TestBoundBracket:
    def test_contains(self):
        br = BoundBracket(1.0, 2.0)
        assert 1.0 in br and 1.5 in br and 2.0 in br
        assert 0.99 not in br and 2.01 not in br

    @pytest.mark.parametrize("lo,hi", [(0.0, 1.0), (-1.0, 1.0), (2.0, 1.0)])
    def test_validation(self, lo, hi):
        with pytest.raises(ValueError):
            BoundBracket(lo, hi)

    def test_degenerate_allowed(self):
        assert 1.0 in BoundBracket(1.0, 1.0)


class TestBlowupBracket:
    def test_alpha_half_u0_2(self):
        br = blowup_bracket(0.5, 2.0)
        assert br.lower == pytest.approx(BRACKET_HALF_2_LOWER, rel=1e-12)
        # Gamma(3/2)^2 = pi/4 exactly.
        assert br.upper == pytest.approx(math.pi / 4.0, abs=1e-12)

    def test_alpha_half_u0_15(self):
        assert blowup_bracket(0.5, 1.5).upper == pytest.approx(math.pi, abs=1e-12)

    def test_alpha_half_u0_5(self):
        br = blowup_bracket(0.5, 5.0)
        assert br.lower == pytest.approx(BRACKET_HALF_5_LOWER, rel=1e-12)
        assert br.upper == pytest.approx(math.pi / 64.0, abs=1e-12)

    def test_alpha_03(self):
        assert blowup_bracket(0.3, 2.0).lower == pytest.approx(
            BRACKET_03_2_LOWER, rel=1e-12
        )

    @pytest.mark.parametrize("u0", [2.0, 3.0, 5.0, 10.0])
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
    def test_lower_below_upper(self, alpha, u0):
        br = blowup_bracket(alpha, u0)
        assert 0.0 < br.lower < br.upper

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
    def test_monotone_in_u0(self, alpha):
        # Larger starts blow up sooner: both endpoints shrink.
        brackets = [blowup_bracket(alpha, u0) for u0 in (1.5, 2.0, 3.0, 5.0)]
        lowers = [b.lower for b in brackets]
        uppers = [b.upper for b in brackets]
        assert lowers == sorted(lowers, reverse=True)
        assert uppers == sorted(uppers, reverse=True)

    @pytest.mark.parametrize("u0", [1.0, 0.5, -2.0])
    def test_requires_u0_above_one(self, u0):
        with pytest.raises(ValueError):
            blowup_bracket(0.5, u0)

    def test_alpha_domain(self):
        with pytest.raises(ValueError):
            blowup_bracket(1.0, 2.0)


class TestComparisonBrackets:
    def test_alpha_half_w0_1(self):
        lower_br, upper_br = comparison_brackets(0.5, 1.0)
        assert lower_br.lower == pytest.approx(math.pi / 64.0, abs=1e-12)
        assert lower_br.upper == pytest.approx(math.pi / 4.0, abs=1e-12)
        assert upper_br.lower == pytest.approx(BRACKET_HALF_2_LOWER, rel=1e-12)
        assert upper_br.upper == pytest.approx(math.pi / 9.0, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
    @pytest.mark.parametrize("u0", [1.5, 2.0, 5.0])
    def test_mixed_identity(self, alpha, u0):
        # The full bracket splices the two comparison brackets: its lower
        # endpoint comes from the upper comparison, its upper endpoint from
        # the lower comparison.  Exact by construction.
        full = blowup_bracket(alpha, u0)
        lower_br, upper_br = comparison_brackets(alpha, u0 - 1.0)
        assert full.lower == upper_br.lower
        assert full.upper == lower_br.upper

    def test_upper_problem_blows_up_first(self):
        lower_br, upper_br = comparison_brackets(0.5, 1.0)
        assert upper_br.lower < lower_br.lower
        assert upper_br.upper < lower_br.upper

    def test_requires_positive_w0(self):
        with pytest.raises(ValueError):
            comparison_brackets(0.5, 0.0)


class TestEnvelope:
    def test_constants_default_pair(self):
        consts = EnvelopeConstants.defaults(0.5)
        assert consts.c == 1.0
        assert consts.c1 == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-14)

    def test_constants_validation(self):
        with pytest.raises(ValueError):
            EnvelopeConstants(0.0, 1.0)
        with pytest.raises(ValueError):
            EnvelopeConstants(1.0, -1.0)

    def test_root_is_pi(self):
        # (alpha Gamma(alpha) / u0)^(1/alpha) = (sqrt(pi)/2 / 0.5)^2 = pi.
        assert envelope_root(0.5, 0.5) == pytest.approx(math.pi, abs=1e-12)

    def test_value_at_zero(self):
        assert decay_envelope(0.5, 0.5, 0.0) == pytest.approx(0.5, abs=1e-15)
        assert decay_envelope(0.5, 0.25, 0.0) == pytest.approx(0.25, abs=1e-15)

    def test_value_at_one_frozen(self):
        assert decay_envelope(0.5, 0.5, 1.0) == pytest.approx(
            ENVELOPE_HALF_AT_1, rel=1e-12
        )

    def test_array_matches_scalar(self):
        t = np.array([0.0, 0.5, 1.0, 2.0])
        arr = decay_envelope(0.5, 0.5, t)
        assert isinstance(arr, np.ndarray)
        for i, ti in enumerate(t):
            assert arr[i] == decay_envelope(0.5, 0.5, float(ti))
        assert isinstance(decay_envelope(0.5, 0.5, 1.0), float)

    def test_increasing_toward_root(self):
        t = np.linspace(0.0, 3.0, 50)
        env = decay_envelope(0.5, 0.5, t)
        assert np.all(np.diff(env) > 0.0)

    def test_rejects_beyond_root(self):
        with pytest.raises(ValueError):
            decay_envelope(0.5, 0.5, 3.2)  # root is pi ~ 3.1416

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            decay_envelope(0.5, 0.5, -0.1)

    @pytest.mark.parametrize("u0", [0.0, 1.0, 2.0])
    def test_rejects_u0_outside_unit_interval(self, u0):
        with pytest.raises(ValueError):
            decay_envelope(0.5, u0, 0.5)
        with pytest.raises(ValueError):
            envelope_root(0.5, u0)


class TestExistenceHorizon:
    def test_endpoint_maximum(self):
        # |u(1-u)| on [1, 3] peaks at u=3 with M=6; horizon equals the
        # alpha=1/2 bracket lower endpoint for u0=2 since 4(u0-1/2)=6.
        assert existence_horizon(0.5, 2.0, 1.0, 10.0) == pytest.approx(
            BRACKET_HALF_2_LOWER, rel=1e-12
        )

    def test_vertex_maximum(self):
        # On [0, 1] the quadratic peaks at the vertex, M=1/4; the horizon
        # collapses to (b Gamma(3/2) / (1/4))^2 = pi for b=1/2.
        assert existence_horizon(0.5, 0.5, 0.5, 10.0) == pytest.approx(
            math.pi, abs=1e-12
        )

    def test_cap_by_requested_time(self):
        assert existence_horizon(0.5, 0.5, 0.5, 1e-6) == 1e-6

    def test_validation(self):
        with pytest.raises(ValueError):
            existence_horizon(0.5, 0.5, 0.0, 1.0)
        with pytest.raises(ValueError):
            existence_horizon(0.5, 0.5, 1.0, 0.0)
        with pytest.raises(ValueError):
            existence_horizon(1.2, 0.5, 1.0, 1.0)

    @pytest.mark.parametrize("u0", [0.5, 2.0, 5.0])
    def test_solver_never_blows_up_inside_horizon(self, u0):
        # The guaranteed-existence window must be blow-up free in practice.
        horizon = existence_horizon(0.5, u0, 1.0, 10.0)
        step = max(horizon / 2000.0, 1e-6)
        traj = solve(ProblemSpec(0.5, u0, step=step, t_max=horizon))
        assert traj.status is TrajectoryStatus.COMPLETED


class TestProfileCoefficient:
    @pytest.mark.parametrize("alpha,expected", sorted(PROFILE_COEFF.items()))
    def test_frozen_values(self, alpha, expected):
        assert profile_coefficient(alpha) == pytest.approx(expected, rel=1e-13)

    def test_exact_identities(self):
        assert profile_coefficient(0.5) == pytest.approx(
            1.0 / math.sqrt(math.pi), rel=1e-14
        )
        assert profile_coefficient(1.0) == pytest.approx(1.0, abs=1e-14)

    def test_domain(self):
        with pytest.raises(ValueError):
            profile_coefficient(0.0)
        with pytest.raises(ValueError):
            profile_coefficient(1.1)


def _power_law_trajectory(alpha=0.5, big_t=1.0, shift=0.0, n=1206):
    """Exact profile samples shift + A (T - t)^(-alpha) marked as a blow-up."""
    amp = profile_coefficient(alpha)
    t = np.linspace(0.0, big_t - 1e-11, n)
    v = shift + amp * (big_t - t) ** (-alpha)
    v[-1] = 1e12  # stand-in for the confirmed threshold crossing
    return Trajectory(t, v, TrajectoryStatus.BLEW_UP, n - 1), amp


class TestProfileFit:
    def test_recovers_exact_power_law(self):
        traj, amp = _power_law_trajectory()
        big_t, coeff = fit_blowup_profile(traj, 0.5)
        assert abs(big_t - 1.0) <= 1e-8
        assert abs(coeff - amp) / amp <= 1e-7

    def test_recovers_with_shift(self):
        traj, amp = _power_law_trajectory(shift=1.0)
        big_t, coeff = fit_blowup_profile(traj, 0.5, shift=1.0)
        assert abs(big_t - 1.0) <= 1e-8
        assert abs(coeff - amp) / amp <= 1e-7

    def test_explicit_window(self):
        traj, amp = _power_law_trajectory()
        big_t, coeff = fit_blowup_profile(traj, 0.5, window=(5, 50))
        assert abs(big_t - 1.0) <= 1e-7
        assert abs(coeff - amp) / amp <= 1e-6

    @pytest.mark.parametrize("window", [(1, 5), (10, 10), (10, 5)])
    def test_window_validation(self, window):
        traj, _ = _power_law_trajectory()
        with pytest.raises(ValueError):
            fit_blowup_profile(traj, 0.5, window=window)

    def test_shift_validation(self):
        traj, _ = _power_law_trajectory()
        with pytest.raises(ValueError):
            fit_blowup_profile(traj, 0.5, shift=0.3)

    def test_min_points_validation(self):
        traj, _ = _power_law_trajectory()
        with pytest.raises(ValueError):
            fit_blowup_profile(traj, 0.5, min_points=2)

    def test_requires_blowup_status(self):
        traj = solve(ProblemSpec(0.5, 0.5, step=0.01, t_max=1.0))
        with pytest.raises(FitError):
            fit_blowup_profile(traj, 0.5)

    def test_short_tail_rejected(self):
        t = 0.1 * np.arange(5)
        v = np.array([1.0, 2.0, 4.0, 8.0, 1e12])
        traj = Trajectory(t, v, TrajectoryStatus.BLEW_UP, 4)
        with pytest.raises(FitError):
            fit_blowup_profile(traj, 0.5)

    def test_values_below_shift_unusable(self):
        traj, _ = _power_law_trajectory()  # tail values lie below ~18
        with pytest.raises(FitError):
            fit_blowup_profile(traj, 0.5, shift=1.0, window=(900, 1100))

    def test_noisy_tail_rejected(self):
        traj, _ = _power_law_trajectory()
        rng = np.random.default_rng(20240811)
        noisy = traj.values * np.exp(rng.normal(0.0, 1.5, len(traj)))
        noisy[-1] = 1e12
        bad = Trajectory(traj.times, noisy, TrajectoryStatus.BLEW_UP, len(traj) - 1)
        with pytest.raises(FitError):
            fit_blowup_profile(bad, 0.5)


class TestDescribeBlowup:
    def test_completed_run_gives_none(self):
        spec = ProblemSpec(0.5, 0.5, step=1e-3, t_max=2.0)
        assert describe_blowup(spec, solve(spec)) is None

    def test_populated_report(self):
        spec = ProblemSpec(0.5, 2.0, step=1e-3, t_max=2.0)
        report = describe_blowup(spec, solve(spec))
        assert report is not None
        assert report.t_detected in report.bracket
        assert report.bracket.lower == blowup_bracket(0.5, 2.0).lower
        assert report.coeff_est > 0.0
        # The fitted divergence time is clamped to one step of the crossing.
        assert abs(report.refined_T - report.t_detected) <= spec.step + 1e-12

    def test_bracket_choice_follows_nonlinearity(self):
        lower_br, upper_br = comparison_brackets(0.5, 1.0)
        spec_sq = ProblemSpec(0.5, 1.0, nonlinearity=Nonlinearity.SQUARE,
                              step=1e-3, t_max=2.0)
        rep_sq = describe_blowup(spec_sq, solve(spec_sq))
        assert (rep_sq.bracket.lower, rep_sq.bracket.upper) == (
            lower_br.lower, lower_br.upper)
        spec_sh = ProblemSpec(0.5, 1.0, nonlinearity=Nonlinearity.SHIFTED_SQUARE,
                              step=1e-3, t_max=2.0)
        rep_sh = describe_blowup(spec_sh, solve(spec_sh))
        assert (rep_sh.bracket.lower, rep_sh.bracket.upper) == (
            upper_br.lower, upper_br.upper)
        spec_sl = ProblemSpec(0.5, 1.0, nonlinearity=Nonlinearity.SHIFTED_LOGISTIC,
                              step=1e-3, t_max=2.0)
        rep_sl = describe_blowup(spec_sl, solve(spec_sl))
        full = blowup_bracket(0.5, 2.0)
        assert (rep_sl.bracket.lower, rep_sl.bracket.upper) == (full.lower, full.upper)


class TestVerifyRun:
    def test_decay_case_all_pass(self):
        spec = ProblemSpec(0.5, 0.5, step=1e-3, t_max=5.0)
        report = verify_run(spec, solve(spec))
        assert [c.name for c in report.checks] == [
            "positivity", "completed", "bounded_by_one", "decay_envelope",
        ]
        assert report.passed

    def test_blowup_case_all_pass(self):
        spec = ProblemSpec(0.5, 2.0, step=1e-4, t_max=2.0)
        report = verify_run(spec, solve(spec))
        assert [c.name for c in report.checks] == [
            "positivity", "bracket", "sandwich", "profile_coefficient",
        ]
        assert report.passed

    def test_equilibrium_gets_positivity_only(self):
        spec = ProblemSpec(0.5, 1.0, step=1e-3, t_max=2.0)
        report = verify_run(spec, solve(spec))
        assert [c.name for c in report.checks] == ["positivity"]
        assert report.passed

    def test_comparison_run_gets_positivity_only(self):
        spec = ProblemSpec(0.5, 1.0, nonlinearity=Nonlinearity.SQUARE,
                           step=1e-3, t_max=1.0)
        report = verify_run(spec, solve(spec))
        assert [c.name for c in report.checks] == ["positivity"]

    def test_lookup_and_text(self):
        spec = ProblemSpec(0.5, 0.5, step=1e-2, t_max=1.0)
        report = verify_run(spec, solve(spec))
        assert report["positivity"].passed
        with pytest.raises(KeyError):
            report["no_such_check"]
        text = report.to_text()
        assert text.endswith("\n")
        assert len(text.splitlines()) == len(report.checks)
        for line in text.splitlines():
            assert " pass " in line or " fail " in line

    def test_check_line_format(self):
        check = CheckResult("name", False, "m=1", "b<2")
        assert check.to_line() == "name fail measured=m=1 bound=b<2"
        assert CheckResult("x", True, "m", "b").to_line() == "x pass measured=m bound=b"

    def test_report_passed_requires_all(self):
        good = CheckResult("a", True, "m", "b")
        bad = CheckResult("b", False, "m", "b")
        assert VerificationReport((good,)).passed
        assert not VerificationReport((good, bad)).passed
