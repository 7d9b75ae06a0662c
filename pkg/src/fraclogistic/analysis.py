"""Closed-form bounds for the fractional logistic problem and trajectory checks.

Every analytic bound the library knows about lives here, in evaluable form:

* the local existence horizon ``min(T, (b Gamma(a+1)/M)^(1/a))`` with the
  quadratic's max ``M`` computed in closed form;
* the decay envelope ``1/(1/(c u0) - (c1/a) t^a)`` that dominates global
  (u0 < 1) solutions while its denominator stays positive;
* the blow-up bracket ``(Gamma(a+1)/(4(u0-1/2)))^(1/a) <= T* <=
  (Gamma(a+1)/(u0-1))^(1/a)`` for u0 > 1, together with the underlying
  comparison-problem brackets in the shifted variable w0;
* the blow-up profile amplitude ``Gamma(2a)/Gamma(a)`` and a least-squares
  fit that recovers it from a computed trajectory tail.

:func:`verify_run` bundles the relevant checks for one solved trajectory into
a flat pass/fail report: positivity always; boundedness by 1 plus the decay
envelope in the global case; bracket containment, the bilateral sandwich
against freshly solved comparison runs, and the profile-fit coefficient in
the blow-up case.  The envelope is only asserted where its denominator is
positive: beyond the root T0 the printed right-hand side turns negative and
cannot bound a positive solution, so that region is excluded by construction.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .solver import (
    BlowUpReport,
    Nonlinearity,
    ProblemSpec,
    Trajectory,
    TrajectoryStatus,
    detect_blowup,
    solve,
)
from .special import gamma

__all__ = [
    "FitError",
    "BoundBracket",
    "EnvelopeConstants",
    "blowup_bracket",
    "comparison_brackets",
    "decay_envelope",
    "envelope_root",
    "existence_horizon",
    "profile_coefficient",
    "fit_blowup_profile",
    "describe_blowup",
    "CheckResult",
    "VerificationReport",
    "verify_run",
]


class FitError(RuntimeError):
    """A blow-up profile fit could not be trusted (short or non-power tail)."""


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie strictly inside (0, 1), got %r" % (alpha,))


@dataclasses.dataclass(frozen=True)
class BoundBracket:
    """A two-sided bound on a blow-up time, ``0 < lower <= upper``."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (0.0 < self.lower <= self.upper):
            raise ValueError(
                "bracket needs 0 < lower <= upper, got (%r, %r)" % (self.lower, self.upper)
            )

    def __contains__(self, t: float) -> bool:
        return self.lower <= t <= self.upper


@dataclasses.dataclass(frozen=True)
class EnvelopeConstants:
    """Admissible constant pair (c, c1) for the decay envelope."""

    c: float
    c1: float

    def __post_init__(self) -> None:
        if not (self.c > 0.0 and self.c1 > 0.0):
            raise ValueError("envelope constants must be positive")

    @classmethod
    def defaults(cls, alpha: float) -> "EnvelopeConstants":
        """The concrete admissible pair c=1, c1=1/Gamma(alpha)."""
        _check_alpha(alpha)
        return cls(1.0, 1.0 / gamma(alpha))


def blowup_bracket(alpha: float, u0: float) -> BoundBracket:
    """Two-sided bound on the blow-up time of the logistic problem, u0 > 1.

    lower = (Gamma(a+1) / (4 (u0 - 1/2)))^(1/a),
    upper = (Gamma(a+1) / (u0 - 1))^(1/a).
    """
    _check_alpha(alpha)
    if not u0 > 1.0:
        raise ValueError("the blow-up bracket requires u0 > 1, got %r" % (u0,))
    g = gamma(alpha + 1.0)
    lower = (g / (4.0 * (u0 - 0.5))) ** (1.0 / alpha)
    upper = (g / (u0 - 1.0)) ** (1.0 / alpha)
    return BoundBracket(lower, upper)


def comparison_brackets(alpha: float, w0: float) -> Tuple[BoundBracket, BoundBracket]:
    """Blow-up time brackets of the two comparison problems started at w0 > 0.

    The first bracket bounds the blow-up time of w' = w^2 (lower comparison),
    using w0 in both endpoints; the second bounds w' = (w + 1/2)^2 (upper
    comparison), using w0 + 1/2.  With w0 = u0 - 1 the full-problem bracket
    of :func:`blowup_bracket` combines the two: its lower endpoint is the
    upper comparison's lower endpoint and its upper endpoint is the lower
    comparison's upper endpoint.
    """
    _check_alpha(alpha)
    if not w0 > 0.0:
        raise ValueError("comparison brackets require w0 > 0, got %r" % (w0,))
    g = gamma(alpha + 1.0)

    def _bracket(x: float) -> BoundBracket:
        return BoundBracket((g / (4.0 * x)) ** (1.0 / alpha), (g / x) ** (1.0 / alpha))

    return _bracket(w0), _bracket(w0 + 0.5)


def envelope_root(alpha: float, u0: float, consts: Optional[EnvelopeConstants] = None) -> float:
    """Root T0 = (a / (c1 c u0))^(1/a) of the decay-envelope denominator.

    The envelope is valid (positive and finite) strictly before T0.
    """
    _check_alpha(alpha)
    if not (0.0 < u0 < 1.0):
        raise ValueError("the decay envelope applies to u0 in (0, 1), got %r" % (u0,))
    if consts is None:
        consts = EnvelopeConstants.defaults(alpha)
    return (alpha / (consts.c1 * consts.c * u0)) ** (1.0 / alpha)


def decay_envelope(alpha, u0, t, consts: Optional[EnvelopeConstants] = None):
    """Pointwise upper bound 1 / (1/(c u0) - (c1/a) t^a) for global solutions.

    Accepts a scalar or array ``t``; every requested time must satisfy
    ``t >= 0`` and keep the denominator positive (t < T0), otherwise a
    ``ValueError`` is raised — the printed bound is vacuous beyond the root.
    """
    _check_alpha(alpha)
    if not (0.0 < u0 < 1.0):
        raise ValueError("the decay envelope applies to u0 in (0, 1), got %r" % (u0,))
    if consts is None:
        consts = EnvelopeConstants.defaults(alpha)
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0.0):
        raise ValueError("the envelope is defined for t >= 0")
    denom = 1.0 / (consts.c * u0) - (consts.c1 / alpha) * np.power(tt, alpha)
    if np.any(denom <= 0.0):
        raise ValueError(
            "envelope denominator not positive; it is valid only before its root "
            "T0=%.6g" % envelope_root(alpha, u0, consts)
        )
    out = 1.0 / denom
    if tt.ndim == 0:
        return float(out)
    return out


def existence_horizon(alpha: float, u0: float, b: float, T: float) -> float:
    """Guaranteed local existence time min(T, (b Gamma(a+1) / M)^(1/a)).

    M is the maximum of |u (1 - u)| over the closed interval |u - u0| <= b,
    evaluated in closed form: the quadratic's absolute value peaks at an
    interval endpoint or at the vertex u = 1/2 when the vertex lies inside.
    """
    _check_alpha(alpha)
    if not (b > 0.0 and T > 0.0):
        raise ValueError("existence horizon requires b > 0 and T > 0")
    lo, hi = u0 - b, u0 + b
    candidates = [abs(lo * (1.0 - lo)), abs(hi * (1.0 - hi))]
    if lo <= 0.5 <= hi:
        candidates.append(0.25)
    m = max(candidates)
    return min(T, (b * gamma(alpha + 1.0) / m) ** (1.0 / alpha))


def profile_coefficient(alpha: float) -> float:
    """Amplitude Gamma(2 a) / Gamma(a) of the blow-up profile (T - t)^(-a).

    ``alpha = 1`` is accepted for limit checks (the value is exactly 1).
    """
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must lie in (0, 1], got %r" % (alpha,))
    return gamma(2.0 * alpha) / gamma(alpha)


def fit_blowup_profile(
    traj: Trajectory,
    alpha: float,
    shift: float = 0.0,
    window: Optional[Tuple[int, int]] = None,
    min_points: int = 5,
    residual_cap: float = 0.5,
) -> Tuple[float, float]:
    """Least-squares fit of a trajectory tail to ``shift + A (T - t)^(-a)``.

    ``shift`` subtracts the profile offset before taking logs: 1 for
    u-trajectories (via w = u - 1), 1/2 additionally for the upper
    comparison variable, 0 for the pure-power problems.

    The tail consists of the nodes ``window = (d1, d2)`` steps *before* the
    confirmed crossing node.  The default window adapts to the run length:
    it reaches back 200..1000 steps when the run affords it.  Two competing
    errors pin that range.  The handful of nodes adjacent to the crossing
    are a discrete squaring cascade — consecutive values there correspond to
    profile times far below one step, so they carry no information about
    the continuous profile and must be skipped.  Nodes too far back leave
    the asymptotic regime, where the power law itself degrades.

    T is optimized by least squares (the amplitude has a closed-form
    optimum for each trial T), constrained to within one recorded step of
    the crossing time: the crossing value exceeds the blow-up threshold, so
    the true divergence point cannot lie further away, and the constraint
    stops the optimizer from trading a spurious shift of T against the
    amplitude when the tail carries systematic discretization error.
    Returns ``(T_est, coeff_est)``.

    Raises :class:`FitError` when the trajectory did not blow up, fewer
    than ``min_points`` usable tail values exceed ``shift``, or the
    root-mean-square log-residual exceeds ``residual_cap`` (the tail is not
    power-law shaped).
    """
    _check_alpha(alpha)
    if shift not in (0.0, 0.5, 1.0):
        raise ValueError("shift must be one of 0, 1/2, 1, got %r" % (shift,))
    if min_points < 3:
        raise ValueError("min_points must be at least 3")
    if traj.status is not TrajectoryStatus.BLEW_UP:
        raise FitError("profile fitting requires a trajectory with blow-up status")
    k = traj.status_index
    if window is None:
        d1 = max(5, min(200, -(-7 * k // 100)))
        d2 = max(d1 + 15, min(1000, -(-k // 3)))
    else:
        d1, d2 = int(window[0]), int(window[1])
        if not 2 <= d1 < d2:
            raise ValueError("window must satisfy 2 <= d1 < d2, got %r" % (window,))
    hi_idx = k - d1
    lo_idx = max(0, k - d2)
    if hi_idx < lo_idx:
        raise FitError(
            "trajectory too short for a profile tail (%d nodes before crossing, "
            "window starts %d back)" % (k, d1)
        )
    idx = np.arange(lo_idx, hi_idx + 1)
    keep = traj.values[idx] > shift
    idx = idx[keep]
    if idx.size < min_points:
        raise FitError(
            "profile tail has %d usable points; at least %d are needed"
            % (idx.size, min_points)
        )
    tt = traj.times[idx]
    y = np.log(traj.values[idx] - shift)
    t_cross = float(traj.times[k])
    h_last = float(traj.times[k] - traj.times[k - 1])

    def _ssr(big_t: float) -> float:
        scaled = y + alpha * np.log(big_t - tt)
        return float(np.sum((scaled - scaled.mean()) ** 2))

    res = minimize_scalar(
        _ssr,
        bounds=(t_cross - h_last, t_cross + h_last),
        method="bounded",
        options={"xatol": 1e-14 * max(1.0, t_cross)},
    )
    big_t = float(res.x)
    scaled = y + alpha * np.log(big_t - tt)
    log_amp = float(scaled.mean())
    rms = math.sqrt(float(np.sum((scaled - log_amp) ** 2)) / idx.size)
    if rms > residual_cap:
        raise FitError(
            "profile fit rms log-residual %.3g exceeds cap %.3g" % (rms, residual_cap)
        )
    return big_t, math.exp(log_amp)


_PROFILE_SHIFT = {
    Nonlinearity.LOGISTIC: 1.0,
    Nonlinearity.SHIFTED_LOGISTIC: 0.0,
    Nonlinearity.SQUARE: 0.0,
    Nonlinearity.SHIFTED_SQUARE: 0.5,
}


def _bracket_for(spec: ProblemSpec) -> Optional[BoundBracket]:
    """Closed-form blow-up bracket matching a problem spec, when one exists."""
    if spec.nonlinearity is Nonlinearity.LOGISTIC:
        return blowup_bracket(spec.alpha, spec.u0) if spec.u0 > 1.0 else None
    if spec.nonlinearity is Nonlinearity.SHIFTED_LOGISTIC:
        return blowup_bracket(spec.alpha, spec.u0 + 1.0)
    lower_br, upper_br = comparison_brackets(spec.alpha, spec.u0)
    if spec.nonlinearity is Nonlinearity.SQUARE:
        return lower_br
    return upper_br


def describe_blowup(
    spec: ProblemSpec,
    traj: Trajectory,
    window: Optional[Tuple[int, int]] = None,
) -> Optional[BlowUpReport]:
    """Full blow-up report for a solved run: detection, bracket, profile fit.

    Returns ``None`` when the trajectory never crossed the threshold.  The
    profile fields stay ``None`` if the tail is too short or not power-law
    shaped; the bracket field stays ``None`` when no closed-form bracket
    applies (logistic starts below 1).
    """
    report = detect_blowup(traj, spec.blowup_threshold)
    if report is None:
        return None
    report.bracket = _bracket_for(spec)
    try:
        refined_t, coeff = fit_blowup_profile(
            traj, spec.alpha, _PROFILE_SHIFT[spec.nonlinearity], window=window
        )
        report.refined_T = refined_t
        report.coeff_est = coeff
    except FitError:
        pass
    return report


@dataclasses.dataclass(frozen=True)
class CheckResult:
    """One verification line: name, verdict, measured value, asserted bound."""

    name: str
    passed: bool
    measured: str
    bound: str

    def to_line(self) -> str:
        return "%s %s measured=%s bound=%s" % (
            self.name,
            "pass" if self.passed else "fail",
            self.measured,
            self.bound,
        )


@dataclasses.dataclass(frozen=True)
class VerificationReport:
    """Flat collection of named pass/fail checks for one run."""

    checks: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        return "\n".join(c.to_line() for c in self.checks) + "\n"

    def __getitem__(self, name: str) -> CheckResult:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)


# Floating-point slack for the envelope comparison: at t = 0 the envelope
# equals 1/(1/u0), whose double rounding can land one ulp below u0 itself.
_ENV_SLACK = 1e-12


def verify_run(spec: ProblemSpec, traj: Trajectory) -> VerificationReport:
    """Check one solved trajectory against every applicable analytic bound.

    Always checks positivity.  For logistic runs with u0 < 1 it additionally
    checks boundedness by 1 and the decay envelope (defaults c=1,
    c1=1/Gamma(alpha)) on the region where the envelope denominator is
    positive.  For u0 > 1 it checks bracket containment of the detected
    blow-up time, the bilateral sandwich against freshly solved comparison
    runs (tolerance 5 h^alpha of discretization slack), and the profile-fit
    coefficient of the lower comparison run against Gamma(2a)/Gamma(a)
    (within 25%).  A logistic run started exactly at the equilibrium u0 = 1
    gets the positivity check only.  Failures are report entries, never
    exceptions.
    """
    checks = []
    vmin = float(np.min(traj.values))
    checks.append(CheckResult("positivity", vmin > 0.0, "min_u=%.6g" % vmin, "> 0"))

    if spec.nonlinearity is not Nonlinearity.LOGISTIC or spec.u0 == 1.0:
        return VerificationReport(tuple(checks))

    if spec.u0 < 1.0:
        vmax = float(np.max(traj.values))
        checks.append(
            CheckResult("completed", traj.status is TrajectoryStatus.COMPLETED,
                        "status=%s" % traj.status.value, "completed")
        )
        checks.append(CheckResult("bounded_by_one", vmax < 1.0, "max_u=%.6g" % vmax, "< 1"))
        consts = EnvelopeConstants.defaults(spec.alpha)
        t0 = envelope_root(spec.alpha, spec.u0, consts)
        mask = traj.times < t0
        if np.any(mask):
            env = decay_envelope(spec.alpha, spec.u0, traj.times[mask], consts)
            excess = float(np.max(traj.values[mask] - env))
            checks.append(
                CheckResult("decay_envelope", excess <= _ENV_SLACK,
                            "max_excess=%.6g" % excess, "<= 0 (fp slack 1e-12)")
            )
        return VerificationReport(tuple(checks))

    # Blow-up case: u0 > 1.
    bracket = blowup_bracket(spec.alpha, spec.u0)
    report = detect_blowup(traj, spec.blowup_threshold)
    detected = report is not None
    t_detected = report.t_detected if detected else math.nan
    checks.append(
        CheckResult(
            "bracket",
            detected and t_detected in bracket,
            "t_detected=%.6g" % t_detected,
            "[%.6g, %.6g]" % (bracket.lower, bracket.upper),
        )
    )

    w0 = spec.u0 - 1.0
    lower_spec = dataclasses.replace(spec, u0=w0, nonlinearity=Nonlinearity.SQUARE)
    upper_spec = dataclasses.replace(spec, u0=w0, nonlinearity=Nonlinearity.SHIFTED_SQUARE)
    lower_run = solve(lower_spec)
    upper_run = solve(upper_spec)
    tol = 5.0 * spec.step ** spec.alpha
    n_common = min(len(traj), len(lower_run), len(upper_run))
    lower_viol = float(np.max((lower_run.values[:n_common] + 1.0) - traj.values[:n_common]))
    upper_viol = float(np.max(traj.values[:n_common] - (upper_run.values[:n_common] + 1.0)))
    checks.append(
        CheckResult(
            "sandwich",
            lower_viol <= tol and upper_viol <= tol,
            "lower_viol=%.3g upper_viol=%.3g" % (lower_viol, upper_viol),
            "<= %.3g" % tol,
        )
    )

    target = profile_coefficient(spec.alpha)
    try:
        _, coeff = fit_blowup_profile(lower_run, spec.alpha, shift=0.0)
        rel = abs(coeff - target) / target
        checks.append(
            CheckResult("profile_coefficient", rel <= 0.25,
                        "coeff=%.6g rel_err=%.3g" % (coeff, rel),
                        "within 25%% of %.6g" % target)
        )
    except FitError as exc:
        checks.append(
            CheckResult("profile_coefficient", False, "fit_failed (%s)" % exc,
                        "within 25%% of %.6g" % target)
        )
    return VerificationReport(tuple(checks))
