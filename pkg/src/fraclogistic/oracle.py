"""Independent numerical routes used only for cross-validation.

Three pieces, deliberately disjoint from the production numerics:

* :func:`pece_solve` — an Adams-type predictor-corrector march on the
  Volterra form u(t) = u0 + J^a[f(u)](t) with product-rectangle predictor
  and product-trapezoidal corrector weights (one corrector pass per step).
* :func:`caputo_residual` — an L1 finite-difference discretization of the
  fractional derivative of a finished trajectory, minus the model
  right-hand side; small residuals certify that a trajectory solves the
  stated equation regardless of how it was produced.
* :func:`ml_series_highprec` — the Mittag-Leffler power series summed in
  arbitrary precision and rounded to the nearest double; the accuracy
  anchor for the fast evaluator.

None of these touch the Mittag-Leffler evaluator or the convolution
quadrature weights: the only special function used is the gamma function
and every kernel is a plain power.  A bug shared with the production path
therefore cannot validate itself.  Performance is explicitly a non-goal.
"""

from __future__ import annotations

import math
from typing import Callable, Dict

import numpy as np
from mpmath import mp
from scipy.special import gammaln

from .solver import (
    Nonlinearity,
    ProblemSpec,
    Trajectory,
    TrajectoryStatus,
    _finalize,
    _recent_increase,
)

__all__ = ["pece_solve", "caputo_residual", "ml_series_highprec"]


# Right-hand sides of the four models in plain initial-value form
# D^a y = f(y) (derivative of Caputo type, constant history subtracted),
# which is exactly what the Volterra kernel u0 + J^a f(u) integrates.
_RHS: Dict[Nonlinearity, Callable[[float], float]] = {
    Nonlinearity.LOGISTIC: lambda u: u * u - u,
    Nonlinearity.SHIFTED_LOGISTIC: lambda w: w * w + w,
    Nonlinearity.SQUARE: lambda w: w * w,
    Nonlinearity.SHIFTED_SQUARE: lambda w: (w + 0.5) * (w + 0.5),
}


def pece_solve(spec: ProblemSpec) -> Trajectory:
    """Predictor-corrector march of ``spec`` on the integrated form.

    The predictor integrates the forcing history with product-rectangle
    weights (h^a/a)[(k+1)^a - k^a]; the corrector reintegrates with
    product-trapezoidal weights and a single evaluation at the predicted
    node (one pass, no inner iteration).  Termination mirrors
    :func:`fraclogistic.solver.solve` exactly: the march stops at ``t_max``,
    on a confirmed threshold crossing, or when the values leave the
    representable range, and the same detector classifies the result.

    Orders of magnitude slower than the production path at equal accuracy
    is acceptable here; this routine exists to disagree loudly when the
    production path is wrong.
    """
    h = float(spec.step)
    alpha = float(spec.alpha)
    n_steps = max(1, int(math.floor(spec.t_max / h + 1e-9)))
    times = h * np.arange(n_steps + 1, dtype=float)
    f = _RHS[spec.nonlinearity]

    # Weight tables indexed by step distance d.
    d = np.arange(n_steps + 1, dtype=float)
    b = (h**alpha / alpha) * ((d + 1.0) ** alpha - d**alpha)
    c = np.zeros(n_steps + 1)
    if n_steps >= 1:
        dd = d[1:]
        c[1:] = (dd + 1.0) ** (alpha + 1.0) + (dd - 1.0) ** (alpha + 1.0) - 2.0 * dd ** (alpha + 1.0)
    nn = np.arange(1, n_steps + 1, dtype=float)
    a0 = (nn - 1.0) ** (alpha + 1.0) - (nn - 1.0 - alpha) * nn**alpha
    brev = b[::-1].copy()
    crev = c[::-1].copy()

    inv_ga = 1.0 / math.gamma(alpha)
    corr_scale = h**alpha / math.gamma(alpha + 2.0)
    threshold = float(spec.blowup_threshold)

    values = np.empty(n_steps + 1)
    fhist = np.empty(n_steps + 1)
    values[0] = float(spec.u0)
    fhist[0] = f(values[0])

    for n in range(1, n_steps + 1):
        pred = values[0] + inv_ga * float(np.dot(brev[n_steps - n + 1 :], fhist[:n]))
        f_pred = f(pred) if math.isfinite(pred) else math.inf
        tail = 0.0
        if n > 1:
            tail = float(np.dot(crev[n_steps - n + 1 : n_steps], fhist[1:n]))
        u = values[0] + corr_scale * (f_pred + a0[n - 1] * fhist[0] + tail)
        if not math.isfinite(u):
            # History overflowed before a confirmed crossing; classify what
            # was recorded, exactly as the production march does.
            return _finalize(times, values, n - 1, threshold, accuracy_failed=False)
        values[n] = u
        fu = f(u)
        fhist[n] = fu if math.isfinite(fu) else math.inf
        if u > threshold and _recent_increase(values, n):
            return Trajectory(
                times[: n + 1], values[: n + 1].copy(), TrajectoryStatus.BLEW_UP, n
            )
    return Trajectory(times, values, TrajectoryStatus.COMPLETED, None)


def caputo_residual(traj: Trajectory, alpha: float) -> np.ndarray:
    """L1-scheme residual of the decay model along a completed trajectory.

    Discretizes the memory derivative of order ``alpha`` at every interior
    node with the classical L1 finite-difference weights
    (k+1)^(1-a) - k^(1-a) and subtracts the model right-hand side
    -u(1-u).  Returns the residual at nodes 1..N-1.  A residual that is
    uniformly small certifies the trajectory solves the stated equation —
    a statement independent of the representation the solver marched.

    Requires a completed run on a uniform grid (residuals near a blow-up
    node are meaningless) with at least three nodes.
    """
    if not (isinstance(alpha, float) and 0.0 < alpha < 1.0) and not (
        isinstance(alpha, int) and 0 < alpha < 1
    ):
        raise ValueError("alpha must lie strictly between 0 and 1, got %r" % (alpha,))
    alpha = float(alpha)
    if traj.status is not TrajectoryStatus.COMPLETED:
        raise ValueError(
            "residuals are only meaningful on completed runs, got status %r"
            % (traj.status.value,)
        )
    n = len(traj) - 1
    if n < 2:
        raise ValueError("need at least 3 nodes to form an interior residual")
    dt = np.diff(traj.times)
    h = float(dt[0])
    if not np.allclose(dt, h, rtol=1e-9, atol=0.0):
        raise ValueError("the L1 weights require a uniform time grid")

    k = np.arange(n, dtype=float)
    w = (k + 1.0) ** (1.0 - alpha) - k ** (1.0 - alpha)
    diffs = np.diff(traj.values)
    # D_i = sum_{k=0}^{i-1} w_k (u_{i-k} - u_{i-k-1}) is the discrete
    # convolution of the increment sequence with w, evaluated at i-1.
    deriv = np.convolve(diffs, w)[: n - 1] / (h**alpha * math.gamma(2.0 - alpha))
    u = traj.values[1:n]
    return deriv + u * (1.0 - u)


def ml_series_highprec(alpha: float, beta: float, z: float, digits: int = 50) -> float:
    """Mittag-Leffler series sum_k z^k / Gamma(a k + b) in big-float arithmetic.

    Sums in working precision sized to absorb the worst-case cancellation
    of the alternating series (estimated from the largest term magnitude
    via Stirling) and stops once 10 consecutive terms fall below
    10^(-digits) relative to the running sum.  The result is rounded to
    the nearest double.

    Restricted to the pure series region |z| <= 10 with digits >= 50;
    outside, or when the required cancellation headroom exceeds any
    practical precision (tiny ``alpha`` with large |z|), raises
    ``ValueError``.  Cost grows steeply with |z|^(1/alpha); this is the
    slow, trusted anchor, not an evaluator.
    """
    if not (math.isfinite(alpha) and 0.0 < alpha <= 2.0):
        raise ValueError("alpha must be a finite order in (0, 2], got %r" % (alpha,))
    if not (math.isfinite(beta) and beta > 0.0):
        raise ValueError("beta must be a finite positive real, got %r" % (beta,))
    z = float(z)
    if not math.isfinite(z):
        raise ValueError("z must be finite, got %r" % (z,))
    if abs(z) > 10.0:
        raise ValueError(
            "series summation is restricted to |z| <= 10; got z=%g "
            "(use an asymptotic-region method beyond)" % (z,)
        )
    if digits < 50:
        raise ValueError("digits must be at least 50, got %d" % (digits,))

    # Cancellation headroom: for z < 0 the sum loses about log10 of the
    # largest term to cancellation.  The continuous relaxation of
    # k log|z| - lgamma(a k + b) is unimodal and peaks where
    # psi(a k + b) = log|z|/a, i.e. at a k + b ~ |z|^(1/a) + 1/2 (inverse
    # digamma to leading order); the curvature there is O(a^2/|z|^(1/a)),
    # so evaluating at the stationary point is accurate to well under one
    # digit.  No scan — the term count blows up like |z|^(1/a) for small a
    # and must be rejected, not enumerated.
    extra = 0
    if z < -1.0:
        x_peak = abs(z) ** (1.0 / alpha)
        if not math.isfinite(x_peak):
            raise ValueError(
                "evaluation at alpha=%g, z=%g needs unbounded cancellation "
                "headroom; outside the practical series region" % (alpha, z)
            )
        k_peak = max(0.0, (x_peak + 0.5 - beta) / alpha)
        log_peak = k_peak * math.log(abs(z)) - float(gammaln(alpha * k_peak + beta))
        if not math.isfinite(log_peak):
            raise ValueError(
                "evaluation at alpha=%g, z=%g needs unbounded cancellation "
                "headroom; outside the practical series region" % (alpha, z)
            )
        extra = max(0, int(math.ceil(log_peak / math.log(10.0))))
    working = digits + 25 + extra
    if working > 5000:
        raise ValueError(
            "evaluation at alpha=%g, z=%g needs ~%d digits of cancellation "
            "headroom; outside the practical series region" % (alpha, z, extra)
        )

    cutoff = mp.mpf(10) ** (-digits)
    with mp.workdps(working):
        a_mp = mp.mpf(alpha)
        b_mp = mp.mpf(beta)
        z_mp = mp.mpf(z)
        total = mp.mpf(0)
        power = mp.mpf(1)
        consecutive = 0
        k = 0
        while consecutive < 10:
            term = power / mp.gamma(a_mp * k + b_mp)
            total += term
            scale = abs(total)
            if scale == 0:
                scale = mp.mpf(1)
            if abs(term) < cutoff * scale:
                consecutive += 1
            else:
                consecutive = 0
            power *= z_mp
            k += 1
            if k > 200000:
                raise ValueError(
                    "series did not meet the stopping rule within 200000 terms"
                )
        return float(total)
