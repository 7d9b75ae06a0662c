"""Command-line front end.

Subcommands wrap the library operations one-to-one: ``solve`` runs a single
initial-value problem and emits its trajectory CSV, ``figure`` reproduces
the data behind the two bundled blow-up figures, ``bracket`` / ``envelope``
/ ``weights`` / ``ml-eval`` print single analysis quantities, and
``validate`` runs the cross-validation suite on a named grid.

Exit-code contract (CI gates on it):

* 0 — success (for ``solve``: the run completed or blew up; blow-up is a
  result, not an error),
* 1 — ``validate`` found a failing check,
* 2 — invalid flags or parameter values,
* 3 — an accuracy failure (a certified-accuracy routine refused to answer,
  or a solve ended with accuracy-failure status).

All output is deterministic: identical flags produce byte-identical bytes.
CSV output is UTF-8 with ``,`` separators, ``\\n`` line endings and
``#``-prefixed comment lines.
"""

from __future__ import annotations

import math
import sys
from typing import List, Optional, Tuple

import click
import numpy as np

from . import oracle
from .analysis import (
    CheckResult,
    EnvelopeConstants,
    VerificationReport,
    blowup_bracket,
    decay_envelope,
    envelope_root,
    verify_run,
)
from .quadrature import KernelBranch, KernelSpec, cq_weights
from .special import AccuracyError, mittag_leffler_two
from .solver import (
    Nonlinearity,
    ProblemSpec,
    TrajectoryStatus,
    solve,
    trajectory_to_csv,
)

EXIT_VALIDATION = 1
EXIT_ACCURACY = 3

_PROBLEM_NAMES = [m.value for m in Nonlinearity]
_BRANCH_NAMES = [m.value for m in KernelBranch]

# Figure id -> list of (alpha, u0) series, in presentation order.
_FIGURES = {
    1: [(0.5, 5.0), (0.5, 3.0), (0.5, 2.0)],
    2: [(0.3, 5.0), (0.5, 5.0)],
}


@click.group()
def main() -> None:
    """Fractional logistic dynamics: solves, figure data, validation."""


def _build_spec(
    alpha: float,
    u0: float,
    step: float,
    t_max: float,
    threshold: float,
    problem: str,
) -> ProblemSpec:
    try:
        return ProblemSpec(
            alpha=alpha,
            u0=u0,
            nonlinearity=Nonlinearity(problem),
            step=step,
            t_max=t_max,
            blowup_threshold=threshold,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


@main.command("solve")
@click.option("--alpha", type=float, required=True, help="Derivative order, in (0, 1).")
@click.option("--u0", type=float, required=True, help="Initial value, positive.")
@click.option("--h", "step", type=float, default=1e-3, show_default=True, help="Step size.")
@click.option("--t-max", type=float, default=10.0, show_default=True, help="March horizon.")
@click.option(
    "--threshold",
    type=float,
    default=1e10,
    show_default=True,
    help="Blow-up detection threshold.",
)
@click.option(
    "--problem",
    type=click.Choice(_PROBLEM_NAMES),
    default=Nonlinearity.LOGISTIC.value,
    show_default=True,
    help="Model to march.",
)
@click.option(
    "--picard",
    is_flag=True,
    help="Correct each step to the fixed point of the node equation.",
)
@click.option(
    "--out",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="Write CSV here instead of stdout.",
)
def cmd_solve(
    alpha: float,
    u0: float,
    step: float,
    t_max: float,
    threshold: float,
    problem: str,
    picard: bool,
    out: Optional[str],
) -> None:
    """Solve one initial-value problem and emit its trajectory CSV."""
    spec = _build_spec(alpha, u0, step, t_max, threshold, problem)
    traj = solve(spec, picard=picard)
    _emit(trajectory_to_csv(traj), out)
    if traj.status is TrajectoryStatus.ACCURACY_FAILURE:
        click.echo(
            "accuracy failure at t=%.17g; trajectory truncated"
            % traj.times[traj.status_index],
            err=True,
        )
        sys.exit(EXIT_ACCURACY)


@main.command("figure")
@click.option("--figure", "figure_id", type=int, required=True, help="Figure id: 1 or 2.")
@click.option("--h", "step", type=float, default=1e-4, show_default=True, help="Step size.")
@click.option(
    "--out",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="Write CSV here instead of stdout.",
)
def cmd_figure(figure_id: int, step: float, out: Optional[str]) -> None:
    """Emit the multi-series data behind the bundled blow-up figures.

    Figure 1: order 0.5 with initial values 5, 3, 2.  Figure 2: initial
    value 5 with orders 0.3 and 0.5.  Each series is a trajectory CSV
    preceded by a ``# alpha=..., u0=...`` metadata line; every series blows
    up, so every block carries a ``# blowup_at=`` footer.
    """
    if figure_id not in _FIGURES:
        raise click.UsageError(
            "unknown figure id %d; available: %s"
            % (figure_id, ", ".join(str(k) for k in sorted(_FIGURES)))
        )
    blocks: List[str] = []
    for alpha, u0 in _FIGURES[figure_id]:
        spec = _build_spec(alpha, u0, step, 1.0, 1e10, Nonlinearity.LOGISTIC.value)
        traj = solve(spec)
        blocks.append("# alpha=%g, u0=%g\n" % (alpha, u0) + trajectory_to_csv(traj))
    _emit("".join(blocks), out)


@main.command("bracket")
@click.option("--alpha", type=float, required=True, help="Derivative order, in (0, 1).")
@click.option("--u0", type=float, required=True, help="Initial value, greater than 1.")
def cmd_bracket(alpha: float, u0: float) -> None:
    """Print the two-sided blow-up time bracket for a super-critical start."""
    try:
        br = blowup_bracket(alpha, u0)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo("lower=%.6f upper=%.6f" % (br.lower, br.upper))


@main.command("envelope")
@click.option("--alpha", type=float, required=True, help="Derivative order, in (0, 1).")
@click.option("--u0", type=float, required=True, help="Initial value, in (0, 1).")
@click.option("--t", "t_eval", type=float, default=None, help="Evaluate the bound here.")
@click.option("--c", type=float, default=1.0, show_default=True, help="Kernel constant c.")
@click.option(
    "--c1",
    type=float,
    default=None,
    help="Forcing constant c1 [default: 1/Gamma(alpha)].",
)
def cmd_envelope(
    alpha: float, u0: float, t_eval: Optional[float], c: float, c1: Optional[float]
) -> None:
    """Print the decay-envelope root, or the envelope value at a time.

    Without ``--t`` prints ``T0=``, the time at which the envelope's
    denominator vanishes (the bound holds strictly before it).  With
    ``--t`` prints ``u_bound=``, the envelope value at that time.
    """
    try:
        if c1 is None:
            c1 = EnvelopeConstants.defaults(alpha).c1
        consts = EnvelopeConstants(c=c, c1=c1)
        if t_eval is None:
            click.echo("T0=%.10g" % envelope_root(alpha, u0, consts))
        else:
            click.echo("u_bound=%.10g" % decay_envelope(alpha, u0, t_eval, consts))
    except ValueError as exc:
        raise click.UsageError(str(exc))


@main.command("weights")
@click.option("--alpha", type=float, required=True, help="Kernel order, in (0, 1].")
@click.option("--h", "step", type=float, default=1e-3, show_default=True, help="Step size.")
@click.option("--n", "count", type=int, default=20, show_default=True, help="Highest index.")
@click.option(
    "--branch",
    type=click.Choice(_BRANCH_NAMES),
    default=KernelBranch.DECAY.value,
    show_default=True,
    help="Kernel branch.",
)
def cmd_weights(alpha: float, step: float, count: int, branch: str) -> None:
    """Print the first convolution weights of a kernel branch as CSV."""
    if count < 0:
        raise click.UsageError("--n must be nonnegative")
    try:
        spec = KernelSpec(KernelBranch(branch), alpha, step)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    try:
        table = cq_weights(spec, count)
    except AccuracyError as exc:
        click.echo("accuracy failure: %s" % exc, err=True)
        sys.exit(EXIT_ACCURACY)
    lines = ["j,omega_j"]
    for j, w in enumerate(table.weights):
        lines.append("%d,%.17g" % (j, w))
    click.echo("\n".join(lines))


@main.command("ml-eval")
@click.option("--alpha", type=float, required=True, help="First order, in (0, 1].")
@click.option("--z", type=float, required=True, help="Argument.")
@click.option("--beta", type=float, default=1.0, show_default=True, help="Second order.")
def cmd_ml_eval(alpha: float, z: float, beta: float) -> None:
    """Evaluate the certified Mittag-Leffler function at one point."""
    try:
        value = mittag_leffler_two(alpha, beta, z)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    except AccuracyError as exc:
        click.echo("accuracy failure: %s" % exc, err=True)
        sys.exit(EXIT_ACCURACY)
    click.echo("%.10f" % value)


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

# Validation cases: (alpha, u0, step).  Decay cases run at h=1e-3.  Blow-up
# cases need roughly h^(-alpha) resolved nodes before the crossing for the
# profile check, so the alpha=0.3 case steps finer than the others.
_QUICK_GRID: List[Tuple[float, float, float]] = [
    (0.5, 0.5, 1e-3),
    (0.5, 2.0, 1e-4),
]
_FULL_GRID: List[Tuple[float, float, float]] = [
    (0.3, 0.5, 1e-3),
    (0.3, 2.0, 1e-5),
    (0.5, 0.5, 1e-3),
    (0.5, 2.0, 1e-4),
    (0.7, 0.5, 1e-3),
    (0.7, 2.0, 1e-4),
]


def _prefixed(prefix: str, checks: Tuple[CheckResult, ...]) -> List[CheckResult]:
    return [
        CheckResult(
            name="%s:%s" % (prefix, c.name),
            passed=c.passed,
            measured=c.measured,
            bound=c.bound,
        )
        for c in checks
    ]


def _validate_checks(grid: str) -> VerificationReport:
    cases = _QUICK_GRID if grid == "quick" else _FULL_GRID
    checks: List[CheckResult] = []

    # Special-function anchor against the arbitrary-precision series.
    anchor = mittag_leffler_two(0.5, 1.0, -1.0)
    reference = oracle.ml_series_highprec(0.5, 1.0, -1.0)
    gap = abs(anchor - reference)
    checks.append(
        CheckResult(
            name="ml:anchor",
            passed=gap <= 1e-10,
            measured="|fast-series|=%.3g" % gap,
            bound="<= 1e-10",
        )
    )

    # Plain-power branch weights against the closed-form ratio.
    wspec = KernelSpec(KernelBranch.RIEMANN_LIOUVILLE, 0.5, 0.01)
    table = cq_weights(wspec, 200)
    j = np.arange(201, dtype=float)
    exact = np.exp(
        np.vectorize(math.lgamma)(j + 0.5) - math.lgamma(0.5) - np.vectorize(math.lgamma)(j + 1.0)
    ) * 0.01**0.5
    wgap = float(np.max(np.abs(table.weights - exact) / exact))
    checks.append(
        CheckResult(
            name="weights:closed-form",
            passed=wgap <= 1e-10,
            measured="max_rel=%.3g" % wgap,
            bound="<= 1e-10",
        )
    )

    for alpha, u0, step in cases:
        t_max = 5.0 if u0 < 1.0 else 2.0
        spec = ProblemSpec(alpha=alpha, u0=u0, step=step, t_max=t_max)
        traj = solve(spec)
        tag = "a=%g,u0=%g" % (alpha, u0)
        checks.extend(_prefixed(tag, verify_run(spec, traj).checks))

        # Independent-method agreement on the same problem.
        cross = oracle.pece_solve(spec)
        if u0 < 1.0:
            n_common = min(len(traj), len(cross))
            dev = float(np.max(np.abs(traj.values[:n_common] - cross.values[:n_common])))
            tol = 5.0 * spec.step**alpha
            checks.append(
                CheckResult(
                    name="%s:cross-method" % tag,
                    passed=dev <= tol,
                    measured="max_dev=%.3g" % dev,
                    bound="<= %.3g" % tol,
                )
            )
        else:
            agree = (
                traj.status is TrajectoryStatus.BLEW_UP
                and cross.status is TrajectoryStatus.BLEW_UP
            )
            checks.append(
                CheckResult(
                    name="%s:cross-blowup" % tag,
                    passed=agree,
                    measured="statuses=%s/%s" % (traj.status.value, cross.status.value),
                    bound="both blew-up",
                )
            )

    # Discrete-derivative residual certification on a decay run.
    rspec = ProblemSpec(alpha=0.5, u0=0.5, step=1e-3, t_max=2.0)
    res = oracle.caputo_residual(solve(rspec), 0.5)
    rmax = float(np.max(np.abs(res)))
    rbound = 10.5 * rspec.step**0.5
    checks.append(
        CheckResult(
            name="residual:decay",
            passed=rmax <= rbound,
            measured="max=%.3g" % rmax,
            bound="<= %.3g" % rbound,
        )
    )
    return VerificationReport(checks=tuple(checks))


@main.command("validate")
@click.option(
    "--grid",
    type=click.Choice(["quick", "full"]),
    default="quick",
    show_default=True,
    help="Validation grid size.",
)
def cmd_validate(grid: str) -> None:
    """Run the cross-validation suite; nonzero exit on any failing check."""
    try:
        report = _validate_checks(grid)
    except AccuracyError as exc:
        click.echo("accuracy failure: %s" % exc, err=True)
        sys.exit(EXIT_ACCURACY)
    click.echo(report.to_text(), nl=False)
    if not report.passed:
        sys.exit(EXIT_VALIDATION)


if __name__ == "__main__":
    main()
