"""Fractional logistic equation: solver, analysis bounds, and reference oracles.

The package solves the Caputo-derivative initial value problem

    D^alpha u(t) = -u(t) (1 - u(t)),   u(0) = u0,   0 < alpha < 1,

via convolution quadrature on the equivalent Volterra equation, together with
the shifted and comparison problems that bracket its blow-up behaviour, and
verifies computed trajectories against closed-form bounds (blow-up time
brackets, decay envelope, existence horizon, blow-up profile).
"""

from .analysis import (
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
from .oracle import caputo_residual, ml_series_highprec, pece_solve
from .quadrature import (
    ContourError,
    KernelBranch,
    KernelSpec,
    WeightTable,
    cq_weights,
    laplace_symbol,
)
from .solver import (
    BlowUpReport,
    Nonlinearity,
    ProblemSpec,
    Trajectory,
    TrajectoryStatus,
    detect_blowup,
    read_csv,
    solve,
    trajectory_from_csv,
    trajectory_to_csv,
    write_csv,
)
from .special import (
    AccuracyError,
    MLAccuracy,
    gamma,
    mittag_leffler,
    mittag_leffler_two,
    ml_grid,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "BlowUpReport",
    "BoundBracket",
    "CheckResult",
    "ContourError",
    "EnvelopeConstants",
    "FitError",
    "KernelBranch",
    "KernelSpec",
    "MLAccuracy",
    "Nonlinearity",
    "ProblemSpec",
    "Trajectory",
    "TrajectoryStatus",
    "VerificationReport",
    "WeightTable",
    "blowup_bracket",
    "caputo_residual",
    "comparison_brackets",
    "cq_weights",
    "decay_envelope",
    "describe_blowup",
    "detect_blowup",
    "envelope_root",
    "existence_horizon",
    "fit_blowup_profile",
    "gamma",
    "laplace_symbol",
    "mittag_leffler",
    "mittag_leffler_two",
    "ml_grid",
    "ml_series_highprec",
    "pece_solve",
    "profile_coefficient",
    "read_csv",
    "solve",
    "trajectory_from_csv",
    "trajectory_to_csv",
    "verify_run",
    "write_csv",
    "__version__",
]
