"""Convolution quadrature weights for the Volterra kernels of the model.

The solver rewrites the fractional initial value problem as a Volterra
equation whose convolution kernels have elementary Laplace transforms:

    decay kernel      t^{a-1} E_{a,a}(-t^a)   <->  1 / (s^a + 1)
    growth kernel     t^{a-1} E_{a,a}(+t^a)   <->  1 / (s^a - 1)
    Riemann-Liouville t^{a-1} / Gamma(a)      <->  s^{-a}

Backward-Euler convolution quadrature replaces s by delta(zeta)/h with
delta(zeta) = 1 - zeta; the quadrature weights are the Taylor coefficients
of F(delta(zeta)/h), extracted by FFT on a circle of radius rho < 1.

Accuracy of the extraction is governed by two competing effects: aliasing
(contributions of coefficients j + m N folded back by the discrete sum,
proportional to rho^{N}) and rounding amplification (machine noise in the
samples divided by rho^{j}).  With rho^N = eps_c and N >= 8 (n + 1) the
amplification at j = n is at most eps_c^{-1/8} ~ 56, keeping weight errors
near 1e-13 while aliasing stays below eps_c.  For the growth kernel the
symbol has a pole at zeta = 1 - h; the radius is additionally capped at
1 - 2 h so the contour never approaches it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .special import AccuracyError

__all__ = ["KernelBranch", "KernelSpec", "WeightTable", "ContourError",
           "laplace_symbol", "cq_weights"]


class ContourError(AccuracyError):
    """The contour extraction failed its consistency checks."""


class KernelBranch(enum.Enum):
    DECAY = "decay"
    GROWTH = "growth"
    RIEMANN_LIOUVILLE = "riemann-liouville"


@dataclass(frozen=True)
class KernelSpec:
    """Identifies one convolution kernel: branch, order and step size."""

    branch: KernelBranch
    alpha: float
    step: float

    def __post_init__(self) -> None:
        if not isinstance(self.branch, KernelBranch):
            raise ValueError(f"branch must be a KernelBranch, got {self.branch!r}")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(
                f"alpha must be in (0, 1] (1 is test-mode), got {self.alpha!r}")
        if not (
            isinstance(self.step, (int, float))
            and math.isfinite(self.step)
            and self.step > 0.0
        ):
            raise ValueError(f"step must be a finite positive real, got {self.step!r}")


def laplace_symbol(spec: KernelSpec, s: complex) -> complex:
    """Laplace transform of the kernel at a point s with Re s > 0."""
    sa = s ** spec.alpha
    if spec.branch is KernelBranch.DECAY:
        return 1.0 / (sa + 1.0)
    if spec.branch is KernelBranch.GROWTH:
        if abs(sa - 1.0) < 1e-12:
            raise ZeroDivisionError(
                f"growth symbol evaluated at its pole, s={s!r}")
        return 1.0 / (sa - 1.0)
    return 1.0 / sa


@dataclass(frozen=True)
class WeightTable:
    """Convolution quadrature weights w_0..w_n for one kernel.

    ``radius`` and ``points`` record the extraction contour for diagnostics;
    the discrete convolution (K * g)(t_m) ~ sum_{j=0}^{m} w_{m-j} g_j needs
    only ``weights``.
    """

    kernel: KernelSpec
    weights: np.ndarray
    radius: float
    points: int

    @property
    def alpha(self) -> float:
        return self.kernel.alpha

    @property
    def step(self) -> float:
        return self.kernel.step

    @property
    def n(self) -> int:
        return len(self.weights) - 1


def cq_weights(spec: KernelSpec, n: int, eps_contour: float = 1e-14) -> WeightTable:
    """Backward-Euler convolution quadrature weights w_0..w_n.

    Raises :class:`ContourError` if the FFT extraction fails its
    self-consistency checks (non-finite samples, broken round-trip, or
    violated kernel-specific sign/sum invariants).
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    h = spec.step
    num = 1 << max(4, int(math.ceil(math.log2(8.0 * (n + 1)))))
    rho = eps_contour ** (1.0 / num)
    if spec.branch is KernelBranch.GROWTH:
        # keep the contour strictly inside the pole radius |zeta| = 1 - h
        if h >= 0.25:
            raise ContourError(
                f"growth weights need step < 0.25 to separate the contour "
                f"from the symbol pole, got h={h}")
        rho = min(rho, 1.0 - 2.0 * h)

    k = np.arange(num)
    zeta = rho * np.exp(2j * np.pi * k / num)
    s = (1.0 - zeta) / h
    sa = s ** spec.alpha
    if spec.branch is KernelBranch.DECAY:
        samples = 1.0 / (sa + 1.0)
    elif spec.branch is KernelBranch.GROWTH:
        samples = 1.0 / (sa - 1.0)
    else:
        samples = 1.0 / sa
    if not np.all(np.isfinite(samples.real) & np.isfinite(samples.imag)):
        raise ContourError(f"non-finite symbol samples for {spec}")

    # Taylor extraction c_j = (1/N) sum_k F_k e^{-2 pi i j k / N}: the
    # minus-sign kernel is numpy's forward fft
    coeff = np.fft.fft(samples) / num
    scale = np.max(np.abs(samples))
    # generating-function consistency: the coefficient set must reproduce
    # the samples (catches indexing/scaling mistakes in the extraction)
    recon = np.fft.ifft(coeff) * num
    if np.max(np.abs(recon - samples)) > 1e-8 * scale:
        raise ContourError(f"contour round-trip failed for {spec}")

    j = np.arange(n + 1)
    weights = coeff.real[: n + 1] / rho ** j

    if not np.all(np.isfinite(weights)):
        raise ContourError(f"non-finite weights for {spec}")
    if spec.branch is KernelBranch.DECAY:
        # partial sums of the decay weights approximate 1 - E_a(-t^a) and
        # must stay inside (0, 1)
        partial = np.cumsum(weights)
        if partial[0] <= 0.0 or np.max(partial) > 1.0 + 1e-8:
            raise ContourError(
                f"decay weight partial sums left (0, 1]: max={np.max(partial)}")
    elif spec.branch is KernelBranch.RIEMANN_LIOUVILLE:
        # Gruenwald-Letnikov weights are positive; allow tiny FFT noise
        if np.min(weights) < -1e-12 * max(np.max(np.abs(weights)), 1.0):
            raise ContourError(f"negative Riemann-Liouville weight for {spec}")
    return WeightTable(kernel=spec, weights=weights, radius=rho, points=num)
