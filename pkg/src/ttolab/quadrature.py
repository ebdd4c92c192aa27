"""Adaptive equal-weight quadrature on the unit circle.

The rule is the periodic trapezoid rule at M equispaced angles, normalized so
that the integral of 1 is 1.  M doubles (reusing previous samples) until two
successive levels agree to tolerance or the point cap is reached; failure to
converge is reported in the result, not raised.

Samplers are callables taking a numpy array of angles and returning an array
of values (complex or real; an extra trailing axis is allowed for batched
integrands).  Use :func:`from_scalar` to wrap a point function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .blaschke import FiniteBlaschke, TWO_PI, nu_density_grid

#: number of grid points evaluated per chunk (keeps peak memory flat)
CHUNK = 1 << 20


def _next_pow2(n: int) -> int:
    return 1 << max(0, math.ceil(math.log2(max(1, n))))


@dataclass(frozen=True)
class QuadratureConfig:
    initial_points: int = 256
    max_points: int = 1 << 20
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9

    def __post_init__(self):
        for name in ("initial_points", "max_points"):
            v = getattr(self, name)
            if v < 2 or (v & (v - 1)) != 0:
                raise ValueError(f"{name} must be a power of two >= 2, got {v}")
        if self.initial_points > self.max_points:
            raise ValueError("initial_points must not exceed max_points")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    estimated_error: float
    points_used: int
    converged: bool


def from_scalar(f: Callable) -> Callable:
    """Wrap a scalar angle->value function as a vectorized sampler."""
    def sampler(angles: np.ndarray):
        return np.asarray([f(t) for t in angles])
    return sampler


def blaschke_initial_points(B: FiniteBlaschke, cfg: QuadratureConfig) -> int:
    """Grid size that resolves the narrowest boundary kernel peak of B.

    A zero at radius r produces a Poisson peak of angular width ~(1-r), so
    the equispaced grid must step well below the narrowest width present;
    eight points per narrowest peak resolves them all before the first
    doubling check.  Capped at max_points/2 so one doubling stays possible.
    """
    r = np.abs(B.zeros)
    scale = 8.0 * float(((1.0 + r) / (1.0 - r)).max())
    n = _next_pow2(int(min(scale, cfg.max_points // 2)))
    return max(cfg.initial_points, min(n, cfg.max_points // 2))


def _sample(sampler, angles):
    vals = np.asarray(sampler(angles))
    if vals.shape[: 1] != angles.shape:
        raise ValueError("sampler must return one value per angle")
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals.reshape(len(angles), -1)))[0][0]
        raise ValueError(f"non-finite sample at angle {angles[bad]!r}")
    return vals


def _chunked_sum(sampler, count: int, stride_offset: float):
    """Sum of samples at angles 2*pi*(m + stride_offset)/count, chunked."""
    total = None
    for start in range(0, count, CHUNK):
        stop = min(start + CHUNK, count)
        angles = TWO_PI * (np.arange(start, stop) + stride_offset) / count
        vals = _sample(sampler, angles)
        s = vals.sum(axis=0)
        total = s if total is None else total + s
    return total


def integrate_circle(sampler: Callable, cfg: QuadratureConfig = QuadratureConfig(),
                     initial_points: int | None = None) -> IntegralResult:
    """Integrate a sampler against normalized Lebesgue measure on the circle."""
    M = initial_points or cfg.initial_points
    M = max(2, min(_next_pow2(M), cfg.max_points))
    running = _chunked_sum(sampler, M, 0.0)
    value = running / M
    prev = None
    while True:
        if prev is not None:
            err = np.max(np.abs(value - prev))
            tol = max(cfg.abs_tol, cfg.rel_tol * float(np.max(np.abs(value))))
            if err <= tol:
                return IntegralResult(_scalarize(value), float(err), M, True)
            if M >= cfg.max_points:
                return IntegralResult(_scalarize(value), float(err), M, False)
        elif M >= cfg.max_points:
            return IntegralResult(_scalarize(value), float("inf"), M, False)
        # refine: the M new samples sit halfway between the old ones
        odd = _chunked_sum(sampler, M, 0.5)
        running = running + odd
        M *= 2
        prev, value = value, running / M


def _scalarize(v):
    arr = np.asarray(v)
    return complex(arr) if arr.ndim == 0 else arr


def poisson_integral(f: Callable, lam: complex, cfg: QuadratureConfig = QuadratureConfig()) -> IntegralResult:
    """Harmonic extension of f at lam: integral of f against the Poisson kernel."""
    lam = complex(lam)
    r = abs(lam)
    if r >= 1.0:
        raise ValueError("Poisson integral needs |lam| < 1")

    def sampler(angles):
        z = np.exp(1j * angles)
        kernel = (1.0 - r * r) / np.abs(z - lam) ** 2
        return np.asarray(f(angles)) * kernel

    start = _next_pow2(int(min(8.0 * (1.0 + r) / (1.0 - r), cfg.max_points // 2)))
    return integrate_circle(sampler, cfg, initial_points=max(cfg.initial_points, start))


def nu_integral(f: Callable, B: FiniteBlaschke, cfg: QuadratureConfig = QuadratureConfig()) -> IntegralResult:
    """Integral of f against the mean-of-harmonic-measures density |B'|/N."""
    def sampler(angles):
        return np.asarray(f(angles)) * nu_density_grid(B, angles)
    return integrate_circle(sampler, cfg, initial_points=blaschke_initial_points(B, cfg))


def weighted_l2_norm(f: Callable, B: FiniteBlaschke, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Norm of f in L^2 of the mean harmonic measure of B."""
    def sq(angles):
        return np.abs(np.asarray(f(angles))) ** 2
    res = nu_integral(sq, B, cfg)
    return math.sqrt(max(0.0, float(np.real(res.value))))
