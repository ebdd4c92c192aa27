"""Convergence experiments: trace asymptotics, Clark-unitary approximation
quality, product defects and the averaging-operator lemma suite.

Every experiment sweeps an increasing list of degrees N and emits one record
per N.  Records are plain data (complex lhs/rhs, gap, float diagnostics) so
the CLI can serialize them to CSV/JSON verbatim; given an identical config
and seed the records are bit-identical between runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .blaschke import (
    FiniteBlaschke,
    ZeroSequence,
    abs_derivative_grid,
    angular_partial_sums,
    circle_grid,
    nu_density_grid,
)
from .clark import PhaseFunction, clark_measure, clark_support
from .operators import (
    OperatorMatrix,
    ScalarFunction,
    SymbolRep,
    apply_function,
    build_clark_spectral,
    build_truncated_toeplitz,
    fejer_values,
    inverse_derivative_symbol,
    trace,
    trace_norm,
)
from .quadrature import QuadratureConfig, integrate_circle, nu_integral


@dataclass(frozen=True)
class ExperimentConfig:
    sequence: ZeroSequence
    symbol: SymbolRep
    function: ScalarFunction = ScalarFunction.preset("identity")
    n_values: tuple = (8, 16, 32, 64)
    alpha_count: int = 32
    quadrature: QuadratureConfig = QuadratureConfig()
    seed: int = 0

    def __post_init__(self):
        ns = tuple(int(n) for n in self.n_values)
        if not ns or any(n < 1 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n_values must be a strictly increasing list of positive integers")
        object.__setattr__(self, "n_values", ns)
        if self.alpha_count < 1 or (self.alpha_count & (self.alpha_count - 1)) != 0:
            raise ValueError("alpha_count must be a power of two")
        if not self.function.is_poly and not self.symbol.is_real:
            raise ValueError("pointwise functions require a real-valued symbol")


@dataclass(frozen=True)
class ConvergenceRecord:
    N: int
    lhs: complex
    rhs: complex
    gap: float = field(init=False)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "gap", abs(self.lhs - self.rhs))


def _blaschke(cfg: ExperimentConfig, N: int) -> FiniteBlaschke:
    return FiniteBlaschke.from_sequence(cfg.sequence, N)


def _alpha_angles(count: int) -> np.ndarray:
    return circle_grid(count)


# ---------------------------------------------------------------------------
# trace asymptotics
# ---------------------------------------------------------------------------

def szego_gap(cfg: ExperimentConfig) -> list[ConvergenceRecord]:
    """Normalized trace of f(T(phi)) against the integral of f(phi) with
    respect to the mean harmonic measure, per degree."""
    records = []
    composed = cfg.function.compose_symbol(cfg.symbol)
    for N in cfg.n_values:
        B = _blaschke(cfg, N)
        T = build_truncated_toeplitz(B, cfg.symbol, cfg.quadrature)
        fT = apply_function(T, cfg.function)
        lhs = trace(fT) / N
        quad = nu_integral(composed.evaluate, B, cfg.quadrature)
        diag = {
            "quad_points": float(quad.points_used),
            "quad_error": float(quad.estimated_error),
            "build_converged": float(T.converged),
        }
        records.append(ConvergenceRecord(N, lhs, complex(quad.value), diagnostics=diag))
    return records


def stz_trace(cfg: ExperimentConfig) -> list[ConvergenceRecord]:
    """Weighted trace against the reciprocal-derivative symbol, compared with
    the plain Lebesgue integral of f(phi)."""
    records = []
    composed = cfg.function.compose_symbol(cfg.symbol)
    rhs_quad = integrate_circle(composed.evaluate, cfg.quadrature)
    rhs = complex(rhs_quad.value)
    for N in cfg.n_values:
        B = _blaschke(cfg, N)
        T_beta = build_truncated_toeplitz(B, inverse_derivative_symbol(B), cfg.quadrature)
        fT = apply_function(build_truncated_toeplitz(B, cfg.symbol, cfg.quadrature), cfg.function)
        lhs = complex(np.trace(T_beta.matrix @ fT.matrix))
        diag = {
            "beta_build_error": float(T_beta.estimated_error),
            "beta_build_converged": float(T_beta.converged),
            "rhs_points": float(rhs_quad.points_used),
        }
        records.append(ConvergenceRecord(N, lhs, rhs, diagnostics=diag))
    return records


# ---------------------------------------------------------------------------
# angular-derivative conditions
# ---------------------------------------------------------------------------

def angular_condition_a(cfg: ExperimentConfig) -> list[dict]:
    """Decay profile of the largest Clark weight over an alpha grid, per N."""
    out = []
    alphas = _alpha_angles(cfg.alpha_count)
    for N in cfg.n_values:
        B = _blaschke(cfg, N)
        phase = PhaseFunction(B)
        vals = np.empty(len(alphas))
        for i, a in enumerate(alphas):
            ang = clark_support(B, complex(math.cos(a), math.sin(a)), phase)
            vals[i] = (1.0 / abs_derivative_grid(B, ang)).max()
        out.append({
            "N": N,
            "max": float(vals.max()),
            "median": float(np.median(vals)),
            "min": float(vals.min()),
        })
    return out


def angular_condition_b(cfg: ExperimentConfig, J: int = 10 ** 5, grid_size: int = 64,
                        thresholds: Sequence[float] = (1e2, 1e3)):
    """Partial Poisson sums on a circle grid with threshold statistics.

    Returns the raw diagnostics plus, per threshold, the fraction of grid
    points whose J-term sum stays below it (points of slow phase growth)."""
    grid = circle_grid(grid_size, offset=0.5)
    diagnostics = angular_partial_sums(cfg.sequence, grid, J, thresholds=thresholds)
    final = diagnostics.partial_sums[:, -1]
    fractions = {}
    for t in thresholds:
        fractions[f"below_{t:g}"] = float(np.mean(final < t))
        fractions[f"above_{t:g}"] = float(np.mean(final >= t))
    summary = {
        "J": float(J),
        "grid_size": float(grid_size),
        "min_sum": float(final.min()),
        "max_sum": float(final.max()),
        **fractions,
    }
    return diagnostics, summary


# ---------------------------------------------------------------------------
# approximation lemmas
# ---------------------------------------------------------------------------

def hs_approx_gap(cfg: ExperimentConfig) -> list[ConvergenceRecord]:
    """Normalized alpha-average of the squared Hilbert-Schmidt distance from
    T(phi) to the Clark functional calculus of phi.

    The rhs reproduces the same quantity through the averaging operator:
    integral of conj(phi)(phi - E_N phi) against the mean harmonic measure.
    """
    records = []
    sym = cfg.symbol
    alphas = _alpha_angles(cfg.alpha_count)
    for N in cfg.n_values:
        B = _blaschke(cfg, N)
        T = build_truncated_toeplitz(B, sym, cfg.quadrature)
        phase = PhaseFunction(B)
        acc = 0.0
        for a in alphas:
            mu = clark_measure(B, complex(math.cos(a), math.sin(a)), phase)
            M = build_clark_spectral(B, mu, sym)
            acc += float(np.linalg.norm(T.matrix - M.matrix) ** 2)
        lhs = acc / (len(alphas) * N)

        def integrand(angles):
            pv = np.asarray(sym.evaluate(angles))
            ev = fejer_values(B, T, angles)
            return np.conj(pv) * (pv - ev)

        quad = nu_integral(integrand, B, cfg.quadrature)
        rec = ConvergenceRecord(N, lhs, complex(quad.value),
                                diagnostics={"alpha_count": float(len(alphas)),
                                             "rhs_points": float(quad.points_used)})
        records.append(rec)
    return records


def product_defect_s1(cfg: ExperimentConfig, phi: SymbolRep, psi: SymbolRep) -> list[ConvergenceRecord]:
    """Trace norm of T(phi)T(psi) - T(phi psi) per degree (bounded in N)."""
    if not (phi.is_trig and psi.is_trig):
        raise ValueError("product defect needs trig-poly symbols")
    prod = phi * psi
    records = []
    for N in cfg.n_values:
        B = _blaschke(cfg, N)
        Tphi = build_truncated_toeplitz(B, phi)
        Tpsi = build_truncated_toeplitz(B, psi)
        Tprod = build_truncated_toeplitz(B, prod)
        defect = OperatorMatrix(Tphi.matrix @ Tpsi.matrix - Tprod.matrix, B)
        records.append(ConvergenceRecord(N, complex(trace_norm(defect)), 0j))
    return records


def stz_defect_s1(cfg: ExperimentConfig) -> list[ConvergenceRecord]:
    """Trace norm of T(1/|B'|) [f(T(phi)) - T(f o phi)] per degree."""
    if not cfg.function.is_poly or not cfg.symbol.is_trig:
        raise ValueError("defect sweep needs a polynomial function and trig-poly symbol")
    composed = cfg.function.compose_symbol(cfg.symbol)
    records = []
    for N in cfg.n_values:
        B = _blaschke(cfg, N)
        T_beta = build_truncated_toeplitz(B, inverse_derivative_symbol(B), cfg.quadrature)
        fT = apply_function(build_truncated_toeplitz(B, cfg.symbol), cfg.function)
        Tcomp = build_truncated_toeplitz(B, composed)
        defect = OperatorMatrix(T_beta.matrix @ (fT.matrix - Tcomp.matrix), B)
        records.append(ConvergenceRecord(N, complex(trace_norm(defect)), 0j,
                                         diagnostics={"beta_build_converged": float(T_beta.converged)}))
    return records


# ---------------------------------------------------------------------------
# averaging-operator suite
# ---------------------------------------------------------------------------

def _random_trig_poly(rng: np.random.Generator, degree: int = 6) -> SymbolRep:
    ks = range(-degree, degree + 1)
    return SymbolRep.trig({k: complex(rng.normal(), rng.normal()) for k in ks})


def _nu_norm_on_grid(B, values, density):
    return math.sqrt(float(np.mean(np.abs(values) ** 2 * density)))


def fejer_suite(cfg: ExperimentConfig, trials: int = 20, grid_points: int = 4096) -> dict:
    """Contraction, pointwise convergence and L^2 convergence checks for the
    kernel-averaging operator, per degree.

    Norms are evaluated on a fixed equispaced grid sized to resolve every
    kernel peak of the largest product in the sweep (grid_points is a floor).
    """
    rng = np.random.default_rng(cfg.seed)
    trial_symbols = [_random_trig_poly(rng) for _ in range(trials)]
    lipschitz = cfg.symbol if cfg.symbol.is_trig else SymbolRep.preset("re_z")

    report: dict = {"per_n": [], "trials": trials}
    probe_angles = circle_grid(16, offset=0.37)
    for N in cfg.n_values:
        B = _blaschke(cfg, N)
        M = grid_points
        r = np.abs(B.zeros)
        need = 8.0 * float(((1.0 + r) / (1.0 - r)).max())
        while M < need and M < cfg.quadrature.max_points:
            M *= 2
        angles = circle_grid(M)
        density = nu_density_grid(B, angles)

        ratios = []
        for sym in trial_symbols:
            T = build_truncated_toeplitz(B, sym)
            fvals = sym.evaluate(angles)
            evals = fejer_values(B, T, angles)
            ratios.append(_nu_norm_on_grid(B, evals, density)
                          / _nu_norm_on_grid(B, fvals, density))

        T_lip = build_truncated_toeplitz(B, lipschitz, cfg.quadrature)
        lip_vals = lipschitz.evaluate(angles)
        lip_avg = fejer_values(B, T_lip, angles)
        l2_gap_sq = float(np.mean(np.abs(lip_avg - lip_vals) ** 2 * density))

        probe_vals = np.abs(fejer_values(B, T_lip, probe_angles)
                            - lipschitz.evaluate(probe_angles))
        probe_growth = abs_derivative_grid(B, probe_angles)

        report["per_n"].append({
            "N": N,
            "contraction_max": float(np.max(ratios)),
            "l2_gap_sq": l2_gap_sq,
            "pointwise_gap": probe_vals.tolist(),
            "pointwise_derivative": probe_growth.tolist(),
            "grid_points": float(M),
        })

    gaps = [row["l2_gap_sq"] for row in report["per_n"]]
    report["l2_decay_ratios"] = [b / a if a > 0 else 0.0 for a, b in zip(gaps, gaps[1:])]
    return report
