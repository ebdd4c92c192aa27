"""Finite Blaschke products: zero-sequence generators, boundary evaluation,
angular derivatives, reproducing kernels and the Takenaka-Malmquist-Walsh basis.

Everything here is a pure function of immutable inputs.  Points on the unit
circle are passed either as :class:`CirclePoint`, as a plain angle (float) or
as a unimodular complex number; heavy grid computations use the private
``*_grid`` helpers that take numpy angle arrays.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

#: generators keep zeros strictly inside the disk so that boundary kernels
#: stay resolvable in double precision
RADIUS_CAP = 1.0 - 1e-6

GENERATOR_TAGS = (
    "uniform_zero",
    "constant_modulus",
    "alternating_3k",
    "frostman_fast",
    "dense_nonblaschke",
    "explicit",
)


@dataclass(frozen=True)
class CirclePoint:
    """A point on the unit circle, stored by its angle in [0, 2*pi)."""

    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % TWO_PI)

    @property
    def value(self) -> complex:
        return cmath.exp(1j * self.angle)


def _as_angle(zeta) -> float:
    """Accept a CirclePoint, an angle in radians, or a unimodular complex."""
    if isinstance(zeta, CirclePoint):
        return zeta.angle
    if isinstance(zeta, complex) or isinstance(zeta, np.complexfloating):
        z = complex(zeta)
        if abs(abs(z) - 1.0) > 1e-9:
            raise ValueError(f"not a circle point: |z| = {abs(z)!r}")
        return math.atan2(z.imag, z.real) % TWO_PI
    return float(zeta) % TWO_PI


def circle_grid(count: int, offset: float = 0.0) -> np.ndarray:
    """Equispaced angles ``2*pi*(m + offset)/count``."""
    return TWO_PI * (np.arange(count) + offset) / count


# ---------------------------------------------------------------------------
# zero sequences
# ---------------------------------------------------------------------------

def _van_der_corput(n: int) -> np.ndarray:
    """First n points of the base-2 van der Corput sequence (in [0, 1))."""
    out = np.zeros(n)
    for i in range(n):
        x, denom, k = 0.0, 2.0, i
        while k:
            x += (k & 1) / denom
            k >>= 1
            denom *= 2.0
        out[i] = x
    return out


@dataclass(frozen=True)
class ZeroSequence:
    """Deterministic rule producing zeros in the open unit disk.

    The same (kind, params, seed) always yields the same prefix, whatever
    length is requested, and every rule puts the first zero at the origin.
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    explicit_zeros: tuple = ()

    def __post_init__(self):
        if self.kind not in GENERATOR_TAGS:
            raise ValueError(
                f"unknown generator tag {self.kind!r}; valid tags: {', '.join(GENERATOR_TAGS)}"
            )

    # -- constructors -------------------------------------------------

    @staticmethod
    def uniform_zero() -> "ZeroSequence":
        return ZeroSequence("uniform_zero")

    @staticmethod
    def constant_modulus(r: float, phase_rule: str = "equispaced", seed: int = 0) -> "ZeroSequence":
        return ZeroSequence("constant_modulus", {"r": float(r), "phase_rule": phase_rule}, seed=seed)

    @staticmethod
    def alternating_3k(lam: float) -> "ZeroSequence":
        return ZeroSequence("alternating_3k", {"lam": float(lam)})

    @staticmethod
    def frostman_fast(directions: int = 4) -> "ZeroSequence":
        return ZeroSequence("frostman_fast", {"directions": int(directions)})

    @staticmethod
    def dense_nonblaschke(gamma: float = 0.6180339887) -> "ZeroSequence":
        return ZeroSequence("dense_nonblaschke", {"gamma": float(gamma)})

    @staticmethod
    def from_points(points: Sequence[complex]) -> "ZeroSequence":
        return ZeroSequence("explicit", explicit_zeros=tuple(complex(p) for p in points))

    # -- generation ----------------------------------------------------

    def zeros(self, count: int) -> np.ndarray:
        return generate_zeros(self, count)


def generate_zeros(spec: ZeroSequence, count: int) -> np.ndarray:
    """Produce the first ``count`` zeros of the sequence rule.

    All rules return an array starting with 0 and with every modulus
    strictly below 1 (capped at ``RADIUS_CAP``).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    kind, p = spec.kind, spec.params

    if kind == "uniform_zero":
        lam = np.zeros(count, dtype=complex)

    elif kind == "constant_modulus":
        r = float(p.get("r", 0.5))
        if not 0.0 < r < 1.0:
            raise ValueError(f"constant_modulus needs r in (0,1), got {r}")
        rule = p.get("phase_rule", "equispaced")
        j = np.arange(count)
        if rule == "equispaced":
            # base-2 van der Corput: every prefix of length 2^k is equispaced
            # and extending the sequence never moves earlier points
            phases = TWO_PI * _van_der_corput(count)
        elif rule == "golden":
            phases = TWO_PI * ((j * 0.6180339887498949) % 1.0)
        elif rule == "random":
            rng = np.random.default_rng(spec.seed)
            phases = TWO_PI * rng.random(count)
        else:
            raise ValueError(f"unknown phase_rule {rule!r}")
        lam = np.where(j == 0, 0.0, r * np.exp(1j * phases))

    elif kind == "alternating_3k":
        lam0 = float(p.get("lam", 0.5))
        if not 0.0 < lam0 < 1.0:
            raise ValueError(f"alternating_3k needs lam in (0,1), got {lam0}")
        vals = np.zeros(count, dtype=complex)
        # block rule: indices 3^{k-1} < j <= 3^k carry +lam for odd k,
        # -lam for even k; j = 0 and j = 1 stay at the origin
        for j in range(2, count):
            k, hi = 1, 3
            while j > hi:
                k += 1
                hi *= 3
            vals[j] = lam0 if k % 2 == 1 else -lam0
        lam = vals

    elif kind == "frostman_fast":
        ndir = int(p.get("directions", 4))
        if ndir < 1:
            raise ValueError("frostman_fast needs directions >= 1")
        j = np.arange(count)
        rad = np.minimum(1.0 - (j + 1.0) ** -4, RADIUS_CAP)
        ang = TWO_PI * (j % ndir) / ndir
        lam = rad * np.exp(1j * ang)

    elif kind == "dense_nonblaschke":
        gamma = float(p.get("gamma", 0.6180339887))
        j = np.arange(count)
        rad = np.minimum(1.0 - 1.0 / (j + 1.0), RADIUS_CAP)
        lam = rad * np.exp(1j * TWO_PI * ((j * gamma) % 1.0))

    elif kind == "explicit":
        pts = np.asarray(spec.explicit_zeros, dtype=complex)
        if len(pts) < count:
            raise ValueError(f"explicit sequence has {len(pts)} zeros, {count} requested")
        lam = pts[:count].copy()

    else:  # pragma: no cover - guarded in __post_init__
        raise ValueError(f"unknown generator tag {kind!r}")

    if abs(lam[0]) != 0.0:
        raise ValueError("sequence must start at the origin")
    mods = np.abs(lam)
    if mods.max(initial=0.0) >= 1.0:
        raise ValueError("zeros must lie strictly inside the unit disk")
    return lam


# ---------------------------------------------------------------------------
# finite Blaschke products
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FiniteBlaschke:
    """Degree-N Blaschke product given by its zero list (first zero at 0)."""

    zeros: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.zeros, dtype=complex)
        if z.ndim != 1 or len(z) == 0:
            raise ValueError("zeros must be a non-empty 1-d array")
        if np.abs(z).max() >= 1.0:
            raise ValueError("all zeros must satisfy |lambda| < 1")
        object.__setattr__(self, "zeros", z)
        r = np.abs(z)
        sigma = np.ones(len(z), dtype=complex)
        nz = r > 0
        sigma[nz] = np.conj(z[nz]) / r[nz]
        object.__setattr__(self, "_radii", r)
        object.__setattr__(self, "_phases", np.angle(z))
        object.__setattr__(self, "_sigma", sigma)
        object.__setattr__(self, "_cnorm", np.sqrt(1.0 - r * r))
        uniq, counts = np.unique(z, return_counts=True)
        object.__setattr__(self, "_distinct", (uniq, counts))

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def vanishes_at_origin(self) -> bool:
        return bool(np.abs(self.zeros).min() == 0.0)

    @classmethod
    def from_sequence(cls, spec: ZeroSequence, degree: int) -> "FiniteBlaschke":
        return cls(generate_zeros(spec, degree))

    def __repr__(self):
        return f"FiniteBlaschke(degree={self.degree})"


def eval_blaschke(B: FiniteBlaschke, w: complex) -> complex:
    """Evaluate the product at a point of the closed disk."""
    w = complex(w)
    if abs(w) > 1.0 + 1e-12:
        raise ValueError(f"point outside the closed disk: |w| = {abs(w)}")
    vals = B._sigma * (w - B.zeros) / (1.0 - np.conj(B.zeros) * w)
    return complex(np.prod(vals))


def eval_blaschke_grid(B: FiniteBlaschke, angles: np.ndarray) -> np.ndarray:
    """Values of B at e^{i angles} (vectorized over angles)."""
    z = np.exp(1j * np.asarray(angles, dtype=float))
    out = np.ones_like(z)
    for j in range(B.degree):
        lam = B.zeros[j]
        out *= B._sigma[j] * (z - lam) / (1.0 - np.conj(lam) * z)
    return out


def abs_derivative_grid(B: FiniteBlaschke, angles: np.ndarray,
                        cos_sin: tuple | None = None) -> np.ndarray:
    """|B'| on the circle: sum of Poisson kernels at the zeros.

    The squared distance to each zero is formed from Cartesian coordinates
    (never from 1 + r^2 - 2r cos, which cancels catastrophically for zeros
    within ~1e-8 of the circle).  Repeated zeros are folded into one pass
    with a multiplicity weight; scratch buffers are reused across zeros, so
    the cost is six in-place vector passes per distinct zero.
    """
    th = np.asarray(angles, dtype=float)
    cos_t, sin_t = cos_sin if cos_sin is not None else (np.cos(th), np.sin(th))
    uniq, counts = B._distinct
    out = np.zeros_like(th)
    dx = np.empty_like(th)
    dy = np.empty_like(th)
    for lam, mult in zip(uniq, counts):
        r2 = lam.real * lam.real + lam.imag * lam.imag
        if r2 == 0.0:
            out += float(mult)
            continue
        np.subtract(cos_t, lam.real, out=dx)
        np.multiply(dx, dx, out=dx)
        np.subtract(sin_t, lam.imag, out=dy)
        np.multiply(dy, dy, out=dy)
        np.add(dx, dy, out=dx)
        np.divide(mult * (1.0 - r2), dx, out=dx)
        np.add(out, dx, out=out)
    return out


def abs_derivative_boundary(B: FiniteBlaschke, zeta) -> float:
    """|B'(zeta)| for zeta on the circle (always finite for finite products)."""
    th = _as_angle(zeta)
    return float(abs_derivative_grid(B, np.array([th]))[0])


def nu_density(B: FiniteBlaschke, zeta) -> float:
    """Density of the mean of the harmonic measures at the zeros: |B'|/N."""
    return abs_derivative_boundary(B, zeta) / B.degree


def nu_density_grid(B: FiniteBlaschke, angles: np.ndarray) -> np.ndarray:
    return abs_derivative_grid(B, angles) / B.degree


def beta_density(B: FiniteBlaschke, zeta) -> float:
    """Reciprocal angular derivative 1/|B'|; lies in (0, 1] when B(0) = 0."""
    return 1.0 / abs_derivative_boundary(B, zeta)


def beta_density_grid(B: FiniteBlaschke, angles: np.ndarray) -> np.ndarray:
    return 1.0 / abs_derivative_grid(B, angles)


# ---------------------------------------------------------------------------
# kernels and the orthonormal basis
# ---------------------------------------------------------------------------

def szego_kernel(lam: complex, w: complex) -> complex:
    """Cauchy kernel 1/(1 - conj(lam) w)."""
    lam, w = complex(lam), complex(w)
    if abs(lam) >= 1.0:
        raise ValueError("kernel parameter must lie inside the disk")
    return 1.0 / (1.0 - lam.conjugate() * w)


def szego_kernel_normalized(lam: complex, w: complex) -> complex:
    """Unit-norm Cauchy kernel sqrt(1-|lam|^2)/(1 - conj(lam) w)."""
    lam = complex(lam)
    return math.sqrt(1.0 - abs(lam) ** 2) * szego_kernel(lam, w)


def model_kernel(B: FiniteBlaschke, lam, w) -> complex:
    """Reproducing kernel of the model space at lam, evaluated at w.

    lam may lie inside the disk or on the circle; the diagonal boundary
    value (lam = w on the circle) is the angular derivative |B'(lam)|.
    """
    lam, w = complex(lam), complex(w)
    if abs(lam) > 1.0 + 1e-12:
        raise ValueError("kernel parameter outside the closed disk")
    if abs(lam - w) < 1e-14 and abs(abs(lam) - 1.0) < 1e-12:
        return complex(abs_derivative_boundary(B, lam))
    Bl = eval_blaschke(B, lam)
    Bw = eval_blaschke(B, w)
    return (1.0 - Bl.conjugate() * Bw) / (1.0 - lam.conjugate() * w)


def model_kernel_sq_grid(B: FiniteBlaschke, zeta, angles: np.ndarray,
                         b_values: np.ndarray | None = None) -> np.ndarray:
    """|normalized model kernel at zeta|^2 on a circle grid.

    ``b_values`` may carry precomputed B(e^{i angles}).  Grid points that
    collide with zeta get the removable-singularity value |B'(zeta)|.
    """
    th0 = _as_angle(zeta)
    z0 = cmath.exp(1j * th0)
    z = np.exp(1j * np.asarray(angles, dtype=float))
    Bz = eval_blaschke_grid(B, np.asarray(angles, dtype=float)) if b_values is None else b_values
    B0 = eval_blaschke_grid(B, np.array([th0]))[0]
    dprime = abs_derivative_boundary(B, th0)
    dist2 = np.abs(z - z0) ** 2
    num = np.abs(B0 - Bz) ** 2
    out = np.empty_like(dist2)
    tiny = dist2 < 1e-24
    np.divide(num, dist2 * dprime, out=out, where=~tiny)
    out[tiny] = dprime
    return out


def tmw_matrix(B: FiniteBlaschke, angles: np.ndarray) -> np.ndarray:
    """Orthonormal-basis sample matrix E with E[m, i] = e_i(e^{i angles[m]}).

    Basis functions are partial products times normalized Cauchy kernels:
    e_i = (b_0 ... b_{i-1}) * sqrt(1-|lam_i|^2)/(1 - conj(lam_i) z).
    """
    z = np.exp(1j * np.asarray(angles, dtype=float))
    N = B.degree
    E = np.empty((len(z), N), dtype=complex)
    pref = np.ones_like(z)
    for i in range(N):
        lam = B.zeros[i]
        denom = 1.0 - np.conj(lam) * z
        E[:, i] = pref * (B._cnorm[i] / denom)
        pref = pref * (B._sigma[i] * (z - lam) / denom)
    return E


def tmw_basis_eval(B: FiniteBlaschke, j: int, zeta) -> complex:
    """Value of basis function j at a circle point."""
    if not 0 <= j < B.degree:
        raise IndexError(f"basis index {j} out of range for degree {B.degree}")
    th = _as_angle(zeta)
    return complex(tmw_matrix(B, np.array([th]))[0, j])


def tmw_kernel_coeffs(B: FiniteBlaschke, angles: np.ndarray) -> np.ndarray:
    """Coefficient vectors of the boundary kernels k_zeta in the basis.

    Row m holds conj(e_i(zeta_m)): the reproducing property makes these the
    expansion coefficients, no integration required.
    """
    return np.conj(tmw_matrix(B, angles))


# ---------------------------------------------------------------------------
# partial angular sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AngularDiagnostics:
    """Running Poisson-kernel sums along a zero sequence, per grid point.

    ``checkpoints`` are term counts (powers of two up to J, then J itself);
    ``partial_sums[p, c]`` is the sum of the first checkpoints[c] terms at
    grid point p.  ``first_crossing[t][p]`` is the smallest term count at
    which the running sum at point p exceeds thresholds[t], or -1.
    """

    grid: np.ndarray            # angles
    checkpoints: np.ndarray     # term counts
    partial_sums: np.ndarray    # (len(grid), len(checkpoints))
    thresholds: tuple
    first_crossing: np.ndarray  # (len(thresholds), len(grid)), -1 = not crossed


def angular_partial_sums(seq: ZeroSequence, grid, J: int,
                         thresholds: Sequence[float] = (1e2, 1e3)) -> AngularDiagnostics:
    """Accumulate sum_j (1-|lam_j|^2)/|zeta - lam_j|^2 over j < J per grid point."""
    if J < 1:
        raise ValueError("J must be >= 1")
    angles = np.asarray([_as_angle(g) for g in grid], dtype=float) if not isinstance(grid, np.ndarray) \
        else np.asarray(grid, dtype=float)
    if len(angles) == 0:
        raise ValueError("empty grid")
    z = np.exp(1j * angles)
    lam = generate_zeros(seq, J)

    checkpoints = [1]
    while checkpoints[-1] * 2 <= J:
        checkpoints.append(checkpoints[-1] * 2)
    if checkpoints[-1] != J:
        checkpoints.append(J)
    checkpoints = np.asarray(checkpoints)

    P = len(angles)
    sums = np.zeros(P)
    partial = np.zeros((P, len(checkpoints)))
    thresholds = tuple(float(t) for t in thresholds)
    crossing = np.full((len(thresholds), P), -1, dtype=int)

    block = 4096
    next_cp = 0
    for start in range(0, J, block):
        lam_b = lam[start:start + block]
        terms = (1.0 - np.abs(lam_b) ** 2)[None, :] / np.abs(z[:, None] - lam_b[None, :]) ** 2
        running = sums[:, None] + np.cumsum(terms, axis=1)
        for t, bound in enumerate(thresholds):
            for pidx in np.nonzero(crossing[t] < 0)[0]:
                hits = np.nonzero(running[pidx] > bound)[0]
                if len(hits):
                    crossing[t, pidx] = start + hits[0] + 1
        while next_cp < len(checkpoints) and checkpoints[next_cp] <= start + len(lam_b):
            partial[:, next_cp] = running[:, checkpoints[next_cp] - start - 1]
            next_cp += 1
        sums = running[:, -1]

    return AngularDiagnostics(angles, checkpoints, partial, thresholds, crossing)
