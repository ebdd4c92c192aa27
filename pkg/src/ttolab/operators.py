"""Dense realizations of truncated Toeplitz operators on finite model spaces.

All matrices are written in the Takenaka-Malmquist-Walsh basis of the model
space of a finite Blaschke product.  The compressed shift has a closed-form
lower-triangular-plus-spike matrix in this basis; trigonometric-polynomial
symbols are therefore built exactly from its powers, while general sampled
symbols fall back to shared-grid circle quadrature.  Functions of Hermitian
matrices go through a cyclic complex Jacobi eigensolver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .blaschke import (
    FiniteBlaschke,
    _as_angle,
    abs_derivative_grid,
    model_kernel_sq_grid,
    tmw_kernel_coeffs,
    tmw_matrix,
)
from .clark import ClarkMeasure
from .quadrature import QuadratureConfig, blaschke_initial_points, integrate_circle

_HERMITIAN_RTOL = 1e-8


# ---------------------------------------------------------------------------
# symbols
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolRep:
    """A bounded function on the circle.

    Either a trigonometric polynomial (coeffs maps frequency k to c_k) or a
    vectorized sampler of angles.  ``is_real`` marks real-valued symbols,
    which unlocks continuous (non-polynomial) functional calculus downstream.
    """

    coeffs: tuple = ()
    sampler: Callable | None = None
    is_real: bool = False
    name: str = ""

    @staticmethod
    def trig(coeffs: Mapping[int, complex], name: str = "") -> "SymbolRep":
        items = tuple(sorted((int(k), complex(v)) for k, v in coeffs.items() if v != 0))
        d = dict(items)
        real = all(d.get(-k, 0j) == v.conjugate() for k, v in d.items())
        return SymbolRep(coeffs=items, is_real=real, name=name)

    @staticmethod
    def from_sampler(fn: Callable, real: bool = False, name: str = "") -> "SymbolRep":
        return SymbolRep(sampler=fn, is_real=real, name=name)

    @staticmethod
    def constant(c: complex) -> "SymbolRep":
        return SymbolRep.trig({0: c}, name=f"const({c})")

    @staticmethod
    def preset(name: str) -> "SymbolRep":
        if name == "cos":  # z + conj(z), the classical tridiagonal example
            return SymbolRep.trig({1: 1.0, -1: 1.0}, name=name)
        if name == "re_z":
            return SymbolRep.trig({1: 0.5, -1: 0.5}, name=name)
        if name == "z":
            return SymbolRep.trig({1: 1.0}, name=name)
        if name == "abs_sin":
            return SymbolRep.from_sampler(lambda t: np.abs(np.sin(t)), real=True, name=name)
        raise ValueError(f"unknown symbol preset {name!r}")

    @property
    def is_trig(self) -> bool:
        return self.sampler is None

    @property
    def coeff_dict(self) -> dict:
        return dict(self.coeffs)

    def evaluate(self, angles) -> np.ndarray:
        th = np.asarray(angles, dtype=float)
        if self.sampler is not None:
            return np.asarray(self.sampler(th))
        return self.evaluate_at(np.exp(1j * th))

    def evaluate_at(self, w: np.ndarray) -> np.ndarray:
        """Trig-poly value at given unimodular points (skips the angle->point map)."""
        if not self.is_trig:
            raise ValueError("evaluate_at applies to trig-poly symbols only")
        out = np.zeros_like(np.asarray(w, dtype=complex))
        for k, c in self.coeffs:
            out = out + c * w ** k
        return out

    def __mul__(self, other: "SymbolRep") -> "SymbolRep":
        if not (self.is_trig and other.is_trig):
            raise ValueError("can only multiply trig-poly symbols")
        prod: dict = {}
        for k1, c1 in self.coeffs:
            for k2, c2 in other.coeffs:
                prod[k1 + k2] = prod.get(k1 + k2, 0j) + c1 * c2
        return SymbolRep.trig(prod, name=f"({self.name})*({other.name})")

    def __add__(self, other: "SymbolRep") -> "SymbolRep":
        if not (self.is_trig and other.is_trig):
            raise ValueError("can only add trig-poly symbols")
        s = self.coeff_dict
        for k, c in other.coeffs:
            s[k] = s.get(k, 0j) + c
        return SymbolRep.trig(s, name=f"({self.name})+({other.name})")

    def scaled(self, c: complex) -> "SymbolRep":
        if not self.is_trig:
            raise ValueError("can only scale trig-poly symbols")
        return SymbolRep.trig({k: c * v for k, v in self.coeffs}, name=self.name)


def inverse_derivative_symbol(B: FiniteBlaschke) -> SymbolRep:
    """The weight 1/|B'| as a (real, smooth) sampled symbol."""
    return SymbolRep.from_sampler(lambda t: 1.0 / abs_derivative_grid(B, t),
                                  real=True, name=f"1/|B'| (deg {B.degree})")


# ---------------------------------------------------------------------------
# scalar functions applied to operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarFunction:
    """Function applied to an operator: a polynomial (any matrix) or a
    pointwise map (Hermitian matrices only, via eigenvalues)."""

    poly_coeffs: tuple = ()
    pointwise: Callable | None = None
    name: str = ""

    @staticmethod
    def poly(coeffs: Sequence[complex], name: str = "") -> "ScalarFunction":
        c = tuple(complex(v) for v in coeffs)
        while len(c) > 1 and c[-1] == 0:
            c = c[:-1]
        return ScalarFunction(poly_coeffs=c, name=name or f"poly{list(coeffs)}")

    @staticmethod
    def from_pointwise(fn: Callable, name: str = "") -> "ScalarFunction":
        return ScalarFunction(pointwise=fn, name=name)

    @staticmethod
    def preset(name: str) -> "ScalarFunction":
        table = {
            "identity": [0, 1],
            "square": [0, 0, 1],
            "cube": [0, 0, 0, 1],
            "cube_minus_x": [0, -1, 0, 1],
        }
        if name in table:
            return ScalarFunction.poly(table[name], name=name)
        if name == "abs":
            return ScalarFunction.from_pointwise(np.abs, name=name)
        if name == "exp":
            return ScalarFunction.from_pointwise(np.exp, name=name)
        raise ValueError(f"unknown function preset {name!r}")

    @property
    def is_poly(self) -> bool:
        return self.pointwise is None

    def eval_scalar(self, x):
        if self.pointwise is not None:
            return self.pointwise(x)
        out = np.zeros_like(np.asarray(x, dtype=complex))
        for c in reversed(self.poly_coeffs):
            out = out * x + c
        return out

    def compose_symbol(self, sym: SymbolRep) -> SymbolRep:
        """Symbol of f(phi): exact for polynomial f and trig-poly phi."""
        if self.is_poly and sym.is_trig:
            acc = SymbolRep.constant(0.0)
            for c in reversed(self.poly_coeffs):
                acc = acc * sym + SymbolRep.constant(c)
            return SymbolRep.trig(acc.coeff_dict, name=f"{self.name}({sym.name})")
        if not sym.is_real:
            raise ValueError("pointwise functions require a real-valued symbol")

        def sampler(angles):
            vals = np.real(sym.evaluate(angles))
            return np.asarray(self.eval_scalar(vals))
        return SymbolRep.from_sampler(sampler, real=True, name=f"{self.name}({sym.name})")


# ---------------------------------------------------------------------------
# operator matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense matrix in the orthonormal basis attached to a Blaschke product."""

    matrix: np.ndarray
    basis: FiniteBlaschke
    converged: bool = True
    estimated_error: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrix must be square")
        if m.shape[0] != self.basis.degree:
            raise ValueError("matrix dimension must match the Blaschke degree")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator matrix has non-finite entries")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def compressed_shift(B: FiniteBlaschke) -> np.ndarray:
    """Matrix of the compression of multiplication by z, in closed form.

    Lower triangular: diagonal carries the zeros; below the diagonal
    entry (i, j) is c_i c_j conj(sigma_j) prod_{j<l<i} (-|lambda_l|) with
    c = sqrt(1-|lambda|^2) and sigma the unimodular factor normalizers.
    """
    N = B.degree
    c, sig, r = B._cnorm, B._sigma, B._radii
    S = np.zeros((N, N), dtype=complex)
    np.fill_diagonal(S, B.zeros)
    for j in range(N):
        p = 1.0
        for i in range(j + 1, N):
            S[i, j] = c[i] * c[j] * np.conj(sig[j]) * p
            p *= -r[i]
    return S


def _toeplitz_trig(B: FiniteBlaschke, sym: SymbolRep) -> np.ndarray:
    """Exact compression of a trig-poly symbol via powers of the shift."""
    N = B.degree
    S = compressed_shift(B)
    dmax = max((abs(k) for k, _ in sym.coeffs), default=0)
    powers = [np.eye(N, dtype=complex)]
    for _ in range(dmax):
        powers.append(powers[-1] @ S)
    T = np.zeros((N, N), dtype=complex)
    for k, ck in sym.coeffs:
        T += ck * (powers[k] if k >= 0 else powers[-k].conj().T)
    if sym.is_real:
        T = 0.5 * (T + T.conj().T)
    return T


def _toeplitz_quadrature(B: FiniteBlaschke, sym: SymbolRep, cfg: QuadratureConfig):
    """Shared-grid quadrature: one basis-sample matrix per refinement level,
    all N^2 inner products formed as a single Gram product."""
    N = B.degree
    chunk = max(1024, (1 << 22) // max(N, 4))

    def level(M: int, offset: float) -> np.ndarray:
        acc = np.zeros((N, N), dtype=complex)
        for start in range(0, M, chunk):
            stop = min(start + chunk, M)
            angles = 2.0 * np.pi * (np.arange(start, stop) + offset) / M
            E = tmw_matrix(B, angles)
            vals = np.asarray(sym.evaluate(angles))
            if not np.all(np.isfinite(vals)):
                raise ValueError("non-finite symbol sample")
            if sym.is_real and np.iscomplexobj(vals) and np.abs(vals.imag).max() > 1e-12:
                raise ValueError("symbol flagged real but samples are complex")
            acc += (E.conj().T * vals) @ E
        return acc / M

    M = max(blaschke_initial_points(B, cfg), cfg.initial_points)
    T = level(M, 0.0)
    converged, err = False, float("inf")
    while True:
        if 2 * M > cfg.max_points:
            break
        T2 = 0.5 * (T + level(M, 0.5))
        M *= 2
        err = float(np.abs(T2 - T).max())
        T = T2
        scale = float(np.abs(T).max())
        if err <= max(cfg.abs_tol, cfg.rel_tol * scale):
            converged = True
            break
    if sym.is_real:
        T = 0.5 * (T + T.conj().T)
    return T, converged, err


def build_truncated_toeplitz(B: FiniteBlaschke, sym: SymbolRep,
                             cfg: QuadratureConfig = QuadratureConfig()) -> OperatorMatrix:
    """Compression of multiplication by the symbol to the model space.

    Trig-poly symbols are assembled exactly from shift powers (the analytic
    and anti-analytic parts compress to S^k and its adjoint); sampled symbols
    use adaptively refined shared-grid quadrature.
    """
    if sym.is_trig:
        return OperatorMatrix(_toeplitz_trig(B, sym), B)
    T, converged, err = _toeplitz_quadrature(B, sym, cfg)
    return OperatorMatrix(T, B, converged=converged, estimated_error=err)


def trace_formula_rhs(B: FiniteBlaschke, sym: SymbolRep,
                      cfg: QuadratureConfig = QuadratureConfig()):
    """Quadrature of symbol * |B'| over the circle (equals the operator trace)."""
    def sampler(angles):
        cos_t, sin_t = np.cos(angles), np.sin(angles)
        deriv = abs_derivative_grid(B, angles, cos_sin=(cos_t, sin_t))
        if sym.is_trig:
            vals = sym.evaluate_at(cos_t + 1j * sin_t)
        else:
            vals = np.asarray(sym.evaluate(angles))
        return vals * deriv
    return integrate_circle(sampler, cfg, initial_points=blaschke_initial_points(B, cfg))


# ---------------------------------------------------------------------------
# Clark unitaries
# ---------------------------------------------------------------------------

def _clark_rank_one_vectors(B: FiniteBlaschke):
    """Coefficient vectors of the constant 1 and of conj(z)B in the basis."""
    N = B.degree
    u = np.zeros(N, dtype=complex)
    u[0] = 1.0
    v = np.empty(N, dtype=complex)
    p = 1.0
    for j in range(N - 1, -1, -1):
        v[j] = B._cnorm[j] * B._sigma[j] * p
        p *= -B._radii[j]
    return u, v


def build_clark_unitary(B: FiniteBlaschke, alpha: complex,
                        cfg: QuadratureConfig | None = None) -> OperatorMatrix:
    """Rank-one unitary perturbation of the compressed shift at parameter alpha."""
    alpha = complex(alpha)
    if abs(abs(alpha) - 1.0) > 1e-12:
        raise ValueError("alpha must be unimodular")
    if not B.vanishes_at_origin:
        raise ValueError("Clark construction here requires a zero at the origin")
    u, v = _clark_rank_one_vectors(B)
    U = compressed_shift(B) + alpha * np.outer(u, v.conj())
    return OperatorMatrix(U, B)


def build_clark_spectral(B: FiniteBlaschke, clark: ClarkMeasure,
                         symbol: SymbolRep | None = None) -> OperatorMatrix:
    """Spectral-sum form: sum over atoms of value * weight * (kernel projector).

    With no symbol this reproduces the Clark unitary itself; with a symbol it
    is the functional calculus of the unitary applied to that symbol.
    """
    if not np.array_equal(clark.blaschke.zeros, B.zeros):
        raise ValueError("Clark measure was built for a different product")
    Q = tmw_kernel_coeffs(B, clark.atom_angles)  # row k = coefficients of k_{zeta_k}
    vals = clark.atoms if symbol is None else np.asarray(symbol.evaluate(clark.atom_angles))
    scale = vals * clark.weights
    M = (Q.T * scale) @ Q.conj()
    return OperatorMatrix(M, B)


# ---------------------------------------------------------------------------
# Hermitian eigensolver (cyclic complex Jacobi)
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def jacobi_eigh(H: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60):
    """Eigendecomposition of a Hermitian matrix by cyclic two-sided rotations.

    Returns (eigenvalues ascending, unitary eigenvector matrix).  Each sweep
    zeroes every off-diagonal entry once; sweeps repeat until the off-diagonal
    Frobenius mass falls below tol times the matrix norm.
    """
    A = np.array(H, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    norm = float(np.linalg.norm(A))
    if n == 1 or norm == 0.0:
        return np.real(np.diag(A)).copy(), V
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                tau = (A[q, q].real - A[p, p].real) / (2.0 * mag)
                t = 1.0 if tau == 0.0 else math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                # rotation R = diag(1, conj(phase)) . [[c, s], [-s, c]]
                R = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                A[:, [p, q]] = A[:, [p, q]] @ R
                A[[p, q], :] = R.conj().T @ A[[p, q], :]
                V[:, [p, q]] = V[:, [p, q]] @ R
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
    w = np.real(np.diag(A))
    order = np.argsort(w)
    return w[order], V[:, order]


def spectral_data(A: OperatorMatrix, tol: float = 1e-12) -> SpectralData:
    _require_hermitian(A.matrix)
    w, V = jacobi_eigh(0.5 * (A.matrix + A.matrix.conj().T), tol=tol)
    return SpectralData(w, V)


def _require_hermitian(M: np.ndarray):
    scale = float(np.linalg.norm(M))
    if scale > 0 and float(np.linalg.norm(M - M.conj().T)) > _HERMITIAN_RTOL * scale:
        raise ValueError("pointwise functional calculus needs a Hermitian matrix")


def apply_function(A: OperatorMatrix, f: ScalarFunction) -> OperatorMatrix:
    """f(A): Horner for polynomial f, eigenvalue map for pointwise f."""
    M = A.matrix
    if f.is_poly:
        n = M.shape[0]
        out = np.zeros_like(M)
        ident = np.eye(n, dtype=complex)
        for c in reversed(f.poly_coeffs):
            out = out @ M + c * ident
        return OperatorMatrix(out, A.basis)
    _require_hermitian(M)
    w, V = jacobi_eigh(0.5 * (M + M.conj().T))
    fw = np.asarray(f.eval_scalar(w), dtype=complex)
    return OperatorMatrix((V * fw) @ V.conj().T, A.basis)


# ---------------------------------------------------------------------------
# traces and Schatten norms
# ---------------------------------------------------------------------------

def trace(A: OperatorMatrix) -> complex:
    return complex(np.trace(A.matrix))


def hs_norm(A: OperatorMatrix) -> float:
    return float(np.linalg.norm(A.matrix))


def singular_values(A: OperatorMatrix) -> np.ndarray:
    """Singular values (descending) via the Jacobi eigenvalues of A*A."""
    M = A.matrix
    w, _ = jacobi_eigh(M.conj().T @ M)
    return np.sqrt(np.clip(w, 0.0, None))[::-1]


def trace_norm(A: OperatorMatrix) -> float:
    return float(singular_values(A).sum())


def op_norm(A: OperatorMatrix) -> float:
    return float(singular_values(A)[0])


def rank_one_defect(B: FiniteBlaschke, cfg: QuadratureConfig | None = None) -> OperatorMatrix:
    """I minus (compressed shift times its adjoint): the projector onto
    constants whenever the product vanishes at the origin."""
    if not B.vanishes_at_origin:
        raise ValueError("defect identity requires a zero at the origin")
    S = compressed_shift(B)
    return OperatorMatrix(np.eye(B.degree, dtype=complex) - S @ S.conj().T, B)


# ---------------------------------------------------------------------------
# averaging (Fejer-type) operator
# ---------------------------------------------------------------------------

def fejer_apply(B: FiniteBlaschke, f, zeta, cfg: QuadratureConfig = QuadratureConfig()):
    """Average of f against the squared normalized boundary kernel at zeta."""
    th0 = _as_angle(zeta)

    def sampler(angles):
        vals = np.asarray(f(angles)) if callable(f) else np.asarray(f.evaluate(angles))
        return vals * model_kernel_sq_grid(B, th0, angles)

    return integrate_circle(sampler, cfg, initial_points=blaschke_initial_points(B, cfg))


def fejer_values(B: FiniteBlaschke, toeplitz: OperatorMatrix, angles: np.ndarray) -> np.ndarray:
    """Fast route to the averaging operator on a grid of angles.

    The average of f against |normalized kernel at zeta|^2 equals the
    quadratic form of the compressed symbol at the normalized kernel, so one
    operator build gives the averaged function everywhere.
    """
    E = tmw_matrix(B, angles)
    num = np.einsum("mi,ij,mj->m", E, toeplitz.matrix, np.conj(E), optimize=True)
    return num / abs_derivative_grid(B, angles)
