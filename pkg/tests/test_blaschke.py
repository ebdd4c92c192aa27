import numpy as np
import pytest

from ttolab.blaschke import (
    CirclePoint,
    FiniteBlaschke,
    ZeroSequence,
    abs_derivative_boundary,
    abs_derivative_grid,
    angular_partial_sums,
    beta_density,
    beta_density_grid,
    circle_grid,
    eval_blaschke,
    eval_blaschke_grid,
    generate_zeros,
    model_kernel,
    model_kernel_sq_grid,
    nu_density,
    szego_kernel,
    szego_kernel_normalized,
    tmw_basis_eval,
    tmw_matrix,
)
from ttolab.clark import PhaseFunction
from ttolab.quadrature import QuadratureConfig, integrate_circle, nu_integral

ALL_GENERATORS = [
    ZeroSequence.uniform_zero(),
    ZeroSequence.constant_modulus(0.5),
    ZeroSequence.constant_modulus(0.7, "random", seed=3),
    ZeroSequence.alternating_3k(0.5),
    ZeroSequence.frostman_fast(4),
    ZeroSequence.dense_nonblaschke(),
]


class TestCirclePoint:
    def test_angle_normalized(self):
        assert CirclePoint(2 * np.pi + 0.5).angle == pytest.approx(0.5)
        assert CirclePoint(-0.5).angle == pytest.approx(2 * np.pi - 0.5)

    def test_value_unimodular(self):
        p = CirclePoint(1.1)
        assert abs(abs(p.value) - 1) < 1e-12
        assert p.value == pytest.approx(np.exp(1.1j))


class TestGenerators:
    def test_uniform_zero(self):
        assert np.array_equal(generate_zeros(ZeroSequence.uniform_zero(), 4), np.zeros(4))

    def test_alternating_blocks(self):
        lam = generate_zeros(ZeroSequence.alternating_3k(0.5), 28)
        # j = 0, 1 pinned at the origin; first block {2,3} positive,
        # second block {4..9} negative, third block {10..27} positive
        assert lam[0] == 0 and lam[1] == 0
        assert np.all(lam[2:4] == 0.5)
        assert np.all(lam[4:10] == -0.5)
        assert np.all(lam[10:28] == 0.5)

    def test_alternating_truncation(self):
        assert list(generate_zeros(ZeroSequence.alternating_3k(0.5), 3)) == [0, 0, 0.5]

    def test_dense_formula(self):
        g = 0.6180339887
        lam = generate_zeros(ZeroSequence.dense_nonblaschke(g), 2)
        assert lam[0] == 0
        assert lam[1] == pytest.approx(0.5 * np.exp(2j * np.pi * g), abs=1e-15)

    def test_frostman_radii(self):
        lam = generate_zeros(ZeroSequence.frostman_fast(4), 100)
        r = np.abs(lam)
        assert r[0] == 0
        assert r[5] == pytest.approx(1 - 6.0 ** -4)
        assert r.max() <= 1 - 1e-6  # capped

    def test_prefix_stability_and_determinism(self):
        for seq in ALL_GENERATORS:
            a = generate_zeros(seq, 8)
            b = generate_zeros(seq, 16)
            assert np.array_equal(a, b[:8])
            assert np.array_equal(generate_zeros(seq, 16), b)

    def test_invariants(self):
        for seq in ALL_GENERATORS:
            lam = generate_zeros(seq, 64)
            assert lam[0] == 0
            assert np.abs(lam).max() < 1

    def test_errors(self):
        with pytest.raises(ValueError):
            generate_zeros(ZeroSequence.uniform_zero(), 0)
        with pytest.raises(ValueError):
            generate_zeros(ZeroSequence.constant_modulus(1.0), 4)
        with pytest.raises(ValueError, match="unknown generator"):
            ZeroSequence("no_such_rule")

    def test_explicit(self):
        seq = ZeroSequence.from_points([0, 0.5, 0.3j])
        assert generate_zeros(seq, 2)[1] == 0.5
        with pytest.raises(ValueError):
            generate_zeros(seq, 5)


class TestEvaluation:
    def test_power(self):
        B = FiniteBlaschke(np.zeros(3, dtype=complex))
        assert eval_blaschke(B, 0.5) == pytest.approx(0.125)

    def test_zeros_are_roots(self):
        B = FiniteBlaschke(np.array([0, 0.5, 0.3j]))
        for lam in B.zeros:
            assert abs(eval_blaschke(B, lam)) < 1e-14

    def test_unimodular_on_circle(self):
        for seq in ALL_GENERATORS:
            B = FiniteBlaschke(generate_zeros(seq, 12))
            vals = eval_blaschke_grid(B, circle_grid(257, offset=0.13))
            assert np.abs(np.abs(vals) - 1).max() < 1e-10

    def test_boundary_value_modulus(self):
        B = FiniteBlaschke(np.array([0, 0.5]))
        assert abs(abs(eval_blaschke(B, 1.0)) - 1) < 1e-12

    def test_outside_disk_rejected(self):
        B = FiniteBlaschke(np.array([0j]))
        with pytest.raises(ValueError):
            eval_blaschke(B, 1.5)

    def test_degree_and_origin(self):
        B = FiniteBlaschke(np.array([0, 0.5]))
        assert B.degree == 2
        assert eval_blaschke(B, 0) == 0


class TestAngularDerivative:
    def test_power_case(self):
        B = FiniteBlaschke(np.zeros(7, dtype=complex))
        assert abs_derivative_boundary(B, 0.3) == pytest.approx(7.0)

    def test_hand_values(self):
        B = FiniteBlaschke(np.array([0, 0.5]))
        assert abs_derivative_boundary(B, 0.0) == pytest.approx(4.0)
        assert abs_derivative_boundary(B, np.pi) == pytest.approx(4.0 / 3.0)

    def test_matches_phase_derivative(self):
        # centered difference of the unwrapped phase at step 1e-5
        B = FiniteBlaschke(generate_zeros(ZeroSequence.constant_modulus(0.6, "random", seed=1), 9))
        phase = PhaseFunction(B)
        h = 1e-5
        for th in (0.2, 1.7, 4.4):
            fd = (phase(th + h) - phase(th - h))[0] / (2 * h)
            assert fd == pytest.approx(abs_derivative_boundary(B, th), abs=1e-6)

    def test_circle_point_argument(self):
        B = FiniteBlaschke(np.array([0, 0.5]))
        assert abs_derivative_boundary(B, CirclePoint(0.0)) == pytest.approx(4.0)
        assert abs_derivative_boundary(B, 1.0 + 0j) == pytest.approx(4.0)


class TestDensities:
    def test_nu_constant_for_power(self):
        B = FiniteBlaschke(np.zeros(5, dtype=complex))
        assert nu_density(B, 1.2) == pytest.approx(1.0)

    def test_nu_total_mass(self):
        B = FiniteBlaschke(np.array([0, 0.5]))
        res = nu_integral(lambda t: np.ones_like(t), B)
        assert res.converged
        assert res.value.real == pytest.approx(1.0, abs=1e-10)

    def test_nu_first_moment(self):
        # integral of zeta against the density equals the mean of the zeros
        B = FiniteBlaschke(np.array([0, 0.5]))
        res = nu_integral(lambda t: np.exp(1j * t), B)
        assert res.value == pytest.approx(0.25, abs=1e-10)

    def test_beta_values(self):
        B = FiniteBlaschke(np.zeros(4, dtype=complex))
        assert beta_density(B, 0.0) == pytest.approx(0.25)
        B2 = FiniteBlaschke(np.array([0, 0.5]))
        assert beta_density(B2, 0.0) == pytest.approx(0.25)

    def test_beta_bounded_by_one(self):
        grid = circle_grid(1024)
        for seq in ALL_GENERATORS:
            B = FiniteBlaschke(generate_zeros(seq, 24))
            vals = beta_density_grid(B, grid)
            assert np.all(vals > 0)
            assert np.all(vals <= 1.0 + 1e-12)

    def test_nu_mass_all_generators(self):
        cfg = QuadratureConfig(abs_tol=1e-9, rel_tol=1e-9, max_points=1 << 22)
        for seq in ALL_GENERATORS:
            B = FiniteBlaschke(generate_zeros(seq, 16))
            res = nu_integral(lambda t: np.ones_like(t), B, cfg)
            assert res.value.real == pytest.approx(1.0, abs=1e-8), seq.kind

    def test_nu_mass_degree_128(self):
        # the near-boundary family needs ~3e7 grid points at this degree
        cfg = QuadratureConfig(abs_tol=5e-6, rel_tol=1e-12, max_points=1 << 26)
        for seq in ALL_GENERATORS:
            B = FiniteBlaschke(generate_zeros(seq, 128))
            res = nu_integral(lambda t: np.ones_like(t), B, cfg)
            assert res.converged, seq.kind
            assert res.value.real == pytest.approx(1.0, abs=1e-7), seq.kind


class TestKernels:
    def test_szego_at_origin(self):
        assert szego_kernel(0, 0.7j) == pytest.approx(1.0)

    def test_szego_value(self):
        assert szego_kernel(0.5, 0.5) == pytest.approx(4.0 / 3.0)

    def test_szego_normalized_value(self):
        expected = np.sqrt(0.75) * 4.0 / 3.0
        assert szego_kernel_normalized(0.5, 0.5) == pytest.approx(expected)

    def test_szego_normalization(self):
        lam = 0.7j

        def sq(t):
            vals = np.sqrt(1 - abs(lam) ** 2) / (1 - np.conj(lam) * np.exp(1j * t))
            return np.abs(vals) ** 2

        res = integrate_circle(sq)
        assert res.value.real == pytest.approx(1.0, abs=1e-9)

    def test_model_kernel_constant(self):
        B = FiniteBlaschke(np.zeros(4, dtype=complex))
        assert model_kernel(B, 0.0, 0.3 + 0.2j) == pytest.approx(1.0)

    def test_model_kernel_boundary_diagonal(self):
        B = FiniteBlaschke(np.zeros(2, dtype=complex))
        assert model_kernel(B, 1.0 + 0j, 1.0 + 0j) == pytest.approx(2.0)

    def test_model_kernel_normalized_mass(self):
        # the normalized boundary kernel has unit L2 norm
        B = FiniteBlaschke(np.array([0, 0.5]))
        res = integrate_circle(lambda t: model_kernel_sq_grid(B, 0.0, t),
                               QuadratureConfig(abs_tol=1e-10))
        assert res.value.real == pytest.approx(1.0, abs=1e-9)

    def test_model_kernel_outside(self):
        B = FiniteBlaschke(np.array([0j]))
        with pytest.raises(ValueError):
            model_kernel(B, 1.5, 0.0)

    def test_kernel_symmetry_identity(self):
        # |khat_zeta(eta)|^2 |B'(zeta)| is symmetric in (zeta, eta)
        B = FiniteBlaschke(np.array([0, 0.5, 0.3j, -0.2 + 0.4j]))
        rng = np.random.default_rng(5)
        for _ in range(12):
            a, b = rng.uniform(0, 2 * np.pi, 2)
            lhs = model_kernel_sq_grid(B, a, np.array([b]))[0] * abs_derivative_boundary(B, a)
            rhs = model_kernel_sq_grid(B, b, np.array([a]))[0] * abs_derivative_boundary(B, b)
            assert lhs == pytest.approx(rhs, rel=1e-8)


class TestTMWBasis:
    def test_monomials_for_power(self):
        B = FiniteBlaschke(np.zeros(4, dtype=complex))
        th = 0.9
        for j in range(4):
            assert tmw_basis_eval(B, j, th) == pytest.approx(np.exp(1j * j * th))

    def test_first_function_constant(self):
        B = FiniteBlaschke(np.array([0, 0.5, 0.3j]))
        assert tmw_basis_eval(B, 0, 2.2) == pytest.approx(1.0)

    def test_gram_identity(self):
        B = FiniteBlaschke(np.array([0, 0.5, 0.3j]))
        M = 1 << 12
        E = tmw_matrix(B, circle_grid(M))
        G = E.conj().T @ E / M
        assert np.abs(G - np.eye(3)).max() < 1e-8

    def test_index_error(self):
        B = FiniteBlaschke(np.array([0j]))
        with pytest.raises(IndexError):
            tmw_basis_eval(B, 1, 0.0)


class TestAngularPartialSums:
    def test_uniform_equals_term_count(self):
        diag = angular_partial_sums(ZeroSequence.uniform_zero(), circle_grid(8), 50)
        assert np.allclose(diag.partial_sums[:, -1], 50.0)
        assert diag.checkpoints[-1] == 50

    def test_monotone_nonnegative(self):
        diag = angular_partial_sums(ZeroSequence.dense_nonblaschke(), circle_grid(16), 3000)
        assert np.all(diag.partial_sums >= 0)
        assert np.all(np.diff(diag.partial_sums, axis=1) >= -1e-12)

    def test_against_direct_sum(self):
        seq = ZeroSequence.frostman_fast(4)
        grid = circle_grid(6, offset=0.5)
        J = 5000
        diag = angular_partial_sums(seq, grid, J)
        lam = generate_zeros(seq, J)
        z = np.exp(1j * grid)
        direct = ((1 - np.abs(lam) ** 2)[None, :] / np.abs(z[:, None] - lam[None, :]) ** 2).sum(axis=1)
        assert np.allclose(diag.partial_sums[:, -1], direct, rtol=1e-12)

    def test_first_crossing(self):
        seq = ZeroSequence.uniform_zero()
        diag = angular_partial_sums(seq, circle_grid(4), 100, thresholds=(10.5, 1000.0))
        assert np.all(diag.first_crossing[0] == 11)   # sum exceeds 10.5 at term 11
        assert np.all(diag.first_crossing[1] == -1)   # never crosses 1000

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            angular_partial_sums(ZeroSequence.uniform_zero(), np.array([]), 10)

    def test_frostman_tail_bound_off_directions(self):
        # far from the accumulation directions the tail increase obeys the
        # elementary bound sum of 2(1-|lam_j|)/dist^2
        J0, J = 2 ** 14, 10 ** 5
        seq = ZeroSequence.frostman_fast(4)
        diag = angular_partial_sums(seq, np.array([np.pi / 4]), J)
        sums = diag.partial_sums[0]
        observed_tail = sums[-1] - sums[np.searchsorted(diag.checkpoints, J0)]
        lam = generate_zeros(seq, J)[J0:]
        dist2 = np.abs(np.exp(1j * np.pi / 4) - lam) ** 2
        bound = float(np.sum(2 * (1 - np.abs(lam)) / dist2))
        assert observed_tail <= bound
        assert sums[-1] < 1e2

    def test_dense_growth_on_full_grid(self):
        diag = angular_partial_sums(ZeroSequence.dense_nonblaschke(),
                                    circle_grid(64, offset=0.5), 10 ** 5)
        assert diag.partial_sums[:, -1].min() > 1e3
