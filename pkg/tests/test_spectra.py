"""Eigenvalue estimation and the inequality certification suite.

Acceptance-scale runs live in test_acceptance; these exercise the machinery
at desk resolution with independent oracles where available.
"""

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from plapsolve import (
    DiscreteFunction,
    blowup_demo,
    box,
    build_mesh,
    cylinder_eigen_check,
    hardy_check,
    integrate,
    interval,
    monotonicity_constant_check,
    poincare_remainder_check,
    power_mean_check,
    punctured_box,
    rayleigh_min,
    strip,
)


def compact_tridiagonal_lambda1(n):
    """Reference first eigenvalue of the standard compact 3-point operator."""
    h = 1.0 / (n - 1)
    main = np.full(n - 2, 2.0 / h**2)
    off = np.full(n - 3, -1.0 / h**2)
    vals = eigh_tridiagonal(main, off, select="i", select_range=(0, 0), eigvals_only=True)
    return float(vals[0])


class TestRayleighMin:
    def test_interval_oracle(self):
        mesh = build_mesh(interval(0.0, 1.0), [201])
        result = rayleigh_min(mesh, 2.0, tol=1e-9, seed=0)
        oracle = compact_tridiagonal_lambda1(201)
        # both discretizations approximate pi^2 to second order
        assert result.value == pytest.approx(np.pi**2, rel=1e-2)
        assert result.value == pytest.approx(oracle, rel=1e-3)

    def test_box_separable_oracle(self):
        mesh = build_mesh(box((0.0, 1.0), (0.0, 1.0)), [33, 33])
        result = rayleigh_min(mesh, 2.0, tol=1e-8, seed=0)
        assert result.value == pytest.approx(2 * np.pi**2, rel=2e-2)

    def test_domain_rescaling(self):
        # lambda(0, 2) = lambda(0, 1) / 2^p at p = 2; the two discrete
        # problems are exact rescalings of each other
        m1 = build_mesh(interval(0.0, 1.0), [101])
        m2 = build_mesh(interval(0.0, 2.0), [101])
        v1 = rayleigh_min(m1, 2.0, tol=1e-10, seed=0).value
        v2 = rayleigh_min(m2, 2.0, tol=1e-10, seed=0).value
        assert v2 == pytest.approx(v1 / 4.0, rel=1e-6)

    def test_minimizer_normalized(self):
        mesh = build_mesh(interval(0.0, 1.0), [101])
        result = rayleigh_min(mesh, 2.5, tol=1e-8, seed=1)
        mass = integrate(np.abs(result.minimizer.values) ** 2.5, mesh)
        assert mass == pytest.approx(1.0, abs=1e-10)

    def test_value_matches_minimizer_energy(self):
        mesh = build_mesh(interval(0.0, 1.0), [101])
        result = rayleigh_min(mesh, 2.0, tol=1e-9, seed=0)
        from plapsolve import gradient

        g = gradient(result.minimizer)
        energy = integrate(np.einsum("ij,ij->i", g, g), mesh)
        assert result.value == pytest.approx(energy, rel=1e-10)

    def test_needs_interior(self):
        with pytest.raises(ValueError, match="interior"):
            mesh = build_mesh(interval(0.0, 1.0), [3], singular_cap_radius=0.0)
            mesh.free_mask[:] = False
            rayleigh_min(mesh, 2.0)


class TestCylinderEigen:
    def test_record_structure(self):
        omega = build_mesh(interval(0.0, 1.0), [17])
        record = cylinder_eigen_check(omega, 1, [2.0, 4.0], 2.0, tol=1e-6, z_nodes_per_unit=6.0)
        assert record.verdict == "no_violation"
        lam_omega = record.details["lambda_omega"]
        strips = record.details["lambda_strip"]
        assert strips[2.0] >= lam_omega - 1e-6
        assert strips[4.0] >= lam_omega - 1e-6
        assert strips[4.0] <= strips[2.0] + 1e-6

    def test_lengths_must_increase(self):
        omega = build_mesh(interval(0.0, 1.0), [17])
        with pytest.raises(ValueError, match="increasing"):
            cylinder_eigen_check(omega, 1, [4.0, 2.0], 2.0)


class TestPoincareRemainder:
    def test_requires_m_above_p(self):
        omega = build_mesh(interval(0.0, 1.0), [9])
        with pytest.raises(ValueError, match="M > p"):
            poincare_remainder_check(omega, 2, 2.0, 2.0)

    def test_small_sample_run(self):
        omega = build_mesh(interval(0.0, 1.0), [9])
        record = poincare_remainder_check(omega, 3, 2.0, 2.0, samples=20, seed=0, z_nodes=13)
        assert record.verdict == "no_violation"
        assert record.details["constant"] == pytest.approx(0.25)
        assert record.sample_count == 20

    def test_damped_constant_below_two(self):
        omega = build_mesh(interval(0.0, 1.0), [9])
        record = poincare_remainder_check(omega, 2, 1.5, 1.5, samples=10, seed=0, z_nodes=17)
        assert record.details["constant"] == pytest.approx(2 ** (-0.25) * (1 / 3) ** 1.5)
        assert record.verdict == "no_violation"

    def test_far_support_margin_positive(self):
        # a bump far along the unbounded axis sees a vanishing weight, so the
        # margin is essentially the whole left side
        omega = build_mesh(interval(0.0, 1.0), [9])
        record = poincare_remainder_check(omega, 3, 3.0, 2.0, samples=40, seed=1, z_nodes=17)
        assert record.worst_margin > 0.5  # normalized margins near one


class TestMonotonicity:
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
    def test_positive_constant(self, p):
        record = monotonicity_constant_check(p, samples=20000, seed=0)
        assert record.verdict == "no_violation"
        assert record.details["c_est"] > 0.0

    def test_quadratic_identity(self):
        record = monotonicity_constant_check(2.0, samples=20000, seed=0)
        assert record.details["c_est"] == pytest.approx(1.0, abs=1e-12)

    def test_axis_pair_bound_p4(self):
        # the opposite axis pair gives pairing 4 against |x-y|^4 = 16
        record = monotonicity_constant_check(4.0, samples=1000, seed=0)
        assert record.details["c_est"] <= 0.25 + 1e-12

    def test_rejects_p_at_most_one(self):
        with pytest.raises(ValueError, match="p > 1"):
            monotonicity_constant_check(1.0)


class TestPowerMean:
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_no_violation(self, p):
        record = power_mean_check(p, samples=2000, seed=0)
        assert record.verdict == "no_violation"

    def test_equality_on_diagonal(self):
        # the damped constant is sharp at a = b, so the worst margin sits at 0
        record = power_mean_check(1.5, samples=2000, seed=0)
        assert record.worst_margin == pytest.approx(0.0, abs=1e-12)

    def test_scaled_constant_violates(self):
        record = power_mean_check(2.0, samples=500, seed=0, constant_scale=1.5)
        assert record.verdict == "violation"


class TestHardyCheck:
    @pytest.fixture(scope="class")
    def hardy_mesh(self):
        dom = punctured_box((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), radius=0.05)
        return build_mesh(dom, [21, 21, 21])

    def test_no_violation_small(self, hardy_mesh):
        record = hardy_check(hardy_mesh, 3, 2.0, samples=30, seed=0, probe=False)
        assert record.verdict == "no_violation"
        assert record.details["constant"] == pytest.approx(0.25)

    def test_needs_puncture(self):
        mesh = build_mesh(box((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)), [9, 9, 9])
        with pytest.raises(ValueError, match="punctured"):
            hardy_check(mesh, 3, 2.0, samples=5, probe=False)

    def test_rejects_bad_exponent(self, hardy_mesh):
        with pytest.raises(ValueError):
            hardy_check(hardy_mesh, 3, 3.5, samples=5, probe=False)


class TestBlowup:
    @pytest.fixture(scope="class")
    def result(self):
        omega = build_mesh(interval(0.0, 1.0), [17])
        return blowup_demo(omega, 1, n_terms=8, length_per_bump=6.0)

    def test_first_term_equalities(self, result):
        row = result.rows[0]
        assert row.q_partial_sum == pytest.approx(1.0, rel=1e-10)
        assert row.dual_norm_partial == pytest.approx(1.0, rel=1e-10)
        assert row.gradient_energy == pytest.approx(row.energy_ratio, rel=1e-12)

    def test_energy_gaps_are_inverse_squares(self, result):
        sums = [row.q_partial_sum for row in result.rows]
        expected = np.cumsum([1.0 / k**2 for k in range(1, 9)])
        assert np.allclose(sums, expected, rtol=1e-10)

    def test_dual_norm_bounded_by_zeta(self, result):
        for row in result.rows:
            assert row.dual_norm_partial < np.sqrt(np.pi**2 / 6) + 1e-3

    def test_supports_disjoint(self, result):
        assert result.supports_disjoint
        for i, u in enumerate(result.components):
            for v in result.components[i + 1:]:
                assert np.all(u.values * v.values == 0.0)

    def test_gradient_energy_grows(self, result):
        energies = [row.gradient_energy for row in result.rows]
        assert all(b > a for a, b in zip(energies, energies[1:]))
        assert result.fitted_constant > 0.0
        for row in result.rows:
            assert row.gradient_energy >= result.fitted_constant * row.harmonic_number - 1e-12

    def test_slot_too_small_raises(self):
        omega = build_mesh(interval(0.0, 1.0), [17])
        with pytest.raises(ValueError, match="length_per_bump"):
            blowup_demo(omega, 1, n_terms=8, length_per_bump=1.0)

    def test_needs_single_unbounded_axis(self):
        omega = build_mesh(interval(0.0, 1.0), [17])
        with pytest.raises(NotImplementedError):
            blowup_demo(omega, 2, n_terms=4)

    def test_needs_three_terms(self):
        omega = build_mesh(interval(0.0, 1.0), [17])
        with pytest.raises(ValueError, match="at least 3"):
            blowup_demo(omega, 1, n_terms=2)
