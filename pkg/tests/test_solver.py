"""Fixed-eps minimization and the vanishing-eps continuation."""

import numpy as np
import pytest

from plapsolve import (
    ContinuationBoundError,
    DiscreteFunction,
    EnergyParams,
    EpsSchedule,
    ForcingTerm,
    IndefiniteEnergyError,
    Potential,
    Weight,
    build_mesh,
    continuation_solve,
    integrate,
    interval,
    minimize_phi,
    punctured_box,
    q_v,
)
from oracles import wide_system_1d


class TestEpsSchedule:
    def test_values(self):
        sched = EpsSchedule(0.5, 0.5, 4)
        assert np.allclose(sched.values, [0.5, 0.25, 0.125, 0.0625])
        assert sched.terminal == pytest.approx(0.0625)

    @pytest.mark.parametrize(
        "kwargs",
        [dict(eps0=1.0, ratio=0.5, steps=3), dict(eps0=0.5, ratio=1.0, steps=3), dict(eps0=0.5, ratio=0.5, steps=0)],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            EpsSchedule(**kwargs)

    def test_strictly_decreasing_in_unit_interval(self):
        vals = EpsSchedule(0.9, 0.3, 6).values
        assert np.all(np.diff(vals) < 0)
        assert np.all((vals > 0) & (vals < 1))


class TestMinimizePhi:
    def test_zero_forcing_returns_zero(self):
        mesh = build_mesh(interval(0.0, 1.0), [51])
        params = EnergyParams(p=2.0, eps=0.5)
        f = ForcingTerm.zero(mesh)
        result = minimize_phi(DiscreteFunction.zeros(mesh), Potential.zero(), f, params, tol=1e-10)
        assert result.phi_value <= 0.0 + 1e-15
        assert np.max(np.abs(result.u.values)) <= 1e-8
        assert result.converged

    def test_linear_solve_oracle(self):
        # p = 2, V = 0, eps = 0.5: must match the hand-assembled direct solve
        n = 401
        x, h, w, A = wide_system_1d(n)
        fvals = np.sin(np.pi * x)
        eps = 0.5
        inner = slice(1, n - 1)
        sys = (A + eps * np.diag(w))[inner, inner]
        u_star = np.zeros(n)
        u_star[inner] = np.linalg.solve(sys, (w * fvals)[inner])

        mesh = build_mesh(interval(0.0, 1.0), [n])
        params = EnergyParams(p=2.0, eps=eps)
        f = ForcingTerm.density(mesh, fvals)
        result = minimize_phi(DiscreteFunction.zeros(mesh), Potential.zero(), f, params, tol=1e-11)
        assert np.max(np.abs(result.u.values - u_star)) <= 1e-6

    def test_multi_start_consistency_p3(self):
        # distinct random starts converge to the same objective value; the
        # minimizers themselves are not asserted unique
        mesh = build_mesh(interval(0.0, 1.0), [51])
        params = EnergyParams(p=3.0, eps=0.1, delta=1e-5)
        f = ForcingTerm.manufactured(mesh, lambda x: np.sin(np.pi * x[:, 0]))
        rng = np.random.default_rng(0)
        values = []
        best_in = None
        for _ in range(20):
            start_vals = 0.5 * rng.standard_normal(mesh.n_nodes)
            start = DiscreteFunction(mesh, start_vals)
            from plapsolve import phi

            phi_in = phi(start, Potential.zero(), f, params)
            result = minimize_phi(start, Potential.zero(), f, params, tol=1e-10, max_iter=2000)
            assert result.phi_value < phi_in
            values.append(result.phi_value)
        assert max(values) - min(values) <= 1e-8

    def test_monotone_per_accepted_step(self):
        mesh = build_mesh(interval(0.0, 1.0), [101])
        params = EnergyParams(p=2.5, eps=0.3, delta=1e-4)
        f = ForcingTerm.manufactured(mesh, lambda x: np.sin(np.pi * x[:, 0]))
        result = minimize_phi(DiscreteFunction.zeros(mesh), Potential.zero(), f, params, tol=1e-9)
        assert result.phi_increase_max <= 1e-12

    def test_indefinite_potential_raises(self):
        mesh = build_mesh(interval(0.0, 1.0), [51])
        params = EnergyParams(p=2.0, eps=0.01)
        f = ForcingTerm.manufactured(mesh, lambda x: np.sin(np.pi * x[:, 0]))
        with pytest.raises(IndefiniteEnergyError):
            minimize_phi(
                DiscreteFunction.zeros(mesh), Potential.constant(60.0), f, params,
                tol=1e-10, max_iter=500,
            )


class TestContinuation:
    def test_zero_forcing(self):
        mesh = build_mesh(interval(0.0, 1.0), [51])
        params = EnergyParams(p=2.0)
        report = continuation_solve(
            Potential.zero(), ForcingTerm.zero(mesh), params, EpsSchedule(0.5, 0.25, 4)
        )
        assert np.max(np.abs(report.solution.values)) <= 1e-10
        for stage in report.stages:
            assert abs(stage.phi_value) <= 1e-12
            assert abs(stage.q_v_value) <= 1e-12

    def test_linear_limit_oracle(self):
        # the continuation limit matches one direct solve of the unregularized
        # equation
        n = 201
        x, h, w, A = wide_system_1d(n)
        fvals = np.pi**2 * np.sin(np.pi * x)
        inner = slice(1, n - 1)
        u_star = np.zeros(n)
        u_star[inner] = np.linalg.solve(A[inner, inner], (w * fvals)[inner])

        mesh = build_mesh(interval(0.0, 1.0), [n])
        params = EnergyParams(p=2.0)
        f = ForcingTerm.density(mesh, fvals)
        report = continuation_solve(
            Potential.zero(), f, params, EpsSchedule(0.5, 0.25, 8), tol=1e-10
        )
        assert np.max(np.abs(report.solution.values - u_star)) <= 1e-5
        assert report.converged

    def test_hardy_continuation_bounds(self):
        dom = punctured_box((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), radius=0.05)
        mesh = build_mesh(dom, [17, 17, 17])
        params = EnergyParams(p=2.0, q=1.8)
        f = ForcingTerm.manufactured(
            mesh, lambda x: np.exp(-4 * ((x[:, 0] - 0.3) ** 2 + x[:, 1] ** 2 + x[:, 2] ** 2))
        )
        W = Weight.constant(0.29)
        report = continuation_solve(
            Potential.quadratic_hardy(3), f, params, EpsSchedule(0.5, 0.25, 5),
            tol=1e-9, W=W,
        )
        pc = 2.0
        qvs = [s.q_v_value for s in report.stages]
        for stage in report.stages:
            assert stage.q_v_value <= report.dual_norm_estimate**pc * (1 + 1e-3)
            assert stage.y_norm_value**2 <= stage.q_v_value + 1e-9
        # energies settle monotonically up to solver noise
        assert all(b >= a - 1e-6 for a, b in zip(qvs, qvs[1:]))
        assert report.stages[-1].residual <= 1e-9

    def test_energy_identity_at_stationarity(self):
        mesh = build_mesh(interval(0.0, 1.0), [101])
        params = EnergyParams(p=2.0)
        f = ForcingTerm.manufactured(mesh, lambda x: np.sin(np.pi * x[:, 0]))
        report = continuation_solve(Potential.zero(), f, params, EpsSchedule(0.5, 0.25, 6), tol=1e-11)
        pairing = f.pairing(report.solution)
        assert report.stages[-1].phi_value == pytest.approx((1 / 2 - 1) * pairing, rel=1e-9)

    def test_warm_start_monotonicity(self):
        mesh = build_mesh(interval(0.0, 1.0), [101])
        params = EnergyParams(p=2.0)
        f = ForcingTerm.manufactured(mesh, lambda x: np.sin(np.pi * x[:, 0]))
        report = continuation_solve(Potential.zero(), f, params, EpsSchedule(0.5, 0.25, 6), tol=1e-11)
        for stage in report.stages:
            assert stage.phi_start >= stage.phi_value - 1e-12

    def test_cauchy_diagnostic_decays(self):
        mesh = build_mesh(interval(0.0, 1.0), [101])
        params = EnergyParams(p=2.0)
        f = ForcingTerm.manufactured(mesh, lambda x: np.sin(np.pi * x[:, 0]))
        report = continuation_solve(Potential.zero(), f, params, EpsSchedule(0.5, 0.25, 6), tol=1e-11)
        diags = [s.cauchy_vs_prev for s in report.stages]
        assert diags[-1] < diags[0]
        assert diags[-1] <= 1e-6

    def test_indefinite_aborts(self):
        mesh = build_mesh(interval(0.0, 1.0), [51])
        params = EnergyParams(p=2.0)
        f = ForcingTerm.manufactured(mesh, lambda x: np.sin(np.pi * x[:, 0]))
        with pytest.raises((IndefiniteEnergyError, ContinuationBoundError)):
            continuation_solve(
                Potential.constant(60.0), f, params, EpsSchedule(0.5, 0.25, 3), tol=1e-8
            )

    def test_pure_equation_residual_reported(self):
        mesh = build_mesh(interval(0.0, 1.0), [201])
        params = EnergyParams(p=2.0)
        f = ForcingTerm.manufactured(mesh, lambda x: np.pi**2 * np.sin(np.pi * x[:, 0]))
        report = continuation_solve(Potential.zero(), f, params, EpsSchedule(0.5, 0.25, 8), tol=1e-10)
        # the pure residual drops the eps term, so it is dominated by
        # eps_terminal * |u| and stays small for a deep schedule
        assert report.terminal_residual <= 1e-4
        assert report.terminal_residual > 0.0
