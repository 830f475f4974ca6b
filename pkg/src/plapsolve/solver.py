"""Regularized minimization and the vanishing-regularization continuation.

``minimize_phi`` drives a preconditioned descent with Armijo backtracking on
the smoothed objective at fixed ``eps``; ``continuation_solve`` walks a
geometric ``eps`` schedule down toward zero, warm-starting each stage and
enforcing the a-priori energy bound ``q_v(u_n) <= D**(p/(p-1))`` implied by
the dual-norm estimate D as a runtime check.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._descent import Preconditioner, armijo_backtrack, lagged_coefficient, mass_curvature
from .energy import (
    EnergyParams,
    ForcingTerm,
    IndefiniteEnergyError,
    _grad_square,
    _phi_arrays,
    _phi_gradient_arrays,
    cauchy_diagnostic,
    dual_norm,
    q_v,
    residual_norm,
    sobolev_norm,
    y_norm,
)
from .grid import DiscreteFunction, Mesh, integrate
from .potentials import Potential, Weight, evaluate_potential
from .sampling import plateau_profile

__all__ = [
    "EpsSchedule",
    "MinimizeResult",
    "StageRecord",
    "SolveReport",
    "ContinuationBoundError",
    "minimize_phi",
    "continuation_solve",
]


class ContinuationBoundError(RuntimeError):
    """A continuation stage violated the dual-norm energy bound, indicating a
    discretization inconsistency or a failed positivity assumption."""


@dataclass(frozen=True)
class EpsSchedule:
    """Strictly decreasing geometric schedule ``eps0 * ratio**k`` in (0, 1)."""

    eps0: float
    ratio: float
    steps: int

    def __post_init__(self):
        if not 0.0 < self.eps0 < 1.0:
            raise ValueError(f"eps0 must lie in (0, 1), got {self.eps0}")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"ratio must lie in (0, 1), got {self.ratio}")
        if self.steps < 1:
            raise ValueError(f"steps must be positive, got {self.steps}")

    @property
    def values(self) -> np.ndarray:
        return self.eps0 * self.ratio ** np.arange(self.steps)

    @property
    def terminal(self) -> float:
        return float(self.values[-1])


@dataclass
class MinimizeResult:
    """Outcome of one fixed-eps minimization; ``u`` is the final iterate."""

    u: DiscreteFunction
    phi_value: float
    phi_start: float
    residual: float
    iterations: int
    linesearch_failures: int
    converged: bool
    phi_increase_max: float
    delta_final: float


@dataclass
class StageRecord:
    """Per-stage diagnostics of the continuation."""

    eps: float
    phi_value: float
    phi_start: float
    q_v_value: float
    y_norm_value: float
    sobolev_norm_value: float
    residual: float
    iterations: int
    linesearch_failures: int
    cauchy_vs_prev: float
    dual_quotient: float
    phi_increase_max: float


@dataclass
class SolveReport:
    """Continuation record: stage diagnostics, terminal solution, and the pure
    equation residual with the regularization term removed."""

    stages: list[StageRecord]
    solution: DiscreteFunction
    terminal_residual: float
    dual_norm_estimate: float
    wall_time: float
    p: float = 0.0
    converged: bool = True


def _coercivity_floor(f: ForcingTerm, params: EnergyParams) -> float:
    """Lower bound of phi implied by coercivity; minus infinity when eps = 0."""
    if params.eps <= 0.0:
        return -np.inf
    upper = f.dual_upper_bound(params.p)
    if upper == 0.0:
        return 0.0
    pc = params.p_conjugate
    return -(1.0 - 1.0 / params.p) * upper**pc * params.eps ** (-1.0 / (params.p - 1.0))


def minimize_phi(
    start: DiscreteFunction,
    V: Potential,
    f: ForcingTerm,
    params: EnergyParams,
    tol: float = 1e-8,
    max_iter: int = 500,
    preconditioner: Preconditioner | None = None,
    stall_window: int = 60,
    stall_factor: float = 0.85,
) -> MinimizeResult:
    """Descend the regularized objective to a near-stationary point.

    Stops when the quadrature-weighted l2 norm of the nodal first variation
    drops below ``tol`` (with the smoothing radius already at its floor), or
    at ``max_iter``.  The objective never increases across accepted steps.
    The smoothing radius follows ``max(delta_min, delta0 * 2**-k)`` with
    ``delta_min = 1e-8 * field scale``; a zero ``params.delta`` disables
    smoothing entirely.

    Emits a warning on line-search failure and returns the last iterate;
    raises :class:`IndefiniteEnergyError` if the objective falls below its
    coercivity floor, which signals an indefinite energy form.
    """
    mesh = start.mesh
    if f.mesh is not mesh:
        raise ValueError("forcing term lives on a different mesh")
    v_vals = evaluate_potential(V, mesh) if V.kind != "zero" else None
    shift = max(params.eps, 1e-10)
    manage_pre = preconditioner is None
    if preconditioner is not None:
        pre = preconditioner
    elif params.p == 2.0:
        # the Hessian is u-independent at p = 2; with the potential folded in
        # the preconditioned step is an exact Newton step
        mass_coeff = None if v_vals is None else -(1.0 - params.eps) * v_vals
        pre = Preconditioner(mesh, shift=shift, mass_coeff=mass_coeff)
        manage_pre = False
    else:
        pre = Preconditioner(mesh, shift=shift)
    pre_refresh = 5
    w = mesh.weights

    scale = max(1.0, float(np.max(np.abs(start.values))) if start.values.size else 1.0)
    delta0 = params.delta
    delta_floor = 0.0 if delta0 == 0.0 else 1e-8 * scale
    floor = _coercivity_floor(f, params)

    u = start.values.copy()
    phi_start = _phi_arrays(mesh, u, v_vals, f, params.with_delta(delta_floor))
    failures = 0
    increase_max = -np.inf
    step = 1.0
    iterations = 0
    converged = False
    delta = delta0
    res_window: list[float] = []

    for k in range(max_iter):
        iterations = k + 1
        delta = delta_floor if delta0 == 0.0 else max(delta_floor, delta0 * 0.5**k)
        params_k = params.with_delta(delta)
        phi_u = _phi_arrays(mesh, u, v_vals, f, params_k)
        if phi_u < floor - 1e-9 - 1e-6 * abs(floor):
            raise IndefiniteEnergyError(
                f"objective {phi_u:.6e} fell below its coercivity floor {floor:.6e}; "
                "the energy form is indefinite on this mesh"
            )
        g = _phi_gradient_arrays(mesh, u, v_vals, f, params_k)
        res = np.sqrt(max(integrate(g * g, mesh), 0.0))
        if res <= tol and delta <= delta_floor:
            converged = True
            break
        # demand geometric progress; the flux is degenerate at grad u = 0 and
        # late-stage descent can only crawl there
        res_window.append(res)
        if (
            delta <= delta_floor
            and len(res_window) > stall_window
            and res > stall_factor * res_window[-stall_window - 1]
        ):
            break
        if manage_pre and k % pre_refresh == 0:
            _, s_now = _grad_square(mesh, u)
            pre = Preconditioner(
                mesh,
                shift=shift,
                coeff=lagged_coefficient(s_now, params.p),
                mass_coeff=mass_curvature(u, params.p, params.eps),
            )

        d = -pre.apply(g)
        slope = float((w * g) @ d)
        if slope >= 0.0:
            d = -g
            slope = -float(integrate(g * g, mesh))
        objective = lambda vals: _phi_arrays(mesh, vals, v_vals, f, params_k)
        noise = 32.0 * np.finfo(float).eps * (1.0 + abs(phi_u))
        taken, u_new, phi_new = armijo_backtrack(
            objective, u, d, phi_u, slope, init_step=step, noise=noise
        )
        if taken is None and d is not g:
            failures += 1
            d = -g
            slope = -float(integrate(g * g, mesh))
            taken, u_new, phi_new = armijo_backtrack(
                objective, u, d, phi_u, slope, init_step=step, noise=noise
            )
        if taken is None:
            failures += 1
            warnings.warn(
                "line search stalled before reaching the residual tolerance; "
                "returning the last iterate",
                RuntimeWarning,
                stacklevel=2,
            )
            break
        increase_max = max(increase_max, phi_new - phi_u)
        step = min(max(taken * 2.0, 1e-10), 4.0)
        u = u_new

    params_final = params.with_delta(delta_floor if delta0 != 0.0 else 0.0)
    g_final = _phi_gradient_arrays(mesh, u, v_vals, f, params_final)
    res_final = np.sqrt(max(integrate(g_final * g_final, mesh), 0.0))
    phi_final = _phi_arrays(mesh, u, v_vals, f, params_final)
    if res_final <= tol:
        converged = True
    return MinimizeResult(
        u=DiscreteFunction(mesh, u),
        phi_value=float(phi_final),
        phi_start=float(phi_start),
        residual=float(res_final),
        iterations=iterations,
        linesearch_failures=failures,
        converged=converged,
        phi_increase_max=(increase_max if np.isfinite(increase_max) else 0.0),
        delta_final=(delta_floor if delta0 != 0.0 else 0.0),
    )


def _interior_cutoff(mesh: Mesh) -> DiscreteFunction:
    """Plateau cutoff: 1 on the central part of the domain, ramps to 0 at the
    boundary faces."""
    vals = np.ones(mesh.n_nodes)
    for a, (lo, hi) in enumerate(mesh.domain.bounds):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        t = (mesh.points[:, a] - mid) / half
        vals *= plateau_profile(t, 0.55, 0.35)
    return DiscreteFunction(mesh, vals)


def continuation_solve(
    V: Potential,
    f: ForcingTerm,
    params: EnergyParams,
    schedule: EpsSchedule,
    tol: float = 1e-8,
    W: Weight | None = None,
    max_iter: int = 800,
    seed: int = 0,
    dual_budget: int = 200,
    bound_slack: float = 1e-3,
) -> SolveReport:
    """Drive the regularization parameter down a geometric schedule.

    Each stage warm-starts from the previous solution, so the objective at
    the new ``eps`` starts no lower than it ends.  Per stage the report
    records energy, norms, residual, iteration counts, and the localized
    Cauchy diagnostic against the previous stage.  The dual-norm estimate is
    computed up front (continuation refuses to start when it is not finite)
    and is raised by any stage whose quotient ``<f,u>/q_v(u)**(1/p)`` exceeds
    it; a stage energy above ``D**(p/(p-1)) * (1 + bound_slack)`` aborts.
    """
    mesh = f.mesh
    t0 = time.perf_counter()
    estimate = dual_norm(f, V, params, budget=dual_budget, seed=seed)
    if not np.isfinite(estimate) or estimate > 1e12:
        raise ValueError(
            f"dual norm estimate {estimate!r} is not usably finite; "
            "the forcing term is out of reach of the continuation"
        )
    w_norm = W or Weight.constant(1.0)
    cutoff = _interior_cutoff(mesh)
    p = params.p
    pc = params.p_conjugate

    u = DiscreteFunction.zeros(mesh)
    stages: list[StageRecord] = []
    all_converged = True
    for eps_n in schedule.values:
        params_n = params.with_eps(float(eps_n))
        result = minimize_phi(u, V, f, params_n, tol=tol, max_iter=max_iter)
        all_converged &= result.converged
        u_new = result.u
        qv = q_v(u_new, V, params)
        pairing = f.pairing(u_new)
        if qv <= 0.0 and np.any(u_new.values):
            raise IndefiniteEnergyError(
                f"stage eps={eps_n:.3e} produced a nonzero iterate with q_v={qv:.3e} <= 0"
            )
        quotient = pairing / qv ** (1.0 / p) if qv > 0.0 else 0.0
        estimate = max(estimate, quotient)
        if qv > estimate**pc * (1.0 + bound_slack) + tol:
            raise ContinuationBoundError(
                f"stage eps={eps_n:.3e}: q_v={qv:.6e} exceeds the dual-norm bound "
                f"{estimate**pc:.6e}; discretization inconsistency or failed positivity"
            )
        stages.append(
            StageRecord(
                eps=float(eps_n),
                phi_value=result.phi_value,
                phi_start=result.phi_start,
                q_v_value=qv,
                y_norm_value=y_norm(u_new, w_norm, params),
                sobolev_norm_value=sobolev_norm(u_new, p),
                residual=result.residual,
                iterations=result.iterations,
                linesearch_failures=result.linesearch_failures,
                cauchy_vs_prev=cauchy_diagnostic(u, u_new, cutoff, params),
                dual_quotient=quotient,
                phi_increase_max=result.phi_increase_max,
            )
        )
        u = u_new

    params_pure = params.with_eps(0.0).with_delta(0.0)
    v_vals = evaluate_potential(V, mesh) if V.kind != "zero" else None
    g_pure = _phi_gradient_arrays(mesh, u.values, v_vals, f, params_pure)
    terminal = float(np.sqrt(max(integrate(g_pure * g_pure, mesh), 0.0)))
    return SolveReport(
        stages=stages,
        solution=u,
        terminal_residual=terminal,
        dual_norm_estimate=estimate,
        wall_time=time.perf_counter() - t0,
        p=p,
        converged=all_converged,
    )
