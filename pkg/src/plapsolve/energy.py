"""Energy functionals and norms for the forced problem
``-div(|grad u|^(p-2) grad u) - V |u|^(p-2) u = f``.

Provides the energy gap form ``q_v``, the regularized objective ``phi`` with
its exact discrete first variation, the truncation clamp, a Cauchy-type
gradient diagnostic, the weighted Sobolev norm ``y_norm``, and an
ascent-based lower estimate of the dual norm
``sup { <f, u> : q_v(u) = 1 }``.

All functionals integrate with the mesh quadrature; ``phi_gradient`` is the
quadrature-exact adjoint of the discrete energy, so central finite
differences of ``phi`` reproduce it to second order.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._descent import Preconditioner, armijo_backtrack
from .grid import DiscreteFunction, Mesh, gradient, integrate
from .potentials import Potential, Weight, evaluate_potential, evaluate_weight, validate_exponents

__all__ = [
    "EnergyParams",
    "ForcingTerm",
    "IndefiniteEnergyError",
    "q_v",
    "phi",
    "phi_gradient",
    "truncate",
    "truncate_field",
    "cauchy_diagnostic",
    "y_norm",
    "sobolev_norm",
    "residual_norm",
    "dual_norm",
]


class IndefiniteEnergyError(RuntimeError):
    """The energy form failed to be positive on a nonzero discrete function."""


@dataclass(frozen=True)
class EnergyParams:
    """Exponents and regularization knobs: growth ``p``, companion exponent
    ``q`` in ``(max(1, p-1), p]``, coercivity parameter ``eps`` in ``[0, 1)``,
    and the degeneracy-smoothing radius ``delta``."""

    p: float
    q: float | None = None
    eps: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        q = self.p if self.q is None else self.q
        object.__setattr__(self, "q", float(q))
        validate_exponents(self.p, self.q)
        if not 0.0 <= self.eps < 1.0:
            raise ValueError(f"eps must lie in [0, 1), got {self.eps}")
        if self.delta < 0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")

    def with_eps(self, eps: float) -> "EnergyParams":
        return dataclasses.replace(self, eps=eps)

    def with_delta(self, delta: float) -> "EnergyParams":
        return dataclasses.replace(self, delta=delta)

    @property
    def p_conjugate(self) -> float:
        return self.p / (self.p - 1.0)


class ForcingTerm:
    """Right-hand side of the forced problem.

    Three kinds: ``tabulated_density`` pairs by quadrature, ``manufactured``
    samples a callable into a density, and ``distributional_sum`` pairs a list
    of (source function, multiplier) components by integration by parts:
    each component contributes ``int grad(u_n) . grad(u) - lam int u_n u``.
    """

    def __init__(self, kind: str, mesh: Mesh, density: np.ndarray | None = None,
                 components: Sequence[tuple[DiscreteFunction, float]] | None = None):
        self.kind = kind
        self.mesh = mesh
        self._density = None if density is None else np.asarray(density, dtype=float).ravel()
        self._components = None if components is None else tuple(components)
        if self._density is not None:
            if self._density.size != mesh.n_nodes:
                raise ValueError("density size does not match mesh")
            if not np.all(np.isfinite(self._density[~mesh.excluded_mask])):
                raise ValueError("density must be finite at non-excluded nodes")
        self._plain_rep: np.ndarray | None = None

    @classmethod
    def zero(cls, mesh: Mesh) -> "ForcingTerm":
        return cls("tabulated_density", mesh, density=np.zeros(mesh.n_nodes))

    @classmethod
    def density(cls, mesh: Mesh, values: np.ndarray) -> "ForcingTerm":
        return cls("tabulated_density", mesh, density=values)

    @classmethod
    def manufactured(cls, mesh: Mesh, fn: Callable[[np.ndarray], np.ndarray]) -> "ForcingTerm":
        return cls("manufactured", mesh, density=np.asarray(fn(mesh.points), dtype=float))

    @classmethod
    def distributional_sum(cls, components: Sequence[tuple[DiscreteFunction, float]]) -> "ForcingTerm":
        if not components:
            raise ValueError("distributional_sum needs at least one component")
        mesh = components[0][0].mesh
        for u, _ in components:
            if u.mesh is not mesh:
                raise ValueError("all components must share one mesh")
        return cls("distributional_sum", mesh, components=components)

    def plain_rep(self) -> np.ndarray:
        """Vector r with ``<f, u> = r . values(u)`` for boundary-vanishing u."""
        if self._plain_rep is None:
            mesh = self.mesh
            w_act = mesh.weights * ~mesh.excluded_mask
            if self._density is not None:
                dens = np.where(mesh.excluded_mask, 0.0, self._density)
                self._plain_rep = w_act * dens
            else:
                r = np.zeros(mesh.n_nodes)
                ops = mesh.gradient_ops()
                for u_n, lam in self._components:
                    g = np.column_stack([op @ u_n.values for op in ops])
                    for a, op in enumerate(ops):
                        r += op.T @ (w_act * g[:, a])
                    r -= lam * w_act * u_n.values
                self._plain_rep = r
        return self._plain_rep

    def pairing(self, u: DiscreteFunction) -> float:
        """Duality pairing ``<f, u>``; linear in u."""
        return float(self.plain_rep() @ u.values)

    def nodal_density(self) -> np.ndarray:
        """Nodal representation: pairing equals quadrature against it."""
        mesh = self.mesh
        out = self.plain_rep() / mesh.weights
        out[mesh.constrained_mask] = 0.0
        return out

    def dual_upper_bound(self, p: float) -> float:
        """Upper estimate of the norm pairing against the unweighted Sobolev
        norm, via the Hoelder inequality on each piece."""
        pc = p / (p - 1.0)
        mesh = self.mesh
        if self._density is not None:
            dens = np.where(mesh.excluded_mask, 0.0, self._density)
            return integrate(np.abs(dens) ** pc, mesh) ** (1.0 / pc)
        total = 0.0
        for u_n, lam in self._components:
            g = gradient(u_n)
            gn = np.sqrt(np.einsum("ij,ij->i", g, g))
            total += integrate(gn ** pc, mesh) ** (1.0 / pc)
            total += abs(lam) * integrate(np.abs(u_n.values) ** pc, mesh) ** (1.0 / pc)
        return total

    def __mul__(self, scalar: float) -> "ForcingTerm":
        t = float(scalar)
        if self._density is not None:
            return ForcingTerm(self.kind, self.mesh, density=self._density * t)
        comps = [(u_n * t, lam) for u_n, lam in self._components]
        return ForcingTerm(self.kind, self.mesh, components=comps)

    __rmul__ = __mul__


def _grad_square(mesh: Mesh, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ops = mesh.gradient_ops()
    g = np.column_stack([op @ values for op in ops])
    return g, np.einsum("ij,ij->i", g, g)


def _flux_coeff(s: np.ndarray, p: float, delta: float) -> np.ndarray:
    """Coefficient ``(s + delta^2)^((p-2)/2)`` with the removable zero guarded."""
    base = s + delta * delta
    if p == 2.0:
        return np.ones_like(s)
    with np.errstate(divide="ignore"):
        coeff = np.where(base > 0.0, base ** ((p - 2.0) / 2.0), 0.0)
    return coeff


def _power_mass(values: np.ndarray, p: float) -> np.ndarray:
    """Pointwise derivative density ``|u|^(p-2) u``, zero at u = 0 for p > 1."""
    return np.sign(values) * np.abs(values) ** (p - 1.0)


def _dirichlet_gradient_rep(mesh: Mesh, g: np.ndarray, s: np.ndarray, p: float, delta: float) -> np.ndarray:
    """Plain-dot representation of the first variation of
    ``(1/p) int (|grad u|^2 + delta^2)^(p/2)``."""
    w_act = mesh.weights * ~mesh.excluded_mask
    coeff = _flux_coeff(s, p, delta)
    r = np.zeros(mesh.n_nodes)
    for a, op in enumerate(mesh.gradient_ops()):
        r += op.T @ (w_act * coeff * g[:, a])
    return r


def q_v(u: DiscreteFunction, V: Potential, params: EnergyParams) -> float:
    """Energy gap ``int |grad u|^p - int V |u|^p``; the p-Dirichlet energy
    when V = 0, and p-homogeneous in u."""
    mesh = u.mesh
    _, s = _grad_square(mesh, u.values)
    p = params.p
    out = integrate(s ** (p / 2.0), mesh)
    if V.kind != "zero":
        v_vals = evaluate_potential(V, mesh)
        out -= integrate(v_vals * np.abs(u.values) ** p, mesh)
    return out


def phi(u: DiscreteFunction, V: Potential, f: ForcingTerm, params: EnergyParams) -> float:
    """Regularized objective

    ``(1/p) int |grad u|^p - ((1-eps)/p) int V |u|^p + (eps/p) int |u|^p - <f, u>``

    with the gradient term smoothed to ``((|grad u|^2 + delta^2)^(p/2) -
    delta^p)`` so that it stays the exact antiderivative of
    :func:`phi_gradient` and vanishes at u = 0.
    """
    mesh = u.mesh
    v_vals = evaluate_potential(V, mesh) if V.kind != "zero" else None
    return _phi_arrays(mesh, u.values, v_vals, f, params)


def _phi_arrays(mesh: Mesh, values: np.ndarray, v_vals: np.ndarray | None,
                f: ForcingTerm, params: EnergyParams) -> float:
    p, eps, delta = params.p, params.eps, params.delta
    _, s = _grad_square(mesh, values)
    smoothed = (s + delta * delta) ** (p / 2.0) - delta**p
    total = integrate(smoothed, mesh) / p
    mass = np.abs(values) ** p
    if v_vals is not None:
        total -= (1.0 - eps) / p * integrate(v_vals * mass, mesh)
    if eps != 0.0:
        total += eps / p * integrate(mass, mesh)
    return total - float(f.plain_rep() @ values)


def phi_gradient(u: DiscreteFunction, V: Potential, f: ForcingTerm, params: EnergyParams) -> DiscreteFunction:
    """Nodal first variation of :func:`phi`.

    At ``delta = 0`` and p = 2 this is the exact discrete residual of the
    linear equation; in general it satisfies
    ``<phi_gradient(u), w> = d/dt phi(u + t w)|_{t=0}`` exactly in the mesh
    quadrature pairing, for every w vanishing on constrained nodes.
    """
    mesh = u.mesh
    v_vals = evaluate_potential(V, mesh) if V.kind != "zero" else None
    nodal = _phi_gradient_arrays(mesh, u.values, v_vals, f, params)
    return DiscreteFunction(mesh, nodal)


def _phi_gradient_arrays(mesh: Mesh, values: np.ndarray, v_vals: np.ndarray | None,
                         f: ForcingTerm, params: EnergyParams) -> np.ndarray:
    p, eps, delta = params.p, params.eps, params.delta
    g, s = _grad_square(mesh, values)
    nodal = _dirichlet_gradient_rep(mesh, g, s, p, delta) / mesh.weights
    mass_grad = _power_mass(values, p)
    if v_vals is not None:
        nodal -= (1.0 - eps) * v_vals * mass_grad
    if eps != 0.0:
        nodal += eps * mass_grad
    nodal -= f.nodal_density()
    nodal[mesh.constrained_mask] = 0.0
    return nodal


def truncate(s):
    """Clamp to [-1, 1]; odd and idempotent."""
    if np.isscalar(s):
        return float(min(1.0, max(-1.0, s)))
    return np.clip(np.asarray(s, dtype=float), -1.0, 1.0)


def truncate_field(u: DiscreteFunction) -> DiscreteFunction:
    """Apply the clamp nodewise."""
    return DiscreteFunction(u.mesh, truncate(u.values))


def cauchy_diagnostic(u_a: DiscreteFunction, u_b: DiscreteFunction,
                      cutoff: DiscreteFunction, params: EnergyParams) -> float:
    """Localized monotonicity pairing of the p-gradient fluxes.

    Integrates ``cutoff * (F(u_a) - F(u_b)) . grad T(u_a - u_b)`` with
    ``F(v) = |grad v|^(p-2) grad v``; nonnegative up to quadrature noise
    wherever the clamp is inactive, and vanishing along a converging solve.
    """
    mesh = u_a.mesh
    if u_b.mesh is not mesh or cutoff.mesh is not mesh:
        raise ValueError("all fields must share one mesh")
    p = params.p
    g_a, s_a = _grad_square(mesh, u_a.values)
    g_b, s_b = _grad_square(mesh, u_b.values)
    flux = _flux_coeff(s_a, p, 0.0)[:, None] * g_a - _flux_coeff(s_b, p, 0.0)[:, None] * g_b
    diff = truncate(u_a.values - u_b.values)
    ops = mesh.gradient_ops()
    g_t = np.column_stack([op @ diff for op in ops])
    integrand = cutoff.values * np.einsum("ij,ij->i", flux, g_t)
    return integrate(integrand, mesh)


def y_norm(u: DiscreteFunction, W: Weight, params: EnergyParams) -> float:
    """Weighted Sobolev norm ``(int (|grad u|^q + |u|^q) W)^(1/q)``."""
    mesh = u.mesh
    q = params.q
    _, s = _grad_square(mesh, u.values)
    w_vals = evaluate_weight(W, mesh)
    total = integrate((s ** (q / 2.0) + np.abs(u.values) ** q) * w_vals, mesh)
    return total ** (1.0 / q)


def sobolev_norm(u: DiscreteFunction, p: float) -> float:
    """Unweighted norm ``(int |grad u|^p + int |u|^p)^(1/p)``."""
    mesh = u.mesh
    _, s = _grad_square(mesh, u.values)
    total = integrate(s ** (p / 2.0) + np.abs(u.values) ** p, mesh)
    return total ** (1.0 / p)


def residual_norm(g: DiscreteFunction) -> float:
    """Quadrature-weighted l2 size of a nodal residual."""
    return np.sqrt(max(integrate(g.values**2, g.mesh), 0.0))


def dual_norm(
    f: ForcingTerm,
    V: Potential,
    params: EnergyParams,
    budget: int = 200,
    seed: int = 0,
    rel_tol: float = 1e-10,
) -> float:
    """Lower estimate of ``sup { <f, u> : q_v(u) = 1 }`` by projected ascent.

    Maximizes the scale-invariant quotient ``<f, u> / q_v(u)^(1/p)`` with a
    preconditioned ascent, renormalizing ``q_v = 1`` after every accepted
    step.  The returned value is the running maximum, hence a certified lower
    bound of the discrete supremum, monotone nondecreasing in ``budget`` and
    deterministic in ``(seed, budget)``.

    Raises :class:`IndefiniteEnergyError` if an iterate has nonpositive
    energy, which contradicts the standing positivity assumption.
    """
    mesh = f.mesh
    p = params.p
    r = f.plain_rep()
    if not np.any(r):
        return 0.0
    v_vals = evaluate_potential(V, mesh) if V.kind != "zero" else None
    pre = Preconditioner(mesh, shift=1.0)

    def energy(values: np.ndarray) -> float:
        _, s = _grad_square(mesh, values)
        out = integrate(s ** (p / 2.0), mesh)
        if v_vals is not None:
            out -= integrate(v_vals * np.abs(values) ** p, mesh)
        return out

    def check_definite(qv: float, values: np.ndarray) -> None:
        if qv <= 0.0 and np.any(values):
            raise IndefiniteEnergyError(
                f"energy form nonpositive ({qv:.3e}) on a nonzero iterate; "
                "the positivity assumption fails on this mesh"
            )

    u = pre.apply(f.nodal_density())
    u[mesh.constrained_mask] = 0.0
    if float(r @ u) < 0:
        u = -u
    if not np.any(u):
        from .sampling import bump_family

        u = next(bump_family(mesh, 1, seed)).values
    qv = energy(u)
    check_definite(qv, u)
    u = u / qv ** (1.0 / p)

    def quotient(values: np.ndarray) -> float:
        qv = energy(values)
        check_definite(qv, values)
        if qv == 0.0:
            return 0.0
        return float(r @ values) / qv ** (1.0 / p)

    best = quotient(u)
    step = 1.0
    since_improved = 0
    for _ in range(budget):
        qv = energy(u)
        check_definite(qv, u)
        pairing = float(r @ u)
        g, s = _grad_square(mesh, u)
        qv_grad = p * _dirichlet_gradient_rep(mesh, g, s, p, 0.0) / mesh.weights
        if v_vals is not None:
            qv_grad -= p * v_vals * _power_mass(u, p)
        g_j = (f.nodal_density() - pairing / (p * qv) * qv_grad) / qv ** (1.0 / p)
        g_j[mesh.constrained_mask] = 0.0
        res = np.sqrt(max(integrate(g_j**2, mesh), 0.0))
        if res <= rel_tol * max(1.0, abs(best)):
            break
        d = pre.apply(g_j)
        slope = float((mesh.weights * g_j) @ d)
        if slope <= 0.0:
            d = g_j
            slope = float((mesh.weights * g_j) @ g_j)
        taken, u_new, neg_val = armijo_backtrack(
            lambda vals: -quotient(vals), u, d, -quotient(u), -slope,
            init_step=step,
            noise=32.0 * np.finfo(float).eps * (1.0 + abs(best)),
        )
        if taken is None:
            break
        step = min(max(taken * 2.0, 1e-6), 4.0)
        qv_new = energy(u_new)
        check_definite(qv_new, u_new)
        u = u_new / qv_new ** (1.0 / p)
        if -neg_val > best * (1.0 + rel_tol):
            since_improved = 0
        else:
            since_improved += 1
        best = max(best, -neg_val)
        if since_improved >= 20:
            break
    return best
