"""Structured tensor-product grids with boundary masks, trapezoidal quadrature,
and first-order difference calculus.

Domains are boxes, intervals, strips (a bounded cross-section times truncated
unbounded axes), and boxes punctured at the origin.  All fields live as flat
per-node arrays in C order; functions that vanish on the boundary mask model
compactly supported test functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Domain",
    "Mesh",
    "DiscreteFunction",
    "interval",
    "box",
    "strip",
    "punctured_box",
    "build_mesh",
    "gradient",
    "divergence",
    "integrate",
]

_DOMAIN_KINDS = ("interval", "box", "strip", "punctured_box")


@dataclass(frozen=True)
class Domain:
    """Tensor-product computational domain.

    Attributes
    ----------
    kind : str
        One of ``interval``, ``box``, ``strip``, ``punctured_box``.
    bounds : tuple of (lo, hi)
        Extent per axis.  For a strip the truncated axes carry ``(-L, L)``.
    unbounded_axes : frozenset of int
        Axes that stand in for unbounded directions, truncated at ``+-L``.
    puncture_radius : float
        Radius of the ball removed around the origin (``punctured_box`` only).
    """

    kind: str
    bounds: tuple[tuple[float, float], ...]
    unbounded_axes: frozenset[int] = field(default_factory=frozenset)
    puncture_radius: float = 0.0

    def __post_init__(self):
        if self.kind not in _DOMAIN_KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not self.bounds:
            raise ValueError("domain needs at least one axis")
        for a, (lo, hi) in enumerate(self.bounds):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"axis {a}: bounds must satisfy lo < hi, got ({lo}, {hi})")
        for a in self.unbounded_axes:
            if a < 0 or a >= len(self.bounds):
                raise ValueError(f"unbounded axis index {a} out of range")
            lo, hi = self.bounds[a]
            if not (lo == -hi and hi > 0):
                raise ValueError(f"truncated axis {a} must have bounds (-L, L) with L > 0")
        if self.puncture_radius < 0:
            raise ValueError("puncture_radius must be nonnegative")
        if self.puncture_radius > 0:
            if self.kind != "punctured_box":
                raise ValueError("puncture_radius is only valid for punctured_box domains")
            gap = min(min(-lo, hi) for lo, hi in self.bounds)
            if gap <= 0:
                raise ValueError("punctured_box must contain the origin in its interior")
            if self.puncture_radius >= gap:
                raise ValueError(
                    f"puncture_radius {self.puncture_radius} must be smaller than the "
                    f"distance {gap} from the origin to the boundary"
                )

    @property
    def dims(self) -> int:
        return len(self.bounds)

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.bounds]))


def interval(lo: float, hi: float) -> Domain:
    """One-dimensional domain ``(lo, hi)``."""
    return Domain("interval", ((float(lo), float(hi)),))


def box(*bounds: tuple[float, float]) -> Domain:
    """Axis-aligned box with the given per-axis bounds."""
    bs = tuple((float(lo), float(hi)) for lo, hi in bounds)
    return Domain("box" if len(bs) > 1 else "interval", bs)


def strip(omega_bounds: Sequence[tuple[float, float]], m_axes: int, length: float) -> Domain:
    """Cross-section times ``m_axes`` unbounded directions truncated at ``+-length``.

    The first axes carry the bounded cross-section, the trailing ``m_axes``
    axes the truncated directions; points split as x = (y, z).
    """
    if m_axes < 1:
        raise ValueError("strip needs at least one unbounded axis")
    if length <= 0:
        raise ValueError("truncation length must be positive")
    ob = tuple((float(lo), float(hi)) for lo, hi in omega_bounds)
    n_omega = len(ob)
    zb = tuple((-float(length), float(length)) for _ in range(m_axes))
    unb = frozenset(range(n_omega, n_omega + m_axes))
    return Domain("strip", ob + zb, unbounded_axes=unb)


def punctured_box(*bounds: tuple[float, float], radius: float) -> Domain:
    """Box containing the origin, with the ball of ``radius`` removed."""
    bs = tuple((float(lo), float(hi)) for lo, hi in bounds)
    return Domain("punctured_box", bs, puncture_radius=float(radius))


class Mesh:
    """Structured grid over a :class:`Domain` with masks and quadrature weights.

    Nodes are stored flat in C order.  ``boundary_mask`` flags nodes on the
    outer box faces; ``excluded_mask`` flags nodes inside the puncture or the
    singular cap, which never participate in integrals.  ``weights`` are
    tensor trapezoidal; the weight sum over non-excluded nodes approximates
    the domain volume minus the excluded volume.

    Meshes are immutable after construction and safe to share.
    """

    def __init__(
        self,
        domain: Domain,
        nodes_per_axis: Sequence[int],
        singular_cap_radius: float = 0.0,
        singular_axes: Sequence[int] | None = None,
    ):
        shape = tuple(int(n) for n in nodes_per_axis)
        if len(shape) != domain.dims:
            raise ValueError(f"expected {domain.dims} node counts, got {len(shape)}")
        for a, n in enumerate(shape):
            if n < 3:
                raise ValueError(f"axis {a}: need at least 3 nodes per axis, got {n}")
        if singular_cap_radius < 0:
            raise ValueError("singular_cap_radius must be nonnegative")
        smallest_extent = min(hi - lo for lo, hi in domain.bounds)
        if singular_cap_radius >= 0.5 * smallest_extent:
            raise ValueError(
                f"singular_cap_radius {singular_cap_radius} must be below half the "
                f"smallest extent {smallest_extent}"
            )

        self.domain = domain
        self.shape = shape
        self.axes = tuple(
            np.linspace(lo, hi, n) for (lo, hi), n in zip(domain.bounds, shape)
        )
        self.spacing = np.array([ax[1] - ax[0] for ax in self.axes])
        grids = np.meshgrid(*self.axes, indexing="ij")
        self.points = np.column_stack([g.ravel() for g in grids])
        self.n_nodes = self.points.shape[0]

        bmask = np.zeros(shape, dtype=bool)
        for a in range(domain.dims):
            sl = [slice(None)] * domain.dims
            sl[a] = 0
            bmask[tuple(sl)] = True
            sl[a] = -1
            bmask[tuple(sl)] = True
        self.boundary_mask = bmask.ravel()

        w = None
        for a in range(domain.dims):
            wa = np.full(shape[a], self.spacing[a])
            wa[0] *= 0.5
            wa[-1] *= 0.5
            w = wa if w is None else np.multiply.outer(w, wa)
        self.weights = w.ravel()

        self.singular_cap_radius = float(singular_cap_radius)
        self.singular_axes = (
            tuple(range(domain.dims)) if singular_axes is None else tuple(sorted(singular_axes))
        )
        for a in self.singular_axes:
            if a < 0 or a >= domain.dims:
                raise ValueError(f"singular axis index {a} out of range")

        excluded = np.zeros(self.n_nodes, dtype=bool)
        if domain.puncture_radius > 0:
            excluded |= np.linalg.norm(self.points, axis=1) < domain.puncture_radius
        if singular_cap_radius > 0:
            d = np.linalg.norm(self.points[:, self.singular_axes], axis=1)
            excluded |= d < singular_cap_radius
        self.excluded_mask = excluded
        self.constrained_mask = self.boundary_mask | self.excluded_mask
        self.free_mask = ~self.constrained_mask
        self.interior_mask = self.free_mask

        self._grad_ops: tuple[sp.csr_matrix, ...] | None = None
        self._stiffness: sp.csr_matrix | None = None

    @property
    def excluded_volume(self) -> float:
        """Quadrature volume attributed to excluded nodes."""
        return float(self.weights[self.excluded_mask].sum())

    def singular_distance(self) -> np.ndarray:
        """Per-node distance to the singular set (origin in the singular axes)."""
        return np.linalg.norm(self.points[:, self.singular_axes], axis=1)

    def gradient_ops(self) -> tuple[sp.csr_matrix, ...]:
        """Per-axis sparse difference operators.

        Centered where both neighbor values are usable, one-sided where the
        stencil would leave the grid or cross an excluded node, zero rows at
        excluded nodes.  Exact for affine fields away from masks.
        """
        if self._grad_ops is None:
            self._grad_ops = tuple(self._build_grad_op(a) for a in range(self.domain.dims))
        return self._grad_ops

    def _build_grad_op(self, axis: int) -> sp.csr_matrix:
        nd = self.domain.dims
        shape = self.shape
        h = self.spacing[axis]
        idx = np.arange(self.n_nodes).reshape(shape)
        exc = self.excluded_mask.reshape(shape)

        def axsl(s):
            sl = [slice(None)] * nd
            sl[axis] = s
            return tuple(sl)

        left_nbr = np.full(shape, -1, dtype=np.int64)
        left_nbr[axsl(slice(1, None))] = idx[axsl(slice(0, -1))]
        right_nbr = np.full(shape, -1, dtype=np.int64)
        right_nbr[axsl(slice(0, -1))] = idx[axsl(slice(1, None))]

        left_ok = np.zeros(shape, dtype=bool)
        left_ok[axsl(slice(1, None))] = ~exc[axsl(slice(0, -1))]
        right_ok = np.zeros(shape, dtype=bool)
        right_ok[axsl(slice(0, -1))] = ~exc[axsl(slice(1, None))]

        active = ~exc
        centered = (active & left_ok & right_ok).ravel()
        fwd = (active & ~left_ok & right_ok).ravel()
        bwd = (active & left_ok & ~right_ok).ravel()
        idx = idx.ravel()
        left_nbr = left_nbr.ravel()
        right_nbr = right_nbr.ravel()

        rows = [idx[centered], idx[centered], idx[fwd], idx[fwd], idx[bwd], idx[bwd]]
        cols = [
            right_nbr[centered],
            left_nbr[centered],
            right_nbr[fwd],
            idx[fwd],
            idx[bwd],
            left_nbr[bwd],
        ]
        vals = [
            np.full(centered.sum(), 0.5 / h),
            np.full(centered.sum(), -0.5 / h),
            np.full(fwd.sum(), 1.0 / h),
            np.full(fwd.sum(), -1.0 / h),
            np.full(bwd.sum(), 1.0 / h),
            np.full(bwd.sum(), -1.0 / h),
        ]
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_nodes, self.n_nodes),
        )
        return mat.tocsr()

    def energy_stiffness(self) -> sp.csr_matrix:
        """Quadratic form of the discrete Dirichlet energy,
        ``sum_a D_a^T diag(active weights) D_a``; the exact Hessian of
        ``(1/2) int |grad u|^2`` in this discretization.
        """
        if self._stiffness is None:
            w_act = sp.diags(self.weights * ~self.excluded_mask)
            A = None
            for op in self.gradient_ops():
                Aa = op.T @ w_act @ op
                A = Aa if A is None else A + Aa
            self._stiffness = A.tocsr()
        return self._stiffness


def build_mesh(
    domain: Domain,
    nodes_per_axis: Sequence[int],
    singular_cap_radius: float = 0.0,
    singular_axes: Sequence[int] | None = None,
) -> Mesh:
    """Build a structured mesh over ``domain``.

    Parameters
    ----------
    domain : Domain
    nodes_per_axis : sequence of int
        At least 3 nodes on each axis.
    singular_cap_radius : float
        Nodes within this distance of the origin (measured over
        ``singular_axes``) are excluded from all integrals.
    singular_axes : sequence of int, optional
        Axes defining the singular distance; all axes by default.
    """
    return Mesh(domain, nodes_per_axis, singular_cap_radius, singular_axes)


class DiscreteFunction:
    """Nodal scalar field on a mesh, zero on boundary and excluded nodes.

    Values are copied at construction, projected to zero on constrained
    nodes, and checked finite.  Instances are treated as immutable.
    """

    __slots__ = ("mesh", "values")

    def __init__(self, mesh: Mesh, values: np.ndarray):
        vals = np.array(values, dtype=float).ravel()
        if vals.size != mesh.n_nodes:
            raise ValueError(f"expected {mesh.n_nodes} nodal values, got {vals.size}")
        vals[mesh.constrained_mask] = 0.0
        if not np.all(np.isfinite(vals)):
            raise ValueError("nodal values must be finite")
        self.mesh = mesh
        self.values = vals

    @classmethod
    def zeros(cls, mesh: Mesh) -> "DiscreteFunction":
        return cls(mesh, np.zeros(mesh.n_nodes))

    @classmethod
    def from_callable(cls, mesh: Mesh, fn: Callable[[np.ndarray], np.ndarray]) -> "DiscreteFunction":
        """Sample ``fn`` at the mesh nodes; ``fn`` maps (n, dims) points to values."""
        return cls(mesh, np.asarray(fn(mesh.points), dtype=float))

    def copy_with(self, values: np.ndarray) -> "DiscreteFunction":
        return DiscreteFunction(self.mesh, values)

    def __add__(self, other: "DiscreteFunction") -> "DiscreteFunction":
        self._check_mesh(other)
        return DiscreteFunction(self.mesh, self.values + other.values)

    def __sub__(self, other: "DiscreteFunction") -> "DiscreteFunction":
        self._check_mesh(other)
        return DiscreteFunction(self.mesh, self.values - other.values)

    def __mul__(self, scalar: float) -> "DiscreteFunction":
        return DiscreteFunction(self.mesh, self.values * float(scalar))

    __rmul__ = __mul__

    def _check_mesh(self, other: "DiscreteFunction"):
        if other.mesh is not self.mesh:
            raise ValueError("functions live on different meshes")


def gradient(u: DiscreteFunction) -> np.ndarray:
    """Per-node gradient of ``u`` as an (n_nodes, dims) array."""
    ops = u.mesh.gradient_ops()
    return np.column_stack([op @ u.values for op in ops])


def divergence(field: np.ndarray, mesh: Mesh) -> np.ndarray:
    """Per-node divergence of an (n_nodes, dims) vector field."""
    field = np.asarray(field, dtype=float)
    if field.shape != (mesh.n_nodes, mesh.domain.dims):
        raise ValueError(f"expected shape {(mesh.n_nodes, mesh.domain.dims)}, got {field.shape}")
    ops = mesh.gradient_ops()
    out = np.zeros(mesh.n_nodes)
    for a, op in enumerate(ops):
        out += op @ field[:, a]
    return out


def integrate(field: np.ndarray, mesh: Mesh) -> float:
    """Trapezoidal quadrature of a per-node field over the non-excluded nodes."""
    field = np.asarray(field, dtype=float).ravel()
    if field.size != mesh.n_nodes:
        raise ValueError(f"expected {mesh.n_nodes} nodal values, got {field.size}")
    active = ~mesh.excluded_mask
    return float(np.dot(field[active], mesh.weights[active]))
