"""Deterministic generators of interior-supported test functions.

Tensor bumps with random centers and widths drive the falsification checks;
plateau profiles build tensor candidates on strips.  Supports always keep
clear of the outer boundary and of any excluded cap, so sampled functions are
legitimate discrete test functions without projection artifacts.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .grid import DiscreteFunction, Mesh

__all__ = ["bump_profile", "plateau_profile", "tensor_bump", "bump_family"]


def bump_profile(t: np.ndarray) -> np.ndarray:
    """C1 compactly supported profile ``(1 - t^2)^2`` on ``|t| < 1``."""
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    out = np.zeros_like(t)
    out[inside] = (1.0 - t[inside] ** 2) ** 2
    return out


def plateau_profile(t: np.ndarray, plateau: float, ramp: float) -> np.ndarray:
    """Trapezoid profile: 1 on ``|t| <= plateau``, linear to 0 at ``plateau + ramp``."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.clip((plateau + ramp - t) / ramp, 0.0, 1.0)
    return out


def tensor_bump(mesh: Mesh, center: np.ndarray, width: np.ndarray) -> DiscreteFunction:
    """Product bump centered at ``center`` with per-axis half-widths ``width``."""
    vals = np.ones(mesh.n_nodes)
    for a in range(mesh.domain.dims):
        vals *= bump_profile((mesh.points[:, a] - center[a]) / width[a])
    return DiscreteFunction(mesh, vals)


def bump_family(mesh: Mesh, count: int, seed: int) -> Iterator[DiscreteFunction]:
    """Yield ``count`` random interior bumps, deterministic in ``seed``.

    Supports stay inside the domain with a one-cell margin and clear of the
    singular cap (measured over the mesh's singular axes) when one is present.
    """
    rng = np.random.default_rng(seed)
    dims = mesh.domain.dims
    lo = np.array([b[0] for b in mesh.domain.bounds])
    hi = np.array([b[1] for b in mesh.domain.bounds])
    extent = hi - lo
    h = mesh.spacing
    cap = max(mesh.singular_cap_radius, mesh.domain.puncture_radius)
    cap_axes = list(mesh.singular_axes) if mesh.singular_cap_radius > 0 else list(range(dims))

    wmax = np.minimum(0.4 * extent - h, 10 * h)
    wmin = np.minimum(2.0 * h, 0.8 * wmax)
    if np.any(wmax <= 0) or np.any(extent - 2 * (wmax + 0.5 * h) <= 0):
        raise RuntimeError("mesh too coarse for interior bump supports")

    produced = 0
    attempts = 0
    shrink = 1.0
    while produced < count:
        attempts += 1
        if attempts > 400 * count + 400:
            raise RuntimeError("could not place bump supports clear of boundary and cap")
        if attempts % 50 == 0 and shrink > 0.2:
            # repeated rejections mean the cap clearance needs narrower bumps
            shrink *= 0.7
        w_hi = np.maximum(wmax * shrink, np.minimum(1.5 * h, wmax))
        w_lo = np.minimum(wmin, 0.8 * w_hi)
        width = w_lo + (w_hi - w_lo) * rng.random(dims)
        margin = width + 0.5 * h
        center = lo + margin + (extent - 2 * margin) * rng.random(dims)
        if cap > 0:
            gap = np.maximum(np.abs(center[cap_axes]) - width[cap_axes], 0.0)
            if np.linalg.norm(gap) <= cap + np.max(h):
                continue
        u = tensor_bump(mesh, center, width)
        amp = 0.5 + 1.5 * rng.random()
        sign = 1.0 if rng.random() < 0.5 else -1.0
        yield u * (sign * amp)
        produced += 1
