"""Hand-assembled reference systems, independent of the library code paths."""

import numpy as np


def wide_system_1d(n):
    """1D operator matching the nodal-gradient discretization on (0, 1):
    A = G^T diag(w) G with centered interior and one-sided edge stencils,
    trapezoidal weights w."""
    x = np.linspace(0.0, 1.0, n)
    h = x[1] - x[0]
    G = np.zeros((n, n))
    G[0, 0], G[0, 1] = -1 / h, 1 / h
    G[-1, -2], G[-1, -1] = -1 / h, 1 / h
    for i in range(1, n - 1):
        G[i, i - 1], G[i, i + 1] = -0.5 / h, 0.5 / h
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    A = G.T @ np.diag(w) @ G
    return x, h, w, A
