"""Central finite differences for gradients and Hessians."""

from __future__ import annotations

import numpy as np

EPS = np.finfo(float).eps
GRAD_STEP = EPS ** (1 / 3)
HESS_STEP = EPS ** (1 / 4)


class NonFiniteStencil(FloatingPointError):
    """A function value inside a difference stencil was not finite."""

    def __init__(self, index: int, point):
        super().__init__(f"non-finite value in stencil for coordinate {index}")
        self.index = index
        self.point = point


def gradient(f, x, step: float = GRAD_STEP):
    """Central-difference gradient with steps ``step * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        with np.errstate(invalid="ignore", over="ignore"):
            g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def relative_steps(x, step: float = HESS_STEP):
    """Per-coordinate steps ``step * |x_i|``, falling back to ``step`` at zero."""
    x = np.asarray(x, dtype=float)
    return step * np.where(x != 0, np.abs(x), 1.0)


def hessian(f, x, steps=None):
    """Symmetrised central-difference Hessian of a scalar function.

    Parameters
    ----------
    f : callable
        Scalar function of a 1-d array.
    x : array_like
        Evaluation point.
    steps : array_like, optional
        Step per coordinate; defaults to :func:`relative_steps`.

    Raises
    ------
    NonFiniteStencil
        If any stencil evaluation is not finite.
    """
    x = np.asarray(x, dtype=float)
    k = x.size
    h = relative_steps(x) if steps is None else np.asarray(steps, dtype=float)

    def ev(point, i):
        v = f(point)
        if not np.isfinite(v):
            raise NonFiniteStencil(i, point)
        return v

    f0 = ev(x, 0)
    H = np.empty((k, k))
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        with np.errstate(over="ignore"):
            H[i, i] = (ev(x + ei, i) - 2 * f0 + ev(x - ei, i)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = (
                ev(x + ei + ej, i)
                - ev(x + ei - ej, i)
                - ev(x - ei + ej, i)
                + ev(x - ei - ej, i)
            ) / (4 * h[i] * h[j])
            H[j, i] = H[i, j]
    return (H + H.T) / 2
