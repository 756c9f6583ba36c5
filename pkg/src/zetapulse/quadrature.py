import logging
from typing import Callable

import numpy as np

from .errors import DomainError, QuadratureError

logger = logging.getLogger(__name__)

QUADRATURE_TOL = 1e-10
MIN_PANELS = 16
MAX_PANELS = 2**20


def _simpson(values: np.ndarray, widths: np.ndarray) -> np.ndarray:
    n = values.shape[-1] - 1
    weights = np.ones(n + 1)
    weights[1:-1:2] = 4
    weights[2:-1:2] = 2
    return widths * (values @ weights) / (3 * n)


def cumulative_simpson(
    f: Callable[[np.ndarray], np.ndarray],
    grid: np.ndarray,
    tol: float = QUADRATURE_TOL,
    max_panels: int = MAX_PANELS,
) -> np.ndarray:
    """
    Running integral of f over an increasing grid: out[k] = int_{grid[0]}^{grid[k]} f.

    Every grid interval gets a composite Simpson rule whose panel count doubles,
    reusing the previous samples, until the total change between refinements is
    below `tol`. The converged pair is combined with one Richardson step.

    Parameters:
    f (Callable): Vectorized integrand.
    grid (np.ndarray): Strictly increasing abscissae.
    tol (float): Absolute tolerance on the change of the total integral.
    max_panels (int): Panel budget per interval before giving up.

    Returns:
    np.ndarray: Running integral, out[0] = 0.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise DomainError('grid must be a non-empty 1-d array')
    if grid.size == 1:
        return np.zeros(1)
    widths = np.diff(grid)
    if np.any(widths < 0):
        raise DomainError('grid must be non-decreasing')

    n = MIN_PANELS
    u = np.linspace(0.0, 1.0, n + 1)
    values = np.asarray(f(grid[:-1, None] + widths[:, None] * u), dtype=float)
    previous = _simpson(values, widths)
    while True:
        if 2 * n > max_panels:
            raise QuadratureError(f'no convergence to {tol:.1e} within {max_panels} panels per interval')
        mid = (np.arange(n) + 0.5) / n
        fresh = np.asarray(f(grid[:-1, None] + widths[:, None] * mid), dtype=float)
        refined = np.empty((values.shape[0], 2 * n + 1))
        refined[:, 0::2] = values
        refined[:, 1::2] = fresh
        values, n = refined, 2 * n
        current = _simpson(values, widths)
        change = np.abs(current - previous).sum()
        if change < tol:
            logger.debug('simpson converged with %d panels per interval, change %.2e', n, change)
            current = current + (current - previous) / 15
            break
        previous = current
    return np.concatenate(([0.0], np.cumsum(current)))


def integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, tol: float = QUADRATURE_TOL) -> float:
    """int_a^b f(t) dt by composite Simpson with panel doubling."""
    if b == a:
        return 0.0
    if b < a:
        return -integrate(f, b, a, tol)
    return float(cumulative_simpson(f, np.array([a, b]), tol=tol)[-1])
