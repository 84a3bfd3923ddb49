"""Adaptive embedded Runge–Kutta integration over real vector fields.

The stepper is Verner's "most robust" 6(5) pair (9 stages, FSAL: the last
stage evaluates the derivative at the accepted point and seeds the next
step).  Tableau constants from J. H. Verner, Numer. Algorithms 53, 383
(2010).  Standard PI step-size control; samples are produced by clipping
steps to land exactly on each requested grid time (no interpolation), so
sample times are hit bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import MaxStepsExceeded, StepUnderflow

# Verner 6(5) extended Butcher tableau.  Row i holds a_{i,j}; C are the
# stage nodes; B the 6th-order propagating weights; BH the embedded
# 5th-order weights.  B equals row 7, so stage 8 is the new solution and
# stage 9 its derivative (FSAL).
_C = np.array([0.0, 9 / 50, 1 / 6, 1 / 4, 53 / 100, 3 / 5, 4 / 5, 1.0, 1.0])
_A_ROWS = [
    [],
    [9 / 50],
    [29 / 324, 25 / 324],
    [1 / 16, 0.0, 3 / 16],
    [79129 / 250000, 0.0, -261237 / 250000, 19663 / 15625],
    [1336883 / 4909125, 0.0, -25476 / 30875, 194159 / 185250, 8225 / 78546],
    [-2459386 / 14727375, 0.0, 19504 / 30875, 2377474 / 13615875,
     -6157250 / 5773131, 902 / 735],
    [2699 / 7410, 0.0, -252 / 1235, -1393253 / 3993990, 236875 / 72618,
     -135 / 49, 15 / 22],
    [11 / 144, 0.0, 0.0, 256 / 693, 0.0, 125 / 504, 125 / 528, 5 / 72],
]
_B = np.array([11 / 144, 0.0, 0.0, 256 / 693, 0.0, 125 / 504, 125 / 528, 5 / 72, 0.0])
_BH = np.array([28 / 477, 0.0, 0.0, 212 / 441, -312500 / 366177, 2125 / 1764,
                0.0, -2105 / 35532, 2995 / 17766])
_E = _B - _BH          # error-estimate weights
_A_ARR = [np.asarray(row) for row in _A_ROWS]
_N_STAGES = 9
_ORDER = 6             # propagating order; error estimator is order 5


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and step-control limits for :func:`integrate`."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    initial_step: float | None = None
    max_step: float = math.inf
    min_step: float = 1e-13
    max_steps: int = 50_000_000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not self.min_step < self.max_step:
            raise ValueError("min_step must be smaller than max_step")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times starting at 0 (units of 1/ω)."""

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("grid must be a nonempty 1-D array")
        if t[0] != 0.0:
            raise ValueError("grid must start at 0")
        if not np.all(np.isfinite(t)):
            raise ValueError("grid times must be finite")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("grid times must be strictly increasing")
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size


def _as_grid(grid) -> np.ndarray:
    if isinstance(grid, TimeGrid):
        return grid.times
    return TimeGrid(np.asarray(grid, dtype=float)).times


def _error_norm(err: np.ndarray, scale: np.ndarray) -> float:
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(rhs, t0, y0, f0, max_step, rel_tol, abs_tol):
    """Hairer-style starting-step heuristic (one extra rhs evaluation)."""
    scale = abs_tol + rel_tol * np.abs(y0)
    d0 = _error_norm(y0, scale)
    d1 = _error_norm(f0, scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = y0 + h0 * f0
    f1 = rhs(t0 + h0, y1)
    d2 = _error_norm(f1 - f0, scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / _ORDER)
    return min(100 * h0, h1, max_step)


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    grid,
    cfg: IntegratorConfig | None = None,
) -> np.ndarray:
    """Integrate dy/dt = rhs(t, y) and sample the solution on ``grid``.

    Parameters
    ----------
    rhs : callable(t, y) -> dy/dt, pure for determinism.
    y0 : real state vector at t = 0.
    grid : TimeGrid or strictly increasing array starting at 0.
    cfg : tolerances / limits; defaults resolve slow dissipative rates
        against unit-frequency oscillations.

    Returns
    -------
    ndarray of shape (len(grid), len(y0)); row i is y(grid[i]).

    Raises
    ------
    StepUnderflow, MaxStepsExceeded
    """
    if cfg is None:
        cfg = IntegratorConfig()
    times = _as_grid(grid)
    y = np.array(y0, dtype=float)
    out = np.empty((times.size, y.size))
    out[0] = y
    if times.size == 1:
        return out

    t = 0.0
    f_cur = rhs(t, y)
    h = cfg.initial_step
    if h is None:
        h = _initial_step(rhs, t, y, f_cur, cfg.max_step, cfg.rel_tol, cfg.abs_tol)
    h = min(h, cfg.max_step)

    k = np.empty((_N_STAGES, y.size))
    n_steps = 0
    err_prev = 1.0  # PI memory; neutral on the first step
    # PI exponents for an order-5 error estimator (Hairer II.4).
    k_exp = _ORDER
    alpha, beta = 0.7 / k_exp, 0.4 / k_exp

    for i_target in range(1, times.size):
        t_target = times[i_target]
        while True:
            remaining = t_target - t
            if remaining <= 0:
                break
            clipped = h >= remaining
            h_try = remaining if clipped else h
            if h_try < cfg.min_step:
                raise StepUnderflow(
                    f"step {h_try:.3e} below min_step {cfg.min_step:.3e} at t={t:.6g}"
                )

            k[0] = f_cur
            for s in range(1, _N_STAGES):
                dy = k[:s].T @ _A_ARR[s]
                k[s] = rhs(t + _C[s] * h_try, y + h_try * dy)
            y_new = y + h_try * (k.T @ _B)
            err_vec = h_try * (k.T @ _E)
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            err = _error_norm(err_vec, scale)

            n_steps += 1
            if n_steps > cfg.max_steps:
                raise MaxStepsExceeded(f"exceeded {cfg.max_steps} steps at t={t:.6g}")

            if err <= 1.0:
                t = t_target if clipped else t + h_try
                y = y_new
                f_cur = k[-1]  # FSAL: last stage is rhs(t_new, y_new)
                if not clipped:
                    # Keep the controller's proposal across clipped grid
                    # hits so dense sampling does not shrink the step.
                    if err == 0.0:
                        factor = 5.0
                    else:
                        factor = 0.9 * err ** (-alpha) * err_prev ** beta
                        factor = min(5.0, max(0.2, factor))
                    err_prev = max(err, 1e-10)
                    h = min(max(h_try * factor, 1e-16), cfg.max_step)
            else:
                h = h_try * min(0.9, max(0.2, 0.9 * err ** (-1.0 / k_exp)))
                if h < cfg.min_step:
                    raise StepUnderflow(
                        f"step {h:.3e} below min_step {cfg.min_step:.3e} at t={t:.6g}"
                    )
        out[i_target] = y
    return out
