"""Euler-Newton predictor-corrector path tracking in logarithmic coordinates.

Paths are followed in w = log z, so the imaginary part of w divided by 2 pi is
the lift of Arg(z) to the universal cover, continuous by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

TWO_PI = 2.0 * np.pi


class TrackingError(RuntimeError):
    """Base class for continuation failures."""


class StepUnderflow(TrackingError):
    """Step size fell below the floor; the path runs into (or near) a singular fibre."""


class LiftError(TrackingError):
    """An accepted step moved an argument by half a turn or more."""


@dataclass(frozen=True)
class StepControl:
    initial_step: float = 1e-2
    max_step: float = 5e-2
    min_step: float = 1e-8
    max_corrector_iters: int = 5
    grow_after: int = 4
    max_arg_change: float = 0.25
    tol: float = 1e-10
    max_steps: int = 200_000


@dataclass
class Homotopy:
    """F(w, lam), its w-Jacobian, and dF/dlam; each returns complex arrays."""

    F: Callable[[np.ndarray, float], np.ndarray]
    J: Callable[[np.ndarray, float], np.ndarray]
    dF: Callable[[np.ndarray, float], np.ndarray]
    scale: Callable[[np.ndarray, float], float] = lambda w, lam: 1.0


def newton(h: Homotopy, w: np.ndarray, lam: float, tol: float, max_iter: int):
    """Plain Newton at fixed lam. Returns (w, residual, iterations, converged)."""
    res = float(np.max(np.abs(h.F(w, lam))))
    for it in range(max_iter + 1):
        thresh = tol * max(1.0, h.scale(w, lam))
        if res < thresh:
            return w, res, it, True
        if it == max_iter:
            break
        try:
            dw = np.linalg.solve(h.J(w, lam), -h.F(w, lam))
        except np.linalg.LinAlgError:
            return w, res, it, False
        if not np.all(np.isfinite(dw)):
            return w, res, it, False
        w = w + dw
        res = float(np.max(np.abs(h.F(w, lam))))
    return w, res, max_iter, False


def track_path(h: Homotopy, w0: np.ndarray, lam0: float = 0.0, lam1: float = 1.0,
               ctl: StepControl = StepControl()) -> list[tuple[float, np.ndarray]]:
    """Follow the solution through w0 at lam0 to lam1; returns accepted samples."""
    w = np.asarray(w0, dtype=complex).copy()
    lam = lam0
    w, res, _, ok = newton(h, w, lam, ctl.tol, 8)
    if not ok:
        raise TrackingError(f"start point is not a solution (residual {res:.3e})")
    samples = [(lam, w.copy())]
    step = min(ctl.initial_step, ctl.max_step)
    streak = 0
    direction = 1.0 if lam1 >= lam0 else -1.0
    for _ in range(ctl.max_steps):
        remaining = (lam1 - lam) * direction
        if remaining <= 1e-15:
            return samples
        dl = min(step, remaining)
        try:
            tangent = np.linalg.solve(h.J(w, lam), -h.dF(w, lam))
        except np.linalg.LinAlgError:
            tangent = None
        accepted = False
        if tangent is not None and np.all(np.isfinite(tangent)):
            pred = w + direction * dl * tangent
            new_lam = lam1 if dl == remaining else lam + direction * dl
            w_new, res, iters, ok = newton(h, pred, new_lam, ctl.tol, ctl.max_corrector_iters)
            if ok:
                darg = np.max(np.abs((w_new - w).imag)) / TWO_PI
                dcorr = np.max(np.abs(w_new - pred))
                if darg < ctl.max_arg_change and dcorr < 0.5 * max(dl * np.max(np.abs(tangent)), 1e-3) + 1e-6:
                    accepted = True
        if accepted:
            if darg >= 0.5:
                raise LiftError(f"argument jumped by {darg:.3f} at lam={new_lam}")
            w, lam = w_new, new_lam
            samples.append((lam, w.copy()))
            streak += 1
            if streak >= ctl.grow_after:
                step = min(step * 2.0, ctl.max_step)
                streak = 0
        else:
            streak = 0
            step = dl / 2.0
            if step < ctl.min_step:
                raise StepUnderflow(f"step underflow at lam={lam:.10f}; "
                                    "path is at or near a singular fibre")
    raise TrackingError("maximum number of steps exceeded")
