"""Generic ODE stepping: embedded Dormand-Prince 5(4) and fixed-step RK4.

Both methods march through an optional sorted list of stop times so that the
solution is exact (to integrator accuracy) at requested output nodes; between
accepted steps a cubic Hermite interpolant provides dense output.  Time may
run backward (t1 < t0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StepFailure

# Dormand-Prince 5(4) tableau (Hairer, Norsett, Wanner).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass
class OdeSolution:
    """Accepted nodes (ts, ys) plus derivatives (fs) for Hermite dense output."""

    ts: np.ndarray
    ys: np.ndarray
    fs: np.ndarray

    def __call__(self, t: float) -> np.ndarray:
        ts = self.ts
        ascending = ts[-1] >= ts[0]
        lo, hi = (ts[0], ts[-1]) if ascending else (ts[-1], ts[0])
        if not (lo - 1e-12 <= t <= hi + 1e-12):
            raise ValueError(f"t={t} outside the integrated interval [{lo}, {hi}]")
        grid = ts if ascending else ts[::-1]
        k = int(np.searchsorted(grid, t, side="right")) - 1
        k = min(max(k, 0), len(ts) - 2)
        if not ascending:
            k = len(ts) - 2 - k
        ta, tb = self.ts[k], self.ts[k + 1]
        if tb == ta:
            return self.ys[k].copy()
        s = (t - ta) / (tb - ta)
        h = tb - ta
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (h00 * self.ys[k] + h10 * h * self.fs[k]
                + h01 * self.ys[k + 1] + h11 * h * self.fs[k + 1])

    def sample(self, ts) -> np.ndarray:
        return np.array([self(t) for t in np.asarray(ts, float)])


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray,
                abs_tol: float, rel_tol: float) -> float:
    scale = abs_tol + rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def solve_dopri(rhs: Callable[[float, np.ndarray], np.ndarray],
                t0: float, y0, t1: float, *,
                abs_tol: float = 1e-10, rel_tol: float = 1e-10,
                max_steps: int = 2_000_000,
                t_stops=None,
                first_step: float | None = None) -> OdeSolution:
    """Adaptive 5(4) integration from t0 to t1 (either direction)."""
    y = np.asarray(y0, dtype=float).copy()
    t = float(t0)
    span = float(t1) - t
    if span == 0.0:
        f = np.asarray(rhs(t, y), float)
        return OdeSolution(np.array([t]), np.array([y]), np.array([f]))
    direction = 1.0 if span > 0 else -1.0

    stops = []
    if t_stops is not None:
        stops = sorted((float(s) for s in t_stops
                        if (s - t0) * direction > 1e-15 and (t1 - s) * direction > 1e-15),
                       key=lambda s: s * direction)
    stops.append(float(t1))

    f = np.asarray(rhs(t, y), float)
    h = abs(span) / 100.0 if first_step is None else abs(first_step)
    h = min(h, abs(span))

    ts = [t]
    ys = [y.copy()]
    fs = [f.copy()]
    k = np.zeros((7, y.size))

    stop_idx = 0
    steps = 0
    while stop_idx < len(stops):
        target = stops[stop_idx]
        if (target - t) * direction <= 1e-15 * max(1.0, abs(t)):
            stop_idx += 1
            continue
        if steps >= max_steps:
            raise StepFailure(f"exceeded max_steps={max_steps} at t={t:.6g}")
        steps += 1

        h = min(h, abs(target - t))
        if h < 1e-14 * max(1.0, abs(t)):
            raise StepFailure(f"step size underflow at t={t:.6g}")
        hs = direction * h

        k[0] = f
        for i in range(1, 7):
            yi = y + hs * (_A[i][:i] @ k[:i])
            k[i] = rhs(t + _C[i] * hs, yi)
        y_new = y + hs * (_B5 @ k)
        err = hs * (_E @ k)
        if not np.all(np.isfinite(y_new)):
            h *= 0.25
            continue
        norm = _error_norm(err, y, y_new, abs_tol, rel_tol)

        if norm <= 1.0:
            t_new = t + hs
            f_new = k[6].copy()  # FSAL: last stage is rhs at (t_new, y_new)
            t, y, f = t_new, y_new, f_new
            ts.append(t)
            ys.append(y.copy())
            fs.append(f.copy())
            factor = _MAX_FACTOR if norm == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * norm ** -0.2))
            h *= factor
        else:
            h *= max(_MIN_FACTOR, _SAFETY * norm ** -0.2)

    return OdeSolution(np.array(ts), np.array(ys), np.array(fs))


def solve_rk4(rhs: Callable[[float, np.ndarray], np.ndarray],
              t0: float, y0, t1: float, *, step: float,
              max_steps: int = 2_000_000,
              t_stops=None) -> OdeSolution:
    """Classic fixed-step RK4; the step is shrunk per segment to hit stop times."""
    if step <= 0:
        raise ValueError("rk4 step must be positive")
    y = np.asarray(y0, dtype=float).copy()
    t = float(t0)
    span = float(t1) - t
    f = np.asarray(rhs(t, y), float)
    if span == 0.0:
        return OdeSolution(np.array([t]), np.array([y]), np.array([f]))
    direction = 1.0 if span > 0 else -1.0

    stops = []
    if t_stops is not None:
        stops = sorted((float(s) for s in t_stops
                        if (s - t0) * direction > 1e-15 and (t1 - s) * direction > 1e-15),
                       key=lambda s: s * direction)
    stops.append(float(t1))

    ts = [t]
    ys = [y.copy()]
    fs = [f.copy()]
    total = 0
    for target in stops:
        seg = target - t
        n = max(1, int(np.ceil(abs(seg) / step - 1e-12)))
        h = seg / n
        for _ in range(n):
            total += 1
            if total > max_steps:
                raise StepFailure(f"exceeded max_steps={max_steps} at t={t:.6g}")
            k1 = f
            k2 = np.asarray(rhs(t + h / 2, y + h / 2 * k1), float)
            k3 = np.asarray(rhs(t + h / 2, y + h / 2 * k2), float)
            k4 = np.asarray(rhs(t + h, y + h * k3), float)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = t + h
            f = np.asarray(rhs(t, y), float)
            ts.append(t)
            ys.append(y.copy())
            fs.append(f.copy())
        t = target  # kill accumulated round-off at segment boundaries
        ts[-1] = t

    return OdeSolution(np.array(ts), np.array(ys), np.array(fs))
