"""Dormand-Prince 5(4) integrator with PI step control and dense output.

Works on arrays of any shape and dtype (complex density matrices in
particular).  Being a Runge-Kutta method it conserves linear invariants such
as the trace exactly, up to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StiffnessError

__all__ = ["IntegrationStats", "dopri5"]

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
# continuous extension of order 4 (Hairer & Wanner, DOPRI5 contd5)
D1, D3, D4 = -12715105075 / 11282082432, 87487479700 / 32700410799, -10690763975 / 1880347072
D5, D6, D7 = 701980252875 / 199316789632, -1453857185 / 822651844, 69997945 / 29380423

SAFETY = 0.9
BETA = 0.04
EXPO = 0.2 - 0.75 * BETA
MIN_FACTOR, MAX_FACTOR = 0.2, 10.0


@dataclass
class IntegrationStats:
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0


def _norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def _initial_step(fun, t0, y0, f0, rtol, atol, direction=1.0):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = fun(t0 + h0, y1)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def dopri5(fun, y0, t_eval, rtol=1e-8, atol=1e-10, h0=None, max_steps=10_000_000, stats=None):
    """Integrate ``dy/dt = fun(t, y)`` from ``t_eval[0]``, returning ``y`` at every ``t_eval``.

    ``t_eval`` must be increasing.  Values between steps come from the
    fourth-order continuous extension.  Raises :class:`StiffnessError` when
    the step size underflows or ``max_steps`` is exceeded.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.ndim != 1 or t_eval.size == 0 or np.any(np.diff(t_eval) < 0):
        raise ValueError("t_eval must be a nonempty increasing sequence")
    stats = IntegrationStats() if stats is None else stats
    y = np.array(y0, dtype=np.result_type(y0, float), copy=True)
    out = np.empty((t_eval.size,) + y.shape, dtype=y.dtype)
    t = float(t_eval[0])
    t_end = float(t_eval[-1])
    out[0] = y
    nxt = 1
    while nxt < t_eval.size and t_eval[nxt] == t:
        out[nxt] = y
        nxt += 1
    if nxt == t_eval.size:
        return out

    k1 = fun(t, y)
    stats.evaluations += 1
    h = _initial_step(fun, t, y, k1, rtol, atol) if h0 is None else float(h0)
    stats.evaluations += h0 is None
    facold = 1e-4
    steps = 0
    while nxt < t_eval.size:
        if steps >= max_steps:
            raise StiffnessError(f"exceeded {max_steps} steps at t={t:.6g}; the problem may be stiff")
        if h < 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise StiffnessError(
                f"step size underflow (h={h:.3e}) at t={t:.6g}; "
                "increase the cutoff or loosen the tolerance"
            )
        last = t + h >= t_end
        if last:
            h = t_end - t
        k2 = fun(t + C2 * h, y + h * (A21 * k1))
        k3 = fun(t + C3 * h, y + h * (A31 * k1 + A32 * k2))
        k4 = fun(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = fun(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = fun(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        y_new = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
        k7 = fun(t + h, y_new)
        stats.evaluations += 6
        steps += 1
        err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        err = _norm(err_vec, y, y_new, rtol, atol)

        fac11 = err**EXPO if err > 0 else 0.0
        if err <= 1.0:
            fac = fac11 / facold**BETA / SAFETY
            fac = min(1 / MIN_FACTOR, max(1 / MAX_FACTOR, fac))
            t_new = t_end if last else t + h
            if nxt < t_eval.size and t_eval[nxt] <= t_new:
                ydiff = y_new - y
                bspl = h * k1 - ydiff
                r4 = ydiff - h * k7 - bspl
                r5 = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7)
                while nxt < t_eval.size and t_eval[nxt] <= t_new:
                    theta = (t_eval[nxt] - t) / h
                    theta1 = 1 - theta
                    out[nxt] = y + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)))
                    nxt += 1
            facold = max(err, 1e-4)
            stats.accepted += 1
            t, y, k1 = t_new, y_new, k7
            h = h / fac
        else:
            stats.rejected += 1
            h = h / min(1 / MIN_FACTOR, fac11 / SAFETY)
    return out
