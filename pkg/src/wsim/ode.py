"""Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)).

Tuned for small dense complex systems whose right-hand side costs a few
matrix products.  The solver works on flat complex vectors, clamps steps so
every requested sample time is hit exactly (no interpolation error enters
recorded samples), and treats the end of the window as a hard boundary so
callers can split integrations at generator discontinuities.  The inner
loop reuses buffers; with an 18x18 density matrix a step costs a few
hundred microseconds, dominated by the six stage evaluations.
"""

from __future__ import annotations

import numpy as np


class StepSizeUnderflow(RuntimeError):
    """Error control pushed the step below the resolvable time scale."""


# Dormand-Prince 5(4) tableau, stored complex so the stage combinations hit
# the fast BLAS path against complex states.  The fifth-order weights equal
# the last stage row (FSAL): an accepted step reuses its final evaluation.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = tuple(
    np.asarray(row, dtype=complex)
    for row in (
        [1 / 5],
        [3 / 40, 9 / 40],
        [44 / 45, -56 / 15, 32 / 9],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
        [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    )
)
_B5 = np.asarray([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0],
                 dtype=complex)
_B4 = np.asarray(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40],
    dtype=complex,
)
_ERR = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_ORDER_EXP = -1.0 / 5.0
# PI step control (Soderlind): damps the accept/reject oscillation that a
# pure I-controller develops when decayed fast modes pin the step to the
# explicit stability boundary.
_PI_EXP_NEW = -0.7 / 5.0
_PI_EXP_OLD = 0.4 / 5.0
_NORM_FLOOR = 1e-10


def _initial_step(rhs, t0, y0, f0, t_end, rtol, atol):
    # Hairer/Norsett/Wanner heuristic, clipped to the window.
    span = t_end - t0
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((np.abs(y0) / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((np.abs(f0) / scale) ** 2)))
    h0 = 1e-6 * span if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * f0
    f1 = rhs(t0 + h0, y1)
    d2 = float(np.sqrt(np.mean((np.abs(f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6 * span, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def integrate(rhs, y0: np.ndarray, samples: np.ndarray, rtol: float, atol: float,
              max_step: float = np.inf):
    """Integrate ``dy/dt = rhs(t, y)`` and return y at every sample time.

    ``samples`` must be strictly increasing; ``samples[0]`` is the initial
    time and ``y0`` is returned for it unchanged.  Steps never cross a
    sample time, so the returned values carry no interpolation error.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or len(samples) < 1:
        raise ValueError("samples must be a non-empty 1-d array")
    if len(samples) > 1 and not np.all(np.diff(samples) > 0):
        raise ValueError("samples must be strictly increasing")

    y = np.array(y0, dtype=complex)
    n = y.size
    out = np.empty((len(samples), n), dtype=complex)
    out[0] = y
    if len(samples) == 1:
        return out

    t = float(samples[0])
    t_end = float(samples[-1])
    tiny = 1e-14 * max(abs(t_end), abs(t), 1.0)

    f = np.asarray(rhs(t, y), dtype=complex)
    h = min(_initial_step(rhs, t, y, f, t_end, rtol, atol), max_step)

    k = np.empty((7, n), dtype=complex)
    stage = np.empty(n, dtype=complex)
    y_new = np.empty(n, dtype=complex)
    err = np.empty(n, dtype=complex)
    mag = np.empty(n, dtype=float)
    mag2 = np.empty(n, dtype=float)

    next_idx = 1
    prev_norm = 1.0
    while next_idx < len(samples):
        target = float(samples[next_idx])
        h = min(h, max_step, target - t)
        if h < tiny:
            raise StepSizeUnderflow(f"step size collapsed to {h:.3e} at t = {t:.6g}")

        k[0] = f
        for s in range(1, 7):
            np.dot(_A[s - 1] * h, k[:s], out=stage)
            stage += y
            k[s] = rhs(t + _C[s] * h, stage)
        np.dot(_B5 * h, k, out=y_new)
        y_new += y
        np.dot(_ERR * h, k, out=err)

        # scaled RMS error with buffer reuse
        np.abs(y, out=mag)
        np.abs(y_new, out=mag2)
        np.maximum(mag, mag2, out=mag)
        mag *= rtol
        mag += atol
        np.abs(err, out=mag2)
        mag2 /= mag
        norm = float(np.sqrt(np.dot(mag2, mag2) / n))

        if norm <= 1.0:
            t = t + h
            y, y_new = y_new, y
            f = k[6].copy()  # FSAL; copy survives a later rejected attempt
            if abs(t - target) <= tiny:
                out[next_idx] = y
                next_idx += 1
            norm = max(norm, _NORM_FLOOR)
            h = h * min(_MAX_FACTOR, _SAFETY * norm ** _PI_EXP_NEW * prev_norm ** _PI_EXP_OLD)
            prev_norm = norm
        else:
            h = h * max(_MIN_FACTOR, _SAFETY * norm ** _ORDER_EXP)
    return out
