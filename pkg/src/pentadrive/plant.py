"""Continuous-time electrical model of the five-phase IM, integrated with RK4.

The applied inverter voltage is piecewise constant: one segment for a plain
voltage vector, two segments (Large then Medium) for a virtual vector. The
jitted kernels here are shared with the fast closed-loop runner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .machine import TWO_PI, DriveState, MachineParams
from .vsi import VirtualVector, VoltageVector, phase_voltages


@dataclass(frozen=True)
class PlantConfig:
    """Integration settings for one control period."""

    ts: float = 35e-6
    substeps_per_ts: int = 10
    integrator: str = "RK4"

    def __post_init__(self):
        if self.ts <= 0:
            raise ValueError(f"ts must be > 0, got {self.ts}")
        if self.substeps_per_ts < 2:
            raise ValueError(f"substeps_per_ts must be >= 2, got {self.substeps_per_ts}")
        if self.integrator != "RK4":
            raise ValueError(f"unsupported integrator {self.integrator!r}")


@njit(cache=True, nogil=True, inline="always")
def _deriv(y0, y1, y2, y3, y4, y5, va, vb, vx, vy, wr, rs, rr, lls, ls, lr, lm, c1):
    # y = (is_alpha, is_beta, i_x, i_y, ir_alpha, ir_beta); rotor voltage is zero.
    fa = va - rs * y0
    fb = vb - rs * y1
    pa = lm * y0 + lr * y4
    pb = lm * y1 + lr * y5
    ga = -rr * y4 - wr * pb
    gb = -rr * y5 + wr * pa
    return ((lr * fa - lm * ga) / c1,
            (lr * fb - lm * gb) / c1,
            (vx - rs * y2) / lls,
            (vy - rs * y3) / lls,
            (ls * ga - lm * fa) / c1,
            (ls * gb - lm * fb) / c1)


@njit(cache=True, nogil=True)
def _rk4_segment(y, nsub, h, va, vb, vx, vy, wr, rs, rr, lls, ls, lr, lm, c1):
    """Advance y in place over nsub RK4 steps of size h under constant voltage."""
    y0, y1, y2, y3, y4, y5 = y[0], y[1], y[2], y[3], y[4], y[5]
    for _ in range(nsub):
        a0, a1, a2, a3, a4, a5 = _deriv(y0, y1, y2, y3, y4, y5,
                                        va, vb, vx, vy, wr, rs, rr, lls, ls, lr, lm, c1)
        hh = 0.5 * h
        b0, b1, b2, b3, b4, b5 = _deriv(y0 + hh * a0, y1 + hh * a1, y2 + hh * a2,
                                        y3 + hh * a3, y4 + hh * a4, y5 + hh * a5,
                                        va, vb, vx, vy, wr, rs, rr, lls, ls, lr, lm, c1)
        c0, c1_, c2, c3, c4, c5 = _deriv(y0 + hh * b0, y1 + hh * b1, y2 + hh * b2,
                                         y3 + hh * b3, y4 + hh * b4, y5 + hh * b5,
                                         va, vb, vx, vy, wr, rs, rr, lls, ls, lr, lm, c1)
        d0, d1, d2, d3, d4, d5 = _deriv(y0 + h * c0, y1 + h * c1_, y2 + h * c2,
                                        y3 + h * c3, y4 + h * c4, y5 + h * c5,
                                        va, vb, vx, vy, wr, rs, rr, lls, ls, lr, lm, c1)
        k = h / 6.0
        y0 += k * (a0 + 2 * (b0 + c0) + d0)
        y1 += k * (a1 + 2 * (b1 + c1_) + d1)
        y2 += k * (a2 + 2 * (b2 + c2) + d2)
        y3 += k * (a3 + 2 * (b3 + c3) + d3)
        y4 += k * (a4 + 2 * (b4 + c4) + d4)
        y5 += k * (a5 + 2 * (b5 + c5) + d5)
    y[0], y[1], y[2], y[3], y[4], y[5] = y0, y1, y2, y3, y4, y5


def split_substeps(t_large: float, substeps: int) -> tuple[int, int]:
    """Substep counts for the Large/Medium segments of a virtual vector.

    The split honours the exact dwell boundary: each segment gets its own
    substep length, so segment durations are t_large*Ts and (1-t_large)*Ts
    exactly.
    """
    n_large = int(round(t_large * substeps))
    n_large = min(max(n_large, 1), substeps - 1)
    return n_large, substeps - n_large


def derivatives(state: DriveState, v_ab, v_xy, params: MachineParams) -> np.ndarray:
    """Time derivative of the current vector under the given plane voltages."""
    va, vb = float(v_ab[0]), float(v_ab[1])
    vx, vy = float(v_xy[0]), float(v_xy[1])
    if not all(np.isfinite(v) for v in (va, vb, vx, vy)):
        raise ValueError("voltages must be finite")
    y = state.currents()
    return np.array(_deriv(y[0], y[1], y[2], y[3], y[4], y[5],
                           va, vb, vx, vy, state.omega_r,
                           params.Rs, params.Rr, params.Lls,
                           params.Ls, params.Lr, params.LM, params.c1))


@dataclass(frozen=True)
class PeriodSamples:
    """Phase-a voltage at substep resolution over one control period."""

    times: np.ndarray
    va: np.ndarray


def _segments(applied, params: MachineParams, ts: float, substeps: int):
    """(duration, nsub, v_ab, v_xy, va_phase) tuples for one control period."""
    if isinstance(applied, VoltageVector):
        va_phase = float(phase_voltages(applied.legs, params.Vdc)[0])
        return [(ts, substeps, applied.v_ab, applied.v_xy, va_phase)]
    if isinstance(applied, VirtualVector):
        if applied.is_null:
            return [(ts, substeps, (0.0, 0.0), (0.0, 0.0), 0.0)]
        n_l, n_m = split_substeps(applied.t_large, substeps)
        lv, mv = applied.large, applied.medium
        return [
            (applied.t_large * ts, n_l, lv.v_ab, lv.v_xy,
             float(phase_voltages(lv.legs, params.Vdc)[0])),
            (applied.t_medium * ts, n_m, mv.v_ab, mv.v_xy,
             float(phase_voltages(mv.legs, params.Vdc)[0])),
        ]
    raise TypeError(f"applied must be a VoltageVector or VirtualVector, got {type(applied)}")


def advance_control_period(state: DriveState, applied, config: PlantConfig,
                           params: MachineParams,
                           omega_e: float) -> tuple[DriveState, PeriodSamples]:
    """Integrate the plant over one control period under the applied action.

    Returns the state at the end of the period and the phase-a voltage
    sampled at substep starts (for harmonic analysis). theta_a accumulates
    omega_e * ts, wrapped to [0, 2*pi).
    """
    y = state.currents()
    times = []
    va_samples = []
    t_seg = state.t
    for duration, nsub, v_ab, v_xy, va_phase in _segments(applied, params,
                                                          config.ts,
                                                          config.substeps_per_ts):
        h = duration / nsub
        times.extend(t_seg + i * h for i in range(nsub))
        va_samples.extend([va_phase] * nsub)
        _rk4_segment(y, nsub, h, v_ab[0], v_ab[1], v_xy[0], v_xy[1],
                     state.omega_r, params.Rs, params.Rr, params.Lls,
                     params.Ls, params.Lr, params.LM, params.c1)
        t_seg += duration
    if not np.all(np.isfinite(y)):
        raise RuntimeError(
            f"plant state became non-finite at t = {state.t:.6g} s "
            f"(applied {applied!r}); integration diverged")
    new_state = state.replace_currents(
        y, theta_a=(state.theta_a + omega_e * config.ts) % TWO_PI,
        t=state.t + config.ts)
    return new_state, PeriodSamples(np.array(times), np.array(va_samples))
