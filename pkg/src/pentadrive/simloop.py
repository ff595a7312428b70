"""Compiled closed-loop runner: controller and plant advanced period by period.

This is the fast path behind the sweep harness. It reuses the jitted plant
integrator and candidate-selection kernel, so a run here matches the
step-by-step Python objects (FsmpcController + advance_control_period)
exactly; tests assert that equivalence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .fsmpc import (CandidateSet, ControllerConfig, build_candidates,
                    predictor_scalars, _select_candidate)
from .machine import MachineParams, OperatingPoint
from .plant import PlantConfig, _rk4_segment

TWO_PI = 2.0 * math.pi


@njit(cache=True, nogil=True)
def _run_loop(n_steps, ts, nsub,
              caa, cba, cxx, bab, bxy,
              rs, rr, lls, ls, lr, lm, c1,
              omega_r, omega_e, is_star, beta, lam_xy, lam_sc,
              pred_v, nseg, seg_frac, seg_legs, seg_v, seg_va,
              first_legs, is_zero, is_null, init_committed,
              i_log, e_log, applied_log, zero_log, ds_at, ds_mid, cost_log,
              va_t, va_s):
    """Run the loop for n_steps control periods. Returns -1, or the step at
    which the plant state stopped being finite."""
    y = np.zeros(6)
    ip1 = np.empty(4)
    gbuf = np.zeros(4)
    ref2 = np.zeros(4)
    cur_first = np.zeros(5, dtype=np.int8)
    cur_last = np.zeros(5, dtype=np.int8)
    last_legs = np.zeros(5, dtype=np.int8)

    theta = 0.0
    we_ts = omega_e * ts
    committed = init_committed
    cv0 = pred_v[committed, 0]
    cv1 = pred_v[committed, 1]
    cv2 = pred_v[committed, 2]
    cv3 = pred_v[committed, 3]
    pm0 = pm1 = pm2 = pm3 = 0.0
    pos = 0

    for k in range(n_steps):
        t_k = k * ts
        i0, i1, i2, i3 = y[0], y[1], y[2], y[3]
        i_log[k, 0] = i0
        i_log[k, 1] = i1
        i_log[k, 2] = i2
        i_log[k, 3] = i3
        e_log[k, 0] = is_star * math.sin(theta) - i0
        e_log[k, 1] = is_star * math.cos(theta) - i1
        e_log[k, 2] = -i2
        e_log[k, 3] = -i3

        if k > 0:
            gbuf[0] = (1.0 - beta) * gbuf[0] + beta * (i0 - pm0)
            gbuf[1] = (1.0 - beta) * gbuf[1] + beta * (i1 - pm1)
            gbuf[2] = (1.0 - beta) * gbuf[2] + beta * (i2 - pm2)
            gbuf[3] = (1.0 - beta) * gbuf[3] + beta * (i3 - pm3)

        # Realize the committed action for this period.
        c = committed
        if is_null[c]:
            ones = 0
            for j in range(5):
                ones += last_legs[j]
            bit = 1 if 5 - ones < ones else 0
            for j in range(5):
                cur_first[j] = bit
                cur_last[j] = bit
            mid = 0
        else:
            ns = nseg[c]
            mid = 0
            for j in range(5):
                cur_first[j] = seg_legs[c, 0, j]
                cur_last[j] = seg_legs[c, ns - 1, j]
            if ns == 2:
                for j in range(5):
                    if seg_legs[c, 0, j] != seg_legs[c, 1, j]:
                        mid += 1
        inter = 0
        for j in range(5):
            if last_legs[j] != cur_first[j]:
                inter += 1
        ds_at[k] = inter
        ds_mid[k] = mid
        applied_log[k] = c
        zero_log[k] = is_zero[c]

        # Delay-compensated prediction and selection of the next action.
        ip1[0] = caa * i0 - cba * i1 + bab * cv0 + gbuf[0]
        ip1[1] = cba * i0 + caa * i1 + bab * cv1 + gbuf[1]
        ip1[2] = cxx * i2 + bxy * cv2 + gbuf[2]
        ip1[3] = cxx * i3 + bxy * cv3 + gbuf[3]
        pm0 = ip1[0] - gbuf[0]
        pm1 = ip1[1] - gbuf[1]
        pm2 = ip1[2] - gbuf[2]
        pm3 = ip1[3] - gbuf[3]
        th2 = theta + 2.0 * we_ts
        ref2[0] = is_star * math.sin(th2)
        ref2[1] = is_star * math.cos(th2)
        best, best_cost, _ = _select_candidate(
            ip1, ref2, gbuf, caa, cba, cxx, bab, bxy, lam_xy, lam_sc,
            pred_v, first_legs, is_null, cur_last)
        cost_log[k] = best_cost

        # Integrate the plant over this period, logging phase-a voltage.
        if is_null[c]:
            h = ts / nsub
            for s in range(nsub):
                va_t[pos] = t_k + s * h
                va_s[pos] = 0.0
                pos += 1
            _rk4_segment(y, nsub, h, 0.0, 0.0, 0.0, 0.0,
                         omega_r, rs, rr, lls, ls, lr, lm, c1)
        elif nseg[c] == 1:
            h = ts / nsub
            for s in range(nsub):
                va_t[pos] = t_k + s * h
                va_s[pos] = seg_va[c, 0]
                pos += 1
            _rk4_segment(y, nsub, h, seg_v[c, 0, 0], seg_v[c, 0, 1],
                         seg_v[c, 0, 2], seg_v[c, 0, 3],
                         omega_r, rs, rr, lls, ls, lr, lm, c1)
        else:
            n_first = int(round(seg_frac[c, 0] * nsub))
            if n_first < 1:
                n_first = 1
            elif n_first > nsub - 1:
                n_first = nsub - 1
            t_seg = t_k
            for seg in range(2):
                n_sub_seg = n_first if seg == 0 else nsub - n_first
                duration = seg_frac[c, seg] * ts
                h = duration / n_sub_seg
                for s in range(n_sub_seg):
                    va_t[pos] = t_seg + s * h
                    va_s[pos] = seg_va[c, seg]
                    pos += 1
                _rk4_segment(y, n_sub_seg, h, seg_v[c, seg, 0], seg_v[c, seg, 1],
                             seg_v[c, seg, 2], seg_v[c, seg, 3],
                             omega_r, rs, rr, lls, ls, lr, lm, c1)
                t_seg += duration

        finite = True
        for j in range(6):
            if not math.isfinite(y[j]):
                finite = False
        if not finite:
            return k

        theta += we_ts
        if theta >= TWO_PI:
            theta -= TWO_PI
        committed = best
        cv0 = pred_v[best, 0]
        cv1 = pred_v[best, 1]
        cv2 = pred_v[best, 2]
        cv3 = pred_v[best, 3]
        for j in range(5):
            last_legs[j] = cur_last[j]
    return -1


@dataclass
class RunLog:
    """Everything one closed-loop run produced, at control-period resolution
    plus substep-resolution phase-a voltage."""

    op: OperatingPoint
    config: ControllerConfig
    plant: PlantConfig
    candidates: CandidateSet
    t: np.ndarray
    i_meas: np.ndarray
    e: np.ndarray
    applied: np.ndarray
    is_zero: np.ndarray
    ds_at: np.ndarray
    ds_mid: np.ndarray
    cost: np.ndarray
    va_times: np.ndarray
    va: np.ndarray
    failed_at: int | None

    def delta_s(self) -> np.ndarray:
        """Leg changes attributed to each sampling instant k: every event in
        the half-open interval (t[k-1], t[k]]."""
        ds = self.ds_at.astype(np.int64)
        ds[1:] += self.ds_mid[:-1]
        return ds


def run_closed_loop(op: OperatingPoint, config: ControllerConfig,
                    params: MachineParams, plant: PlantConfig,
                    n_steps: int,
                    candidates: CandidateSet | None = None) -> RunLog:
    """Run one operating point for n_steps control periods."""
    if config.ts != plant.ts:
        raise ValueError("controller and plant must share the control period")
    cand = candidates or build_candidates(config, params)
    caa, cba, cxx, bab, bxy = predictor_scalars(params, op.omega_r, config.ts)
    nsub = plant.substeps_per_ts

    i_log = np.empty((n_steps, 4))
    e_log = np.empty((n_steps, 4))
    applied = np.empty(n_steps, dtype=np.int32)
    zero_log = np.empty(n_steps, dtype=np.uint8)
    ds_at = np.empty(n_steps, dtype=np.int32)
    ds_mid = np.empty(n_steps, dtype=np.int32)
    cost_log = np.empty(n_steps)
    va_t = np.empty(n_steps * nsub)
    va_s = np.empty(n_steps * nsub)

    status = _run_loop(
        n_steps, config.ts, nsub, caa, cba, cxx, bab, bxy,
        params.Rs, params.Rr, params.Lls, params.Ls, params.Lr, params.LM,
        params.c1, op.omega_r, op.omega_e, op.is_star, config.g_filter_beta,
        config.lambda_xy, config.lambda_sc,
        cand.pred_v, cand.nseg, cand.seg_frac, cand.seg_legs, cand.seg_v,
        cand.seg_va, cand.first_legs, cand.is_zero, cand.is_null,
        cand.init_committed,
        i_log, e_log, applied, zero_log, ds_at, ds_mid, cost_log, va_t, va_s)

    return RunLog(op=op, config=config, plant=plant, candidates=cand,
                  t=np.arange(n_steps) * config.ts,
                  i_meas=i_log, e=e_log, applied=applied, is_zero=zero_log,
                  ds_at=ds_at, ds_mid=ds_mid, cost=cost_log,
                  va_times=va_t, va=va_s,
                  failed_at=None if status < 0 else int(status))
