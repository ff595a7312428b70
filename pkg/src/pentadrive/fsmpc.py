"""Finite-set predictive current controller with two-step delay compensation.

Single-vector variants choose among an allowed set of VSI states; the
multi-vector variant chooses among the 11 virtual vectors, whose candidate
voltage is the period average (zero in x-y by construction). A rotor-effect
disturbance term is estimated from the one-step model residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numba import njit

from .machine import MachineParams
from .vsi import (AvvSet, Corona, VirtualVector, VoltageVector, build_vv_table,
                  build_vvv_table, null_realization_legs, phase_voltages,
                  switch_changes)


class Variant(Enum):
    SINGLE_VECTOR = "sv"
    VIRTUAL_VECTOR = "vvv"


@dataclass(frozen=True)
class ControllerConfig:
    """Controller variant, allowed-vector set and cost weighting factors."""

    variant: Variant
    ts: float
    avv: AvvSet | None = None
    lambda_xy: float = 0.0
    lambda_sc: float = 0.0
    g_filter_beta: float = 1.0

    def __post_init__(self):
        if self.ts <= 0:
            raise ValueError(f"ts must be > 0, got {self.ts}")
        if self.lambda_xy < 0 or self.lambda_sc < 0:
            raise ValueError("weighting factors must be >= 0")
        if not 0 < self.g_filter_beta <= 1:
            raise ValueError(f"g_filter_beta must be in (0, 1], got {self.g_filter_beta}")
        if self.variant is Variant.SINGLE_VECTOR and self.avv is None:
            raise ValueError("single-vector variant needs an allowed-vector set")
        if self.variant is Variant.VIRTUAL_VECTOR and (self.lambda_xy or self.lambda_sc):
            raise ValueError(
                "the virtual-vector variant drops both cost weights; "
                "lambda_xy and lambda_sc must be 0")


def discrete_matrices(params: MachineParams, omega_r: float,
                      ts: float) -> tuple[np.ndarray, np.ndarray]:
    """One-step prediction matrices C = I + Ac*Ts and B = Ts*Bc."""
    a4 = params.a4(omega_r)
    ac = np.array([
        [params.a2, -a4, 0.0, 0.0],
        [a4, params.a2, 0.0, 0.0],
        [0.0, 0.0, params.a3, 0.0],
        [0.0, 0.0, 0.0, params.a3],
    ])
    bc = np.diag([params.c2, params.c2, params.c3, params.c3])
    return np.eye(4) + ac * ts, bc * ts


def predictor_scalars(params: MachineParams, omega_r: float,
                      ts: float) -> tuple[float, float, float, float, float]:
    """(caa, cba, cxx, bab, bxy): the five distinct entries of C and B."""
    return (1.0 + params.a2 * ts, params.a4(omega_r) * ts,
            1.0 + params.a3 * ts, params.c2 * ts, params.c3 * ts)


def one_step(i, v, g, caa: float, cba: float, cxx: float,
             bab: float, bxy: float) -> np.ndarray:
    """Scalar form of the one-step prediction, shared with the fast runner."""
    return np.array([
        caa * i[0] - cba * i[1] + bab * v[0] + g[0],
        cba * i[0] + caa * i[1] + bab * v[1] + g[1],
        cxx * i[2] + bxy * v[2] + g[2],
        cxx * i[3] + bxy * v[3] + g[3],
    ])


def predict_one_step(i_meas, v_applied, omega_r: float, params: MachineParams,
                     g_hat, ts: float) -> np.ndarray:
    """One-step current prediction i_hat(k+1) from measurement and voltage."""
    c, b = discrete_matrices(params, omega_r, ts)
    return c @ np.asarray(i_meas, float) + b @ np.asarray(v_applied, float) \
        + np.asarray(g_hat, float)


def estimate_disturbance(i_meas, i_model, g_prev=None, beta: float = 1.0) -> np.ndarray:
    """Rotor-effect estimate from the one-step model residual.

    i_model is the previous prediction without the disturbance term. With
    beta = 1 the raw residual is returned; smaller beta low-pass filters it.
    """
    resid = np.asarray(i_meas, float) - np.asarray(i_model, float)
    if g_prev is None:
        g_prev = np.zeros(4)
    return (1.0 - beta) * np.asarray(g_prev, float) + beta * resid


def cost(i_ref, i_hat, delta_s: int, config: ControllerConfig) -> float:
    """Cost of one candidate: squared tracking errors plus switching penalty."""
    e = np.asarray(i_ref, float) - np.asarray(i_hat, float)
    return float(e[0] ** 2 + e[1] ** 2
                 + config.lambda_xy * (e[2] ** 2 + e[3] ** 2)
                 + config.lambda_sc * delta_s)


@dataclass(frozen=True)
class CandidateSet:
    """Controller candidates compiled to flat arrays for the fast kernel.

    For single-vector candidates there is one realization segment; virtual
    vectors have two (Large then Medium). The null virtual vector's legs are
    resolved at application time, so its first_legs row is a placeholder.
    """

    actions: tuple
    pred_v: np.ndarray      # (nc, 4) voltage used in the prediction
    nseg: np.ndarray        # (nc,)
    seg_frac: np.ndarray    # (nc, 2) period fractions
    seg_legs: np.ndarray    # (nc, 2, 5) int8
    seg_v: np.ndarray       # (nc, 2, 4) plane voltages per segment
    seg_va: np.ndarray      # (nc, 2) phase-a voltage per segment
    first_legs: np.ndarray  # (nc, 5) int8
    is_zero: np.ndarray     # (nc,) uint8: zero state or null virtual vector
    is_null: np.ndarray     # (nc,) uint8: null virtual vector only
    init_committed: int     # candidate applied during the first period

    @property
    def size(self) -> int:
        return len(self.actions)


def build_candidates(config: ControllerConfig, params: MachineParams,
                     vv_table=None, vvv_table=None) -> CandidateSet:
    """Compile the candidate list for a controller configuration."""
    if vv_table is None:
        vv_table = build_vv_table(params.Vdc)
    if config.variant is Variant.SINGLE_VECTOR:
        actions = tuple(vv_table[i] for i in config.avv.members)
    else:
        if vvv_table is None:
            vvv_table = build_vvv_table(vv_table)
        actions = tuple(vvv_table)

    nc = len(actions)
    if nc == 0:
        raise ValueError("empty candidate set")
    pred_v = np.zeros((nc, 4))
    nseg = np.ones(nc, dtype=np.int64)
    seg_frac = np.zeros((nc, 2))
    seg_legs = np.zeros((nc, 2, 5), dtype=np.int8)
    seg_v = np.zeros((nc, 2, 4))
    seg_va = np.zeros((nc, 2))
    is_zero = np.zeros(nc, dtype=np.uint8)
    is_null = np.zeros(nc, dtype=np.uint8)
    init_committed = -1

    for c, act in enumerate(actions):
        if isinstance(act, VoltageVector):
            pred_v[c] = (*act.v_ab, *act.v_xy)
            seg_frac[c, 0] = 1.0
            seg_legs[c, 0] = act.legs
            seg_v[c, 0] = (*act.v_ab, *act.v_xy)
            seg_va[c, 0] = phase_voltages(act.legs, params.Vdc)[0]
            is_zero[c] = act.corona is Corona.ZERO
            if act.index == 0:
                init_committed = c
        elif act.is_null:
            pred_v[c] = 0.0
            seg_frac[c, 0] = 1.0
            is_zero[c] = 1
            is_null[c] = 1
            init_committed = c
        else:
            pred_v[c] = (*act.v_ab_avg, 0.0, 0.0)
            nseg[c] = 2
            seg_frac[c] = (act.t_large, act.t_medium)
            seg_legs[c, 0] = act.large.legs
            seg_legs[c, 1] = act.medium.legs
            seg_v[c, 0] = (*act.large.v_ab, *act.large.v_xy)
            seg_v[c, 1] = (*act.medium.v_ab, *act.medium.v_xy)
            seg_va[c, 0] = phase_voltages(act.large.legs, params.Vdc)[0]
            seg_va[c, 1] = phase_voltages(act.medium.legs, params.Vdc)[0]
    if init_committed < 0:
        raise ValueError("candidate set contains no zero state to start from")
    first_legs = np.ascontiguousarray(seg_legs[:, 0, :])
    return CandidateSet(actions=actions, pred_v=pred_v, nseg=nseg,
                        seg_frac=seg_frac, seg_legs=seg_legs, seg_v=seg_v,
                        seg_va=seg_va, first_legs=first_legs, is_zero=is_zero,
                        is_null=is_null, init_committed=init_committed)


@njit(cache=True, nogil=True)
def _select_candidate(ip1, ref2, g, caa, cba, cxx, bab, bxy, lam_xy, lam_sc,
                      pred_v, first_legs, is_null, base_legs):
    """Argmin of the candidate costs; ties break on switch count, then index.

    Returns (index, cost, switch_count) of the winner.
    """
    p0 = caa * ip1[0] - cba * ip1[1] + g[0]
    p1 = cba * ip1[0] + caa * ip1[1] + g[1]
    p2 = cxx * ip1[2] + g[2]
    p3 = cxx * ip1[3] + g[3]
    ones_base = 0
    for j in range(5):
        ones_base += base_legs[j]
    null_ds = min(ones_base, 5 - ones_base)

    best = -1
    best_j = np.inf
    best_ds = 6
    for c in range(pred_v.shape[0]):
        e0 = ref2[0] - (p0 + bab * pred_v[c, 0])
        e1 = ref2[1] - (p1 + bab * pred_v[c, 1])
        e2 = ref2[2] - (p2 + bxy * pred_v[c, 2])
        e3 = ref2[3] - (p3 + bxy * pred_v[c, 3])
        if is_null[c]:
            ds = null_ds
        else:
            ds = 0
            for j in range(5):
                if first_legs[c, j] != base_legs[j]:
                    ds += 1
        cost_c = e0 * e0 + e1 * e1 + lam_xy * (e2 * e2 + e3 * e3) + lam_sc * ds
        if cost_c < best_j or (cost_c == best_j and ds < best_ds):
            best = c
            best_j = cost_c
            best_ds = ds
    return best, best_j, best_ds


def select_action(i_meas, committed_v, base_legs, ref_k2, g_hat,
                  omega_r: float, config: ControllerConfig,
                  params: MachineParams,
                  candidates: CandidateSet) -> tuple[int, float, int]:
    """Delay-compensated selection of the next action.

    i_hat(k+1) is predicted under the committed voltage, then every candidate
    is scored two steps ahead against ref_k2. base_legs is the configuration
    held at the end of the committed period (switching-cost reference).

    Returns (candidate position, cost, switch count) of the winner.
    """
    caa, cba, cxx, bab, bxy = predictor_scalars(params, omega_r, config.ts)
    ip1 = one_step(np.asarray(i_meas, float), np.asarray(committed_v, float),
                   np.asarray(g_hat, float), caa, cba, cxx, bab, bxy)
    idx, best_cost, best_ds = _select_candidate(
        ip1, np.asarray(ref_k2, float), np.asarray(g_hat, float),
        caa, cba, cxx, bab, bxy, config.lambda_xy, config.lambda_sc,
        candidates.pred_v, candidates.first_legs, candidates.is_null,
        np.asarray(base_legs, dtype=np.int8))
    return int(idx), float(best_cost), int(best_ds)


@dataclass
class PredictorState:
    """Mutable controller memory carried between steps."""

    g_hat: np.ndarray
    committed: int
    committed_v: np.ndarray
    last_legs: np.ndarray
    prev_model: np.ndarray | None = None


@dataclass(frozen=True)
class StepResult:
    """What one controller step applies now and commits for the next period."""

    applied: object            # VoltageVector | VirtualVector
    applied_idx: int
    first_legs: tuple[int, ...]
    last_legs: tuple[int, ...]
    ds_inter: int
    ds_intra: int
    selected_idx: int
    selected_cost: float


class FsmpcController:
    """Stateful controller: one instance per run.

    Readable reference implementation of the control law; the sweep harness
    runs the same arithmetic inside a compiled loop.
    """

    def __init__(self, config: ControllerConfig, params: MachineParams,
                 omega_r: float, candidates: CandidateSet | None = None):
        self.config = config
        self.params = params
        self.omega_r = omega_r
        self.candidates = candidates or build_candidates(config, params)
        self.scalars = predictor_scalars(params, omega_r, config.ts)
        c0 = self.candidates.init_committed
        self.state = PredictorState(
            g_hat=np.zeros(4), committed=c0,
            committed_v=self.candidates.pred_v[c0].copy(),
            last_legs=np.zeros(5, dtype=np.int8))

    def step(self, i_meas, ref_k2) -> StepResult:
        """Advance one control period.

        Applies the previously committed action during this period and
        selects the action for the next one against ref_k2.
        """
        cand = self.candidates
        st = self.state
        caa, cba, cxx, bab, bxy = self.scalars
        i_meas = np.asarray(i_meas, float)

        beta = self.config.g_filter_beta
        if st.prev_model is not None:
            st.g_hat = (1.0 - beta) * st.g_hat + beta * (i_meas - st.prev_model)

        # Realize the committed action for this period.
        c = st.committed
        if cand.is_null[c]:
            first = np.array(null_realization_legs(st.last_legs), dtype=np.int8)
            last = first
            ds_intra = 0
        else:
            first = cand.seg_legs[c, 0]
            last = cand.seg_legs[c, cand.nseg[c] - 1]
            ds_intra = switch_changes(cand.seg_legs[c, 0], cand.seg_legs[c, 1]) \
                if cand.nseg[c] == 2 else 0
        ds_inter = switch_changes(st.last_legs, first)

        ip1 = one_step(i_meas, st.committed_v, st.g_hat, caa, cba, cxx, bab, bxy)
        sel, sel_cost, _ = _select_candidate(
            ip1, np.asarray(ref_k2, float), st.g_hat, caa, cba, cxx, bab, bxy,
            self.config.lambda_xy, self.config.lambda_sc,
            cand.pred_v, cand.first_legs, cand.is_null, last)

        result = StepResult(
            applied=cand.actions[c], applied_idx=c,
            first_legs=tuple(int(b) for b in first),
            last_legs=tuple(int(b) for b in last),
            ds_inter=int(ds_inter), ds_intra=int(ds_intra),
            selected_idx=int(sel), selected_cost=float(sel_cost))

        st.prev_model = ip1 - st.g_hat
        st.committed = int(sel)
        st.committed_v = cand.pred_v[sel].copy()
        st.last_legs = last
        return result
