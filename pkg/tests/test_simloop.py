"""The compiled runner must reproduce the step-by-step Python objects."""

import math

import numpy as np
import pytest

from pentadrive.fsmpc import ControllerConfig, FsmpcController, Variant
from pentadrive.machine import DriveState, MachineParams, OperatingPoint
from pentadrive.plant import PlantConfig, advance_control_period
from pentadrive.simloop import RunLog, run_closed_loop
from pentadrive.vsi import AvvName, avv_set

PARAMS = MachineParams()
PLANT = PlantConfig()


def python_reference_loop(op, config, n_steps):
    """Drive FsmpcController + advance_control_period period by period."""
    ctrl = FsmpcController(config, PARAMS, omega_r=op.omega_r)
    state = DriveState(omega_r=op.omega_r)
    applied, currents, ds = [], [], []
    for k in range(n_steps):
        i_meas = state.currents()[:4]
        currents.append(i_meas.copy())
        th2 = state.theta_a + 2 * op.omega_e * config.ts
        ref2 = np.array([op.is_star * math.sin(th2),
                         op.is_star * math.cos(th2), 0.0, 0.0])
        res = ctrl.step(i_meas, ref2)
        applied.append(res.applied_idx)
        ds.append((res.ds_inter, res.ds_intra))
        state, _ = advance_control_period(state, res.applied, PLANT, PARAMS,
                                          omega_e=op.omega_e)
    return applied, np.array(currents), ds


@pytest.mark.parametrize("kind", ["sv", "vvv"])
def test_kernel_matches_python_objects(kind):
    if kind == "sv":
        config = ControllerConfig(variant=Variant.SINGLE_VECTOR, ts=PLANT.ts,
                                  avv=avv_set(AvvName.ZETA_L), lambda_xy=0.3,
                                  lambda_sc=0.05)
    else:
        config = ControllerConfig(variant=Variant.VIRTUAL_VECTOR, ts=PLANT.ts)
    op = OperatingPoint(fe=50.0, is_star=0.9)
    n = 400

    applied_py, currents_py, ds_py = python_reference_loop(op, config, n)
    log = run_closed_loop(op, config, PARAMS, PLANT, n)

    assert log.applied.tolist() == applied_py
    assert np.allclose(log.i_meas, currents_py, rtol=1e-9, atol=1e-12)
    assert [(a, m) for a, m in zip(log.ds_at, log.ds_mid)] == ds_py


def test_runs_are_bitwise_reproducible():
    config = ControllerConfig(variant=Variant.SINGLE_VECTOR, ts=PLANT.ts,
                              avv=avv_set(AvvName.ZETA_W), lambda_xy=0.72)
    op = OperatingPoint(fe=30.0, is_star=1.0)
    a = run_closed_loop(op, config, PARAMS, PLANT, 1000)
    b = run_closed_loop(op, config, PARAMS, PLANT, 1000)
    assert np.array_equal(a.i_meas, b.i_meas)
    assert np.array_equal(a.applied, b.applied)
    assert np.array_equal(a.va, b.va)


def test_delta_s_attributes_events_to_trailing_instant():
    log = RunLog(op=None, config=None, plant=None, candidates=None,
                 t=np.arange(4) * PLANT.ts, i_meas=None, e=None,
                 applied=None, is_zero=None,
                 ds_at=np.array([0, 2, 3, 2], dtype=np.int32),
                 ds_mid=np.array([2, 2, 0, 2], dtype=np.int32),
                 cost=None, va_times=None, va=None, failed_at=None)
    # delta_s[k] = boundary change at t_k plus the mid-period change of the
    # action applied during (t_{k-1}, t_k).
    assert log.delta_s().tolist() == [0, 4, 5, 2]


def test_va_samples_cover_every_substep():
    config = ControllerConfig(variant=Variant.VIRTUAL_VECTOR, ts=PLANT.ts)
    op = OperatingPoint(fe=50.0, is_star=1.0)
    n = 200
    log = run_closed_loop(op, config, PARAMS, PLANT, n)
    assert log.va_times.size == n * PLANT.substeps_per_ts
    assert np.all(np.diff(log.va_times) > 0)
    # Substep samples of period k live inside [t_k, t_{k+1}).
    k = 57
    sl = slice(k * 10, (k + 1) * 10)
    assert log.va_times[sl][0] == pytest.approx(log.t[k], abs=1e-12)
    assert log.va_times[sl][-1] < log.t[k] + PLANT.ts

    # Directional periods hold two distinct voltage levels (Large,
    # Medium), null periods exactly one (zero).
    null_id = 10
    for k in range(n):
        vals = set(np.round(log.va[k * 10:(k + 1) * 10], 9))
        if log.applied[k] == null_id:
            assert vals == {0.0}
        else:
            assert len(vals) == 2


def test_divergence_is_reported_not_raised():
    plant = PlantConfig(ts=10.0, substeps_per_ts=2)
    config = ControllerConfig(variant=Variant.SINGLE_VECTOR, ts=10.0,
                              avv=avv_set(AvvName.ZETA_L))
    op = OperatingPoint(fe=50.0, is_star=1e6)
    log = run_closed_loop(op, config, PARAMS, plant, 200)
    assert log.failed_at is not None
    assert log.failed_at < 200
