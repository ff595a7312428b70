"""Closed-loop FSMPC simulator for a five-phase induction machine drive."""

from .machine import (DriveState, MachineParams, OperatingPoint, clarke,
                      clarke_matrix, load_machine_params, park, reference)
from .vsi import (AvvName, AvvSet, Corona, VirtualVector, VoltageVector,
                  avv_set, build_vv_table, build_vvv_table, phase_voltages,
                  switch_changes, vvv_switch_changes)
from .plant import PlantConfig, advance_control_period, derivatives
from .fsmpc import (ControllerConfig, FsmpcController, Variant, cost,
                    estimate_disturbance, predict_one_step, select_action)
from .metrics import MetricsReport, average_switching_frequency, thd, \
    tracking_errors, zero_usage
from .sweep import SweepSpec, VariantSpec, run_single, run_sweep

__version__ = "0.1.0"

__all__ = [
    "DriveState", "MachineParams", "OperatingPoint", "clarke", "clarke_matrix",
    "load_machine_params", "park", "reference",
    "AvvName", "AvvSet", "Corona", "VirtualVector", "VoltageVector", "avv_set",
    "build_vv_table", "build_vvv_table", "phase_voltages", "switch_changes",
    "vvv_switch_changes",
    "PlantConfig", "advance_control_period", "derivatives",
    "ControllerConfig", "FsmpcController", "Variant", "cost",
    "estimate_disturbance", "predict_one_step", "select_action",
    "MetricsReport", "average_switching_frequency", "thd", "tracking_errors",
    "zero_usage",
    "SweepSpec", "VariantSpec", "run_single", "run_sweep",
    "__version__",
]
