"""Modulation-analysis harness: closed-loop runs over an operating-point grid.

Each run measures the figures of merit over a window of whole fundamental
periods after a warmup. Operating points are independent, so the sweep can
fan out over threads (the compiled runner releases the GIL); results are
assembled in deterministic order regardless of completion order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .fsmpc import ControllerConfig, Variant, build_candidates
from .machine import MachineParams, OperatingPoint
from .metrics import (MetricsReport, average_switching_frequency, build_report,
                      resample_zoh, thd, tracking_errors, zero_usage)
from .plant import PlantConfig
from .simloop import RunLog, run_closed_loop
from .vsi import AvvName, avv_set

THREADS_ENV = "PENTADRIVE_THREADS"

# Fundamental-voltage ceiling of the Large corona: circle inscribed in the
# decagon of Large-vector tips.
SV_V1_FRACTION = 0.8 * math.cos(math.pi / 5) * math.cos(math.pi / 10)

# A point is marked infeasible when tracking breaks down: RMS alpha-beta
# error above this fraction of the reference amplitude (deeply saturated
# points sit an order of magnitude above the quantization ripple).
E_AB_REL_LIMIT = 0.10


def tracking_error_floor(params: MachineParams, ts: float) -> float:
    """Absolute tracking-error threshold below which a run is never flagged.

    The closed loop carries an irreducible RMS ripple of roughly
    c2 * Ts * (corona radius step); four times that scale separates healthy
    runs from saturated ones at every operating point.
    """
    return 4.0 * params.c2 * ts * 0.2 * params.Vdc


@dataclass(frozen=True)
class VariantSpec:
    """One controller configuration of the sweep, identified by its tag."""

    kind: str                  # 'sv-zl' | 'sv-zw' | 'vvv'
    lambda_xy: float = 0.0
    lambda_sc: float = 0.0

    def __post_init__(self):
        if self.kind not in ("sv-zl", "sv-zw", "vvv"):
            raise ValueError(f"unknown variant kind {self.kind!r}")
        if self.lambda_xy < 0:
            raise ValueError(f"lambda_xy must be >= 0, got {self.lambda_xy}")
        if self.lambda_sc < 0:
            raise ValueError(f"lambda_sc must be >= 0, got {self.lambda_sc}")
        if self.kind == "vvv" and (self.lambda_xy or self.lambda_sc):
            raise ValueError("the vvv variant takes no weighting factors")

    @property
    def tag(self) -> str:
        return self.kind

    def controller_config(self, ts: float) -> ControllerConfig:
        if self.kind == "vvv":
            return ControllerConfig(variant=Variant.VIRTUAL_VECTOR, ts=ts)
        name = AvvName.ZETA_L if self.kind == "sv-zl" else AvvName.ZETA_W
        return ControllerConfig(variant=Variant.SINGLE_VECTOR, ts=ts,
                                avv=avv_set(name), lambda_xy=self.lambda_xy,
                                lambda_sc=self.lambda_sc)


@dataclass(frozen=True)
class SweepSpec:
    """Grid of operating points and controller variants to analyse."""

    fe_list: tuple[float, ...] = (10.0, 20.0, 30.0, 40.0, 50.0)
    variants: tuple[VariantSpec, ...] = (VariantSpec("sv-zl"),)
    is_list: tuple[float, ...] | None = None   # explicit grid, same for all fe
    is_levels: int = 25
    is_min: float = 0.1
    is_margin: float = 1.2    # grid ceiling relative to the estimated limit
    warmup_periods: int = 5
    measure_periods: int = 10
    slip_fraction: float = 0.03

    def __post_init__(self):
        if not self.fe_list or not self.variants:
            raise ValueError("fe_list and variants must be non-empty")
        if any(f <= 0 for f in self.fe_list):
            raise ValueError("fe values must be > 0")
        if self.is_list is not None:
            if list(self.is_list) != sorted(self.is_list):
                raise ValueError("is_list must be ascending")
        elif self.is_levels < 1:
            raise ValueError("is_levels must be >= 1")
        if self.warmup_periods < 0 or self.measure_periods < 1:
            raise ValueError("invalid warmup/measure period counts")

    def is_grid(self, params: MachineParams, fe: float) -> tuple[float, ...]:
        """Current-amplitude grid for one fe (shared by all variants)."""
        if self.is_list is not None:
            return self.is_list
        limit = attainable_current_estimate(
            params, fe, self.slip_fraction, SV_V1_FRACTION * params.Vdc)
        return tuple(np.linspace(self.is_min, self.is_margin * limit,
                                 self.is_levels))


def attainable_current_estimate(params: MachineParams, fe: float,
                                slip: float, v1_max: float) -> float:
    """Steady-state current amplitude reachable with fundamental voltage
    v1_max, from the per-phase equivalent circuit at fixed slip."""
    w = 2 * math.pi * fe
    z_stator = params.Rs + 1j * w * params.Lls
    z_mag = 1j * w * params.LM
    if slip <= 0:
        z = z_stator + z_mag
    else:
        z_rotor = params.Rr / slip + 1j * w * params.Llr
        z = z_stator + (z_mag * z_rotor) / (z_mag + z_rotor)
    return v1_max / abs(z)


@dataclass(frozen=True)
class AnalysisWindow:
    k1: int
    k2: int
    n_steps: int
    thd_t0: float
    thd_duration: float
    samples_per_period: int


def analysis_window(fe: float, ts: float, warmup_periods: int,
                    measure_periods: int) -> AnalysisWindow:
    """Sampling-index window covering the measurement span.

    The error/ASF window is the control instants [k1, k2]; the THD window is
    exactly measure_periods/fe seconds starting at t(k1), which generally
    does not land on a control instant.
    """
    steps_per_period = 1.0 / (fe * ts)
    k1 = math.ceil(warmup_periods * steps_per_period)
    k2 = k1 + math.floor(measure_periods * steps_per_period)
    duration = measure_periods / fe
    n_steps = max(k2 + 1, math.ceil((k1 * ts + duration) / ts) + 1) + 1
    return AnalysisWindow(k1=k1, k2=k2, n_steps=n_steps, thd_t0=k1 * ts,
                          thd_duration=duration,
                          samples_per_period=math.floor(steps_per_period))


@dataclass(frozen=True)
class TraceData:
    """Control-instant time series of one run, for trajectory plots."""

    t: np.ndarray
    i: np.ndarray        # (n, 4)
    ref_ab: np.ndarray   # (n, 2)
    applied: np.ndarray
    va: np.ndarray

    CSV_HEADER = "t,i_alpha,i_beta,i_x,i_y,ref_alpha,ref_beta,applied,va"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for j in range(self.t.size):
            lines.append(",".join([
                repr(float(self.t[j])),
                repr(float(self.i[j, 0])), repr(float(self.i[j, 1])),
                repr(float(self.i[j, 2])), repr(float(self.i[j, 3])),
                repr(float(self.ref_ab[j, 0])), repr(float(self.ref_ab[j, 1])),
                str(int(self.applied[j])), repr(float(self.va[j])),
            ]))
        return "\n".join(lines) + "\n"


def _trace_from_log(log: RunLog, window: AnalysisWindow,
                    nsub: int) -> TraceData:
    sl = slice(window.k1, window.k2 + 1)
    ref_ab = log.e[sl, :2] + log.i_meas[sl, :2]
    return TraceData(t=log.t[sl].copy(), i=log.i_meas[sl].copy(),
                     ref_ab=ref_ab, applied=log.applied[sl].copy(),
                     va=log.va[window.k1 * nsub:(window.k2 + 1) * nsub:nsub].copy())


def run_single(op: OperatingPoint, config: ControllerConfig,
               params: MachineParams, plant: PlantConfig,
               variant_tag: str = "", warmup_periods: int = 5,
               measure_periods: int = 10, candidates=None,
               want_trace: bool = False,
               want_log: bool = False):
    """Closed-loop run of one operating point.

    Returns (MetricsReport, TraceData | None) and, with want_log, the raw
    RunLog as a third element. A run is flagged infeasible when the plant
    diverged, the tracking error shows saturation (above E_AB_REL_LIMIT of
    the reference amplitude and above the ripple floor), or the modulation
    headroom is exhausted (no zero vectors used at all).
    """
    window = analysis_window(op.fe, config.ts, warmup_periods, measure_periods)
    log = run_closed_loop(op, config, params, plant, window.n_steps,
                          candidates=candidates)
    tag = variant_tag or config.variant.value

    if log.failed_at is not None:
        report = build_report(tag, op, config.lambda_xy, config.lambda_sc,
                              e_ab=float("nan"), e_xy=float("nan"),
                              asf=float("nan"), thd_v=None, pz=float("nan"),
                              window=(window.k1, window.k2), infeasible=True)
        out = (report, None)
        return out + (log,) if want_log else out

    e_ab, e_xy = tracking_errors(log.e, window.k1, window.k2,
                                 min_window=window.samples_per_period)
    asf = average_switching_frequency(log.delta_s(), log.t, window.k1, window.k2)
    pz = zero_usage(log.is_zero, window.k1, window.k2)
    nsub = plant.substeps_per_ts
    n_uniform = int(round(window.thd_duration / (config.ts / nsub)))
    va_uniform = resample_zoh(log.va_times, log.va, window.thd_t0,
                              window.thd_duration, n_uniform)
    thd_v = thd(va_uniform, measure_periods, v1_floor=1e-9 * params.Vdc)

    e_limit = max(tracking_error_floor(params, config.ts),
                  E_AB_REL_LIMIT * op.is_star)
    infeasible = (not math.isfinite(e_ab)) or e_ab > e_limit or pz == 0.0
    report = build_report(tag, op, config.lambda_xy, config.lambda_sc,
                          e_ab=e_ab, e_xy=e_xy, asf=asf, thd_v=thd_v, pz=pz,
                          window=(window.k1, window.k2), infeasible=infeasible)
    trace = _trace_from_log(log, window, nsub) if want_trace else None
    out = (report, trace)
    return out + (log,) if want_log else out


def sweep_threads() -> int:
    """Worker count: CPU count capped by the PENTADRIVE_THREADS variable."""
    n = os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


@dataclass
class SweepResult:
    spec: SweepSpec
    reports: list[MetricsReport] = field(default_factory=list)
    # First infeasible Is* per (variant tag, fe); None when all points ran.
    boundaries: dict[tuple[str, float], float | None] = field(default_factory=dict)

    def metrics_csv(self) -> str:
        lines = [MetricsReport.CSV_HEADER]
        lines.extend(r.csv_row() for r in self.reports)
        return "\n".join(lines) + "\n"

    def select(self, variant: str | None = None, fe: float | None = None,
               feasible_only: bool = False) -> list[MetricsReport]:
        rows = self.reports
        if variant is not None:
            rows = [r for r in rows if r.variant == variant]
        if fe is not None:
            rows = [r for r in rows if r.fe == fe]
        if feasible_only:
            rows = [r for r in rows if not r.infeasible]
        return rows


def run_sweep(spec: SweepSpec, params: MachineParams,
              plant: PlantConfig) -> SweepResult:
    """Run the whole grid; one report per (variant, fe, Is*) in that order."""
    tasks = []
    cand_cache = {}
    for vs in spec.variants:
        cfg = vs.controller_config(plant.ts)
        if vs.kind not in cand_cache:
            cand_cache[vs.kind] = build_candidates(cfg, params)
        for fe in spec.fe_list:
            for is_star in spec.is_grid(params, fe):
                op = OperatingPoint(fe=fe, is_star=is_star,
                                    slip_fraction=spec.slip_fraction)
                tasks.append((vs, cfg, op))

    def run_task(task):
        vs, cfg, op = task
        try:
            report, _ = run_single(op, cfg, params, plant,
                                   variant_tag=vs.tag,
                                   warmup_periods=spec.warmup_periods,
                                   measure_periods=spec.measure_periods,
                                   candidates=cand_cache[vs.kind])
            return report
        except Exception as exc:  # record per-row failures, never abort
            return build_report(vs.tag, op, cfg.lambda_xy, cfg.lambda_sc,
                                e_ab=float("nan"), e_xy=float("nan"),
                                asf=float("nan"), thd_v=None, pz=float("nan"),
                                window=(0, 0), infeasible=True)

    n_workers = sweep_threads()
    if n_workers > 1 and len(tasks) > 1:
        # Warm the compiled runner once before fanning out.
        first = run_task(tasks[0])
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            rest = list(pool.map(run_task, tasks[1:]))
        reports = [first] + rest
    else:
        reports = [run_task(t) for t in tasks]

    result = SweepResult(spec=spec, reports=reports)
    for vs in spec.variants:
        for fe in spec.fe_list:
            rows = result.select(variant=vs.tag, fe=fe)
            first_bad = next((r.is_star for r in rows if r.infeasible), None)
            result.boundaries[(vs.tag, fe)] = first_bad
    return result


def sweep_meta(spec: SweepSpec, params: MachineParams, plant: PlantConfig,
               result: SweepResult | None = None) -> str:
    """Full resolved configuration of a sweep, for reproducibility."""
    lines = ["[machine]"]
    for key in ("Rs", "Rr", "Lls", "Llr", "LM", "Jm", "P", "Vdc"):
        lines.append(f"{key} = {getattr(params, key)!r}")
    lines.append("[plant]")
    lines.append(f"ts = {plant.ts!r}")
    lines.append(f"substeps_per_ts = {plant.substeps_per_ts}")
    lines.append(f"integrator = {plant.integrator}")
    lines.append("[sweep]")
    lines.append(f"fe_list = {', '.join(repr(f) for f in spec.fe_list)}")
    if spec.is_list is not None:
        lines.append(f"is_list = {', '.join(repr(v) for v in spec.is_list)}")
    else:
        lines.append(f"is_levels = {spec.is_levels}")
        lines.append(f"is_min = {spec.is_min!r}")
        lines.append(f"is_margin = {spec.is_margin!r}")
    lines.append(f"warmup_periods = {spec.warmup_periods}")
    lines.append(f"measure_periods = {spec.measure_periods}")
    lines.append(f"slip_fraction = {spec.slip_fraction!r}")
    lines.append("variants = " + ", ".join(
        f"{v.kind}:{v.lambda_xy!r}:{v.lambda_sc!r}" for v in spec.variants))
    if result is not None:
        lines.append("[attainability]")
        for (tag, fe), bad in sorted(result.boundaries.items()):
            lines.append(f"first_infeasible {tag} fe={fe!r} = "
                         + ("none" if bad is None else repr(bad)))
    return "\n".join(lines) + "\n"


def write_sweep_outputs(result: SweepResult, params: MachineParams,
                        plant: PlantConfig, outdir: str | Path) -> Path:
    """Write metrics.csv and sweep_meta.txt; returns the metrics path."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    metrics_path = out / "metrics.csv"
    metrics_path.write_text(result.metrics_csv())
    (out / "sweep_meta.txt").write_text(
        sweep_meta(result.spec, params, plant, result))
    return metrics_path


def trace_filename(variant: str, fe: float, is_star: float) -> str:
    return f"trace_{variant}_{fe:g}_{is_star:g}.csv"
