"""Figures of merit over an analysis window: tracking errors, switching
frequency, voltage THD and zero-vector usage."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .machine import OperatingPoint

# An inverter has two switches per leg; ASF is reported per switch.
SWITCHES = 10


@dataclass(frozen=True)
class MetricsReport:
    """Figures of merit of one (fe, Is*, variant) run."""

    variant: str
    fe: float
    is_star: float
    lambda_xy: float
    lambda_sc: float
    pz: float
    e_ab: float
    e_xy: float
    asf: float
    thd_v: float | None
    window: tuple[int, int]
    infeasible: bool = False

    CSV_HEADER = ("variant,fe,Is_star,lambda_xy,lambda_sc,"
                  "PZ,E_ab,E_xy,ASF,THD_V,status")

    def csv_row(self) -> str:
        thd = "" if self.thd_v is None else repr(float(self.thd_v))
        status = "infeasible" if self.infeasible else "ok"
        vals = [self.variant] + [repr(float(v)) for v in
                                 (self.fe, self.is_star, self.lambda_xy,
                                  self.lambda_sc, self.pz, self.e_ab,
                                  self.e_xy, self.asf)]
        return ",".join(vals + [thd, status])

    @classmethod
    def from_csv_row(cls, row: str) -> "MetricsReport":
        parts = row.rstrip("\n").split(",")
        if len(parts) != 11:
            raise ValueError(f"expected 11 CSV fields, got {len(parts)}")
        return cls(variant=parts[0], fe=float(parts[1]), is_star=float(parts[2]),
                   lambda_xy=float(parts[3]), lambda_sc=float(parts[4]),
                   pz=float(parts[5]), e_ab=float(parts[6]), e_xy=float(parts[7]),
                   asf=float(parts[8]),
                   thd_v=None if parts[9] == "" else float(parts[9]),
                   window=(0, 0), infeasible=parts[10] == "infeasible")


def tracking_errors(errors: np.ndarray, k1: int, k2: int,
                    min_window: int | None = None) -> tuple[float, float]:
    """RMS tracking error in the alpha-beta and x-y planes over [k1, k2].

    Args:
        errors: (n, 4) per-instant errors (alpha, beta, x, y).
        k1, k2: inclusive window bounds (sampling indices).
        min_window: optional minimum number of samples (one fundamental
            period); shorter windows are rejected.
    """
    if k2 <= k1:
        raise ValueError(f"window must satisfy k2 > k1, got ({k1}, {k2})")
    n = k2 - k1 + 1
    if min_window is not None and n < min_window:
        raise ValueError(f"window of {n} samples is shorter than one "
                         f"fundamental period ({min_window} samples)")
    e = errors[k1:k2 + 1]
    e_ab = math.sqrt(float(np.sum(e[:, 0] ** 2 + e[:, 1] ** 2)) / n)
    e_xy = math.sqrt(float(np.sum(e[:, 2] ** 2 + e[:, 3] ** 2)) / n)
    return e_ab, e_xy


def average_switching_frequency(delta_s: np.ndarray, t: np.ndarray,
                                k1: int, k2: int) -> float:
    """Per-switch average switching frequency in Hz over (t[k1], t[k2]].

    delta_s[k] must count every leg change in (t[k-1], t[k]], including the
    intra-period commutation of virtual vectors; only changes strictly inside
    the window are summed.
    """
    span = float(t[k2] - t[k1])
    if span <= 0:
        raise ValueError("window has zero length")
    total = int(np.sum(delta_s[k1 + 1:k2 + 1]))
    return total / (SWITCHES * span)


def zero_usage(is_zero: np.ndarray, k1: int, k2: int) -> float:
    """Percentage of control periods in [k1, k2) that applied a zero state
    or the null virtual vector."""
    if k2 <= k1:
        raise ValueError(f"window must satisfy k2 > k1, got ({k1}, {k2})")
    return 100.0 * float(np.mean(is_zero[k1:k2] != 0))


def resample_zoh(sample_times: np.ndarray, sample_values: np.ndarray,
                 t0: float, duration: float, n: int) -> np.ndarray:
    """Sample a zero-order-hold signal on a uniform grid of n points.

    sample_times mark where the held value changes; the grid spans
    [t0, t0 + duration). Exact for piecewise-constant signals as long as
    every switching instant appears in sample_times.
    """
    grid = t0 + np.arange(n) * (duration / n)
    idx = np.searchsorted(sample_times, grid, side="right") - 1
    if idx[0] < 0:
        raise ValueError("grid starts before the first sample")
    if grid[-1] >= sample_times[-1] + (sample_times[-1] - sample_times[-2]) * 4:
        raise ValueError("grid extends far beyond the sampled record")
    return sample_values[idx]


def thd(samples: np.ndarray, n_periods: int, v1_floor: float = 0.0) -> float | None:
    """Voltage THD in percent from uniform samples of exactly n_periods
    fundamental periods.

    The numerator sums the harmonic bins (integer multiples of the
    fundamental) up to the Nyquist bin exclusive; exact-period windowing puts
    every true harmonic exactly on a bin. Returns None when the fundamental
    amplitude is below v1_floor (undefined THD).
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n_periods < 1 or n < 4 * n_periods:
        raise ValueError("need at least a few samples per fundamental period")
    spec = np.abs(np.fft.rfft(x))
    v1 = 2.0 * spec[n_periods] / n
    if v1 < v1_floor or v1 == 0.0:
        return None
    nyquist = n // 2
    harmonics = np.arange(2 * n_periods, nyquist, n_periods)
    num = math.sqrt(float(np.sum(spec[harmonics] ** 2)))
    return float(100.0 * num / spec[n_periods])


def build_report(variant: str, op: OperatingPoint, lambda_xy: float,
                 lambda_sc: float, e_ab: float, e_xy: float, asf: float,
                 thd_v: float | None, pz: float, window: tuple[int, int],
                 infeasible: bool) -> MetricsReport:
    return MetricsReport(variant=variant, fe=op.fe, is_star=op.is_star,
                         lambda_xy=lambda_xy, lambda_sc=lambda_sc, pz=pz,
                         e_ab=e_ab, e_xy=e_xy, asf=asf, thd_v=thd_v,
                         window=window, infeasible=infeasible)
