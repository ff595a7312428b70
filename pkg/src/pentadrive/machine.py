"""Five-phase induction machine data: parameters, state, transforms, references."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * math.pi

# Electrical angle between adjacent phases of a symmetrical five-phase winding.
PHASE_STEP = TWO_PI / 5.0


def clarke_matrix() -> np.ndarray:
    """Amplitude-invariant 5x5 Clarke matrix (rows: alpha, beta, x, y, zero)."""
    h = np.arange(5)
    m = np.vstack([
        np.cos(h * PHASE_STEP),
        np.sin(h * PHASE_STEP),
        np.cos(2 * h * PHASE_STEP),
        np.sin(2 * h * PHASE_STEP),
        np.full(5, 0.5),
    ])
    return (2.0 / 5.0) * m


_CLARKE = clarke_matrix()


@dataclass(frozen=True)
class MachineParams:
    """Electrical constants of the five-phase IM plus derived model coefficients.

    Inductances in H, resistances in Ohm, Vdc in V. Jm (kg*m^2) and the
    pole-pair count P are carried for completeness; the electrical-frequency
    analysis never integrates mechanical dynamics.
    """

    Rs: float = 12.85
    Rr: float = 4.80
    Lls: float = 79.93e-3
    Llr: float = 79.93e-3
    LM: float = 681.7e-3
    Jm: float = 0.02
    P: int = 3
    Vdc: float = 300.0

    Ls: float = field(init=False)
    Lr: float = field(init=False)
    c1: float = field(init=False)
    c2: float = field(init=False)
    c3: float = field(init=False)
    c4: float = field(init=False)
    a2: float = field(init=False)
    a3: float = field(init=False)

    def __post_init__(self):
        for name in ("Rs", "Rr", "Lls", "Llr", "LM", "Vdc"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be strictly positive, got {v}")
        if self.P < 1:
            raise ValueError(f"P must be >= 1, got {self.P}")
        ls = self.Lls + self.LM
        lr = self.Llr + self.LM
        c1 = ls * lr - self.LM ** 2
        if c1 <= 0:
            raise ValueError("inductances give a singular model: Ls*Lr must exceed LM^2")
        object.__setattr__(self, "Ls", ls)
        object.__setattr__(self, "Lr", lr)
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", lr / c1)
        object.__setattr__(self, "c3", 1.0 / self.Lls)
        object.__setattr__(self, "c4", self.LM / c1)
        object.__setattr__(self, "a2", -self.Rs * lr / c1)
        object.__setattr__(self, "a3", -self.Rs / self.Lls)

    def a4(self, omega_r: float) -> float:
        """Speed-dependent cross-coupling coefficient of the stator equations."""
        return -self.LM * self.c4 * omega_r


@dataclass(frozen=True)
class DriveState:
    """Electrical state of the drive at one instant.

    Stator currents live in the alpha/beta and x/y planes, rotor currents in
    the stationary alpha/beta frame. theta_a is the reference angle in
    [0, 2*pi); t the simulation clock in seconds.
    """

    i_s_alpha: float = 0.0
    i_s_beta: float = 0.0
    i_s_x: float = 0.0
    i_s_y: float = 0.0
    i_r_alpha: float = 0.0
    i_r_beta: float = 0.0
    omega_r: float = 0.0
    theta_a: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        vals = (self.i_s_alpha, self.i_s_beta, self.i_s_x, self.i_s_y,
                self.i_r_alpha, self.i_r_beta, self.omega_r, self.theta_a, self.t)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("DriveState fields must be finite")
        object.__setattr__(self, "theta_a", self.theta_a % TWO_PI)

    def currents(self) -> np.ndarray:
        """Electrical current vector [is_a, is_b, ix, iy, ir_a, ir_b]."""
        return np.array([self.i_s_alpha, self.i_s_beta, self.i_s_x, self.i_s_y,
                         self.i_r_alpha, self.i_r_beta])

    def replace_currents(self, y: np.ndarray, theta_a: float, t: float) -> "DriveState":
        return DriveState(i_s_alpha=y[0], i_s_beta=y[1], i_s_x=y[2], i_s_y=y[3],
                          i_r_alpha=y[4], i_r_beta=y[5],
                          omega_r=self.omega_r, theta_a=theta_a, t=t)


@dataclass(frozen=True)
class OperatingPoint:
    """One point of the (electrical frequency, current amplitude) plane."""

    fe: float
    is_star: float
    slip_fraction: float = 0.03

    def __post_init__(self):
        if not (math.isfinite(self.fe) and self.fe > 0):
            raise ValueError(f"fe must be > 0, got {self.fe}")
        if not (math.isfinite(self.is_star) and self.is_star >= 0):
            raise ValueError(f"is_star must be >= 0, got {self.is_star}")
        if not (0 <= self.slip_fraction < 1):
            raise ValueError(f"slip_fraction must be in [0, 1), got {self.slip_fraction}")

    @property
    def omega_e(self) -> float:
        return TWO_PI * self.fe

    @property
    def omega_r(self) -> float:
        """Rotor electrical speed held constant over a run (fixed slip).

        Signed: the (sin, cos) current reference rotates in the negative
        mathematical direction, so the co-rotating rotor speed is negative.
        Its magnitude is (1 - slip_fraction) times the field speed.
        """
        return -TWO_PI * self.fe * (1.0 - self.slip_fraction)


def clarke(phase_values) -> np.ndarray:
    """Project a 5-phase quantity onto (alpha, beta, x, y, zero-sequence).

    Args:
        phase_values: 5-vector of phase voltages or currents.

    Returns:
        Length-5 array (alpha, beta, x, y, zero).
    """
    v = np.asarray(phase_values, dtype=float)
    if v.shape != (5,):
        raise ValueError(f"expected a 5-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("phase values must be finite")
    return _CLARKE @ v


def park(d: float, q: float, theta_a: float) -> tuple[float, float]:
    """Rotate a (d, q) reference pair into the stationary alpha-beta frame."""
    if not all(math.isfinite(v) for v in (d, q, theta_a)):
        raise ValueError("park inputs must be finite")
    c, s = math.cos(theta_a), math.sin(theta_a)
    return c * d + s * q, -s * d + c * q


def reference(op: OperatingPoint, t: float) -> tuple[float, float, float, float]:
    """Stator current references (alpha, beta, x, y) at time t.

    The alpha-beta pair traces a circle of radius is_star; the x-y references
    are identically zero.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    ang = op.omega_e * t
    return (op.is_star * math.sin(ang), op.is_star * math.cos(ang), 0.0, 0.0)


def reference_at_angle(is_star: float, theta_a: float) -> tuple[float, float, float, float]:
    """Same references expressed through the accumulated angle theta_a."""
    return (is_star * math.sin(theta_a), is_star * math.cos(theta_a), 0.0, 0.0)


_PARAM_KEYS = ("Rs", "Rr", "Lls", "Llr", "LM", "Jm", "P", "Vdc")


def load_machine_params(path: str | Path) -> MachineParams:
    """Read machine parameters from a plain key = value text file.

    Keys are the symbol names Rs, Rr, Lls, Llr, LM, Jm, P plus Vdc; values in
    SI units (Ohm, H, kg*m^2, V). Missing keys keep their defaults; unknown
    keys are rejected.
    """
    text = Path(path).read_text()
    values: dict[str, float] = {}
    errors: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw!r}")
            continue
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _PARAM_KEYS:
            errors.append(f"line {lineno}: unknown parameter {key!r}")
            continue
        try:
            values[key] = float(val)
        except ValueError:
            errors.append(f"line {lineno}: cannot parse value {val!r} for {key}")
    if errors:
        raise ValueError("invalid machine parameter file:\n" + "\n".join(errors))
    if "P" in values:
        values["P"] = int(values["P"])  # type: ignore[assignment]
    return MachineParams(**values)
