"""Five-phase VSI model: the 32 voltage vectors, coronas, virtual vectors."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .machine import clarke

# Corona membership by index, used to cross-check the numerically built table.
# A mismatch means the Clarke/leg-voltage pipeline is broken, so construction
# refuses to continue.
LARGE_INDICES = frozenset({25, 24, 28, 12, 14, 6, 7, 3, 19, 17})
MEDIUM_INDICES = frozenset({16, 29, 8, 30, 4, 15, 2, 23, 1, 27})
SMALL_INDICES = frozenset({9, 26, 20, 13, 10, 22, 5, 11, 18, 21})
ZERO_INDICES = frozenset({0, 31})

# Pairing tolerance when matching a Large vector with its anti-parallel
# Medium partner in the x-y plane. The table is analytic; any slack beyond
# rounding indicates a bug.
_ANTIPARALLEL_TOL = 1e-9


class Corona(Enum):
    LARGE = "large"
    MEDIUM = "medium"
    SMALL = "small"
    ZERO = "zero"


@dataclass(frozen=True)
class VoltageVector:
    """One VSI configuration and its images in both current planes."""

    index: int
    legs: tuple[int, int, int, int, int]
    v_ab: tuple[float, float]
    v_xy: tuple[float, float]
    corona: Corona

    @property
    def mod_ab(self) -> float:
        return math.hypot(*self.v_ab)

    @property
    def mod_xy(self) -> float:
        return math.hypot(*self.v_xy)


@dataclass(frozen=True)
class VirtualVector:
    """Large+Medium pair applied back to back so the mean x-y voltage is zero.

    The null virtual vector (is_null=True) occupies the whole period with a
    zero state; which zero state realizes it is decided at application time.
    """

    id: int
    large: VoltageVector | None
    medium: VoltageVector | None
    t_large: float
    t_medium: float
    v_ab_avg: tuple[float, float]
    is_null: bool = False


class AvvName(Enum):
    ZETA_L = "zeta_l"
    ZETA_W = "zeta_w"


@dataclass(frozen=True)
class AvvSet:
    """Subset of VSI states the single-vector controller may choose from."""

    name: AvvName
    members: tuple[int, ...]


def legs_of_index(index: int) -> tuple[int, int, int, int, int]:
    """Leg states (Ka..Ke) of configuration u_index, Ka as the MSB."""
    if not 0 <= index <= 31:
        raise ValueError(f"index must be in 0..31, got {index}")
    return tuple((index >> shift) & 1 for shift in (4, 3, 2, 1, 0))  # type: ignore[return-value]


def phase_voltages(legs, vdc: float) -> np.ndarray:
    """Per-phase stator voltages for one VSI configuration.

    Each phase sees Vdc * (leg - mean(legs)): the common mode is removed by
    the isolated neutral, so the output always sums to zero.
    """
    u = np.asarray(legs, dtype=float)
    if u.shape != (5,) or not np.all((u == 0) | (u == 1)):
        raise ValueError(f"legs must be a 5-tuple of 0/1, got {legs!r}")
    return vdc * (u - u.mean())


def switch_changes(u_prev, u_next) -> int:
    """Number of inverter legs that change state between two configurations."""
    a = np.asarray(u_prev, dtype=int)
    b = np.asarray(u_next, dtype=int)
    if a.shape != (5,) or b.shape != (5,):
        raise ValueError("legs must be 5-tuples")
    return int(np.abs(b - a).sum())


def build_vv_table(vdc: float) -> tuple[VoltageVector, ...]:
    """All 32 voltage vectors with corona classification.

    Raises RuntimeError if the classification by alpha-beta modulus does not
    reproduce the known corona index sets.
    """
    if vdc <= 0:
        raise ValueError(f"Vdc must be > 0, got {vdc}")
    vectors = []
    moduli = np.empty(32)
    images = []
    for idx in range(32):
        legs = legs_of_index(idx)
        ab_xy = clarke(phase_voltages(legs, vdc))
        images.append(ab_xy)
        moduli[idx] = math.hypot(ab_xy[0], ab_xy[1])

    # Analytic corona radii for a five-phase bridge: 0, small, medium, large.
    radii = {
        Corona.ZERO: 0.0,
        Corona.SMALL: 0.4 * vdc * 2 * math.cos(2 * math.pi / 5),
        Corona.MEDIUM: 0.4 * vdc,
        Corona.LARGE: 0.4 * vdc * 2 * math.cos(math.pi / 5),
    }
    expected = {
        Corona.ZERO: ZERO_INDICES,
        Corona.SMALL: SMALL_INDICES,
        Corona.MEDIUM: MEDIUM_INDICES,
        Corona.LARGE: LARGE_INDICES,
    }

    for idx in range(32):
        corona = min(radii, key=lambda c: abs(moduli[idx] - radii[c]))
        if abs(moduli[idx] - radii[corona]) > 1e-9 * vdc:
            raise RuntimeError(
                f"vector {idx}: |v_ab| = {moduli[idx]:.6f} matches no corona radius")
        if idx not in expected[corona]:
            raise RuntimeError(
                f"vector {idx} classified {corona.value}, which contradicts the "
                "known corona index sets; transform pipeline is broken")
        ab_xy = images[idx]
        vectors.append(VoltageVector(
            index=idx,
            legs=legs_of_index(idx),
            v_ab=(float(ab_xy[0]), float(ab_xy[1])),
            v_xy=(float(ab_xy[2]), float(ab_xy[3])),
            corona=corona,
        ))
    return tuple(vectors)


def build_vvv_table(vv_table: tuple[VoltageVector, ...]) -> tuple[VirtualVector, ...]:
    """The 11 virtual vectors: 10 directional Large+Medium pairs plus the null.

    For each Large vector the unique Medium vector with anti-parallel x-y
    image is selected; dwell fractions cancel the mean x-y voltage exactly.
    Directional vectors are ordered by the angle of their average alpha-beta
    voltage; the null vector gets id 10.
    """
    larges = [v for v in vv_table if v.corona is Corona.LARGE]
    mediums = [v for v in vv_table if v.corona is Corona.MEDIUM]
    pairs = []
    for lv in larges:
        ang_l = math.atan2(lv.v_xy[1], lv.v_xy[0])
        partner = None
        for mv in mediums:
            ang_m = math.atan2(mv.v_xy[1], mv.v_xy[0])
            diff = (ang_m - ang_l - math.pi) % (2 * math.pi)
            if min(diff, 2 * math.pi - diff) < _ANTIPARALLEL_TOL:
                partner = mv
                break
        if partner is None:
            raise RuntimeError(
                f"no Medium vector anti-parallel to Large {lv.index} in x-y")
        t_large = partner.mod_xy / (lv.mod_xy + partner.mod_xy)
        t_medium = 1.0 - t_large
        avg = (t_large * lv.v_ab[0] + t_medium * partner.v_ab[0],
               t_large * lv.v_ab[1] + t_medium * partner.v_ab[1])
        # Colinearity of the average with the Large vector is a construction
        # invariant; cross product must vanish.
        cross = avg[0] * lv.v_ab[1] - avg[1] * lv.v_ab[0]
        if abs(cross) > 1e-9 * lv.mod_ab ** 2:
            raise RuntimeError(
                f"average voltage of pair ({lv.index}, {partner.index}) is not "
                "colinear with the Large vector")
        pairs.append((lv, partner, t_large, t_medium, avg))

    pairs.sort(key=lambda p: math.atan2(p[4][1], p[4][0]) % (2 * math.pi))
    table = [VirtualVector(id=i, large=lv, medium=mv, t_large=tl, t_medium=tm,
                           v_ab_avg=avg)
             for i, (lv, mv, tl, tm, avg) in enumerate(pairs)]
    table.append(VirtualVector(id=10, large=None, medium=None,
                               t_large=1.0, t_medium=0.0,
                               v_ab_avg=(0.0, 0.0), is_null=True))
    return tuple(table)


def null_realization_legs(prev_last_legs) -> tuple[int, int, int, int, int]:
    """Zero state (u0 or u31) realizing the null virtual vector.

    Picks whichever zero state needs fewer leg changes from the previously
    applied configuration; a previously held zero state is kept.
    """
    ones = int(np.asarray(prev_last_legs, dtype=int).sum())
    return (1, 1, 1, 1, 1) if 5 - ones < ones else (0, 0, 0, 0, 0)


def vvv_switch_changes(prev_last_legs, vvv: VirtualVector) -> tuple[int, int, tuple[int, ...]]:
    """Leg-change counts for applying one virtual vector.

    Returns (inter_period, intra_period, last_legs): changes at the period
    boundary, changes inside the period (2 for directional pairs, 0 for the
    null vector), and the configuration held at the end of the period.
    """
    if vvv.is_null:
        legs = null_realization_legs(prev_last_legs)
        return switch_changes(prev_last_legs, legs), 0, legs
    assert vvv.large is not None and vvv.medium is not None
    inter = switch_changes(prev_last_legs, vvv.large.legs)
    intra = switch_changes(vvv.large.legs, vvv.medium.legs)
    return inter, intra, vvv.medium.legs


def avv_set(name: AvvName) -> AvvSet:
    """Allowed-vector set: zeta_l (Large + Zero) or zeta_w (all 32)."""
    if name is AvvName.ZETA_L:
        members = tuple(sorted(LARGE_INDICES | ZERO_INDICES))
    else:
        members = tuple(range(32))
    return AvvSet(name=name, members=members)


def vv_table_csv(vv_table: tuple[VoltageVector, ...]) -> str:
    """CSV dump of the voltage-vector table (one row per VSI state)."""
    out = io.StringIO()
    out.write("index,ka,kb,kc,kd,ke,v_alpha,v_beta,v_x,v_y,corona\n")
    for v in vv_table:
        legs = ",".join(str(b) for b in v.legs)
        out.write(f"{v.index},{legs},{v.v_ab[0]!r},{v.v_ab[1]!r},"
                  f"{v.v_xy[0]!r},{v.v_xy[1]!r},{v.corona.value}\n")
    return out.getvalue()


def vvv_table_csv(vvv_table: tuple[VirtualVector, ...]) -> str:
    """CSV dump of the virtual-vector table."""
    out = io.StringIO()
    out.write("id,large_index,medium_index,t_large,t_medium,v_alpha_avg,v_beta_avg,is_null\n")
    for v in vvv_table:
        li = "" if v.large is None else v.large.index
        mi = "" if v.medium is None else v.medium.index
        out.write(f"{v.id},{li},{mi},{v.t_large!r},{v.t_medium!r},"
                  f"{v.v_ab_avg[0]!r},{v.v_ab_avg[1]!r},{int(v.is_null)}\n")
    return out.getvalue()
