"""Voltage-vector table, coronas, virtual vectors and switch counting."""

import itertools
import math

import numpy as np
import pytest

from pentadrive.vsi import (LARGE_INDICES, MEDIUM_INDICES, SMALL_INDICES,
                            ZERO_INDICES, AvvName, Corona, avv_set,
                            build_vv_table, build_vvv_table, legs_of_index,
                            null_realization_legs, phase_voltages,
                            switch_changes, vv_table_csv, vvv_table_csv,
                            vvv_switch_changes)

VDC = 300.0


@pytest.fixture(scope="module")
def vv():
    return build_vv_table(VDC)


@pytest.fixture(scope="module")
def vvv(vv):
    return build_vvv_table(vv)


def oracle_t_matrix():
    return (np.full((5, 5), -1.0) + 5 * np.eye(5)) / 5.0


class TestPhaseVoltages:
    def test_zero_and_common_mode(self):
        assert np.allclose(phase_voltages((0, 0, 0, 0, 0), VDC), 0.0)
        assert np.allclose(phase_voltages((1, 1, 1, 1, 1), VDC), 0.0)

    def test_single_leg_high(self):
        v = phase_voltages((1, 0, 0, 0, 0), VDC)
        assert np.allclose(v, [240.0, -60.0, -60.0, -60.0, -60.0])

    def test_matches_matrix_oracle(self):
        t = oracle_t_matrix()
        for idx in range(32):
            legs = legs_of_index(idx)
            assert np.allclose(phase_voltages(legs, VDC),
                               VDC * t @ np.array(legs, dtype=float),
                               atol=1e-12)

    def test_always_sums_to_zero(self):
        for idx in range(32):
            assert abs(phase_voltages(legs_of_index(idx), VDC).sum()) < 1e-10

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            phase_voltages((0, 2, 0, 0, 0), VDC)


class TestVvTable:
    def test_index_encodes_legs(self, vv):
        for v in vv:
            assert v.index == int("".join(str(b) for b in v.legs), 2)

    def test_corona_index_sets_exact(self, vv):
        groups = {c: {v.index for v in vv if v.corona is c} for c in Corona}
        assert groups[Corona.LARGE] == set(LARGE_INDICES)
        assert groups[Corona.MEDIUM] == set(MEDIUM_INDICES)
        assert groups[Corona.SMALL] == set(SMALL_INDICES)
        assert groups[Corona.ZERO] == set(ZERO_INDICES)

    def test_corona_sizes(self, vv):
        sizes = {c: sum(v.corona is c for v in vv) for c in Corona}
        assert sizes == {Corona.LARGE: 10, Corona.MEDIUM: 10,
                         Corona.SMALL: 10, Corona.ZERO: 2}

    def test_zero_vectors_null_in_both_planes(self, vv):
        for idx in ZERO_INDICES:
            assert vv[idx].mod_ab == 0.0 and vv[idx].mod_xy == 0.0

    def test_large_modulus_is_pentagon_value_and_global_max(self, vv):
        expected = 0.4 * VDC * 2 * math.cos(math.pi / 5)
        mods = [v.mod_ab for v in vv]
        for idx in LARGE_INDICES:
            assert vv[idx].mod_ab == pytest.approx(expected, rel=1e-12)
            assert vv[idx].mod_ab == pytest.approx(max(mods), rel=1e-12)

    def test_large_xy_equals_small_ab_modulus(self, vv):
        # Pentagon duality: the Large corona's x-y radius is the Small
        # corona's alpha-beta radius.
        expected = 0.4 * VDC * 2 * math.cos(2 * math.pi / 5)
        for idx in LARGE_INDICES:
            assert vv[idx].mod_xy == pytest.approx(expected, rel=1e-12)
        for idx in SMALL_INDICES:
            assert vv[idx].mod_ab == pytest.approx(expected, rel=1e-12)

    def test_images_match_clarke_of_phase_voltages(self, vv):
        from pentadrive.machine import clarke
        for v in vv:
            img = clarke(phase_voltages(v.legs, VDC))
            assert np.allclose(v.v_ab, img[:2], atol=1e-12)
            assert np.allclose(v.v_xy, img[2:4], atol=1e-12)

    def test_rejects_bad_vdc(self):
        with pytest.raises(ValueError):
            build_vv_table(0.0)


class TestVvvTable:
    def test_eleven_vectors_one_null(self, vvv):
        assert len(vvv) == 11
        assert sum(v.is_null for v in vvv) == 1
        assert vvv[10].is_null
        assert [v.id for v in vvv] == list(range(11))

    def test_dwell_fractions(self, vvv):
        for v in vvv[:10]:
            assert v.t_large + v.t_medium == pytest.approx(1.0, abs=1e-15)
            assert abs(v.t_large - 0.618) < 1e-3
            assert abs(v.t_medium - 0.382) < 1e-3

    def test_xy_cancellation(self, vvv):
        for v in vvv[:10]:
            rx = v.t_large * v.large.v_xy[0] + v.t_medium * v.medium.v_xy[0]
            ry = v.t_large * v.large.v_xy[1] + v.t_medium * v.medium.v_xy[1]
            assert math.hypot(rx, ry) < 1e-12 * VDC

    def test_average_modulus(self, vvv):
        # 0.618 * large radius + 0.382 * medium radius, evaluated exactly.
        t_l = 1.0 / (1.0 + 2 * math.cos(2 * math.pi / 5))
        expected = (t_l * 0.8 * math.cos(math.pi / 5) + (1 - t_l) * 0.4) * VDC
        for v in vvv[:10]:
            assert math.hypot(*v.v_ab_avg) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.5528 * VDC, abs=1e-3 * VDC)

    def test_dwell_ratio_is_golden(self, vvv):
        for v in vvv[:10]:
            assert v.t_large / v.t_medium == pytest.approx(
                v.medium.mod_xy / v.large.mod_xy, rel=1e-12)
            assert v.t_large / v.t_medium == pytest.approx(
                (1 + math.sqrt(5)) / 2, rel=1e-12)

    def test_average_colinear_with_large(self, vvv):
        for v in vvv[:10]:
            cross = (v.v_ab_avg[0] * v.large.v_ab[1]
                     - v.v_ab_avg[1] * v.large.v_ab[0])
            assert abs(cross) < 1e-9 * VDC ** 2
            assert (v.v_ab_avg[0] * v.large.v_ab[0]
                    + v.v_ab_avg[1] * v.large.v_ab[1]) > 0

    def test_pairs_use_each_corona_once(self, vvv):
        larges = {v.large.index for v in vvv[:10]}
        mediums = {v.medium.index for v in vvv[:10]}
        assert larges == set(LARGE_INDICES)
        assert mediums == set(MEDIUM_INDICES)


class TestSwitchChanges:
    def test_examples(self):
        assert switch_changes((0,) * 5, (0,) * 5) == 0
        assert switch_changes((0,) * 5, (1,) * 5) == 5
        assert switch_changes((1, 0, 0, 0, 0), (0, 1, 0, 0, 0)) == 2

    def test_is_a_metric(self):
        states = list(itertools.product((0, 1), repeat=5))
        for a, b in itertools.product(states[:8], states[:8]):
            d = switch_changes(a, b)
            assert 0 <= d <= 5
            assert d == switch_changes(b, a)
            assert (d == 0) == (a == b)
        rng = np.random.RandomState(0)
        for _ in range(300):
            a, b, c = (states[rng.randint(32)] for _ in range(3))
            assert switch_changes(a, c) <= switch_changes(a, b) + switch_changes(b, c)


class TestVvvSwitchChanges:
    def test_null_after_matching_zero_state(self, vvv):
        null = vvv[10]
        inter, intra, legs = vvv_switch_changes((0, 0, 0, 0, 0), null)
        assert (inter, intra, legs) == (0, 0, (0, 0, 0, 0, 0))
        inter, intra, legs = vvv_switch_changes((1, 1, 1, 1, 1), null)
        assert (inter, intra, legs) == (0, 0, (1, 1, 1, 1, 1))

    def test_null_picks_nearest_zero_state(self):
        assert null_realization_legs((1, 1, 0, 0, 0)) == (0, 0, 0, 0, 0)
        assert null_realization_legs((1, 1, 1, 0, 0)) == (1, 1, 1, 1, 1)

    def test_directional_intra_is_two(self, vvv):
        for v in vvv[:10]:
            _, intra, last = vvv_switch_changes((0, 0, 0, 0, 0), v)
            assert intra == 2
            assert last == v.medium.legs

    def test_repeated_directional_inter_is_two(self, vvv):
        # Medium legs back to the same pair's Large legs differ in exactly
        # the two positions that differ within the pair.
        for v in vvv[:10]:
            inter, _, _ = vvv_switch_changes(v.medium.legs, v)
            assert inter == 2


class TestAvvSets:
    def test_zeta_l(self):
        s = avv_set(AvvName.ZETA_L)
        assert len(s.members) == 12
        assert set(s.members) == set(LARGE_INDICES) | set(ZERO_INDICES)
        assert list(s.members) == sorted(s.members)

    def test_zeta_w(self):
        s = avv_set(AvvName.ZETA_W)
        assert s.members == tuple(range(32))


class TestCsvDumps:
    def test_vv_csv_shape_and_content(self, vv):
        lines = vv_table_csv(vv).strip().split("\n")
        assert len(lines) == 33
        row3 = lines[4].split(",")
        assert int(row3[0]) == 3
        assert [int(b) for b in row3[1:6]] == list(vv[3].legs)
        assert float(row3[6]) == vv[3].v_ab[0]

    def test_vvv_csv_shape(self, vvv):
        lines = vvv_table_csv(vvv).strip().split("\n")
        assert len(lines) == 12
        assert lines[-1].split(",")[-1] == "1"  # null flag
