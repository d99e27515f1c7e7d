import math
import random

import pytest
from hypothesis import given, strategies as st

from apf import (
    DataError,
    HeuristicField,
    PafParams,
    bresenham_line,
    heuristic,
    line_of_sight,
    paf,
    polyline_length,
    turn_angle,
)
from apf.geometry import UNIT_TURN_ANGLES, sight_line_cells

from helpers import bfs_hops, grid_from_rows


class TestHeuristic:
    def test_zero_distance(self):
        assert heuristic((0, 0), (0, 0), 0.001) == 0.0

    def test_weighted_value(self):
        assert heuristic((0, 0), (3, 4), 0.001) == pytest.approx(4.005, abs=1e-12)

    def test_pure_chebyshev_when_sigma_zero(self):
        assert heuristic((2, 2), (5, 2), 0.0) == 3.0

    def test_field_matches_scalar(self):
        field = HeuristicField.compute(6, 7, (2, 3), 0.001)
        for r in range(6):
            for c in range(7):
                assert field[(r, c)] == pytest.approx(heuristic((r, c), (2, 3), 0.001), abs=1e-12)
        assert field[(2, 3)] == 0.0

    def test_admissible_exhaustively_on_small_empty_grids(self):
        # With sigma=0 the heuristic never exceeds the true unit-step count.
        grid = grid_from_rows(["." * 8] * 8)
        for sr in range(8):
            for sc in range(8):
                hops = bfs_hops(grid, (sr, sc))
                for node, d in hops.items():
                    assert heuristic(node, (sr, sc), 0.0) <= d

    def test_field_rejects_out_of_bounds_target(self):
        with pytest.raises(DataError):
            HeuristicField.compute(4, 4, (4, 0), 0.001)


class TestTurnAngle:
    def test_straight(self):
        assert turn_angle((0, 0), (1, 0), (2, 0)) == pytest.approx(0.0, abs=1e-12)

    def test_right_angle(self):
        assert turn_angle((0, 0), (1, 0), (1, 1)) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_quarter_turn(self):
        assert turn_angle((0, 0), (1, 1), (2, 1)) == pytest.approx(math.pi / 4, abs=1e-12)

    def test_undefined_when_vector_zero(self):
        assert turn_angle((1, 1), (1, 1), (2, 2)) is None
        assert turn_angle((0, 0), (1, 1), (1, 1)) is None

    @given(
        st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
        st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
        st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
    )
    def test_reversal_symmetry(self, j, i, k):
        forward = turn_angle(j, i, k)
        backward = turn_angle(k, i, j)
        if forward is None:
            assert backward is None
        else:
            assert backward == pytest.approx(forward, abs=1e-12)

    def test_unit_table_matches_function(self):
        for (adr, adc, bdr, bdc), ang in UNIT_TURN_ANGLES.items():
            expect = turn_angle((0, 0), (adr, adc), (adr + bdr, adc + bdc))
            assert ang == expect


class TestPaf:
    def test_alpha_one_is_identity(self):
        assert paf(math.pi / 4, 1.0) == pytest.approx(math.pi / 4, abs=1e-12)

    def test_alpha_zero_is_supplement(self):
        assert paf(math.pi / 4, 0.0) == pytest.approx(3 * math.pi / 4, abs=1e-12)

    def test_alpha_half_is_constant(self):
        for angle in (0.0, 0.3, 1.1, math.pi):
            assert paf(angle, 0.5) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_quarter_alpha_at_zero_angle(self):
        assert paf(0.0, 0.25) == pytest.approx(0.75 * math.pi, abs=1e-12)

    @given(st.floats(0.0, math.pi), st.floats(0.0, 1.0))
    def test_involution(self, angle, alpha):
        assert paf(angle, alpha) + paf(angle, 1.0 - alpha) == pytest.approx(
            math.pi, abs=1e-12
        )

    @given(st.floats(0.0, math.pi), st.floats(0.0, 1.0))
    def test_range(self, angle, alpha):
        value = paf(angle, alpha)
        assert -1e-12 <= value <= math.pi + 1e-12

    def test_monotonicity_sign_matches_alpha(self):
        rng = random.Random(5)
        for alpha in (0.0, 0.25, 0.75, 1.0):
            slope = 2 * alpha - 1
            for _ in range(200):
                a = rng.uniform(0, math.pi)
                b = rng.uniform(0, math.pi)
                lo, hi = min(a, b), max(a, b)
                if hi - lo < 1e-9:
                    continue
                diff = paf(hi, alpha) - paf(lo, alpha)
                if slope > 0:
                    assert diff > 0
                elif slope < 0:
                    assert diff < 0


class TestLineOfSight:
    def test_single_cell(self):
        grid = grid_from_rows(["....", "....", "....", "...."])
        visible, cells = line_of_sight(grid, (1, 1), (1, 1))
        assert visible and cells == [(1, 1)]

    def test_horizontal_line(self):
        grid = grid_from_rows(["......"] * 3)
        visible, cells = line_of_sight(grid, (0, 0), (0, 5))
        assert visible
        assert cells == [(0, c) for c in range(6)]

    def test_diagonal_blocked_by_center(self):
        grid = grid_from_rows(["...", ".#.", "..."])
        visible, cells = line_of_sight(grid, (0, 0), (2, 2))
        assert not visible
        assert (1, 1) in cells

    def test_symmetric_in_direction(self):
        rng = random.Random(11)
        grid = grid_from_rows(["." * 9] * 9)
        for _ in range(200):
            a = (rng.randrange(9), rng.randrange(9))
            b = (rng.randrange(9), rng.randrange(9))
            va, ca = line_of_sight(grid, a, b)
            vb, cb = line_of_sight(grid, b, a)
            assert va == vb
            assert ca == list(reversed(cb))

    def test_out_of_bounds_is_contract_error(self):
        grid = grid_from_rows(["..", ".."])
        with pytest.raises(DataError):
            line_of_sight(grid, (0, 0), (5, 5))

    def test_bresenham_endpoint_inclusive(self):
        cells = bresenham_line((2, 1), (5, 7))
        assert cells[0] == (2, 1) and cells[-1] == (5, 7)
        for a, b in zip(cells, cells[1:]):
            assert max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1

    def test_sight_line_canonical_set(self):
        a, b = (4, 1), (0, 6)
        assert sight_line_cells(a, b) == list(reversed(sight_line_cells(b, a)))


class TestPafParams:
    def test_beta_derived(self):
        p = PafParams(alpha=0.3, lam=0.25, kappa=0.8)
        assert p.beta == pytest.approx((1 - 0.25) * 0.8)

    def test_bounds_validated(self):
        with pytest.raises(DataError):
            PafParams(alpha=1.5)
        with pytest.raises(DataError):
            PafParams(lam=-0.1)
        with pytest.raises(DataError):
            PafParams(kappa=-1.0)


def test_polyline_length():
    assert polyline_length([(0, 0), (3, 4)]) == pytest.approx(5.0)
    assert polyline_length([(0, 0)]) == 0.0
    assert polyline_length([(0, 0), (0, 1), (1, 1)]) == pytest.approx(2.0)
