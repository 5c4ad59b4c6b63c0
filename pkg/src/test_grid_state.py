# test_grid_state.py

import numpy as np
import pytest

from grid_state import (
    GHOST_CELLS,
    BoundaryCondition,
    DiagnosticsRecord,
    Grid1D,
    Line,
    PhaseState,
    extend_cells,
    extend_interfaces,
    implied_derivative,
    init_line_from_pointvalues,
    init_phase_state,
    interface_count,
    require_finite,
)


class TestGrid1D:
    """Тесты для равномерной сетки"""

    def test_points_are_cell_centres(self):
        """Тест: x_i = a + (i + 1/2)·dx"""
        grid = Grid1D(8, -1.0, 1.0)
        assert grid.dx == pytest.approx(0.25)
        np.testing.assert_allclose(grid.points, -1.0 + (np.arange(8) + 0.5) * 0.25)

    @pytest.mark.parametrize("n_cells", [0, 5, 6.5])
    def test_rejects_small_or_fractional(self, n_cells):
        """Тест: меньше шести ячеек или нецелое число"""
        with pytest.raises(ValueError, match="❌"):
            Grid1D(n_cells, 0.0, 1.0)

    @pytest.mark.parametrize("lo, hi", [(1.0, 1.0), (2.0, 1.0), (0.0, np.inf)])
    def test_rejects_bad_domain(self, lo, hi):
        """Тест: пустая или бесконечная область"""
        with pytest.raises(ValueError, match="Неверная область"):
            Grid1D(8, lo, hi)

    @pytest.mark.parametrize("bc, count", [
        (BoundaryCondition.PERIODIC, 10),
        (BoundaryCondition.ZERO, 11),
    ])
    def test_interface_count(self, bc, count):
        """Тест: n границ для periodic и n+1 для zero"""
        grid = Grid1D(10, 0.0, 1.0, bc)
        assert grid.n_interfaces == count == interface_count(10, bc)
        assert grid.interfaces.shape == (count,)

    def test_periodic_interfaces_are_right_edges(self):
        """Тест: h[k] — правая граница ячейки k"""
        grid = Grid1D(10, 0.0, 1.0)
        assert grid.interfaces[0] == pytest.approx(0.1)
        assert grid.interfaces[-1] == pytest.approx(1.0)

    def test_max_abs(self):
        assert Grid1D(8, -5.0, 3.0).max_abs == 5.0


class TestGhostCells:
    """Тесты для фиктивных ячеек"""

    # ============ FIXTURES ============

    @pytest.fixture
    def values(self):
        return np.arange(1.0, 9.0)

    def test_periodic_wraps(self, values):
        """Тест: периодическое продолжение"""
        fe = extend_cells(values, BoundaryCondition.PERIODIC)
        assert fe.shape == (8 + 2 * GHOST_CELLS,)
        np.testing.assert_array_equal(fe[:GHOST_CELLS], [6.0, 7.0, 8.0])
        np.testing.assert_array_equal(fe[-GHOST_CELLS:], [1.0, 2.0, 3.0])

    def test_zero_pads(self, values):
        """Тест: нулевое продолжение"""
        fe = extend_cells(values, BoundaryCondition.ZERO)
        assert not fe[:GHOST_CELLS].any()
        assert not fe[-GHOST_CELLS:].any()

    def test_extend_cells_2d_along_axis0(self):
        """Тест: расширение только вдоль оси 0"""
        block = np.ones((8, 3))
        assert extend_cells(block, BoundaryCondition.ZERO, ghosts=2).shape == (12, 3)

    @pytest.mark.parametrize("bc, n_h", [(BoundaryCondition.PERIODIC, 8), (BoundaryCondition.ZERO, 9)])
    def test_interface_extension_length(self, bc, n_h):
        """Тест: длина расширенного массива границ n + 2·ghosts + 1"""
        he = extend_interfaces(np.arange(float(n_h)), bc)
        assert he.shape == (8 + 2 * GHOST_CELLS + 1,)

    def test_periodic_interface_alignment(self):
        """Тест: he[ghosts] — левая граница ячейки 0, то есть h[n-1]"""
        h = np.arange(8.0)
        he = extend_interfaces(h, BoundaryCondition.PERIODIC)
        assert he[GHOST_CELLS] == h[-1]
        assert he[GHOST_CELLS + 1] == h[0]

    def test_zero_interface_alignment(self):
        """Тест: he[ghosts + k] = h[k] для zero"""
        h = np.arange(1.0, 10.0)
        he = extend_interfaces(h, BoundaryCondition.ZERO)
        np.testing.assert_array_equal(he[GHOST_CELLS:GHOST_CELLS + 9], h)
        assert he[GHOST_CELLS - 1] == 0.0


class TestLine:
    """Тесты для Line и восстановления h"""

    # ============ FIXTURES ============

    @pytest.fixture
    def sine_grid(self):
        return Grid1D(64, 0.0, 2.0 * np.pi)

    def test_shape_validation(self):
        """Тест: неверная длина h"""
        grid = Grid1D(8, 0.0, 1.0, BoundaryCondition.ZERO)
        with pytest.raises(ValueError, match="h должен иметь форму"):
            Line(np.zeros(8), np.zeros(8), grid)

    def test_constant_gives_constant_h(self):
        """Тест: f ≡ c → h ≡ c, g ≡ 0"""
        grid = Grid1D(16, 0.0, 1.0)
        line = init_line_from_pointvalues(np.full(16, 3.0), grid)
        np.testing.assert_allclose(line.h, 3.0, rtol=1e-14)
        np.testing.assert_allclose(line.g, 0.0, atol=1e-12)

    def test_sine_sliding_average(self, sine_grid):
        """Тест: h для sin совпадает со скользящим средним sin(x)·(dx/2)/sin(dx/2)"""
        line = init_line_from_pointvalues(np.sin(sine_grid.points), sine_grid)
        dx = sine_grid.dx
        exact = np.sin(sine_grid.interfaces) * (dx / 2.0) / np.sin(dx / 2.0)
        assert np.max(np.abs(line.h - exact)) < 1e-5

    def test_periodic_telescoping(self, sine_grid):
        """Тест: Σ g_i·dx = 0 для периодической линии"""
        rng = np.random.default_rng(7)
        line = init_line_from_pointvalues(rng.normal(size=64), sine_grid)
        assert abs(np.sum(line.g) * sine_grid.dx) < 1e-12

    def test_zero_bc_storage(self):
        """Тест: для zero хранится n+1 граница"""
        grid = Grid1D(10, -1.0, 1.0, BoundaryCondition.ZERO)
        line = init_line_from_pointvalues(np.exp(-10 * grid.points ** 2), grid)
        assert line.h.shape == (11,)
        assert line.g.shape == (10,)

    def test_rejects_non_finite(self, sine_grid):
        """Тест: NaN во входных данных"""
        values = np.sin(sine_grid.points)
        values[5] = np.nan
        with pytest.raises(ValueError, match="нечисловое значение в позиции \\(5,\\)"):
            init_line_from_pointvalues(values, sine_grid)

    def test_rejects_wrong_length(self, sine_grid):
        with pytest.raises(ValueError, match="Ожидалось 64"):
            init_line_from_pointvalues(np.zeros(10), sine_grid)

    def test_with_values_keeps_grid(self, sine_grid):
        line = init_line_from_pointvalues(np.zeros(64), sine_grid)
        other = line.with_values(np.ones(64), np.ones(64))
        assert other.grid is line.grid
        assert other.bc is BoundaryCondition.PERIODIC


class TestPhaseState:
    """Тесты для фазового состояния"""

    # ============ FIXTURES ============

    @pytest.fixture
    def grids(self):
        return Grid1D(8, 0.0, 4.0 * np.pi), Grid1D(12, -5.0, 5.0, BoundaryCondition.ZERO)

    @pytest.fixture
    def state(self, grids):
        x_grid, v_grid = grids
        x, v = np.meshgrid(x_grid.points, v_grid.points, indexing="ij")
        return init_phase_state((1.0 + 0.1 * np.cos(0.5 * x)) * np.exp(-0.5 * v * v), x_grid, v_grid)

    def test_shapes(self, state):
        """Тест: f (nx, nv), Φ (nx, nv), Ψ (nx, nv+1)"""
        assert state.shape == (8, 12)
        assert state.phi.shape == (8, 12)
        assert state.psi.shape == (8, 13)
        assert state.f_x.shape == state.f_v.shape == (8, 12)

    def test_shape_validation(self, grids):
        """Тест: Ψ неверной формы"""
        x_grid, v_grid = grids
        with pytest.raises(ValueError, match="psi должен иметь форму"):
            PhaseState(np.zeros((8, 12)), np.zeros((8, 12)), np.zeros((8, 12)), x_grid, v_grid)

    def test_phi_constant_in_x(self, grids):
        """Тест: f не зависит от x → Φ постоянна по строке, f_x = 0"""
        x_grid, v_grid = grids
        row = np.exp(-0.5 * v_grid.points ** 2)
        state = init_phase_state(np.tile(row, (8, 1)), x_grid, v_grid)
        np.testing.assert_allclose(state.phi, np.tile(row, (8, 1)), rtol=1e-13)
        np.testing.assert_allclose(state.f_x, 0.0, atol=1e-12)

    def test_first_non_finite(self, state):
        """Тест: поиск первой нечисловой ячейки"""
        assert state.first_non_finite() is None
        psi = state.psi.copy()
        psi[2, 3] = np.inf
        assert state.replace(psi=psi).first_non_finite() == ("psi", (2, 3))

    def test_replace_keeps_untouched(self, state):
        other = state.replace(f=state.f * 2.0)
        assert other.phi is state.phi
        assert other.psi is state.psi


class TestHelpers:
    """Тесты для вспомогательных функций"""

    def test_implied_derivative_zero_bc(self):
        """Тест: g_i = (h_{i+1/2} − h_{i−1/2})/dx"""
        h = np.array([0.0, 1.0, 3.0, 6.0])
        np.testing.assert_allclose(implied_derivative(h, 0.5, BoundaryCondition.ZERO), [2.0, 4.0, 6.0])

    def test_implied_derivative_periodic(self):
        h = np.array([1.0, 2.0, 4.0])
        np.testing.assert_allclose(implied_derivative(h, 1.0, BoundaryCondition.PERIODIC), [-3.0, 1.0, 2.0])

    def test_require_finite(self):
        np.testing.assert_array_equal(require_finite("x", [1, 2]), [1.0, 2.0])
        with pytest.raises(ValueError, match="x: нечисловое"):
            require_finite("x", [1.0, np.inf])

    def test_record_row_order(self):
        """Тест: порядок полей совпадает с заголовком CSV"""
        record = DiagnosticsRecord(0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8)
        assert record.as_row() == (0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8)
        assert DiagnosticsRecord.FIELDS[0] == "t"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
