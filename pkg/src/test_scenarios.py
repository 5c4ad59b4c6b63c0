# test_scenarios.py

import json
import math

import numpy as np
import pytest

from grid_state import BoundaryCondition, Line, PhaseState
from scenarios import (
    DEFAULT_CFL,
    PRESETS,
    ProblemKind,
    ScenarioConfig,
    build_initial,
    exact_solution,
    four_profile,
    get_preset,
    initial_values,
    leveque_profile,
    linear_speeds,
    scenario_names,
    scenarios_of_kind,
    two_stream_b_profile,
)
from vp_solver import Limiting


class TestPresets:
    """Тесты для каталога сценариев"""

    def test_all_names_present(self):
        expected = {
            "advect1d-sine", "advect1d-four-profile", "rotation-gaussian", "rotation-leveque",
            "landau-weak", "landau-strong", "two-stream-a", "two-stream-b", "custom",
        }
        assert set(scenario_names()) == expected

    def test_kinds(self):
        assert set(scenarios_of_kind(ProblemKind.ADVECTION)) == {"advect1d-sine", "advect1d-four-profile"}
        assert set(scenarios_of_kind(ProblemKind.ROTATION)) == {"rotation-gaussian", "rotation-leveque"}
        assert "landau-weak" in scenarios_of_kind(ProblemKind.VLASOV)

    def test_unknown(self):
        with pytest.raises(ValueError, match="Неизвестный сценарий"):
            get_preset("landau-medium")

    @pytest.mark.parametrize("name", list(PRESETS))
    def test_presets_build_valid_configs(self, name):
        """Тест: каждый сценарий даёт корректную конфигурацию"""
        config = ScenarioConfig.from_preset(name)
        assert config.cfl == DEFAULT_CFL["wo"]
        assert config.kind is PRESETS[name].kind

    def test_two_stream_a_tvb(self):
        config = ScenarioConfig.from_preset("two-stream-a")
        assert (config.m_x, config.m_v) == (1.0, 10.0)


class TestProfiles:
    """Тесты для начальных профилей"""

    @pytest.mark.parametrize("x, expected", [
        (-0.3, 1.0),
        (0.1, 1.0),
        (0.05, 0.5),
        (0.9, 0.0),
        (-0.1, 0.0),
    ])
    def test_four_profile_values(self, x, expected):
        assert float(four_profile(np.array([x]))[0]) == pytest.approx(expected)

    def test_four_profile_ellipse_peak(self):
        """Тест: полуэллипс в центре близок к 1"""
        assert float(four_profile(np.array([0.5]))[0]) == pytest.approx(1.0, abs=1e-2)

    def test_leveque_components(self):
        """Тест: диск = 1, прорезь = 0, вершина конуса = 1, вершина горба = 0.5"""
        values = leveque_profile(np.array([0.1, 0.0, 0.0, -0.25]), np.array([0.25, 0.25, -0.25, 0.0]))
        np.testing.assert_allclose(values, [1.0, 0.0, 1.0, 0.5])

    def test_two_stream_b_symmetric(self):
        """Тест: два пучка симметричны относительно v = 0"""
        v = np.linspace(-3.0, 3.0, 61)
        f = two_stream_b_profile(np.zeros_like(v), v, alpha=0.0, k=1.0)
        np.testing.assert_allclose(f, f[::-1], rtol=1e-14)
        assert v[30 + np.argmax(f[30:])] == pytest.approx(1.0)


class TestScenarioConfig:
    """Тесты для конфигурации запуска"""

    # ============ FIXTURES ============

    @pytest.fixture
    def landau(self):
        return ScenarioConfig.from_preset("landau-weak", n_x=16, n_v=32, t_final=1.0)

    def test_overrides_from_preset(self, landau):
        assert (landau.n_x, landau.n_v, landau.t_final) == (16, 32, 1.0)
        assert landau.alpha == 0.01

    def test_none_overrides_ignored(self):
        config = ScenarioConfig.from_preset("landau-weak", n_x=None)
        assert config.n_x == 64

    def test_wl_default_cfl(self):
        config = ScenarioConfig.from_preset("landau-weak", variant="wl")
        assert config.cfl == 2.2
        assert config.scheme_variant().limiting is Limiting.WL

    @pytest.mark.parametrize("name", list(PRESETS))
    def test_round_trip_every_preset(self, name, tmp_path):
        """Тест: dict и JSON-файл возвращают ту же конфигурацию для каждого сценария"""
        config = ScenarioConfig.from_preset(name)
        assert ScenarioConfig.from_dict(config.to_dict()) == config
        path = tmp_path / f"{name}.json"
        path.write_text(config.to_json(), encoding="utf-8")
        assert ScenarioConfig.from_json(path) == config

    def test_dict_round_trip(self, landau):
        assert ScenarioConfig.from_dict(landau.to_dict()) == landau

    def test_json_file(self, landau, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(landau.to_json(), encoding="utf-8")
        assert ScenarioConfig.from_json(path) == landau

    def test_json_errors(self, tmp_path):
        """Тест: ошибки чтения и разбора превращаются в ValueError"""
        with pytest.raises(ValueError, match="Не удалось прочитать"):
            ScenarioConfig.from_json(tmp_path / "missing.json")
        broken = tmp_path / "broken.json"
        broken.write_text("{n_x: 4", encoding="utf-8")
        with pytest.raises(ValueError, match="Неверный JSON"):
            ScenarioConfig.from_json(broken)
        listed = tmp_path / "list.json"
        listed.write_text(json.dumps([1, 2]), encoding="utf-8")
        with pytest.raises(ValueError, match="объектом JSON"):
            ScenarioConfig.from_json(listed)

    def test_unknown_keys(self):
        with pytest.raises(ValueError, match="Неизвестные ключи конфигурации: speed"):
            ScenarioConfig.from_dict({"scenario": "landau-weak", "speed": 2.0})

    def test_missing_scenario(self):
        with pytest.raises(ValueError, match="нет ключа 'scenario'"):
            ScenarioConfig.from_dict({"n_x": 16})

    @pytest.mark.parametrize("overrides, message", [
        ({"variant": "wx"}, "wo или wl"),
        ({"mode": "spline"}, "режим"),
        ({"order": 4}, "3 или 5"),
        ({"cfl": 0.0}, "CFL"),
        ({"cfl": math.inf}, "CFL"),
        ({"t_final": -1.0}, "t_final"),
        ({"snapshot_times": (1.0, -0.5)}, "снимков"),
        ({"m_v": -1.0}, "TVB"),
        ({"n_x": 4}, "n_x должен быть целым >= 6"),
        ({"n_v": 5}, "n_v должен быть целым >= 6"),
        ({"n_x": 17}, "чётным"),
        ({"k": 0.0}, "k > 0"),
        ({"progress_every": -1}, "progress_every"),
    ])
    def test_validation(self, overrides, message):
        with pytest.raises(ValueError, match=message):
            ScenarioConfig.from_preset("landau-weak", **overrides)

    def test_advection_ignores_n_v(self):
        """Тест: для переноса n_v не проверяется"""
        config = ScenarioConfig.from_preset("advect1d-sine", n_x=7)
        assert config.n_v == 0

    def test_with_overrides(self, landau):
        changed = landau.with_overrides(cfl=0.5, output_dir=None)
        assert changed.cfl == 0.5
        assert changed.output_dir == landau.output_dir


class TestGridsAndInitialState:
    """Тесты для сеток, начальных данных и точных решений"""

    def test_vlasov_grids(self):
        """Тест: длина по x равна 2π/k, по v — zero bc"""
        config = ScenarioConfig.from_preset("landau-weak", n_x=16, n_v=32)
        x_grid, v_grid = config.grids()
        assert x_grid.length == pytest.approx(4.0 * np.pi)
        assert x_grid.bc is BoundaryCondition.PERIODIC
        assert v_grid.bc is BoundaryCondition.ZERO
        assert (v_grid.x_lo, v_grid.x_hi) == (-5.0, 5.0)

    def test_advection_builds_line(self):
        config = ScenarioConfig.from_preset("advect1d-sine", n_x=32)
        line = build_initial(config)
        assert isinstance(line, Line)
        assert line.f.shape == (32,)

    def test_vlasov_builds_state(self):
        config = ScenarioConfig.from_preset("landau-weak", n_x=16, n_v=32)
        state = build_initial(config)
        assert isinstance(state, PhaseState)
        assert state.shape == (16, 32)
        assert state.phi.shape == (16, 32)
        assert state.psi.shape == (16, 33)

    def test_rotation_builds_state(self):
        config = ScenarioConfig.from_preset("rotation-gaussian", n_x=20, n_v=24)
        state = build_initial(config)
        assert state.phi.shape == (21, 24)
        assert state.psi.shape == (20, 25)

    def test_exact_at_zero_is_initial(self):
        for name in ("advect1d-sine", "rotation-gaussian"):
            config = ScenarioConfig.from_preset(name, n_x=20, n_v=20)
            np.testing.assert_allclose(exact_solution(config, 0.0), initial_values(config), atol=1e-14)

    def test_advection_period(self):
        """Тест: через время 2π синус возвращается"""
        config = ScenarioConfig.from_preset("advect1d-sine", n_x=32)
        np.testing.assert_allclose(exact_solution(config, 2.0 * np.pi), initial_values(config), atol=1e-12)

    def test_rotation_quarter_turn(self):
        """Тест: поворот на π/2 переводит точку (1, 0) в (0, 1)"""
        config = ScenarioConfig.from_preset("rotation-gaussian", n_x=20, n_v=20)
        rotated = exact_solution(config, 0.5 * np.pi)
        x_grid, y_grid = config.grids()
        x, y = np.meshgrid(x_grid.points, y_grid.points, indexing="ij")
        np.testing.assert_allclose(rotated, np.exp(-x * x - y * y), atol=1e-14)
        shifted = ScenarioConfig.from_preset("rotation-leveque", n_x=40, n_v=40)
        quarter = exact_solution(shifted, 0.25)
        lx, ly = shifted.grids()
        px, py = np.meshgrid(lx.points, ly.points, indexing="ij")
        # вершина конуса (0, −0.25) через четверть оборота уходит в (0.25, 0)
        cone_now = quarter[np.argmin(np.abs(lx.points - 0.2375)), np.argmin(np.abs(ly.points - 0.0125))]
        assert cone_now > 0.8

    def test_exact_for_vlasov_fails(self):
        config = ScenarioConfig.from_preset("landau-weak")
        with pytest.raises(ValueError, match="точного решения нет"):
            exact_solution(config, 1.0)

    def test_linear_speeds(self):
        config = ScenarioConfig.from_preset("rotation-gaussian", n_x=20, n_v=24)
        x_grid, y_grid = config.grids()
        a, b = linear_speeds(config, x_grid, y_grid)
        np.testing.assert_allclose(a, -y_grid.points)
        np.testing.assert_allclose(b, x_grid.points)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
