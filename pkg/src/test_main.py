# test_main.py

import json

import numpy as np
import pytest

import main as cli
from artifacts import emit_diagnostics_csv, load_diagnostics_csv, load_snapshot
from grid_state import DiagnosticsRecord
from main import EXIT_BLOWUP, EXIT_IO, EXIT_OK, EXIT_USAGE, build_parser, config_from_args
from scenarios import ScenarioConfig
from vp_solver import NumericalBlowupError


def run(argv):
    return cli.main([str(a) for a in argv])


class TestArguments:
    """Тесты для разбора аргументов и сборки конфигурации"""

    def test_help_exits_ok(self, capsys):
        assert run(["--help"]) == EXIT_OK
        assert "Коды выхода" in capsys.readouterr().out

    @pytest.mark.parametrize("argv", [
        [],
        ["vp", "--unknown-flag"],
        ["vp", "--variant", "wx"],
        ["convergence", "--scenario", "advect1d-sine"],
        ["rates", "--input", "x.csv", "--window", "5,2"],
    ])
    def test_usage_errors(self, argv):
        """Тест: ошибки разбора дают код 1, а не 2"""
        assert run(argv) == EXIT_USAGE

    def test_flags_override_preset(self):
        args = build_parser().parse_args(["vp", "--nx", "32", "--nv", "64", "--variant", "wl", "--snapshots", "1,2.5"])
        config = config_from_args(args)
        assert config.scenario == "landau-weak"
        assert (config.n_x, config.n_v) == (32, 64)
        assert config.cfl == 2.2
        assert config.snapshot_times == (1.0, 2.5)

    def test_quiet(self):
        args = build_parser().parse_args(["advect1d", "--quiet"])
        assert config_from_args(args).progress_every == 0

    def test_scenario_mismatch(self, capsys):
        """Тест: сценарий Ландау для команды rotate"""
        assert run(["rotate", "--scenario", "landau-weak"]) == EXIT_USAGE
        out = capsys.readouterr().out
        assert "не подходит для команды rotate" in out
        assert "Подходят: rotation-gaussian, rotation-leveque" in out

    def test_invalid_config_value(self, capsys):
        assert run(["vp", "--nx", "15", "--quiet"]) == EXIT_USAGE
        assert "чётным" in capsys.readouterr().out

    def test_config_file_with_override(self, tmp_path):
        """Тест: флаги важнее значений из JSON"""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"scenario": "landau-weak", "n_x": 16, "n_v": 32, "t_final": 0.3}),
                        encoding="utf-8")
        args = build_parser().parse_args(["vp", "--config", str(path), "--tfinal", "0.2"])
        config = config_from_args(args)
        assert (config.n_x, config.n_v, config.t_final) == (16, 32, 0.2)

    @pytest.mark.parametrize("flags, cfl", [
        (["--variant", "wl"], 2.2),
        (["--variant", "wl", "--cfl", "1.5"], 1.5),
        (["--variant", "wo"], 1.3),
    ])
    def test_config_file_variant_cfl(self, tmp_path, flags, cfl):
        """Тест: смена варианта без --cfl берёт CFL по умолчанию для нового варианта"""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"scenario": "landau-weak", "n_x": 16, "n_v": 32, "variant": "wo", "cfl": 1.3}),
                        encoding="utf-8")
        config = config_from_args(build_parser().parse_args(["vp", "--config", str(path)] + flags))
        assert config.cfl == cfl
        assert config.n_x == 16

    def test_config_file_scenario_switch(self, tmp_path):
        """Тест: другой сценарий поверх файла берёт размеры, α и k из своего пресета"""
        path = tmp_path / "config.json"
        path.write_text(ScenarioConfig.from_preset("landau-weak", t_final=0.3, output_dir="runs/x").to_json(),
                        encoding="utf-8")
        args = build_parser().parse_args(["vp", "--config", str(path), "--scenario", "landau-strong"])
        config = config_from_args(args)
        assert config.scenario == "landau-strong"
        assert (config.n_x, config.n_v, config.t_final) == (128, 256, 40.0)
        assert (config.alpha, config.k) == (0.5, 0.5)
        assert config.snapshot_times == (30.0,)
        assert config.output_dir == "runs/x"
        assert config.cfl == 1.2


class TestRuns:
    """Тесты для запусков расчётов через CLI"""

    def test_advect1d(self, tmp_path):
        out = tmp_path / "adv"
        assert run(["advect1d", "--nx", 16, "--tfinal", 0.5, "--out", out, "--quiet"]) == EXIT_OK
        assert (out / "config.json").exists()
        assert (out / "summary.txt").exists()
        profile = (out / "profile.csv").read_text(encoding="utf-8").splitlines()
        assert profile[0] == "x,f,exact"
        assert len(profile) == 17

    def test_wo_cfl_warning(self, tmp_path, capsys):
        assert run(["advect1d", "--nx", 16, "--tfinal", 0.5, "--cfl", 2.0, "--out", tmp_path, "--quiet"]) == EXIT_OK
        assert "--variant wl" in capsys.readouterr().out

    def test_vp_outputs(self, tmp_path):
        """Тест: диагностики по шагам, снимок в заданный момент, итоговое поле"""
        out = tmp_path / "vp"
        code = run(["vp", "--nx", 16, "--nv", 32, "--tfinal", 0.5, "--snapshots", 0.25,
                    "--out", out, "--quiet"])
        assert code == EXIT_OK

        diagnostics = load_diagnostics_csv(out / "diagnostics.csv")
        assert diagnostics["t"][0] == 0.0
        assert diagnostics["t"][-1] == 0.5
        assert 0.25 in diagnostics["t"]
        assert np.all(np.diff(diagnostics["t"]) > 0)

        snapshot = load_snapshot(out / "snapshot_t0.2500.csv")
        assert snapshot.f.shape == (16, 32)
        assert snapshot.metadata["t"] == 0.25
        assert load_snapshot(out / "final.csv").metadata["t"] == 0.5

        config = json.loads((out / "config.json").read_text(encoding="utf-8"))
        assert config["scenario"] == "landau-weak"
        summary = (out / "summary.txt").read_text(encoding="utf-8")
        assert "CSLHWENO-WO" in summary

    def test_repeated_runs_identical(self, tmp_path):
        """Тест: два одинаковых запуска дают побайтно одинаковые диагностики"""
        argv = ["vp", "--nx", 16, "--nv", 32, "--tfinal", 0.5, "--quiet"]
        assert run(argv + ["--out", tmp_path / "a"]) == EXIT_OK
        assert run(argv + ["--out", tmp_path / "b"]) == EXIT_OK
        first = (tmp_path / "a" / "diagnostics.csv").read_bytes()
        assert first == (tmp_path / "b" / "diagnostics.csv").read_bytes()
        assert (tmp_path / "a" / "final.csv").read_bytes() == (tmp_path / "b" / "final.csv").read_bytes()

    def test_rotate(self, tmp_path):
        out = tmp_path / "rot"
        code = run(["rotate", "--nx", 16, "--nv", 16, "--tfinal", 0.3, "--out", out, "--quiet"])
        assert code == EXIT_OK
        assert "Linf" in (out / "summary.txt").read_text(encoding="utf-8")

    def test_convergence_writes_table(self, tmp_path):
        code = run(["convergence", "--scenario", "advect1d-sine", "--meshes", "16,32",
                    "--tfinal", 1.0, "--out", tmp_path, "--quiet"])
        assert code == EXIT_OK
        assert "Order" in (tmp_path / "convergence.txt").read_text(encoding="utf-8")

    def test_blowup_exit_code(self, tmp_path, monkeypatch, capsys):
        """Тест: численная неустойчивость → код 2"""
        def explode(config, verbose=False, on_snapshot=None):
            raise NumericalBlowupError(step=7, cell=(1, 2), t=0.5)

        monkeypatch.setattr(cli, "run_vp", explode)
        code = run(["vp", "--nx", 16, "--nv", 32, "--tfinal", 0.5, "--out", tmp_path, "--quiet"])
        assert code == EXIT_BLOWUP
        assert "шаг 7" in capsys.readouterr().out

    def test_io_error_exit_code(self, tmp_path):
        """Тест: каталог результатов занят файлом → код 3"""
        blocker = tmp_path / "blocker"
        blocker.write_text("x", encoding="utf-8")
        code = run(["advect1d", "--nx", 16, "--tfinal", 0.2, "--out", blocker, "--quiet"])
        assert code == EXIT_IO


class TestRates:
    """Тесты для команды rates"""

    # ============ FIXTURES ============

    @pytest.fixture
    def diagnostics_csv(self, tmp_path):
        t = np.linspace(0.0, 40.0, 4001)
        e_l2 = np.abs(np.cos(t)) * np.exp(-0.15 * t)
        records = [
            DiagnosticsRecord(t=float(ti), mass=1.0, l1=1.0, l2=1.0, energy=1.0, entropy=0.0,
                              e_l2=float(ei), e_linf=float(ei))
            for ti, ei in zip(t, e_l2)
        ]
        return emit_diagnostics_csv(records, tmp_path / "diagnostics.csv")

    def test_rate_report(self, diagnostics_csv, tmp_path):
        report = tmp_path / "rates.txt"
        code = run(["rates", "--input", diagnostics_csv, "--window", "0,30", "--window", "10,40",
                    "--out", report])
        assert code == EXIT_OK
        text = report.read_text(encoding="utf-8")
        assert text.count("γ = -0.150") == 2

    def test_unknown_column(self, diagnostics_csv, capsys):
        code = run(["rates", "--input", diagnostics_csv, "--window", "0,30", "--column", "power"])
        assert code == EXIT_USAGE
        assert "Нет столбца 'power'" in capsys.readouterr().out

    def test_too_few_peaks(self, diagnostics_csv):
        assert run(["rates", "--input", diagnostics_csv, "--window", "2,5"]) == EXIT_USAGE

    def test_missing_input(self, tmp_path):
        assert run(["rates", "--input", tmp_path / "none.csv", "--window", "0,30"]) == EXIT_IO


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
