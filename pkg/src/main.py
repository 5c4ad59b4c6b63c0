# src/main.py

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from artifacts import (
    ArtifactWriteError,
    ReportRenderer,
    emit_diagnostics_csv,
    emit_profile_csv,
    emit_snapshot,
    load_diagnostics_csv,
    write_report,
)
from convergence import run_convergence
from diagnostics import fit_rate_detailed, relative_deviation
from scenarios import (
    PRESET_FIELDS,
    ProblemKind,
    ScenarioConfig,
    read_config_json,
    scenario_names,
    scenarios_of_kind,
)
from vp_solver import WO_CFL_LIMIT, NumericalBlowupError, run_advection, run_rotation, run_vp

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BLOWUP = 2
EXIT_IO = 3

DEFAULT_SCENARIO = {
    "advect1d": "advect1d-sine",
    "rotate": "rotation-gaussian",
    "vp": "landau-weak",
    "convergence": "advect1d-sine",
}

COMMAND_KIND = {
    "advect1d": (ProblemKind.ADVECTION,),
    "rotate": (ProblemKind.ROTATION,),
    "vp": (ProblemKind.VLASOV,),
    "convergence": (ProblemKind.ADVECTION, ProblemKind.ROTATION),
}

# флаг CLI → поле ScenarioConfig
FLAG_FIELDS = {
    "nx": "n_x",
    "nv": "n_v",
    "cfl": "cfl",
    "tfinal": "t_final",
    "variant": "variant",
    "mx": "m_x",
    "mv": "m_v",
    "out": "output_dir",
    "snapshots": "snapshot_times",
    "mode": "mode",
    "order": "order",
    "alpha": "alpha",
    "k": "k",
    "progress_every": "progress_every",
}

SUMMARY_FIELDS = ("mass", "l1", "l2", "energy", "entropy", "e_l2", "e_linf")
CONSERVED_FIELDS = ("mass", "l1", "l2", "energy", "entropy")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse с кодом выхода 1 вместо 2 при ошибке разбора"""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"❌ {self.prog}: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# ============ РАЗБОР АРГУМЕНТОВ ============

def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидался список чисел через запятую: {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидался список целых через запятую: {text!r}")


def _window(text: str):
    values = _float_list(text)
    if len(values) != 2 or values[0] >= values[1]:
        raise argparse.ArgumentTypeError(f"окно задаётся как t_lo,t_hi с t_lo < t_hi: {text!r}")
    return tuple(values)


def _run_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", choices=scenario_names(), help="Сценарий из каталога")
    common.add_argument("--config", help="JSON-файл с полями ScenarioConfig (флаги важнее)")
    common.add_argument("--nx", type=int, help="Число ячеек по x (N для переноса и вращения)")
    common.add_argument("--nv", type=int, help="Число ячеек по v (или y)")
    common.add_argument("--cfl", type=float, help="CFL (по умолчанию 1.2 для wo, 2.2 для wl)")
    common.add_argument("--variant", choices=["wo", "wl"], help="Без лимитера (wo) или с лимитером (wl)")
    common.add_argument("--mx", type=float, help="Константа TVB по x")
    common.add_argument("--mv", type=float, help="Константа TVB по v")
    common.add_argument("--tfinal", type=float, help="Конечное время")
    common.add_argument("--out", help="Каталог результатов")
    common.add_argument("--snapshots", type=_float_list, help="Времена снимков t1,t2,...")
    common.add_argument("--mode", choices=["hweno", "linear"], help="Реконструкция потока")
    common.add_argument("--order", type=int, choices=[3, 5], help="Порядок (3 только для linear)")
    common.add_argument("--alpha", type=float, help="Амплитуда возмущения (custom)")
    common.add_argument("--k", type=float, help="Волновое число (custom)")
    common.add_argument("--progress-every", dest="progress_every", type=int,
                        help="Печатать прогресс каждые N шагов (0 — не печатать)")
    common.add_argument("--quiet", action="store_true", help="Без вывода прогресса")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="vlasol",
        description="Консервативный полулагранжев HWENO-решатель: перенос, вращение, Власов–Пуассон",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Примеры использования:

  # Слабое затухание Ландау
  python main.py vp --scenario landau-weak --nx 64 --nv 128 --tfinal 60 --out runs/lw

  # Сильное затухание Ландау с лимитером и снимком при t=30
  python main.py vp --scenario landau-strong --variant wl --snapshots 30 --out runs/ls

  # Таблица сходимости для sin(x)
  python main.py convergence --scenario advect1d-sine --meshes 32,64,96,128,160,192 --cfl 1.2 --tfinal 20

  # Вращение диска, конуса и горба
  python main.py rotate --scenario rotation-leveque --nx 200 --nv 200 --out runs/lev

  # Скорость затухания по CSV диагностик
  python main.py rates --input runs/lw/diagnostics.csv --window 0,30

Коды выхода: 0 успех, 1 ошибка аргументов, 2 численная неустойчивость, 3 ошибка ввода-вывода
        """,
    )
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    common = _run_options()

    sub.add_parser("advect1d", parents=[common], help="Одномерный перенос f_t + f_x = 0")
    sub.add_parser("rotate", parents=[common], help="Вращение f_t − y f_x + x f_y = 0")
    sub.add_parser("vp", parents=[common], help="Система Власова–Пуассона")

    conv = sub.add_parser("convergence", parents=[common], help="Таблица ошибок и порядков")
    conv.add_argument("--meshes", type=_int_list, required=True, help="Сетки N1,N2,...")

    rates = sub.add_parser("rates", help="Скорость роста/затухания по CSV диагностик")
    rates.add_argument("--input", required=True, help="CSV диагностик")
    rates.add_argument("--window", type=_window, action="append", required=True,
                       help="Окно t_lo,t_hi (можно повторять)")
    rates.add_argument("--column", default="e_l2", help="Столбец (по умолчанию e_l2)")
    rates.add_argument("--out", help="Файл отчёта")
    return parser


def config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    """Собирает конфигурацию: пресет или JSON, затем флаги"""
    overrides = {
        field: getattr(args, flag)
        for flag, field in FLAG_FIELDS.items()
        if getattr(args, flag, None) is not None
    }
    if args.config:
        data = read_config_json(args.config)
        if args.scenario and args.scenario != data.get("scenario"):
            # размеры, время, α, k и M берутся из нового пресета
            data = {k: v for k, v in data.items() if k not in PRESET_FIELDS}
            data["scenario"] = args.scenario
        variant_changed = overrides.get("variant", data.get("variant", "wo")) != data.get("variant", "wo")
        if variant_changed and "cfl" not in overrides:
            data.pop("cfl", None)
        data.update(overrides)
        config = ScenarioConfig.from_dict(data)
    else:
        config = ScenarioConfig.from_preset(args.scenario or DEFAULT_SCENARIO[args.command], **overrides)

    if args.quiet:
        config = config.with_overrides(progress_every=0)
    if config.kind not in COMMAND_KIND[args.command]:
        suitable = [name for kind in COMMAND_KIND[args.command] for name in scenarios_of_kind(kind)]
        raise UsageError(
            f"❌ Сценарий {config.scenario} не подходит для команды {args.command}. "
            f"Подходят: {', '.join(suitable)}"
        )
    return config


# ============ КОМАНДЫ ============

def _print_config(config: ScenarioConfig) -> None:
    variant = config.scheme_variant()
    print(f"✅ Сценарий: {config.scenario} ({config.preset.description})")
    print(f"✅ Схема: {variant.label}, CFL = {config.cfl:g}")
    if config.kind is ProblemKind.ADVECTION:
        print(f"✅ Сетка: N = {config.n_x}")
    else:
        print(f"✅ Сетка: {config.n_x} × {config.n_v}")
    print(f"✅ t_final = {config.t_final:g}")
    if variant.limited:
        print(f"✅ TVB: M_x = {config.m_x:g}, M_v = {config.m_v:g}")
    if config.variant == "wo" and config.cfl > WO_CFL_LIMIT:
        print(f"⚠️  CFL = {config.cfl:g} > {WO_CFL_LIMIT:g} без лимитера: возможны осцилляции")
        print("   💡 Используйте --variant wl")


def _snapshot_writer(config: ScenarioConfig):
    out = config.output_path
    meta = {"scenario": config.scenario, "variant": config.variant, "cfl": config.cfl}

    def write(t, state):
        path = emit_snapshot(state, t, out / f"snapshot_t{t:.4f}.csv", meta)
        print(f"   📸 Снимок t = {t:g}: {path}")

    return write


def _summary(config: ScenarioConfig, result, renderer: ReportRenderer) -> str:
    finals, deviations = [], {}
    if result.records:
        last = result.records[-1]
        finals = [(name, getattr(last, name)) for name in SUMMARY_FIELDS]
        for name in CONSERVED_FIELDS:
            series = [getattr(r, name) for r in result.records]
            deviations[name] = float(relative_deviation(series)[-1])
    errors = None
    if result.errors is not None:
        errors = [("L1", result.errors.l1), ("L2", result.errors.l2), ("Linf", result.errors.linf)]
    grid = f"{config.n_x}" if config.kind is ProblemKind.ADVECTION else f"{config.n_x} x {config.n_v}"
    return renderer.render_summary(
        scenario=config.scenario, scheme=config.scheme_variant().label, cfl=config.cfl, grid=grid,
        steps=result.steps, t=result.t, finals=finals, deviations=deviations, errors=errors,
    )


def _run_simulation(args, config: ScenarioConfig) -> int:
    verbose = config.progress_every > 0
    out = config.output_path
    renderer = ReportRenderer()

    print("\nШАГ 2: Расчёт")
    print("-" * 70)
    if args.command == "advect1d":
        result = run_advection(config, verbose=verbose)
    elif args.command == "rotate":
        result = run_rotation(config, verbose=verbose, on_snapshot=_snapshot_writer(config))
    else:
        result = run_vp(config, verbose=verbose, on_snapshot=_snapshot_writer(config))
    print(f"✅ Выполнено шагов: {result.steps}, t = {result.t:g}")

    print("\nШАГ 3: Сохранение")
    print("-" * 70)
    write_report(config.to_json() + "\n", out / "config.json")
    if args.command == "advect1d":
        x = result.state.grid.points
        path = emit_profile_csv(x, result.state.f, result.exact, out / "profile.csv")
        print(f"✅ Профиль: {path}")
    else:
        path = emit_diagnostics_csv(result.records, out / "diagnostics.csv")
        print(f"✅ Диагностики: {path}")
        meta = {"scenario": config.scenario, "variant": config.variant, "cfl": config.cfl}
        final = emit_snapshot(result.state, result.t, out / "final.csv", meta)
        print(f"✅ Итоговое поле: {final}")

    summary = _summary(config, result, renderer)
    write_report(summary, out / "summary.txt")

    print("\nШАГ 4: Итоги")
    print("-" * 70)
    print(summary)
    return EXIT_OK


def _run_convergence(args, config: ScenarioConfig) -> int:
    print("\nШАГ 2: Прогон сеток")
    print("-" * 70)
    table = run_convergence(config, args.meshes, verbose=config.progress_every > 0)
    text = table.render()

    print("\nШАГ 3: Таблица")
    print("-" * 70)
    print(text)
    if args.out:
        path = write_report(text + "\n", Path(args.out) / "convergence.txt")
        print(f"✅ Таблица сохранена: {path}")
    return EXIT_OK


def _run_rates(args) -> int:
    print("\nШАГ 1: Чтение диагностик")
    print("-" * 70)
    columns = load_diagnostics_csv(args.input)
    if args.column not in columns:
        raise UsageError(f"❌ Нет столбца {args.column!r}; есть: {', '.join(columns)}")
    times, values = columns["t"], columns[args.column]
    print(f"✅ {args.input}: {times.size} записей")

    print("\nШАГ 2: Подгонка")
    print("-" * 70)
    fits = []
    for t_lo, t_hi in args.window:
        fit = fit_rate_detailed(times, values, (t_lo, t_hi))
        fits.append({"t_lo": t_lo, "t_hi": t_hi, "rate": fit.rate, "n_peaks": fit.n_peaks})
    text = ReportRenderer().render_rates(args.column, fits)
    print(text)
    if args.out:
        path = write_report(text + "\n", args.out)
        print(f"✅ Отчёт сохранён: {path}")
    return EXIT_OK


# ============ MAIN ============

def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    print("=" * 70)
    print("🚀 VLASOL: ПОЛУЛАГРАНЖЕВ HWENO-РЕШАТЕЛЬ")
    print("=" * 70)

    try:
        if args.command == "rates":
            return _run_rates(args)

        print("\nШАГ 1: Конфигурация")
        print("-" * 70)
        config = config_from_args(args)
        _print_config(config)

        if args.command == "convergence":
            return _run_convergence(args, config)
        return _run_simulation(args, config)

    except (UsageError, ValueError) as e:
        message = str(e)
        print(message if message.startswith("❌") else f"❌ {message}")
        return EXIT_USAGE
    except NumericalBlowupError as e:
        print(str(e))
        print(f"   → шаг {e.step}, ячейка {list(e.cell)}, t = {e.t:g}")
        return EXIT_BLOWUP
    except (ArtifactWriteError, OSError) as e:
        print(f"❌ Ошибка ввода-вывода: {e}")
        return EXIT_IO
    finally:
        print("=" * 70)


if __name__ == "__main__":
    sys.exit(main())
