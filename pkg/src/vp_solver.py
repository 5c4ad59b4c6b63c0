# src/vp_solver.py

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from diagnostics import ErrorNorms, error_norms, make_record
from grid_state import (
    BoundaryCondition,
    DiagnosticsRecord,
    Grid1D,
    Line,
    PhaseState,
    extend_cells,
)
from limiter import TroubleMask, TvbConstants, limit_block
from poisson import FieldE, field_from_state
from sl1d import HwenoParams, Mode, Order, advect_block

THREADS_ENV = "VLASOL_THREADS"

# Минимум линий на один поток
MIN_LINES_PER_WORKER = 16

# Значение на границе k−1/2 по ячейкам k−2..k+1
SOURCE_STENCIL = (Fraction(-1, 12), Fraction(7, 12), Fraction(7, 12), Fraction(-1, 12))
_SOURCE_WEIGHTS = tuple(float(c) for c in SOURCE_STENCIL)

# Рабочая точка WO; выше неё источник может быть неустойчив без лимитера
WO_CFL_LIMIT = 1.5


class NumericalBlowupError(RuntimeError):
    """В f, Φ или Ψ появилось NaN/Inf"""

    def __init__(self, step: int, cell: Tuple[int, ...], t: float, array: str = "f"):
        self.step = step
        self.cell = cell
        self.t = t
        self.array = array
        super().__init__(
            f"❌ Численная неустойчивость на шаге {step} (t={t:.6g}): "
            f"нечисловое значение в {array}{list(cell)}"
        )


class SweepDirection(Enum):
    X = "x"
    V = "v"


class Limiting(Enum):
    WO = "wo"
    WL = "wl"


@dataclass(frozen=True)
class SweepKind:
    direction: SweepDirection
    speeds: np.ndarray
    dt_fraction: float

    def __post_init__(self):
        if self.dt_fraction not in (0.5, 1.0):
            raise ValueError(f"❌ Доля шага должна быть 1/2 или 1, получено {self.dt_fraction}")
        if not np.all(np.isfinite(self.speeds)):
            raise ValueError("❌ Скорости свипа должны быть конечными")


@dataclass(frozen=True)
class SchemeVariant:
    """Схема: без лимитера (WO) или с лимитером TVB (WL)"""

    limiting: Limiting = Limiting.WO
    tvb: TvbConstants = field(default_factory=TvbConstants)
    cfl: float = 1.2
    mode: Mode = Mode.HWENO
    order: Order = Order.QUINTIC5
    hweno: HwenoParams = field(default_factory=HwenoParams)

    def __post_init__(self):
        if not (np.isfinite(self.cfl) and self.cfl > 0):
            raise ValueError(f"❌ CFL должен быть > 0, получено {self.cfl}")
        if self.mode is Mode.HWENO and self.order is not Order.QUINTIC5:
            raise ValueError("❌ HWENO определён только для пятого порядка")

    @property
    def limited(self) -> bool:
        return self.limiting is Limiting.WL

    @property
    def label(self) -> str:
        return f"CSLHWENO-{self.limiting.name}" if self.mode is Mode.HWENO else f"SL-{self.mode.value}{self.order.value}"


# ============ ПОТОКИ ============

def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"❌ {THREADS_ENV} должен быть целым числом, получено {raw!r}")
    if value < 1:
        raise ValueError(f"❌ {THREADS_ENV} должен быть >= 1, получено {value}")
    return value


def _advect_lines(f: np.ndarray, h: np.ndarray, shifts: np.ndarray, bc: BoundaryCondition,
                  variant: SchemeVariant) -> Tuple[np.ndarray, np.ndarray]:
    """Адвекция столбцов f/h, блоки столбцов обрабатываются параллельно"""
    n_lines = f.shape[1]
    workers = min(worker_count(), max(1, n_lines // MIN_LINES_PER_WORKER))

    def run(cols):
        return advect_block(f[:, cols], h[:, cols], shifts[cols], bc,
                            mode=variant.mode, order=variant.order, params=variant.hweno)

    if workers == 1:
        return run(slice(None))

    chunks = np.array_split(np.arange(n_lines), workers)
    f_new = np.empty_like(f, dtype=float)
    h_new = np.empty_like(h, dtype=float)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for cols, (f_part, h_part) in zip(chunks, pool.map(run, chunks)):
            f_new[:, cols] = f_part
            h_new[:, cols] = h_part
    return f_new, h_new


# ============ ИСТОЧНИК ============

def interface_source(s: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    """(−s_{k−2} + 7s_{k−1} + 7s_k − s_{k+1})/12 на границах вдоль оси 0.

    Разность соседних значений даёт центральную разность четвёртого порядка.
    """
    n = s.shape[0]
    se = extend_cells(s, bc, ghosts=2)

    def cell(offset: int) -> np.ndarray:
        return se[2 + offset:2 + offset + n + 1]

    w = _SOURCE_WEIGHTS
    source = w[0] * cell(-2) + w[1] * cell(-1) + w[2] * cell(0) + w[3] * cell(1)
    if bc is BoundaryCondition.PERIODIC:
        return source[1:]
    return source


def trapezoid_source_update(h: np.ndarray, s_before: np.ndarray, s_after: np.ndarray,
                            dt: float, bc: BoundaryCondition) -> np.ndarray:
    """h ← h − (dt/2)·(S⁰ + S¹) вдоль оси 0"""
    return h - 0.5 * dt * (interface_source(s_before, bc) + interface_source(s_after, bc))


# ============ СВИПЫ ============

def _limit_x(state: PhaseState, m: float) -> Tuple[PhaseState, np.ndarray]:
    phi, cells = limit_block(state.f, state.phi, state.x_grid.dx, state.x_grid.bc, m)
    return (state.replace(phi=phi) if phi is not state.phi else state), cells


def _limit_v(state: PhaseState, m: float) -> Tuple[PhaseState, np.ndarray]:
    psi_in = state.psi.T
    psi_t, cells_t = limit_block(state.f.T, psi_in, state.v_grid.dx, state.v_grid.bc, m)
    if psi_t is psi_in:
        return state, cells_t.T
    return state.replace(psi=np.ascontiguousarray(psi_t.T)), cells_t.T


def sweep_x_detailed(state: PhaseState, dt: float, variant: SchemeVariant,
                     speeds: Optional[np.ndarray] = None) -> Tuple[PhaseState, np.ndarray]:
    """Свип по x со скоростью speeds[j] для строки j (по умолчанию v_j).

    Возвращает новое состояние и маску ячеек, помеченных лимитером.
    """
    if not (np.isfinite(dt) and dt >= 0):
        raise ValueError(f"❌ dt должен быть >= 0, получено {dt}")
    speeds = state.v_grid.points if speeds is None else np.asarray(speeds, dtype=float)

    cells = np.zeros(state.shape, dtype=bool)
    if variant.limited:
        state, cells = _limit_x(state, variant.tvb.m_x)
    if dt == 0.0:
        return state, cells

    s_before = speeds[None, :] * state.f_x
    f, phi = _advect_lines(state.f, state.phi, speeds * dt / state.x_grid.dx, state.x_grid.bc, variant)
    advected = state.replace(f=f, phi=phi)
    s_after = speeds[None, :] * advected.f_x

    psi = trapezoid_source_update(state.psi.T, s_before.T, s_after.T, dt, state.v_grid.bc).T
    return advected.replace(psi=np.ascontiguousarray(psi)), cells


def sweep_v_detailed(state: PhaseState, field_e: Optional[FieldE], dt: float, variant: SchemeVariant,
                     speeds: Optional[np.ndarray] = None) -> Tuple[PhaseState, np.ndarray]:
    """Свип по v со скоростью speeds[i] для столбца i (по умолчанию E_i)"""
    if not (np.isfinite(dt) and dt >= 0):
        raise ValueError(f"❌ dt должен быть >= 0, получено {dt}")
    speeds = field_e.e if speeds is None else np.asarray(speeds, dtype=float)

    cells = np.zeros(state.shape, dtype=bool)
    if variant.limited:
        state, cells = _limit_v(state, variant.tvb.m_v)
    if dt == 0.0:
        return state, cells

    s_before = speeds[:, None] * state.f_v
    f_t, psi_t = _advect_lines(state.f.T, state.psi.T, speeds * dt / state.v_grid.dx, state.v_grid.bc, variant)
    advected = state.replace(f=np.ascontiguousarray(f_t.T), psi=np.ascontiguousarray(psi_t.T))
    s_after = speeds[:, None] * advected.f_v

    phi = trapezoid_source_update(state.phi, s_before, s_after, dt, state.x_grid.bc)
    return advected.replace(phi=phi), cells


def sweep_x(state: PhaseState, dt: float, variant: SchemeVariant,
            speeds: Optional[np.ndarray] = None) -> PhaseState:
    return sweep_x_detailed(state, dt, variant, speeds)[0]


def sweep_v(state: PhaseState, field_e: FieldE, dt: float, variant: SchemeVariant,
            speeds: Optional[np.ndarray] = None) -> PhaseState:
    return sweep_v_detailed(state, field_e, dt, variant, speeds)[0]


# ============ ШАГ СТРАНГА ============

def apply_sweep(state: PhaseState, sweep: SweepKind, dt: float,
                variant: SchemeVariant) -> Tuple[PhaseState, np.ndarray]:
    """Свип на долю dt_fraction шага dt"""
    step = sweep.dt_fraction * dt
    if sweep.direction is SweepDirection.X:
        return sweep_x_detailed(state, step, variant, sweep.speeds)
    return sweep_v_detailed(state, None, step, variant, sweep.speeds)


def strang_step(state: PhaseState, variant: SchemeVariant, dt: float) -> Tuple[PhaseState, FieldE, TroubleMask]:
    """x(dt/2) → E по f* → v(dt) → x(dt/2); лимитер перед каждым свипом в WL"""
    x_half = SweepKind(SweepDirection.X, state.v_grid.points, 0.5)
    half, cells = apply_sweep(state, x_half, dt, variant)
    field_e = field_from_state(half)
    after_v, cells_v = apply_sweep(half, SweepKind(SweepDirection.V, field_e.e, 1.0), dt, variant)
    final, cells_x = apply_sweep(after_v, x_half, dt, variant)
    mask = TroubleMask(cells).union(TroubleMask(cells_v)).union(TroubleMask(cells_x))
    return final, field_e, mask


def strang_step_linear(state: PhaseState, variant: SchemeVariant, dt: float,
                       a_speeds: np.ndarray, b_speeds: np.ndarray) -> Tuple[PhaseState, TroubleMask]:
    """Тот же шаг для f_t + a(y) f_x + b(x) f_y = 0 без уравнения Пуассона"""
    x_half = SweepKind(SweepDirection.X, np.asarray(a_speeds, dtype=float), 0.5)
    y_full = SweepKind(SweepDirection.V, np.asarray(b_speeds, dtype=float), 1.0)
    mask = TroubleMask.empty(state.shape)
    for sweep in (x_half, y_full, x_half):
        state, flagged = apply_sweep(state, sweep, dt, variant)
        mask = mask.union(TroubleMask(flagged))
    return state, mask


# ============ ШАГ ПО ВРЕМЕНИ ============

def timestep(state: PhaseState, field_e: FieldE, cfl: float) -> float:
    """Δt = cfl/(v_max/dx + max|E|/dv)"""
    if not cfl > 0:
        raise ValueError(f"❌ CFL должен быть > 0, получено {cfl}")
    rate = state.v_grid.max_abs / state.x_grid.dx + field_e.max_abs / state.v_grid.dx
    if rate == 0.0:
        raise ValueError("❌ Нулевые скорости: шаг по времени не определён")
    return cfl / rate


def linear_timestep(x_grid: Grid1D, y_grid: Grid1D, a_max: float, b_max: float, cfl: float) -> float:
    """Δt = cfl/(max|a|/dx + max|b|/dy)"""
    if not cfl > 0:
        raise ValueError(f"❌ CFL должен быть > 0, получено {cfl}")
    rate = a_max / x_grid.dx + b_max / y_grid.dx
    if rate == 0.0:
        raise ValueError("❌ Нулевые скорости: шаг по времени не определён")
    return cfl / rate


def _land_on(t: float, dt: float, targets: Sequence[float]) -> Tuple[float, float]:
    """Укорачивает dt, чтобы попасть точно в ближайшее время вывода"""
    target = next(tt for tt in targets if tt > t)
    if t + dt >= target - 1e-12 * max(1.0, abs(target)):
        return target - t, target
    return dt, t + dt


def _output_targets(t_final: float, snapshot_times: Sequence[float]) -> List[float]:
    return sorted({float(s) for s in snapshot_times if 0.0 < s < t_final} | {float(t_final)})


def _check_finite(state: PhaseState, step: int, t: float) -> None:
    bad = state.first_non_finite()
    if bad is not None:
        raise NumericalBlowupError(step=step, cell=bad[1], t=t, array=bad[0])


# ============ ДРАЙВЕРЫ ============

@dataclass
class RunResult:
    state: object
    records: List[DiagnosticsRecord] = field(default_factory=list)
    snapshots: List[Tuple[float, object]] = field(default_factory=list)
    steps: int = 0
    t: float = 0.0
    errors: Optional[ErrorNorms] = None
    exact: Optional[np.ndarray] = None


def _progress(verbose: bool, step: int, t: float, t_final: float, every: int, extra: str = "") -> None:
    if verbose and every > 0 and step % every == 0:
        print(f"   → шаг {step:6d}  t = {t:10.5f} / {t_final:g}{extra}")


def integrate_vp(state: PhaseState, variant: SchemeVariant, t_final: float,
                 snapshot_times: Sequence[float] = (),
                 on_snapshot: Optional[Callable[[float, PhaseState], None]] = None,
                 verbose: bool = False, progress_every: int = 100) -> RunResult:
    """Цикл по времени для системы Власова–Пуассона"""
    if not t_final > 0:
        raise ValueError(f"❌ t_final должен быть > 0, получено {t_final}")
    _check_finite(state, 0, 0.0)

    result = RunResult(state=state)
    wanted = {float(s) for s in snapshot_times}
    targets = _output_targets(t_final, snapshot_times)

    field_e = field_from_state(state)
    result.records.append(make_record(state, field_e, 0.0, 0))
    if 0.0 in wanted:
        result.snapshots.append((0.0, state))
        if on_snapshot:
            on_snapshot(0.0, state)

    t, step = 0.0, 0
    while t < t_final:
        dt, t_next = _land_on(t, timestep(state, field_e, variant.cfl), targets)
        state, half_field, mask = strang_step(state, variant, dt)
        step += 1
        t = t_next
        _check_finite(state, step, t)

        result.records.append(make_record(state, half_field, t, mask.count))
        if t in wanted:
            result.snapshots.append((t, state))
            if on_snapshot:
                on_snapshot(t, state)
        _progress(verbose, step, t, t_final, progress_every,
                  f"  ‖E‖₂ = {result.records[-1].e_l2:.4e}  troubled = {mask.count}")
        field_e = field_from_state(state)

    result.state, result.steps, result.t = state, step, t
    return result


def integrate_linear(state: PhaseState, variant: SchemeVariant, t_final: float,
                     a_speeds: np.ndarray, b_speeds: np.ndarray,
                     snapshot_times: Sequence[float] = (),
                     on_snapshot: Optional[Callable[[float, PhaseState], None]] = None,
                     verbose: bool = False, progress_every: int = 100,
                     speed_bounds: Optional[Tuple[float, float]] = None) -> RunResult:
    """Цикл по времени для f_t + a(y) f_x + b(x) f_y = 0.

    speed_bounds — (max|a|, max|b|) для шага; по умолчанию максимум по узлам.
    """
    if not t_final > 0:
        raise ValueError(f"❌ t_final должен быть > 0, получено {t_final}")
    _check_finite(state, 0, 0.0)

    a_speeds = np.asarray(a_speeds, dtype=float)
    b_speeds = np.asarray(b_speeds, dtype=float)
    if speed_bounds is None:
        speed_bounds = (float(np.max(np.abs(a_speeds))), float(np.max(np.abs(b_speeds))))
    base_dt = linear_timestep(state.x_grid, state.v_grid, *speed_bounds, variant.cfl)

    result = RunResult(state=state)
    wanted = {float(s) for s in snapshot_times}
    targets = _output_targets(t_final, snapshot_times)
    zero = FieldE.zeros(state.x_grid.n_cells)

    result.records.append(make_record(state, zero, 0.0, 0))
    if 0.0 in wanted:
        result.snapshots.append((0.0, state))
        if on_snapshot:
            on_snapshot(0.0, state)

    t, step = 0.0, 0
    while t < t_final:
        dt, t_next = _land_on(t, base_dt, targets)
        state, mask = strang_step_linear(state, variant, dt, a_speeds, b_speeds)
        step += 1
        t = t_next
        _check_finite(state, step, t)

        result.records.append(make_record(state, zero, t, mask.count))
        if t in wanted:
            result.snapshots.append((t, state))
            if on_snapshot:
                on_snapshot(t, state)
        _progress(verbose, step, t, t_final, progress_every)

    result.state, result.steps, result.t = state, step, t
    return result


def integrate_line(line: Line, speed: float, variant: SchemeVariant, t_final: float,
                   verbose: bool = False, progress_every: int = 100) -> RunResult:
    """Одномерный перенос f_t + speed·f_x = 0 с постоянным шагом cfl·dx/|speed|"""
    if not t_final > 0:
        raise ValueError(f"❌ t_final должен быть > 0, получено {t_final}")
    if not (np.isfinite(speed) and speed != 0.0):
        raise ValueError(f"❌ Скорость должна быть конечной и ненулевой, получено {speed}")

    base_dt = variant.cfl * line.grid.dx / abs(speed)
    targets = [float(t_final)]
    f, h = line.f[:, None], line.h[:, None]

    t, step = 0.0, 0
    while t < t_final:
        dt, t = _land_on(t, base_dt, targets)
        f, h = advect_block(f, h, [speed * dt / line.grid.dx], line.bc,
                            mode=variant.mode, order=variant.order, params=variant.hweno)
        step += 1
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(h))):
            bad = np.argwhere(~np.isfinite(f))
            raise NumericalBlowupError(step=step, cell=(int(bad[0][0]),) if bad.size else (0,), t=t)
        _progress(verbose, step, t, t_final, progress_every)

    return RunResult(state=line.with_values(f[:, 0], h[:, 0]), steps=step, t=t)


def run_vp(config, verbose: bool = False, on_snapshot=None) -> RunResult:
    """Запуск сценария Власова–Пуассона по конфигурации"""
    from scenarios import build_initial

    state = build_initial(config)
    return integrate_vp(
        state, config.scheme_variant(), config.t_final,
        snapshot_times=config.snapshot_times, on_snapshot=on_snapshot,
        verbose=verbose, progress_every=config.progress_every,
    )


def run_rotation(config, verbose: bool = False, on_snapshot=None) -> RunResult:
    """Вращение: скорость −ω·y_j по x и ω·x_i по y; ошибки против повёрнутых данных"""
    from scenarios import build_initial, exact_solution, linear_speeds

    state = build_initial(config)
    a_speeds, b_speeds = linear_speeds(config, state.x_grid, state.v_grid)
    # граница скорости берётся на краю области, а не в крайнем узле
    omega = abs(config.preset.omega)
    result = integrate_linear(
        state, config.scheme_variant(), config.t_final, a_speeds, b_speeds,
        snapshot_times=config.snapshot_times, on_snapshot=on_snapshot,
        verbose=verbose, progress_every=config.progress_every,
        speed_bounds=(omega * state.v_grid.max_abs, omega * state.x_grid.max_abs),
    )
    result.exact = exact_solution(config, result.t)
    result.errors = error_norms(result.state.f, result.exact)
    return result


def run_advection(config, verbose: bool = False) -> RunResult:
    """Одномерный перенос; ошибки против точно сдвинутого профиля"""
    from scenarios import build_initial, exact_solution

    line = build_initial(config)
    result = integrate_line(line, config.preset.speed, config.scheme_variant(), config.t_final,
                            verbose=verbose, progress_every=config.progress_every)
    result.exact = exact_solution(config, result.t)
    result.errors = error_norms(result.state.f, result.exact)
    return result
