# src/diagnostics.py

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.signal import find_peaks

from grid_state import DiagnosticsRecord, PhaseState


class NormKind(Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"
    MASS = "mass"
    ENERGY = "energy"
    ENTROPY = "entropy"


class RateFitMode(Enum):
    EXTREMA_LOG_LINEAR = "extrema-log-linear"


# ============ ФАЗОВЫЕ НОРМЫ ============

def _entropy_density(f: np.ndarray) -> np.ndarray:
    magnitude = np.abs(f)
    # 0·log 0 = 0
    safe = np.where(magnitude > 0.0, magnitude, 1.0)
    return f * np.log(safe)


def phase_norm(state: PhaseState, kind: NormKind, field=None) -> float:
    """Квадратура прямоугольников Σ g(f_ij)·dx·dv"""
    f = state.f
    cell = state.x_grid.dx * state.v_grid.dx

    if kind is NormKind.MASS:
        return float(np.sum(f) * cell)
    if kind is NormKind.L1:
        return float(np.sum(np.abs(f)) * cell)
    if kind is NormKind.L2:
        return float(np.sqrt(np.sum(f * f) * cell))
    if kind is NormKind.LINF:
        return float(np.max(np.abs(f)))
    if kind is NormKind.ENTROPY:
        return float(np.sum(_entropy_density(f)) * cell)
    if kind is NormKind.ENERGY:
        if field is None:
            raise ValueError("❌ Для энергии нужно электрическое поле")
        v = state.v_grid.points
        kinetic = np.sum(f * (v * v)[None, :]) * cell
        potential = np.sum(field.e * field.e) * state.x_grid.dx
        return float(kinetic + potential)
    raise ValueError(f"❌ Неизвестная норма: {kind}")


def field_norms(field, dx: float) -> Tuple[float, float]:
    """(‖E‖₂, ‖E‖∞)"""
    return float(np.sqrt(np.sum(field.e * field.e) * dx)), field.max_abs


def make_record(state: PhaseState, field, t: float, troubled_cells: int = 0) -> DiagnosticsRecord:
    e_l2, e_linf = field_norms(field, state.x_grid.dx)
    return DiagnosticsRecord(
        t=float(t),
        mass=phase_norm(state, NormKind.MASS),
        l1=phase_norm(state, NormKind.L1),
        l2=phase_norm(state, NormKind.L2),
        energy=phase_norm(state, NormKind.ENERGY, field),
        entropy=phase_norm(state, NormKind.ENTROPY),
        e_l2=e_l2,
        e_linf=e_linf,
        troubled_cells=int(troubled_cells),
    )


def relative_deviation(series: Sequence[float]) -> np.ndarray:
    """(s_k − s_0)/|s_0|; при s_0 = 0 — абсолютное отклонение"""
    values = np.asarray(series, dtype=float)
    if values.size == 0:
        return values
    deviation = values - values[0]
    if values[0] == 0.0:
        return deviation
    return deviation / abs(values[0])


# ============ СКОРОСТИ ЗАТУХАНИЯ ============

@dataclass(frozen=True)
class RateFit:
    rate: float
    intercept: float
    peak_times: np.ndarray
    peak_values: np.ndarray

    @property
    def n_peaks(self) -> int:
        return int(self.peak_times.size)


def fit_rate_detailed(times, values, window: Tuple[float, float],
                      mode: RateFitMode = RateFitMode.EXTREMA_LOG_LINEAR) -> RateFit:
    if mode is not RateFitMode.EXTREMA_LOG_LINEAR:
        raise ValueError(f"❌ Неизвестный режим подгонки: {mode}")
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape:
        raise ValueError(f"❌ Размеры не совпадают: {times.shape} и {values.shape}")

    t_lo, t_hi = window
    inside = (times >= t_lo) & (times <= t_hi)
    t_window = times[inside]
    v_window = values[inside]

    peaks, _ = find_peaks(v_window)
    peaks = peaks[v_window[peaks] > 0.0]
    if peaks.size < 3:
        raise ValueError(
            f"❌ Нужно не меньше 3 локальных максимумов в окне [{t_lo}, {t_hi}], найдено {peaks.size}"
        )

    slope, intercept = np.polyfit(t_window[peaks], np.log(v_window[peaks]), 1)
    return RateFit(
        rate=float(slope),
        intercept=float(intercept),
        peak_times=t_window[peaks],
        peak_values=v_window[peaks],
    )


def fit_rate(times, values, window: Tuple[float, float],
             mode: RateFitMode = RateFitMode.EXTREMA_LOG_LINEAR) -> float:
    """Наклон МНК log(локальных максимумов) от времени"""
    return fit_rate_detailed(times, values, window, mode).rate


# ============ ОШИБКИ И ПОРЯДКИ ============

@dataclass(frozen=True)
class ErrorNorms:
    l1: float
    l2: float
    linf: float

    def get(self, name: str) -> float:
        return getattr(self, name)


def error_norms(numeric, exact) -> ErrorNorms:
    """L¹ = mean|e|, L² = sqrt(mean e²), L∞ = max|e|"""
    err = np.abs(np.asarray(numeric, dtype=float) - np.asarray(exact, dtype=float))
    return ErrorNorms(
        l1=float(np.mean(err)),
        l2=float(np.sqrt(np.mean(err * err))),
        linf=float(np.max(err)),
    )


def observed_orders(meshes: Sequence[int], errors: Sequence[float]) -> list:
    """Порядки между соседними сетками; для первой сетки — None"""
    orders: list = [None]
    for (n0, e0), (n1, e1) in zip(zip(meshes, errors), zip(meshes[1:], errors[1:])):
        if e0 > 0 and e1 > 0:
            orders.append(float(np.log(e0 / e1) / np.log(n1 / n0)))
        else:
            orders.append(None)
    return orders


def fitted_order(meshes: Sequence[int], errors: Sequence[float], last: Optional[int] = None) -> float:
    """Наклон МНК −log(ошибки) от log(N) по последним сеткам"""
    n = np.asarray(meshes, dtype=float)
    e = np.asarray(errors, dtype=float)
    if last is not None:
        n, e = n[-last:], e[-last:]
    if n.size < 2:
        raise ValueError("❌ Для оценки порядка нужно не меньше двух сеток")
    slope, _ = np.polyfit(np.log(n), np.log(e), 1)
    return float(-slope)
