# src/limiter.py

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from grid_state import (
    GHOST_CELLS,
    MIN_CELLS,
    BoundaryCondition,
    Line,
    extend_cells,
    left_interfaces,
    right_interfaces,
)

# Классические линейные веса и параметры Jiang–Shu
WENO5_LINEAR_WEIGHTS = (0.1, 0.6, 0.3)
WENO5_EPSILON = 1e-6


@dataclass(frozen=True)
class TvbConstants:
    """Константы TVB по направлениям x и v"""

    m_x: float = 1.0
    m_v: float = 1.0

    def __post_init__(self):
        for name in ("m_x", "m_v"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"❌ {name} должен быть >= 0, получено {value}")


@dataclass(frozen=True)
class TroubleMask:
    """Флаги проблемных ячеек, форма совпадает с формой поля"""

    cells: np.ndarray

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.cells))

    def union(self, other: "TroubleMask") -> "TroubleMask":
        return TroubleMask(self.cells | other.cells)

    @classmethod
    def empty(cls, shape) -> "TroubleMask":
        return cls(np.zeros(shape, dtype=bool))


# ============ MINMOD ============

def minmod(*values):
    """s·min|a_j|, если все знаки совпадают, иначе 0"""
    if not values:
        raise ValueError("❌ minmod требует хотя бы один аргумент")
    stacked = np.stack(np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in values)))
    signs = np.sign(stacked)
    same = np.all(signs == signs[0], axis=0)
    result = np.where(same, signs[0] * np.abs(stacked).min(axis=0), 0.0)
    return float(result) if result.ndim == 0 else result


def tvb_minmod(*values, m: float, dx: float):
    """a₁ при |a₁| ≤ m·dx², иначе minmod(a₁..a_n)"""
    first = np.asarray(values[0], dtype=float)
    result = np.where(np.abs(first) <= m * dx * dx, first, minmod(*values))
    return float(result) if result.ndim == 0 else result


# ============ WENO5 ============

def _weno5_one_sided(a, b, c, d, e):
    """Значение на границе справа от ячейки c по средним a..e (Jiang–Shu)"""
    q1 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0
    q2 = (-b + 5.0 * c + 2.0 * d) / 6.0
    q3 = (2.0 * c + 5.0 * d - e) / 6.0

    beta1 = 13.0 / 12.0 * (a - 2.0 * b + c) ** 2 + 0.25 * (a - 4.0 * b + 3.0 * c) ** 2
    beta2 = 13.0 / 12.0 * (b - 2.0 * c + d) ** 2 + 0.25 * (b - d) ** 2
    beta3 = 13.0 / 12.0 * (c - 2.0 * d + e) ** 2 + 0.25 * (3.0 * c - 4.0 * d + e) ** 2

    g1, g2, g3 = WENO5_LINEAR_WEIGHTS
    w1 = g1 / (WENO5_EPSILON + beta1) ** 2
    w2 = g2 / (WENO5_EPSILON + beta2) ** 2
    w3 = g3 / (WENO5_EPSILON + beta3) ** 2
    return (w1 * q1 + w2 * q2 + w3 * q3) / (w1 + w2 + w3)


def weno5_reconstruct_h(values: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    """Восстанавливает h на границах ячеек по точечным значениям вдоль оси 0.

    Значение на границе — среднее левой и правой реконструкций.
    Periodic: n значений (правые границы), Zero: n+1 значений.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n < MIN_CELLS:
        raise ValueError(f"❌ Для WENO5 нужно не меньше {MIN_CELLS} ячеек, получено {n}")

    fe = extend_cells(values, bc)

    def cell(offset: int) -> np.ndarray:
        # значения ячеек k+offset для границ k-1/2, k = 0..n
        start = GHOST_CELLS + offset
        return fe[start:start + n + 1]

    from_left = _weno5_one_sided(cell(-3), cell(-2), cell(-1), cell(0), cell(1))
    from_right = _weno5_one_sided(cell(2), cell(1), cell(0), cell(-1), cell(-2))
    h = 0.5 * (from_left + from_right)

    if bc is BoundaryCondition.PERIODIC:
        return h[1:]
    return h


# ============ ДЕТЕКТОР ============

def detect_troubled_block(f: np.ndarray, h: np.ndarray, dx: float, bc: BoundaryCondition,
                          m: float) -> np.ndarray:
    """Булева маска проблемных ячеек для набора линий вдоль оси 0"""
    f = np.asarray(f, dtype=float)
    fe = extend_cells(f, bc, ghosts=1)
    forward = fe[2:] - fe[1:-1]
    backward = fe[1:-1] - fe[:-2]

    upper = right_interfaces(h, bc) - f
    lower = f - left_interfaces(h, bc)

    upper_mod = tvb_minmod(upper, forward, backward, m=m, dx=dx)
    lower_mod = tvb_minmod(lower, forward, backward, m=m, dx=dx)
    return (upper_mod != upper) | (lower_mod != lower)


def detect_troubled(line: Line, m: float) -> TroubleMask:
    return TroubleMask(detect_troubled_block(line.f, line.h, line.grid.dx, line.bc, m))


def troubled_interfaces(cells: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    """Границы, у которых хотя бы одна соседняя ячейка помечена"""
    if bc is BoundaryCondition.PERIODIC:
        # h[k]: правая граница ячейки k
        return cells | np.roll(cells, -1, axis=0)
    pad = [(1, 1)] + [(0, 0)] * (cells.ndim - 1)
    padded = np.pad(cells, pad)
    return padded[:-1] | padded[1:]


def limit_block(f: np.ndarray, h: np.ndarray, dx: float, bc: BoundaryCondition,
                m: float) -> Tuple[np.ndarray, np.ndarray]:
    """Заменяет h у проблемных ячеек на WENO5. Возвращает (h, маска ячеек)"""
    cells = detect_troubled_block(f, h, dx, bc, m)
    if not cells.any():
        return h, cells
    replace = troubled_interfaces(cells, bc)
    weno = weno5_reconstruct_h(f, bc)
    return np.where(replace, weno, h), cells


def apply_limiter(line: Line, m: float) -> Tuple[Line, TroubleMask]:
    h, cells = limit_block(line.f, line.h, line.grid.dx, line.bc, m)
    if h is line.h:
        return line, TroubleMask(cells)
    return line.with_values(line.f, h), TroubleMask(cells)
