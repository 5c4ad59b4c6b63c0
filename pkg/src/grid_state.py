# src/grid_state.py

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

# Минимальная поддержка шаблона для реконструкции пятого порядка
MIN_CELLS = 6

# Число фиктивных ячеек с каждой стороны при расширении линии
GHOST_CELLS = 3


class BoundaryCondition(Enum):
    PERIODIC = "periodic"
    ZERO = "zero"


# ============ СЕТКИ ============

@dataclass(frozen=True)
class Grid1D:
    """Равномерная одномерная сетка с точками в центрах ячеек"""

    n_cells: int
    x_lo: float
    x_hi: float
    bc: BoundaryCondition = BoundaryCondition.PERIODIC

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < MIN_CELLS:
            raise ValueError(
                f"❌ Нужно не меньше {MIN_CELLS} ячеек, получено: {self.n_cells}"
            )
        if not (np.isfinite(self.x_lo) and np.isfinite(self.x_hi)) or self.x_hi <= self.x_lo:
            raise ValueError(f"❌ Неверная область: [{self.x_lo}, {self.x_hi}]")

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.n_cells

    @property
    def length(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def points(self) -> np.ndarray:
        """x_i = x_lo + (i + 1/2)·dx, i = 0..n-1"""
        return self.x_lo + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def n_interfaces(self) -> int:
        return interface_count(self.n_cells, self.bc)

    @property
    def interfaces(self) -> np.ndarray:
        """Координаты границ, соответствующие хранению h для данного bc"""
        if self.bc is BoundaryCondition.PERIODIC:
            return self.x_lo + (np.arange(self.n_cells) + 1.0) * self.dx
        return self.x_lo + np.arange(self.n_cells + 1) * self.dx

    @property
    def max_abs(self) -> float:
        return max(abs(self.x_lo), abs(self.x_hi))


def interface_count(n_cells: int, bc: BoundaryCondition) -> int:
    return n_cells if bc is BoundaryCondition.PERIODIC else n_cells + 1


# ============ ФИКТИВНЫЕ ЯЧЕЙКИ ============

def extend_cells(f: np.ndarray, bc: BoundaryCondition, ghosts: int = GHOST_CELLS) -> np.ndarray:
    """Дополняет значения в ячейках фиктивными ячейками вдоль оси 0"""
    pad = [(ghosts, ghosts)] + [(0, 0)] * (f.ndim - 1)
    if bc is BoundaryCondition.PERIODIC:
        return np.pad(f, pad, mode="wrap")
    return np.pad(f, pad)


def extend_interfaces(h: np.ndarray, bc: BoundaryCondition, ghosts: int = GHOST_CELLS) -> np.ndarray:
    """Возвращает he, где he[j] — левая граница расширенной ячейки j.

    Длина по оси 0 всегда n + 2·ghosts + 1.
    """
    if bc is BoundaryCondition.PERIODIC:
        n = h.shape[0]
        # левая граница ячейки i хранится как правая граница ячейки i-1
        idx = np.arange(-ghosts - 1, n + ghosts) % n
        return h[idx]
    pad = [(ghosts, ghosts)] + [(0, 0)] * (h.ndim - 1)
    return np.pad(h, pad)


def left_interfaces(h: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    """Значения h на левой границе каждой ячейки"""
    if bc is BoundaryCondition.PERIODIC:
        return np.roll(h, 1, axis=0)
    return h[:-1]


def right_interfaces(h: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    """Значения h на правой границе каждой ячейки"""
    if bc is BoundaryCondition.PERIODIC:
        return h
    return h[1:]


def implied_derivative(h: np.ndarray, dx: float, bc: BoundaryCondition) -> np.ndarray:
    """g_i = (h_{i+1/2} - h_{i-1/2}) / dx"""
    return (right_interfaces(h, bc) - left_interfaces(h, bc)) / dx


def require_finite(name: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = tuple(int(i) for i in np.argwhere(~np.isfinite(arr))[0])
        raise ValueError(f"❌ {name}: нечисловое значение в позиции {bad}")
    return arr


# ============ СОСТОЯНИЯ ============

@dataclass(frozen=True)
class Line:
    """Одна линия: точечные значения f и граничные значения скользящего среднего h"""

    f: np.ndarray
    h: np.ndarray
    grid: Grid1D

    def __post_init__(self):
        n = self.grid.n_cells
        if self.f.shape != (n,):
            raise ValueError(f"❌ f должен иметь форму ({n},), получено {self.f.shape}")
        if self.h.shape != (self.grid.n_interfaces,):
            raise ValueError(
                f"❌ h должен иметь форму ({self.grid.n_interfaces},), получено {self.h.shape}"
            )

    @property
    def bc(self) -> BoundaryCondition:
        return self.grid.bc

    @property
    def g(self) -> np.ndarray:
        return implied_derivative(self.h, self.grid.dx, self.bc)

    def with_values(self, f: np.ndarray, h: np.ndarray) -> "Line":
        return Line(f=f, h=h, grid=self.grid)


@dataclass(frozen=True)
class PhaseState:
    """Поле f(x, v) с разнесёнными массивами Φ (по x) и Ψ (по v).

    f[i, j] — значение в (x_i, v_j); phi[:, j] — h-массив x-линии j;
    psi[i, :] — h-массив v-линии i.
    """

    f: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    x_grid: Grid1D
    v_grid: Grid1D

    def __post_init__(self):
        nx, nv = self.x_grid.n_cells, self.v_grid.n_cells
        expected = {
            "f": (self.f, (nx, nv)),
            "phi": (self.phi, (self.x_grid.n_interfaces, nv)),
            "psi": (self.psi, (nx, self.v_grid.n_interfaces)),
        }
        for name, (arr, shape) in expected.items():
            if arr.shape != shape:
                raise ValueError(f"❌ {name} должен иметь форму {shape}, получено {arr.shape}")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.f.shape

    @property
    def f_x(self) -> np.ndarray:
        return implied_derivative(self.phi, self.x_grid.dx, self.x_grid.bc)

    @property
    def f_v(self) -> np.ndarray:
        return implied_derivative(self.psi.T, self.v_grid.dx, self.v_grid.bc).T

    def replace(self, f=None, phi=None, psi=None) -> "PhaseState":
        return PhaseState(
            f=self.f if f is None else f,
            phi=self.phi if phi is None else phi,
            psi=self.psi if psi is None else psi,
            x_grid=self.x_grid,
            v_grid=self.v_grid,
        )

    def first_non_finite(self) -> Optional[Tuple[str, Tuple[int, ...]]]:
        """Первая ячейка с NaN/Inf или None"""
        for name in ("f", "phi", "psi"):
            arr = getattr(self, name)
            bad = np.argwhere(~np.isfinite(arr))
            if bad.size:
                return name, tuple(int(i) for i in bad[0])
        return None


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Скалярные диагностики одного шага"""

    t: float
    mass: float
    l1: float
    l2: float
    energy: float
    entropy: float
    e_l2: float
    e_linf: float
    troubled_cells: int = 0

    FIELDS = ("t", "mass", "l1", "l2", "energy", "entropy", "e_l2", "e_linf", "troubled_cells")

    def as_row(self) -> tuple:
        return tuple(getattr(self, name) for name in self.FIELDS)


# ============ ИНИЦИАЛИЗАЦИЯ ============

def init_line_from_pointvalues(f, grid: Grid1D) -> Line:
    """Строит Line, восстанавливая h из точечных значений WENO5"""
    from limiter import weno5_reconstruct_h

    values = require_finite("f", f)
    if values.shape != (grid.n_cells,):
        raise ValueError(f"❌ Ожидалось {grid.n_cells} значений, получено {values.shape}")
    return Line(f=values.copy(), h=weno5_reconstruct_h(values, grid.bc), grid=grid)


def init_phase_state(f, x_grid: Grid1D, v_grid: Grid1D) -> PhaseState:
    """Строит PhaseState: Φ по x-линиям, Ψ по v-линиям"""
    from limiter import weno5_reconstruct_h

    values = require_finite("f", f)
    if values.shape != (x_grid.n_cells, v_grid.n_cells):
        raise ValueError(
            f"❌ Ожидалась форма {(x_grid.n_cells, v_grid.n_cells)}, получено {values.shape}"
        )
    phi = weno5_reconstruct_h(values, x_grid.bc)
    psi = weno5_reconstruct_h(values.T, v_grid.bc).T
    return PhaseState(
        f=values.copy(),
        phi=np.ascontiguousarray(phi),
        psi=np.ascontiguousarray(psi),
        x_grid=x_grid,
        v_grid=v_grid,
    )
