# src/sl1d.py

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np

from grid_state import (
    GHOST_CELLS,
    BoundaryCondition,
    Line,
    extend_cells,
    extend_interfaces,
    require_finite,
)

F = Fraction


class Order(Enum):
    CUBIC3 = 3
    QUINTIC5 = 5


class Side(Enum):
    # LEFT: дробный сдвиг в [0, 1/2], RIGHT: в [-1/2, 0)
    LEFT = "left"
    RIGHT = "right"


class Mode(Enum):
    LINEAR = "linear"
    HWENO = "hweno"


# ============ КОЭФФИЦИЕНТЫ ============

# Строки шаблона: (вид, смещение) относительно левой границы ячейки i.
# "f" со смещением o: ячейка i+o; "h" со смещением o: граница x_{i-1/2} + o·dx.
ROWS = {
    (Order.CUBIC3, Side.LEFT): (("f", -1), ("h", 0), ("h", -1)),
    (Order.CUBIC3, Side.RIGHT): (("f", 0), ("h", 0), ("h", 1)),
    (Order.QUINTIC5, Side.LEFT): (("f", -2), ("f", -1), ("f", 0), ("h", -2), ("h", 1)),
    (Order.QUINTIC5, Side.RIGHT): (("f", -1), ("f", 0), ("f", 1), ("h", -1), ("h", 2)),
}

# (f_{i-1}, h_{i-1/2}, h_{i-3/2}), правый случай зеркален с той же матрицей
C3_LEFT = (
    (F(0), F(3), F(-2)),
    (F(1), F(-2), F(1)),
    (F(0), F(-1), F(1)),
)

# (f_{i-2}, f_{i-1}, f_i, h_{i-5/2}, h_{i+1/2})
C5_LEFT = (
    (F(-8, 27), F(-19, 108), F(5, 12), F(19, 108), F(-13, 108)),
    (F(19, 27), F(89, 108), F(-1, 3), F(-35, 108), F(7, 54)),
    (F(19, 27), F(-25, 27), F(-1, 12), F(23, 54), F(-13, 108)),
    (F(1, 9), F(1, 18), F(-1, 6), F(-1, 18), F(1, 18)),
    (F(-2, 9), F(2, 9), F(1, 6), F(-2, 9), F(1, 18)),
)

# (f_{i-1}, f_i, f_{i+1}, h_{i-3/2}, h_{i+3/2})
C5_RIGHT = (
    (F(19, 27), F(-25, 27), F(-1, 12), F(23, 54), F(-13, 108)),
    (F(19, 27), F(89, 108), F(-1, 3), F(-35, 108), F(7, 54)),
    (F(-8, 27), F(-19, 108), F(5, 12), F(19, 108), F(-13, 108)),
    (F(-2, 9), F(2, 9), F(1, 6), F(-2, 9), F(1, 18)),
    (F(1, 9), F(1, 18), F(-1, 6), F(-1, 18), F(1, 18)),
)

C_EXACT = {
    (Order.CUBIC3, Side.LEFT): C3_LEFT,
    (Order.CUBIC3, Side.RIGHT): C3_LEFT,
    (Order.QUINTIC5, Side.LEFT): C5_LEFT,
    (Order.QUINTIC5, Side.RIGHT): C5_RIGHT,
}

# Перестановка строк в канонический порядок левого случая
# (дальняя f, ближняя f, f за границей, дальняя h, h за границей)
CANONICAL_ROWS = {
    (Order.CUBIC3, Side.LEFT): (0, 1, 2),
    (Order.CUBIC3, Side.RIGHT): (0, 1, 2),
    (Order.QUINTIC5, Side.LEFT): (0, 1, 2, 3, 4),
    (Order.QUINTIC5, Side.RIGHT): (2, 1, 0, 4, 3),
}

# Потоки третьего порядка на подшаблонах S1..S3 в каноническом порядке строк
HWENO_SUBSTENCIL_FLUXES = (
    (F(-2), F(2), F(0), F(1), F(0)),
    (F(-1, 6), F(5, 6), F(1, 3), F(0), F(0)),
    (F(0), F(1, 4), F(5, 4), F(0), F(-1, 2)),
)

HWENO_LINEAR_WEIGHTS = (F(1, 9), F(4, 9), F(4, 9))

# beta_k = sum(w * (c · stencil)^2)
SMOOTHNESS_FORMS = (
    (
        (F(13, 3), (F(-9, 4), F(3, 4), F(0), F(3, 2), F(0))),
        (F(1), (F(31, 4), F(-13, 4), F(0), F(-9, 2), F(0))),
    ),
    (
        (F(13, 12), (F(-1), F(2), F(-1), F(0), F(0))),
        (F(1), (F(-1, 2), F(2), F(-3, 2), F(0), F(0))),
    ),
    (
        (F(13, 3), (F(0), F(3, 4), F(-9, 4), F(0), F(3, 2))),
        (F(1), (F(0), F(1, 4), F(5, 4), F(0), F(-3, 2))),
    ),
)


def _as_float(table) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in table], dtype=float)


_SUBSTENCIL_FLUXES = _as_float(HWENO_SUBSTENCIL_FLUXES)
_SMOOTHNESS = [
    [(float(w), np.array([float(c) for c in coeffs])) for w, coeffs in forms]
    for forms in SMOOTHNESS_FORMS
]


# ============ ТИПЫ ============

@dataclass(frozen=True)
class ReconMatrices:
    """Матрицы C и D одного порядка и направления сдвига"""

    order: Order
    side: Side
    rows: Tuple[Tuple[str, int], ...]
    c_exact: Tuple[Tuple[Fraction, ...], ...]
    canonical_rows: Tuple[int, ...]
    C: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)

    @property
    def d_exact(self) -> Tuple[Tuple[Fraction, ...], ...]:
        return tuple(tuple((k + 1) * c for k, c in enumerate(row)) for row in self.c_exact)


@dataclass(frozen=True)
class ShiftDecomposition:
    whole: int
    xi0: float
    side: Side

    @property
    def signed_fraction(self) -> float:
        return self.xi0 if self.side is Side.LEFT else -self.xi0


@dataclass(frozen=True)
class HwenoParams:
    epsilon: float = 1e-6
    linear_weights: Tuple[float, float, float] = tuple(float(g) for g in HWENO_LINEAR_WEIGHTS)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"❌ epsilon должен быть > 0, получено {self.epsilon}")
        if len(self.linear_weights) != 3 or abs(sum(self.linear_weights) - 1.0) > 1e-12:
            raise ValueError(f"❌ Линейные веса должны давать в сумме 1: {self.linear_weights}")


# ============ СДВИГ ============

def decompose_shift(v: float, dt: float, dx: float) -> ShiftDecomposition:
    """Делит сдвиг v·dt/dx на целую часть и дробный параметр xi0 ∈ [0, 1/2]"""
    whole, xi0, left = decompose_shifts(np.array([v * dt / dx]))
    return ShiftDecomposition(
        whole=int(whole[0]),
        xi0=float(xi0[0]),
        side=Side.LEFT if left[0] else Side.RIGHT,
    )


def decompose_shifts(shifts: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Векторный вариант: (whole, xi0, is_left) для каждого сдвига"""
    shifts = np.asarray(shifts, dtype=float)
    whole = np.ceil(shifts - 0.5)
    frac = shifts - whole
    # доводка округления, чтобы дробь оставалась в (-1/2, 1/2]
    over = frac > 0.5
    whole[over] += 1.0
    frac[over] -= 1.0
    under = frac <= -0.5
    whole[under] -= 1.0
    frac[under] += 1.0
    return whole.astype(np.int64), np.abs(frac), frac >= 0.0


# ============ МАТРИЦЫ ============

@lru_cache(maxsize=None)
def build_matrices(order: Order, side: Side) -> ReconMatrices:
    """Матрицы потока C и обновления границы D, D(:,k) = k·C(:,k)"""
    key = (order, side)
    c_exact = C_EXACT[key]
    C = _as_float(c_exact)
    D = C * np.arange(1, order.value + 1)[None, :]
    C.setflags(write=False)
    D.setflags(write=False)
    return ReconMatrices(
        order=order,
        side=side,
        rows=ROWS[key],
        c_exact=c_exact,
        canonical_rows=CANONICAL_ROWS[key],
        C=C,
        D=D,
    )


def _stencil_values(fe: np.ndarray, he: np.ndarray, rows, count: int) -> list:
    """Значения строк шаблона для границ 0..count-1 (левые границы ячеек)"""
    values = []
    for kind, offset in rows:
        source = fe if kind == "f" else he
        start = GHOST_CELLS + offset
        values.append(source[start:start + count])
    return values


def flux_hat_linear(line: Line, i: int, xi0: float, side: Side, order: Order) -> Tuple[float, float]:
    """Линейный поток f̂ и новое h на левой границе ячейки i (i = 0..n)"""
    n = line.grid.n_cells
    if not 0 <= i <= n:
        raise ValueError(f"❌ Индекс границы вне [0, {n}]: {i}")
    mats = build_matrices(order, side)
    fe = extend_cells(line.f, line.bc)
    he = extend_interfaces(line.h, line.bc)
    stencil = np.array([v[i] for v in _stencil_values(fe, he, mats.rows, n + 1)])
    powers = xi0 ** np.arange(order.value)
    return float(stencil @ mats.C @ powers), float(stencil @ mats.D @ powers)


# ============ HWENO ============

def hweno_first_column(f_far, f_near, f_across, h_far, h_across,
                       params: Optional[HwenoParams] = None):
    """Нелинейно взвешенный коэффициент при константе.

    Аргументы идут в порядке левого случая: f_{i-2}, f_{i-1}, f_i, h_{i-5/2}, h_{i+1/2}.
    Возвращает (константа, (β1, β2, β3), (ω1, ω2, ω3)).
    """
    params = params or HwenoParams()
    stencil = np.stack(np.broadcast_arrays(
        np.asarray(f_far, dtype=float), np.asarray(f_near, dtype=float),
        np.asarray(f_across, dtype=float), np.asarray(h_far, dtype=float),
        np.asarray(h_across, dtype=float),
    ))
    flat = stencil.reshape(5, -1)

    beta = np.empty((3, flat.shape[1]))
    for k, forms in enumerate(_SMOOTHNESS):
        beta[k] = sum(w * (coeffs @ flat) ** 2 for w, coeffs in forms)

    gammas = np.asarray(params.linear_weights, dtype=float)[:, None]
    omega_bar = gammas / (params.epsilon + beta)
    omega = omega_bar / omega_bar.sum(axis=0)

    sub_fluxes = _SUBSTENCIL_FLUXES @ flat
    const = (omega * sub_fluxes).sum(axis=0)

    shape = stencil.shape[1:]
    return (
        const.reshape(shape),
        beta.reshape((3,) + shape),
        omega.reshape((3,) + shape),
    )


# ============ АДВЕКЦИЯ ============

def _whole_shift(values: np.ndarray, whole: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    """Сдвиг на целое число ячеек вдоль оси 0, свой для каждого столбца"""
    if not whole.any():
        return values.copy()
    n = values.shape[0]
    src = np.arange(n)[:, None] - whole[None, :]
    cols = np.arange(values.shape[1])[None, :]
    if bc is BoundaryCondition.PERIODIC:
        return values[src % n, cols]
    inside = (src >= 0) & (src < n)
    return np.where(inside, values[np.clip(src, 0, n - 1), cols], 0.0)


def _interface_updates(fe, he, xi0, count, mats: ReconMatrices, mode: Mode, params: HwenoParams):
    values = _stencil_values(fe, he, mats.rows, count)
    powers = xi0[None, :] ** np.arange(mats.order.value)[:, None]

    if mode is Mode.LINEAR:
        c_weights = mats.C @ powers
        d_weights = mats.D @ powers
        fhat = sum(v * c_weights[r] for r, v in enumerate(values))
        hnew = sum(v * d_weights[r] for r, v in enumerate(values))
        return fhat, hnew

    # HWENO: меняется только столбец при константе, общий для C и D
    const, _, _ = hweno_first_column(*(values[r] for r in mats.canonical_rows), params=params)
    c_weights = mats.C[:, 1:] @ powers[1:]
    d_weights = mats.D[:, 1:] @ powers[1:]
    fhat = const + sum(v * c_weights[r] for r, v in enumerate(values))
    hnew = const + sum(v * d_weights[r] for r, v in enumerate(values))
    return fhat, hnew


def advect_block(f: np.ndarray, h: np.ndarray, shifts: Sequence[float], bc: BoundaryCondition,
                 mode: Mode = Mode.HWENO, order: Order = Order.QUINTIC5,
                 params: Optional[HwenoParams] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Полулагранжев шаг для набора линий.

    f: (n, L), h: (n или n+1, L) вдоль оси 0; shifts: (L,) — v·dt/dx для каждой линии.
    """
    if mode is Mode.HWENO and order is not Order.QUINTIC5:
        raise ValueError("❌ HWENO определён только для пятого порядка")
    params = params or HwenoParams()

    shifts = np.asarray(shifts, dtype=float).reshape(-1)
    whole, xi0, is_left = decompose_shifts(shifts)
    f_new = _whole_shift(np.asarray(f, dtype=float), whole, bc)
    h_new = _whole_shift(np.asarray(h, dtype=float), whole, bc)

    fractional = xi0 > 0.0
    if not fractional.any():
        return f_new, h_new

    n = f_new.shape[0]
    fe = extend_cells(f_new, bc)
    he = extend_interfaces(h_new, bc)

    for side, sign, cols in (
        (Side.LEFT, 1.0, np.flatnonzero(fractional & is_left)),
        (Side.RIGHT, -1.0, np.flatnonzero(fractional & ~is_left)),
    ):
        if cols.size == 0:
            continue
        mats = build_matrices(order, side)
        fhat, hnew = _interface_updates(fe[:, cols], he[:, cols], xi0[cols], n + 1, mats, mode, params)
        f_new[:, cols] -= sign * xi0[cols] * np.diff(fhat, axis=0)
        h_new[:, cols] = hnew[1:] if bc is BoundaryCondition.PERIODIC else hnew

    return f_new, h_new


def advect_line(line: Line, v: float, dt: float, mode: Mode = Mode.HWENO,
                order: Order = Order.QUINTIC5, params: Optional[HwenoParams] = None) -> Line:
    """Один шаг переноса f_t + v f_x = 0 для линии с постоянной скоростью"""
    if not np.isfinite(v):
        raise ValueError(f"❌ Скорость должна быть конечной, получено {v}")
    if not (np.isfinite(dt) and dt >= 0):
        raise ValueError(f"❌ dt должен быть >= 0, получено {dt}")
    require_finite("f", line.f)
    require_finite("h", line.h)

    shift = v * dt / line.grid.dx
    f_new, h_new = advect_block(
        line.f[:, None], line.h[:, None], [shift], line.bc, mode=mode, order=order, params=params
    )
    return line.with_values(f_new[:, 0], h_new[:, 0])
