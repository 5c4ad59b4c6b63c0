# src/poisson.py

from dataclasses import dataclass

import numpy as np
from scipy import fft

from grid_state import PhaseState, require_finite


@dataclass(frozen=True)
class FieldE:
    """Электрическое поле в узлах x_i"""

    e: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.e))) if self.e.size else 0.0

    @classmethod
    def zeros(cls, n: int) -> "FieldE":
        return cls(np.zeros(n))


def compute_rho(state: PhaseState) -> np.ndarray:
    """ρ_i = Σ_j f_ij·dv − 1 (прямоугольники)"""
    return np.sum(state.f, axis=1) * state.v_grid.dx - 1.0


def solve_field(rho: np.ndarray, length: float) -> FieldE:
    """Решает dE/dx = ρ на периодической области спектрально.

    Нулевая мода ρ отбрасывается, среднее E равно нулю.
    """
    rho = require_finite("rho", rho)
    n = rho.shape[0]
    if n < 2 or n % 2:
        raise ValueError(f"❌ Для FFT нужно чётное число узлов по x, получено {n}")
    if not length > 0:
        raise ValueError(f"❌ Длина области должна быть > 0, получено {length}")

    rho_hat = fft.rfft(rho)
    kappa = 2.0 * np.pi * np.arange(rho_hat.shape[0]) / length

    e_hat = np.zeros_like(rho_hat)
    e_hat[1:] = -1j * rho_hat[1:] / kappa[1:]
    # мода Найквиста не имеет вещественной производной
    e_hat[-1] = 0.0

    return FieldE(fft.irfft(e_hat, n=n))


def field_from_state(state: PhaseState) -> FieldE:
    return solve_field(compute_rho(state), state.x_grid.length)
