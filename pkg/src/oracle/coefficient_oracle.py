# src/oracle/coefficient_oracle.py

"""Точный вывод всех коэффициентов схемы в рациональной арифметике.

Геометрия: Δx = 1, граница x_{i−1/2} в точке y = 0. Строка "f" со смещением o
задаёт среднее H по [o, o+1], строка "h" — значение H(o).
Левый поток: F(ξ) = (1/ξ)∫₀^ξ H(−s) ds, правый: F(ξ) = (1/ξ)∫₀^ξ H(s) ds,
новое h: d(ξF)/dξ.
"""

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Sequence, Tuple

import sympy as sp

from sl1d import (
    C_EXACT,
    CANONICAL_ROWS,
    HWENO_LINEAR_WEIGHTS,
    HWENO_SUBSTENCIL_FLUXES,
    ROWS,
    SMOOTHNESS_FORMS,
    Order,
    Side,
    build_matrices,
)
from vp_solver import SOURCE_STENCIL

Y, S, XI = sp.symbols("y s xi")

# Подшаблоны HWENO в каноническом порядке строк левого случая
HWENO_SUBSTENCILS = ((0, 1, 3), (0, 1, 2), (1, 2, 4))

# Целевая ячейка индикатора гладкости: [0, 1]
SMOOTHNESS_CELL = (0, 1)


def to_fraction(value) -> Fraction:
    value = sp.Rational(value)
    return Fraction(int(value.p), int(value.q))


def _stencil_symbols(count: int) -> Tuple[sp.Symbol, ...]:
    return sp.symbols(f"u0:{count}")


def fit_polynomial(rows: Sequence[Tuple[str, int]], values: Sequence[sp.Symbol]) -> sp.Expr:
    """Многочлен H степени len(rows)−1, удовлетворяющий условиям строк"""
    coeffs = sp.symbols(f"a0:{len(rows)}")
    poly = sum(c * Y ** k for k, c in enumerate(coeffs))
    equations = []
    for (kind, offset), value in zip(rows, values):
        if kind == "f":
            equations.append(sp.integrate(poly, (Y, offset, offset + 1)) - value)
        elif kind == "h":
            equations.append(poly.subs(Y, offset) - value)
        else:
            raise ValueError(f"❌ Неизвестный вид строки: {kind!r}")
    solution = sp.solve(equations, coeffs, dict=True)
    if len(solution) != 1:
        raise ValueError(f"❌ Условия шаблона {rows} не задают многочлен однозначно")
    return sp.expand(poly.subs(solution[0]))


def flux_polynomial(poly: sp.Expr, side: Side) -> sp.Expr:
    """F(ξ) для многочлена H"""
    upwind = poly.subs(Y, -S) if side is Side.LEFT else poly.subs(Y, S)
    return sp.expand(sp.cancel(sp.integrate(upwind, (S, 0, XI)) / XI))


def _coefficient_table(expr: sp.Expr, values, order: int) -> Tuple[Tuple[Fraction, ...], ...]:
    polynomial = sp.Poly(expr, XI)
    table = []
    for value in values:
        row = []
        for k in range(order):
            coeff = sp.expand(polynomial.coeff_monomial(XI ** k))
            row.append(to_fraction(coeff.coeff(value)))
        table.append(tuple(row))
    return tuple(table)


def derive_matrices(order: Order, side: Side):
    """(C, D) в виде кортежей Fraction, строки как в ROWS[(order, side)]"""
    rows = ROWS[(order, side)]
    values = _stencil_symbols(len(rows))
    poly = fit_polynomial(rows, values)
    flux = flux_polynomial(poly, side)
    update = sp.expand(sp.diff(XI * flux, XI))
    return (
        _coefficient_table(flux, values, order.value),
        _coefficient_table(update, values, order.value),
    )


# ============ HWENO ============

def derive_substencil_fluxes() -> Tuple[Tuple[Fraction, ...], ...]:
    """Значение H(0) каждого подшаблона как вектор по пяти строкам"""
    rows = ROWS[(Order.QUINTIC5, Side.LEFT)]
    values = _stencil_symbols(len(rows))
    result = []
    for subset in HWENO_SUBSTENCILS:
        poly = fit_polynomial([rows[r] for r in subset], [values[r] for r in subset])
        at_interface = sp.expand(poly.subs(Y, 0))
        result.append(tuple(to_fraction(at_interface.coeff(v)) for v in values))
    return tuple(result)


def derive_linear_weights() -> Tuple[Fraction, ...]:
    """γ: Σ γ_k·(поток подшаблона k) = столбец констант C₅ᴸ"""
    fluxes = derive_substencil_fluxes()
    target = [row[0] for row in C_EXACT[(Order.QUINTIC5, Side.LEFT)]]
    gammas = sp.symbols("g0:3")
    equations = [
        sum(g * sp.Rational(f[r].numerator, f[r].denominator) for g, f in zip(gammas, fluxes))
        - sp.Rational(target[r].numerator, target[r].denominator)
        for r in range(len(target))
    ]
    solution = sp.solve(equations, gammas, dict=True)
    if len(solution) != 1:
        raise ValueError("❌ Линейные веса не определяются однозначно")
    return tuple(to_fraction(solution[0][g]) for g in gammas)


def derive_smoothness() -> List[sp.Expr]:
    """β_k = Σ_{l=1,2} ∫ (H^{(l)})² по целевой ячейке"""
    rows = ROWS[(Order.QUINTIC5, Side.LEFT)]
    values = _stencil_symbols(len(rows))
    lo, hi = SMOOTHNESS_CELL
    betas = []
    for subset in HWENO_SUBSTENCILS:
        poly = fit_polynomial([rows[r] for r in subset], [values[r] for r in subset])
        beta = sum(sp.integrate(sp.diff(poly, Y, l) ** 2, (Y, lo, hi)) for l in (1, 2))
        betas.append(sp.expand(beta))
    return betas


def shipped_smoothness() -> List[sp.Expr]:
    values = _stencil_symbols(5)
    betas = []
    for forms in SMOOTHNESS_FORMS:
        total = 0
        for weight, coeffs in forms:
            linear = sum(sp.Rational(c.numerator, c.denominator) * v for c, v in zip(coeffs, values))
            total += sp.Rational(weight.numerator, weight.denominator) * linear ** 2
        betas.append(sp.expand(total))
    return betas


# ============ ИСТОЧНИК ============

def derive_source_stencil() -> Tuple[Fraction, ...]:
    """Значение на границе по средним четырёх ячеек k−2..k+1"""
    rows = (("f", -2), ("f", -1), ("f", 0), ("f", 1))
    values = _stencil_symbols(4)
    poly = fit_polynomial(rows, values)
    at_interface = sp.expand(poly.subs(Y, 0))
    return tuple(to_fraction(at_interface.coeff(v)) for v in values)


def source_difference_matches(stencil: Sequence[Fraction]) -> bool:
    """S_{k+1/2} − S_{k−1/2} = (s_{k−2} − 8s_{k−1} + 8s_{k+1} − s_{k+2})/12"""
    s = sp.symbols("s0:5")  # s_{k−2}..s_{k+2}
    w = [sp.Rational(c.numerator, c.denominator) for c in stencil]
    upper = w[0] * s[1] + w[1] * s[2] + w[2] * s[3] + w[3] * s[4]
    lower = w[0] * s[0] + w[1] * s[1] + w[2] * s[2] + w[3] * s[3]
    central = (s[0] - 8 * s[1] + 8 * s[3] - s[4]) / 12
    return sp.expand(upper - lower - central) == 0


# ============ СВЕРКА ============

@dataclass
class OracleReport:
    checked: List[str] = field(default_factory=list)
    mismatches: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def check(self, name: str, derived, shipped) -> None:
        self.checked.append(name)
        if derived != shipped:
            self.mismatches.append(f"{name}: выведено {derived}, в коде {shipped}")


def verify_all() -> OracleReport:
    report = OracleReport()

    for order in Order:
        for side in Side:
            c_derived, d_derived = derive_matrices(order, side)
            mats = build_matrices(order, side)
            report.check(f"C[{order.name}, {side.name}]", c_derived, mats.c_exact)
            report.check(f"D[{order.name}, {side.name}]", d_derived, mats.d_exact)

    left = C_EXACT[(Order.QUINTIC5, Side.LEFT)]
    right = C_EXACT[(Order.QUINTIC5, Side.RIGHT)]
    mirrored = tuple(right[r] for r in CANONICAL_ROWS[(Order.QUINTIC5, Side.RIGHT)])
    report.check("C5 right = перестановка C5 left", mirrored, left)

    report.check("потоки подшаблонов HWENO", derive_substencil_fluxes(), HWENO_SUBSTENCIL_FLUXES)
    report.check("линейные веса HWENO", derive_linear_weights(), HWENO_LINEAR_WEIGHTS)
    for k, (derived, shipped) in enumerate(zip(derive_smoothness(), shipped_smoothness()), start=1):
        report.check(f"β{k}", sp.expand(derived - shipped) == 0, True)

    report.check("шаблон источника", derive_source_stencil(), SOURCE_STENCIL)
    report.check("разность шаблона источника", source_difference_matches(SOURCE_STENCIL), True)
    return report


def main() -> int:
    print("=" * 70)
    print("🔍 СВЕРКА КОЭФФИЦИЕНТОВ С ТОЧНЫМ ВЫВОДОМ")
    print("=" * 70)
    report = verify_all()
    for name in report.checked:
        failed = any(m.startswith(name + ":") for m in report.mismatches)
        print(f"{'❌' if failed else '✅'} {name}")
    print("-" * 70)
    if report.ok:
        print(f"✅ Совпало: {len(report.checked)} проверок")
        return 0
    for line in report.mismatches:
        print(f"❌ {line}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
