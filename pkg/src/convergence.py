# src/convergence.py

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from artifacts import ReportRenderer
from diagnostics import fitted_order, observed_orders
from scenarios import ProblemKind, ScenarioConfig
from vp_solver import run_advection, run_rotation

# Столбцы таблиц: перенос L1, вращение L1/L2/Linf
COLUMNS = {
    ProblemKind.ADVECTION: ("L1",),
    ProblemKind.ROTATION: ("L1", "L2", "Linf"),
}

NORM_FIELDS = {"L1": "l1", "L2": "l2", "Linf": "linf"}

# Наклон считается по последним четырём сеткам
FIT_LAST = 4


@dataclass
class ConvergenceTable:
    title: str
    columns: Sequence[str]
    meshes: List[int] = field(default_factory=list)
    errors: Dict[str, List[float]] = field(default_factory=dict)

    def orders(self, column: str) -> List[Optional[float]]:
        return observed_orders(self.meshes, self.errors[column])

    def fitted(self, column: str) -> float:
        return fitted_order(self.meshes, self.errors[column], last=min(FIT_LAST, len(self.meshes)))

    def rows(self) -> List[dict]:
        orders = {col: self.orders(col) for col in self.columns}
        return [
            {
                "n": n,
                "errors": {col: self.errors[col][k] for col in self.columns},
                "orders": {col: orders[col][k] for col in self.columns},
            }
            for k, n in enumerate(self.meshes)
        ]

    def render(self) -> str:
        fitted = {col: self.fitted(col) for col in self.columns} if len(self.meshes) > 1 else {}
        return ReportRenderer().render_convergence(self.title, self.rows(), self.columns, fitted)


def run_convergence(config: ScenarioConfig, meshes: Sequence[int], verbose: bool = False) -> ConvergenceTable:
    """Прогон последовательности сеток; для вращения n_x = n_y = N"""
    kind = config.kind
    if kind not in COLUMNS:
        raise ValueError(f"❌ Сходимость считается только для переноса и вращения, не для {config.scenario}")
    if len(meshes) < 1:
        raise ValueError("❌ Список сеток пуст")

    runner = run_advection if kind is ProblemKind.ADVECTION else run_rotation
    table = ConvergenceTable(
        title=f"{config.scenario}: T = {config.t_final:g}, CFL = {config.cfl:g}, {config.scheme_variant().label}",
        columns=COLUMNS[kind],
    )
    table.errors = {col: [] for col in table.columns}

    for n in meshes:
        if verbose:
            print(f"   → N = {n}")
        result = runner(config.with_overrides(n_x=int(n), n_v=int(n)))
        table.meshes.append(int(n))
        for col in table.columns:
            table.errors[col].append(result.errors.get(NORM_FIELDS[col]))
        if verbose:
            print(f"     ✅ L1 = {result.errors.l1:.3e} за {result.steps} шагов")

    return table
