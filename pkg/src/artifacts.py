# src/artifacts.py

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from jinja2 import Template

from grid_state import DiagnosticsRecord, PhaseState

PathLike = Union[str, Path]

DIAGNOSTICS_HEADER = ",".join(DiagnosticsRecord.FIELDS)
SNAPSHOT_HEADER = "x,v,f"


class ArtifactWriteError(OSError):
    """Ошибка записи артефакта с путём"""

    def __init__(self, path: PathLike, cause: Exception):
        self.path = Path(path)
        self.cause = cause
        super().__init__(f"❌ Не удалось записать {self.path}: {cause}")


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return "%.17g" % float(value)


def _write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise ArtifactWriteError(path, e)
    return path


# ============ CSV ============

def diagnostics_csv_text(records: Iterable[DiagnosticsRecord]) -> str:
    lines = [DIAGNOSTICS_HEADER]
    lines.extend(",".join(_fmt(v) for v in record.as_row()) for record in records)
    return "\n".join(lines) + "\n"


def emit_diagnostics_csv(records: Iterable[DiagnosticsRecord], path: PathLike) -> Path:
    """Одна строка на шаг, 17 значащих цифр, перевод строки \\n"""
    return _write_text(path, diagnostics_csv_text(records))


def load_diagnostics_csv(path: PathLike) -> Dict[str, np.ndarray]:
    """Читает CSV диагностик в словарь столбцов"""
    text = Path(path).read_text(encoding="utf-8")
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError(f"❌ Пустой файл диагностик: {path}")
    header = rows[0].split(",")
    data = np.array([[float(x) for x in row.split(",")] for row in rows[1:]], dtype=float)
    data = data.reshape(len(rows) - 1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def emit_profile_csv(x: np.ndarray, f: np.ndarray, exact: Optional[np.ndarray], path: PathLike) -> Path:
    """Профиль одномерного переноса: x,f[,exact]"""
    header = "x,f" if exact is None else "x,f,exact"
    columns = [x, f] if exact is None else [x, f, exact]
    lines = [header]
    lines.extend(",".join(_fmt(c[i]) for c in columns) for i in range(len(x)))
    return _write_text(path, "\n".join(lines) + "\n")


# ============ СНИМКИ ============

@dataclass(frozen=True)
class Snapshot:
    x: np.ndarray
    v: np.ndarray
    f: np.ndarray
    metadata: dict


def snapshot_paths(path: PathLike):
    path = Path(path)
    return path, path.with_suffix(".json")


def emit_snapshot(state: PhaseState, t: float, path: PathLike, metadata: Optional[dict] = None) -> Path:
    """CSV x,v,f (x внешний, v внутренний) и JSON с метаданными рядом"""
    csv_path, meta_path = snapshot_paths(path)
    x = state.x_grid.points
    v = state.v_grid.points

    lines = [SNAPSHOT_HEADER]
    for i in range(x.shape[0]):
        xs = _fmt(x[i])
        lines.extend(f"{xs},{_fmt(v[j])},{_fmt(state.f[i, j])}" for j in range(v.shape[0]))
    _write_text(csv_path, "\n".join(lines) + "\n")

    meta = {
        "t": float(t),
        "n_x": state.x_grid.n_cells,
        "n_v": state.v_grid.n_cells,
        "x_range": [state.x_grid.x_lo, state.x_grid.x_hi],
        "v_range": [state.v_grid.x_lo, state.v_grid.x_hi],
        "x_bc": state.x_grid.bc.value,
        "v_bc": state.v_grid.bc.value,
    }
    meta.update(metadata or {})
    _write_text(meta_path, json.dumps(meta, indent=2, ensure_ascii=False) + "\n")
    return csv_path


def load_snapshot(path: PathLike) -> Snapshot:
    csv_path, meta_path = snapshot_paths(path)
    rows = csv_path.read_text(encoding="utf-8").splitlines()
    metadata = json.loads(meta_path.read_text(encoding="utf-8"))
    if not rows or rows[0] != SNAPSHOT_HEADER:
        raise ValueError(f"❌ Неверный заголовок снимка в {csv_path}")

    n_x, n_v = int(metadata["n_x"]), int(metadata["n_v"])
    table = np.array([[float(c) for c in row.split(",")] for row in rows[1:] if row], dtype=float)
    if table.shape != (n_x * n_v, 3):
        raise ValueError(f"❌ Ожидалось {n_x * n_v} строк в {csv_path}, получено {table.shape[0]}")
    return Snapshot(
        x=table[::n_v, 0].copy(),
        v=table[:n_v, 1].copy(),
        f=table[:, 2].reshape(n_x, n_v),
        metadata=metadata,
    )


# ============ ОТЧЁТЫ ============

class ReportRenderer:
    """Текстовые таблицы и сводки на шаблонах Jinja2"""

    CONVERGENCE_TEMPLATE = """{{ title }}
{{ "=" * 70 }}
{{ "%-8s" | format("N") }}{% for col in columns %}{{ "%-14s" | format(col ~ " error") }}{{ "%-8s" | format("Order") }}{% endfor %}
{{ "-" * 70 }}
{% for row in rows -%}
{{ "%-8d" | format(row.n) }}{% for col in columns %}{{ "%-14s" | format("%.2E" | format(row.errors[col])) }}{{ "%-8s" | format("-" if row.orders[col] is none else "%.2f" | format(row.orders[col])) }}{% endfor %}
{% endfor -%}
{{ "-" * 70 }}
{% for col in columns if col in fitted -%}
Наклон {{ col }} по последним сеткам: {{ "%.2f" | format(fitted[col]) }}
{% endfor -%}
"""

    RATE_TEMPLATE = """Скорости по локальным максимумам {{ column }}
{{ "=" * 70 }}
{% for fit in fits -%}
t ∈ [{{ "%g" | format(fit.t_lo) }}, {{ "%g" | format(fit.t_hi) }}]: γ = {{ "%.4f" | format(fit.rate) }} ({{ fit.n_peaks }} максимумов)
{% endfor -%}
"""

    SUMMARY_TEMPLATE = """Сценарий: {{ scenario }}
Схема: {{ scheme }}, CFL = {{ cfl }}
Сетка: {{ grid }}
Шагов: {{ steps }}, t = {{ "%.6g" | format(t) }}
{{ "-" * 70 }}
{% for name, value in finals -%}
{{ "%-16s" | format(name) }}{{ "%.10e" | format(value) }}{% if name in deviations %}   отклонение {{ "%.3e" | format(deviations[name]) }}{% endif %}
{% endfor -%}
{% if errors -%}
{{ "-" * 70 }}
{% for name, value in errors -%}
{{ "%-16s" | format(name) }}{{ "%.6e" | format(value) }}
{% endfor -%}
{% endif -%}
"""

    def render_convergence(self, title: str, rows: Sequence[dict], columns: Sequence[str],
                           fitted: Dict[str, float]) -> str:
        return Template(self.CONVERGENCE_TEMPLATE).render(
            title=title, rows=rows, columns=columns, fitted=fitted
        )

    def render_rates(self, column: str, fits: Sequence[dict]) -> str:
        return Template(self.RATE_TEMPLATE).render(column=column, fits=fits)

    def render_summary(self, scenario: str, scheme: str, cfl: float, grid: str, steps: int, t: float,
                       finals: List[tuple], deviations: Dict[str, float],
                       errors: Optional[List[tuple]] = None) -> str:
        return Template(self.SUMMARY_TEMPLATE).render(
            scenario=scenario, scheme=scheme, cfl=cfl, grid=grid, steps=steps, t=t,
            finals=finals, deviations=deviations, errors=errors or [],
        )


def write_report(text: str, path: PathLike) -> Path:
    return _write_text(path, text)
