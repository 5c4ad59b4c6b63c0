# src/scenarios.py

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from grid_state import (
    BoundaryCondition,
    Grid1D,
    Line,
    PhaseState,
    init_line_from_pointvalues,
    init_phase_state,
)
from limiter import TvbConstants
from sl1d import Mode, Order
from vp_solver import Limiting, SchemeVariant

SQRT_2PI = math.sqrt(2.0 * math.pi)

DEFAULT_CFL = {"wo": 1.2, "wl": 2.2}


class ProblemKind(Enum):
    ADVECTION = "advect1d"
    ROTATION = "rotate"
    VLASOV = "vp"


# ============ НАЧАЛЬНЫЕ ДАННЫЕ ============

def sine_profile(x):
    return np.sin(x)


def four_profile(x):
    """Гауссиана, прямоугольник, треугольник и полуэллипс на [−1, 1]"""
    a, z, delta, alpha = 0.5, -0.7, 0.005, 10.0
    beta = math.log(2.0) / (36.0 * delta ** 2)

    def g(z0):
        return np.exp(-beta * (x - z0) ** 2)

    def f(a0):
        return np.sqrt(np.maximum(1.0 - alpha ** 2 * (x - a0) ** 2, 0.0))

    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    gauss = (-0.8 <= x) & (x <= -0.6)
    square = (-0.4 <= x) & (x <= -0.2)
    triangle = (0.0 <= x) & (x <= 0.2)
    ellipse = (0.4 <= x) & (x <= 0.6)
    out = np.where(gauss, (g(z - delta) + g(z + delta) + 4.0 * g(z)) / 6.0, out)
    out = np.where(square, 1.0, out)
    out = np.where(triangle, 1.0 - np.abs(10.0 * (x - 0.1)), out)
    out = np.where(ellipse, (f(a - delta) + f(a + delta) + 4.0 * f(a)) / 6.0, out)
    return out


def gaussian_profile(x, y):
    return np.exp(-x * x - y * y)


def leveque_profile(x, y):
    """Диск с прорезью, конус и гладкий горб"""
    r0 = 0.15

    def radius(cx, cy):
        return np.minimum(np.hypot(x - cx, y - cy), r0) / r0

    disk = (np.hypot(x, y - 0.25) <= r0) & ((np.abs(x) >= 0.025) | (y >= 0.35))
    cone = 1.0 - radius(0.0, -0.25)
    hump = 0.25 * (1.0 + np.cos(np.pi * radius(-0.25, 0.0)))
    return np.where(disk, 1.0, 0.0) + cone + hump


def landau_profile(x, v, alpha: float, k: float):
    return (1.0 + alpha * np.cos(k * x)) * np.exp(-0.5 * v * v) / SQRT_2PI


def two_stream_a_profile(x, v, alpha: float, k: float):
    perturbation = 1.0 + alpha * ((np.cos(2.0 * k * x) + np.cos(3.0 * k * x)) / 1.2 + np.cos(k * x))
    return 2.0 / (7.0 * SQRT_2PI) * (1.0 + 5.0 * v * v) * perturbation * np.exp(-0.5 * v * v)


def two_stream_b_profile(x, v, alpha: float, k: float, u: float = 0.99, v_th: float = 0.3):
    # второй пучок с (v+u)², симметрично первому
    beams = np.exp(-(v - u) ** 2 / (2.0 * v_th ** 2)) + np.exp(-(v + u) ** 2 / (2.0 * v_th ** 2))
    return beams * (1.0 + alpha * np.cos(k * x)) / (2.0 * v_th * SQRT_2PI)


# ============ КАТАЛОГ ============

@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    kind: ProblemKind
    description: str
    n_x: int
    n_v: int
    t_final: float
    x_range: Tuple[float, float] = (0.0, 1.0)
    v_range: Tuple[float, float] = (-5.0, 5.0)
    x_bc: BoundaryCondition = BoundaryCondition.PERIODIC
    v_bc: BoundaryCondition = BoundaryCondition.ZERO
    m_x: float = 1.0
    m_v: float = 1.0
    speed: float = 1.0
    omega: float = 1.0
    alpha: Optional[float] = None
    k: Optional[float] = None
    profile: Optional[Callable] = None
    snapshot_times: Tuple[float, ...] = ()


TWO_PI = 2.0 * math.pi

PRESETS: Dict[str, ScenarioPreset] = {
    p.name: p
    for p in (
        ScenarioPreset(
            name="advect1d-sine", kind=ProblemKind.ADVECTION,
            description="f_t + f_x = 0, f(x,0) = sin(x) на [0, 2π]",
            n_x=64, n_v=0, t_final=20.0, x_range=(0.0, TWO_PI), profile=sine_profile,
        ),
        ScenarioPreset(
            name="advect1d-four-profile", kind=ProblemKind.ADVECTION,
            description="f_t + f_x = 0, четыре профиля на [−1, 1]",
            n_x=200, n_v=0, t_final=8.0, x_range=(-1.0, 1.0), profile=four_profile,
        ),
        ScenarioPreset(
            name="rotation-gaussian", kind=ProblemKind.ROTATION,
            description="Вращение exp(−x²−y²) на [−2π, 2π]²",
            n_x=80, n_v=80, t_final=TWO_PI,
            x_range=(-TWO_PI, TWO_PI), v_range=(-TWO_PI, TWO_PI),
            x_bc=BoundaryCondition.ZERO, omega=1.0, profile=gaussian_profile,
        ),
        ScenarioPreset(
            name="rotation-leveque", kind=ProblemKind.ROTATION,
            description="Вращение диска, конуса и горба на [−0.5, 0.5]²",
            n_x=200, n_v=200, t_final=1.0,
            x_range=(-0.5, 0.5), v_range=(-0.5, 0.5),
            x_bc=BoundaryCondition.ZERO, omega=TWO_PI, profile=leveque_profile,
        ),
        ScenarioPreset(
            name="landau-weak", kind=ProblemKind.VLASOV,
            description="Слабое затухание Ландау, α = 0.01, k = 0.5",
            n_x=64, n_v=128, t_final=60.0, alpha=0.01, k=0.5, profile=landau_profile,
        ),
        ScenarioPreset(
            name="landau-strong", kind=ProblemKind.VLASOV,
            description="Сильное затухание Ландау, α = 0.5, k = 0.5",
            n_x=128, n_v=256, t_final=40.0, alpha=0.5, k=0.5, profile=landau_profile,
            snapshot_times=(30.0,),
        ),
        ScenarioPreset(
            name="two-stream-a", kind=ProblemKind.VLASOV,
            description="Двухпотоковая неустойчивость, α = 0.01, k = 0.5",
            n_x=64, n_v=128, t_final=53.0, alpha=0.01, k=0.5, m_x=1.0, m_v=10.0,
            profile=two_stream_a_profile, snapshot_times=(53.0,),
        ),
        ScenarioPreset(
            name="two-stream-b", kind=ProblemKind.VLASOV,
            description="Симметричные пучки, u = 0.99, v_th = 0.3, k = 2/13",
            n_x=512, n_v=512, t_final=70.0, alpha=0.05, k=2.0 / 13.0, m_x=0.1, m_v=0.1,
            profile=two_stream_b_profile, snapshot_times=(70.0,),
        ),
        ScenarioPreset(
            name="custom", kind=ProblemKind.VLASOV,
            description="Возмущённый максвеллиан (1 + α cos kx)·exp(−v²/2)/√(2π)",
            n_x=64, n_v=128, t_final=30.0, alpha=0.01, k=0.5, profile=landau_profile,
        ),
    )
}


def get_preset(name: str) -> ScenarioPreset:
    if name not in PRESETS:
        known = ", ".join(PRESETS)
        raise ValueError(f"❌ Неизвестный сценарий: {name!r}. Доступны: {known}")
    return PRESETS[name]


# Поля конфигурации, значения по умолчанию для которых задаёт пресет
PRESET_FIELDS = ("n_x", "n_v", "t_final", "m_x", "m_v", "snapshot_times", "alpha", "k")


def read_config_json(path: Union[str, Path]) -> dict:
    """Словарь полей ScenarioConfig из JSON-файла без проверки значений"""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ValueError(f"❌ Не удалось прочитать конфигурацию {path}: {e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"❌ Неверный JSON в {path}: {e}")
    if not isinstance(data, dict):
        raise ValueError(f"❌ Конфигурация {path} должна быть объектом JSON")
    return data


# ============ КОНФИГУРАЦИЯ ============

@dataclass(frozen=True)
class ScenarioConfig:
    """Параметры одного запуска; ключи JSON совпадают с именами полей"""

    scenario: str
    n_x: int
    n_v: int
    cfl: float
    t_final: float
    variant: str = "wo"
    m_x: float = 1.0
    m_v: float = 1.0
    output_dir: str = "runs"
    snapshot_times: Tuple[float, ...] = ()
    mode: str = "hweno"
    order: int = 5
    alpha: Optional[float] = None
    k: Optional[float] = None
    progress_every: int = 100

    def __post_init__(self):
        preset = get_preset(self.scenario)
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))

        if self.variant not in DEFAULT_CFL:
            raise ValueError(f"❌ Вариант должен быть wo или wl, получено {self.variant!r}")
        if self.mode not in {m.value for m in Mode}:
            raise ValueError(f"❌ Неизвестный режим реконструкции: {self.mode!r}")
        if self.order not in {o.value for o in Order}:
            raise ValueError(f"❌ Порядок должен быть 3 или 5, получено {self.order}")
        if not (math.isfinite(self.cfl) and self.cfl > 0):
            raise ValueError(f"❌ CFL должен быть > 0, получено {self.cfl}")
        if not (math.isfinite(self.t_final) and self.t_final > 0):
            raise ValueError(f"❌ t_final должен быть > 0, получено {self.t_final}")
        if any(not (math.isfinite(t) and t >= 0) for t in self.snapshot_times):
            raise ValueError(f"❌ Неверные времена снимков: {self.snapshot_times}")
        if self.m_x < 0 or self.m_v < 0:
            raise ValueError(f"❌ Константы TVB должны быть >= 0: {self.m_x}, {self.m_v}")
        if self.progress_every < 0:
            raise ValueError(f"❌ progress_every должен быть >= 0, получено {self.progress_every}")

        sizes = [("n_x", self.n_x)]
        if preset.kind is not ProblemKind.ADVECTION:
            sizes.append(("n_v", self.n_v))
        for name, value in sizes:
            if int(value) != value or value < 6:
                raise ValueError(f"❌ {name} должен быть целым >= 6, получено {value}")
        if preset.kind is ProblemKind.VLASOV:
            if self.n_x % 2:
                raise ValueError(f"❌ Для FFT n_x должен быть чётным, получено {self.n_x}")
            if self.k is None or self.k <= 0 or self.alpha is None:
                raise ValueError(f"❌ Нужны α и k > 0, получено α={self.alpha}, k={self.k}")

    # ------------ построение ------------

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "ScenarioConfig":
        preset = get_preset(name)
        overrides = {k: v for k, v in overrides.items() if v is not None}
        variant = overrides.get("variant", "wo")
        values = dict(
            scenario=name,
            n_x=preset.n_x,
            n_v=preset.n_v,
            cfl=DEFAULT_CFL.get(variant, DEFAULT_CFL["wo"]),
            t_final=preset.t_final,
            m_x=preset.m_x,
            m_v=preset.m_v,
            snapshot_times=preset.snapshot_times,
            alpha=preset.alpha,
            k=preset.k,
        )
        values.update(overrides)
        return cls(**values)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"❌ Неизвестные ключи конфигурации: {', '.join(sorted(unknown))}")
        if "scenario" not in data:
            raise ValueError("❌ В конфигурации нет ключа 'scenario'")
        rest = {k: v for k, v in data.items() if k != "scenario"}
        return cls.from_preset(data["scenario"], **rest)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "ScenarioConfig":
        return cls.from_dict(read_config_json(path))

    def to_dict(self) -> dict:
        data = asdict(self)
        data["snapshot_times"] = list(self.snapshot_times)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)

    def with_overrides(self, **overrides) -> "ScenarioConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    # ------------ производные ------------

    @property
    def preset(self) -> ScenarioPreset:
        return get_preset(self.scenario)

    @property
    def kind(self) -> ProblemKind:
        return self.preset.kind

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)

    def scheme_variant(self) -> SchemeVariant:
        return SchemeVariant(
            limiting=Limiting(self.variant),
            tvb=TvbConstants(m_x=self.m_x, m_v=self.m_v),
            cfl=self.cfl,
            mode=Mode(self.mode),
            order=Order(self.order),
        )

    def grids(self) -> Tuple[Grid1D, Optional[Grid1D]]:
        preset = self.preset
        if preset.kind is ProblemKind.VLASOV:
            x_grid = Grid1D(self.n_x, 0.0, 2.0 * math.pi / self.k, BoundaryCondition.PERIODIC)
            v_grid = Grid1D(self.n_v, preset.v_range[0], preset.v_range[1], BoundaryCondition.ZERO)
            return x_grid, v_grid
        x_grid = Grid1D(self.n_x, preset.x_range[0], preset.x_range[1], preset.x_bc)
        if preset.kind is ProblemKind.ADVECTION:
            return x_grid, None
        return x_grid, Grid1D(self.n_v, preset.v_range[0], preset.v_range[1], preset.v_bc)


# ============ НАЧАЛЬНОЕ СОСТОЯНИЕ ============

def initial_values(config: ScenarioConfig) -> np.ndarray:
    """f в узлах сетки"""
    preset = config.preset
    x_grid, v_grid = config.grids()
    if preset.kind is ProblemKind.ADVECTION:
        return preset.profile(x_grid.points)
    x, v = np.meshgrid(x_grid.points, v_grid.points, indexing="ij")
    if preset.kind is ProblemKind.ROTATION:
        return preset.profile(x, v)
    return preset.profile(x, v, alpha=config.alpha, k=config.k)


def build_initial(config: ScenarioConfig) -> Union[Line, PhaseState]:
    """Line для переноса, PhaseState для вращения и Власова–Пуассона"""
    x_grid, v_grid = config.grids()
    values = initial_values(config)
    if v_grid is None:
        return init_line_from_pointvalues(values, x_grid)
    return init_phase_state(values, x_grid, v_grid)


def linear_speeds(config: ScenarioConfig, x_grid: Grid1D, y_grid: Grid1D) -> Tuple[np.ndarray, np.ndarray]:
    """a_j = −ω·y_j для строк, b_i = ω·x_i для столбцов"""
    omega = config.preset.omega
    return -omega * y_grid.points, omega * x_grid.points


def exact_solution(config: ScenarioConfig, t: float) -> np.ndarray:
    """Точное решение линейных задач в момент t"""
    preset = config.preset
    x_grid, y_grid = config.grids()
    if preset.kind is ProblemKind.ADVECTION:
        shifted = x_grid.x_lo + np.mod(x_grid.points - preset.speed * t - x_grid.x_lo, x_grid.length)
        return preset.profile(shifted)
    if preset.kind is ProblemKind.ROTATION:
        x, y = np.meshgrid(x_grid.points, y_grid.points, indexing="ij")
        theta = preset.omega * t
        c, s = math.cos(theta), math.sin(theta)
        return preset.profile(c * x + s * y, -s * x + c * y)
    raise ValueError(f"❌ Для сценария {config.scenario} точного решения нет")


def scenario_names() -> List[str]:
    return list(PRESETS)


def scenarios_of_kind(kind: ProblemKind) -> List[str]:
    return [name for name, preset in PRESETS.items() if preset.kind is kind]
