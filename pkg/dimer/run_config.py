#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
运行配置模块
解析扁平的 key = value 配置文本（# 注释，UTF-8），校验并生成 RunConfig

优先级：预设 < --config 文件 < 命令行 --key value
"""

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Union

from .core_model import SystemParams, d_over_l_from_length, params_at_spacing
from .errors import ConfigError, DimerError
from .imperfections import MAX_ETA, AsymmetryParams, DeviationParams
from .logger_setup import get_logger


logger = get_logger(__name__)

PRESET_DIR = Path(__file__).resolve().parents[1] / "config" / "presets"

TASKS = ("spectrum", "sweep2d", "dynamics", "g2", "fano", "asym", "levels")
INITIAL_STATES = ("left", "right", "a", "b")
G2_METHODS = ("hierarchy", "master_equation")


@dataclass(frozen=True)
class ConfigEntry:
    """配置文本中的一项，保留来源位置用于报错"""
    value: str
    line: Optional[int] = None
    source: str = "<config>"


@dataclass(frozen=True)
class RunConfig:
    """
    一次运行的完整配置，默认值为 Bragg、J = Γ1D、d/L = 0.1、Γ' = 0

    ka_l 给定时 d_over_l 由 kad / ka_l 决定，扫描 k_a d 时局域长度保持不变
    """
    task: str = "spectrum"
    gamma_1d_1: float = 1.0
    gamma_1d_2: float = 1.0
    xi: Optional[float] = None
    gamma_prime: float = 0.0
    j: float = 1.0
    kad: float = math.pi
    d_over_l: float = 0.1
    ka_l: Optional[float] = None
    omega_p: float = 1e-4
    delta: float = 0.0
    delta_min: float = -6.0
    delta_max: float = 6.0
    delta_points: int = 1201
    kad_min: float = 0.0
    kad_max: float = 2.0 * math.pi
    kad_points: int = 201
    t_max: float = 10.0
    t_points: int = 2001
    tau_max: float = 10.0
    tau_points: int = 2001
    eta: Optional[float] = None
    initial: str = "left"
    g2_method: str = "hierarchy"
    out: Optional[str] = None
    svg: Optional[str] = None
    plot_column: Optional[str] = None

    def to_system_params(self) -> SystemParams:
        """物理参数；xi 给定时波导衰减率取 (1 ± ξ)"""
        gamma_1, gamma_2 = self.gamma_1d_1, self.gamma_1d_2
        if self.xi is not None:
            asymmetry = AsymmetryParams.from_xi(self.xi)
            gamma_1, gamma_2 = asymmetry.gamma_1d_1, asymmetry.gamma_1d_2
        d_over_l = self.d_over_l if self.ka_l is None else d_over_l_from_length(self.kad, self.ka_l)
        return SystemParams(
            gamma_1d_1=gamma_1,
            gamma_1d_2=gamma_2,
            gamma_prime=self.gamma_prime,
            j_strength=self.j,
            kad=self.kad,
            d_over_l=d_over_l,
            omega_p_amp=self.omega_p,
            delta=self.delta,
        )

    def params_at(self, kad: float) -> SystemParams:
        """扫描中某个 k_a d 处的物理参数"""
        return params_at_spacing(self.to_system_params(), kad, self.ka_l)

    def asymmetry(self) -> AsymmetryParams:
        if self.xi is not None:
            return AsymmetryParams.from_xi(self.xi)
        return AsymmetryParams(self.gamma_1d_1, self.gamma_1d_2)

    def deviation(self) -> Optional[DeviationParams]:
        return None if self.eta is None else DeviationParams(self.eta)

    def to_text(self) -> str:
        """回显为可再次解析的配置文本（浮点数用 repr 保证往返精确）"""
        lines = []
        for item in fields(self):
            lines.append(f"{item.name} = {_format_value(getattr(self, item.name))}")
        return "\n".join(lines) + "\n"


def _format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# 值转换与逐键校验
# ---------------------------------------------------------------------------

def _to_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("必须为有限值")
    return value


def _to_optional_float(text: str) -> Optional[float]:
    return None if text.lower() == "none" else _to_float(text)


def _to_points(text: str) -> int:
    value = int(text)
    if value < 2:
        raise ValueError("采样点数不能小于 2")
    return value


def _to_optional_str(text: str) -> Optional[str]:
    return None if text.lower() == "none" else text


def _non_negative(converter: Callable[[str], float]) -> Callable[[str], float]:
    def convert(text: str) -> float:
        value = converter(text)
        if value < 0:
            raise ValueError("不能为负")
        return value
    return convert


def _choice(options) -> Callable[[str], str]:
    def convert(text: str) -> str:
        value = text.lower()
        if value not in options:
            raise ValueError(f"可选值为 {', '.join(options)}")
        return value
    return convert


def _asymmetry_factor(text: str) -> Optional[float]:
    value = _to_optional_float(text)
    if value is not None and not 0.0 <= value < 1.0:
        raise ValueError("需要 0 <= xi < 1")
    return value


def _length(text: str) -> Optional[float]:
    value = _to_optional_float(text)
    if value is not None and value <= 0:
        raise ValueError("k_a L 必须为正")
    return value


def _deviation(text: str) -> Optional[float]:
    value = _to_optional_float(text)
    if value is not None and abs(value) > MAX_ETA:
        raise ValueError(f"需要 |eta| <= {MAX_ETA}")
    return value


CONVERTERS: Dict[str, Callable[[str], Any]] = {
    "task": _choice(TASKS),
    "gamma_1d_1": _non_negative(_to_float),
    "gamma_1d_2": _non_negative(_to_float),
    "xi": _asymmetry_factor,
    "gamma_prime": _non_negative(_to_float),
    "j": _non_negative(_to_float),
    "kad": _non_negative(_to_float),
    "d_over_l": _non_negative(_to_float),
    "ka_l": _length,
    "omega_p": _non_negative(_to_float),
    "delta": _to_float,
    "delta_min": _to_float,
    "delta_max": _to_float,
    "delta_points": _to_points,
    "kad_min": _non_negative(_to_float),
    "kad_max": _non_negative(_to_float),
    "kad_points": _to_points,
    "t_max": _non_negative(_to_float),
    "t_points": _to_points,
    "tau_max": _non_negative(_to_float),
    "tau_points": _to_points,
    "eta": _deviation,
    "initial": _choice(INITIAL_STATES),
    "g2_method": _choice(G2_METHODS),
    "out": _to_optional_str,
    "svg": _to_optional_str,
    "plot_column": _to_optional_str,
}


# ---------------------------------------------------------------------------
# 解析
# ---------------------------------------------------------------------------

def parse_entries(text: str, source: str = "<config>") -> Dict[str, ConfigEntry]:
    """把配置文本拆成 key -> ConfigEntry，只做语法检查"""
    entries: Dict[str, ConfigEntry] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"无法解析的行 {raw.strip()!r}（应为 key = value）", line=number, source=source)

        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("缺少键名", line=number, source=source)
        if key not in CONVERTERS:
            raise ConfigError("未知的配置键", key=key, line=number, source=source)
        if key in entries:
            raise ConfigError(f"重复的配置键（首次出现在第 {entries[key].line} 行）",
                              key=key, line=number, source=source)
        if not value:
            raise ConfigError("缺少取值", key=key, line=number, source=source)
        entries[key] = ConfigEntry(value=value, line=number, source=source)
    return entries


def build_run_config(entries: Mapping[str, ConfigEntry]) -> RunConfig:
    """逐键转换并做跨键校验"""
    values: Dict[str, Any] = {}
    for key, entry in entries.items():
        if key not in CONVERTERS:
            raise ConfigError("未知的配置键", key=key, line=entry.line, source=entry.source)
        try:
            values[key] = CONVERTERS[key](entry.value)
        except ValueError as exc:
            raise ConfigError(f"非法取值 {entry.value!r}: {exc}",
                              key=key, line=entry.line, source=entry.source) from None

    config = RunConfig(**values)

    def fail(message: str, key: str):
        entry = entries.get(key)
        raise ConfigError(message, key=key,
                          line=entry.line if entry else None,
                          source=entry.source if entry else "<config>")

    if config.delta_min >= config.delta_max:
        fail(f"需要 delta_min < delta_max（{config.delta_min!r} >= {config.delta_max!r}）", "delta_max")
    if config.kad_min >= config.kad_max:
        fail(f"需要 kad_min < kad_max（{config.kad_min!r} >= {config.kad_max!r}）", "kad_max")

    if config.xi is not None:
        expected = AsymmetryParams.from_xi(config.xi)
        for key, rate in (("gamma_1d_1", expected.gamma_1d_1), ("gamma_1d_2", expected.gamma_1d_2)):
            if key in entries and getattr(config, key) != rate:
                fail(f"与 xi = {config.xi!r} 给出的 {rate!r} 冲突", key)
        config = replace(config, gamma_1d_1=expected.gamma_1d_1, gamma_1d_2=expected.gamma_1d_2)

    if config.ka_l is not None:
        d_over_l = d_over_l_from_length(config.kad, config.ka_l)
        if "d_over_l" in entries and config.d_over_l != d_over_l:
            fail(f"与 kad / ka_l = {d_over_l!r} 冲突", "d_over_l")
        config = replace(config, d_over_l=d_over_l)

    try:
        config.to_system_params()
    except DimerError as exc:
        raise ConfigError(f"参数不满足约束: {exc}") from None

    return config


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """
    解析配置文本

    Raises:
        ConfigError: 语法错误、未知键、非法取值或违反参数约束（带键名与行号）
    """
    return build_run_config(parse_entries(text, source))


def preset_path(name: str) -> Path:
    return PRESET_DIR / f"{name}.conf"


def list_presets() -> List[str]:
    return sorted(path.stem for path in PRESET_DIR.glob("*.conf"))


def load_preset_entries(name: str) -> Dict[str, ConfigEntry]:
    path = preset_path(name)
    if not path.exists():
        raise ConfigError(f"预设不存在（可用: {', '.join(list_presets())}）", key="preset", source=str(path))
    return parse_entries(path.read_text(encoding="utf-8"), source=str(path))


def load_file_entries(path: Union[str, Path]) -> Dict[str, ConfigEntry]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"无法读取配置文件: {exc}", source=str(path)) from None
    except UnicodeDecodeError:
        raise ConfigError("配置文件不是 UTF-8 编码", source=str(path)) from None
    return parse_entries(text, source=str(path))


def resolve_run_config(task: str, preset: Optional[str] = None,
                       config_file: Optional[Union[str, Path]] = None,
                       overrides: Optional[Mapping[str, str]] = None) -> RunConfig:
    """
    按优先级合并预设、配置文件与命令行覆盖项

    预设或配置文件中的 task 必须与子命令一致。
    """
    merged: Dict[str, ConfigEntry] = {}
    layers = []
    if preset:
        layers.append(load_preset_entries(preset))
    if config_file:
        layers.append(load_file_entries(config_file))
    layers.append({
        key: ConfigEntry(value=str(value), source=f"--{key}")
        for key, value in (overrides or {}).items()
    })

    for layer in layers:
        task_entry = layer.get("task")
        if task_entry is not None and task_entry.value.lower() != task:
            raise ConfigError(f"task = {task_entry.value} 与子命令 {task} 不一致",
                              key="task", line=task_entry.line, source=task_entry.source)
        merged.update(layer)

    merged["task"] = ConfigEntry(value=task, source="<subcommand>")
    config = build_run_config(merged)
    logger.debug(f"运行配置已解析: task = {config.task}")
    return config
