#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
配置管理器
加载并合并运行环境配置（日志、并行执行、输出目录）：
默认值 < config/config.yaml < config/<env>.yaml < DIMER_* 环境变量（可来自 .env）

物理参数不在这里，见 run_config 模块
"""

import os
from dataclasses import asdict, dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import yaml
from dotenv import load_dotenv

from .errors import ConfigError


DEFAULT_CONFIG_DIR = Path(__file__).resolve().parents[1] / "config"
PARALLEL_BACKENDS = ("loky", "threading", "multiprocessing")


class LogLevel(Enum):
    """日志级别枚举"""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


@dataclass
class LoggingConfig:
    """日志配置"""
    level: LogLevel = LogLevel.INFO
    log_dir: str = "logs"
    log_file: str = "dimer.log"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    date_format: str = "%Y-%m-%d %H:%M:%S"
    console_handler: bool = True

    # 滚动文件
    file_handler: bool = False
    max_file_size: int = 10 * 1024 * 1024
    backup_count: int = 5
    encoding: str = "utf-8"

    @property
    def log_file_path(self) -> Path:
        return Path(self.log_dir) / self.log_file


@dataclass
class ExecutionConfig:
    """并行执行配置；workers = -1 表示使用全部核"""
    workers: int = 1
    backend: str = "loky"


@dataclass
class OutputConfig:
    """输出配置"""
    output_dir: str = "."
    svg_hash_salt: str = "dimer"


SECTIONS = {
    "logging": LoggingConfig,
    "execution": ExecutionConfig,
    "output": OutputConfig,
}

# 环境变量 -> (配置节, 键, 类型转换)
ENV_OVERRIDES: Dict[str, Tuple[str, str, Callable[[str], Any]]] = {
    "DIMER_LOG_LEVEL": ("logging", "level", str.upper),
    "DIMER_WORKERS": ("execution", "workers", int),
    "DIMER_OUTPUT_DIR": ("output", "output_dir", str),
}


def _deep_merge(*layers: Dict[str, Any]) -> Dict[str, Any]:
    """逐层合并嵌套字典，后面的覆盖前面的"""
    result: Dict[str, Any] = {}
    for layer in layers:
        for key, value in layer.items():
            if isinstance(result.get(key), dict) and isinstance(value, dict):
                result[key] = _deep_merge(result[key], value)
            else:
                result[key] = value
    return result


def _section_defaults() -> Dict[str, Any]:
    defaults = {name: asdict(cls()) for name, cls in SECTIONS.items()}
    defaults["logging"]["level"] = LogLevel.INFO.value
    return defaults


class ConfigManager:
    """配置管理器"""

    def __init__(self, config_dir: Union[str, Path] = DEFAULT_CONFIG_DIR, environment: str = "local"):
        """
        Args:
            config_dir: 配置文件目录
            environment: 环境名称，对应 config/<environment>.yaml
        """
        self.config_dir = Path(config_dir)
        self.environment = environment
        self._config_cache: Dict[str, Any] = _deep_merge(
            _section_defaults(),
            self._read_yaml(self.config_dir / "config.yaml"),
            self._read_yaml(self.environment_file),
            self._read_env(),
        )

    @property
    def environment_file(self) -> Path:
        return self.config_dir / f"{self.environment}.yaml"

    @staticmethod
    def _read_yaml(path: Path) -> Dict[str, Any]:
        if not path.exists():
            return {}
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"YAML 解析失败: {exc}", source=str(path)) from None
        if not isinstance(data, dict):
            raise ConfigError("顶层必须是映射", source=str(path))
        return data

    @staticmethod
    def _read_env() -> Dict[str, Any]:
        load_dotenv()
        overrides: Dict[str, Any] = {}
        for variable, (section, key, convert) in ENV_OVERRIDES.items():
            raw = os.getenv(variable)
            if not raw:
                continue
            try:
                value = convert(raw)
            except ValueError:
                raise ConfigError(f"无法解析的取值 {raw!r}", key=variable, source="environment") from None
            overrides.setdefault(section, {})[key] = value
        return overrides

    def _section(self, name: str) -> Dict[str, Any]:
        known = {item.name for item in fields(SECTIONS[name])}
        section = self._config_cache.get(name) or {}
        unknown = sorted(set(section) - known)
        if unknown:
            raise ConfigError(f"未知的配置项: {', '.join(unknown)}", key=name, source=str(self.environment_file))
        return dict(section)

    def get_logging_config(self) -> LoggingConfig:
        section = self._section("logging")
        section["level"] = LogLevel(str(section.get("level", "INFO")).upper())
        return LoggingConfig(**section)

    def get_execution_config(self) -> ExecutionConfig:
        return ExecutionConfig(**self._section("execution"))

    def get_output_config(self) -> OutputConfig:
        return OutputConfig(**self._section("output"))

    def get_config(self, key: str, default: Any = None) -> Any:
        """按点号路径取值，如 execution.workers"""
        value: Any = self._config_cache
        for part in key.split("."):
            if not isinstance(value, dict) or part not in value:
                return default
            value = value[part]
        return value

    def set_config(self, key: str, value: Any):
        *parents, leaf = key.split(".")
        node = self._config_cache
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value

    def validate_config(self) -> List[str]:
        """校验配置，返回错误信息列表（空列表表示通过）"""
        errors = []
        if self.environment != "local" and not self.environment_file.exists():
            errors.append(f"找不到环境配置文件: {self.environment_file}")

        level = str(self.get_config("logging.level", "INFO")).upper()
        if level not in LogLevel.__members__:
            errors.append(f"无效的日志级别: {level}")

        workers = self.get_config("execution.workers", 1)
        if isinstance(workers, bool) or not isinstance(workers, int) or workers == 0 or workers < -1:
            errors.append(f"无效的并行进程数: {workers}（应为正整数或 -1）")

        backend = self.get_config("execution.backend", "loky")
        if backend not in PARALLEL_BACKENDS:
            errors.append(f"不支持的并行后端: {backend}")

        for name in SECTIONS:
            if not isinstance(self._config_cache.get(name, {}), dict):
                errors.append(f"配置节 {name} 必须是映射")

        return errors


_config_manager: Optional[ConfigManager] = None


def get_config_manager(config_dir: Union[str, Path] = None, environment: str = None) -> ConfigManager:
    """获取全局配置管理器；给出任一参数时重新加载"""
    global _config_manager

    if _config_manager is None or config_dir is not None or environment is not None:
        _config_manager = ConfigManager(
            config_dir if config_dir is not None else DEFAULT_CONFIG_DIR,
            environment or os.getenv("DIMER_ENV", "local"),
        )
    return _config_manager
