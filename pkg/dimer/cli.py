#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
命令行入口
dimer <子命令> [--config PATH] [--preset NAME] [--key value ...] [--out PATH] [--svg PATH]

退出码：0 成功，2 配置/参数错误，3 数值失败；失败时在标准错误输出一行诊断信息
"""

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .config_manager import LogLevel, get_config_manager
from .core_model import SystemParams, dressed_scheme_sweep
from .correlation import g2_trace
from .dynamics import evolve
from .errors import ConfigError, DimerError
from .imperfections import asymmetric_bragg_dynamics, deviation_dynamics, fano_scan
from .logger_setup import configure_logging, get_logger
from .report_writer import write_csv, write_line_plot, write_map_plot
from .run_config import CONVERTERS, TASKS, RunConfig, list_presets, resolve_run_config
from .scattering import principal_phase, spectrum


logger = get_logger(__name__)

TASK_HELP = {
    "spectrum": "透射/反射/相位谱 (delta, T, R, theta, theta_unwrapped, loss)",
    "sweep2d": "k_a d × Δ 二维扫描的透射率与相位 (kad, delta, T, theta)",
    "dynamics": "无驱动布居演化 (t, p_left, p_right, p_a, p_b, norm)",
    "g2": "反射场二阶关联 (tau, g2)",
    "fano": "偏离 Bragg 间距的反射谱及 Fano 特征摘要",
    "asym": "非对称衰减率下重定义缀饰基的布居",
    "levels": "缀饰态能级与衰减率随 k_a d 的变化",
}


@dataclass
class TaskResult:
    """一次计算的表格结果、摘要与绘图方式"""
    frame: pd.DataFrame
    summary: Optional[Dict[str, object]] = None
    plot_columns: List[str] = field(default_factory=list)
    plot_title: str = ""


@dataclass
class RunOutcome:
    exit_code: int
    files: List[Path] = field(default_factory=list)


def _sweep_row(params: SystemParams, delta_min: float, delta_max: float, n: int):
    grid = spectrum(params, delta_min, delta_max, n)
    return grid.transmission, principal_phase(grid.t_amps)


class SimulationRunner:
    """按子命令组织计算"""

    def __init__(self, config: RunConfig, workers: int = 1, backend: str = "loky"):
        self.config = config
        self.workers = workers
        self.backend = backend
        self.params = config.to_system_params()

    def run(self) -> TaskResult:
        handlers = {
            "spectrum": self._run_spectrum,
            "sweep2d": self._run_sweep2d,
            "dynamics": self._run_dynamics,
            "g2": self._run_g2,
            "fano": self._run_fano,
            "asym": self._run_asym,
            "levels": self._run_levels,
        }
        logger.info(f"开始计算: {self.config.task}")
        result = handlers[self.config.task]()
        logger.info(f"计算完成: {self.config.task}（{len(result.frame)} 行）")
        return result

    def _run_spectrum(self) -> TaskResult:
        c = self.config
        grid = spectrum(self.params, c.delta_min, c.delta_max, c.delta_points)
        return TaskResult(grid.to_frame(), plot_columns=["T", "R"], plot_title="spectrum")

    def _run_sweep2d(self) -> TaskResult:
        c = self.config
        kads = np.linspace(c.kad_min, c.kad_max, c.kad_points)
        rows = Parallel(n_jobs=self.workers, backend=self.backend)(
            delayed(_sweep_row)(c.params_at(float(kad)), c.delta_min, c.delta_max, c.delta_points)
            for kad in kads
        )
        deltas = np.linspace(c.delta_min, c.delta_max, c.delta_points)
        frame = pd.DataFrame({
            "kad": np.repeat(kads, len(deltas)),
            "delta": np.tile(deltas, len(kads)),
            "T": np.concatenate([row[0] for row in rows]),
            "theta": np.concatenate([row[1] for row in rows]),
        })
        return TaskResult(frame, plot_columns=["T"], plot_title="sweep2d")

    def _run_dynamics(self) -> TaskResult:
        c = self.config
        deviation = c.deviation()
        if deviation is None:
            series = evolve(self.params, c.initial, c.t_max, c.t_points)
            summary = None
        else:
            result = deviation_dynamics(c.params_at(deviation.kad), deviation,
                                        c.t_max, c.t_points, c.initial)
            series = result.series
            summary = {
                "kad": deviation.kad,
                "decay_rate_b": result.decay_rate,
                "predicted_rate_b": result.predicted_rate,
            }
        return TaskResult(series.to_frame(), summary,
                          plot_columns=["p_left", "p_right", "p_a", "p_b"], plot_title="dynamics")

    def _run_g2(self) -> TaskResult:
        c = self.config
        trace = g2_trace(self.params, c.tau_max, c.tau_points, c.g2_method)
        return TaskResult(trace.to_frame(), plot_columns=["g2"], plot_title="g2")

    def _run_fano(self) -> TaskResult:
        c = self.config
        deviation = c.deviation()
        if deviation is None:
            raise ConfigError("fano 需要设置 eta", key="eta")
        grid, feature = fano_scan(c.params_at(deviation.kad), deviation,
                                  c.delta_min, c.delta_max, c.delta_points)
        summary = {
            "position": feature.position,
            "predicted_position": feature.predicted_position,
            "asymmetry_sign": feature.asymmetry_sign,
            "gamma_b": feature.gamma_b,
            "width": feature.width,
            "q": feature.q,
        }
        return TaskResult(grid.to_frame(), summary, plot_columns=["R"], plot_title="fano")

    def _run_asym(self) -> TaskResult:
        c = self.config
        asymmetry = c.asymmetry()
        result = asymmetric_bragg_dynamics(asymmetry, self.params, c.t_max, c.t_points, c.initial)
        summary = {
            "xi": asymmetry.xi,
            "coupling_ab": result.terms.coupling_ab,
            "residual": result.residual,
            "oscillation_frequency_a": result.oscillation_frequency,
            "decay_rate_b": result.decay_rate,
        }
        return TaskResult(result.series.to_frame(), summary,
                          plot_columns=["p_a", "p_b", "p_left", "p_right"], plot_title="asym")

    def _run_levels(self) -> TaskResult:
        c = self.config
        kads = np.linspace(c.kad_min, c.kad_max, c.kad_points)
        frame = dressed_scheme_sweep(self.params, kads, c.ka_l)
        return TaskResult(frame, plot_columns=["omega_a", "omega_b", "gamma_a", "gamma_b"],
                          plot_title="levels")


def _resolve_output(path: Optional[str], output_dir: str) -> Optional[Path]:
    if path is None:
        return None
    path = Path(path)
    return path if path.is_absolute() else Path(output_dir) / path


def _plot_columns(result: TaskResult, plot_column: Optional[str]) -> List[str]:
    if plot_column is None:
        return result.plot_columns
    if plot_column not in result.frame.columns[1:]:
        raise ConfigError(f"plot_column 必须是输出列之一: {', '.join(result.frame.columns[1:])}",
                          key="plot_column")
    return [plot_column]


def run_subcommand(config: RunConfig, workers: int = 1, backend: str = "loky",
                   output_dir: str = ".", hash_salt: str = "dimer") -> RunOutcome:
    """
    执行子命令并写出 CSV（及可选 SVG）

    数值或参数错误不会向上抛出，而是转换为退出码和一行诊断信息。
    """
    try:
        result = SimulationRunner(config, workers, backend).run()
        columns = _plot_columns(result, config.plot_column)
        files = []

        csv_path = write_csv(result.frame, config, _resolve_output(config.out, output_dir), result.summary)
        if csv_path is not None:
            files.append(csv_path)

        svg_path = _resolve_output(config.svg, output_dir)
        if svg_path is not None:
            x = result.frame.columns[0]
            if config.task == "sweep2d":
                files.append(write_map_plot(result.frame, "kad", "delta", columns[0], svg_path,
                                            title=result.plot_title, hash_salt=hash_salt))
            else:
                files.append(write_line_plot(result.frame, x, columns, svg_path,
                                             title=result.plot_title, hash_salt=hash_salt))
        return RunOutcome(exit_code=0, files=files)

    except DimerError as exc:
        return RunOutcome(exit_code=report_failure(exc))


def report_failure(exc: DimerError) -> int:
    """记录错误并在标准错误输出诊断行，返回退出码"""
    logger.error(f"{type(exc).__name__}: {exc}")
    print(exc.diagnostic_line(), file=sys.stderr)
    return exc.exit_code


def _add_common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('--config', metavar='PATH', help='配置文件（key = value）')
    parser.add_argument('--preset', metavar='NAME', help='内置预设名，如 fig4a')
    parser.add_argument('--workers', type=int, default=None,
                        help='并行进程数（仅影响速度，不影响输出）')
    parser.add_argument('--log-level', choices=[level.value for level in LogLevel],
                        help='日志级别')
    parser.add_argument('--env', default=None, help='运行环境配置名（config/<env>.yaml）')

    keys = parser.add_argument_group('参数覆盖')
    for key in CONVERTERS:
        if key == "task":
            continue
        flags = [f'--{key}']
        if '_' in key:
            flags.append(f'--{key.replace("_", "-")}')
        keys.add_argument(*flags, dest=f'set_{key}', metavar='VALUE', default=None,
                          help=f'覆盖配置键 {key}')


def create_cli_parser() -> argparse.ArgumentParser:
    """创建命令行解析器"""
    parser = argparse.ArgumentParser(
        prog='dimer',
        description='光子晶体波导带边双原子系统模拟',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""
示例:
  dimer spectrum --preset fig4a --out results/fig4a.csv --svg results/fig4a.svg
  dimer g2 --preset fig6b --out results/fig6b.csv
  dimer dynamics --kad 1.5707963267948966 --j 3 --d_over_l 0.05

可用预设: {', '.join(list_presets()) or '无'}
        """
    )

    subparsers = parser.add_subparsers(dest='task', metavar='subcommand')
    subparsers.required = True
    for task in TASKS:
        subparser = subparsers.add_parser(task, help=TASK_HELP[task], allow_abbrev=False,
                                          formatter_class=argparse.RawDescriptionHelpFormatter)
        _add_common_arguments(subparser)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """主函数"""
    parser = create_cli_parser()
    args = parser.parse_args(argv)

    try:
        manager = get_config_manager(environment=args.env)
        errors = manager.validate_config()
        if errors:
            raise ConfigError("; ".join(errors), source=str(manager.config_dir))

        logging_config = manager.get_logging_config()
        if args.log_level:
            logging_config.level = LogLevel(args.log_level)
        configure_logging(logging_config)

        execution = manager.get_execution_config()
        output = manager.get_output_config()
        workers = args.workers if args.workers is not None else execution.workers
        if workers == 0 or workers < -1:
            raise ConfigError(f"并行进程数必须为正整数或 -1: {workers}", key="workers", source="--workers")

        overrides = {
            key: getattr(args, f'set_{key}')
            for key in CONVERTERS
            if key != "task" and getattr(args, f'set_{key}') is not None
        }
        config = resolve_run_config(args.task, args.preset, args.config, overrides)

    except DimerError as exc:
        return report_failure(exc)
    except KeyboardInterrupt:
        print("\n用户中断执行", file=sys.stderr)
        return 130

    try:
        outcome = run_subcommand(config, workers, execution.backend,
                                 output.output_dir, output.svg_hash_salt)
    except KeyboardInterrupt:
        print("\n用户中断执行", file=sys.stderr)
        return 130

    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
