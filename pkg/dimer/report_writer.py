#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
结果输出模块
确定性的 CSV（# 开头的配置回显头 + 17 位有效数字数据）与 SVG 线图
"""

import sys
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from .logger_setup import get_logger  # noqa: E402
from .run_config import RunConfig  # noqa: E402


logger = get_logger(__name__)

FLOAT_FORMAT = "%.17g"
SUMMARY_PREFIX = "# summary: "


def format_summary(summary: Dict[str, object]) -> str:
    """摘要行：# summary: key=value ...，浮点数用 repr"""
    parts = []
    for key, value in summary.items():
        text = repr(value) if isinstance(value, float) else str(value)
        parts.append(f"{key}={text}")
    return SUMMARY_PREFIX + " ".join(parts)


def render_csv(frame: pd.DataFrame, config: RunConfig,
               summary: Optional[Dict[str, object]] = None) -> str:
    """生成完整 CSV 文本（LF 换行）"""
    header = "".join(f"# {line}\n" for line in config.to_text().splitlines())
    if summary:
        header += format_summary(summary) + "\n"
    body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return header + body


def header_config_text(csv_text: str) -> str:
    """从 CSV 头中取回配置回显部分（去掉 # 前缀，跳过摘要行）"""
    lines = []
    for line in csv_text.splitlines():
        if not line.startswith("#"):
            break
        if line.startswith(SUMMARY_PREFIX):
            continue
        lines.append(line[1:].strip())
    return "\n".join(lines) + "\n"


def read_summary(csv_text: str) -> Dict[str, str]:
    """读取摘要行为字符串字典"""
    summary: Dict[str, str] = {}
    for line in csv_text.splitlines():
        if line.startswith(SUMMARY_PREFIX):
            for part in line[len(SUMMARY_PREFIX):].split():
                key, _, value = part.partition("=")
                summary[key] = value
    return summary


def write_csv(frame: pd.DataFrame, config: RunConfig, path: Optional[Union[str, Path]] = None,
              summary: Optional[Dict[str, object]] = None) -> Optional[Path]:
    """
    写出 CSV；path 为空时写到标准输出

    Returns:
        写出的文件路径，标准输出时为 None
    """
    text = render_csv(frame, config, summary)
    if path is None:
        sys.stdout.write(text)
        return None

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info(f"CSV 已写出: {path}（{len(frame)} 行）")
    return path


def write_line_plot(frame: pd.DataFrame, x: str, ys: Sequence[str], path: Union[str, Path],
                    title: str = "", xlabel: Optional[str] = None, ylabel: str = "",
                    hash_salt: str = "dimer") -> Path:
    """
    自包含 SVG 线图（坐标轴、图例），输出内容与运行时间无关
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with plt.rc_context({"svg.hashsalt": hash_salt, "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for column in ys:
            ax.plot(frame[x], frame[column], label=column, linewidth=1.2)
        ax.set_xlabel(xlabel or x)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)

    logger.info(f"SVG 已写出: {path}")
    return path


def write_map_plot(frame: pd.DataFrame, x: str, y: str, value: str, path: Union[str, Path],
                   title: str = "", hash_salt: str = "dimer") -> Path:
    """二维扫描的色图（x × y 网格上的 value）"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = frame.pivot(index=y, columns=x, values=value)

    with plt.rc_context({"svg.hashsalt": hash_salt, "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        mesh = ax.pcolormesh(table.columns.values, table.index.values, table.values, shading="auto")
        fig.colorbar(mesh, ax=ax, label=value)
        ax.set_xlabel(x)
        ax.set_ylabel(y)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)

    logger.info(f"SVG 已写出: {path}")
    return path
