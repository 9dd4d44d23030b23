#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
动力学模块
无驱动单激发态在非厄米哈密顿量下的精确演化，裸原子布居与缀饰态布居，以及闭式布居
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.signal import find_peaks

from .core_model import (
    EffectiveHamiltonian,
    SpacingCase,
    SystemParams,
    build_hamiltonian,
    eigensolve,
)
from .errors import InvalidParameter
from .logger_setup import get_logger


logger = get_logger(__name__)

# 缀饰态 |A> = (-|eg> + |ge>)/sqrt(2)，|B> = (|eg> + |ge>)/sqrt(2)
DRESSED_A = np.array([-1.0, 1.0]) / math.sqrt(2.0)
DRESSED_B = np.array([1.0, 1.0]) / math.sqrt(2.0)


class InitialState(Enum):
    """初始单激发态"""
    LEFT = "left"
    RIGHT = "right"
    A = "a"
    B = "b"

    @property
    def vector(self) -> np.ndarray:
        vectors = {
            InitialState.LEFT: np.array([1.0, 0.0]),
            InitialState.RIGHT: np.array([0.0, 1.0]),
            InitialState.A: DRESSED_A,
            InitialState.B: DRESSED_B,
        }
        return vectors[self].astype(complex)


InitialLike = Union[InitialState, str, Sequence[complex], np.ndarray]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """采样布居序列"""
    times: np.ndarray
    p_left: np.ndarray
    p_right: np.ndarray
    p_a: np.ndarray
    p_b: np.ndarray
    norm: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "p_left": self.p_left,
            "p_right": self.p_right,
            "p_a": self.p_a,
            "p_b": self.p_b,
            "norm": self.norm,
        })


def resolve_initial(initial: InitialLike) -> np.ndarray:
    """把初态描述转换为裸基下的振幅矢量"""
    if isinstance(initial, InitialState):
        return initial.vector
    if isinstance(initial, str):
        try:
            return InitialState(initial.strip().lower()).vector
        except ValueError:
            raise InvalidParameter(f"未知初态: {initial!r}（可选 left/right/a/b）") from None

    vector = np.asarray(initial, dtype=complex)
    if vector.shape != (2,) or not np.all(np.isfinite(vector)):
        raise InvalidParameter(f"自定义初态必须为有限的二维矢量: {initial!r}")
    norm = float(np.vdot(vector, vector).real)
    if norm == 0.0 or norm > 1.0 + 1e-12:
        raise InvalidParameter(f"自定义初态的模方必须在 (0, 1] 内: {norm}")
    return vector


def time_grid(t_max: float, n: int) -> np.ndarray:
    if not math.isfinite(t_max) or t_max < 0:
        raise InvalidParameter(f"t_max 必须为非负有限值: {t_max}")
    if int(n) != n or n < 2:
        raise InvalidParameter(f"采样点数必须为不小于 2 的整数: {n}")
    return np.linspace(0.0, t_max, int(n))


def propagator(h: Union[EffectiveHamiltonian, np.ndarray], times) -> np.ndarray:
    """
    e^{-iHt}，形状 (len(times), 2, 2)

    可对角化时 U(t) = Σ_j e^{-i E_j t} |R_j><L_j|；
    简并时用 2x2 Jordan 形式 e^{-imt}(I - i t (H - mI))，m 为迹的一半。
    """
    matrix = np.asarray(h.matrix if isinstance(h, EffectiveHamiltonian) else h, dtype=complex)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    eig = eigensolve(matrix)

    if eig.degenerate:
        mean = 0.5 * (matrix[0, 0] + matrix[1, 1])
        nilpotent = matrix - mean * np.eye(2)
        envelope = np.exp(-1j * mean * times)[:, None, None]
        return envelope * (np.eye(2)[None, :, :] - 1j * times[:, None, None] * nilpotent[None, :, :])

    result = np.zeros((len(times), 2, 2), dtype=complex)
    for energy, right, left in ((eig.e1, eig.psi1_r, eig.psi1_l), (eig.e2, eig.psi2_r, eig.psi2_l)):
        result += np.exp(-1j * energy * times)[:, None, None] * np.outer(right, left)[None, :, :]
    return result


def series_from_amplitudes(times: np.ndarray, amplitudes: np.ndarray,
                           state_a: np.ndarray = DRESSED_A,
                           state_b: np.ndarray = DRESSED_B) -> TimeSeries:
    """由裸基振幅 (n, 2) 计算裸原子与缀饰态布居"""
    p_left = np.abs(amplitudes[:, 0]) ** 2
    p_right = np.abs(amplitudes[:, 1]) ** 2
    p_a = np.abs(amplitudes @ np.conj(state_a)) ** 2
    p_b = np.abs(amplitudes @ np.conj(state_b)) ** 2
    return TimeSeries(
        times=times,
        p_left=p_left,
        p_right=p_right,
        p_a=p_a,
        p_b=p_b,
        norm=p_left + p_right,
    )


def evolve(params: SystemParams, initial: InitialLike = InitialState.LEFT,
           t_max: float = 10.0, n: int = 2001) -> TimeSeries:
    """
    无驱动演化（Ω_p = 0，参考系取 Δ = 0）

    Args:
        params: 系统参数，其中 delta 和 omega_p_amp 被忽略
        initial: left/right/a/b 或自定义二维矢量
        t_max: 最大时间（单位 1/Γ1D）
        n: 采样点数

    Returns:
        布居序列
    """
    times = time_grid(t_max, n)
    state = resolve_initial(initial)
    hamiltonian = build_hamiltonian(params.replace(delta=0.0, omega_p_amp=0.0))
    amplitudes = propagator(hamiltonian, times) @ state
    return series_from_amplitudes(times, amplitudes)


def closed_form_populations(params: SystemParams, case: SpacingCase,
                            t) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    左原子初始激发时的闭式布居 (p_L, p_R, p_A, p_B)

    指数写成合并后的形式，t 很大时不会溢出。
    """
    params.require_symmetric()
    params.require_case(case)

    t = np.asarray(t, dtype=float)
    gamma = params.gamma_1d_1
    gamma_prime = params.gamma_prime
    splitting = 2.0 * params.bound_coupling

    if case is SpacingCase.BRAGG:
        slow = np.exp(-gamma_prime * t)
        fast = np.exp(-(2.0 * gamma + gamma_prime) * t)
        beat = 2.0 * np.exp(-(gamma + gamma_prime) * t) * np.cos(splitting * t)
        p_left = 0.25 * (slow + fast + beat)
        p_right = 0.25 * (slow + fast - beat)
        return p_left, p_right, 0.5 * fast, 0.5 * slow

    envelope = np.exp(-(gamma + gamma_prime) * t)
    beat = np.cos((splitting - gamma) * t)
    p_left = 0.5 * envelope * (1.0 + beat)
    p_right = 0.5 * envelope * (1.0 - beat)
    return p_left, p_right, 0.5 * envelope, 0.5 * envelope


def oscillation_frequency(times: np.ndarray, values: np.ndarray) -> float:
    """
    由相邻局部极小的平均间距估计角频率

    极小位置做三点抛物线修正；少于两个极小时返回 NaN。
    """
    values = np.asarray(values, dtype=float)
    indices, _ = find_peaks(-values)
    if len(indices) < 2:
        return math.nan

    step = float(times[1] - times[0])
    positions = []
    for index in indices:
        left, centre, right = values[index - 1], values[index], values[index + 1]
        curvature = left - 2.0 * centre + right
        offset = 0.5 * (left - right) / curvature if curvature != 0 else 0.0
        positions.append(times[index] + offset * step)

    spacing = (positions[-1] - positions[0]) / (len(positions) - 1)
    return 2.0 * math.pi / spacing
