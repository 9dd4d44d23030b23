#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
散射模块
单光子透射/反射振幅：谱分解公式、稳态输入-输出两条独立路径，以及谱扫描和峰分析

振幅约定：耦合矢量 V = (sqrt(Γ1), sqrt(Γ2) e^{i k_a d})，
t = 1 + (i/2) V^† H^{-1} V，r = (i/2) V^T H^{-1} V。
单原子、Γ' = 0 共振时给出 t = 0、R = 1。
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.signal import find_peaks, peak_widths

from .core_model import EigenSystem, SystemParams, build_hamiltonian, eigensolve
from .errors import EmptySpectrum, InvalidParameter, SingularResolvent
from .logger_setup import get_logger


logger = get_logger(__name__)

DEFAULT_PROMINENCE = 0.01


class Incidence(Enum):
    """入射方向"""
    FORWARD = "forward"
    BACKWARD = "backward"


def principal_phase(t_amp):
    """辐角映射到 (-π, π]"""
    phase = np.angle(t_amp)
    return np.where(phase <= -np.pi, phase + 2.0 * np.pi, phase)


@dataclass(frozen=True)
class ScatterPoint:
    """单个探测失谐下的散射结果"""
    delta: float
    t_amp: complex
    r_amp: complex
    valid: bool = True

    @property
    def transmission(self) -> float:
        return abs(self.t_amp) ** 2

    @property
    def reflection(self) -> float:
        return abs(self.r_amp) ** 2

    @property
    def phase(self) -> float:
        return float(principal_phase(self.t_amp))

    @property
    def loss(self) -> float:
        return 1.0 - self.transmission - self.reflection

    @classmethod
    def invalid(cls, delta: float) -> "ScatterPoint":
        nan = complex(math.nan, math.nan)
        return cls(delta=delta, t_amp=nan, r_amp=nan, valid=False)


@dataclass(frozen=True, eq=False)
class SpectrumGrid:
    """
    均匀失谐网格上的散射谱

    无效点（实极点）的振幅为 NaN，valid 为 False；
    phase_unwrapped 只在有效点上连续延拓，起点为左端第一个有效点。
    """
    deltas: np.ndarray
    t_amps: np.ndarray
    r_amps: np.ndarray
    valid: np.ndarray
    phase_unwrapped: np.ndarray

    @property
    def transmission(self) -> np.ndarray:
        return np.abs(self.t_amps) ** 2

    @property
    def reflection(self) -> np.ndarray:
        return np.abs(self.r_amps) ** 2

    @property
    def phase(self) -> np.ndarray:
        return principal_phase(self.t_amps)

    @property
    def loss(self) -> np.ndarray:
        return 1.0 - self.transmission - self.reflection

    @property
    def step(self) -> float:
        return float(self.deltas[1] - self.deltas[0])

    @property
    def points(self) -> List[ScatterPoint]:
        return [
            ScatterPoint(float(d), complex(t), complex(r)) if ok else ScatterPoint.invalid(float(d))
            for d, t, r, ok in zip(self.deltas, self.t_amps, self.r_amps, self.valid)
        ]

    def to_frame(self) -> pd.DataFrame:
        """CSV 列：delta, T, R, theta, theta_unwrapped, loss"""
        return pd.DataFrame({
            "delta": self.deltas,
            "T": self.transmission,
            "R": self.reflection,
            "theta": self.phase,
            "theta_unwrapped": self.phase_unwrapped,
            "loss": self.loss,
        })


@dataclass(frozen=True)
class PeakInfo:
    """反射峰：位置、高度、半高全宽"""
    position: float
    height: float
    fwhm: float


def drive_vector(params: SystemParams, incidence: Incidence = Incidence.FORWARD) -> np.ndarray:
    """
    归一化驱动权重 w_j = sqrt(Γ1D,j / Γ̄) e^{±i k_a x_j}

    原子 j 感受到的驱动为 Ω_p w_j，对称情形下即 Ω_p e^{i k_a x_j}。
    """
    mean = params.gamma_1d_mean
    sign = 1.0 if incidence is Incidence.FORWARD else -1.0
    return np.array([
        math.sqrt(params.gamma_1d_1 / mean),
        math.sqrt(params.gamma_1d_2 / mean) * np.exp(sign * 1j * params.kad),
    ], dtype=complex)


def _adjugate_forms(matrix: np.ndarray, deltas, bra: np.ndarray, ket: np.ndarray):
    """bra · adj(H - Δ) · ket 与 det(H - Δ)，对 Δ 向量化"""
    h11 = matrix[0, 0] - deltas
    h22 = matrix[1, 1] - deltas
    h12, h21 = matrix[0, 1], matrix[1, 0]
    det = h11 * h22 - h12 * h21
    form = (bra[0] * h22 * ket[0] - bra[0] * h12 * ket[1]
            - bra[1] * h21 * ket[0] + bra[1] * h11 * ket[1])
    return form, det


def _resolvent_amplitudes(matrix: np.ndarray, coupling: np.ndarray, deltas):
    """预解式直接求解：简并（例外点）时替代谱分解"""
    t_form, det = _adjugate_forms(matrix, deltas, np.conj(coupling), coupling)
    r_form, _ = _adjugate_forms(matrix, deltas, coupling, coupling)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_amp = 1.0 + 0.5j * t_form / det
        r_amp = 0.5j * r_form / det
    return t_amp, r_amp, det != 0


def _spectral_amplitudes(eig: EigenSystem, coupling: np.ndarray, deltas):
    """谱分解公式，E_j(Δ) = E_j(0) - Δ"""
    t_amp = np.ones_like(deltas, dtype=complex)
    r_amp = np.zeros_like(deltas, dtype=complex)
    regular = np.ones_like(deltas, dtype=bool)

    modes = ((eig.e1, eig.psi1_r, eig.psi1_l), (eig.e2, eig.psi2_r, eig.psi2_l))
    for energy, right, left in modes:
        denominator = energy - deltas
        regular &= denominator != 0
        projection = np.dot(left, coupling)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_amp = t_amp + 0.5j * np.vdot(coupling, right) * projection / denominator
            r_amp = r_amp + 0.5j * np.dot(coupling, right) * projection / denominator

    return t_amp, r_amp, regular


def scatter_amplitudes(params: SystemParams, delta: float) -> ScatterPoint:
    """
    谱分解公式给出的透射/反射振幅

    Raises:
        InvalidParameter: delta 非有限
        SingularResolvent: 某个 E_j 恰为 0（实极点）
    """
    if not math.isfinite(delta):
        raise InvalidParameter(f"探测失谐必须为有限值: {delta}")

    if params.gamma_1d_1 == 0 and params.gamma_1d_2 == 0:
        return ScatterPoint(delta=delta, t_amp=1.0 + 0j, r_amp=0j)

    hamiltonian = build_hamiltonian(params.replace(delta=delta))
    eig = eigensolve(hamiltonian)
    coupling = params.coupling_vector

    if eig.degenerate:
        t_amp, r_amp, regular = _resolvent_amplitudes(hamiltonian.matrix, coupling, np.array([0.0]))
    else:
        t_amp, r_amp, regular = _spectral_amplitudes(eig, coupling, np.array([0.0]))

    if not regular[0]:
        raise SingularResolvent(f"Δ = {delta!r} 处有效哈密顿量存在实极点")

    return ScatterPoint(delta=delta, t_amp=complex(t_amp[0]), r_amp=complex(r_amp[0]))


def scatter_via_steady_state(params: SystemParams, delta: float,
                             incidence: Incidence = Incidence.FORWARD) -> ScatterPoint:
    """
    输入-输出法：求弱驱动单激发稳态 H(Δ) c = -Ω_p w，再由输出场得到 t、r

    与 scatter_amplitudes 相互独立实现，两者在都有定义处一致。
    incidence=BACKWARD 时驱动相位与输出相位同时取共轭（从右侧入射）。
    """
    if not math.isfinite(delta):
        raise InvalidParameter(f"探测失谐必须为有限值: {delta}")

    mean = params.gamma_1d_mean
    if mean == 0:
        return ScatterPoint(delta=delta, t_amp=1.0 + 0j, r_amp=0j)

    omega = params.omega_p_amp if params.omega_p_amp > 0 else 1.0
    matrix = build_hamiltonian(params.replace(delta=delta)).matrix
    drive = omega * drive_vector(params, incidence)

    try:
        amplitudes = np.linalg.solve(matrix, -drive)
    except np.linalg.LinAlgError as exc:
        raise SingularResolvent(f"Δ = {delta!r} 处稳态方程奇异") from exc

    # 透射输出取驱动相位的共轭，反射输出与驱动同相
    same = np.conj(drive_vector(params, incidence)) * mean
    opposite = drive_vector(params, incidence) * mean
    t_amp = 1.0 - 0.5j / omega * np.dot(same, amplitudes)
    r_amp = -0.5j / omega * np.dot(opposite, amplitudes)

    return ScatterPoint(delta=delta, t_amp=complex(t_amp), r_amp=complex(r_amp))


def _validate_grid(start: float, stop: float, n: int, name: str):
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise InvalidParameter(f"{name} 网格端点必须为有限值")
    if start >= stop:
        raise InvalidParameter(f"{name} 网格需要 min < max，实际 {start} >= {stop}")
    if int(n) != n or n < 2:
        raise InvalidParameter(f"{name} 网格点数必须为不小于 2 的整数: {n}")


def spectrum(params: SystemParams, delta_min: float = -6.0, delta_max: float = 6.0,
             n: int = 1201) -> SpectrumGrid:
    """
    均匀失谐网格上的散射谱

    只在 Δ = 0 处做一次本征分解，E_j - Δ 对整个网格向量化；
    简并谱改走预解式。实极点处标记为无效点而不是报错。
    """
    _validate_grid(delta_min, delta_max, n, "delta")
    deltas = np.linspace(delta_min, delta_max, int(n))

    if params.gamma_1d_1 == 0 and params.gamma_1d_2 == 0:
        t_amps = np.ones_like(deltas, dtype=complex)
        r_amps = np.zeros_like(deltas, dtype=complex)
        regular = np.ones_like(deltas, dtype=bool)
    else:
        hamiltonian = build_hamiltonian(params.replace(delta=0.0))
        eig = eigensolve(hamiltonian)
        coupling = params.coupling_vector
        if eig.degenerate:
            t_amps, r_amps, regular = _resolvent_amplitudes(hamiltonian.matrix, coupling, deltas)
        else:
            t_amps, r_amps, regular = _spectral_amplitudes(eig, coupling, deltas)

    valid = regular & np.isfinite(t_amps) & np.isfinite(r_amps)
    if not np.all(valid):
        logger.warning(f"谱中有 {int(np.count_nonzero(~valid))} 个实极点，已标记为无效点")
        t_amps = np.where(valid, t_amps, complex(math.nan, math.nan))
        r_amps = np.where(valid, r_amps, complex(math.nan, math.nan))

    unwrapped = np.full(deltas.shape, math.nan)
    unwrapped[valid] = np.unwrap(principal_phase(t_amps[valid]))

    return SpectrumGrid(
        deltas=deltas,
        t_amps=t_amps,
        r_amps=r_amps,
        valid=valid,
        phase_unwrapped=unwrapped,
    )


def _parabolic_vertex(values: np.ndarray, index: int) -> Tuple[float, float]:
    """三点抛物线顶点：返回 (以格点为单位的偏移, 顶点高度)"""
    if index <= 0 or index >= len(values) - 1:
        return 0.0, float(values[index])
    left, centre, right = values[index - 1], values[index], values[index + 1]
    curvature = left - 2.0 * centre + right
    if curvature == 0:
        return 0.0, float(centre)
    offset = 0.5 * (left - right) / curvature
    return float(offset), float(centre - 0.25 * (left - right) * offset)


def peak_analysis(grid: SpectrumGrid, prominence: float = DEFAULT_PROMINENCE,
                  strict: bool = False, series: Optional[np.ndarray] = None) -> List[PeakInfo]:
    """
    反射谱的峰：显著度阈值以上的局部极大

    位置和高度取三点抛物线顶点，半高全宽取峰高一半处的线性插值宽度。

    Args:
        grid: 散射谱
        prominence: 显著度阈值
        strict: 为 True 时没有峰则抛出 EmptySpectrum，否则返回空列表
        series: 代替反射率分析的序列（与 grid.deltas 等长）

    Returns:
        按位置升序的峰列表
    """
    values = grid.reflection if series is None else np.asarray(series, dtype=float)
    values = np.nan_to_num(values, nan=0.0)

    indices, properties = find_peaks(values, prominence=prominence)
    if len(indices) == 0:
        if strict:
            raise EmptySpectrum(f"没有显著度超过 {prominence} 的峰")
        return []

    # 半高取绝对高度的一半，基线为 0
    baseline = (values[indices], properties["left_bases"], properties["right_bases"])
    widths = peak_widths(values, indices, rel_height=0.5, prominence_data=baseline)[0] * grid.step
    peaks = []
    for index, width in zip(indices, widths):
        offset, height = _parabolic_vertex(values, int(index))
        peaks.append(PeakInfo(
            position=float(grid.deltas[index] + offset * grid.step),
            height=height,
            fwhm=float(width),
        ))

    logger.debug(f"找到 {len(peaks)} 个反射峰")
    return peaks


def anti_bragg_closed_form(params: SystemParams, deltas) -> np.ndarray:
    """anti-Bragg 且 2 J e^{-d/L} = Γ1D 时的透射闭式 (Δ - J - iΓ/2)/(Δ - J + iΓ/2)"""
    deltas = np.asarray(deltas, dtype=float)
    half_width = 0.5j * params.gamma_1d_1
    return (deltas - params.j_strength - half_width) / (deltas - params.j_strength + half_width)
