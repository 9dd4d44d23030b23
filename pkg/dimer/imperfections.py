#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
缺陷模块
Bragg 间距偏差 η（Fano 共振、暗态慢衰减）与波导衰减率非对称 ξ（重定义缀饰基）
"""

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.optimize import OptimizeWarning, curve_fit

from .core_model import SpacingCase, SystemParams, build_hamiltonian
from .dynamics import (
    InitialLike,
    InitialState,
    TimeSeries,
    evolve,
    oscillation_frequency,
    propagator,
    resolve_initial,
    series_from_amplitudes,
    time_grid,
)
from .errors import FeatureNotFound, InvalidParameter
from .logger_setup import get_logger
from .scattering import SpectrumGrid, spectrum


logger = get_logger(__name__)

MAX_ETA = 0.2
# Fano 搜索窗口半宽（以 Γ^B 为单位）与采样点数
FANO_WINDOW = 5.0
FANO_POINTS = 2001
FANO_NOISE_FLOOR = 1e-8
# 基变换一致性校验容差
BASIS_RESIDUAL_TOLERANCE = 1e-10


@dataclass(frozen=True)
class DeviationParams:
    """Bragg 间距偏差，k_a d = (1 + η)π"""
    eta: float

    def __post_init__(self):
        if not math.isfinite(self.eta) or abs(self.eta) > MAX_ETA:
            raise InvalidParameter(f"偏差参数 |eta| 必须不超过 {MAX_ETA}: {self.eta}")

    @property
    def kad(self) -> float:
        return (1.0 + self.eta) * math.pi

    def apply(self, params: SystemParams) -> SystemParams:
        return params.replace(kad=self.kad)


@dataclass(frozen=True)
class AsymmetryParams:
    """两个原子的波导衰减率及非对称因子 ξ = |Γ1 - Γ2| / (Γ1 + Γ2)"""
    gamma_1d_1: float
    gamma_1d_2: float
    xi: Optional[float] = None

    def __post_init__(self):
        if not (self.gamma_1d_1 > 0 and self.gamma_1d_2 > 0):
            raise InvalidParameter(
                f"波导衰减率必须为正: Γ1D,1 = {self.gamma_1d_1}, Γ1D,2 = {self.gamma_1d_2}"
            )
        computed = abs(self.gamma_1d_1 - self.gamma_1d_2) / (self.gamma_1d_1 + self.gamma_1d_2)
        if self.xi is None:
            object.__setattr__(self, "xi", computed)
        elif abs(self.xi - computed) > 1e-12:
            raise InvalidParameter(f"xi = {self.xi} 与衰减率给出的 {computed} 不一致")

    @classmethod
    def from_xi(cls, xi: float, mean: float = 1.0) -> "AsymmetryParams":
        """Γ1D,1 = mean (1 + ξ)，Γ1D,2 = mean (1 - ξ)"""
        if not 0.0 <= xi < 1.0:
            raise InvalidParameter(f"非对称因子必须满足 0 <= xi < 1: {xi}")
        return cls(gamma_1d_1=mean * (1.0 + xi), gamma_1d_2=mean * (1.0 - xi))

    @property
    def total(self) -> float:
        return self.gamma_1d_1 + self.gamma_1d_2

    def apply(self, params: SystemParams) -> SystemParams:
        return params.replace(gamma_1d_1=self.gamma_1d_1, gamma_1d_2=self.gamma_1d_2)


@dataclass(frozen=True)
class FanoFeature:
    """Fano 特征：定位结果、非对称方向及线型拟合"""
    position: float
    asymmetry_sign: int
    predicted_position: float
    gamma_b: float
    width: float = math.nan
    q: float = math.nan


@dataclass(frozen=True)
class DressedTerms:
    """非对称 Bragg 情形下缀饰基中的哈密顿量各项"""
    omega_a: float
    gamma_a: float
    omega_b: float
    gamma_b: float
    coupling_ab: float

    @property
    def matrix(self) -> np.ndarray:
        """(|A>, |B>) 基中的 2x2 非厄米矩阵"""
        return np.array([
            [self.omega_a - 0.5j * self.gamma_a, self.coupling_ab],
            [self.coupling_ab, self.omega_b - 0.5j * self.gamma_b],
        ], dtype=complex)


class DeviationDynamics(NamedTuple):
    series: TimeSeries
    decay_rate: float
    predicted_rate: float


class AsymmetricDynamics(NamedTuple):
    series: TimeSeries
    terms: DressedTerms
    residual: float
    oscillation_frequency: float
    decay_rate: float


def dark_state_rate(params: SystemParams) -> float:
    """Γ^B = Γ1D (1 + cos k_a d) + Γ'"""
    return params.gamma_1d_1 * (1.0 + math.cos(params.kad)) + params.gamma_prime


def fano_position(params: SystemParams) -> float:
    """Δ* = J - J e^{-d/L} + (Γ1D/2) sin(k_a d)"""
    return params.j_strength - params.bound_coupling + 0.5 * params.gamma_1d_1 * math.sin(params.kad)


def _fano_profile(delta, centre, width, q, p, b0, b1):
    x = delta - centre
    epsilon = 2.0 * x / width
    return (b0 + b1 * x) * ((epsilon + q) ** 2 + p ** 2) / (1.0 + epsilon ** 2)


def _fit_fano(deltas: np.ndarray, values: np.ndarray, centre: float, width: float,
              q_guess: float) -> Tuple[float, float]:
    background = 0.5 * (values[0] + values[-1])
    guess = [centre, width, q_guess, 0.1, background, 0.0]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            fitted, _ = curve_fit(_fano_profile, deltas, values, p0=guess, maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        logger.warning(f"Fano 线型拟合未收敛: {exc}")
        return math.nan, math.nan
    return abs(float(fitted[1])), float(fitted[2])


def fano_scan(params: SystemParams, dev: DeviationParams, delta_min: float = -6.0,
              delta_max: float = 6.0, n: int = 1201) -> Tuple[SpectrumGrid, FanoFeature]:
    """
    偏离 Bragg 间距时的反射谱与 Fano 特征

    在 Δ* ± 5Γ^B 的细网格上取 |dR/dΔ| 最大处为特征位置；
    极小在极大左侧记为 +1（先谷后峰），反之为 -1。

    Returns:
        (请求网格上的散射谱, Fano 特征)

    Raises:
        FeatureNotFound: Γ^B = 0（暗态完全解耦）或窗口内没有高于噪声的特征
    """
    shifted = dev.apply(params)
    grid = spectrum(shifted, delta_min, delta_max, n)

    gamma_b = dark_state_rate(shifted)
    predicted = fano_position(shifted)
    if gamma_b <= 0:
        raise FeatureNotFound(f"η = {dev.eta} 时暗态衰减率为零，没有 Fano 特征")

    half_window = FANO_WINDOW * gamma_b
    fine = spectrum(shifted, predicted - half_window, predicted + half_window, FANO_POINTS)
    reflection = np.nan_to_num(fine.reflection, nan=0.0)

    trend = np.polyval(np.polyfit(fine.deltas, reflection, 1), fine.deltas)
    amplitude = float(np.max(reflection - trend) - np.min(reflection - trend))
    if amplitude < FANO_NOISE_FLOOR:
        raise FeatureNotFound(f"Δ* = {predicted:.6g} 附近没有高于噪声的窄特征（幅度 {amplitude:.3e}）")

    slope = np.abs(np.gradient(reflection, fine.deltas))
    position = float(fine.deltas[int(np.argmax(slope))])
    dip = int(np.argmin(reflection))
    peak = int(np.argmax(reflection))
    sign = 1 if dip < peak else -1

    q_guess = -(fine.deltas[dip] - predicted) / (0.5 * gamma_b)
    if abs(q_guess) < 1e-3:
        q_guess = float(sign)
    width, q = _fit_fano(fine.deltas, reflection, predicted, gamma_b, q_guess)

    logger.info(f"Fano 特征: 位置 {position:.6g}（预测 {predicted:.6g}），Γ^B = {gamma_b:.6g}，拟合宽度 {width:.6g}")
    return grid, FanoFeature(
        position=position,
        asymmetry_sign=sign,
        predicted_position=predicted,
        gamma_b=gamma_b,
        width=width,
        q=q,
    )


def tail_decay_rate(times: np.ndarray, values: np.ndarray,
                    window: Optional[Tuple[float, float]] = None) -> float:
    """
    尾部对数线性拟合给出的衰减率

    默认窗口 [5, 10]；t_max < 10 时取 [t_max/2, t_max]。
    """
    if window is None:
        t_max = float(times[-1])
        window = (5.0, 10.0) if t_max >= 10.0 else (0.5 * t_max, t_max)

    mask = (times >= window[0]) & (times <= window[1])
    tail = values[mask]
    if np.count_nonzero(mask) < 2 or np.any(tail <= 0):
        return math.nan
    slope = np.polyfit(times[mask], np.log(tail), 1)[0]
    return float(-slope)


def deviation_dynamics(params: SystemParams, dev: DeviationParams, t_max: float = 10.0,
                       n: int = 2001, initial: InitialLike = InitialState.LEFT) -> DeviationDynamics:
    """偏差 η 下的演化及 p_b 慢衰减率（预测值 Γ^B(η)）"""
    shifted = dev.apply(params)
    series = evolve(shifted, initial, t_max, n)
    rate = tail_decay_rate(series.times, series.p_b)
    predicted = dark_state_rate(shifted)
    logger.info(f"η = {dev.eta}: p_b 拟合衰减率 {rate:.6g}，预测 {predicted:.6g}")
    return DeviationDynamics(series=series, decay_rate=rate, predicted_rate=predicted)


def asymmetric_dressed_basis(asym: AsymmetryParams) -> Tuple[np.ndarray, np.ndarray]:
    """|A> = (-sqrt(Γ1)|eg> + sqrt(Γ2)|ge>)/sqrt(Γ1+Γ2)，|B> = (sqrt(Γ2)|eg> + sqrt(Γ1)|ge>)/sqrt(Γ1+Γ2)"""
    root_1 = math.sqrt(asym.gamma_1d_1)
    root_2 = math.sqrt(asym.gamma_1d_2)
    norm = math.sqrt(asym.total)
    state_a = np.array([-root_1, root_2]) / norm
    state_b = np.array([root_2, root_1]) / norm
    return state_a, state_b


def dressed_hamiltonian_terms(asym: AsymmetryParams, params: SystemParams) -> DressedTerms:
    """
    Bragg 间距下缀饰基中的哈密顿量：H3^A + H3^B + H^AB

    能级 J ± J e^{-d/L}·2 sqrt(Γ1Γ2)/(Γ1+Γ2)，衰减率 Γ1+Γ2+Γ' 与 Γ'，
    相干耦合 J e^{-d/L}(Γ1-Γ2)/(Γ1+Γ2)。
    """
    bound = params.bound_coupling
    total = asym.total
    shift = bound * 2.0 * math.sqrt(asym.gamma_1d_1 * asym.gamma_1d_2) / total
    energy = params.j_strength - params.delta
    return DressedTerms(
        omega_a=energy + shift,
        gamma_a=total + params.gamma_prime,
        omega_b=energy - shift,
        gamma_b=params.gamma_prime,
        coupling_ab=bound * (asym.gamma_1d_1 - asym.gamma_1d_2) / total,
    )


def asymmetric_dynamics(asym: AsymmetryParams, params: SystemParams, t_max: float = 10.0,
                        n: int = 2001, initial: InitialLike = InitialState.LEFT) -> TimeSeries:
    """任意 k_a d 下的非对称演化，布居投影到重定义的缀饰基"""
    times = time_grid(t_max, n)
    state = resolve_initial(initial)
    hamiltonian = build_hamiltonian(asym.apply(params).replace(delta=0.0, omega_p_amp=0.0))
    amplitudes = propagator(hamiltonian, times) @ state
    state_a, state_b = asymmetric_dressed_basis(asym)
    return series_from_amplitudes(times, amplitudes, state_a, state_b)


def asymmetric_bragg_dynamics(asym: AsymmetryParams, params: SystemParams, t_max: float = 10.0,
                              n: int = 2001,
                              initial: InitialLike = InitialState.LEFT) -> AsymmetricDynamics:
    """
    Bragg 间距、非对称衰减率下的演化

    裸基演化投影到重定义缀饰基，并与缀饰基哈密顿量直接求指数的结果逐点比较；
    同时给出 p_a 的振荡角频率和 p_b 的慢衰减率。
    """
    params.require_case(SpacingCase.BRAGG)
    frame = params.replace(delta=0.0, omega_p_amp=0.0)
    series = asymmetric_dynamics(asym, frame, t_max, n, initial)

    terms = dressed_hamiltonian_terms(asym, frame)
    state_a, state_b = asymmetric_dressed_basis(asym)
    basis = np.column_stack([state_a, state_b])
    start = basis.T @ resolve_initial(initial)

    hamiltonian = build_hamiltonian(asym.apply(frame))
    bare = (propagator(hamiltonian, series.times) @ resolve_initial(initial)) @ basis
    dressed = expm(-1j * series.times[:, None, None] * terms.matrix[None, :, :]) @ start
    residual = float(np.max(np.abs(bare - dressed)))
    if residual > BASIS_RESIDUAL_TOLERANCE:
        logger.warning(f"裸基与缀饰基演化不一致，最大残差 {residual:.3e}")

    frequency = oscillation_frequency(series.times, series.p_a)
    rate = tail_decay_rate(series.times, series.p_b)
    logger.info(f"ξ = {asym.xi:.6g}: p_a 振荡角频率 {frequency:.6g}，p_b 衰减率 {rate:.6g}")

    return AsymmetricDynamics(
        series=series,
        terms=terms,
        residual=residual,
        oscillation_frequency=frequency,
        decay_rate=rate,
    )
