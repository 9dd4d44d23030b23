#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
关联函数模块
弱相干驱动下反射场的二阶关联 g2(τ)：

- 弱驱动振幅层级（单激发 + 双激发稳态振幅，探测后条件态在 H_eff 下演化）
- 四维原子密度矩阵的主方程 + 量子回归定理（独立校验路径）

约定：驱动哈密顿量 H2 = -Ω_p Σ_j (w_j σ_j^† + h.c.)，反射输出 b_R = Σ_j sqrt(Γ1D,j/2) e^{i k_a x_j} σ_j，
延迟演化期间驱动保持开启。
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd
from scipy.linalg import expm, null_space
from scipy.signal import find_peaks

from .core_model import SystemParams, build_hamiltonian
from .dynamics import propagator, time_grid
from .errors import InvalidParameter, NonConvergedSteadyState, SingularSteadyState, ZeroFlux
from .logger_setup import get_logger
from .scattering import drive_vector


logger = get_logger(__name__)

# 反射光通量下限（程序单位）
FLUX_FLOOR = 1e-30
# 主方程路径：通量低于 Ω_p^2 Γ̄ 的该比例时认为单光子反射为零
RELATIVE_FLUX_FLOOR = 1e-6
NULL_SPACE_RCOND = 1e-10

# 四维基矢 |gg>, |ge>, |eg>, |ee>，下标为各态激发数
EXCITATIONS = np.array([0, 1, 1, 2])
_SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
_IDENTITY_2 = np.eye(2, dtype=complex)
ATOM_LOWERING = (
    np.kron(_SIGMA_MINUS, _IDENTITY_2),
    np.kron(_IDENTITY_2, _SIGMA_MINUS),
)


@dataclass(frozen=True)
class TwoExcitationState:
    """弱驱动稳态振幅（c_g 归一为 1）"""
    c_g: complex
    c_1: complex
    c_2: complex
    c_ee: complex

    @property
    def single(self) -> np.ndarray:
        return np.array([self.c_1, self.c_2], dtype=complex)


@dataclass(frozen=True, eq=False)
class CorrelationTrace:
    """g2(τ) 采样序列及归一化用的稳态反射通量"""
    taus: np.ndarray
    g2: np.ndarray
    flux_ss: float
    method: str = "hierarchy"

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"tau": self.taus, "g2": self.g2})


@dataclass(frozen=True)
class BeatInfo:
    """g2 的拍频分析结果"""
    maxima: List[float] = field(default_factory=list)
    minima: List[float] = field(default_factory=list)
    max_spacing: float = math.nan
    extremum_spacing: float = math.nan
    beat_frequency: float = math.nan


def reflection_coupling(params: SystemParams) -> np.ndarray:
    """反射输出耦合 v_j = sqrt(Γ1D,j / 2) e^{i k_a x_j}"""
    return np.array([
        math.sqrt(0.5 * params.gamma_1d_1),
        math.sqrt(0.5 * params.gamma_1d_2) * np.exp(1j * params.kad),
    ], dtype=complex)


def _require_drive(params: SystemParams):
    if params.gamma_1d_mean == 0:
        raise ZeroFlux("原子不与波导耦合，反射通量为零")
    params.check_weak_drive()


def steady_state_hierarchy(params: SystemParams) -> TwoExcitationState:
    """
    弱驱动稳态振幅层级

    c_g = 1；单激发 H c = Ω_p w；双激发 E_ee c_ee = Ω_p (w_2 c_1 + w_1 c_2)，
    E_ee = H_11 + H_22 为非厄米哈密顿量的双激发块。

    Raises:
        InvalidParameter: 驱动超出弱驱动范围
        SingularSteadyState: 单激发或双激发方程奇异
    """
    params.check_weak_drive()
    omega = params.omega_p_amp
    if omega == 0 or params.gamma_1d_mean == 0:
        return TwoExcitationState(c_g=1.0 + 0j, c_1=0j, c_2=0j, c_ee=0j)

    matrix = build_hamiltonian(params).matrix
    drive = omega * drive_vector(params)

    # 不受驱动且与另一原子无耦合的原子留在基态，只在受驱子空间内求解
    active = [j for j in range(2)
              if drive[j] != 0 or matrix[j, 1 - j] != 0 or matrix[1 - j, j] != 0]
    if len(active) == 2:
        determinant = matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]
    else:
        determinant = matrix[active[0], active[0]]
    if determinant == 0:
        raise SingularSteadyState(f"单激发稳态方程奇异（Δ = {params.delta!r}）")
    single = np.zeros(2, dtype=complex)
    single[active] = np.linalg.solve(matrix[np.ix_(active, active)], drive[active])

    pair_energy = matrix[0, 0] + matrix[1, 1]
    if pair_energy == 0:
        raise SingularSteadyState(f"双激发稳态方程奇异（Δ = {params.delta!r}）")
    c_ee = (drive[1] * single[0] + drive[0] * single[1]) / pair_energy

    largest = max(abs(single[0]), abs(single[1]))
    if abs(c_ee) > 10.0 * largest ** 2:
        logger.warning(f"双激发振幅偏离弱驱动标度: |c_ee| = {abs(c_ee):.3e}, max|c_j| = {largest:.3e}")

    return TwoExcitationState(
        c_g=1.0 + 0j,
        c_1=complex(single[0]),
        c_2=complex(single[1]),
        c_ee=complex(c_ee),
    )


def g2_reflected(params: SystemParams, tau_max: float = 10.0, n: int = 2001) -> CorrelationTrace:
    """
    振幅层级给出的反射场 g2(τ)

    探测到一个反射光子后，基态振幅为 φ_g = v·c，单激发振幅为 (v_2 c_ee, v_1 c_ee)；
    单激发部分相对稳态的偏离按 e^{-iHτ} 弛豫，A(τ) = v·φ(τ)，g2 = |A|^2 / |v·c|^4。
    """
    _require_drive(params)
    taus = time_grid(tau_max, n)
    state = steady_state_hierarchy(params)

    coupling = reflection_coupling(params)
    emitted = np.dot(coupling, state.single)
    flux = float(abs(emitted) ** 2)
    if flux < FLUX_FLOOR:
        raise ZeroFlux(f"稳态反射通量 {flux:.3e} 低于下限，g2 无定义")

    conditioned = np.array([coupling[1] * state.c_ee, coupling[0] * state.c_ee])
    deviation = conditioned - emitted * state.single

    hamiltonian = build_hamiltonian(params)
    relaxed = propagator(hamiltonian, taus) @ deviation
    amplitude = emitted ** 2 + relaxed @ coupling
    g2 = np.abs(amplitude) ** 2 / flux ** 2

    return CorrelationTrace(taus=taus, g2=g2, flux_ss=flux, method="hierarchy")


def _two_atom_operators(params: SystemParams):
    """四维空间的哈密顿量（含驱动）与塌缩算符"""
    single = build_hamiltonian(params)
    coherent = single.coherent_part
    drive = drive_vector(params)
    omega = params.omega_p_amp

    # 裸基 (|eg>, |ge>) 依次对应原子 1、原子 2
    hamiltonian = np.zeros((4, 4), dtype=complex)
    for j, lower_j in enumerate(ATOM_LOWERING):
        hamiltonian -= omega * (drive[j] * lower_j.conj().T + np.conj(drive[j]) * lower_j)
        for k, lower_k in enumerate(ATOM_LOWERING):
            hamiltonian += coherent[j, k] * lower_j.conj().T @ lower_k

    rates = (params.gamma_1d_1, params.gamma_1d_2)
    phases = (1.0, np.exp(1j * params.kad))
    reflected = sum(math.sqrt(0.5 * rate) * phase * op for rate, phase, op in zip(rates, phases, ATOM_LOWERING))
    transmitted = sum(math.sqrt(0.5 * rate) * np.conj(phase) * op for rate, phase, op in zip(rates, phases, ATOM_LOWERING))

    jumps = [reflected, transmitted]
    if params.gamma_prime > 0:
        jumps.extend(math.sqrt(params.gamma_prime) * op for op in ATOM_LOWERING)

    return hamiltonian, jumps, reflected


def scaled_liouvillian(hamiltonian: np.ndarray, jumps, scale: float) -> np.ndarray:
    """
    激发数重标度坐标下的 Liouvillian（列堆叠）

    ρ = S ρ̃ S，S = diag(scale^n)。弱驱动时 ρ̃ 各元素均为 O(1)；
    变换是精确的相似变换，谱不变。
    """
    weights = scale ** EXCITATIONS.astype(float)
    up = (hamiltonian * weights[None, :]) / weights[:, None]
    down = (hamiltonian * weights[:, None]) / weights[None, :]

    identity = np.eye(4, dtype=complex)
    superop = -1j * (np.kron(identity, up) - np.kron(down.T, identity))
    for jump in jumps:
        rate_op = jump.conj().T @ jump
        superop += scale ** 2 * np.kron(jump.conj(), jump)
        superop -= 0.5 * (np.kron(identity, rate_op) + np.kron(rate_op.T, identity))
    return superop


def _steady_state(superop: np.ndarray, scale: float) -> np.ndarray:
    """
    由零空间求稳态并从 |gg><gg| 出发投影

    零空间多于一维（如 Bragg 暗态）时，用双正交零空间投影算符作用于基态，
    即从基态出发的长时极限。
    """
    row_norms = np.max(np.abs(superop), axis=1)
    row_norms[row_norms == 0] = 1.0
    balance = 1.0 / row_norms
    balanced = balance[:, None] * superop

    right = null_space(balanced, rcond=NULL_SPACE_RCOND)
    left = null_space(balanced.conj().T, rcond=NULL_SPACE_RCOND)
    if right.shape[1] == 0 or right.shape[1] != left.shape[1]:
        raise NonConvergedSteadyState(
            f"Liouvillian 零空间维数异常（右 {right.shape[1]}，左 {left.shape[1]}）"
        )
    if right.shape[1] > 1:
        logger.warning(f"Liouvillian 零空间为 {right.shape[1]} 维，取基态出发的稳态投影")

    left = balance[:, None] * left
    left = left / np.linalg.norm(left, axis=0)[None, :]
    overlap = left.conj().T @ right
    if np.linalg.cond(overlap) > 1.0 / NULL_SPACE_RCOND:
        raise NonConvergedSteadyState("零空间投影算符奇异")

    ground = np.zeros(16, dtype=complex)
    ground[0] = 1.0
    vector = right @ np.linalg.solve(overlap, left.conj().T @ ground)
    rho = vector.reshape(4, 4, order="F")

    weights = scale ** (2 * EXCITATIONS.astype(float))
    trace = np.sum(weights * np.diag(rho))
    if not np.isfinite(trace) or abs(trace) == 0:
        raise NonConvergedSteadyState("稳态迹为零或非有限")
    rho = rho / trace

    hermitian_error = np.max(np.abs(rho - rho.conj().T))
    if hermitian_error > 1e-6 or np.min(np.diag(rho).real) < -1e-8:
        raise NonConvergedSteadyState(f"稳态不是合法的密度矩阵（厄米偏差 {hermitian_error:.3e}）")
    return 0.5 * (rho + rho.conj().T)


def g2_master_equation_oracle(params: SystemParams, tau_max: float = 10.0,
                              n: int = 2001) -> CorrelationTrace:
    """
    主方程 + 量子回归定理给出的反射场 g2(τ)

    g2(τ) = Tr[b^†b e^{Lτ}(b ρ_ss b^†)] / Tr[b^†b ρ_ss]^2，在重标度坐标中计算。

    Raises:
        ZeroFlux: 不与波导耦合、无驱动或单光子反射为零
        NonConvergedSteadyState: 零空间无法给出唯一物理稳态
    """
    _require_drive(params)
    omega = params.omega_p_amp
    if omega == 0:
        raise ZeroFlux("无驱动，反射通量为零")

    taus = time_grid(tau_max, n)
    hamiltonian, jumps, reflected = _two_atom_operators(params)
    superop = scaled_liouvillian(hamiltonian, jumps, omega)
    rho = _steady_state(superop, omega)

    weights = omega ** EXCITATIONS.astype(float)
    counter = (weights[:, None] * (reflected.conj().T @ reflected) * weights[None, :]) / omega ** 2
    normalized_flux = float(np.real(np.trace(counter @ rho)))
    flux = omega ** 2 * normalized_flux
    if flux < FLUX_FLOOR or normalized_flux < RELATIVE_FLUX_FLOOR * params.gamma_1d_mean:
        raise ZeroFlux(f"稳态反射通量 {flux:.3e} 低于下限，g2 无定义")

    state = (reflected @ rho @ reflected.conj().T).reshape(-1, order="F")
    readout = counter.T.reshape(-1, order="F")
    step = expm(superop * (taus[1] - taus[0]))

    values = np.empty(len(taus))
    for index in range(len(taus)):
        values[index] = np.real(readout @ state)
        state = step @ state

    return CorrelationTrace(
        taus=taus,
        g2=values / normalized_flux ** 2,
        flux_ss=flux,
        method="master_equation",
    )


def beat_analysis(trace: CorrelationTrace) -> BeatInfo:
    """
    g2 的内部极值与拍频

    相邻极值间距取中位数（探测后 g2 过零处的极小不影响结果）。
    聚束与反聚束交替一次对应缀饰态劈裂 ω_A - ω_B 的一个周期，
    拍频角频率取 2π / 相邻极值间距。
    """
    values = np.asarray(trace.g2, dtype=float)
    max_indices, _ = find_peaks(values)
    min_indices, _ = find_peaks(-values)

    maxima = [float(trace.taus[i]) for i in max_indices]
    minima = [float(trace.taus[i]) for i in min_indices]
    extrema = sorted(maxima + minima)

    max_spacing = float(np.mean(np.diff(maxima))) if len(maxima) >= 2 else math.nan
    extremum_spacing = float(np.median(np.diff(extrema))) if len(extrema) >= 2 else math.nan
    beat_frequency = 2.0 * math.pi / extremum_spacing if extremum_spacing > 0 else math.nan

    return BeatInfo(
        maxima=maxima,
        minima=minima,
        max_spacing=max_spacing,
        extremum_spacing=extremum_spacing,
        beat_frequency=beat_frequency,
    )


def g2_trace(params: SystemParams, tau_max: float = 10.0, n: int = 2001,
             method: Optional[str] = "hierarchy") -> CorrelationTrace:
    """按名称选择 g2 计算路径：hierarchy 或 master_equation"""
    if method in (None, "hierarchy"):
        return g2_reflected(params, tau_max, n)
    if method == "master_equation":
        return g2_master_equation_oracle(params, tau_max, n)
    raise InvalidParameter(f"未知的 g2 计算方法: {method}")
