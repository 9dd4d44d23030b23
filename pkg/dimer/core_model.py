#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
核心模型模块
双原子-光子晶体波导带边系统的数据模型、有效非厄米哈密顿量及其单激发本征问题

约定：
- 所有速率以参考 Γ1D 为单位，时间以 1/Γ1D 为单位
- 单激发裸基矢顺序为 (|eg>, |ge>)，即 (左原子激发, 右原子激发)
- 原子位置固定为 x1 = 0, x2 = d
"""

import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional

import numpy as np
import pandas as pd

from .errors import AsymmetricInput, DegenerateSpectrum, InvalidParameter, WrongCase
from .logger_setup import get_logger


logger = get_logger(__name__)

# 简并判据 |E1 - E2| < DEGENERACY_TOLERANCE * ||H||
DEGENERACY_TOLERANCE = 1e-10

# 判断 k_a d 是否为 Bragg / anti-Bragg 的容差
CASE_TOLERANCE = 1e-12


class SpacingCase(Enum):
    """原子间距情形"""
    BRAGG = "bragg"
    ANTI_BRAGG = "anti_bragg"

    @property
    def kad(self) -> float:
        return math.pi if self is SpacingCase.BRAGG else 0.5 * math.pi


@dataclass(frozen=True)
class SystemParams:
    """双原子-波导系统的完整无量纲参数"""
    gamma_1d_1: float = 1.0
    gamma_1d_2: float = 1.0
    gamma_prime: float = 0.0
    j_strength: float = 1.0
    kad: float = math.pi
    d_over_l: float = 0.1
    omega_p_amp: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("gamma_1d_1", "gamma_1d_2", "gamma_prime", "j_strength",
                     "kad", "d_over_l", "omega_p_amp", "delta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameter(f"{name} 必须为有限值: {value}")

        for name in ("gamma_1d_1", "gamma_1d_2", "gamma_prime", "j_strength",
                     "omega_p_amp", "d_over_l", "kad"):
            if getattr(self, name) < 0:
                raise InvalidParameter(f"{name} 不能为负: {getattr(self, name)}")

    @classmethod
    def symmetric(cls, gamma_1d: float = 1.0, **kwargs) -> "SystemParams":
        """两个原子波导衰减率相同的参数"""
        return cls(gamma_1d_1=gamma_1d, gamma_1d_2=gamma_1d, **kwargs)

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    @property
    def is_symmetric(self) -> bool:
        return self.gamma_1d_1 == self.gamma_1d_2

    @property
    def gamma_1d_mean(self) -> float:
        return 0.5 * (self.gamma_1d_1 + self.gamma_1d_2)

    @property
    def gamma_1d_geometric(self) -> float:
        return math.sqrt(self.gamma_1d_1 * self.gamma_1d_2)

    @property
    def bound_coupling(self) -> float:
        """束缚态介导的原子间耦合 J e^{-d/L}"""
        return self.j_strength * math.exp(-self.d_over_l)

    @property
    def coupling_vector(self) -> np.ndarray:
        """波导耦合矢量 V = (sqrt(Γ1), sqrt(Γ2) e^{i k_a d})"""
        return np.array([
            math.sqrt(self.gamma_1d_1),
            math.sqrt(self.gamma_1d_2) * np.exp(1j * self.kad),
        ], dtype=complex)

    def check_weak_drive(self, ratio: float = 0.01):
        """关联函数计算要求 Ω_p <= ratio * max(Γ1D,1, Γ1D,2)"""
        limit = ratio * max(self.gamma_1d_1, self.gamma_1d_2)
        if self.omega_p_amp > limit:
            raise InvalidParameter(
                f"驱动过强: omega_p_amp = {self.omega_p_amp} 超出弱驱动上限 {limit}"
            )

    def spacing_case(self) -> Optional[SpacingCase]:
        for case in SpacingCase:
            if math.isclose(self.kad, case.kad, rel_tol=0.0, abs_tol=CASE_TOLERANCE):
                return case
        return None

    def require_case(self, case: SpacingCase):
        if self.spacing_case() is not case:
            raise WrongCase(f"k_a d = {self.kad!r} 不是 {case.value} 情形（需要 {case.kad!r}）")

    def require_symmetric(self):
        if not self.is_symmetric:
            raise AsymmetricInput(
                f"需要对称衰减率，实际 Γ1D,1 = {self.gamma_1d_1}, Γ1D,2 = {self.gamma_1d_2}"
            )


@dataclass(frozen=True, eq=False)
class EffectiveHamiltonian:
    """单激发子空间的 2x2 有效非厄米哈密顿量 H = coherent_part - (i/2) decay_matrix"""
    matrix: np.ndarray
    coherent_part: np.ndarray
    decay_matrix: np.ndarray

    @property
    def trace(self) -> complex:
        return complex(self.matrix[0, 0] + self.matrix[1, 1])


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """非厄米矩阵的本征值与双正交左右本征矢"""
    e1: complex
    e2: complex
    psi1_r: np.ndarray
    psi2_r: np.ndarray
    psi1_l: np.ndarray
    psi2_l: np.ndarray
    degenerate: bool = False

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([self.e1, self.e2], dtype=complex)

    @property
    def right_vectors(self) -> np.ndarray:
        """列为右本征矢"""
        return np.column_stack([self.psi1_r, self.psi2_r])

    @property
    def left_vectors(self) -> np.ndarray:
        """行为左本征矢（不取共轭，满足 L @ R = I）"""
        return np.vstack([self.psi1_l, self.psi2_l])


@dataclass(frozen=True)
class DressedLevelScheme:
    """缀饰态能级与衰减率（相对 ω_a）"""
    omega_a_level: float
    omega_b_level: float
    gamma_a: float
    gamma_b: float
    delta_ab: float


@dataclass(frozen=True)
class BandEdgeParams:
    """带边参数：曲率 alpha，带边失谐 delta_edge = ω0 - ωa，元胞长度 d_cell"""
    alpha: float
    delta_edge: float
    d_cell: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidParameter(f"带曲率 alpha 必须为正: {self.alpha}")
        if not self.delta_edge > 0:
            raise InvalidParameter(f"原子频率不在带隙内: delta_edge = {self.delta_edge}")
        if not self.d_cell > 0:
            raise InvalidParameter(f"元胞长度必须为正: {self.d_cell}")


def build_hamiltonian(params: SystemParams) -> EffectiveHamiltonian:
    """
    构造单激发有效非厄米哈密顿量

    对角元 -Δ + J - i(Γ' + Γ1D,j)/2；非对角元 -(i/2) sqrt(Γ1D,1 Γ1D,2) e^{i k_a d} - J e^{-d/L}。
    非对称衰减率通过几何平均进入波导项，束缚态项 J 与速率无关。
    """
    gamma_geo = params.gamma_1d_geometric
    energy = params.j_strength - params.delta
    exchange = 0.5 * gamma_geo * math.sin(params.kad) - params.bound_coupling
    collective = gamma_geo * math.cos(params.kad)

    coherent = np.array([
        [energy, exchange],
        [exchange, energy],
    ], dtype=complex)
    decay = np.array([
        [params.gamma_prime + params.gamma_1d_1, collective],
        [collective, params.gamma_prime + params.gamma_1d_2],
    ], dtype=complex)

    return EffectiveHamiltonian(
        matrix=coherent - 0.5j * decay,
        coherent_part=coherent,
        decay_matrix=decay,
    )


def _align_phase(vector: np.ndarray) -> np.ndarray:
    # 最后一个非零分量取实正
    index = 1 if abs(vector[1]) > 1e-14 else 0
    component = vector[index]
    return vector * (np.conj(component) / abs(component))


def _right_vector(matrix: np.ndarray, eigenvalue: complex, fallback: np.ndarray) -> np.ndarray:
    """2x2 矩阵的闭式右本征矢，从两个候选中取模较大者"""
    candidate_a = np.array([matrix[0, 1], eigenvalue - matrix[0, 0]], dtype=complex)
    candidate_b = np.array([eigenvalue - matrix[1, 1], matrix[1, 0]], dtype=complex)
    vector = candidate_a if np.linalg.norm(candidate_a) >= np.linalg.norm(candidate_b) else candidate_b

    norm = np.linalg.norm(vector)
    if norm == 0.0:
        return fallback.astype(complex)
    return _align_phase(vector / norm)


def _closed_form_eigenvalues(matrix: np.ndarray):
    h11, h12, h21, h22 = matrix[0, 0], matrix[0, 1], matrix[1, 0], matrix[1, 1]
    mean = 0.5 * (h11 + h22)
    half_gap = 0.5 * (h11 - h22)
    coupling = h12 if h12 == h21 else np.sqrt(h12) * np.sqrt(h21)

    if half_gap == 0:
        root = coupling
    else:
        root = np.sqrt(half_gap * half_gap + h12 * h21)
        # 分支与耦合方向对齐，对称极限下 E1 对应 (-1, 1)/sqrt(2)
        reference = coupling if coupling != 0 else -half_gap
        if (root * np.conj(reference)).real < 0:
            root = -root

    return complex(mean - root), complex(mean + root)


def eigensolve(h) -> EigenSystem:
    """
    闭式求解 2x2 非厄米本征问题

    左本征矢取 H^T 在同一本征值处的右本征矢并按 <L_j|R_j> = 1 归一（不取共轭），
    复对称输入下左矢即右矢的转置。简并（|E1 - E2| < 1e-10 ||H||）时发出
    DegenerateSpectrum 警告但不中断。

    Args:
        h: EffectiveHamiltonian 或 2x2 复矩阵
    """
    matrix = np.asarray(h.matrix if isinstance(h, EffectiveHamiltonian) else h, dtype=complex)
    if matrix.shape != (2, 2):
        raise InvalidParameter(f"需要 2x2 矩阵，实际形状 {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InvalidParameter("矩阵含非有限元素")

    e1, e2 = _closed_form_eigenvalues(matrix)
    scale = np.linalg.norm(matrix)
    degenerate = scale == 0.0 or abs(e1 - e2) < DEGENERACY_TOLERANCE * scale

    basis = np.eye(2, dtype=complex)
    psi1_r = _right_vector(matrix, e1, basis[0])
    psi2_r = _right_vector(matrix, e2, basis[1])

    transposed = matrix.T
    lefts = []
    for eigenvalue, right, fallback in ((e1, psi1_r, basis[0]), (e2, psi2_r, basis[1])):
        left = _right_vector(transposed, eigenvalue, fallback)
        overlap = np.dot(left, right)
        if abs(overlap) > 1e-14:
            left = left / overlap
        lefts.append(left)

    if degenerate:
        message = f"本征值简并: E1 = {e1}, E2 = {e2}, ||H|| = {scale:.3e}"
        logger.warning(message)
        warnings.warn(message, DegenerateSpectrum, stacklevel=2)

    return EigenSystem(
        e1=e1, e2=e2,
        psi1_r=psi1_r, psi2_r=psi2_r,
        psi1_l=lefts[0], psi2_l=lefts[1],
        degenerate=bool(degenerate),
    )


def dressed_scheme(params: SystemParams) -> DressedLevelScheme:
    """缀饰态 |A>、|B> 的能级、衰减率与劈裂（仅对称衰减率）"""
    params.require_symmetric()
    gamma = params.gamma_1d_1
    shift = params.bound_coupling - 0.5 * gamma * math.sin(params.kad)
    omega_a = params.j_strength + shift
    omega_b = params.j_strength - shift

    return DressedLevelScheme(
        omega_a_level=omega_a,
        omega_b_level=omega_b,
        gamma_a=gamma + params.gamma_prime - gamma * math.cos(params.kad),
        gamma_b=gamma + params.gamma_prime + gamma * math.cos(params.kad),
        delta_ab=omega_a - omega_b,
    )


def dressed_scheme_sweep(params: SystemParams, kad_values: Iterable[float],
                         ka_l: Optional[float] = None) -> pd.DataFrame:
    """
    沿 k_a d 扫描缀饰态能级和衰减率

    ka_l 给定时局域长度固定，d/L 随 k_a d 变化；否则保持 params.d_over_l
    """
    rows = []
    for kad in kad_values:
        scheme = dressed_scheme(params_at_spacing(params, float(kad), ka_l))
        rows.append({
            "kad": float(kad),
            "omega_a": scheme.omega_a_level,
            "omega_b": scheme.omega_b_level,
            "gamma_a": scheme.gamma_a,
            "gamma_b": scheme.gamma_b,
            "delta_ab": scheme.delta_ab,
        })
    return pd.DataFrame(rows, columns=["kad", "omega_a", "omega_b", "gamma_a", "gamma_b", "delta_ab"])


def bound_state_length(band: BandEdgeParams) -> float:
    """束缚态局域长度 L = d sqrt(alpha / delta)"""
    return band.d_cell * math.sqrt(band.alpha / band.delta_edge)


def d_over_l_from_length(kad: float, ka_l: float = 10.0 * math.pi) -> float:
    """局域长度以 k_a L 给出时的 d/L"""
    if not ka_l > 0:
        raise InvalidParameter(f"k_a L 必须为正: {ka_l}")
    return kad / ka_l


def params_at_spacing(params: SystemParams, kad: float, ka_l: Optional[float] = None) -> SystemParams:
    """换一个原子间距；ka_l 给定时按固定局域长度重算 d/L"""
    if ka_l is None:
        return params.replace(kad=kad)
    return params.replace(kad=kad, d_over_l=d_over_l_from_length(kad, ka_l))


def decoupling_strength(gamma_1d: float = 1.0, d_over_l: float = 0.05) -> float:
    """满足 2 J e^{-d/L} = Γ1D 的束缚态强度 J"""
    return 0.5 * gamma_1d * math.exp(d_over_l)


def pi_phase_condition(params: SystemParams, tol: float = 1e-12) -> bool:
    """anti-Bragg 且 2 J e^{-d/L} = Γ1D、Γ' = 0：共振处 T = 1 且相移 π"""
    return (
        params.spacing_case() is SpacingCase.ANTI_BRAGG
        and params.is_symmetric
        and params.gamma_prime == 0.0
        and abs(2.0 * params.bound_coupling - params.gamma_1d_1) <= tol * max(1.0, params.gamma_1d_1)
    )
