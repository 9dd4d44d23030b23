#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
异常定义模块
所有对外可见的错误类型，及其对应的命令行退出码
"""

from typing import Optional


class DimerError(Exception):
    """模拟库基础异常"""
    exit_code: int = 1
    reason: str = "simulation error"

    def __init__(self, message: str = "", reason: Optional[str] = None):
        super().__init__(message or self.reason)
        if reason is not None:
            self.reason = reason

    def diagnostic_line(self) -> str:
        """单行、可被机器解析的诊断信息"""
        detail = str(self).replace('"', "'").replace("\n", " ")
        return (
            f'dimer: exit={self.exit_code} kind={type(self).__name__} '
            f'reason="{self.reason}" detail="{detail}"'
        )


# ---------------------------------------------------------------------------
# 参数/配置类错误，退出码 2
# ---------------------------------------------------------------------------

class ParameterError(DimerError, ValueError):
    """参数不满足前置条件"""
    exit_code = 2
    reason = "invalid parameter"


class InvalidParameter(ParameterError):
    """参数取值非法（负速率、采样点数不足等）"""
    reason = "invalid parameter"


class AsymmetricInput(ParameterError):
    """要求对称衰减率的操作收到了非对称输入"""
    reason = "asymmetric decay rates"


class WrongCase(ParameterError):
    """k_a d 与请求的 Bragg / anti-Bragg 情形不符"""
    reason = "spacing does not match requested case"


class ConfigError(ParameterError):
    """配置文本解析或校验失败"""
    reason = "config error"

    def __init__(self, message: str, key: Optional[str] = None,
                 line: Optional[int] = None, source: str = "<config>"):
        self.key = key
        self.line = line
        self.source = source
        location = source if line is None else f"{source}:{line}"
        prefix = f"{location}: " if location else ""
        if key is not None:
            prefix += f"key '{key}': "
        super().__init__(prefix + message)


# ---------------------------------------------------------------------------
# 数值失败，退出码 3
# ---------------------------------------------------------------------------

class NumericFailure(DimerError, ArithmeticError):
    """数值计算无法给出有定义的结果"""
    exit_code = 3
    reason = "numeric failure"


class SingularResolvent(NumericFailure):
    """预解式存在实极点 E_j = 0"""
    reason = "singular resolvent"


class SingularSteadyState(NumericFailure):
    """弱驱动稳态线性方程奇异"""
    reason = "singular steady state"


class ZeroFlux(NumericFailure):
    """反射光通量为零，g2 无定义"""
    reason = "zero reflected flux"


class NonConvergedSteadyState(NumericFailure):
    """Liouvillian 零空间无法给出唯一的物理稳态"""
    reason = "steady state not converged"


class FeatureNotFound(NumericFailure):
    """搜索窗口内没有高于噪声的窄特征"""
    reason = "feature not found"


class EmptySpectrum(NumericFailure):
    """谱中没有超过显著度阈值的峰"""
    reason = "empty spectrum"


# ---------------------------------------------------------------------------
# 警告
# ---------------------------------------------------------------------------

class DegenerateSpectrum(UserWarning):
    """本征值简并（可能为例外点），散射改走预解式线性求解"""
