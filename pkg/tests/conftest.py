#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
pytest 公共夹具
"""

import math

import allure
import numpy as np
import pandas as pd
import pytest

from dimer import config_manager
from dimer.core_model import SystemParams


BRAGG = math.pi
ANTI_BRAGG = 0.5 * math.pi


def make_params(kad: float = BRAGG, j: float = 1.0, d_over_l: float = 0.1,
                gamma_prime: float = 0.0, **kwargs) -> SystemParams:
    """对称衰减率 Γ1D = 1 的参数，L = 10π/k_a 时 d/L = kad / 10π"""
    return SystemParams.symmetric(
        gamma_1d=1.0, gamma_prime=gamma_prime, j_strength=j, kad=kad, d_over_l=d_over_l, **kwargs
    )


def attach_frame(frame: pd.DataFrame, name: str):
    """把结果表作为 CSV 附件挂到 allure 报告上"""
    allure.attach(
        frame.to_csv(index=False, lineterminator="\n"),
        name=name,
        attachment_type=allure.attachment_type.CSV,
    )


@pytest.fixture
def bragg_params() -> SystemParams:
    return make_params(BRAGG, j=1.0, d_over_l=0.1)


@pytest.fixture
def anti_bragg_params() -> SystemParams:
    return make_params(ANTI_BRAGG, j=1.5, d_over_l=0.05)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch):
    """测试不受外部 DIMER_* 环境变量和全局配置管理器状态影响"""
    for name in ("DIMER_ENV", "DIMER_LOG_LEVEL", "DIMER_WORKERS", "DIMER_OUTPUT_DIR"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setattr(config_manager, "_config_manager", None)
    yield
