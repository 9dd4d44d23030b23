#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
缺陷分析测试：偏离 Bragg 间距的 Fano 共振与慢衰减，非对称衰减率下的缀饰基
"""

import math

import allure
import numpy as np
import pytest

from dimer.errors import FeatureNotFound, InvalidParameter, WrongCase
from dimer.imperfections import (
    AsymmetryParams,
    DeviationParams,
    asymmetric_bragg_dynamics,
    asymmetric_dressed_basis,
    dark_state_rate,
    deviation_dynamics,
    dressed_hamiltonian_terms,
    fano_position,
    fano_scan,
    tail_decay_rate,
)

from .conftest import ANTI_BRAGG, BRAGG, attach_frame, make_params


ETA = 0.05
GAMMA_B = 1.0 - math.cos(0.05 * math.pi)


@pytest.fixture
def deviated_params():
    """η = 0.05、J = 3Γ1D、L = 10π/k_a（偏离后 d/L = 0.105）"""
    return make_params(BRAGG, j=3.0, d_over_l=0.105)


@allure.feature("缺陷分析")
@allure.story("间距偏差")
class TestDeviation:

    @allure.title("偏差参数范围")
    def test_deviation_bounds(self):
        assert DeviationParams(ETA).kad == pytest.approx(1.05 * math.pi)
        with pytest.raises(InvalidParameter):
            DeviationParams(0.3)

    @allure.title("暗态衰减率与 Fano 位置公式")
    def test_formulas(self, deviated_params):
        shifted = DeviationParams(ETA).apply(deviated_params)
        assert dark_state_rate(shifted) == pytest.approx(GAMMA_B, rel=1e-12)
        assert fano_position(shifted) == pytest.approx(0.2208, abs=1e-3)

    @allure.title("η = 0.05：窄非对称特征位于 Δ* 附近，宽度与 Γ^B 同量级")
    def test_fano_feature(self, deviated_params):
        grid, feature = fano_scan(deviated_params, DeviationParams(ETA), -1.0, 1.5, 2501)
        attach_frame(grid.to_frame(), "fano_spectrum")

        with allure.step(f"位置 {feature.position:.6f}，宽度 {feature.width:.6f}，q = {feature.q:.4f}"):
            assert feature.gamma_b == pytest.approx(GAMMA_B, rel=1e-9)
            assert abs(feature.position - feature.predicted_position) <= GAMMA_B
            assert 0.5 * GAMMA_B <= feature.width <= 2.0 * GAMMA_B
            assert feature.asymmetry_sign in (1, -1)
            assert math.isfinite(feature.q)
        assert len(grid.deltas) == 2501

    @allure.title("不同 η：特征位于 Δ*(η) 的 Γ^B 范围内，宽度与 Γ^B 同量级")
    @pytest.mark.parametrize("eta", [0.02, 0.05, 0.1, -0.05])
    def test_fano_feature_across_deviations(self, eta):
        # 局域长度固定为 10π/k_a
        params = make_params(BRAGG, j=3.0, d_over_l=0.1 * (1.0 + eta))
        _, feature = fano_scan(params, DeviationParams(eta), -1.0, 1.5, 501)

        gamma_b = 1.0 - math.cos(eta * math.pi)
        assert feature.gamma_b == pytest.approx(gamma_b, rel=1e-9)
        assert feature.predicted_position == pytest.approx(fano_position(DeviationParams(eta).apply(params)))
        assert abs(feature.position - feature.predicted_position) <= gamma_b
        assert 0.5 * gamma_b <= feature.width <= 2.0 * gamma_b

    @allure.title("η → -η：Γ^B 不变，特征随 sin(k_a d) 变号移动")
    def test_fano_sign_reversal(self):
        features = {}
        for eta in (ETA, -ETA):
            params = make_params(BRAGG, j=3.0, d_over_l=0.1 * (1.0 + eta))
            features[eta] = fano_scan(params, DeviationParams(eta), -1.0, 1.5, 501)[1]

        above, below = features[ETA], features[-ETA]
        assert above.gamma_b == pytest.approx(below.gamma_b, rel=1e-12)
        shift = below.predicted_position - above.predicted_position
        assert shift > 0
        assert below.position - above.position == pytest.approx(shift, abs=2.0 * GAMMA_B)

    @allure.title("η = 0：暗态完全解耦，没有 Fano 特征")
    def test_no_feature_at_bragg(self, deviated_params):
        with pytest.raises(FeatureNotFound):
            fano_scan(deviated_params, DeviationParams(0.0), -1.0, 1.5, 501)

    @allure.title("p_b 慢衰减率为 Γ^B(η)")
    def test_slow_decay(self, deviated_params):
        result = deviation_dynamics(deviated_params, DeviationParams(ETA))
        assert result.predicted_rate == pytest.approx(GAMMA_B, rel=1e-12)
        assert result.decay_rate == pytest.approx(GAMMA_B, rel=1e-6)

    @allure.title("布居对偏差不敏感：差异只来自 p_b 的慢衰减")
    def test_population_insensitivity(self, deviated_params):
        deviated = deviation_dynamics(deviated_params, DeviationParams(ETA)).series
        exact = deviation_dynamics(deviated_params.replace(d_over_l=0.1), DeviationParams(0.0)).series

        bound = 0.5 * (1.0 - math.exp(-10.0 * GAMMA_B)) + 1e-3
        assert np.max(np.abs(deviated.p_b - exact.p_b)) <= bound
        assert np.max(np.abs(deviated.p_a - exact.p_a)) < 0.01

    @allure.title("尾部拟合窗口")
    def test_tail_decay_rate(self):
        times = np.linspace(0.0, 4.0, 401)
        assert tail_decay_rate(times, np.exp(-0.3 * times)) == pytest.approx(0.3, rel=1e-9)
        assert math.isnan(tail_decay_rate(times, np.zeros_like(times)))


@allure.feature("缺陷分析")
@allure.story("非对称衰减率")
class TestAsymmetry:

    @allure.title("ξ 的计算与一致性校验")
    def test_asymmetry_params(self):
        asym = AsymmetryParams(1.07, 0.93)
        assert asym.xi == pytest.approx(0.07)
        assert AsymmetryParams.from_xi(0.14).gamma_1d_1 == pytest.approx(1.14)
        with pytest.raises(InvalidParameter):
            AsymmetryParams(1.07, 0.93, xi=0.2)
        with pytest.raises(InvalidParameter):
            AsymmetryParams.from_xi(1.2)
        with pytest.raises(InvalidParameter):
            AsymmetryParams(0.0, 1.0)

    @allure.title("重定义的缀饰基正交归一")
    def test_dressed_basis(self):
        state_a, state_b = asymmetric_dressed_basis(AsymmetryParams.from_xi(0.14))
        basis = np.column_stack([state_a, state_b])
        np.testing.assert_allclose(basis.T @ basis, np.eye(2), atol=1e-15)

    @allure.title("缀饰基哈密顿量的耦合项正比于 ξ")
    def test_dressed_terms(self):
        params = make_params(BRAGG, j=3.0, d_over_l=0.1)
        terms = dressed_hamiltonian_terms(AsymmetryParams.from_xi(0.14), params)
        assert terms.coupling_ab == pytest.approx(3.0 * math.exp(-0.1) * 0.14)
        assert terms.gamma_a == pytest.approx(2.0)
        assert terms.gamma_b == 0.0

    @allure.title("Bragg、J = 3Γ1D：ξ > 0 时 |A>、|B> 互相耦合，ξ = 0 时 p_b 守恒")
    @pytest.mark.parametrize("xi", [0.0, 0.07, 0.14])
    def test_asymmetric_dynamics(self, xi):
        params = make_params(BRAGG, j=3.0, d_over_l=0.1)
        result = asymmetric_bragg_dynamics(AsymmetryParams.from_xi(xi), params)
        series = result.series
        attach_frame(series.to_frame(), f"asym_xi{xi}")

        assert result.residual < 1e-10
        np.testing.assert_allclose(series.p_a + series.p_b, series.p_left + series.p_right, atol=1e-12)

        if xi == 0.0:
            np.testing.assert_allclose(series.p_b, 0.5, atol=1e-12)
            assert math.isnan(result.oscillation_frequency)
        else:
            assert series.p_b[-1] < series.p_b[0] - 1e-3
            assert result.decay_rate > 0
            assert math.isfinite(result.oscillation_frequency)

    @allure.title("只适用于 Bragg 间距")
    def test_requires_bragg(self):
        with pytest.raises(WrongCase):
            asymmetric_bragg_dynamics(AsymmetryParams.from_xi(0.07), make_params(ANTI_BRAGG))
