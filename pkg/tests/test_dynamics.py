#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
动力学测试：传播子、闭式布居、缀饰态布居与振荡频率
"""

import math

import allure
import numpy as np
import pytest
from scipy.linalg import expm

from dimer.core_model import SpacingCase, SystemParams, build_hamiltonian, decoupling_strength
from dimer.dynamics import (
    InitialState,
    closed_form_populations,
    evolve,
    oscillation_frequency,
    propagator,
    resolve_initial,
    time_grid,
)
from dimer.errors import AsymmetricInput, DegenerateSpectrum, InvalidParameter, WrongCase

from .conftest import ANTI_BRAGG, BRAGG, attach_frame, make_params


CASES = {
    SpacingCase.BRAGG: (BRAGG, 0.1),
    SpacingCase.ANTI_BRAGG: (ANTI_BRAGG, 0.05),
}


@allure.feature("动力学")
@allure.story("传播子")
class TestPropagator:

    @allure.title("与矩阵指数一致")
    def test_matches_expm(self, rng):
        times = np.linspace(0.0, 5.0, 11)
        for _ in range(20):
            matrix = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) - 1j * np.eye(2)
            evolved = propagator(matrix, times)
            for index, t in enumerate(times):
                np.testing.assert_allclose(evolved[index], expm(-1j * t * matrix), atol=1e-9)

    @allure.title("例外点走 Jordan 形式")
    def test_exceptional_point(self):
        matrix = np.array([[-0.5j, 1.0], [0.0, -0.5j]])
        times = np.array([0.0, 0.7, 2.0])
        with pytest.warns(DegenerateSpectrum):
            evolved = propagator(matrix, times)
        for index, t in enumerate(times):
            np.testing.assert_allclose(evolved[index], expm(-1j * t * matrix), atol=1e-12)


@allure.feature("动力学")
@allure.story("闭式布居")
class TestClosedForm:

    @allure.title("数值演化与闭式布居逐点一致")
    @pytest.mark.parametrize("case", list(CASES))
    @pytest.mark.parametrize("j", [0.0, 1.0, 3.0])
    @pytest.mark.parametrize("gamma_prime", [0.0, 0.2])
    def test_oracle(self, case, j, gamma_prime):
        kad, d_over_l = CASES[case]
        params = make_params(kad, j=j, d_over_l=d_over_l, gamma_prime=gamma_prime)
        series = evolve(params, InitialState.LEFT, 10.0, 2001)
        expected = closed_form_populations(params, case, series.times)

        for computed, reference in zip((series.p_left, series.p_right, series.p_a, series.p_b), expected):
            assert np.max(np.abs(computed - reference)) < 1e-10

    @allure.title("情形与对称性校验")
    def test_preconditions(self):
        with pytest.raises(WrongCase):
            closed_form_populations(make_params(BRAGG), SpacingCase.ANTI_BRAGG, [0.0])
        with pytest.raises(AsymmetricInput):
            closed_form_populations(SystemParams(gamma_1d_1=1.1, gamma_1d_2=0.9), SpacingCase.BRAGG, [0.0])


@allure.feature("动力学")
@allure.story("布居演化")
class TestEvolve:

    @allure.title("Bragg、Γ' = 0：暗态布居恒为 1/2，两原子布居趋于 1/4")
    def test_bragg_dark_state(self):
        series = evolve(make_params(BRAGG, j=3.0, d_over_l=0.1))
        attach_frame(series.to_frame(), "bragg_dynamics")

        np.testing.assert_allclose(series.p_b, 0.5, atol=1e-12)
        assert series.p_left[-1] == pytest.approx(0.25, abs=1e-4)
        assert series.p_right[-1] == pytest.approx(0.25, abs=1e-4)

    @allure.title("缀饰基完备：p_a + p_b = p_left + p_right")
    def test_basis_completeness(self, rng):
        params = make_params(rng.uniform(0.0, 2.0 * math.pi), j=2.0, d_over_l=0.07, gamma_prime=0.1)
        series = evolve(params, InitialState.RIGHT, 8.0, 801)
        np.testing.assert_allclose(series.p_a + series.p_b, series.norm, atol=1e-12)
        assert np.all(np.diff(series.norm) <= 1e-12)

    @allure.title("anti-Bragg、J = 3Γ1D：左原子布居振荡角频率 2J e^{-d/L} - Γ1D")
    def test_anti_bragg_frequency(self):
        series = evolve(make_params(ANTI_BRAGG, j=3.0, d_over_l=0.05))
        frequency = oscillation_frequency(series.times, series.p_left)
        assert frequency == pytest.approx(6.0 * math.exp(-0.05) - 1.0, rel=0.01)

    @allure.title("anti-Bragg 解耦点 2J e^{-d/L} = Γ1D：激发留在左原子")
    @pytest.mark.parametrize("gamma_prime", [0.0, 0.3])
    def test_decoupled_atoms(self, gamma_prime):
        params = make_params(ANTI_BRAGG, j=decoupling_strength(1.0, 0.05), d_over_l=0.05,
                             gamma_prime=gamma_prime)
        series = evolve(params, InitialState.LEFT, 10.0, 1001)

        assert np.max(series.p_right) < 1e-12
        np.testing.assert_allclose(series.p_left, np.exp(-(1.0 + gamma_prime) * series.times), rtol=1e-12)

        evolved = propagator(build_hamiltonian(params), series.times)
        assert np.max(np.abs(evolved[:, 0, 1])) < 1e-12
        assert np.max(np.abs(evolved[:, 1, 0])) < 1e-12

    @allure.title("CSV 列")
    def test_frame_columns(self, bragg_params):
        frame = evolve(bragg_params, "a", 1.0, 11).to_frame()
        assert list(frame.columns) == ["t", "p_left", "p_right", "p_a", "p_b", "norm"]
        assert frame["p_a"].iloc[0] == pytest.approx(1.0)


@allure.feature("动力学")
@allure.story("输入校验")
class TestInputs:

    @allure.title("初态描述")
    def test_resolve_initial(self):
        np.testing.assert_allclose(resolve_initial("B"), np.array([1.0, 1.0]) / math.sqrt(2.0))
        np.testing.assert_allclose(resolve_initial([0.6, 0.8j]), np.array([0.6, 0.8j]))
        with pytest.raises(InvalidParameter):
            resolve_initial("up")
        with pytest.raises(InvalidParameter):
            resolve_initial([1.0, 1.0])
        with pytest.raises(InvalidParameter):
            resolve_initial([0.0, 0.0])

    @allure.title("时间网格")
    def test_time_grid(self):
        assert len(time_grid(10.0, 2001)) == 2001
        with pytest.raises(InvalidParameter):
            time_grid(-1.0, 10)
        with pytest.raises(InvalidParameter):
            time_grid(1.0, 1)
