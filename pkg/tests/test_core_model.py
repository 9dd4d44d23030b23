#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
核心模型测试：参数校验、有效哈密顿量、闭式本征分解、缀饰态能级
"""

import math

import allure
import numpy as np
import pytest

from dimer.core_model import (
    BandEdgeParams,
    SpacingCase,
    SystemParams,
    bound_state_length,
    build_hamiltonian,
    d_over_l_from_length,
    decoupling_strength,
    dressed_scheme,
    dressed_scheme_sweep,
    eigensolve,
    params_at_spacing,
    pi_phase_condition,
)
from dimer.errors import AsymmetricInput, DegenerateSpectrum, InvalidParameter, WrongCase

from .conftest import ANTI_BRAGG, BRAGG, attach_frame, make_params


@allure.feature("核心模型")
@allure.story("参数校验")
class TestSystemParams:

    @allure.title("负速率与非有限值被拒绝")
    @pytest.mark.parametrize("field, value", [
        ("gamma_1d_1", -1.0),
        ("gamma_prime", -0.1),
        ("j_strength", -2.0),
        ("d_over_l", -0.1),
        ("kad", -1.0),
        ("delta", math.nan),
        ("j_strength", math.inf),
    ])
    def test_rejects_invalid_values(self, field, value):
        with pytest.raises(InvalidParameter):
            SystemParams(**{field: value})

    @allure.title("Bragg / anti-Bragg 情形识别")
    def test_spacing_case(self):
        assert make_params(BRAGG).spacing_case() is SpacingCase.BRAGG
        assert make_params(ANTI_BRAGG).spacing_case() is SpacingCase.ANTI_BRAGG
        assert make_params(1.0).spacing_case() is None

        with pytest.raises(WrongCase):
            make_params(ANTI_BRAGG).require_case(SpacingCase.BRAGG)

    @allure.title("弱驱动上限")
    def test_weak_drive_bound(self):
        make_params(omega_p_amp=0.01).check_weak_drive()
        with pytest.raises(InvalidParameter):
            make_params(omega_p_amp=0.5).check_weak_drive()

    @allure.title("对称性检查")
    def test_require_symmetric(self):
        with pytest.raises(AsymmetricInput):
            SystemParams(gamma_1d_1=1.2, gamma_1d_2=0.8).require_symmetric()


@allure.feature("核心模型")
@allure.story("有效哈密顿量")
class TestHamiltonian:

    @allure.title("Bragg 情形的矩阵元")
    def test_bragg_entries(self):
        params = make_params(BRAGG, j=1.0, d_over_l=0.1, gamma_prime=0.2, delta=0.3)
        matrix = build_hamiltonian(params).matrix

        bound = math.exp(-0.1)
        assert matrix[0, 0] == pytest.approx(1.0 - 0.3 - 0.5j * 1.2, abs=1e-14)
        assert matrix[1, 1] == pytest.approx(matrix[0, 0], abs=1e-14)
        assert matrix[0, 1] == pytest.approx(-bound + 0.5j, abs=1e-14)
        assert matrix[1, 0] == pytest.approx(matrix[0, 1], abs=1e-14)

    @allure.title("矩阵 = 相干部分 - (i/2) 衰减矩阵，且探测失谐只平移对角元")
    def test_decomposition_and_shift(self):
        params = make_params(1.3, j=0.7, d_over_l=0.2, gamma_prime=0.1)
        hamiltonian = build_hamiltonian(params)
        np.testing.assert_allclose(
            hamiltonian.matrix, hamiltonian.coherent_part - 0.5j * hamiltonian.decay_matrix, atol=1e-15
        )

        shifted = build_hamiltonian(params.replace(delta=0.4))
        np.testing.assert_allclose(shifted.matrix - hamiltonian.matrix, -0.4 * np.eye(2), atol=1e-14)
        np.testing.assert_allclose(shifted.decay_matrix, hamiltonian.decay_matrix, atol=0)
        assert shifted.trace == pytest.approx(hamiltonian.trace - 0.8, abs=1e-14)


@allure.feature("核心模型")
@allure.story("闭式本征分解")
class TestEigensolve:

    @allure.title("Bragg、Γ' = 0：超辐射态衰减 Γ1D，暗态衰减为零")
    def test_bragg_rates(self):
        params = make_params(BRAGG, j=1.0, d_over_l=0.1)
        eig = eigensolve(build_hamiltonian(params))

        assert eig.e1.imag == pytest.approx(-1.0, abs=1e-12)
        assert eig.e2.imag == pytest.approx(0.0, abs=1e-12)
        assert eig.e1.real == pytest.approx(1.0 + math.exp(-0.1), abs=1e-12)
        np.testing.assert_allclose(eig.psi1_r, np.array([-1.0, 1.0]) / math.sqrt(2.0), atol=1e-12)
        np.testing.assert_allclose(eig.psi2_r, np.array([1.0, 1.0]) / math.sqrt(2.0), atol=1e-12)

    @allure.title("随机非厄米矩阵：本征方程与双正交归一")
    def test_random_matrices(self, rng):
        for _ in range(50):
            matrix = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            eig = eigensolve(matrix)

            assert not eig.degenerate
            for energy, right, left in ((eig.e1, eig.psi1_r, eig.psi1_l), (eig.e2, eig.psi2_r, eig.psi2_l)):
                np.testing.assert_allclose(matrix @ right, energy * right, atol=1e-10)
                np.testing.assert_allclose(left @ matrix, energy * left, atol=1e-10)
            np.testing.assert_allclose(eig.left_vectors @ eig.right_vectors, np.eye(2), atol=1e-10)
            assert eig.e1 + eig.e2 == pytest.approx(np.trace(matrix), abs=1e-12)

    @allure.title("随机物理参数：本征值之和等于迹，且与通用数值解一致")
    def test_random_params(self, rng):
        for _ in range(10_000):
            params = SystemParams(
                gamma_1d_1=rng.uniform(0.1, 2.0),
                gamma_1d_2=rng.uniform(0.1, 2.0),
                gamma_prime=rng.uniform(0.0, 1.0),
                j_strength=rng.uniform(0.0, 5.0),
                kad=rng.uniform(0.0, 2.0 * math.pi),
                d_over_l=rng.uniform(0.0, 1.0),
                delta=rng.uniform(-5.0, 5.0),
            )
            hamiltonian = build_hamiltonian(params)
            eig = eigensolve(hamiltonian)
            scale = max(1.0, float(np.linalg.norm(hamiltonian.matrix)))

            assert abs(eig.e1 + eig.e2 - hamiltonian.trace) <= 1e-12 * scale
            reference = np.linalg.eigvals(hamiltonian.matrix)
            mismatch = min(
                np.max(np.abs(eig.eigenvalues - reference)),
                np.max(np.abs(eig.eigenvalues - reference[::-1])),
            )
            assert mismatch <= 1e-10 * scale

    @allure.title("对称衰减率：本征值与 E_A、E_B 闭式在 (k_a d, J, d/L) 网格上一致")
    def test_closed_form_levels(self):
        gamma_prime, delta = 0.1, 0.3
        for kad in np.linspace(0.0, 2.0 * math.pi, 25):
            for j in np.linspace(0.0, 5.0, 11):
                for d_over_l in np.linspace(0.0, 1.0, 11):
                    params = make_params(float(kad), j=float(j), d_over_l=float(d_over_l),
                                         gamma_prime=gamma_prime, delta=delta)
                    eig = eigensolve(build_hamiltonian(params))

                    shift = j * math.exp(-d_over_l) - 0.5 * math.sin(kad)
                    gamma_a = 1.0 + gamma_prime - math.cos(kad)
                    gamma_b = 1.0 + gamma_prime + math.cos(kad)
                    assert eig.e1 == pytest.approx(-delta + j + shift - 0.5j * gamma_a, abs=1e-12)
                    assert eig.e2 == pytest.approx(-delta + j - shift - 0.5j * gamma_b, abs=1e-12)

    @allure.title("复对称输入：左矢为右矢的转置（按双线性内积归一）")
    def test_complex_symmetric_left_vectors(self, anti_bragg_params):
        eig = eigensolve(build_hamiltonian(anti_bragg_params))
        for right, left in ((eig.psi1_r, eig.psi1_l), (eig.psi2_r, eig.psi2_l)):
            np.testing.assert_allclose(left, right / np.dot(right, right), atol=1e-12)

    @allure.title("例外点：发出 DegenerateSpectrum 警告而不抛出")
    def test_exceptional_point(self):
        matrix = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
        with pytest.warns(DegenerateSpectrum):
            eig = eigensolve(matrix)
        assert eig.degenerate
        assert eig.e1 == pytest.approx(1.0)
        assert eig.e2 == pytest.approx(1.0)

    @allure.title("非 2x2 或非有限输入被拒绝")
    def test_invalid_input(self):
        with pytest.raises(InvalidParameter):
            eigensolve(np.eye(3))
        with pytest.raises(InvalidParameter):
            eigensolve(np.array([[math.nan, 0.0], [0.0, 1.0]]))


@allure.feature("核心模型")
@allure.story("缀饰态能级")
class TestDressedScheme:

    @allure.title("k_a d = 0：|A> 亚辐射、|B> 超辐射")
    def test_zero_spacing(self):
        scheme = dressed_scheme(make_params(0.0, gamma_prime=0.1))
        assert scheme.gamma_a == pytest.approx(0.1)
        assert scheme.gamma_b == pytest.approx(2.1)

    @allure.title("Bragg：Γ^A = 2Γ1D、Γ^B = Γ'，劈裂 2J e^{-d/L}")
    def test_bragg(self):
        scheme = dressed_scheme(make_params(BRAGG, j=1.0, d_over_l=0.1))
        assert scheme.gamma_a == pytest.approx(2.0)
        assert scheme.gamma_b == pytest.approx(0.0, abs=1e-15)
        assert scheme.delta_ab == pytest.approx(2.0 * math.exp(-0.1), abs=1e-12)
        assert scheme.omega_a_level == pytest.approx(1.0 + math.exp(-0.1), abs=1e-12)

    @allure.title("Bragg、Γ' > 0：Γ^A = 2Γ1D + Γ'、Γ^B = Γ'，与本征值虚部一致")
    @pytest.mark.parametrize("gamma_prime", [0.0, 0.2, 0.7])
    def test_bragg_with_loss(self, gamma_prime):
        params = make_params(BRAGG, j=1.0, d_over_l=0.1, gamma_prime=gamma_prime)
        scheme = dressed_scheme(params)
        eig = eigensolve(build_hamiltonian(params))

        assert scheme.gamma_a == pytest.approx(2.0 + gamma_prime, abs=1e-12)
        assert scheme.gamma_b == pytest.approx(gamma_prime, abs=1e-12)
        assert -2.0 * eig.e1.imag == pytest.approx(scheme.gamma_a, abs=1e-12)
        assert -2.0 * eig.e2.imag == pytest.approx(scheme.gamma_b, abs=1e-12)

    @allure.title("anti-Bragg：劈裂 2J e^{-d/L} - Γ1D")
    def test_anti_bragg(self):
        scheme = dressed_scheme(make_params(ANTI_BRAGG, j=3.0, d_over_l=0.05))
        assert scheme.delta_ab == pytest.approx(4.7073, abs=1e-4)
        assert scheme.gamma_a == pytest.approx(scheme.gamma_b)

    @allure.title("非对称衰减率被拒绝")
    def test_asymmetric_rejected(self):
        with pytest.raises(AsymmetricInput):
            dressed_scheme(SystemParams(gamma_1d_1=1.1, gamma_1d_2=0.9))

    @allure.title("固定局域长度扫描 k_a d")
    def test_sweep_with_fixed_length(self):
        base = make_params(BRAGG, j=0.5)
        kads = np.linspace(0.0, 2.0 * math.pi, 9)
        frame = dressed_scheme_sweep(base, kads, ka_l=10.0 * math.pi)
        attach_frame(frame, "levels")

        assert list(frame.columns) == ["kad", "omega_a", "omega_b", "gamma_a", "gamma_b", "delta_ab"]
        middle = frame.iloc[4]
        expected = dressed_scheme(make_params(BRAGG, j=0.5, d_over_l=0.1))
        assert middle["omega_a"] == pytest.approx(expected.omega_a_level, abs=1e-12)
        np.testing.assert_allclose(frame["gamma_a"] + frame["gamma_b"], 2.0, atol=1e-12)


@allure.feature("核心模型")
@allure.story("辅助量")
class TestHelpers:

    @allure.title("局域长度 L = d sqrt(α/δ)")
    def test_bound_state_length(self):
        assert bound_state_length(BandEdgeParams(alpha=4.0, delta_edge=1.0, d_cell=0.5)) == pytest.approx(1.0)
        with pytest.raises(InvalidParameter):
            BandEdgeParams(alpha=1.0, delta_edge=-0.1)

    @allure.title("k_a L = 10π 时 d/L = k_a d / 10π")
    def test_d_over_l_from_length(self):
        assert d_over_l_from_length(BRAGG) == pytest.approx(0.1)
        assert d_over_l_from_length(ANTI_BRAGG) == pytest.approx(0.05)
        assert params_at_spacing(make_params(), 1.05 * math.pi, 10.0 * math.pi).d_over_l == pytest.approx(0.105)
        with pytest.raises(InvalidParameter):
            d_over_l_from_length(BRAGG, 0.0)

    @allure.title("2J e^{-d/L} = Γ1D 的解耦强度与 π 相移条件")
    def test_decoupling_strength(self):
        j = decoupling_strength(1.0, 0.05)
        assert 2.0 * j * math.exp(-0.05) == pytest.approx(1.0)
        assert pi_phase_condition(make_params(ANTI_BRAGG, j=j, d_over_l=0.05))
        assert not pi_phase_condition(make_params(ANTI_BRAGG, j=j, d_over_l=0.05, gamma_prime=0.1))
        assert not pi_phase_condition(make_params(BRAGG, j=j, d_over_l=0.05))
