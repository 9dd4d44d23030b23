#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
光子晶体波导带边双原子系统模拟库

非厄米有效哈密顿量、单光子散射谱、单激发动力学、反射场二阶关联以及间距/衰减率缺陷分析
"""

from .core_model import (
    BandEdgeParams,
    DressedLevelScheme,
    EffectiveHamiltonian,
    EigenSystem,
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
from .correlation import (
    CorrelationTrace,
    TwoExcitationState,
    beat_analysis,
    g2_master_equation_oracle,
    g2_reflected,
    steady_state_hierarchy,
)
from .dynamics import InitialState, TimeSeries, closed_form_populations, evolve
from .errors import DegenerateSpectrum, DimerError, NumericFailure, ParameterError
from .imperfections import (
    AsymmetryParams,
    DeviationParams,
    FanoFeature,
    asymmetric_bragg_dynamics,
    asymmetric_dressed_basis,
    deviation_dynamics,
    fano_scan,
)
from .run_config import RunConfig, parse_config
from .scattering import (
    Incidence,
    PeakInfo,
    ScatterPoint,
    SpectrumGrid,
    peak_analysis,
    scatter_amplitudes,
    scatter_via_steady_state,
    spectrum,
)

__version__ = "1.0.0"
