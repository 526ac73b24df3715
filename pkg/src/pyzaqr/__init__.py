# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""The pyzaqr package: zero-adjusted regression models and their residuals."""

from .data_container import Dataset, read_csv
from .distributions import (
    ContinuousFamily,
    MeanDispersionParams,
    ZeroAdjustedParams,
)
from .envelope import halfnormal_envelope
from .errors import (
    ConfigError,
    ConvergenceError,
    CovarianceError,
    DataError,
    DomainError,
    RankDeficiencyError,
    SimulationError,
    ZarError,
)
from .model import (
    FitOptions,
    SubmodelSpec,
    ZarFit,
    ZarModelSpec,
    fit,
    predict,
    wald_tests,
)
from .residuals import ResidualKind, ResidualVector, compute_residuals, zaqr
from .simulation import ScenarioSpec, SimReport, TailSpec, run_study

__all__ = [
    'ConfigError', 'ContinuousFamily', 'ConvergenceError', 'CovarianceError',
    'DataError', 'Dataset', 'DomainError', 'FitOptions',
    'MeanDispersionParams', 'RankDeficiencyError', 'ResidualKind',
    'ResidualVector', 'ScenarioSpec', 'SimReport', 'SimulationError',
    'SubmodelSpec', 'TailSpec', 'ZarError', 'ZarFit', 'ZarModelSpec',
    'ZeroAdjustedParams', 'compute_residuals', 'fit', 'halfnormal_envelope',
    'predict', 'read_csv', 'run_study', 'wald_tests', 'zaqr',
]
