# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""Defines the exception classes raised by pyzaqr."""

from typing import Optional, Sequence


class ZarError(Exception):
    """Base class of every error raised by the package."""


class DomainError(ZarError, ValueError):
    """An argument lies outside a support or a probability range."""


class DataError(ZarError, ValueError):
    """Input data is malformed or cannot be modelled."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)
        self.line = line


class RankDeficiencyError(DataError):
    """A submodel design matrix does not have full column rank."""

    def __init__(self, submodel: str, columns: Sequence[str]):
        names = ', '.join(columns)
        super().__init__(
            f'design matrix of the {submodel} submodel is rank deficient; '
            f'collinear column(s): {names}')
        self.submodel = submodel
        self.columns = list(columns)


class ConfigError(ZarError, ValueError):
    """The run configuration is invalid."""


class CovarianceError(ZarError):
    """The estimated covariance matrix cannot be used for inference."""


class ConvergenceError(ZarError):
    """The optimizer did not converge."""


class SimulationError(ZarError):
    """Too many Monte Carlo replicates failed."""
