# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""Defines the container class for response and covariate data."""
import logging
import pathlib
import re
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .distributions import ContinuousFamily
from .errors import DataError

logger = logging.getLogger(__name__)

#: str: column name given to the intercept in coefficient tables
INTERCEPT = '(Intercept)'


@dataclass(frozen=True)
class Dataset:
    """Nonnegative responses with their covariates.

    ``covariates`` has one column per entry of ``names``; submodel design
    matrices select columns by index and optionally prepend an intercept.
    """

    #: np.ndarray of float64, shape (n,)
    y: np.ndarray

    #: np.ndarray of float64, shape (n, k)
    covariates: np.ndarray

    #: List[str] of covariate column names
    names: List[str] = field(default_factory=list)

    #: np.ndarray of str, shape (n,); defaults to 1-based row numbers
    ids: Optional[np.ndarray] = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).reshape(-1)
        x = np.asarray(self.covariates, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1) if x.size else np.empty((y.size, 0))
        if x.shape[0] != y.size:
            raise DataError(
                f'{x.shape[0]} covariate rows for {y.size} responses')
        names = list(self.names) or [f'x{j + 1}' for j in range(x.shape[1])]
        if len(names) != x.shape[1]:
            raise DataError(
                f'{len(names)} names for {x.shape[1]} covariate columns')
        ids = np.arange(1, y.size + 1).astype(str) if self.ids is None \
            else np.asarray(self.ids).astype(str)
        if ids.size != y.size:
            raise DataError(f'{ids.size} identifiers for {y.size} responses')
        if not np.all(np.isfinite(y)) or not np.all(np.isfinite(x)):
            raise DataError('responses and covariates must be finite')
        if np.any(y < 0.0):
            raise DataError('responses must be nonnegative')
        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'covariates', x)
        object.__setattr__(self, 'names', names)
        object.__setattr__(self, 'ids', ids)

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def zero(self) -> np.ndarray:
        return self.y == 0.0

    @property
    def positive(self) -> np.ndarray:
        return self.y > 0.0

    def column_indices(self, names: Sequence[str]) -> List[int]:
        """Covariate indices of the given column names."""
        missing = [name for name in names if name not in self.names]
        if missing:
            raise DataError(f'unknown covariate column(s): {missing}')
        return [self.names.index(name) for name in names]

    def design(self, columns: Sequence[int], intercept: bool = True):
        """Design matrix with an optional leading intercept column."""
        x = self.covariates[:, list(columns)]
        if intercept:
            x = np.column_stack((np.ones(self.n), x))
        return x

    def design_names(self, columns: Sequence[int], intercept: bool = True):
        names = [self.names[j] for j in columns]
        return [INTERCEPT] + names if intercept else names

    def subset(self, rows) -> 'Dataset':
        """Dataset restricted to the given rows (mask or indices)."""
        return Dataset(
            y=self.y[rows],
            covariates=self.covariates[rows],
            names=self.names,
            ids=self.ids[rows])

    def with_response(self, y: np.ndarray) -> 'Dataset':
        """Same covariates and identifiers with a new response vector."""
        return Dataset(
            y=y, covariates=self.covariates, names=self.names, ids=self.ids)

    def validate_for(self, family: ContinuousFamily):
        """Raise :class:`DataError` if a response is outside the model support.
        """
        if family is ContinuousFamily.BETA01 and np.any(self.y >= 1.0):
            row = int(np.argmax(self.y >= 1.0))
            raise DataError(
                f'response {self.y[row]} of observation {self.ids[row]} is '
                f'not below 1, as the beta family requires')


def read_csv(
    path: Union[str, pathlib.Path],
    response: str,
    covariates: Optional[Sequence[str]] = None,
    id_column: Optional[str] = None,
) -> Dataset:
    """Read a UTF-8 CSV file with a header row into a :class:`Dataset`.

    Every column other than ``id_column`` must be numeric ('.' decimal).
    Errors name the offending file line (the header is line 1).
    """
    path = pathlib.Path(path)
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, encoding='utf-8',
            skipinitialspace=True)
    except FileNotFoundError:
        raise DataError(f'data file not found: {path}') from None
    except pd.errors.EmptyDataError:
        raise DataError(f'data file is empty: {path}') from None
    except pd.errors.ParserError as exc:
        # pandas reports e.g. "Expected 3 fields in line 7, saw 4"
        match = re.search(r'line (\d+)', str(exc))
        line = int(match.group(1)) if match else None
        raise DataError(f'malformed CSV row in {path}', line=line) from None

    frame.columns = [str(col).strip() for col in frame.columns]
    if response not in frame.columns:
        raise DataError(f'response column {response!r} not in {path} header')
    if id_column is not None and id_column not in frame.columns:
        raise DataError(f'id column {id_column!r} not in {path} header')
    if covariates is None:
        covariates = [col for col in frame.columns
                      if col not in (response, id_column)]
    missing = [col for col in covariates if col not in frame.columns]
    if missing:
        raise DataError(f'covariate column(s) {missing} not in {path} header')

    def numeric(column: str) -> np.ndarray:
        values = pd.to_numeric(frame[column].str.strip(), errors='coerce')
        bad = values.isna().to_numpy()
        if bad.any():
            row = int(np.argmax(bad))
            raise DataError(
                f'non-numeric value {frame[column].iloc[row]!r} in column '
                f'{column!r}', line=row + 2)
        return values.to_numpy(dtype=float)

    y = numeric(response)
    bad = y < 0.0
    if bad.any():
        raise DataError(
            f'negative response {y[np.argmax(bad)]}', line=int(np.argmax(bad)) + 2)
    x = np.column_stack([numeric(col) for col in covariates]) \
        if covariates else np.empty((len(frame), 0))
    ids = frame[id_column].to_numpy(dtype=str) if id_column else None
    logger.info('read %d rows and %d covariates from %s',
                len(frame), len(covariates), path)
    return Dataset(y=y, covariates=x, names=list(covariates), ids=ids)


def write_csv(data: Dataset, path: Union[str, pathlib.Path],
              response: str = 'y', id_column: Optional[str] = 'id'):
    """Write a dataset in the layout :func:`read_csv` reads."""
    columns = {}
    if id_column:
        columns[id_column] = data.ids
    columns[response] = data.y
    for j, name in enumerate(data.names):
        columns[name] = data.covariates[:, j]
    pd.DataFrame(columns).to_csv(path, index=False, float_format='%.17g')
