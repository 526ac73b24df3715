# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""Defines the files written by the command-line tool.

The fit artifact is JSON; floats are written with ``repr`` precision so a
reloaded fit reproduces the fitted values bit for bit.
"""

import hashlib
import json
import logging
import math
import pathlib
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .data_container import Dataset
from .distributions import ContinuousFamily
from .errors import DataError
from .links import get_link
from .model import (
    SUBMODELS,
    Convergence,
    FitOptions,
    SubmodelSpec,
    ZarFit,
    ZarModelSpec,
    restore_fit,
    wald_tests,
)
from .residuals import ResidualVector

logger = logging.getLogger(__name__)

#: int: artifact layout version
ARTIFACT_VERSION = 1

#: float: p-values below this print as "< 0.0001"
P_VALUE_FLOOR = 1e-4

PathLike = Union[str, pathlib.Path]


def format_p_value(p: float) -> str:
    if not math.isfinite(p):
        return ''
    if p < P_VALUE_FLOOR:
        return '< 0.0001'
    return f'{p:.4f}'


def fit_table(fit: ZarFit) -> pd.DataFrame:
    """Wald table: Equation, Variable, Estimate, Standard error, P-value."""
    table = wald_tests(fit)
    table['P-value'] = table['P-value'].map(format_p_value)
    return table[['Equation', 'Variable', 'Estimate', 'Standard error',
                  'P-value']]


def format_fit_report(fit: ZarFit) -> str:
    table = fit_table(fit)
    lines = [f'{fit.family.short_name} regression model '
             f'({fit.data.n} observations, '
             f'{int(fit.data.zero.sum())} zeros)', '']
    lines.append(table.to_string(
        index=False, float_format=lambda v: f'{v:.4f}'))
    conv = fit.convergence
    lines += [
        '',
        f'Log-likelihood: {fit.loglik:.4f}',
        f'Converged: {"yes" if conv.converged else "no"} '
        f'({conv.iterations} iterations, gradient norm {conv.grad_norm:.3g})',
    ]
    if not conv.converged:
        lines.append(f'Optimizer message: {conv.message}')
    return '\n'.join(lines) + '\n'


def data_digest(data: Dataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(data.y).tobytes())
    h.update(np.ascontiguousarray(data.covariates).tobytes())
    return h.hexdigest()


def _floats(values) -> list:
    # json has no NaN; unfitted blocks are stored as null
    return [None if not math.isfinite(v) else float(v)
            for v in np.asarray(values, dtype=float).reshape(-1)]


def _unfloats(values) -> np.ndarray:
    return np.array([np.nan if v is None else v for v in values], dtype=float)


def fit_artifact(fit: ZarFit) -> dict:
    spec = fit.spec
    submodels = {}
    for name in SUBMODELS:
        sub = spec.submodel(name)
        submodels[name] = {
            'covariates': [fit.data.names[j] for j in sub.columns],
            'link': sub.link.name,
            'intercept': sub.intercept,
        }
    conv = fit.convergence
    p = len(fit.coefficients)
    return {
        'version': ARTIFACT_VERSION,
        'family': spec.family.value,
        'submodels': submodels,
        'coefficients': _floats(fit.coefficients),
        'vcov': None if fit.vcov is None else _floats(fit.vcov),
        'dimension': p,
        'loglik': fit.loglik,
        'convergence': {'converged': conv.converged,
                        'iterations': conv.iterations,
                        'grad_norm': conv.grad_norm,
                        'message': conv.message},
        'options': {'max_iter': fit.options.max_iter,
                    'grad_tol': fit.options.grad_tol,
                    'start_strategy': fit.options.start_strategy,
                    'gradient': fit.options.gradient,
                    'blockwise': fit.options.blockwise},
        'n': fit.data.n,
        'data_sha256': data_digest(fit.data),
    }


def write_fit_artifact(fit: ZarFit, path: PathLike) -> pathlib.Path:
    path = pathlib.Path(path)
    path.write_text(json.dumps(fit_artifact(fit), indent=2) + '\n',
                    encoding='utf-8')
    return path


def load_fit_artifact(path: PathLike, data: Dataset) -> ZarFit:
    """Rebuild the fit stored at ``path`` on ``data``.

    Raises :class:`DataError` if ``data`` is not the dataset the fit was
    computed on.
    """
    path = pathlib.Path(path)
    try:
        art = json.loads(path.read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise DataError(f'fit artifact not found: {path}; run "zar fit" '
                        f'first') from None
    except json.JSONDecodeError as exc:
        raise DataError(f'fit artifact {path} is not valid JSON',
                        line=exc.lineno) from None
    if art.get('version') != ARTIFACT_VERSION:
        raise DataError(f'unsupported fit artifact version in {path}')
    if art['n'] != data.n or art['data_sha256'] != data_digest(data):
        raise DataError(f'fit artifact {path} was computed on other data')

    family = ContinuousFamily(art['family'])
    subs = {}
    for name in SUBMODELS:
        sub = art['submodels'][name]
        subs[name] = SubmodelSpec(data.column_indices(sub['covariates']),
                                  get_link(sub['link']), sub['intercept'])
    spec = ZarModelSpec(family=family, **subs)
    p = art['dimension']
    vcov = None if art['vcov'] is None else _unfloats(art['vcov']).reshape(p, p)
    conv = Convergence(**art['convergence'])
    options = FitOptions(**art['options'])
    return restore_fit(spec, data, _unfloats(art['coefficients']), vcov,
                       art['loglik'], conv, options)


def write_fit_report(fit: ZarFit, out_dir: PathLike) -> List[pathlib.Path]:
    """Write ``fit_report.txt``, ``fit_report.csv`` and ``fit.json``."""
    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text = out_dir / 'fit_report.txt'
    csv = out_dir / 'fit_report.csv'
    text.write_text(format_fit_report(fit), encoding='utf-8')
    fit_table(fit).to_csv(csv, index=False, float_format='%.6g')
    artifact = write_fit_artifact(fit, out_dir / 'fit.json')
    return [text, csv, artifact]


def residual_frame(fit: ZarFit, vectors: Sequence[ResidualVector]) -> pd.DataFrame:
    """One row per observation; undefined residuals are NaN."""
    frame = pd.DataFrame({
        'id': fit.data.ids, 'y': fit.data.y, 'mu_hat': fit.mu_hat,
        'phi_hat': fit.phi_hat, 'alpha_hat': fit.alpha_hat})
    for vector in vectors:
        frame[vector.kind.name] = np.ma.filled(
            vector.values.astype(float), np.nan)
    return frame


def write_residuals(fit: ZarFit, vectors: Sequence[ResidualVector],
                    path: PathLike) -> pathlib.Path:
    """Residual CSV; undefined residuals are empty cells."""
    path = pathlib.Path(path)
    residual_frame(fit, vectors).to_csv(
        path, index=False, na_rep='', float_format='%.17g')
    return path


def write_plot_data(fit: ZarFit, vectors: Sequence[ResidualVector],
                    out_dir: PathLike) -> List[pathlib.Path]:
    """``plot_<kind>.csv`` files of (mu_hat, residual) pairs."""
    out_dir = pathlib.Path(out_dir)
    paths = []
    for vector in vectors:
        defined = vector.defined
        path = out_dir / f'plot_{vector.kind.name}.csv'
        pd.DataFrame({
            'id': fit.data.ids[defined],
            'mu_hat': fit.mu_hat[defined],
            'residual': np.ma.compressed(vector.values),
        }).to_csv(path, index=False, float_format='%.17g')
        paths.append(path)
    return paths


def write_table(table: pd.DataFrame, path: PathLike,
                float_format: Optional[str] = '%.10g') -> pathlib.Path:
    path = pathlib.Path(path)
    table.to_csv(path, index=False, float_format=float_format)
    return path

