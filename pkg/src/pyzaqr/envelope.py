# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""Defines the half-normal plot with a simulated envelope."""

import logging
import warnings
from dataclasses import replace
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from .distributions import (
    MeanDispersionParams,
    normal_quantile,
    sample_continuous,
    sample_zar,
)
from .errors import ConvergenceError, DomainError, SimulationError, ZarError
from .model import ZarFit, fit as fit_model
from .parallel import ENVELOPE_STREAM, map_replicates
from .residuals import ResidualKind, compute_residuals, parse_kind

logger = logging.getLogger(__name__)

#: int: default number of simulated replicates
ENVELOPE_REPLICATES = 100

#: int: smallest replicate count accepted
MIN_REPLICATES = 19

#: tuple of float: default percentile band
ENVELOPE_BAND = (2.5, 97.5)

#: float: largest share of replicates that may fail before giving up
MAX_DROPPED_FRACTION = 0.20


def halfnormal_scores(m: int) -> np.ndarray:
    """Expected half-normal order statistics ``Phi^-1((i + m - 1/8) / (2m + 1/2))``.
    """
    i = np.arange(1, m + 1, dtype=float)
    return np.atleast_1d(normal_quantile((i + m - 0.125) / (2.0 * m + 0.5)))


def _sorted_abs(values: np.ma.MaskedArray) -> np.ndarray:
    return np.sort(np.abs(np.ma.compressed(values)))


def simulate_response(fit: ZarFit, rng: np.random.Generator,
                      keep_zeros: bool = False) -> np.ndarray:
    """Response vector drawn from the fitted model.

    With ``keep_zeros`` the observed zero pattern is kept and only the
    positive rows are redrawn from the continuous part.
    """
    if not keep_zeros:
        return np.asarray(sample_zar(fit.params, rng, (fit.data.n,)))
    pos = fit.data.positive
    y = np.zeros(fit.data.n)
    cont = MeanDispersionParams(mu=fit.mu_hat[pos], phi=fit.phi_hat[pos])
    y[pos] = sample_continuous(fit.family, cont, rng, (int(pos.sum()),))
    return y


def _replicate(payload, index: int, rng: np.random.Generator):
    fit, kind = payload
    y = simulate_response(fit, rng, keep_zeros=not kind.defined_at_zeros)
    options = replace(fit.options, compute_vcov=False)
    try:
        refit = fit_model(fit.spec, fit.data.with_response(y), options)
    except ZarError as exc:
        logger.debug('envelope replicate %d failed: %s', index, exc)
        return None
    if not refit.converged:
        logger.debug('envelope replicate %d did not converge', index)
        return None
    return _sorted_abs(compute_residuals(refit, kind, rng).values)


def halfnormal_envelope(
    fit: ZarFit,
    kind: Union[ResidualKind, str],
    replicates: int = ENVELOPE_REPLICATES,
    band: Optional[Tuple[float, float]] = ENVELOPE_BAND,
    seed: int = 0,
    workers: Optional[int] = 1,
) -> pd.DataFrame:
    """Simulated envelope of the sorted absolute residuals.

    ``band=None`` gives the classical min/max envelope. Columns: i, score,
    lower, median, upper, observed. The number of dropped replicates is kept
    in ``attrs['dropped']``.
    """
    if isinstance(kind, str):
        kind = parse_kind(kind)
    if replicates < MIN_REPLICATES:
        raise DomainError(f'at least {MIN_REPLICATES} replicates are needed')
    if band is not None and not 0.0 <= band[0] < band[1] <= 100.0:
        raise DomainError(f'invalid percentile band {band}')
    if not fit.converged:
        raise ConvergenceError('envelope needs a converged fit')

    observed = _sorted_abs(
        compute_residuals(fit, kind, np.random.default_rng(seed)).values)
    m = observed.size
    results = map_replicates(
        _replicate, (fit, kind), replicates, seed, ENVELOPE_STREAM, workers)
    kept = [r for r in results if r is not None and r.size == m]
    dropped = replicates - len(kept)
    if dropped:
        message = f'{dropped} of {replicates} envelope replicates dropped'
        logger.warning(message)
        warnings.warn(message, RuntimeWarning, stacklevel=2)
    if dropped > MAX_DROPPED_FRACTION * replicates:
        raise SimulationError(
            f'{dropped} of {replicates} envelope replicates failed')

    sims = np.vstack(kept)
    if band is None:
        lower, upper = sims.min(axis=0), sims.max(axis=0)
    else:
        lower, upper = np.percentile(sims, band, axis=0)
    table = pd.DataFrame({
        'i': np.arange(1, m + 1),
        'score': halfnormal_scores(m),
        'lower': lower,
        'median': np.median(sims, axis=0),
        'upper': upper,
        'observed': observed,
    })
    table.attrs['dropped'] = dropped
    return table
