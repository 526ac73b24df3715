# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""Defines the Monte Carlo study of residual tail calibration.

Each replicate draws a response vector from a known zero-adjusted model with
fixed covariates, refits the model and counts, per observation and threshold,
how often each residual falls beyond the threshold. Undefined residuals (zero
responses) count as not exceeding any threshold.
"""

import hashlib
import json
import logging
import math
import pathlib
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .data_container import Dataset
from .distributions import (
    ContinuousFamily,
    ZeroAdjustedParams,
    normal_cdf,
    sample_zar,
)
from .errors import DomainError, SimulationError, ZarError
from .links import get_link
from .model import FitOptions, SubmodelSpec, ZarModelSpec, fit
from .parallel import COVARIATE_STREAM, SIMULATION_STREAM, map_replicates, \
    replicate_rng
from .residuals import ResidualKind, ZAQR, compute_residuals, parse_kind, \
    star_residual

logger = logging.getLogger(__name__)

#: tuple of float: default tail thresholds
THRESHOLDS = (-3.0, -2.0, -1.0, 1.0, 2.0, 3.0)

#: float: largest share of replicates whose fit may fail
MAX_FAILED_FRACTION = 0.02

#: int: default seed of the fixed covariate draw
COVARIATE_SEED = 2019

#: list of str: statistics of the summary table, in column order
STAT_NAMES = ['Min', 'Q1', 'Median', 'Mean', 'Q3', 'Max']


@dataclass(frozen=True)
class TailSpec:
    thresholds: Tuple[float, ...] = THRESHOLDS

    def __post_init__(self):
        values = tuple(float(t) for t in self.thresholds)
        if not values:
            raise DomainError('at least one threshold is needed')
        if any(t == 0.0 or not math.isfinite(t) for t in values):
            raise DomainError('thresholds must be finite and nonzero')
        if list(values) != sorted(set(values)):
            raise DomainError('thresholds must be sorted and distinct')
        object.__setattr__(self, 'thresholds', values)

    @property
    def labels(self) -> List[str]:
        return [f'< {t:g}' if t < 0 else f'> {t:g}' for t in self.thresholds]

    def exceed(self, values: np.ma.MaskedArray) -> np.ndarray:
        """(n, T) indicator of residuals beyond each threshold."""
        r = np.ma.filled(np.ma.asarray(values, dtype=float), 0.0)
        defined = ~np.ma.getmaskarray(values)
        t = np.asarray(self.thresholds)
        beyond = np.where(t < 0, r[:, None] < t, r[:, None] > t)
        return beyond & defined[:, None]


@dataclass(frozen=True)
class ScenarioSpec:
    """True model of a simulation study.

    Covariates are either given as ``covariates`` or drawn once from the
    standard uniform distribution with ``covariate_seed``, then held fixed.
    """

    family: ContinuousFamily
    beta_mu: Tuple[float, ...]
    beta_phi: Tuple[float, ...]
    beta_alpha: Tuple[float, ...]
    n: int = 100
    n_covariates: int = 2
    mu_columns: Tuple[int, ...] = (0, 1)
    phi_columns: Tuple[int, ...] = ()
    alpha_columns: Tuple[int, ...] = (0, 1)
    mu_link: str = 'logit'
    phi_link: str = 'log'
    alpha_link: str = 'logit'
    covariate_seed: int = COVARIATE_SEED
    name: str = 'custom'
    covariates: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        for key in ('beta_mu', 'beta_phi', 'beta_alpha', 'mu_columns',
                    'phi_columns', 'alpha_columns'):
            cast = int if key.endswith('columns') else float
            object.__setattr__(
                self, key, tuple(cast(v) for v in getattr(self, key)))
        if self.n < 1:
            raise DomainError('scenario needs n >= 1')
        if self.covariates is None:
            rng = replicate_rng(self.covariate_seed, 0, COVARIATE_STREAM)
            x = rng.random((self.n, self.n_covariates))
        else:
            x = np.array(self.covariates, dtype=float)
            if x.shape[0] != self.n:
                raise DomainError(
                    f'{x.shape[0]} covariate rows for n = {self.n}')
            object.__setattr__(self, 'n_covariates', x.shape[1])
        x.setflags(write=False)
        object.__setattr__(self, 'covariates', x)
        spec = self.model_spec()
        for name, beta in zip(('mu', 'phi', 'alpha'),
                              (self.beta_mu, self.beta_phi, self.beta_alpha)):
            size = spec.submodel(name).size
            if len(beta) != size:
                raise DomainError(
                    f'{name} needs {size} coefficients, got {len(beta)}')
        # raises DomainError when a parameter leaves its range
        self.true_params()

    def model_spec(self) -> ZarModelSpec:
        return ZarModelSpec(
            family=self.family,
            mu=SubmodelSpec(self.mu_columns, get_link(self.mu_link)),
            phi=SubmodelSpec(self.phi_columns, get_link(self.phi_link)),
            alpha=SubmodelSpec(self.alpha_columns, get_link(self.alpha_link)))

    def dataset(self, y: Optional[np.ndarray] = None) -> Dataset:
        if y is None:
            y = np.ones(self.n) * (0.5 if self.family is ContinuousFamily.BETA01
                                   else 1.0)
        return Dataset(y=y, covariates=self.covariates)

    def true_params(self) -> ZeroAdjustedParams:
        spec = self.model_spec()
        design = {
            name: self.dataset().design(spec.submodel(name).columns)
            for name in ('mu', 'phi', 'alpha')}
        with np.errstate(all='ignore'):
            mu = spec.mu.link.inverse(design['mu'] @ np.array(self.beta_mu))
            phi = spec.phi.link.inverse(design['phi'] @ np.array(self.beta_phi))
            alpha = spec.alpha.link.inverse(
                design['alpha'] @ np.array(self.beta_alpha))
        return ZeroAdjustedParams.from_arrays(self.family, alpha, mu, phi)

    def parameter_ranges(self) -> Dict[str, Tuple[float, float]]:
        """Smallest and largest true value of ``mu``, ``phi`` and ``alpha``."""
        p = self.true_params()
        mu, phi = p.cont.arrays()
        alpha = np.asarray(p.alpha)
        return {name: (float(np.min(v)), float(np.max(v)))
                for name, v in (('mu', mu), ('phi', phi), ('alpha', alpha))}

    def to_dict(self) -> dict:
        return {
            'name': self.name, 'family': self.family.value, 'n': self.n,
            'beta_mu': list(self.beta_mu), 'beta_phi': list(self.beta_phi),
            'beta_alpha': list(self.beta_alpha),
            'mu_columns': list(self.mu_columns),
            'phi_columns': list(self.phi_columns),
            'alpha_columns': list(self.alpha_columns),
            'links': [self.mu_link, self.phi_link, self.alpha_link],
            'covariate_seed': self.covariate_seed,
            'covariates': self.covariates.tolist(),
        }

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form (covariates included)."""
        text = json.dumps(self.to_dict(), sort_keys=True,
                          separators=(',', ':'))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()


def zabe_scenario_1(n: int = 100,
                    covariate_seed: int = COVARIATE_SEED) -> ScenarioSpec:
    """Beta scenario: mu in (0.076, 0.378), phi = 54.6, alpha in (0.182, 0.5).
    """
    return ScenarioSpec(
        family=ContinuousFamily.BETA01, beta_mu=(-1.5, -1.0, 1.0),
        beta_phi=(4.0,), beta_alpha=(-0.5, 0.5, -1.0), n=n,
        covariate_seed=covariate_seed, name='zabe-1')


def zabe_scenario_phi(n: int = 100,
                      covariate_seed: int = COVARIATE_SEED) -> ScenarioSpec:
    """Beta scenario with a covariate in the precision submodel."""
    return replace(zabe_scenario_1(n, covariate_seed), beta_phi=(3.5, 1.0),
                   phi_columns=(0,), name='zabe-phi')


def zaig_scenario_1(n: int = 100,
                    covariate_seed: int = COVARIATE_SEED) -> ScenarioSpec:
    """Inverse Gaussian scenario: mu in (20.9, 403.4), phi = 0.02, alpha in
    (0.27, 0.62)."""
    return ScenarioSpec(
        family=ContinuousFamily.INVERSE_GAUSSIAN,
        beta_mu=(math.log(20.9), 1.5, math.log(403.4 / 20.9) - 1.5),
        beta_phi=(math.log(0.02),), beta_alpha=(-0.99, 0.5, 0.98),
        n=n, mu_link='log', covariate_seed=covariate_seed, name='zaig-1')


def zaga_scenario_1(n: int = 100,
                    covariate_seed: int = COVARIATE_SEED) -> ScenarioSpec:
    """Gamma scenario with ``log mu = 1 + 0.5 x1 - 0.5 x2`` and phi = 0.5."""
    return ScenarioSpec(
        family=ContinuousFamily.GAMMA, beta_mu=(1.0, 0.5, -0.5),
        beta_phi=(math.log(0.5),), beta_alpha=(-0.5, 0.5, -1.0), n=n,
        mu_link='log', covariate_seed=covariate_seed, name='zaga-1')


#: named scenario factories accepted by ``zar simulate``
PRESETS: Dict[str, Callable[..., ScenarioSpec]] = {
    'zabe-1': zabe_scenario_1,
    'zabe-1-n50': lambda n=50, **kw: zabe_scenario_1(n, **kw),
    'zabe-phi': zabe_scenario_phi,
    'zaig-1': zaig_scenario_1,
    'zaga-1': zaga_scenario_1,
}


def get_scenario(name: str, **overrides) -> ScenarioSpec:
    try:
        factory = PRESETS[name.strip().lower()]
    except KeyError:
        raise DomainError(
            f'unknown scenario {name!r}; expected one of {sorted(PRESETS)}') \
            from None
    return factory(**overrides)


@dataclass(frozen=True)
class SimReport:
    """Exceedance counts of a study, per kind, observation and threshold."""

    scenario: ScenarioSpec
    kinds: Tuple[ResidualKind, ...]
    tails: TailSpec
    reps: int
    seed: int
    failed: int
    #: kind name -> (n, T) integer counts over successful replicates
    counts: Dict[str, np.ndarray]

    @property
    def valid_reps(self) -> int:
        return self.reps - self.failed

    def percentages(self, kind: Union[ResidualKind, str]) -> np.ndarray:
        name = kind if isinstance(kind, str) else kind.name
        return 100.0 * self.counts[name] / self.valid_reps

    def summary(self) -> pd.DataFrame:
        """Descriptive statistics over observations, one row per kind and
        threshold."""
        theory = theoretical_percentages(self.tails.thresholds)
        rows = []
        for kind in self.kinds:
            pct = self.percentages(kind)
            for j, label in enumerate(self.tails.labels):
                stats = descriptive_stats(pct[:, j])
                rows.append({'Residual': kind.name, 'Interval': label,
                             'Theoretical': theory[j], **stats})
        return pd.DataFrame(
            rows, columns=['Residual', 'Interval', 'Theoretical'] + STAT_NAMES)

    def per_observation(self) -> pd.DataFrame:
        frames = []
        for kind in self.kinds:
            frame = pd.DataFrame(self.percentages(kind),
                                 columns=self.tails.labels)
            frame.insert(0, 'Observation', np.arange(1, self.scenario.n + 1))
            frame.insert(0, 'Residual', kind.name)
            frames.append(frame)
        return pd.concat(frames, ignore_index=True)

    def metadata(self) -> dict:
        return {
            'scenario': self.scenario.name,
            'scenario_sha256': self.scenario.digest(),
            'family': self.scenario.family.value,
            'n': self.scenario.n,
            'reps': self.reps,
            'seed': self.seed,
            'failed': self.failed,
            'kinds': [k.name for k in self.kinds],
            'thresholds': list(self.tails.thresholds),
        }


def descriptive_stats(values: Sequence[float]) -> Dict[str, float]:
    """Min, quartiles (linear interpolation), median, mean and max."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise DomainError('descriptive statistics need at least one value')
    q = np.percentile(values, [0, 25, 50, 75, 100])
    return {'Min': float(q[0]), 'Q1': float(q[1]), 'Median': float(q[2]),
            'Mean': float(np.clip(values.mean(), q[0], q[4])),
            'Q3': float(q[3]), 'Max': float(q[4])}


def theoretical_percentages(thresholds: Sequence[float]) -> np.ndarray:
    """Standard normal tail percentages beyond each threshold."""
    t = np.asarray(thresholds, dtype=float)
    return 100.0 * np.where(t < 0, normal_cdf(t), normal_cdf(-t))


def star_calibration(alpha: float, thresholds: Sequence[float], draws: int,
                     rng: np.random.Generator) -> pd.DataFrame:
    """Tail frequencies of star residuals of standard normal draws.

    Each draw is a zero with probability ``alpha`` (undefined, so never
    beyond a threshold); otherwise a standard normal component residual is
    mapped through :func:`star_residual`. Thresholds are positive ``k``;
    columns: k, below (share < -k), above (share > k), theoretical.
    """
    zero = rng.random(draws) < alpha
    r = star_residual(rng.standard_normal(draws), alpha)
    k = np.asarray(thresholds, dtype=float)
    below = np.array([np.mean((r < -t) & ~zero) for t in k])
    above = np.array([np.mean((r > t) & ~zero) for t in k])
    return pd.DataFrame({'k': k, 'below': below, 'above': above,
                         'theoretical': np.atleast_1d(normal_cdf(-k))})


def _replicate(payload, index: int, rng: np.random.Generator):
    scenario, params, kinds, tails, options = payload
    y = np.asarray(sample_zar(params, rng, (scenario.n,)))
    try:
        result = fit(scenario.model_spec(), scenario.dataset(y), options)
        if not result.converged:
            logger.debug('replicate %d did not converge', index)
            return None
        return [tails.exceed(compute_residuals(result, kind, rng).values)
                for kind in kinds]
    except ZarError as exc:
        logger.debug('replicate %d failed: %s', index, exc)
        return None


def run_study(
    scenario: ScenarioSpec,
    reps: int,
    kinds: Sequence[Union[ResidualKind, str]] = (ZAQR,),
    seed: int = 0,
    workers: Optional[int] = 1,
    tails: Optional[TailSpec] = None,
    options: Optional[FitOptions] = None,
) -> SimReport:
    """Run ``reps`` replicates of ``scenario`` and tally tail exceedances.

    Replicates whose fit fails or does not converge are left out of every
    denominator; more than ``MAX_FAILED_FRACTION`` of them is an error.
    """
    if reps < 1:
        raise DomainError('reps must be at least 1')
    kinds = tuple(parse_kind(k) if isinstance(k, str) else k for k in kinds)
    if not kinds:
        raise DomainError('at least one residual kind is needed')
    tails = tails or TailSpec()
    options = options or FitOptions(compute_vcov=False)
    payload = (scenario, scenario.true_params(), kinds, tails, options)
    logger.info('simulating %s: %d replicates of n = %d',
                scenario.name, reps, scenario.n)
    results = map_replicates(
        _replicate, payload, reps, seed, SIMULATION_STREAM, workers)

    failed = sum(r is None for r in results)
    if failed > MAX_FAILED_FRACTION * reps or failed == reps:
        raise SimulationError(
            f'{failed} of {reps} replicates failed to converge')
    if failed:
        logger.warning('%d of %d replicates failed and were excluded',
                       failed, reps)
    counts = {kind.name: np.zeros((scenario.n, len(tails.thresholds)),
                                  dtype=np.int64) for kind in kinds}
    for result in results:
        if result is None:
            continue
        for kind, beyond in zip(kinds, result):
            counts[kind.name] += beyond
    return SimReport(scenario=scenario, kinds=kinds, tails=tails, reps=reps,
                     seed=seed, failed=failed, counts=counts)


def write_report(report: SimReport, out_dir: Union[str, pathlib.Path],
                 stem: str = 'simulation') -> List[pathlib.Path]:
    """Write the summary CSV, the per-observation CSV and the JSON sidecar."""
    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = out_dir / f'{stem}_summary.csv'
    observations = out_dir / f'{stem}_observations.csv'
    sidecar = out_dir / f'{stem}.json'
    report.summary().to_csv(summary, index=False, float_format='%.4f')
    report.per_observation().to_csv(observations, index=False,
                                    float_format='%.4f')
    sidecar.write_text(
        json.dumps(report.metadata(), indent=2, sort_keys=True) + '\n',
        encoding='utf-8')
    logger.info('wrote simulation report to %s', out_dir)
    return [summary, observations, sidecar]


def simulated_dataset(scenario: ScenarioSpec, seed: int) -> Dataset:
    """One response vector drawn from the scenario, with its covariates."""
    rng = np.random.default_rng(seed)
    y = np.asarray(sample_zar(scenario.true_params(), rng, (scenario.n,)))
    return scenario.dataset(y)


def true_coefficients(scenario: ScenarioSpec) -> np.ndarray:
    return np.concatenate((scenario.beta_mu, scenario.beta_phi,
                           scenario.beta_alpha))
