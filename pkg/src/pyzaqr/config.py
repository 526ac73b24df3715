# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""Defines the run configuration read from an INI file.

Layout (comma-separated values are lists)::

    [General]
    family = zabe
    response = score
    id = id

    [mu]
    covariates = x1, x2
    link = logit

    [phi]
    covariates =
    link = log

    [alpha]
    covariates = x1, x2
    link = logit

    [fit]
    max_iter = 500
    grad_tol = 1e-8

    [diagnose]
    kinds = randomized, zaqr
    deletion_rows = 242

    [envelope]
    kind = zaqr
    replicates = 100
    band = 2.5, 97.5

    [simulate]
    scenario = zabe-1
    reps = 1000
    kinds = zaqr
"""

import logging
import pathlib
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from PySide6 import QtCore

from .data_container import Dataset
from .distributions import ContinuousFamily
from .envelope import ENVELOPE_BAND, ENVELOPE_REPLICATES
from .errors import ConfigError, ZarError
from .links import get_link
from .model import GRAD_TOL, MAX_ITER, FitOptions, SubmodelSpec, ZarModelSpec
from .parallel import parse_seed
from .residuals import ZAQR, RANDOMIZED, ResidualKind, parse_kind
from .simulation import THRESHOLDS, ScenarioSpec, TailSpec, get_scenario

logger = logging.getLogger(__name__)

#: dict: default link of each submodel, by family
DEFAULT_LINKS = {
    'mu': {ContinuousFamily.BETA01: 'logit',
           ContinuousFamily.GAMMA: 'log',
           ContinuousFamily.INVERSE_GAUSSIAN: 'log'},
    'phi': 'log',
    'alpha': 'logit',
}

#: int: default number of simulation replicates
SIMULATION_REPS = 1000


@dataclass(frozen=True)
class SubmodelConfig:
    covariates: Tuple[str, ...] = ()
    link: str = 'log'
    intercept: bool = True


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs besides the data file."""

    family: Optional[ContinuousFamily] = None
    response: str = 'y'
    id_column: Optional[str] = None
    submodels: Dict[str, SubmodelConfig] = field(default_factory=dict)
    fit_options: FitOptions = field(default_factory=FitOptions)
    kinds: Tuple[ResidualKind, ...] = (RANDOMIZED, ZAQR)
    #: 1-based row numbers refitted without the row by ``zar diagnose``
    deletion_rows: Tuple[int, ...] = ()
    envelope_kind: ResidualKind = ZAQR
    envelope_replicates: int = ENVELOPE_REPLICATES
    #: None selects the min/max envelope
    envelope_band: Optional[Tuple[float, float]] = ENVELOPE_BAND
    scenario: Optional[ScenarioSpec] = None
    reps: int = SIMULATION_REPS
    sim_kinds: Tuple[ResidualKind, ...] = (ZAQR,)
    tails: TailSpec = field(default_factory=TailSpec)
    workers: int = 1
    seed: int = 0

    def model_spec(self, data: Dataset) -> ZarModelSpec:
        """Resolve covariate names against the dataset header."""
        if self.family is None:
            raise ConfigError('configuration does not name a family')
        subs = {}
        for name in ('mu', 'phi', 'alpha'):
            sub = self.submodels.get(name) or SubmodelConfig(
                link=_default_link(name, self.family))
            try:
                columns = data.column_indices(sub.covariates)
                link = get_link(sub.link)
            except ZarError as exc:
                raise ConfigError(f'[{name}] {exc}') from None
            subs[name] = SubmodelSpec(columns, link, sub.intercept)
        try:
            return ZarModelSpec(family=self.family, **subs)
        except ZarError as exc:
            raise ConfigError(str(exc)) from None

    def covariate_names(self) -> List[str]:
        """Covariate columns used by any submodel, in first-use order."""
        names = []
        for sub in self.submodels.values():
            names.extend(c for c in sub.covariates if c not in names)
        return names


def _default_link(name: str, family: ContinuousFamily) -> str:
    link = DEFAULT_LINKS[name]
    return link[family] if isinstance(link, dict) else link


def _strings(settings: QtCore.QSettings, key: str) -> List[str]:
    values = settings.value(key, [], type=list) or []
    return [str(v).strip() for v in values if str(v).strip()]


def _floats(settings: QtCore.QSettings, key: str) -> List[float]:
    try:
        return [float(v) for v in _strings(settings, key)]
    except ValueError:
        raise ConfigError(f'{key} must be a list of numbers') from None


def _number(settings: QtCore.QSettings, key: str, default, kind=float):
    if not settings.contains(key):
        return default
    text = str(settings.value(key)).strip()
    try:
        return _integer(text) if kind is int else kind(text)
    except ValueError:
        raise ConfigError(f'{key} must be a number, got {text!r}') from None


def _integer(text: str) -> int:
    # exact for any size; '07' is read as decimal
    try:
        return int(text, 0)
    except ValueError:
        return int(text, 10)


def _seed(settings: QtCore.QSettings, key: str, default: int) -> int:
    if not settings.contains(key):
        return default
    try:
        return parse_seed(str(settings.value(key)))
    except ValueError as exc:
        raise ConfigError(f'{key}: {exc}') from None


def _kinds(settings: QtCore.QSettings, key: str, default):
    names = _strings(settings, key)
    if not names:
        return default
    try:
        return tuple(parse_kind(name) for name in names)
    except ZarError as exc:
        raise ConfigError(f'{key}: {exc}') from None


def _scenario(settings: QtCore.QSettings) -> Optional[ScenarioSpec]:
    settings.beginGroup('simulate')
    try:
        overrides = {}
        if settings.contains('n'):
            overrides['n'] = _number(settings, 'n', None, int)
        if settings.contains('covariate_seed'):
            overrides['covariate_seed'] = _seed(settings, 'covariate_seed', 0)
        name = str(settings.value('scenario', '')).strip()
        if name and name != 'custom':
            return get_scenario(name, **overrides)
        if not settings.contains('beta_mu'):
            return None
        family = ContinuousFamily.parse(str(settings.value('family', '')))
        return ScenarioSpec(
            family=family,
            beta_mu=_floats(settings, 'beta_mu'),
            beta_phi=_floats(settings, 'beta_phi'),
            beta_alpha=_floats(settings, 'beta_alpha'),
            n_covariates=_number(settings, 'covariates', 2, int),
            mu_columns=[int(c) for c in _floats(settings, 'mu_columns')],
            phi_columns=[int(c) for c in _floats(settings, 'phi_columns')],
            alpha_columns=[int(c) for c in _floats(settings, 'alpha_columns')],
            mu_link=str(settings.value('mu_link', _default_link('mu', family))),
            phi_link=str(settings.value('phi_link', 'log')),
            alpha_link=str(settings.value('alpha_link', 'logit')),
            **overrides)
    except ZarError as exc:
        raise ConfigError(f'[simulate] {exc}') from None
    finally:
        settings.endGroup()


def load_config(path: Union[str, pathlib.Path]) -> RunConfig:
    """Read a :class:`RunConfig` from an INI file."""
    path = pathlib.Path(path)
    if not path.is_file():
        raise ConfigError(f'configuration file not found: {path}')
    settings = QtCore.QSettings(str(path), QtCore.QSettings.Format.IniFormat)
    if settings.status() != QtCore.QSettings.Status.NoError:
        raise ConfigError(f'cannot parse configuration file {path}')

    family = None
    if settings.contains('family'):
        try:
            family = ContinuousFamily.parse(str(settings.value('family')))
        except ZarError as exc:
            raise ConfigError(str(exc)) from None

    submodels = {}
    for name in ('mu', 'phi', 'alpha'):
        if name not in settings.childGroups():
            continue
        settings.beginGroup(name)
        default = _default_link(name, family) if family else 'log'
        submodels[name] = SubmodelConfig(
            covariates=tuple(_strings(settings, 'covariates')),
            link=str(settings.value('link', default)).strip(),
            intercept=str(settings.value('intercept', 'true')).lower()
            not in ('false', '0', 'no'))
        settings.endGroup()

    settings.beginGroup('fit')
    fit_options = FitOptions(
        max_iter=_number(settings, 'max_iter', MAX_ITER, int),
        grad_tol=_number(settings, 'grad_tol', GRAD_TOL),
        gradient=str(settings.value('gradient', 'analytic')),
        start_strategy=str(settings.value('start_strategy', 'glm')))
    settings.endGroup()

    settings.beginGroup('diagnose')
    kinds = _kinds(settings, 'kinds', (RANDOMIZED, ZAQR))
    deletion_rows = tuple(int(r) for r in _floats(settings, 'deletion_rows'))
    settings.endGroup()

    settings.beginGroup('envelope')
    envelope_kind = _kinds(settings, 'kind', (ZAQR,))[0]
    replicates = _number(settings, 'replicates', ENVELOPE_REPLICATES, int)
    band_text = _strings(settings, 'band')
    if band_text == ['minmax']:
        band = None
    elif band_text:
        band = tuple(_floats(settings, 'band'))
        if len(band) != 2:
            raise ConfigError('envelope band needs two percentiles')
    else:
        band = ENVELOPE_BAND
    env_workers = _number(settings, 'workers', 1, int)
    settings.endGroup()

    scenario = _scenario(settings)
    settings.beginGroup('simulate')
    reps = _number(settings, 'reps', SIMULATION_REPS, int)
    sim_kinds = _kinds(settings, 'kinds', (ZAQR,))
    try:
        tails = TailSpec(tuple(_floats(settings, 'thresholds')) or THRESHOLDS)
    except ZarError as exc:
        raise ConfigError(str(exc)) from None
    workers = _number(settings, 'workers', env_workers, int)
    settings.endGroup()

    logger.debug('read configuration from %s', path)
    return RunConfig(
        family=family,
        response=str(settings.value('response', 'y')).strip(),
        id_column=str(settings.value('id')).strip()
        if settings.contains('id') else None,
        submodels=submodels, fit_options=fit_options, kinds=kinds,
        deletion_rows=deletion_rows, envelope_kind=envelope_kind,
        envelope_replicates=replicates, envelope_band=band,
        scenario=scenario, reps=reps, sim_kinds=sim_kinds, tails=tails,
        workers=workers, seed=_seed(settings, 'seed', 0))


def write_config(path: Union[str, pathlib.Path], family: ContinuousFamily,
                 response: str, submodels: Dict[str, SubmodelConfig],
                 id_column: Optional[str] = None, **sections):
    """Write a model configuration in the layout :func:`load_config` reads.

    ``sections`` maps extra section names to ``{key: value}`` dicts.
    """
    settings = QtCore.QSettings(str(path), QtCore.QSettings.Format.IniFormat)
    settings.setValue('family', family.value)
    settings.setValue('response', response)
    if id_column:
        settings.setValue('id', id_column)
    for name, sub in submodels.items():
        settings.beginGroup(name)
        settings.setValue('covariates', list(sub.covariates))
        settings.setValue('link', sub.link)
        settings.endGroup()
    for section, values in sections.items():
        settings.beginGroup(section)
        for key, value in values.items():
            settings.setValue(key, value)
        settings.endGroup()
    settings.sync()
