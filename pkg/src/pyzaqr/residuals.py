# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""Defines the residuals of a zero-adjusted regression fit.

Component residuals (quantile, deviance, Pearson, Anscombe, Williams) only
describe the continuous part and are masked at zero responses. The star
transform folds the fitted zero probability into any component residual;
applied to the quantile residual it gives the zero adjusted quantile residual
(ZAQR). The randomized quantile residual and the binary residual of the zero
indicator are defined for every observation.

Every function returns a :class:`numpy.ma.MaskedArray` with one entry per
observation of ``fit.data``.
"""

import enum
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import linalg, special

from .distributions import (
    NORMAL_CLAMP_HIGH,
    NORMAL_CLAMP_LOW,
    ContinuousFamily,
    MeanDispersionParams,
    cdf_continuous,
    normal_quantile,
    normal_quantile_log,
    sf_continuous,
    variance_continuous,
)
from .errors import DataError, DomainError
from .model import ZarFit

logger = logging.getLogger(__name__)

RngLike = Union[None, int, np.random.SeedSequence, np.random.Generator]


class ResidualTag(enum.Enum):
    QUANTILE = 'quantile'
    DEVIANCE = 'deviance'
    PEARSON = 'pearson'
    ANSCOMBE = 'anscombe'
    WILLIAMS = 'williams'
    BINARY = 'binary'
    RANDOMIZED = 'randomized'
    STAR = 'star'


#: residual tags computed from the continuous part only
COMPONENT_TAGS = frozenset({
    ResidualTag.QUANTILE, ResidualTag.DEVIANCE, ResidualTag.PEARSON,
    ResidualTag.ANSCOMBE, ResidualTag.WILLIAMS})


@dataclass(frozen=True)
class ResidualKind:
    """A residual definition; ``STAR`` kinds wrap a component kind."""

    tag: ResidualTag
    inner: Optional['ResidualKind'] = None

    def __post_init__(self):
        if self.tag is ResidualTag.STAR:
            if self.inner is None or self.inner.tag not in COMPONENT_TAGS:
                raise DomainError(
                    'the star transform wraps a component residual only')
        elif self.inner is not None:
            raise DomainError(f'{self.tag.value} residual takes no inner kind')

    @classmethod
    def star(cls, inner: 'ResidualKind') -> 'ResidualKind':
        return cls(ResidualTag.STAR, inner)

    @property
    def name(self) -> str:
        if self.tag is ResidualTag.STAR:
            return f'star-{self.inner.name}'
        return self.tag.value

    @property
    def defined_at_zeros(self) -> bool:
        return self.tag in (ResidualTag.BINARY, ResidualTag.RANDOMIZED)

    @property
    def randomized(self) -> bool:
        return self.tag is ResidualTag.RANDOMIZED

    def __str__(self):
        return self.name


QUANTILE = ResidualKind(ResidualTag.QUANTILE)
DEVIANCE = ResidualKind(ResidualTag.DEVIANCE)
PEARSON = ResidualKind(ResidualTag.PEARSON)
ANSCOMBE = ResidualKind(ResidualTag.ANSCOMBE)
WILLIAMS = ResidualKind(ResidualTag.WILLIAMS)
BINARY = ResidualKind(ResidualTag.BINARY)
RANDOMIZED = ResidualKind(ResidualTag.RANDOMIZED)
ZAQR = ResidualKind.star(QUANTILE)


def parse_kind(name: str) -> ResidualKind:
    """Kind from its name, e.g. ``'pearson'``, ``'star-deviance'``, ``'zaqr'``.
    """
    key = name.strip().lower().replace('_', '-')
    if key == 'zaqr':
        return ZAQR
    if key.startswith('star-'):
        return ResidualKind.star(parse_kind(key[len('star-'):]))
    try:
        tag = ResidualTag(key)
    except ValueError:
        raise DomainError(f'unknown residual kind {name!r}') from None
    return ResidualKind(tag)


@dataclass(frozen=True)
class ResidualVector:
    kind: ResidualKind
    #: masked where the residual is undefined
    values: np.ma.MaskedArray
    #: fitted zero probabilities used by the star transform
    alpha_hat: np.ndarray
    #: integer seed of the randomization, when one was given
    seed: Optional[int] = None

    @property
    def defined(self) -> np.ndarray:
        return ~np.ma.getmaskarray(self.values)

    def __len__(self):
        return self.values.size


def _masked(fit: ZarFit, values: np.ndarray) -> np.ma.MaskedArray:
    """Full-length vector from values on the positive rows."""
    out = np.zeros(fit.data.n)
    out[fit.data.positive] = values
    return np.ma.masked_array(out, mask=fit.data.zero)


def _positive_part(fit: ZarFit):
    pos = fit.data.positive
    params = MeanDispersionParams(mu=fit.mu_hat[pos], phi=fit.phi_hat[pos])
    return fit.data.y[pos], params


def _require_glm_family(fit: ZarFit, kind: str):
    if fit.family is ContinuousFamily.BETA01:
        raise DomainError(
            f'{kind} residuals are defined for the gamma and inverse '
            f'Gaussian families only')


def _probit(cdf, sf):
    """Normal quantile of a probability given with its complement."""
    cdf = np.clip(cdf, NORMAL_CLAMP_LOW, NORMAL_CLAMP_HIGH)
    sf = np.clip(sf, NORMAL_CLAMP_LOW, NORMAL_CLAMP_HIGH)
    return np.where(cdf <= 0.5, normal_quantile(cdf), -normal_quantile(sf))


def quantile_component_residual(fit: ZarFit) -> np.ma.MaskedArray:
    """``Phi^-1`` of the fitted continuous distribution function."""
    y, p = _positive_part(fit)
    if y.size == 0:
        return _masked(fit, y)
    cdf = np.atleast_1d(cdf_continuous(fit.family, p, y))
    sf = np.atleast_1d(sf_continuous(fit.family, p, y))
    return _masked(fit, _probit(cdf, sf))


def _unit_deviance(family: ContinuousFamily, y, mu):
    if family is ContinuousFamily.GAMMA:
        return 2.0 * ((y - mu) / mu - np.log(y / mu))
    return (y - mu) ** 2 / (y * mu ** 2)


def pearson_residual(fit: ZarFit) -> np.ma.MaskedArray:
    _require_glm_family(fit, 'Pearson')
    y, p = _positive_part(fit)
    if y.size == 0:
        return _masked(fit, y)
    return _masked(fit, (y - p.mu) / np.sqrt(variance_continuous(fit.family, p)))


def deviance_residual(fit: ZarFit) -> np.ma.MaskedArray:
    _require_glm_family(fit, 'deviance')
    y, p = _positive_part(fit)
    if y.size == 0:
        return _masked(fit, y)
    d = np.maximum(_unit_deviance(fit.family, y, p.mu), 0.0)
    return _masked(fit, np.sign(y - p.mu) * np.sqrt(d / p.phi))


def anscombe_residual(fit: ZarFit) -> np.ma.MaskedArray:
    _require_glm_family(fit, 'Anscombe')
    y, p = _positive_part(fit)
    if y.size == 0:
        return _masked(fit, y)
    mu, phi = p.mu, p.phi
    if fit.family is ContinuousFamily.GAMMA:
        out = 3.0 * (np.cbrt(y) - np.cbrt(mu)) / np.cbrt(mu)
        out = out / np.sqrt(phi)
    else:
        out = np.log(y / mu) / np.sqrt(mu * phi)
    return _masked(fit, out)


def leverage(fit: ZarFit) -> np.ma.MaskedArray:
    """Hat diagonal of the ``mu`` submodel on the positive rows.

    Working weights are ``(dmu/deta)^2 / Var`` at the estimates, with
    ``phi`` held at its fitted value.
    """
    data, spec = fit.data, fit.spec
    pos = data.positive
    x = data.design(spec.mu.columns, spec.mu.intercept)[pos]
    if x.shape[0] == 0:
        return _masked(fit, np.empty(0))
    y, p = _positive_part(fit)
    eta = x @ fit.beta1
    dmu = spec.mu.link.inverse_derivative(eta)
    weights = dmu ** 2 / variance_continuous(fit.family, p)
    xw = x * np.sqrt(weights)[:, None]
    try:
        factor = linalg.cho_factor(xw.T @ xw)
    except linalg.LinAlgError:
        raise DataError(
            'weighted cross-product of the mu design is singular') from None
    h = np.einsum('ij,ji->i', xw, linalg.cho_solve(factor, xw.T))
    return _masked(fit, np.clip(h, 0.0, 1.0))


def williams_residual(fit: ZarFit) -> np.ma.MaskedArray:
    """Deviance and Pearson residuals combined by the leverage."""
    r_d = deviance_residual(fit)
    r_p = pearson_residual(fit)
    h = leverage(fit)
    return np.sign(r_d) * np.ma.sqrt((1.0 - h) * r_d ** 2 + h * r_p ** 2)


def star_residual(r, alpha_hat):
    """Fold the zero probability ``alpha_hat`` into component residuals ``r``.

    Negative residuals map to ``Phi^-1(Phi(r)(1 - alpha))`` and the others to
    ``Phi^-1(alpha + Phi(r)(1 - alpha))``; ``r = 0`` takes the second branch.
    Both branches are evaluated on the log scale. Masked entries stay masked.
    """
    alpha = np.asarray(alpha_hat, dtype=float)
    if np.any(~((alpha > 0.0) & (alpha < 1.0))):
        raise DomainError('alpha_hat must lie in (0, 1)')
    mask = np.ma.getmask(r)
    data = np.asarray(np.ma.getdata(r), dtype=float)
    with np.errstate(invalid='ignore', divide='ignore'):
        log_keep = np.log1p(-alpha)
        upper = -normal_quantile_log(special.log_ndtr(-data) + log_keep)
        lower = normal_quantile_log(special.log_ndtr(data) + log_keep)
    out = np.where(data >= 0.0, upper, lower)
    if mask is np.ma.nomask:
        return out[()] if out.ndim == 0 else out
    return np.ma.masked_array(out, mask=mask)


def zaqr(fit: ZarFit) -> np.ma.MaskedArray:
    """Zero adjusted quantile residual: star of the quantile residual."""
    return star_residual(quantile_component_residual(fit), fit.alpha_hat)


def _generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def randomized_quantile_residual(fit: ZarFit,
                                 rng: RngLike = None) -> np.ma.MaskedArray:
    """``Phi^-1`` of the fitted zero-adjusted distribution function.

    A zero response gets ``Phi^-1(u)`` with ``u`` uniform on ``(0, alpha)``.
    One uniform is drawn per observation, zero or not.
    """
    gen = _generator(rng)
    data = fit.data
    alpha = fit.alpha_hat
    u = (1.0 - gen.random(data.n)) * alpha
    out = np.empty(data.n)
    zero = data.zero
    if zero.any():
        out[zero] = normal_quantile(np.clip(u[zero], NORMAL_CLAMP_LOW, NORMAL_CLAMP_HIGH))
    if (~zero).any():
        y, p = _positive_part(fit)
        a = alpha[~zero]
        cdf = np.atleast_1d(cdf_continuous(fit.family, p, y))
        sf = np.atleast_1d(sf_continuous(fit.family, p, y))
        total = a + (1.0 - a) * cdf
        with np.errstate(divide='ignore'):
            upper = -normal_quantile_log(np.log(sf) + np.log1p(-a))
        lower = normal_quantile(np.clip(total, NORMAL_CLAMP_LOW, 0.5))
        out[~zero] = np.where(total <= 0.5, lower, upper)
    return np.ma.masked_array(out, mask=np.zeros(data.n, dtype=bool))


def binary_zero_part_residual(fit: ZarFit) -> np.ma.MaskedArray:
    """Deviance residual of the Bernoulli model for the zero indicator."""
    z = fit.data.zero
    alpha = fit.alpha_hat
    loglik = np.where(z, np.log(alpha), np.log1p(-alpha))
    out = np.sign(z.astype(float) - alpha) * np.sqrt(-2.0 * loglik)
    return np.ma.masked_array(out, mask=np.zeros(z.size, dtype=bool))


_COMPONENTS = {
    ResidualTag.QUANTILE: quantile_component_residual,
    ResidualTag.DEVIANCE: deviance_residual,
    ResidualTag.PEARSON: pearson_residual,
    ResidualTag.ANSCOMBE: anscombe_residual,
    ResidualTag.WILLIAMS: williams_residual,
}


def compute_residuals(fit: ZarFit, kind: Union[ResidualKind, str],
                      rng: RngLike = None) -> ResidualVector:
    """Residuals of any kind as a :class:`ResidualVector`.

    ``rng`` is only used by the randomized quantile residual.
    """
    if isinstance(kind, str):
        kind = parse_kind(kind)
    seed = rng if isinstance(rng, int) else None
    if kind.tag in _COMPONENTS:
        values = _COMPONENTS[kind.tag](fit)
    elif kind.tag is ResidualTag.STAR:
        values = star_residual(_COMPONENTS[kind.inner.tag](fit), fit.alpha_hat)
    elif kind.tag is ResidualTag.BINARY:
        values = binary_zero_part_residual(fit)
    else:
        values = randomized_quantile_residual(fit, rng)
    return ResidualVector(kind=kind, values=values,
                          alpha_hat=np.asarray(fit.alpha_hat), seed=seed)
