# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""Defines the continuous families and the zero-adjusted mixture built on them.

Every family is parameterized by its mean ``mu`` and a dispersion (or, for the
beta family, precision) parameter ``phi``:

* ``BETA01``: shapes ``(mu * phi, (1 - mu) * phi)`` on (0, 1), so that
  ``Var = mu (1 - mu) / (1 + phi)``;
* ``GAMMA``: shape ``1 / phi`` and scale ``mu * phi``, so that
  ``Var = phi mu ** 2``;
* ``INVERSE_GAUSSIAN``: shape ``lambda = 1 / phi``, so that
  ``Var = phi mu ** 3``.

The zero-adjusted law puts mass ``alpha`` at zero and spreads ``1 - alpha``
over the continuous family. All functions broadcast over numpy arrays and are
pure given an explicit :class:`numpy.random.Generator`.
"""

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import special, stats

from .errors import DomainError

#: float: smallest probability fed to the normal quantile function
NORMAL_CLAMP_LOW = 1e-300

#: float: largest probability fed to the normal quantile function
NORMAL_CLAMP_HIGH = 1.0 - 1e-16

Scalar = Union[float, np.ndarray]


class ContinuousFamily(enum.Enum):
    """Continuous part of a zero-adjusted law."""

    BETA01 = 'beta01'
    GAMMA = 'gamma'
    INVERSE_GAUSSIAN = 'inverse_gaussian'

    @property
    def support(self) -> Tuple[float, float]:
        """Open interval on which the density is positive."""
        if self is ContinuousFamily.BETA01:
            return (0.0, 1.0)
        return (0.0, math.inf)

    @property
    def short_name(self) -> str:
        """Conventional name of the zero-adjusted model (ZABE, ZAGA, ZAIG)."""
        return {
            ContinuousFamily.BETA01: 'ZABE',
            ContinuousFamily.GAMMA: 'ZAGA',
            ContinuousFamily.INVERSE_GAUSSIAN: 'ZAIG',
        }[self]

    @classmethod
    def parse(cls, name: str) -> 'ContinuousFamily':
        key = name.strip().lower().replace('-', '_')
        aliases = {
            'beta': cls.BETA01, 'zabe': cls.BETA01,
            'ga': cls.GAMMA, 'zaga': cls.GAMMA,
            'ig': cls.INVERSE_GAUSSIAN, 'zaig': cls.INVERSE_GAUSSIAN,
            'inversegaussian': cls.INVERSE_GAUSSIAN,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f'unknown continuous family: {name!r}') from None


@dataclass(frozen=True)
class MeanDispersionParams:
    """Mean ``mu`` and dispersion ``phi`` of the continuous part."""

    mu: Scalar
    phi: Scalar

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        return (np.asarray(self.mu, dtype=float),
                np.asarray(self.phi, dtype=float))


@dataclass(frozen=True)
class ZeroAdjustedParams:
    """Probability of zero ``alpha`` plus the continuous parameters."""

    family: ContinuousFamily
    alpha: Scalar
    cont: MeanDispersionParams

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        if np.any(~((alpha > 0.0) & (alpha < 1.0))):
            raise DomainError('alpha must lie in (0, 1)')
        _check_params(self.family, self.cont)

    @classmethod
    def from_arrays(cls, family: ContinuousFamily, alpha, mu,
                    phi) -> 'ZeroAdjustedParams':
        return cls(family=family, alpha=alpha,
                   cont=MeanDispersionParams(mu=mu, phi=phi))

    def __len__(self) -> int:
        mu, phi = self.cont.arrays()
        return int(np.broadcast(np.asarray(self.alpha), mu, phi).size)

    def take(self, index) -> 'ZeroAdjustedParams':
        """Parameters of a subset of observations."""
        mu, phi = self.cont.arrays()
        alpha = np.asarray(self.alpha, dtype=float)
        shape = np.broadcast(alpha, mu, phi).shape
        return ZeroAdjustedParams(
            family=self.family,
            alpha=np.broadcast_to(alpha, shape)[index],
            cont=MeanDispersionParams(
                mu=np.broadcast_to(mu, shape)[index],
                phi=np.broadcast_to(phi, shape)[index]))


def _scalar(value: np.ndarray) -> Scalar:
    # 0-d arrays come back as numpy scalars
    return value[()] if np.ndim(value) == 0 else value


def _check_params(family: ContinuousFamily, p: MeanDispersionParams):
    mu, phi = p.arrays()
    if np.any(~(phi > 0.0)) or np.any(~np.isfinite(phi)):
        raise DomainError('phi must be a positive finite number')
    if np.any(~(mu > 0.0)) or np.any(~np.isfinite(mu)):
        raise DomainError('mu must be a positive finite number')
    if family is ContinuousFamily.BETA01 and np.any(mu >= 1.0):
        raise DomainError('mu must lie in (0, 1) for the beta family')


def _check_support(family: ContinuousFamily, y: np.ndarray, closed=False):
    low, high = family.support
    if closed:
        ok = (y >= low) & (y <= high)
    else:
        ok = (y > low) & (y < high)
    if np.any(~ok):
        raise DomainError(
            f'y outside the support {family.support} of the '
            f'{family.value} family')


def _beta_shapes(p: MeanDispersionParams):
    mu, phi = p.arrays()
    return mu * phi, (1.0 - mu) * phi


def _invgauss_args(p: MeanDispersionParams):
    # scipy's invgauss(m, scale=s) has mean m * s and shape parameter s
    mu, phi = p.arrays()
    return mu * phi, 1.0 / phi


def variance_continuous(family: ContinuousFamily, p: MeanDispersionParams):
    """Variance of the continuous part under the family's convention."""
    _check_params(family, p)
    mu, phi = p.arrays()
    if family is ContinuousFamily.BETA01:
        return _scalar(mu * (1.0 - mu) / (1.0 + phi))
    if family is ContinuousFamily.GAMMA:
        return _scalar(phi * mu ** 2)
    return _scalar(phi * mu ** 3)


def logpdf_continuous(
    family: ContinuousFamily,
    p: MeanDispersionParams,
    y: ArrayLike,
):
    """Log density of the continuous part; ``y`` must be in the support."""
    y = np.asarray(y, dtype=float)
    _check_params(family, p)
    _check_support(family, y)
    mu, phi = p.arrays()
    if family is ContinuousFamily.BETA01:
        a, b = _beta_shapes(p)
        out = ((a - 1.0) * np.log(y) + (b - 1.0) * np.log1p(-y)
               - special.betaln(a, b))
    elif family is ContinuousFamily.GAMMA:
        shape = 1.0 / phi
        scale = mu * phi
        out = ((shape - 1.0) * np.log(y) - y / scale
               - special.gammaln(shape) - shape * np.log(scale))
    else:
        out = (-0.5 * np.log(2.0 * np.pi * phi * y ** 3)
               - (y - mu) ** 2 / (2.0 * phi * mu ** 2 * y))
    return _scalar(out)


def pdf_continuous(family: ContinuousFamily, p: MeanDispersionParams, y):
    """Density of the continuous part."""
    return _scalar(np.exp(logpdf_continuous(family, p, y)))


def cdf_continuous(family: ContinuousFamily, p: MeanDispersionParams, y):
    """Distribution function of the continuous part on the closed support."""
    y = np.asarray(y, dtype=float)
    _check_params(family, p)
    _check_support(family, y, closed=True)
    mu, phi = p.arrays()
    with np.errstate(divide='ignore', invalid='ignore'):
        if family is ContinuousFamily.BETA01:
            a, b = _beta_shapes(p)
            out = special.betainc(a, b, y)
        elif family is ContinuousFamily.GAMMA:
            out = special.gammainc(1.0 / phi, y / (mu * phi))
        else:
            m, s = _invgauss_args(p)
            out = stats.invgauss.cdf(y, m, scale=s)
    return _scalar(out)


def sf_continuous(family: ContinuousFamily, p: MeanDispersionParams, y):
    """Survival function ``1 - cdf`` computed without cancellation."""
    y = np.asarray(y, dtype=float)
    _check_params(family, p)
    _check_support(family, y, closed=True)
    mu, phi = p.arrays()
    with np.errstate(divide='ignore', invalid='ignore'):
        if family is ContinuousFamily.BETA01:
            a, b = _beta_shapes(p)
            out = special.betainc(b, a, 1.0 - y)
        elif family is ContinuousFamily.GAMMA:
            out = special.gammaincc(1.0 / phi, y / (mu * phi))
        else:
            m, s = _invgauss_args(p)
            out = stats.invgauss.sf(y, m, scale=s)
    return _scalar(out)


def quantile_continuous(family: ContinuousFamily, p: MeanDispersionParams, q):
    """Inverse of :func:`cdf_continuous` for ``q`` in (0, 1)."""
    q = np.asarray(q, dtype=float)
    if np.any(~((q > 0.0) & (q < 1.0))):
        raise DomainError('quantile level must lie in (0, 1)')
    _check_params(family, p)
    mu, phi = p.arrays()
    if family is ContinuousFamily.BETA01:
        a, b = _beta_shapes(p)
        out = special.betaincinv(a, b, q)
    elif family is ContinuousFamily.GAMMA:
        out = special.gammaincinv(1.0 / phi, q) * mu * phi
    else:
        m, s = _invgauss_args(p)
        out = stats.invgauss.ppf(q, m, scale=s)
    return _scalar(out)


def score_continuous(family: ContinuousFamily, p: MeanDispersionParams, y):
    """Derivatives of the continuous log density w.r.t. ``mu`` and ``phi``."""
    y = np.asarray(y, dtype=float)
    mu, phi = p.arrays()
    if family is ContinuousFamily.BETA01:
        a, b = _beta_shapes(p)
        ystar = np.log(y) - np.log1p(-y)
        mustar = special.digamma(a) - special.digamma(b)
        dmu = phi * (ystar - mustar)
        dphi = (mu * (ystar - mustar) + np.log1p(-y)
                - special.digamma(b) + special.digamma(phi))
    elif family is ContinuousFamily.GAMMA:
        dmu = (y - mu) / (phi * mu ** 2)
        dphi = (y / mu - 1.0 - np.log(y / (mu * phi))
                + special.digamma(1.0 / phi)) / phi ** 2
    else:
        dmu = (y - mu) / (phi * mu ** 3)
        dphi = -0.5 / phi + (y - mu) ** 2 / (2.0 * phi ** 2 * mu ** 2 * y)
    return dmu, dphi


def logpdf_zar(zp: ZeroAdjustedParams, y: ArrayLike):
    """Log of the zero-adjusted density (log mass at zero)."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0):
        raise DomainError('y must be nonnegative')
    alpha = np.asarray(zp.alpha, dtype=float)
    positive = y > 0.0
    safe_y = np.where(positive, y, _interior_point(zp.family))
    cont = logpdf_continuous(zp.family, zp.cont, safe_y)
    out = np.where(positive, np.log1p(-alpha) + cont, np.log(alpha))
    return _scalar(out)


def pdf_zar(zp: ZeroAdjustedParams, y: ArrayLike):
    """Zero-adjusted density: ``alpha`` at zero, ``(1 - alpha) f`` above."""
    return _scalar(np.exp(logpdf_zar(zp, y)))


def cdf_zar(zp: ZeroAdjustedParams, y: ArrayLike):
    """Right-continuous distribution function of the zero-adjusted law."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0):
        raise DomainError('y must be nonnegative')
    alpha = np.asarray(zp.alpha, dtype=float)
    cont = cdf_continuous(zp.family, zp.cont, y)
    out = np.where(y == 0.0, alpha * np.ones_like(cont),
                   alpha + (1.0 - alpha) * cont)
    return _scalar(out)


def sf_zar(zp: ZeroAdjustedParams, y: ArrayLike):
    """``1 - cdf_zar`` computed from the continuous survival function."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0):
        raise DomainError('y must be nonnegative')
    alpha = np.asarray(zp.alpha, dtype=float)
    return _scalar((1.0 - alpha) * sf_continuous(zp.family, zp.cont, y))


def interval_probability(zp: ZeroAdjustedParams, lower, upper):
    """Probability of ``lower < Y <= upper``; ``lower = 0`` skips the zero mass.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(lower < 0.0) or np.any(lower > upper):
        raise DomainError('bounds must satisfy 0 <= lower <= upper')
    return _scalar(cdf_zar(zp, upper) - cdf_zar(zp, lower))


def _interior_point(family: ContinuousFamily) -> float:
    return 0.5 if family is ContinuousFamily.BETA01 else 1.0


def sample_continuous(
    family: ContinuousFamily,
    p: MeanDispersionParams,
    rng: np.random.Generator,
    size: Optional[Tuple[int, ...]] = None,
):
    """Draw from the continuous part.

    Beta and gamma draws use the inverse distribution function of one uniform
    each; inverse Gaussian draws use numpy's Wald sampler (the
    Michael-Schucany-Haas transform).
    """
    _check_params(family, p)
    mu, phi = p.arrays()
    if size is None:
        size = np.broadcast(mu, phi).shape
    if family is ContinuousFamily.INVERSE_GAUSSIAN:
        out = rng.wald(np.broadcast_to(mu, size), 1.0 / np.broadcast_to(phi, size))
    else:
        u = rng.random(size)
        u = np.where(u == 0.0, np.finfo(float).tiny, u)
        out = quantile_continuous(family, p, u)
    upper = np.nextafter(1.0, 0.0) if family is ContinuousFamily.BETA01 \
        else np.inf
    return _scalar(np.clip(out, np.finfo(float).tiny, upper))


def sample_zar(
    zp: ZeroAdjustedParams,
    rng: np.random.Generator,
    size: Optional[Tuple[int, ...]] = None,
):
    """Draw from the zero-adjusted law.

    One uniform decides zero against ``alpha``, then a continuous draw fills
    the positive observations; both streams are consumed for every draw so
    the generator advances by a fixed amount.
    """
    mu, phi = zp.cont.arrays()
    alpha = np.asarray(zp.alpha, dtype=float)
    if size is None:
        size = np.broadcast(alpha, mu, phi).shape
    zero = rng.random(size) < alpha
    cont = sample_continuous(zp.family, zp.cont, rng, size)
    return _scalar(np.where(zero, 0.0, cont))


def normal_cdf(x):
    """Standard normal distribution function."""
    return _scalar(special.ndtr(np.asarray(x, dtype=float)))


def normal_quantile(q):
    """Standard normal quantile function.

    Levels must lie strictly inside (0, 1); they are clamped to
    ``[NORMAL_CLAMP_LOW, NORMAL_CLAMP_HIGH]`` so the result stays finite.
    """
    q = np.asarray(q, dtype=float)
    if np.any(~((q > 0.0) & (q < 1.0))):
        raise DomainError('normal quantile level must lie in (0, 1)')
    return _scalar(special.ndtri(np.clip(q, NORMAL_CLAMP_LOW, NORMAL_CLAMP_HIGH)))


def normal_quantile_log(logq):
    """Normal quantile of ``exp(logq)``, accurate deep in the lower tail."""
    logq = np.asarray(logq, dtype=float)
    return _scalar(special.ndtri_exp(
        np.clip(logq, math.log(NORMAL_CLAMP_LOW), math.log(NORMAL_CLAMP_HIGH))))
