# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""Defines the zero-adjusted regression model and its maximum likelihood fit.

A model links ``mu``, ``phi`` and ``alpha`` to their own linear predictors.
The likelihood factorizes into a Bernoulli part for the zero indicator
(``alpha`` only) and a continuous part for the positive responses (``mu`` and
``phi`` only), so the two blocks are fitted and inverted separately unless
``FitOptions.blockwise`` is false.
"""

import logging
import warnings
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import linalg, optimize, special

from .data_container import Dataset
from .distributions import (
    ContinuousFamily,
    MeanDispersionParams,
    ZeroAdjustedParams,
    logpdf_continuous,
    score_continuous,
)
from .errors import (
    CovarianceError,
    DataError,
    DomainError,
    RankDeficiencyError,
)
from .links import PROB_GUARD, Identity, LinkFunction, Log, Logit

logger = logging.getLogger(__name__)

#: int: default iteration cap of the quasi-Newton optimizer
MAX_ITER = 500

#: float: default gradient tolerance, relative to ``1 + |loglik|``
GRAD_TOL = 1e-8

#: int: Newton steps allowed after the quasi-Newton search
POLISH_STEPS = 5

#: float: log-likelihood reported where the linear predictors overflow
LOGLIK_PENALTY = -1e100

#: tuple of str: submodel names, in coefficient order
SUBMODELS = ('mu', 'phi', 'alpha')


@dataclass(frozen=True)
class SubmodelSpec:
    """Covariate columns and link of one linear predictor."""

    #: Tuple[int]: covariate column indices of the dataset
    columns: Tuple[int, ...] = ()
    link: LinkFunction = field(default_factory=Logit)
    intercept: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'columns', tuple(int(j) for j in self.columns))

    @property
    def size(self) -> int:
        return len(self.columns) + int(self.intercept)


@dataclass(frozen=True)
class ZarModelSpec:
    """Continuous family plus the ``mu``, ``phi`` and ``alpha`` submodels."""

    family: ContinuousFamily
    mu: SubmodelSpec
    phi: SubmodelSpec = field(
        default_factory=lambda: SubmodelSpec(link=Log()))
    alpha: SubmodelSpec = field(default_factory=SubmodelSpec)

    def __post_init__(self):
        for name in SUBMODELS:
            if self.submodel(name).size == 0:
                raise DomainError(f'{name} submodel has no coefficients')
        if self.alpha.link.domain != (0.0, 1.0):
            raise DomainError(
                f'alpha needs a probability link, got {self.alpha.link.name}')
        if self.family is ContinuousFamily.BETA01:
            if self.mu.link.domain != (0.0, 1.0):
                raise DomainError(
                    f'beta mu needs a probability link, '
                    f'got {self.mu.link.name}')
        elif not isinstance(self.mu.link, (Log, Identity)):
            raise DomainError(
                f'positive mu needs a log or identity link, '
                f'got {self.mu.link.name}')
        if not isinstance(self.phi.link, (Log, Identity)):
            raise DomainError(
                f'phi needs a log or identity link, got {self.phi.link.name}')

    def submodel(self, name: str) -> SubmodelSpec:
        return getattr(self, name)

    @property
    def sizes(self) -> Tuple[int, int, int]:
        return (self.mu.size, self.phi.size, self.alpha.size)

    def split(self, coefficients) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Split a concatenated coefficient vector into the three blocks."""
        if isinstance(coefficients, (tuple, list)) and len(coefficients) == 3 \
                and all(np.ndim(c) == 1 for c in coefficients):
            blocks = tuple(np.asarray(c, dtype=float) for c in coefficients)
        else:
            theta = np.asarray(coefficients, dtype=float).reshape(-1)
            if theta.size != sum(self.sizes):
                raise DomainError(
                    f'expected {sum(self.sizes)} coefficients, '
                    f'got {theta.size}')
            p1, p2, _ = self.sizes
            blocks = (theta[:p1], theta[p1:p1 + p2], theta[p1 + p2:])
        for name, block, size in zip(SUBMODELS, blocks, self.sizes):
            if block.size != size:
                raise DomainError(
                    f'expected {size} {name} coefficients, got {block.size}')
        return blocks


@dataclass(frozen=True)
class FitOptions:
    max_iter: int = MAX_ITER
    grad_tol: float = GRAD_TOL
    #: 'glm' (moment and GLM based) or 'zeros'
    start_strategy: str = 'glm'
    #: 'analytic' score or 'numeric' central differences for the optimizer
    gradient: str = 'analytic'
    #: fit the Bernoulli and the continuous blocks separately
    blockwise: bool = True
    compute_vcov: bool = True
    polish_steps: int = POLISH_STEPS


@dataclass(frozen=True)
class Convergence:
    converged: bool
    iterations: int
    grad_norm: float
    message: str = ''


@dataclass(frozen=True)
class ZarFit:
    """Maximum likelihood fit of a :class:`ZarModelSpec` to a dataset.

    Blocks that cannot be identified (no zeros for ``alpha``, no positive
    responses for ``mu`` and ``phi``) hold NaN coefficients and are flagged
    by ``alpha_fitted`` / ``continuous_fitted``; in the first case the fitted
    ``alpha`` is the guard value ``PROB_GUARD``.
    """

    spec: ZarModelSpec
    data: Dataset
    beta1: np.ndarray
    beta2: np.ndarray
    beta3: np.ndarray
    #: (p1 + p2 + p3) square covariance, or None when not computed
    vcov: Optional[np.ndarray]
    mu_hat: np.ndarray
    phi_hat: np.ndarray
    alpha_hat: np.ndarray
    loglik: float
    convergence: Convergence
    options: FitOptions = field(default_factory=FitOptions)
    alpha_fitted: bool = True
    continuous_fitted: bool = True

    @property
    def coefficients(self) -> np.ndarray:
        return np.concatenate((self.beta1, self.beta2, self.beta3))

    @property
    def converged(self) -> bool:
        return self.convergence.converged

    @property
    def family(self) -> ContinuousFamily:
        return self.spec.family

    def coefficient_names(self) -> List[Tuple[str, str]]:
        """``(submodel, variable)`` pairs in coefficient order."""
        names = []
        for name in SUBMODELS:
            sub = self.spec.submodel(name)
            for var in self.data.design_names(sub.columns, sub.intercept):
                names.append((name, var))
        return names

    @property
    def params(self) -> ZeroAdjustedParams:
        """Fitted per-observation parameters (continuous part must be fitted).
        """
        return _as_params(self.spec.family, self.mu_hat, self.phi_hat,
                          self.alpha_hat)


def _as_params(family, mu, phi, alpha) -> ZeroAdjustedParams:
    return ZeroAdjustedParams.from_arrays(family, alpha, mu, phi)


# -- likelihood ------------------------------------------------------------

def _bernoulli_loglik(link: LinkFunction, x: np.ndarray, z: np.ndarray,
                      beta: np.ndarray) -> float:
    alpha = link.inverse(x @ beta)
    return float(np.sum(np.where(z, np.log(alpha), np.log1p(-alpha))))


def _bernoulli_score(link: LinkFunction, x: np.ndarray, z: np.ndarray,
                     beta: np.ndarray) -> np.ndarray:
    eta = x @ beta
    alpha = link.inverse(eta)
    dalpha = np.where(z, 1.0 / alpha, -1.0 / (1.0 - alpha))
    return x.T @ (dalpha * link.inverse_derivative(eta))


def _continuous_params(spec: ZarModelSpec, x1, x2, b1, b2):
    eta1 = x1 @ b1
    eta2 = x2 @ b2
    mu = spec.mu.link.inverse(eta1)
    phi = spec.phi.link.inverse(eta2)
    return eta1, eta2, MeanDispersionParams(mu=mu, phi=phi)


def _continuous_loglik(spec: ZarModelSpec, x1, x2, y, b1, b2) -> float:
    if y.size == 0:
        return 0.0
    _, _, p = _continuous_params(spec, x1, x2, b1, b2)
    return float(np.sum(logpdf_continuous(spec.family, p, y)))


def _continuous_score(spec: ZarModelSpec, x1, x2, y, b1, b2) -> np.ndarray:
    if y.size == 0:
        return np.zeros(b1.size + b2.size)
    eta1, eta2, p = _continuous_params(spec, x1, x2, b1, b2)
    dmu, dphi = score_continuous(spec.family, p, y)
    g1 = x1.T @ (dmu * spec.mu.link.inverse_derivative(eta1))
    g2 = x2.T @ (dphi * spec.phi.link.inverse_derivative(eta2))
    return np.concatenate((g1, g2))


@dataclass(frozen=True)
class _Blocks:
    """Design matrices split by block, computed once per fit."""

    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    y: np.ndarray
    z: np.ndarray

    @classmethod
    def build(cls, spec: ZarModelSpec, data: Dataset) -> '_Blocks':
        pos = data.positive
        return cls(
            x1=data.design(spec.mu.columns, spec.mu.intercept)[pos],
            x2=data.design(spec.phi.columns, spec.phi.intercept)[pos],
            x3=data.design(spec.alpha.columns, spec.alpha.intercept),
            y=data.y[pos],
            z=data.zero)


def _guarded(func, penalty):
    """Evaluate ``func``; overflowing predictors give the penalty value."""
    def wrapper(*args):
        with np.errstate(all='ignore'), warnings.catch_warnings():
            warnings.simplefilter('ignore', category=RuntimeWarning)
            try:
                value = func(*args)
            except DomainError:
                return penalty(*args)
        if np.all(np.isfinite(value)):
            return value
        return penalty(*args)
    return wrapper


def log_likelihood(spec: ZarModelSpec, data: Dataset, coefficients) -> float:
    """Zero-adjusted log-likelihood of the coefficients.

    Linear predictors that drive a parameter out of its range (or overflow)
    yield ``LOGLIK_PENALTY`` instead of raising.
    """
    b1, b2, b3 = spec.split(coefficients)
    blocks = _Blocks.build(spec, data)
    bern = _guarded(_bernoulli_loglik, lambda *a: LOGLIK_PENALTY)
    cont = _guarded(_continuous_loglik, lambda *a: LOGLIK_PENALTY)
    total = bern(spec.alpha.link, blocks.x3, blocks.z, b3) + \
        cont(spec, blocks.x1, blocks.x2, blocks.y, b1, b2)
    return max(total, LOGLIK_PENALTY)


def score(spec: ZarModelSpec, data: Dataset, coefficients) -> np.ndarray:
    """Analytic gradient of :func:`log_likelihood`."""
    b1, b2, b3 = spec.split(coefficients)
    blocks = _Blocks.build(spec, data)
    with np.errstate(all='ignore'):
        g = np.concatenate((
            _continuous_score(spec, blocks.x1, blocks.x2, blocks.y, b1, b2),
            _bernoulli_score(spec.alpha.link, blocks.x3, blocks.z, b3)))
    return g


# -- optimization ------------------------------------------------------------

def _check_rank(x: np.ndarray, names: Sequence[str], submodel: str):
    if x.shape[1] == 0:
        return
    if x.shape[0] < x.shape[1]:
        raise RankDeficiencyError(submodel, list(names)[x.shape[0]:])
    _, r, piv = linalg.qr(x, mode='economic', pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag[0] * max(x.shape) * np.finfo(float).eps if diag.size else 0.0
    rank = int(np.sum(diag > tol))
    if rank < x.shape[1]:
        raise RankDeficiencyError(submodel, [names[j] for j in piv[rank:]])


def _numeric_gradient(func, theta: np.ndarray) -> np.ndarray:
    h = 6e-6 * np.maximum(1.0, np.abs(theta))
    g = np.empty_like(theta)
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h[j]
        g[j] = (func(theta + e) - func(theta - e)) / (2.0 * h[j])
    return g


def _numeric_hessian(grad, theta: np.ndarray) -> np.ndarray:
    """Central differences of the gradient, symmetrized."""
    h = 1e-5 * np.maximum(1.0, np.abs(theta))
    hess = np.empty((theta.size, theta.size))
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h[j]
        hess[:, j] = (grad(theta + e) - grad(theta - e)) / (2.0 * h[j])
    return 0.5 * (hess + hess.T)


@dataclass
class _BlockResult:
    theta: np.ndarray
    loglik: float
    convergence: Convergence


def _maximize(loglik, grad, theta0: np.ndarray, options: FitOptions,
              label: str) -> _BlockResult:
    """Quasi-Newton search followed by a few Newton polishing steps."""
    def objective(theta):
        return -loglik(theta)

    if options.gradient == 'numeric':
        def jacobian(theta):
            return -_numeric_gradient(loglik, theta)
    elif options.gradient == 'analytic':
        def jacobian(theta):
            return -grad(theta)
    else:
        raise DomainError(f'unknown gradient method {options.gradient!r}')

    start_ll = loglik(theta0)
    res = optimize.minimize(
        objective, theta0, jac=jacobian, method='BFGS',
        options={'maxiter': options.max_iter, 'gtol': options.grad_tol})
    theta = np.asarray(res.x, dtype=float)
    ll = loglik(theta)
    if ll < start_ll:
        theta, ll = theta0, start_ll
    iterations = int(res.nit)
    logger.debug('%s block: BFGS stopped after %d iterations (%s)',
                 label, iterations, res.message)

    def tolerance(value):
        return options.grad_tol * (1.0 + abs(value))

    g = grad(theta)
    for _ in range(options.polish_steps):
        if np.max(np.abs(g), initial=0.0) <= tolerance(ll):
            break
        hess = _numeric_hessian(grad, theta)
        try:
            step = -linalg.solve(hess, g, assume_a='sym')
        except (linalg.LinAlgError, ValueError):
            break
        # backtrack until the likelihood does not decrease
        for _ in range(30):
            candidate = theta + step
            cand_ll = loglik(candidate)
            if cand_ll >= ll:
                break
            step = 0.5 * step
        else:
            break
        theta, ll = candidate, cand_ll
        g = grad(theta)
        iterations += 1

    grad_norm = float(np.max(np.abs(g), initial=0.0))
    converged = bool(np.isfinite(ll) and ll > LOGLIK_PENALTY
                     and grad_norm <= tolerance(ll))
    message = 'converged' if converged else str(res.message)
    logger.debug('%s block: loglik %.10g, gradient norm %.3g',
                 label, ll, grad_norm)
    return _BlockResult(
        theta=theta, loglik=ll,
        convergence=Convergence(converged, iterations, grad_norm, message))


def _wls(x: np.ndarray, target: np.ndarray, weights: np.ndarray):
    sw = np.sqrt(weights)
    coef, *_ = linalg.lstsq(x * sw[:, None], target * sw)
    return coef


def _bernoulli_start(link: LinkFunction, x: np.ndarray, z: np.ndarray,
                     steps: int = 5) -> np.ndarray:
    """A few Fisher-scoring steps of the Bernoulli GLM on the zero indicator.
    """
    zf = z.astype(float)
    eta = link.forward((zf + 0.5) / 2.0)
    beta = _wls(x, eta, np.ones_like(eta))
    for _ in range(steps):
        eta = x @ beta
        alpha = link.inverse(eta)
        dalpha = np.maximum(link.inverse_derivative(eta), 1e-10)
        weights = dalpha ** 2 / (alpha * (1.0 - alpha))
        beta = _wls(x, eta + (zf - alpha) / dalpha, weights)
    return beta


def _continuous_start(spec: ZarModelSpec, x1, x2, y) -> np.ndarray:
    """Least squares on the link scale for mu, moments for phi."""
    family = spec.family
    if family is ContinuousFamily.BETA01:
        ys = np.clip(y, 1e-6, 1.0 - 1e-6)
    else:
        ys = y
    b1 = _wls(x1, spec.mu.link.forward(ys), np.ones_like(ys))
    with np.errstate(all='ignore'):
        mu = spec.mu.link.inverse(x1 @ b1)
    if family is not ContinuousFamily.BETA01:
        mu = np.maximum(mu, 1e-8)
    sq = (y - mu) ** 2
    if family is ContinuousFamily.BETA01:
        ratio = np.mean(sq / (mu * (1.0 - mu)))
        phi = 1.0 / max(ratio, 1e-8) - 1.0
    elif family is ContinuousFamily.GAMMA:
        phi = np.mean(sq / mu ** 2)
    else:
        phi = np.mean(sq / mu ** 3)
    phi = float(np.clip(phi, 1e-4, 1e4))
    b2 = np.zeros(x2.shape[1])
    if spec.phi.intercept:
        b2[0] = float(spec.phi.link.forward(phi))
    return np.concatenate((b1, b2))


def _invert_information(hess: np.ndarray, label: str) -> np.ndarray:
    """Inverse of the observed information ``-hess`` (Cholesky first)."""
    info = -hess
    try:
        factor = linalg.cho_factor(info)
        return linalg.cho_solve(factor, np.eye(info.shape[0]))
    except linalg.LinAlgError:
        message = (f'observed information of the {label} block is not '
                   f'positive definite; using the pseudo-inverse')
        logger.warning(message)
        warnings.warn(message, RuntimeWarning, stacklevel=3)
        return linalg.pinvh(info)


def fit(spec: ZarModelSpec, data: Dataset,
        options: Optional[FitOptions] = None) -> ZarFit:
    """Maximum likelihood fit of ``spec`` to ``data``.

    Returns a result even when the optimizer does not converge (the
    convergence flag is then false). Raises :class:`RankDeficiencyError` if a
    design matrix is rank deficient on the rows that inform it.
    """
    options = options or FitOptions()
    data.validate_for(spec.family)
    blocks = _Blocks.build(spec, data)
    p1, p2, p3 = spec.sizes
    has_zeros = bool(blocks.z.any())
    has_positives = bool(blocks.y.size)
    if not has_zeros and not has_positives:
        raise DataError('dataset has no observations')

    if has_positives:
        _check_rank(blocks.x1,
                    data.design_names(spec.mu.columns, spec.mu.intercept), 'mu')
        _check_rank(blocks.x2,
                    data.design_names(spec.phi.columns, spec.phi.intercept),
                    'phi')
    else:
        logger.warning('no positive responses; mu and phi are not identifiable')
    if has_zeros:
        _check_rank(blocks.x3,
                    data.design_names(spec.alpha.columns, spec.alpha.intercept),
                    'alpha')
    else:
        logger.warning('no zero responses; alpha is not identifiable')

    def cont_ll(theta):
        return _continuous_loglik(spec, blocks.x1, blocks.x2, blocks.y,
                                  theta[:p1], theta[p1:])

    def cont_grad(theta):
        return _continuous_score(spec, blocks.x1, blocks.x2, blocks.y,
                                 theta[:p1], theta[p1:])

    def bern_ll(theta):
        return _bernoulli_loglik(spec.alpha.link, blocks.x3, blocks.z, theta)

    def bern_grad(theta):
        return _bernoulli_score(spec.alpha.link, blocks.x3, blocks.z, theta)

    penalty_ll = _guarded(lambda f, t: f(t), lambda *a: LOGLIK_PENALTY)

    def zero_grad(f, t):
        return np.zeros_like(t)

    penalty_grad = _guarded(lambda f, t: f(t), zero_grad)

    if options.start_strategy == 'glm':
        cont0 = _continuous_start(spec, blocks.x1, blocks.x2, blocks.y) \
            if has_positives else np.zeros(p1 + p2)
        bern0 = _bernoulli_start(spec.alpha.link, blocks.x3, blocks.z) \
            if has_zeros else np.zeros(p3)
    elif options.start_strategy == 'zeros':
        cont0, bern0 = np.zeros(p1 + p2), np.zeros(p3)
    else:
        raise DomainError(f'unknown start strategy {options.start_strategy!r}')

    results = {}
    if options.blockwise or not (has_zeros and has_positives):
        if has_positives:
            results['continuous'] = _maximize(
                lambda t: penalty_ll(cont_ll, t),
                lambda t: penalty_grad(cont_grad, t),
                cont0, options, 'continuous')
        if has_zeros:
            results['alpha'] = _maximize(
                lambda t: penalty_ll(bern_ll, t),
                lambda t: penalty_grad(bern_grad, t),
                bern0, options, 'alpha')
        theta_c = results['continuous'].theta if has_positives \
            else np.full(p1 + p2, np.nan)
        theta_a = results['alpha'].theta if has_zeros else np.full(p3, np.nan)
    else:
        def joint_ll(theta):
            return penalty_ll(cont_ll, theta[:p1 + p2]) + \
                penalty_ll(bern_ll, theta[p1 + p2:])

        def joint_grad(theta):
            return np.concatenate((
                penalty_grad(cont_grad, theta[:p1 + p2]),
                penalty_grad(bern_grad, theta[p1 + p2:])))

        results['joint'] = _maximize(
            joint_ll, joint_grad, np.concatenate((cont0, bern0)), options,
            'joint')
        theta_c = results['joint'].theta[:p1 + p2]
        theta_a = results['joint'].theta[p1 + p2:]

    beta1, beta2, beta3 = theta_c[:p1], theta_c[p1:], theta_a
    convergence = Convergence(
        converged=all(r.convergence.converged for r in results.values()),
        iterations=sum(r.convergence.iterations for r in results.values()),
        grad_norm=max(r.convergence.grad_norm for r in results.values()),
        message='; '.join(f'{k}: {r.convergence.message}'
                          for k, r in results.items()))
    if not convergence.converged:
        logger.info('fit did not converge: %s', convergence.message)

    vcov = None
    if options.compute_vcov:
        vcov = np.full((p1 + p2 + p3,) * 2, np.nan)
        if 'joint' in results:
            theta = results['joint'].theta
            hess = _numeric_hessian(
                lambda t: np.concatenate((cont_grad(t[:p1 + p2]),
                                          bern_grad(t[p1 + p2:]))), theta)
            vcov = _invert_information(hess, 'joint')
        if has_positives and 'continuous' in results:
            hess = _numeric_hessian(cont_grad, results['continuous'].theta)
            vcov[:p1 + p2, :p1 + p2] = _invert_information(hess, 'continuous')
            if has_zeros:
                vcov[:p1 + p2, p1 + p2:] = 0.0
                vcov[p1 + p2:, :p1 + p2] = 0.0
        if has_zeros and 'alpha' in results:
            hess = _numeric_hessian(bern_grad, results['alpha'].theta)
            vcov[p1 + p2:, p1 + p2:] = _invert_information(hess, 'alpha')
        vcov = 0.5 * (vcov + vcov.T)

    with np.errstate(all='ignore'):
        loglik = sum(r.loglik for r in results.values())
    mu_hat, phi_hat, alpha_hat = _predict_arrays(
        spec, data.covariates, beta1, beta2, beta3)
    return ZarFit(
        spec=spec, data=data, beta1=beta1, beta2=beta2, beta3=beta3,
        vcov=vcov, mu_hat=mu_hat, phi_hat=phi_hat, alpha_hat=alpha_hat,
        loglik=float(loglik), convergence=convergence, options=options,
        alpha_fitted=has_zeros, continuous_fitted=has_positives)


# -- inference and prediction -------------------------------------------------

def _predict_arrays(spec: ZarModelSpec, covariates: np.ndarray,
                    beta1, beta2, beta3):
    x = np.asarray(covariates, dtype=float)
    ones = np.ones((x.shape[0], 1))

    def design(sub: SubmodelSpec):
        cols = x[:, list(sub.columns)]
        return np.hstack((ones, cols)) if sub.intercept else cols

    with np.errstate(all='ignore'):
        mu = spec.mu.link.inverse(design(spec.mu) @ beta1)
        phi = spec.phi.link.inverse(design(spec.phi) @ beta2)
        if np.all(np.isnan(beta3)):
            alpha = np.full(x.shape[0], PROB_GUARD)
        else:
            alpha = spec.alpha.link.inverse(design(spec.alpha) @ beta3)
    return (np.asarray(mu, dtype=float), np.asarray(phi, dtype=float),
            np.asarray(alpha, dtype=float))


def restore_fit(spec: ZarModelSpec, data: Dataset, coefficients,
                vcov: Optional[np.ndarray], loglik: float,
                convergence: Convergence,
                options: Optional[FitOptions] = None) -> ZarFit:
    """Rebuild a fit from stored coefficients; fitted values are recomputed
    exactly as :func:`fit` computes them."""
    beta1, beta2, beta3 = spec.split(coefficients)
    mu_hat, phi_hat, alpha_hat = _predict_arrays(
        spec, data.covariates, beta1, beta2, beta3)
    return ZarFit(
        spec=spec, data=data, beta1=beta1, beta2=beta2, beta3=beta3,
        vcov=None if vcov is None else np.asarray(vcov, dtype=float),
        mu_hat=mu_hat, phi_hat=phi_hat, alpha_hat=alpha_hat,
        loglik=float(loglik), convergence=convergence,
        options=options or FitOptions(),
        alpha_fitted=not np.all(np.isnan(beta3)),
        continuous_fitted=not np.all(np.isnan(beta1)))


def predict(fit: ZarFit, covariates: Union[np.ndarray, Dataset]):
    """Per-observation parameters at new covariate rows."""
    if isinstance(covariates, Dataset):
        covariates = covariates.covariates
    x = np.asarray(covariates, dtype=float)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    k = fit.data.covariates.shape[1]
    if x.ndim != 2 or x.shape[1] != k:
        raise DataError(
            f'expected {k} covariate columns, got {x.shape[-1]}')
    if not fit.continuous_fitted:
        raise DataError('mu and phi were not estimated by this fit')
    mu, phi, alpha = _predict_arrays(
        fit.spec, x, fit.beta1, fit.beta2, fit.beta3)
    return _as_params(fit.spec.family, mu, phi, alpha)


def _checked_vcov(fit: ZarFit) -> np.ndarray:
    if fit.vcov is None:
        raise CovarianceError('fit has no covariance; refit with compute_vcov')
    vcov = fit.vcov
    ok = np.all(np.isfinite(vcov), axis=1)
    block = vcov[np.ix_(ok, ok)]
    if block.size:
        eig = linalg.eigvalsh(block)
        if eig[0] < -1e-8 * max(1.0, abs(eig[-1])):
            raise CovarianceError(
                'covariance matrix is not positive semidefinite; the fit '
                'probably did not converge')
    return vcov


def wald_tests(fit: ZarFit) -> pd.DataFrame:
    """Wald test of every coefficient against zero.

    Columns: Equation, Variable, Estimate, Standard error, z, P-value.
    Coefficients of unidentified blocks are omitted.
    """
    vcov = _checked_vcov(fit)
    rows = []
    for j, (equation, variable) in enumerate(fit.coefficient_names()):
        estimate = fit.coefficients[j]
        if not np.isfinite(estimate):
            continue
        se = float(np.sqrt(max(vcov[j, j], 0.0)))
        if estimate == 0.0:
            z, p = 0.0, 1.0
        else:
            z = estimate / se if se > 0.0 else np.copysign(np.inf, estimate)
            p = float(2.0 * special.ndtr(-abs(z)))
        rows.append({
            'Equation': equation, 'Variable': variable,
            'Estimate': float(estimate), 'Standard error': se,
            'z': float(z), 'P-value': p})
    return pd.DataFrame(
        rows, columns=['Equation', 'Variable', 'Estimate', 'Standard error',
                       'z', 'P-value'])


def confidence_intervals(fit: ZarFit, level: float = 0.95) -> pd.DataFrame:
    """Wald confidence intervals at the given coverage level."""
    if not 0.0 < level < 1.0:
        raise DomainError('level must lie in (0, 1)')
    table = wald_tests(fit)
    crit = float(special.ndtri(0.5 + 0.5 * level))
    table['Lower'] = table['Estimate'] - crit * table['Standard error']
    table['Upper'] = table['Estimate'] + crit * table['Standard error']
    return table[['Equation', 'Variable', 'Estimate', 'Lower', 'Upper']]


def deletion_changes(result: ZarFit, rows: Sequence[int],
                     options: Optional[FitOptions] = None) -> pd.DataFrame:
    """Change of every coefficient when one row is left out.

    ``rows`` are 0-based positions in ``result.data``; each is deleted on its
    own and the same spec refitted. ``Change`` is the absolute difference and
    ``Change %`` the difference relative to ``|Estimate|``, NaN where the
    estimate is zero.
    """
    options = replace(options or result.options, compute_vcov=False)
    data = result.data
    names = result.coefficient_names()
    before = result.coefficients
    scale = np.where(before == 0.0, np.nan, np.abs(before))
    records = []
    for row in rows:
        row = int(row)
        if not 0 <= row < data.n:
            raise DataError(f'row {row} outside 0..{data.n - 1}')
        keep = np.ones(data.n, dtype=bool)
        keep[row] = False
        refit = fit(result.spec, data.subset(keep), options)
        change = refit.coefficients - before
        pct = 100.0 * change / scale
        for (equation, variable), est, after, diff, rel in zip(
                names, before, refit.coefficients, change, pct):
            records.append({
                'Row': row, 'Id': data.ids[row],
                'Equation': equation, 'Variable': variable,
                'Estimate': float(est), 'Without row': float(after),
                'Change': float(diff), 'Change %': float(rel),
                'Converged': refit.converged})
    return pd.DataFrame(records)
