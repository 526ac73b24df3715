# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""Defines the link functions of the three linear predictors."""

from typing import Dict, Type

import numpy as np
from scipy import special

from .errors import DomainError

#: float: fitted probabilities are kept in (PROB_GUARD, 1 - PROB_GUARD)
PROB_GUARD = 1e-12

#: float: largest linear predictor passed to ``exp``
ETA_MAX = 700.0


class LinkFunction:
    """Strictly monotone map ``g`` from a parameter to its linear predictor.

    ``inverse`` is guarded: probability-valued links never return exactly 0
    or 1 and the log link never overflows.
    """

    #: str: name used in configuration files
    name = ''

    #: tuple: open interval of parameter values the link accepts
    domain = (-np.inf, np.inf)

    def forward(self, theta):
        raise NotImplementedError

    def inverse(self, eta):
        raise NotImplementedError

    def inverse_derivative(self, eta):
        """``d theta / d eta`` evaluated at ``eta``."""
        raise NotImplementedError

    def derivative(self, theta):
        """``d eta / d theta`` evaluated at ``theta``."""
        eta = self.forward(theta)
        return 1.0 / self.inverse_derivative(eta)

    def __repr__(self):
        return f'{type(self).__name__}()'

    def __eq__(self, other):
        return type(self) is type(other)

    def __hash__(self):
        return hash(type(self))


class Logit(LinkFunction):
    name = 'logit'
    domain = (0.0, 1.0)

    def forward(self, theta):
        return special.logit(theta)

    def inverse(self, eta):
        return np.clip(special.expit(eta), PROB_GUARD, 1.0 - PROB_GUARD)

    def inverse_derivative(self, eta):
        p = special.expit(eta)
        return p * (1.0 - p)


class Probit(LinkFunction):
    name = 'probit'
    domain = (0.0, 1.0)

    def forward(self, theta):
        return special.ndtri(theta)

    def inverse(self, eta):
        return np.clip(special.ndtr(eta), PROB_GUARD, 1.0 - PROB_GUARD)

    def inverse_derivative(self, eta):
        return np.exp(-0.5 * np.square(eta)) / np.sqrt(2.0 * np.pi)


class CLogLog(LinkFunction):
    name = 'cloglog'
    domain = (0.0, 1.0)

    def forward(self, theta):
        return np.log(-np.log1p(-theta))

    def inverse(self, eta):
        eta = np.minimum(eta, ETA_MAX)
        return np.clip(-np.expm1(-np.exp(eta)), PROB_GUARD, 1.0 - PROB_GUARD)

    def inverse_derivative(self, eta):
        eta = np.minimum(eta, ETA_MAX)
        return np.exp(eta - np.exp(eta))


class Log(LinkFunction):
    name = 'log'
    domain = (0.0, np.inf)

    def forward(self, theta):
        return np.log(theta)

    def inverse(self, eta):
        return np.exp(np.minimum(eta, ETA_MAX))

    def inverse_derivative(self, eta):
        return np.exp(np.minimum(eta, ETA_MAX))


class Identity(LinkFunction):
    name = 'identity'

    def forward(self, theta):
        return np.asarray(theta, dtype=float)

    def inverse(self, eta):
        return np.asarray(eta, dtype=float)

    def inverse_derivative(self, eta):
        return np.ones_like(np.asarray(eta, dtype=float))


_LINKS: Dict[str, Type[LinkFunction]] = {
    cls.name: cls for cls in (Logit, Probit, CLogLog, Log, Identity)}


def get_link(name: str) -> LinkFunction:
    """Link instance from its configuration name."""
    try:
        return _LINKS[name.strip().lower()]()
    except KeyError:
        raise DomainError(
            f'unknown link {name!r}; expected one of {sorted(_LINKS)}') \
            from None
