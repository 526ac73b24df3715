# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
import math

import hypothesis
import numpy as np
import pytest

from pyzaqr.data_container import Dataset
from pyzaqr.distributions import ContinuousFamily
from pyzaqr.links import Log, Logit
from pyzaqr.model import Convergence, SubmodelSpec, ZarModelSpec, fit, \
    restore_fit
from pyzaqr.simulation import simulated_dataset, zabe_scenario_1

np.seterr(all='warn')

hypothesis.settings.register_profile('fast', max_examples=10)
hypothesis.settings.register_profile('debugger', report_multiple_bugs=False)


def constant_fit(family, y, mu, phi, alpha, converged=True):
    """Intercept-only fit with the given parameters, without optimizing."""
    y = np.asarray(y, dtype=float)
    data = Dataset(y=y, covariates=np.empty((y.size, 0)))
    mu_link = Logit() if family is ContinuousFamily.BETA01 else Log()
    spec = ZarModelSpec(
        family=family,
        mu=SubmodelSpec((), mu_link),
        phi=SubmodelSpec((), Log()),
        alpha=SubmodelSpec((), Logit()))
    coefficients = [float(mu_link.forward(mu)), math.log(phi),
                    float(Logit().forward(alpha))]
    return restore_fit(spec, data, coefficients, 0.01 * np.eye(3), 0.0,
                       Convergence(converged, 1, 0.0, ''))


@pytest.fixture(scope='session')
def zabe_data():
    return simulated_dataset(zabe_scenario_1(n=300), seed=7)


@pytest.fixture(scope='session')
def zabe_fit(zabe_data):
    result = fit(zabe_scenario_1(n=300).model_spec(), zabe_data)
    assert result.converged
    return result
