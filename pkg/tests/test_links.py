# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
import numpy as np
import pytest
from hypothesis import given, strategies as st

from pyzaqr.errors import DomainError
from pyzaqr.links import (
    PROB_GUARD,
    CLogLog,
    Identity,
    Log,
    Logit,
    Probit,
    get_link,
)

PROBABILITY_LINKS = [Logit(), Probit(), CLogLog()]


@pytest.mark.parametrize('link', PROBABILITY_LINKS)
@given(theta=st.floats(min_value=1e-6, max_value=1.0 - 1e-6))
def test_probability_round_trip(link, theta):
    assert link.inverse(link.forward(theta)) == pytest.approx(theta, rel=1e-9)


@given(theta=st.floats(min_value=1e-100, max_value=1e100))
def test_log_round_trip(theta):
    assert Log().inverse(Log().forward(theta)) == pytest.approx(theta, rel=1e-12)


def test_identity_round_trip():
    assert Identity().inverse(Identity().forward(-3.5)) == -3.5


@pytest.mark.parametrize('link', PROBABILITY_LINKS)
def test_probability_links_are_guarded(link):
    values = link.inverse(np.array([-1e4, 1e4]))
    assert values[0] >= PROB_GUARD
    assert values[1] <= 1.0 - PROB_GUARD


def test_log_inverse_does_not_overflow():
    with np.errstate(over='raise'):
        assert np.isfinite(Log().inverse(1e6))


@pytest.mark.parametrize('link', PROBABILITY_LINKS + [Log(), Identity()])
@pytest.mark.parametrize('eta', [-2.0, -0.3, 0.0, 0.7, 1.9])
def test_inverse_derivative(link, eta):
    h = 1e-6
    numeric = (link.inverse(eta + h) - link.inverse(eta - h)) / (2.0 * h)
    assert link.inverse_derivative(eta) == pytest.approx(numeric, rel=1e-6)


def test_derivative_is_reciprocal():
    link = Logit()
    assert link.derivative(0.25) == pytest.approx(1.0 / (0.25 * 0.75))


def test_inverse_logit_by_hand():
    assert Logit().inverse(np.log(3.0)) == pytest.approx(0.75)


@pytest.mark.parametrize('name, cls', [
    ('logit', Logit), ('Probit', Probit), (' cloglog ', CLogLog),
    ('log', Log), ('identity', Identity)])
def test_get_link(name, cls):
    assert get_link(name) == cls()


def test_get_link_unknown():
    with pytest.raises(DomainError):
        get_link('sqrt')
