# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
import dataclasses

import numpy as np
import pytest

from pyzaqr.distributions import normal_quantile
from pyzaqr.envelope import (
    halfnormal_envelope,
    halfnormal_scores,
    simulate_response,
)
from pyzaqr.errors import ConvergenceError, DomainError, SimulationError
from pyzaqr.model import Convergence, fit
from pyzaqr.parallel import map_replicates, replicate_rng, resolve_workers
from pyzaqr.residuals import RANDOMIZED, ZAQR
from pyzaqr.simulation import simulated_dataset, zabe_scenario_1

COLUMNS = ['i', 'score', 'lower', 'median', 'upper', 'observed']


def draw_uniform(payload, index, rng):
    return payload + index + rng.random()


class TestReplicates:

    def test_streams_are_independent_of_order(self):
        a = replicate_rng(7, 3, stream=1).random(4)
        b = replicate_rng(7, 3, stream=1).random(4)
        c = replicate_rng(7, 3, stream=2).random(4)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_map_in_index_order(self):
        inline = map_replicates(draw_uniform, 10.0, 6, seed=3, stream=1)
        pooled = map_replicates(draw_uniform, 10.0, 6, seed=3, stream=1,
                                workers=3)
        assert inline == pooled
        assert [int(v) for v in inline] == [10, 11, 12, 13, 14, 15]

    def test_resolve_workers(self):
        assert resolve_workers(3) == 3
        assert resolve_workers(0) >= 1
        assert resolve_workers(None) >= 1


class TestScores:

    def test_single_score(self):
        assert halfnormal_scores(1)[0] == pytest.approx(normal_quantile(0.75))

    def test_increasing_and_positive(self):
        scores = halfnormal_scores(200)
        assert np.all(np.diff(scores) > 0.0)
        assert scores[0] > 0.0


class TestSimulateResponse:

    def test_full_mixture(self, zabe_fit):
        y = simulate_response(zabe_fit, np.random.default_rng(1))
        assert y.shape == (zabe_fit.data.n,)
        assert np.all((y >= 0.0) & (y < 1.0))

    def test_keep_zeros(self, zabe_fit):
        y = simulate_response(zabe_fit, np.random.default_rng(1),
                              keep_zeros=True)
        np.testing.assert_array_equal(y == 0.0, zabe_fit.data.zero)


class TestEnvelope:

    def test_minmax_band(self, zabe_fit):
        table = halfnormal_envelope(zabe_fit, ZAQR, replicates=19, band=None,
                                    seed=5)
        assert list(table.columns) == COLUMNS
        assert len(table) == int(zabe_fit.data.positive.sum())
        assert table.attrs['dropped'] == 0
        assert np.all(table['lower'] <= table['median'])
        assert np.all(table['median'] <= table['upper'])
        assert np.all(np.diff(table['observed']) >= 0.0)

    def test_randomized_covers_zeros(self, zabe_fit):
        table = halfnormal_envelope(zabe_fit, RANDOMIZED, replicates=19,
                                    seed=5)
        assert len(table) == zabe_fit.data.n

    def test_reproducible(self, zabe_fit):
        a = halfnormal_envelope(zabe_fit, 'zaqr', replicates=19, seed=9)
        b = halfnormal_envelope(zabe_fit, 'zaqr', replicates=19, seed=9,
                                workers=2)
        np.testing.assert_array_equal(a.to_numpy(), b.to_numpy())

    def test_too_few_replicates(self, zabe_fit):
        with pytest.raises(DomainError):
            halfnormal_envelope(zabe_fit, ZAQR, replicates=18)

    def test_bad_band(self, zabe_fit):
        with pytest.raises(DomainError):
            halfnormal_envelope(zabe_fit, ZAQR, replicates=19,
                                band=(97.5, 2.5))

    def test_needs_converged_fit(self, zabe_fit):
        stalled = dataclasses.replace(
            zabe_fit, convergence=Convergence(False, 500, 1.0, 'stalled'))
        with pytest.raises(ConvergenceError):
            halfnormal_envelope(stalled, ZAQR, replicates=19)

    def test_failed_replicates(self, zabe_fit, monkeypatch):
        monkeypatch.setattr('pyzaqr.envelope._replicate',
                            lambda payload, index, rng: None)
        with pytest.warns(RuntimeWarning):
            with pytest.raises(SimulationError):
                halfnormal_envelope(zabe_fit, ZAQR, replicates=19)


@pytest.mark.slow
def test_band_covers_model_data():
    sc = zabe_scenario_1(n=300)
    shares = []
    for seed in range(5):
        result = fit(sc.model_spec(), simulated_dataset(sc, seed=100 + seed))
        assert result.converged
        table = halfnormal_envelope(result, ZAQR, replicates=100, seed=seed)
        inside = (table['lower'] <= table['observed']) & \
            (table['observed'] <= table['upper'])
        shares.append(inside.mean())
    assert np.mean(shares) > 0.9
