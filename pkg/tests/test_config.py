# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
import textwrap

import numpy as np
import pytest

from pyzaqr.config import SubmodelConfig, load_config, write_config
from pyzaqr.data_container import Dataset
from pyzaqr.distributions import ContinuousFamily
from pyzaqr.envelope import ENVELOPE_BAND, ENVELOPE_REPLICATES
from pyzaqr.errors import ConfigError
from pyzaqr.links import Log, Logit
from pyzaqr.model import GRAD_TOL, MAX_ITER
from pyzaqr.residuals import RANDOMIZED, ZAQR, parse_kind
from pyzaqr.simulation import THRESHOLDS

MODEL = """\
[General]
family = zabe
response = score
id = id
seed = 42

[mu]
covariates = x1, x2
link = logit

[phi]
covariates =

[alpha]
covariates = x2
"""


@pytest.fixture
def ini(tmp_path):
    def write(text):
        path = tmp_path / 'run.ini'
        path.write_text(textwrap.dedent(text), encoding='utf-8')
        return path
    return write


@pytest.fixture
def data():
    return Dataset(y=[0.0, 0.2, 0.4, 0.6],
                   covariates=np.arange(8.0).reshape(4, 2),
                   names=['x1', 'x2'])


class TestLoad:

    def test_model_sections(self, ini):
        config = load_config(ini(MODEL))
        assert config.family is ContinuousFamily.BETA01
        assert config.response == 'score'
        assert config.id_column == 'id'
        assert config.seed == 42
        assert config.submodels['mu'].covariates == ('x1', 'x2')
        assert config.submodels['phi'].covariates == ()
        assert config.submodels['alpha'].link == 'logit'
        assert config.covariate_names() == ['x1', 'x2']

    def test_defaults(self, ini):
        config = load_config(ini(MODEL))
        assert config.fit_options.max_iter == MAX_ITER
        assert config.fit_options.grad_tol == GRAD_TOL
        assert config.kinds == (RANDOMIZED, ZAQR)
        assert config.deletion_rows == ()
        assert config.envelope_kind == ZAQR
        assert config.envelope_replicates == ENVELOPE_REPLICATES
        assert config.envelope_band == ENVELOPE_BAND
        assert config.scenario is None
        assert config.tails.thresholds == THRESHOLDS
        assert config.workers == 1

    def test_run_sections(self, ini):
        config = load_config(ini(MODEL + """
[fit]
max_iter = 50
grad_tol = 1e-6
gradient = numeric

[diagnose]
kinds = pearson, binary, zaqr
deletion_rows = 3, 4

[envelope]
kind = randomized
replicates = 39
band = 5, 95
workers = 2

[simulate]
reps = 200
thresholds = -2, 2
"""))
        assert config.fit_options.max_iter == 50
        assert config.fit_options.grad_tol == 1e-6
        assert config.fit_options.gradient == 'numeric'
        assert config.kinds == tuple(
            parse_kind(k) for k in ('pearson', 'binary', 'zaqr'))
        assert config.deletion_rows == (3, 4)
        assert config.envelope_kind == RANDOMIZED
        assert config.envelope_replicates == 39
        assert config.envelope_band == (5.0, 95.0)
        assert config.reps == 200
        assert config.tails.thresholds == (-2.0, 2.0)
        # [simulate] falls back to the envelope worker count
        assert config.workers == 2

    @pytest.mark.parametrize('text, value', [
        ('18446744073709551615', 2 ** 64 - 1),
        ('9007199254740993', 2 ** 53 + 1),
        ('0x10', 16),
        ('0', 0),
    ])
    def test_seed_is_exact(self, ini, text, value):
        config = load_config(ini(MODEL.replace('seed = 42', f'seed = {text}')))
        assert config.seed == value

    def test_minmax_band(self, ini):
        config = load_config(ini(MODEL + '\n[envelope]\nband = minmax\n'))
        assert config.envelope_band is None

    def test_model_spec(self, ini, data):
        spec = load_config(ini(MODEL)).model_spec(data)
        assert spec.mu.columns == (0, 1)
        assert isinstance(spec.mu.link, Logit)
        assert isinstance(spec.phi.link, Log)
        assert spec.alpha.columns == (1,)


class TestErrors:

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match='not found'):
            load_config(tmp_path / 'absent.ini')

    def test_bad_number(self, ini):
        with pytest.raises(ConfigError, match='max_iter'):
            load_config(ini(MODEL + '\n[fit]\nmax_iter = many\n'))

    def test_bad_family(self, ini):
        with pytest.raises(ConfigError):
            load_config(ini(MODEL.replace('zabe', 'zapoisson')))

    @pytest.mark.parametrize('text', ['18446744073709551616', '-1', '1.5'])
    def test_bad_seed(self, ini, text):
        with pytest.raises(ConfigError, match='seed'):
            load_config(ini(MODEL.replace('seed = 42', f'seed = {text}')))

    def test_bad_covariate_seed(self, ini):
        with pytest.raises(ConfigError, match='covariate_seed'):
            load_config(ini(MODEL + '\n[simulate]\nscenario = zabe-1\n'
                            'covariate_seed = 18446744073709551616\n'))

    def test_bad_kind(self, ini):
        with pytest.raises(ConfigError, match='kinds'):
            load_config(ini(MODEL + '\n[diagnose]\nkinds = sideways\n'))

    def test_bad_band(self, ini):
        with pytest.raises(ConfigError, match='band'):
            load_config(ini(MODEL + '\n[envelope]\nband = 2.5\n'))

    def test_bad_thresholds(self, ini):
        with pytest.raises(ConfigError):
            load_config(ini(MODEL + '\n[simulate]\nthresholds = 2, -2\n'))

    def test_unknown_covariate(self, ini, data):
        config = load_config(
            ini(MODEL.replace('covariates = x2\n', 'covariates = x9\n')))
        with pytest.raises(ConfigError, match='alpha'):
            config.model_spec(data)

    def test_bad_link(self, ini, data):
        config = load_config(
            ini(MODEL.replace('link = logit', 'link = sideways')))
        with pytest.raises(ConfigError):
            config.model_spec(data)

    def test_no_family(self, ini, data):
        config = load_config(ini('[General]\nresponse = y\n'))
        with pytest.raises(ConfigError, match='family'):
            config.model_spec(data)


class TestScenario:

    def test_preset_with_overrides(self, ini):
        config = load_config(ini(MODEL + """
[simulate]
scenario = zabe-1
n = 50
covariate_seed = 7
"""))
        assert config.scenario.name == 'zabe-1'
        assert config.scenario.n == 50
        assert config.scenario.covariate_seed == 7

    def test_custom(self, ini):
        config = load_config(ini(MODEL + """
[simulate]
family = zaga
n = 40
beta_mu = 1.0, 0.5
beta_phi = -0.7
beta_alpha = -1
mu_columns = 0
covariates = 1
"""))
        scenario = config.scenario
        assert scenario.family is ContinuousFamily.GAMMA
        assert scenario.n == 40
        assert scenario.beta_mu == (1.0, 0.5)
        assert scenario.mu_columns == (0,)
        assert scenario.alpha_columns == ()
        assert scenario.covariates.shape == (40, 1)
        assert scenario.mu_link == 'log'

    def test_unknown_preset(self, ini):
        with pytest.raises(ConfigError):
            load_config(ini(MODEL + '\n[simulate]\nscenario = zabe-9\n'))


def test_write_then_load(tmp_path):
    path = tmp_path / 'written.ini'
    write_config(
        path, ContinuousFamily.INVERSE_GAUSSIAN, 'cost',
        {'mu': SubmodelConfig(('age', 'dose'), 'log'),
         'alpha': SubmodelConfig(('age',), 'probit')},
        id_column='patient',
        fit={'max_iter': 80},
        envelope={'replicates': 59, 'band': ['10', '90']})
    config = load_config(path)
    assert config.family is ContinuousFamily.INVERSE_GAUSSIAN
    assert config.response == 'cost'
    assert config.id_column == 'patient'
    assert config.submodels['mu'].covariates == ('age', 'dose')
    assert config.submodels['alpha'].link == 'probit'
    assert 'phi' not in config.submodels
    assert config.fit_options.max_iter == 80
    assert config.envelope_replicates == 59
    assert config.envelope_band == (10.0, 90.0)
