import pickle

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from saledi.estimators import ParetoTailEstimator, TruncatedLognormalEstimator, check_cmip
from saledi.exceptions import DataError
from saledi.metrics import log_normalized
from saledi.tailfit import select_m_large


@pytest.fixture
def tail_data(rng):
    body = rng.uniform(0.001, 0.1, 700)
    tail = 0.1 * (1 - rng.random(300)) ** (-1 / 0.9)
    return np.r_[body, tail]


def test_params_round_trip():
    est = ParetoTailEstimator(m_large=0.2, min_tail=80)
    assert est.get_params()["m_large"] == 0.2
    c = clone(est.set_params(n_bootstrap=200))
    assert c.get_params() == est.get_params()
    assert "min_quantile" in TruncatedLognormalEstimator().get_params()


def test_fit_matches_functional_api(tail_data):
    est = ParetoTailEstimator().fit(tail_data)
    fit = select_m_large(tail_data)
    assert est.tail_fit_ == fit
    assert est.aled_ == pytest.approx(1 / fit.alpha)


def test_fixed_threshold(tail_data):
    est = ParetoTailEstimator(m_large=0.1).fit(tail_data)
    assert est.m_large_ == 0.1
    assert est.n_tail_ == int(np.sum(tail_data >= 0.1))


def test_transform_is_log_normalized(tail_data):
    est = ParetoTailEstimator(m_large=0.1).fit(tail_data)
    out = est.transform(tail_data)
    mask = tail_data >= 0.1
    assert np.all(np.isnan(out[~mask]))
    assert np.allclose(out[mask], log_normalized(tail_data[mask], 0.1))
    # exceedance of the logs is the Pareto exceedance of M
    assert np.allclose(np.exp(-est.alpha_ * out[mask]), est.sf(tail_data[mask]))


def test_column_vector_and_pipeline(tail_data):
    pipe = make_pipeline(FunctionTransformer(lambda x: x * 60.0), ParetoTailEstimator(m_large=6.0))
    out = pipe.fit_transform(tail_data.reshape(-1, 1))
    direct = ParetoTailEstimator(m_large=0.1).fit(tail_data)
    assert pipe[-1].alpha_ == pytest.approx(direct.alpha_, rel=1e-12)
    assert out.shape == tail_data.shape


def test_score_and_pickle(tail_data):
    est = ParetoTailEstimator().fit(tail_data)
    again = pickle.loads(pickle.dumps(est))
    assert again.score(tail_data) == est.score(tail_data)


def test_goodness_of_fit_uses_estimator_seed(tail_data):
    est = ParetoTailEstimator(n_bootstrap=100, random_state=4).fit(tail_data)
    assert est.goodness_of_fit() == est.goodness_of_fit(tail_data)


def test_unfitted_raises():
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        ParetoTailEstimator().transform([1.0])


@pytest.mark.parametrize("bad", [[[1.0, 2.0]], [np.nan, 1.0], [-1.0, 2.0], np.ones((2, 2, 2))])
def test_input_validation(bad):
    with pytest.raises(DataError):
        check_cmip(bad)


def test_lognormal_estimator(rng):
    x = np.exp(rng.normal(0.0, 2.0, 3000))
    est = TruncatedLognormalEstimator(max_candidates=20).fit(x)
    assert est.sigma_ == pytest.approx(2.0, rel=0.15)
    assert np.isfinite(est.score(x))
