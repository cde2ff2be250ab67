"""Save and load trained estimators as single-file containers.

Network weights, normalizers, and accepted populations are stored as arrays;
priors and encoders are not serialized, so loading requires the benchmark the
estimator was trained on (checked by id).
"""

from ..container import load_container, save_container
from .abc import AbcPosterior
from .base import EstimatorError, PriorEstimator
from .ensemble import EnsembleEstimator
from .npe import NpeEstimator
from .nre import RatioEstimator

_CLASSES = {
    "nre": RatioEstimator,
    "npe": NpeEstimator,
    "abc": AbcPosterior,
    "ensemble": EnsembleEstimator,
    "prior": PriorEstimator,
}


def estimator_class(method):
    try:
        return _CLASSES[method]
    except KeyError:
        raise EstimatorError(f"unknown estimator method {method!r}") from None


def save_estimator(path, estimator):
    meta, arrays = estimator.payload()
    save_container(path, kind="estimator", meta=meta, arrays=arrays)


def load_estimator(path, benchmark):
    _, meta, arrays = load_container(path, expect_kind="estimator")
    if meta["benchmark"] != benchmark.id:
        raise EstimatorError(
            f"estimator was trained on {meta['benchmark']!r}, "
            f"got benchmark {benchmark.id!r}")
    return estimator_class(meta["method"]).from_payload(meta, arrays, benchmark)
