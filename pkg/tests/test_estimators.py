from __future__ import annotations

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rosslerlab.knots import KnotTyper
from rosslerlab.manifolds import TrefoilSearch
from rosslerlab.periodic import PeriodicOrbitFinder
from rosslerlab.return_map import FirstReturnMap, SymbolicCoder

ESTIMATORS = [FirstReturnMap, SymbolicCoder, PeriodicOrbitFinder, TrefoilSearch, KnotTyper]


@pytest.mark.parametrize("cls", ESTIMATORS)
def test_params_round_trip(cls):
    est = cls()
    params = est.get_params()
    assert params
    twin = clone(est)
    assert twin is not est and twin.get_params() == params
    key = next(iter(params))
    est.set_params(**{key: params[key]})
    assert est.get_params() == params


@pytest.mark.parametrize("cls,call", [
    (FirstReturnMap, lambda e: e.transform([[0.0, 1.0]])),
    (SymbolicCoder, lambda e: e.predict([[0.0, 1.0]])),
    (PeriodicOrbitFinder, lambda e: e.predict()),
    (TrefoilSearch, lambda e: e.score()),
    (KnotTyper, lambda e: e.predict([])),
])
def test_not_fitted(cls, call):
    with pytest.raises(NotFittedError):
        call(cls())


def test_unknown_param_rejected():
    with pytest.raises(ValueError):
        FirstReturnMap().set_params(d=1.0)
