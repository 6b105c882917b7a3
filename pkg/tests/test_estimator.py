import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cavity_spectra import CavityEigensolver
from cavity_spectra.exceptions import InvalidArgumentError, NotAdmissibleError
from cavity_spectra.material import ExpressionField, centered_bump, identity, make_diagonal_direction

from conftest import CUBE


@pytest.fixture(scope="module")
def fitted():
    return CavityEigensolver(subdivisions=4, tau=2.0, n_eigs=8).fit(identity())


def test_params_and_clone():
    est = CavityEigensolver(subdivisions=5, tau=3.0)
    params = est.get_params()
    assert params["subdivisions"] == 5 and params["tau"] == 3.0
    c = clone(est)
    assert c.get_params() == params and c is not est
    est.set_params(n_eigs=4)
    assert est.n_eigs == 4


def test_fit_attributes(fitted):
    assert fitted.eigenvalues_.shape == (8,)
    assert len(fitted.labels_) == 8
    np.testing.assert_allclose(fitted.maxwell_eigenvalues_[:3], 2.0, rtol=0.06)
    assert fitted.coercivity_.c_eps == pytest.approx(1.0)


def test_transform_identity_direction(fitted):
    D = fitted.transform([identity(), 2.0 * identity()])
    assert D.shape == (2, 8)
    # the lowest triple is exactly divergence free: derivative is -lambda
    np.testing.assert_allclose(D[0, :3], -fitted.eigenvalues_[:3], rtol=1e-9)
    np.testing.assert_allclose(D[1], 2 * D[0], rtol=1e-12)


def test_predict_first_order(fitted):
    eta = make_diagonal_direction([1, 0.5, 0.25], centered_bump(CUBE), extent=CUBE)
    pred = fitted.predict((eta, 0.0))
    np.testing.assert_array_equal(pred, fitted.maxwell_eigenvalues_)
    pred = fitted.predict((identity(), 0.01))
    np.testing.assert_allclose(pred[:3], fitted.eigenvalues_[:3] * 0.99, rtol=1e-9)


def test_not_fitted_and_bad_input():
    est = CavityEigensolver(subdivisions=3)
    with pytest.raises(NotFittedError):
        est.transform(identity())
    with pytest.raises(InvalidArgumentError):
        est.fit(np.eye(3))
    with pytest.raises(NotAdmissibleError):
        est.fit(ExpressionField({"xx": "x - 1"}))
