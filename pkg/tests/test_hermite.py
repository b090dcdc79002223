import numpy as np
import pytest

from opcert.hermite import MAX_ORDER, gauss_hermite, hermite_function, hermite_functions


def test_orthonormality_via_quadrature():
    x, w = gauss_hermite(80)
    H = hermite_functions(25, x)
    gram = np.einsum("ik,jk,k->ij", H, H, w)
    assert np.abs(gram - np.eye(26)).max() < 1e-12


@pytest.mark.parametrize("m", [32, 64, 128, 200, 400])
def test_compensated_weights_reproduce_sqrt_pi(m):
    x, w = gauss_hermite(m)
    assert abs(np.sum(w * np.exp(-x * x)) - np.sqrt(np.pi)) < 1e-12
    assert np.all(np.isfinite(w)) and np.all(w > 0)


def test_single_function_matches_batch():
    u = np.linspace(-8, 8, 41)
    H = hermite_functions(40, u)
    for n in (0, 1, 7, 40):
        assert np.allclose(hermite_function(n, u), H[n], rtol=0, atol=1e-14)


def test_no_overflow_deep_orders():
    u = np.linspace(-30, 30, 11)
    h = hermite_function(1000, u)
    assert np.all(np.isfinite(h))
    # normalization survives: quadrature norm of h_300 is 1
    x, w = gauss_hermite(400)
    h300 = hermite_function(300, x)
    assert abs(np.sum(w * h300 * h300) - 1.0) < 1e-10


def test_order_validation():
    with pytest.raises(ValueError):
        hermite_function(-1, 0.0)
    with pytest.raises(ValueError):
        hermite_function(MAX_ORDER + 1, 0.0)
    with pytest.raises(ValueError):
        gauss_hermite(0)
