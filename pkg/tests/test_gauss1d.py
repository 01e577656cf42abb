import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpconc.errors import DomainError, InvalidArgumentError
from sharpconc.gauss1d import density, phi, phi_interval, phi_inv

mpmath.mp.dps = 40


def quadrature_cdf(s: float) -> float:
    """Independent oracle: high-precision quadrature of the density."""
    f = lambda t: mpmath.exp(-t * t / 2) / mpmath.sqrt(2 * mpmath.pi)
    if s <= 0:
        return float(mpmath.quad(f, [-mpmath.inf, s]))
    return float(1 - mpmath.quad(f, [s, mpmath.inf]))


# frozen from quadrature_cdf(1.0) at 40 digits
PHI_ONE = 0.8413447460685429


def test_phi_at_zero_is_half():
    assert phi(0.0) == 0.5


def test_phi_one_matches_frozen_quadrature():
    assert abs(quadrature_cdf(1.0) - PHI_ONE) < 1e-15
    assert abs(phi(1.0) - PHI_ONE) <= 1e-12


@pytest.mark.parametrize("s", [-8.0, -6.5, -3.0, -1.0, -0.2, 0.4, 2.5, 5.0, 8.0])
def test_phi_absolute_accuracy(s):
    assert abs(phi(s) - quadrature_cdf(s)) <= 1e-14


@pytest.mark.parametrize("s", [-8.0, -5.0, -2.0])
def test_phi_lower_tail_relative_accuracy(s):
    ref = quadrature_cdf(s)
    assert abs(phi(s) - ref) <= 1e-13 * ref


@pytest.mark.parametrize("s", [0.3, 1.7, 4.0])
def test_phi_symmetry(s):
    assert phi(s) + phi(-s) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_phi_rejects_non_finite(bad):
    with pytest.raises(InvalidArgumentError):
        phi(bad)
    with pytest.raises(InvalidArgumentError):
        phi(np.array([0.0, bad]))


def test_phi_vectorized_matches_scalar():
    xs = np.linspace(-7, 7, 101)
    assert np.array_equal(phi(xs), np.array([phi(float(x)) for x in xs]))


@pytest.mark.parametrize("s", [-4.0, -1.0, 0.0, 0.7, 3.0])
def test_phi_derivative_is_density(s):
    h = 1e-5
    numeric = (phi(s + h) - phi(s - h)) / (2 * h)
    # O(h^2) truncation plus rounding ~ 1e-16 / h
    assert abs(numeric - density(s)) <= 1e-9


def test_phi_inv_at_half():
    assert phi_inv(0.5) == 0.0


def test_phi_inv_frozen_value():
    assert abs(phi_inv(0.841344746) - 1.0) <= 1e-8


def test_phi_inv_round_trip_example():
    assert abs(phi_inv(phi(1.3)) - 1.3) <= 1e-10


@pytest.mark.parametrize("s", np.linspace(-6.0, 5.0, 45))
def test_phi_inv_round_trip_grid(s):
    assert abs(phi_inv(phi(s)) - s) <= 1e-10


@pytest.mark.parametrize("s", [5.25, 5.5, 6.0])
def test_phi_inv_upper_tail_consistent(s):
    # 1 - phi(s) < 1e-7 here, so phi(s) has lost the digits needed to pin
    # s to 1e-10; the inverse must still reproduce phi(s) itself
    p = phi(s)
    assert abs(phi(phi_inv(p)) - p) <= 1e-12
    assert abs(phi_inv(p) - s) <= 1e-5


@pytest.mark.parametrize("p", [1e-300, 1e-20, 1e-9, 0.01, 0.3, 0.5, 0.77, 0.999, 1 - 1e-12])
def test_phi_inv_residual(p):
    assert abs(phi(phi_inv(p)) - p) <= 1e-12


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5, math.nan, "x"])
def test_phi_inv_domain(bad):
    with pytest.raises(DomainError):
        phi_inv(bad)


@settings(max_examples=200, deadline=None)
@given(st.floats(-8, 8), st.floats(-8, 8))
def test_phi_monotone(a, b):
    if a == b:
        return
    lo, hi = min(a, b), max(a, b)
    if hi - lo > 1e-12:
        assert phi(lo) < phi(hi) or phi(hi) == 1.0
    assert phi(lo) <= phi(hi)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-12, 1 - 1e-12), st.floats(1e-12, 1 - 1e-12))
def test_phi_inv_monotone(p, q):
    if p < q:
        assert phi_inv(p) <= phi_inv(q)


@pytest.mark.parametrize("lo,hi", [(-1.0, 0.5), (3.0, 3.1), (6.0, 6.01), (-7.0, -6.9), (-math.inf, 0.2),
                                   (1.0, math.inf)])
def test_phi_interval_matches_quadrature(lo, hi):
    f = lambda t: mpmath.exp(-t * t / 2) / mpmath.sqrt(2 * mpmath.pi)
    ref = float(mpmath.quad(f, [lo, hi]))
    assert phi_interval(lo, hi) == pytest.approx(ref, rel=1e-12, abs=1e-300)
