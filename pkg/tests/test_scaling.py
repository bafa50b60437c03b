import json

import numpy
import pytest
from scipy import special

from extsource.ensemble import EnsembleParams, build_kernel, correlation
from extsource.scaling import (ScalingReport, airy_kernel, bulk_check, edge_check, gauge_factor,
                               rate_estimate, rescaled_kernel, rescaled_matrix, sine_kernel)

from .conftest import A


@pytest.fixture(scope='module')
def kern32():
    return build_kernel(EnsembleParams(A, 32)).kernel


def test_diagonal_invariance(kern32):
    x = numpy.linspace(-1.5, 1.5, 7)
    # the gauge factor is exactly 1 on the diagonal
    assert numpy.all(numpy.diag(gauge_factor(x[:, None], x[None, :], A, 32)) == 1.0)
    diff = numpy.diag(rescaled_matrix(kern32, x, x)) - kern32.diagonal(x)
    assert numpy.max(numpy.abs(diff)) < 1e-13 * numpy.max(kern32.diagonal(x))


def test_correlations_gauge_invariant(kern32):
    pts = numpy.array([-0.7, 0.1, 0.55])
    r_hat = numpy.linalg.det(rescaled_matrix(kern32, pts, pts))
    assert r_hat == pytest.approx(correlation(kern32, pts), rel=1e-10)
    pair = pts[:2]
    r2 = numpy.linalg.det(rescaled_matrix(kern32, pair, pair))
    assert r2 == pytest.approx(correlation(kern32, pair), rel=1e-10)


def test_gauge_antisymmetry(rng):
    x, y = rng.uniform(-2, 2, (2, 50))
    prod = gauge_factor(x, y, A, 64) * gauge_factor(y, x, A, 64)
    assert numpy.max(numpy.abs(prod - 1)) < 1e-12


def test_scalar_rescaled_kernel(kern32):
    val = rescaled_kernel(EnsembleParams(A, 32), 0.2, 0.4, kernel=kern32)
    assert val == pytest.approx(rescaled_matrix(kern32, [0.2], [0.4])[0, 0], rel=1e-14)


def test_limit_kernels():
    u = numpy.linspace(-4, 2, 13)
    assert numpy.all(sine_kernel(u, u) == 1.0)
    ai, aip, _, _ = special.airy(u)
    assert numpy.max(numpy.abs(numpy.diag(airy_kernel(u[:, None], u[None, :]))
                               - (aip ** 2 - u * ai ** 2))) < 1e-12
    # off-diagonal limit approaches the diagonal value
    near = airy_kernel(numpy.array([1.0]), numpy.array([1.0 + 1e-6]))[0]
    assert near == pytest.approx(airy_kernel(1.0, 1.0), rel=1e-5)


def test_sine_kernel_zeros():
    k = numpy.arange(1, 5)
    assert numpy.max(numpy.abs(sine_kernel(k, 0))) < 1e-15


def test_rate_estimate():
    assert rate_estimate([10, 20, 40], [1.0, 0.5, 0.25]) == pytest.approx(-1.0)
    assert numpy.isnan(rate_estimate([10], [1.0]))


def test_bulk_check():
    rep = bulk_check(A, 0.0, [32, 64])
    assert rep.regime == 'bulk'
    assert rep.errors[1] < 0.05
    assert rep.monotone()
    assert max(rep.extras['sup_integer_separation_product']) < 0.05
    payload = json.loads(rep.to_json())
    assert [r['n'] for r in payload['rows']] == [32, 64]


def test_bulk_check_rejects_outside_support():
    with pytest.raises(ValueError):
        bulk_check(A, 3.0, [32])


def test_edge_check():
    rep = edge_check(A, [32, 100])
    assert rep.regime == 'edge'
    assert rep.monotone()
    assert rep.extras['diagonal_at_u2'][-1] < 0.02


def test_airy_kernel_diagonal_at_two():
    ai, aip, _, _ = special.airy(2.0)
    assert airy_kernel(2.0, 2.0) == pytest.approx(aip ** 2 - 2 * ai ** 2, rel=1e-12)
    assert airy_kernel(2.0, 2.0) < 4e-4


def test_report_monotone_slack():
    rep = ScalingReport('bulk', A, 0.0, [1, 2, 3], [0, 0, 0], [0, 0, 0], [1.0, 1.2, 1.3], -0.1)
    assert rep.monotone()
    assert not rep.monotone(slack=0.1)
