import numpy
import pytest
from scipy import special

from extsource.errors import OnRayError
from extsource.specfun import (AI0, AIP0, OMEGA, PHI_JUMPS, PHI_SIDES, SERIES_RADIUS, airy,
                               airy_asymptotic, airy_series, phi_matrix, sector_of)


def random_points(rng, count, rmax):
    r = rmax * numpy.sqrt(rng.uniform(0, 1, count))
    return r * numpy.exp(1j * rng.uniform(-numpy.pi, numpy.pi, count))


def test_values_at_zero():
    pair = airy(0.0)
    assert pair.ai == pytest.approx(0.3550280539, abs=1e-10)
    assert pair.ai_prime == pytest.approx(-0.2588194038, abs=1e-10)
    assert abs(pair.ai - AI0) < 1e-15 and abs(pair.ai_prime - AIP0) < 1e-15


def test_agrees_with_scipy(rng):
    s = numpy.concatenate([random_points(rng, 400, 20), numpy.linspace(-15, 15, 61)])
    ai, aip = airy(s)
    ref = special.airy(s)
    scale = 1 + numpy.abs(ref[0])
    assert numpy.max(numpy.abs(ai - ref[0]) / scale) < 1e-11
    assert numpy.max(numpy.abs(aip - ref[1]) / (1 + numpy.abs(ref[1]))) < 1e-11


def test_leading_asymptotic_at_five():
    s = 5.0
    lead = numpy.exp(-2 / 3 * s ** 1.5) / (2 * numpy.sqrt(numpy.pi) * s ** 0.25)
    ai = airy(s).ai.real
    assert abs(ai - lead) / ai < 0.01
    errors = [abs(airy_asymptotic(numpy.array([s + 0j]), terms=t)[0][0] - ai) for t in (6, 8, 12)]
    assert errors[0] < abs(ai - lead)
    assert errors[-1] <= errors[0]


def test_rotation_identity(rng):
    s = random_points(rng, 50, 8)
    terms = [airy(w * s)[0] * w for w in (1, OMEGA, OMEGA ** 2)]
    total = numpy.abs(sum(terms))
    scale = numpy.max(numpy.abs(terms), axis=0)
    assert numpy.max(total / scale) < 1e-12


def test_series_asymptotic_matching_on_crossover_circle():
    theta = numpy.linspace(-numpy.pi, numpy.pi, 73)
    s = SERIES_RADIUS * numpy.exp(1j * theta)
    series = airy_series(s)[0]
    asym = airy_asymptotic(s)[0]
    rel = numpy.abs(series - asym) / numpy.abs(series)
    assert rel.max() < 1e-9


def test_ode_residual(rng):
    s = random_points(rng, 40, 10)
    # truncation ~ h^2 |s|^2 / 12 and roundoff ~ eps / h^2 balance near h = 2e-4
    h = 2e-4
    ai = lambda t: airy(t)[0]
    second = (ai(s + h) - 2 * ai(s) + ai(s - h)) / h ** 2
    scale = numpy.abs(s * ai(s)) + numpy.abs(ai(s))
    assert numpy.max(numpy.abs(second - s * ai(s)) / scale) < 1e-7


def test_derivative_consistency(rng):
    s = random_points(rng, 30, 9)
    h = 1e-5
    fd = (airy(s + h)[0] - airy(s - h)[0]) / (2 * h)
    assert numpy.max(numpy.abs(fd - airy(s)[1]) / (1 + numpy.abs(airy(s)[1]))) < 1e-8


def test_sectors_and_rays():
    assert sector_of(1 + 1j) == 'I'
    assert sector_of(1 - 1j) == 'II'
    assert sector_of(-1.0 + 0.1j) == 'III'
    with pytest.raises(OnRayError):
        sector_of(2.0 + 0j)
    with pytest.raises(OnRayError):
        phi_matrix(numpy.exp(2j * numpy.pi / 3))
    with pytest.raises(ValueError):
        phi_matrix(1 + 1j, sector='II')


@pytest.mark.parametrize('ray', sorted(PHI_JUMPS))
def test_phi_jumps(ray):
    plus, minus = PHI_SIDES[ray]
    for r in (0.3, 1.0, 2.5, 6.0, 12.0):
        s = r * numpy.exp(1j * ray)
        p = phi_matrix(s, plus, check=False)
        m = phi_matrix(s, minus, check=False)
        rel = numpy.max(numpy.abs(p - m @ PHI_JUMPS[ray])) / numpy.max(numpy.abs(p))
        assert rel < 1e-10


def test_phi_jumps_one_sided_limit():
    # off-ray evaluations converge to the jump linearly in the angular offset
    for r in (0.5, 3.0):
        errs = []
        for eps in (1e-5, 1e-7):
            p = phi_matrix(r * numpy.exp(1j * eps))
            m = phi_matrix(r * numpy.exp(-1j * eps))
            errs.append(numpy.max(numpy.abs(p - m @ PHI_JUMPS[0.0])))
        assert errs[1] < 0.05 * errs[0]


def test_phi_determinant(rng):
    s = random_points(rng, 20, 6)
    for z in s:
        try:
            d = numpy.linalg.det(phi_matrix(z))
        except OnRayError:
            continue
        assert abs(d - 1j / (2 * numpy.pi)) < 1e-10 / (2 * numpy.pi)
