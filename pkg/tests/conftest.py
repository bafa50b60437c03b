import numpy
import pytest

from extsource.surface import branch_points

A = 0.4


@pytest.fixture(scope='session')
def bd():
    return branch_points(A)


@pytest.fixture
def rng():
    return numpy.random.default_rng(20240601)


def off_cut_points(rng, count, radius=3.0, margin=0.05):
    """Random complex points kept away from both cuts and the branch points."""
    bd = branch_points(A)
    out = []
    while len(out) < count:
        z = complex(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
        if abs(z.imag) < margin and abs(z.real) <= bd.z1 + margin:
            continue
        if abs(z.real) < margin and abs(z.imag) <= bd.z2 + margin:
            continue
        if numpy.min(numpy.abs(z - numpy.asarray(bd.points))) < 0.1:
            continue
        out.append(z)
    return numpy.array(out)
