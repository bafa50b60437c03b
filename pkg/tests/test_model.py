import numpy
import pytest

from extsource.errors import BranchPointProximity, OutsideDisk
from extsource.rh.model import (conformal_f, conformal_f_derivative, disk_radius, f_inverse,
                                local_P, matching_error, model_N, n_jump_residuals,
                                p_jump_residuals, removability_coefficient)

from .conftest import A, off_cut_points


def test_n_jumps():
    res = n_jump_residuals(A, count=20)
    assert set(res) == {'neg-real', 'pos-real', 'imag'}
    assert max(res.values()) < 1e-8


def test_det_n(rng):
    z = off_cut_points(rng, 50)
    det = numpy.linalg.det(model_N(z, A))
    assert numpy.max(numpy.abs(det - 1)) < 1e-10


def test_n_decay():
    worst = []
    for r in (1e2, 1e3, 1e4):
        z = r * numpy.exp(1j * (numpy.linspace(-numpy.pi, numpy.pi, 64, endpoint=False) + 0.01))
        dev = numpy.linalg.norm(model_N(z, A) - numpy.eye(3), ord=2, axis=(1, 2))
        worst.append(numpy.max(dev * r))
    assert max(worst) < 2 * min(worst)
    z = 1e3 * numpy.exp(0.3j)
    assert numpy.linalg.norm(model_N(z, A).value - numpy.eye(3), 2) < 1e-2


def test_n_refuses_branch_points(bd):
    with pytest.raises(BranchPointProximity):
        model_N(1j * bd.z2 + 1e-9, A)


def test_conformal_map(bd):
    assert abs(conformal_f(1j * bd.z2, A)) < 1e-12
    r0 = disk_radius(A)
    for y in numpy.linspace(0.1, 0.9, 5) * r0:
        s = conformal_f(1j * (bd.z2 - y), A, side='-')
        assert numpy.angle(s) == pytest.approx(-2 * numpy.pi / 3, abs=1e-8)
    theta = numpy.linspace(0, 2 * numpy.pi, 16, endpoint=False) + 0.1
    z = 1j * bd.z2 + 0.5 * r0 * numpy.exp(1j * theta)
    assert numpy.min(numpy.abs(conformal_f_derivative(z, A))) > 1e-3


def test_conformal_map_domain():
    with pytest.raises(OutsideDisk):
        conformal_f(0.0, A)


def test_f_inverse(bd):
    z = 1j * bd.z2 + 0.3 * disk_radius(A) * numpy.exp(0.7j)
    assert abs(f_inverse(conformal_f(z, A), A) - z) < 1e-12


def test_p_jumps():
    res = p_jump_residuals(A, 40)
    assert max(res.values()) < 1e-8


def test_removable_singularity():
    assert removability_coefficient(A, 40) < 1e-8


def test_matching_rate():
    errs = [matching_error(A, n) for n in (40, 80, 160)]
    for e1, e2 in zip(errs, errs[1:]):
        assert 1.5 <= e1 / e2 <= 2.5


def test_lower_disk_by_symmetry():
    assert matching_error(A, 80, center='lower') == pytest.approx(matching_error(A, 80),
                                                                  rel=1e-8)


def test_local_p_is_finite_inside(bd):
    z = 1j * bd.z2 + 0.5 * disk_radius(A) * numpy.exp(0.4j)
    assert numpy.all(numpy.isfinite(local_P(z, A, 80).value))
