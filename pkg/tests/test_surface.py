import numpy
import pytest
from hypothesis import given, settings, strategies as st

from extsource.errors import BranchPointProximity, OnCut, PoleAtSource, UnsupportedPhase
from extsource.surface import (SourceParams, assign_sheets, branch_points, cubic_residual,
                               map_z, map_z_derivative, sheet_values, solve_cubic,
                               track_sheets)

from .conftest import A, off_cut_points


def test_source_params_validation():
    SourceParams(a=0.4, n=50)
    with pytest.raises(ValueError):
        SourceParams(a=0.0, n=50)
    with pytest.raises(ValueError):
        SourceParams(a=0.4, n=51)


def test_cubic_at_origin_factorizes():
    roots = solve_cubic(0.0, A).roots
    expected = numpy.array([-1j * numpy.sqrt(1 - A * A), 0.0, 1j * numpy.sqrt(1 - A * A)])
    got = roots[numpy.argsort(roots.imag)]
    assert numpy.allclose(got, expected, atol=1e-14)


def test_cubic_gue_reduction():
    roots = solve_cubic(1.0, 0.0).roots
    expected = [0.0, (1 - 1j * numpy.sqrt(3)) / 2, (1 + 1j * numpy.sqrt(3)) / 2]
    assert numpy.allclose(roots, expected, atol=1e-14)


def test_cubic_large_z_matches_expansion():
    roots = numpy.sort(solve_cubic(100.0, A).roots.real)
    expected = numpy.sort([100 - 1 / 100, A + 1 / 200, -A + 1 / 200])
    assert numpy.all(numpy.abs(roots - expected) < 1e-3)


def test_cubic_ordering_and_vieta(rng):
    z = rng.uniform(-4, 4, 200) + 1j * rng.uniform(-4, 4, 200)
    cr = solve_cubic(z, A)
    r = cr.roots
    assert numpy.all(numpy.diff(numpy.round(r.real, 12), axis=-1) >= 0)
    scale = 1 + numpy.abs(z)
    assert numpy.max(numpy.abs(r.sum(-1) - z) / scale) < 1e-12
    pairs = r[:, 0] * r[:, 1] + r[:, 0] * r[:, 2] + r[:, 1] * r[:, 2]
    assert numpy.max(numpy.abs(pairs - (1 - A * A)) / scale) < 1e-12
    assert numpy.max(numpy.abs(r.prod(-1) + z * A * A) / scale) < 1e-12
    res = numpy.abs(cubic_residual(r, z[:, None], A)) / (1 + numpy.abs(r) ** 3)
    assert res.max() < 1e-12


def test_cubic_flags_double_roots(bd):
    assert solve_cubic(bd.z1, A).degenerate
    assert not solve_cubic(1.0 + 1.0j, A).degenerate


def test_map_z_examples(bd):
    assert map_z(1.0, 0.0) == pytest.approx(2.0)
    assert abs(map_z(bd.q, A) - bd.z1) < 1e-12
    assert abs(map_z(1j * bd.p, A) + 1j * bd.z2) < 1e-12
    assert abs(map_z_derivative(bd.q, A)) < 1e-10
    assert abs(map_z_derivative(1j * bd.p, A)) < 1e-10
    with pytest.raises(PoleAtSource):
        map_z(A, A)


def test_branch_data_values(bd):
    assert bd.q == pytest.approx(1.18953, abs=1e-5)
    assert bd.p == pytest.approx(0.30819, abs=1e-5)
    assert bd.z1 == pytest.approx(2.1373, abs=1e-4)
    assert bd.z2 == pytest.approx(0.9005, abs=1e-4)
    assert bd.p0 == pytest.approx(numpy.sqrt(0.84), abs=1e-14)


def test_branch_polynomial_factorization(bd):
    q2, p2, a2 = bd.q ** 2, bd.p ** 2, A * A
    # (x^2 + p^2)(x^2 - q^2) = x^4 + (p^2 - q^2) x^2 - p^2 q^2
    assert p2 - q2 == pytest.approx(-(1 + 2 * a2), abs=1e-12)
    assert -p2 * q2 == pytest.approx((a2 - 1) * a2, abs=1e-12)


def test_branch_points_reject_other_phases():
    for a in (1.0, 1.5):
        with pytest.raises(UnsupportedPhase):
            branch_points(a)


def test_small_a_limit_as_specified():
    """Stated limit: z1 -> 2 and z2 -> 0 as a -> 0, with 0 < z2 < z1."""
    bd = branch_points(1e-3)
    assert bd.z1 == pytest.approx(2.0, abs=1e-3)
    assert bd.z2 < 0.05
    assert 0 < bd.z2 < bd.z1


def test_small_a_limit_actual_behaviour():
    # z2 grows like 1/(2a) as a -> 0 and tends to 0 as a -> 1
    for a in (1e-2, 1e-3):
        assert branch_points(a).z2 * 2 * a == pytest.approx(1.0, rel=1e-3)
    assert branch_points(0.999).z2 < 1e-3
    assert branch_points(0.4).z2 < branch_points(0.4).z1


def test_sheets_at_large_real_z():
    xi = assign_sheets(10.0 + 0j, A).xi
    expected = [10 - 1 / 10, A + 1 / 20, -A + 1 / 20]
    assert numpy.allclose(xi, expected, atol=2e-2)


def test_region_labels_match_path_tracking(rng):
    z = off_cut_points(rng, 300)
    fast = assign_sheets(z, A).xi
    slow = track_sheets(z, A)
    assert numpy.max(numpy.abs(fast - slow)) < 1e-12


def test_round_trip_and_asymptotics(rng):
    z = off_cut_points(rng, 100)
    xi = assign_sheets(z, A).xi
    for j in range(3):
        assert numpy.max(numpy.abs(map_z(xi[:, j], A) - z) / numpy.abs(z)) < 1e-10
    big = numpy.array([50.0, -50.0, 50j, -50j, 35 + 35j])
    xb = assign_sheets(big, A).xi
    # two-term expansions leave an O(1/z^2) remainder
    bound = 5.0 / numpy.abs(big) ** 2
    assert numpy.all(numpy.abs(xb[:, 0] - (big - 1 / big)) < bound)
    assert numpy.all(numpy.abs(xb[:, 1] - (A + 1 / (2 * big))) < bound)
    assert numpy.all(numpy.abs(xb[:, 2] - (-A + 1 / (2 * big))) < bound)


def test_real_cut_jumps(bd):
    x = numpy.linspace(0.05, 0.95, 15) * bd.z1
    plus = sheet_values(x, A, '+')
    minus = sheet_values(x, A, '-')
    assert numpy.max(numpy.abs(minus[:, 0] - plus[:, 1])) < 1e-8
    assert numpy.max(numpy.abs(plus[:, 0] - minus[:, 1])) < 1e-8
    plus = sheet_values(-x, A, '+')
    minus = sheet_values(-x, A, '-')
    assert numpy.max(numpy.abs(minus[:, 0] - plus[:, 2])) < 1e-8
    assert numpy.max(numpy.abs(plus[:, 0] - minus[:, 2])) < 1e-8


def test_imaginary_cut_jumps(bd):
    y = numpy.concatenate([numpy.linspace(0.05, 0.95, 8), -numpy.linspace(0.05, 0.95, 8)])
    z = 1j * y * bd.z2
    plus = sheet_values(z, A, '+')
    minus = sheet_values(z, A, '-')
    assert numpy.max(numpy.abs(minus[:, 1] - plus[:, 2])) < 1e-8
    assert numpy.max(numpy.abs(plus[:, 1] - minus[:, 2])) < 1e-8
    assert numpy.max(numpy.abs(plus[:, 0] - minus[:, 0])) < 1e-8


def test_density_boundary_value(bd):
    xi = sheet_values(numpy.array([0.5]), A, '+')
    assert xi[0, 0].imag > 0


def test_cut_points_need_a_side(bd):
    with pytest.raises(OnCut):
        assign_sheets(1.0 + 0j, A)
    with pytest.raises(OnCut):
        sheet_values(0.5j, A)
    with pytest.raises(OnCut):
        sheet_values(0j, A, '+')


def test_branch_point_proximity(bd):
    with pytest.raises(BranchPointProximity):
        assign_sheets(bd.z1 + 1e-8 + 1e-8j, A)


def test_no_label_swaps_along_a_path():
    # a path from far right around the first quadrant to the far left
    theta = numpy.linspace(0, numpy.pi, 4001)
    z = 3.0 * numpy.exp(1j * theta)
    z[0] += 1e-3j
    z[-1] += 1e-3j
    xi = assign_sheets(z, A).xi
    steps = numpy.max(numpy.abs(numpy.diff(xi, axis=0)), axis=1)
    gaps = numpy.min(numpy.abs(xi[:, [0, 0, 1]] - xi[:, [1, 2, 2]]), axis=1)
    assert numpy.all(steps < gaps[1:])


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-5, 5), st.floats(0.02, 5))
def test_property_round_trip_upper_half_plane(a, x, y):
    z = complex(x, y)
    bd = branch_points(a)
    if numpy.min(numpy.abs(z - numpy.asarray(bd.points))) < 1e-3:
        return
    if abs(x) < 1e-9 and y <= bd.z2:
        return
    xi = assign_sheets(z, a).xi
    assert numpy.max(numpy.abs(map_z(xi, a) - z)) < 1e-9 * (1 + abs(z))
    assert abs(xi.sum() - z) < 1e-11 * (1 + abs(z))
