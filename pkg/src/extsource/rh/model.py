"""
Model parametrix N away from the branch points and the local Airy
parametrix P in a disk around i z2 (and, by conjugation symmetry, -i z2).

N is built from the sheet values and the scalar functions

    N_1(xi) = (xi^2 - a^2)/sqrt(R),   N_{2,3}(xi) = c (xi +- a)/sqrt(R),

with R(xi) = (xi^2 + p^2)(xi^2 - q^2) and c = -i/sqrt(2).  The square root
is xi sqrt(1 - q^2/xi^2) xi sqrt(1 + p^2/xi^2) on sheet 1 and
-i sqrt(q^2 - xi^2) xi sqrt(1 + p^2/xi^2) on sheets 2 and 3.
"""

from dataclasses import dataclass

import numpy

from ..errors import BranchPointProximity, OutsideDisk
from ..specfun import phi_matrix
from ..surface import (_check_proximity, _sided_roots, branch_points,
                       map_z_derivative)
from .lambdas import delta_lambda_23

__all__ = ['ModelSolution', 'LocalParametrix', 'N_JUMPS', 'model_N', 'sqrt_R',
           'conformal_f', 'conformal_f_derivative', 'f_inverse', 'disk_radius',
           'local_P', 'p_jump_residuals', 'n_jump_residuals', 'matching_error',
           'removability_coefficient', 'SIGMA']

C23 = -1j / numpy.sqrt(2.0)
SIGMA = numpy.diag([1.0, -1.0, -1.0]).astype(complex)

N_JUMPS = {
    'neg-real': numpy.array([[0, 0, 1], [0, 1, 0], [-1, 0, 0]], dtype=complex),
    'pos-real': numpy.array([[0, 1, 0], [-1, 0, 0], [0, 0, 1]], dtype=complex),
    'imag': numpy.array([[1, 0, 0], [0, 0, 1], [0, -1, 0]], dtype=complex),
}


@dataclass(frozen=True)
class ModelSolution:
    value: numpy.ndarray
    z: complex


@dataclass(frozen=True)
class LocalParametrix:
    value: numpy.ndarray
    z: complex
    n: int
    center: complex


def _sqrt_formula(xi, bd):
    q2, p2 = bd.q ** 2, bd.p ** 2
    s2 = xi * numpy.sqrt(1.0 + p2 / (xi * xi))
    outer = xi * numpy.sqrt(1.0 - q2 / (xi * xi)) * s2
    inner = -1j * numpy.sqrt(q2 - xi * xi) * s2
    out = inner.copy()
    out[..., 0] = outer[..., 0]
    return out


def sqrt_R(xi, bd, reference=None):
    """
    Branch of sqrt(R) for sheet-ordered roots ``xi`` (last axis = sheet).

    Roots sitting exactly on a cut of the formula are resolved by matching
    the sign of the value at ``reference`` (roots at a nearby probe point).
    """
    val = _sqrt_formula(xi, bd)
    if reference is not None:
        ref = _sqrt_formula(reference, bd)
        flip = numpy.abs(val - ref) > numpy.abs(val + ref)
        val = numpy.where(flip, -val, val)
    return val


def _model_values(flat, a, bd, side):
    probe, xi = _sided_roots(flat, a, bd, side)
    root = sqrt_R(xi, bd, probe)
    out = numpy.empty(flat.shape + (3, 3), dtype=complex)
    out[:, 0, :] = (xi * xi - a * a) / root
    out[:, 1, :] = C23 * (xi + a) / root
    out[:, 2, :] = C23 * (xi - a) / root
    return out


def model_N(z, a, side=None):
    """
    Model parametrix N(z); ``side`` picks the boundary value on a cut.

    Scalars give a :class:`ModelSolution`; arrays give an array of shape
    ``z.shape + (3, 3)``.
    """
    bd = branch_points(a)
    arr = numpy.asarray(z, dtype=complex)
    flat = arr.reshape(-1)
    _check_proximity(flat, bd)
    vals = _model_values(flat, a, bd, side)
    if arr.ndim == 0:
        return ModelSolution(value=vals[0], z=complex(z))
    return vals.reshape(arr.shape + (3, 3))


def n_jump_residuals(a, count=20):
    """Max residual of N+ - N- J on each cut piece (interior sample points)."""
    bd = branch_points(a)
    t = (numpy.arange(count) + 0.5) / count
    pieces = {'neg-real': -t * bd.z1 + 0j, 'pos-real': t * bd.z1 + 0j,
              'imag': 1j * bd.z2 * (2.0 * t - 1.0)}
    pieces['imag'] = pieces['imag'][pieces['imag'] != 0]
    out = {}
    for name, z in pieces.items():
        plus = model_N(z, a, '+')
        minus = model_N(z, a, '-')
        out[name] = float(numpy.max(numpy.abs(plus - minus @ N_JUMPS[name])))
    return out


# ==============
# Conformal map
# ==============

def disk_radius(a):
    bd = branch_points(a)
    return min(bd.z2, bd.z1) / 4.0


def _g_center(a, bd):
    """G(i z2) = 2/z''(xi*) for the double root xi* = -i p."""
    return 2.0 / complex(map_z_derivative(-1j * bd.p, a, order=2))


_CUBE_BRANCH = {}


def _cube_root_branch(a, bd):
    key = float(a)
    if key not in _CUBE_BRANCH:
        w = 1j * bd.z2
        g0 = _g_center(a, bd)
        probe = w + 0.5j * disk_radius(a)
        ratio = _g_ratio(numpy.array([probe]), a, bd, None)[0]
        best = None
        for k in range(3):
            root = abs(g0) ** (1.0 / 3.0) * numpy.exp(1j * (numpy.angle(g0) + 2 * numpy.pi * k) / 3)
            f = (probe - w) * root * ratio ** (1.0 / 3.0)
            err = abs(numpy.angle(f) - numpy.pi / 3)
            if best is None or err < best[0]:
                best = (err, root)
        _CUBE_BRANCH[key] = best[1]
    return _CUBE_BRANCH[key]


def _g_ratio(z, a, bd, side):
    """G(z)/G(i z2) with G = (3/4 (lambda_2 - lambda_3))^2 / (z - i z2)^3."""
    w = 1j * bd.z2
    d = z - w
    g0 = _g_center(a, bd)
    out = numpy.ones(z.shape, dtype=complex)
    far = numpy.abs(d) > 1e-4 * disk_radius(a)
    if numpy.any(far):
        dl = delta_lambda_23(z[far], a, side)
        out[far] = (0.75 * dl) ** 2 / d[far] ** 3 / g0
    return out


def conformal_f(z, a, side=None, check=True):
    """
    f(z) = (3/4 (lambda_2 - lambda_3))^(2/3) near i z2, as
    (z - i z2) G(z)^(1/3) with G analytic and nonzero at i z2; the cube
    root branch makes arg f(iy) = pi/3 for y > z2.
    """
    bd = branch_points(a)
    arr = numpy.asarray(z, dtype=complex)
    flat = arr.reshape(-1)
    w = 1j * bd.z2
    if check and numpy.any(numpy.abs(flat - w) > disk_radius(a) * (1 + 1e-12)):
        raise OutsideDisk(f'point outside the disk of radius {disk_radius(a)} about i z2')
    root = _cube_root_branch(a, bd)
    f = (flat - w) * root * _g_ratio(flat, a, bd, side) ** (1.0 / 3.0)
    return f.reshape(arr.shape) if arr.ndim else complex(f[0])


def conformal_f_derivative(z, a, h=1e-6):
    """Central-difference derivative of f."""
    return (conformal_f(z + h, a, check=False) - conformal_f(z - h, a, check=False)) / (2 * h)


def f_inverse(s, a, tol=1e-14, maxiter=60):
    """Solve f(z) = s near i z2 by Newton's method."""
    bd = branch_points(a)
    w = 1j * bd.z2
    root = _cube_root_branch(a, bd)
    z = w + s / root
    for _ in range(maxiter):
        fz = conformal_f(z, a, check=False)
        dz = (fz - s) / conformal_f_derivative(z, a)
        z = z - dz
        if abs(dz) < tol * (1 + abs(z)):
            break
    return z


# ===================
# Airy parametrix P
# ===================

def _arg_f(f, z, bd, side):
    """arg f in (-2 pi/3, 4 pi/3]; on the vertical part the side decides."""
    theta = numpy.angle(f)
    on_cut = z.real == 0.0 and 0.0 < z.imag < bd.z2
    if on_cut:
        return 4.0 * numpy.pi / 3.0 if side == '+' else -2.0 * numpy.pi / 3.0
    if theta <= -2.0 * numpy.pi / 3.0:
        theta += 2.0 * numpy.pi
    return theta


def _sector(theta):
    if 0.0 < theta < 2.0 * numpy.pi / 3.0:
        return 'I'
    if -2.0 * numpy.pi / 3.0 < theta < 0.0:
        return 'II'
    return 'III'


def _local_upper(z, a, n, side, sector):
    bd = branch_points(a)
    z = complex(z)
    f = conformal_f(z, a, side)
    theta = _arg_f(f, z, bd, side)
    on_cut = z.real == 0.0 and 0.0 < z.imag < bd.z2
    if sector is not None:
        sec = sector
    elif on_cut:
        sec = 'III' if side == '+' else 'II'
    else:
        sec = _sector(theta)
    s = n ** (2.0 / 3.0) * f
    phi = phi_matrix(s, sec, check=sector is None and not on_cut)
    dl = complex(delta_lambda_23(numpy.array([z]), a, side)[0])
    d = numpy.diag([1.0, numpy.exp(n * dl / 2), numpy.exp(-n * dl / 2)])
    f4 = abs(f) ** 0.25 * numpy.exp(1j * theta / 4)
    # the 1/(2 sqrt(pi)) normalisation acts on the Airy block only
    scale = 1.0 / (2 * numpy.sqrt(numpy.pi))
    left = numpy.diag([1.0, scale * n ** (-1 / 6) / f4, scale * n ** (1 / 6) * f4])
    mix = numpy.array([[1, 0, 0], [0, 1, 1j], [0, -1, 1j]], dtype=complex)
    lmat = left @ mix
    nmat = model_N(z, a, side).value
    e = nmat @ numpy.linalg.inv(lmat)
    return e @ phi @ d, e


def local_P(z, a, n, center='upper', side=None, sector=None):
    """
    Airy parametrix P = E Phi(n^(2/3) f) diag(1, e^(n dl/2), e^(-n dl/2))
    with dl = lambda_2 - lambda_3 and E = N L^-1.

    ``center`` is 'upper' (i z2) or 'lower' (-i z2); the lower one is
    S conj(P(conj z)) S with S = diag(1, -1, -1).  ``sector`` forces the
    Airy sector, which gives one-sided values on the contours.
    """
    if n % 2:
        raise ValueError('n must be even')
    if center == 'upper':
        val, _ = _local_upper(z, a, n, side, sector)
        c = 1j * branch_points(a).z2
    elif center == 'lower':
        val, _ = _local_upper(numpy.conj(z), a, n, side, sector)
        val = SIGMA @ val.conj() @ SIGMA
        c = -1j * branch_points(a).z2
    else:
        raise ValueError("center must be 'upper' or 'lower'")
    return LocalParametrix(value=val, z=complex(z), n=int(n), center=c)


def p_jump_residuals(a, n, count=10):
    """
    Residuals of the three jumps of P inside the disk (relative to the
    size of the jump product).  Points on the left and right contours are
    f-preimages of the rays arg s = 2 pi/3 and arg s = 0.
    """
    bd = branch_points(a)
    r0 = disk_radius(a)
    t = (numpy.arange(count) + 0.5) / count
    out = {}
    # vertical part: + is left (sector III), - is right (sector II)
    res = 0.0
    for y in bd.z2 - 0.9 * r0 * t:
        z = 1j * y
        pp = local_P(z, a, n, side='+').value
        pm = local_P(z, a, n, side='-').value
        l3p, l3m = _lambda3_jump(z, a)
        jump = numpy.array([[1, 0, 0], [0, 0, 1], [0, -1, numpy.exp(n * (l3p - l3m))]])
        res = max(res, _rel(pp, pm @ jump))
    out['vertical'] = res
    fmax = abs(conformal_f(1j * bd.z2 + r0, a))
    for name, ray, plus, minus in (('right', 0.0, 'I', 'II'),
                                    ('left', 2 * numpy.pi / 3, 'I', 'III')):
        res = 0.0
        for rho in 0.8 * fmax * t:
            z = f_inverse(rho * numpy.exp(1j * ray), a)
            if abs(z - 1j * bd.z2) > 0.95 * r0:
                continue
            pp = local_P(z, a, n, sector=plus).value
            pm = local_P(z, a, n, sector=minus).value
            dl = complex(delta_lambda_23(numpy.array([z]), a)[0])
            if name == 'right':
                jump = numpy.array([[1, 0, 0], [0, 1, numpy.exp(-n * dl)], [0, 0, 1]])
            else:
                jump = numpy.array([[1, 0, 0], [0, 1, 0], [0, numpy.exp(n * dl), 1]])
            res = max(res, _rel(pp, pm @ jump))
        out[name] = res
    return out


def _lambda3_jump(z, a):
    """lambda_3+ and lambda_3- on the vertical part via lambda_3+ = lambda_2-."""
    from .lambdas import lambda_j
    return lambda_j(z, a, 3, '+'), lambda_j(z, a, 3, '-')


def _rel(x, y):
    return float(numpy.max(numpy.abs(x - y)) / max(1.0, numpy.max(numpy.abs(y))))


def matching_error(a, n, points=64, center='upper'):
    """max over the disk boundary of ||P N^-1 - I|| (2-norm)."""
    bd = branch_points(a)
    r0 = disk_radius(a)
    c = 1j * bd.z2 if center == 'upper' else -1j * bd.z2
    theta = 2 * numpy.pi * (numpy.arange(points) + 0.29) / points
    worst = 0.0
    for z in c + r0 * numpy.exp(1j * theta):
        p = local_P(z, a, n, center=center).value
        nn = model_N(z, a).value
        worst = max(worst, float(numpy.linalg.norm(p @ numpy.linalg.inv(nn) - numpy.eye(3), 2)))
    return worst


def removability_coefficient(a, n, points=128):
    """
    Coefficient of 1/(z - i z2) in E = N L^-1, by the trapezoid rule on a
    circle of half the disk radius; zero when the singularity is removable.
    """
    bd = branch_points(a)
    w = 1j * bd.z2
    r = 0.5 * disk_radius(a)
    theta = 2 * numpy.pi * (numpy.arange(points) + 0.31) / points
    acc = numpy.zeros((3, 3), dtype=complex)
    for th in theta:
        z = w + r * numpy.exp(1j * th)
        _, e = _local_upper(z, a, n, None, None)
        acc += e * (r * numpy.exp(1j * th))
    return float(numpy.max(numpy.abs(acc / points)))
