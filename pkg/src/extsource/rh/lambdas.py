"""
Primitives of the sheet functions.

    lambda_1(z) = int_{z1}^{z} xi_1,     lambda_2(z) = int_{z1}^{z} xi_2,
    lambda_3(z) = int_{-z1}^{z} xi_3 + lambda_1-(-z1),

the last integral starting on the upper side of the real cut.  The domains
are the plane minus (-inf, z1] for lambda_1, minus (-inf, z1] and the
imaginary cut for lambda_2, and minus (-inf, 0] and the imaginary cut for
lambda_3.

Values come from adaptive Gauss-Legendre quadrature along axis-parallel
paths that stay off every cut.  Each leg is parametrised by a smoothstep,
which turns square-root endpoint singularities into smooth integrands.

Real parts also have a closed form.  With F(xi; z) = xi z - xi^2/2 -
log|xi^2 - a^2|/2 one has dF/dz = xi along each sheet, and every Re lambda_j
equals Re F(xi_j(z); z) - F(q; z1).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy
from numpy.polynomial.legendre import leggauss

from ..errors import NonConvergence, OnCut, PathBlocked
from ..surface import (_sided_roots, branch_points, on_imaginary_cut,
                       on_real_cut)

__all__ = ['LambdaValues', 'LambdaConstants', 'lambda_values', 'lambda_j',
           'lambda_real_closed', 'delta_lambda_23', 'lambda_constants',
           'loop_integrals', 'verify_lambda_jumps', 'h_function', 'JUMP_RELATIONS']

_X, _W = leggauss(20)
_X = (_X + 1.0) / 2.0
_W = _W / 2.0

_POLICIES = {'box': 0.75, 'wide': 1.6}


@dataclass(frozen=True)
class LambdaValues:
    l1: complex
    l2: complex
    l3: complex
    side: str = 'off-cut'

    def __getitem__(self, j):
        return (self.l1, self.l2, self.l3)[j - 1]


@dataclass(frozen=True)
class LambdaConstants:
    ell1: complex
    ell2: complex
    ell3: complex


def _leg(start, end, a, bd, side, sheets, tol=1e-12, max_panels=4000):
    """Integral of xi_j over the straight leg [start, end] for j in ``sheets``."""
    length = end - start
    if length == 0:
        return numpy.zeros(len(sheets), dtype=complex)

    def panel(t0, t1):
        t = t0 + (t1 - t0) * _X
        s = start + length * t * t * (3.0 - 2.0 * t)
        ds = length * 6.0 * t * (1.0 - t)
        _, xi = _sided_roots(s, a, bd, side)
        vals = xi[:, sheets] * ds[:, None]
        return (t1 - t0) * (_W @ vals), numpy.max(numpy.abs(vals))

    total = numpy.zeros(len(sheets), dtype=complex)
    whole, scale = panel(0.0, 1.0)
    stack = [(0.0, 1.0, whole, scale)]
    count = 0
    while stack:
        t0, t1, val, scale = stack.pop()
        mid = 0.5 * (t0 + t1)
        left, sl = panel(t0, mid)
        right, sr = panel(mid, t1)
        count += 2
        if numpy.max(numpy.abs(left + right - val)) <= tol * max(1.0, scale) * (t1 - t0):
            total += left + right
        elif count > max_panels or t1 - t0 < 1e-13:
            raise NonConvergence(f'quadrature on [{start}, {end}] did not converge')
        else:
            stack.append((t0, mid, left, sl))
            stack.append((mid, t1, right, sr))
    return total


def _legs(points, icut_side):
    """Consecutive legs; the final one runs on the imaginary cut if ``icut_side``."""
    out = []
    for k, (p, q) in enumerate(zip(points[:-1], points[1:])):
        if p != q:
            last = k == len(points) - 2
            out.append((p, q, icut_side if last else None))
    return out


def _path(z, sheet, side, bd, policy):
    """Vertices of a cut-avoiding path from the base point of ``sheet`` to ``z``."""
    if policy not in _POLICIES:
        raise ValueError(f'unknown path policy {policy!r}')
    margin = _POLICIES[policy]
    z1, z2 = bd.z1, bd.z2
    x, y = z.real, z.imag
    icut = bool(on_imaginary_cut(z, bd))
    rcut = y == 0.0 and x < (0.0 if sheet == 3 else z1)
    if rcut and icut:
        raise OnCut('the origin lies on both cuts')
    if (rcut or (icut and sheet != 1)) and side not in ('+', '-'):
        raise OnCut(f'z = {z} lies on a cut of lambda_{sheet}; side must be "+" or "-"')
    lower = y < 0.0 or (y == 0.0 and rcut and side == '-')
    sgn = -1.0 if lower else 1.0
    height = max(abs(y), z2 + margin)
    tail = [1j * sgn * z2, z] if icut else [z]
    icut_side = side if icut else None
    if sheet in (1, 2):
        if y == 0.0 and x > z1:
            return [z1, z], None
        return [z1, z1 + 1j * sgn * height, x + 1j * sgn * height] + tail, icut_side
    if not lower:
        return [-z1, -z1 + 1j * height, x + 1j * height] + tail, icut_side
    right = max(x, z1) + margin
    return [-z1, -z1 + 1j * height, right + 1j * height, right - 1j * height,
            x - 1j * height] + tail, icut_side


@lru_cache(maxsize=64)
def _lambda3_offset(a, policy):
    """lambda_1 at -z1 from below, the additive constant of lambda_3."""
    bd = branch_points(a)
    return _integrate(complex(-bd.z1), 1, '-', a, bd, policy)


def _integrate(z, sheet, side, a, bd, policy):
    points, icut_side = _path(z, sheet, side, bd, policy)
    total = 0.0 + 0.0j
    for p, q, leg_side in _legs([complex(v) for v in points], icut_side):
        total += _leg(p, q, a, bd, leg_side, [sheet - 1])[0]
    return total


def lambda_j(z, a, j, side=None, policy='box'):
    """lambda_j(z) by quadrature; ``side`` selects the boundary value on a cut."""
    if j not in (1, 2, 3):
        raise ValueError('sheet index must be 1, 2 or 3')
    bd = branch_points(a)
    z = complex(z)
    value = _integrate(z, j, side, a, bd, policy)
    if j == 3:
        value += _lambda3_offset(float(a), policy)
    return value


def lambda_values(z, a, side=None, policy='box'):
    """All three lambda-functions at a single point."""
    vals = [lambda_j(z, a, j, side, policy) for j in (1, 2, 3)]
    bd = branch_points(a)
    on = bool(on_real_cut(complex(z), bd) or on_imaginary_cut(complex(z), bd))
    return LambdaValues(*vals, side=side if on else 'off-cut')


def lambda_real_closed(z, a, side=None):
    """Re lambda_j for j = 1, 2, 3 from the closed form; shape ``z.shape + (3,)``."""
    bd = branch_points(a)
    z = numpy.asarray(z, dtype=complex)
    flat = z.reshape(-1)
    _, xi = _sided_roots(flat, a, bd, side)
    zz = flat[:, None]
    vals = (xi * zz - 0.5 * xi * xi).real - 0.5 * numpy.log(numpy.abs(xi * xi - a * a))
    q, z1 = bd.q, bd.z1
    base = q * z1 - 0.5 * q * q - 0.5 * numpy.log(abs(q * q - a * a))
    return (vals - base).reshape(z.shape + (3,))


def delta_lambda_23(z, a, side=None):
    """
    lambda_2 - lambda_3 near the upper imaginary branch point.

    Uses G(xi) = xi z - xi^2/2 - Log(a^2 - xi^2)/2 with the principal
    logarithm, which is continuous where xi_2, xi_3 stay near -ip.
    """
    bd = branch_points(a)
    z = numpy.asarray(z, dtype=complex)
    flat = z.reshape(-1)
    _, xi = _sided_roots(flat, a, bd, side)
    g = xi * flat[:, None] - 0.5 * xi * xi - 0.5 * numpy.log(a * a - xi * xi)
    return (g[:, 1] - g[:, 2]).reshape(z.shape)


def loop_integrals(a, points=512):
    """
    Integrals of xi_1, xi_2, xi_3 once around all cuts, positively oriented.

    The circle |z| = 2 (z1 + z2) encloses the cuts and every xi_j is analytic
    on it, so the trapezoid rule converges geometrically.
    """
    bd = branch_points(a)
    radius = 2.0 * (bd.z1 + bd.z2)
    theta = 2.0 * numpy.pi * (numpy.arange(points) + 0.5) / points
    z = radius * numpy.exp(1j * theta)
    _, xi = _sided_roots(z, a, bd, None)
    dz = 1j * z * (2.0 * numpy.pi / points)
    return dz @ xi


def lambda_constants(a, radii=(50.0, 100.0, 200.0, 400.0), policy='box', rtol=1e-5):
    """
    Constants in the large-z behaviour

        lambda_1 = z^2/2 - log z + ell_1 + O(1/z^2),
        lambda_{2,3} = +-a z + log(z)/2 + ell_{2,3} + O(1/z).

    The remainders are sampled on the positive real axis at ``radii`` and
    extrapolated to 1/z = 0 by Richardson's scheme with ratio 2.  The
    extrapolants from the first three radii and from the last three must
    agree to ``rtol``.
    """
    if not 0.0 < a < 1.0:
        raise ValueError('lambda_constants requires 0 < a < 1')
    r = numpy.asarray(radii, dtype=float)
    if len(r) < 4 or not numpy.allclose(r[1:] / r[:-1], 2.0):
        raise ValueError('radii must be at least four values in ratio 2')
    asym = (lambda z: z * z / 2 - numpy.log(z),
            lambda z: a * z + 0.5 * numpy.log(z),
            lambda z: -a * z + 0.5 * numpy.log(z))
    ells = []
    for j in (1, 2, 3):
        rem = numpy.array([lambda_j(x, a, j, policy=policy) - asym[j - 1](x) for x in r])
        first = _richardson(rem[:3])
        last = _richardson(rem[-3:])
        if abs(first - last) > rtol * max(1.0, abs(last)):
            raise NonConvergence(f'ell_{j} estimates {first} and {last} disagree')
        ells.append(complex(_richardson(rem)))
    return LambdaConstants(*ells)


def _richardson(values):
    table = list(values)
    for k in range(1, len(values)):
        table = [(2.0 ** k * table[i + 1] - table[i]) / (2.0 ** k - 1.0)
                 for i in range(len(table) - 1)]
    return table[0]


# (name, contour piece, lhs (sheet, side), rhs (sheet, side), constant):
# lhs = rhs + constant on the piece
JUMP_RELATIONS = (
    ('l1- = l2+ on (0,z1)', 'pos-real', (1, '-'), (2, '+'), 0.0),
    ('l1+ = l2- on (0,z1)', 'pos-real', (1, '+'), (2, '-'), 0.0),
    ('l1- = l3+ on (-z1,0)', 'neg-real', (1, '-'), (3, '+'), 0.0),
    ('l1+ = l3- - pi i on (-z1,0)', 'neg-real', (1, '+'), (3, '-'), -1j * numpy.pi),
    ('l2- = l3+ on (0,iz2)', 'pos-imag', (2, '-'), (3, '+'), 0.0),
    ('l2+ = l3- on (0,iz2)', 'pos-imag', (2, '+'), (3, '-'), 0.0),
    ('l2- = l3+ - pi i on (-iz2,0)', 'neg-imag', (2, '-'), (3, '+'), -1j * numpy.pi),
    ('l2+ = l3- - pi i on (-iz2,0)', 'neg-imag', (2, '+'), (3, '-'), -1j * numpy.pi),
    ('l1+ = l1- - 2 pi i on (-inf,-z1)', 'left-ray', (1, '+'), (1, '-'), -2j * numpy.pi),
    ('l2+ = l2- + pi i on (-inf,0)', 'neg-axis', (2, '+'), (2, '-'), 1j * numpy.pi),
    ('l3+ = l3- + pi i on (-inf,-z1)', 'left-ray', (3, '+'), (3, '-'), 1j * numpy.pi),
)


def _piece_points(piece, bd, count):
    t = (numpy.arange(count) + 0.5) / count
    z1, z2 = bd.z1, bd.z2
    if piece == 'pos-real':
        return t * z1 + 0j
    if piece == 'neg-real':
        return -t * z1 + 0j
    if piece == 'pos-imag':
        return 1j * t * z2
    if piece == 'neg-imag':
        return -1j * t * z2
    if piece == 'left-ray':
        return -z1 - 4.0 * z1 * t + 0j
    if piece == 'neg-axis':
        return -5.0 * z1 * t + 0j
    raise ValueError(piece)


def verify_lambda_jumps(a, count=20, policy='box'):
    """
    Residuals of every jump relation of the lambda-functions.

    Returns a dict with ``entries`` (one record per relation and point with
    keys contour, point, relation, residual), ``max_residual`` and the
    residuals of the three loop integrals against -2 pi i, pi i, pi i.
    """
    bd = branch_points(a)
    entries = []
    for name, piece, (jl, sl), (jr, sr), const in JUMP_RELATIONS:
        for z in _piece_points(piece, bd, count):
            lhs = lambda_j(z, a, jl, sl, policy)
            rhs = lambda_j(z, a, jr, sr, policy) + const
            entries.append({'contour': piece, 'point': [float(z.real), float(z.imag)],
                            'relation': name, 'residual': float(abs(lhs - rhs))})
    loops = loop_integrals(a)
    expected = numpy.array([-2j * numpy.pi, 1j * numpy.pi, 1j * numpy.pi])
    loop_res = [float(v) for v in numpy.abs(loops - expected)]
    return {'a': float(a), 'entries': entries,
            'max_residual': max(e['residual'] for e in entries),
            'loop_residuals': loop_res, 'max_loop_residual': max(loop_res)}


def h_function(x, a, method='closed', policy='box'):
    """
    h(x) = Re lambda_1+(x) - x^2/4 for real x.

    ``method='closed'`` uses the closed-form real part and accepts arrays;
    ``method='quadrature'`` integrates xi_1 along a path (scalars only).
    At x = 0, where both cuts meet, the boundary root i sqrt(1 - a^2) is
    used directly.
    """
    bd = branch_points(a)
    if method == 'quadrature':
        x = float(x)
        if x == bd.z1:
            return -x * x / 4.0
        if x == 0.0:
            return h_function(0.0, a, 'closed')
        return lambda_j(complex(x), a, 1, '+', policy).real - x * x / 4.0
    if method != 'closed':
        raise ValueError(f'unknown method {method!r}')
    x = numpy.asarray(x, dtype=float)
    out = numpy.empty(x.shape)
    zero = x == 0.0
    if numpy.any(~zero):
        out[~zero] = lambda_real_closed(x[~zero], a, '+')[..., 0]
    if numpy.any(zero):
        q = bd.q
        base = q * bd.z1 - 0.5 * q * q - 0.5 * numpy.log(abs(q * q - a * a))
        out[zero] = 0.5 * (1.0 - a * a) - base
    out = out - x * x / 4.0
    return float(out) if out.ndim == 0 else out
