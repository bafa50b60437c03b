"""
Curves where two lambda-functions have equal real parts, and the crossing
point x0 of the lambda_2/lambda_3 curve with the real axis.

Real parts come from the closed form in :mod:`.lambdas`, so a dense grid
costs one cubic solve per node.
"""

import numpy
from scipy import optimize
from skimage import measure

from ..errors import CurveNotFound
from ..surface import branch_points
from .lambdas import lambda_real_closed

__all__ = ['PAIRS', 're_difference', 'level_curves', 'branch_count', 'x0',
           'sign_structure']

PAIRS = {12: (0, 1), 13: (0, 2), 23: (1, 2)}


def re_difference(z, a, pair, side=None):
    """Re(lambda_j - lambda_k) for ``pair`` = jk."""
    j, k = PAIRS[int(pair)]
    vals = lambda_real_closed(z, a, side)
    return vals[..., j] - vals[..., k]


def _default_window(bd):
    r = 1.6 * bd.z1
    return (-r, r, -r, r)


def level_curves(a, pair, window=None, points=400):
    """
    Zero set of Re(lambda_j - lambda_k) inside ``window``.

    Marching squares on a uniform ``points`` x ``points`` grid (an even
    count keeps nodes off both axes).  Cells that straddle the imaginary cut
    are skipped because the sheets 2 and 3 swap there.  Segments of the
    real axis on which the difference changes sign across the axis are
    added exactly.

    Returns a list of ``(m, 2)`` arrays of (x, y) vertices.
    """
    bd = branch_points(a)
    xmin, xmax, ymin, ymax = window if window is not None else _default_window(bd)
    points = int(points) + int(points) % 2
    xs = numpy.linspace(xmin, xmax, points)
    ys = numpy.linspace(ymin, ymax, points)
    if numpy.any(xs == 0.0) or numpy.any(ys == 0.0):
        xs = xs + 0.5 * (xs[1] - xs[0]) * numpy.any(xs == 0.0)
        ys = ys + 0.5 * (ys[1] - ys[0]) * numpy.any(ys == 0.0)
    zz = xs[None, :] + 1j * ys[:, None]
    diff = re_difference(zz, a, pair)
    mask = numpy.ones(diff.shape, dtype=bool)
    dx = xs[1] - xs[0]
    dy = ys[1] - ys[0]
    near_cut = (numpy.abs(xs) < dx)[None, :] & (numpy.abs(ys) <= bd.z2 + dy)[:, None]
    mask[near_cut] = False
    curves = []
    for c in measure.find_contours(diff, 0.0, mask=mask):
        rows, cols = c[:, 0], c[:, 1]
        x = numpy.interp(cols, numpy.arange(points), xs)
        y = numpy.interp(rows, numpy.arange(points), ys)
        curves.append(numpy.column_stack([x, y]))
    curves.extend(_axis_segments(a, pair, xs, bd))
    return curves


def _axis_segments(a, pair, xs, bd):
    """Real-axis pieces where the difference flips sign across the axis."""
    x = xs[(xs != 0.0) & (numpy.abs(numpy.abs(xs) - bd.z1) > 1e-9)]
    up = re_difference(x + 0j, a, pair, side='+')
    down = re_difference(x + 0j, a, pair, side='-')
    scale = 1e-9 * (1.0 + numpy.abs(up))
    flip = (numpy.abs(up + down) < scale) & (numpy.abs(up) < 1e-7)
    segs = []
    start = None
    for i, f in enumerate(flip):
        if f and start is None:
            start = i
        if (not f or i == len(flip) - 1) and start is not None:
            stop = i if f else i - 1
            if stop > start:
                seg = x[start:stop + 1]
                segs.append(numpy.column_stack([seg, numpy.zeros_like(seg)]))
            start = None
    return segs


def branch_count(a, pair, center, radius=None, points=720):
    """
    Number of level-curve branches leaving ``center``.

    Counts sign changes of Re(lambda_j - lambda_k) around a small circle,
    ignoring jumps caused by the imaginary cut.  On the real cut the
    difference can vanish without changing sign (it is even in Im z there),
    so each crossing of the real axis where it vanishes adds one branch.
    """
    bd = branch_points(a)
    if radius is None:
        radius = 0.05 * min(bd.z1, bd.z2)
    theta = 2.0 * numpy.pi * (numpy.arange(points) + 0.37) / points
    z = center + radius * numpy.exp(1j * theta)
    d = re_difference(z, a, pair)
    s = numpy.sign(d)
    changes = s != numpy.roll(s, 1)
    # a jump across the imaginary cut is not a branch; reject crossings
    # where the two neighbours differ by much more than their size suggests
    jumps = numpy.abs(d - numpy.roll(d, 1))
    smooth = jumps < 10.0 * numpy.median(jumps)
    count = int(numpy.sum(changes & smooth))
    for x in (center.real - radius, center.real + radius):
        if center.imag == 0.0:
            on = numpy.array([x + 0j])
            up = re_difference(on, a, pair, side='+')[0]
            dn = re_difference(on, a, pair, side='-')[0]
            if max(abs(up), abs(dn)) < 1e-9 and numpy.sign(d[0]) == numpy.sign(d[-1]):
                count += 1
    return count


def _trace(a, start, direction, step, bd, max_steps=20000):
    """Follow Re(lambda_2 - lambda_3) = 0 downward until it crosses Im z = 0."""
    f = lambda z: float(re_difference(numpy.array([z]), a, 23)[0])
    z = start
    for _ in range(max_steps):
        h = 1e-7
        gx = (f(z + h) - f(z - h)) / (2 * h)
        gy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
        grad = complex(gx, gy)
        if grad == 0:
            raise CurveNotFound('vanishing gradient while tracing')
        tangent = 1j * grad / abs(grad)
        if (tangent * direction.conjugate()).real < 0:
            tangent = -tangent
        nxt = z + step * tangent
        for _ in range(3):  # pull back onto the curve
            val = f(nxt)
            nxt = nxt - val * grad / abs(grad) ** 2
        if nxt.imag <= 0.0:
            return z, nxt
        direction = tangent
        z = nxt
        if abs(z) > 2 * bd.z1 or z.real < -1e-12:
            break
    raise CurveNotFound('traced curve left the region without meeting the real axis')


def x0(a, tol=1e-10):
    """
    Crossing point x0 in (0, z1) of the Re lambda_2 = Re lambda_3 curve
    descending from i z2 into the right half-plane.
    """
    bd = branch_points(a)
    r = 0.02 * bd.z2
    theta = numpy.linspace(-numpy.pi / 2 + 0.05, 0.0, 400)
    ring = 1j * bd.z2 + r * numpy.exp(1j * theta)
    d = re_difference(ring, a, 23)
    idx = numpy.nonzero(numpy.sign(d[1:]) != numpy.sign(d[:-1]))[0]
    if len(idx) == 0:
        raise CurveNotFound('no branch leaves i z2 into the lower right quadrant')
    i = idx[0]
    start = ring[i] - d[i] * (ring[i + 1] - ring[i]) / (d[i + 1] - d[i])
    step = 0.01 * bd.z1
    above, below = _trace(a, start, start - 1j * bd.z2, step, bd)
    g = lambda x: float(re_difference(numpy.array([x + 0j]), a, 23, side='+')[0])
    lo = max(min(above.real, below.real) - 2 * step, 1e-12)
    hi = min(max(above.real, below.real) + 2 * step, bd.z1 * (1 - 1e-9))
    if g(lo) * g(hi) > 0:
        raise CurveNotFound('could not bracket the axis crossing')
    root = optimize.bisect(g, lo, hi, xtol=tol)
    if not 0.0 < root < bd.z1:
        raise CurveNotFound(f'crossing {root} outside (0, z1)')
    return float(root)


def sign_structure(a):
    """
    Orderings of Re lambda_1, Re lambda_2, Re lambda_3 at sample points.

    Each record names a location, the expected ordering (a tuple of sheet
    indices, largest first, or a pairwise statement) and whether the
    computed values agree.
    """
    bd = branch_points(a)
    z1, z2 = bd.z1, bd.z2
    xz = x0(a)
    out = []

    def order_at(z, expected, label, side=None):
        vals = lambda_real_closed(numpy.array([z]), a, side)[0]
        got = tuple(int(i) + 1 for i in numpy.argsort(-vals))
        out.append({'region': label, 'point': [float(numpy.real(z)), float(numpy.imag(z))],
                    'expected': list(expected), 'computed': list(got),
                    'ok': got == tuple(expected)})

    def pair_at(x, j, k, sign, label):
        vals = lambda_real_closed(numpy.array([x + 0j]), a, '+')[0]
        got = numpy.sign(vals[j - 1] - vals[k - 1])
        out.append({'region': label, 'point': [float(x), 0.0],
                    'expected': f'Re l{j} {"<" if sign < 0 else ">"} Re l{k}',
                    'computed': float(vals[j - 1] - vals[k - 1]), 'ok': bool(got == sign)})

    order_at(2.0 * z1 + 0.1j, (1, 2, 3), 'right of z1')
    order_at(-2.0 * z1 + 0.1j, (1, 3, 2), 'left of -z1')
    order_at(z1 + 0.2 * z1 * numpy.exp(2j * numpy.pi / 3), (2, 1, 3), 'above (0, z1), across a 12 curve')
    pair_at(-0.5 * (z1 + xz), 2, 1, -1, '(-z1, -x0)')
    pair_at(-0.5 * xz, 2, 1, 1, '(-x0, 0)')
    pair_at(0.5 * (z1 + xz), 3, 1, -1, '(x0, z1)')
    pair_at(0.5 * xz, 3, 1, 1, '(0, x0)')
    y = 0.5j * z2
    up = lambda_real_closed(numpy.array([y]), a, '+')[0]
    dn = lambda_real_closed(numpy.array([y]), a, '-')[0]
    out.append({'region': '(0, i z2)', 'point': [0.0, float(y.imag)],
                'expected': 'Re l2+ > Re l2-, Re l3+ < Re l3-',
                'computed': [float(up[1] - dn[1]), float(up[2] - dn[2])],
                'ok': bool(up[1] > dn[1] and up[2] < dn[2])})
    return out
