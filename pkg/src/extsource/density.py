"""
Limiting mean eigenvalue density.

For real x the density is |Im xi|/pi where xi is the non-real root of the
spectral cubic; it vanishes where all three roots are real.  Whether the
roots are real is decided by the sign of the cubic discriminant, which for
this family is an even quartic in x,

    D(x) = 4 a^2 x^4 + (c^2 - 18 c a^2 - 27 a^4) x^2 - 4 c^3,   c = 1 - a^2.

D < 0 exactly on the interior of the support.
"""

from dataclasses import dataclass, field

import numpy
from scipy import integrate

from .errors import ExtrapolationUnstable, InsufficientDecade
from .surface import _cardano, branch_points, map_z_derivative

__all__ = ['DensityProfile', 'Support', 'discriminant', 'density', 'support',
           'edge_constant', 'edge_constant_exact', 'critical_exponent',
           'power_law_fit', 'mass', 'density_profile']


@dataclass(frozen=True)
class Support:
    intervals: tuple        # ((lo, hi), ...) in increasing order
    phase: str              # 'one-interval', 'critical' or 'two-interval'

    @property
    def count(self):
        return len(self.intervals)

    @property
    def z1(self):
        return self.intervals[-1][1]


@dataclass
class DensityProfile:
    a: float
    grid: numpy.ndarray
    values: numpy.ndarray
    z1: float
    rho1: float
    phase: str
    support: Support = field(repr=False, default=None)

    def trapezoid_mass(self):
        return float(numpy.trapezoid(self.values, self.grid))


def _phase(a):
    if a < 1.0:
        return 'one-interval'
    if a == 1.0:
        return 'critical'
    return 'two-interval'


def discriminant(x, a):
    """Discriminant of the spectral cubic in xi, as a function of real x."""
    x = numpy.asarray(x, dtype=float)
    a2 = a * a
    c = 1.0 - a2
    x2 = x * x
    return (4.0 * a2 * x2 + (c * c - 18.0 * c * a2 - 27.0 * a2 * a2)) * x2 - 4.0 * c ** 3


def _imag_part(x, a):
    """|Im| of the complex pair of roots at real x (only meaningful where D < 0)."""
    b = -x
    c = 1.0 - a * a
    d = x * a * a
    roots = _cardano(b.astype(complex), numpy.full(x.shape, c, dtype=complex),
                     d.astype(complex))
    pick = numpy.argmin(numpy.abs(roots.imag), axis=-1)
    r = numpy.take_along_axis(roots, pick[..., None], axis=-1)[..., 0].real
    for _ in range(3):
        f = ((r + b) * r + c) * r + d
        df = (3.0 * r + 2.0 * b) * r + c
        safe = df != 0
        r = numpy.where(safe, r - f / numpy.where(safe, df, 1.0), r)
    # deflate: cubic = (xi - r)(xi^2 + B xi + C)
    B = b + r
    C1 = c + r * B
    with numpy.errstate(divide='ignore', invalid='ignore'):
        C2 = -d / r
    cancel = numpy.abs(C1) < 0.5 * (abs(c) + numpy.abs(r * B))
    C = numpy.where(cancel & (r != 0), C2, C1)
    sqC = numpy.sqrt(numpy.maximum(C, 0.0))
    half = numpy.abs(B) / 2.0
    return numpy.sqrt(numpy.maximum((sqC - half) * (sqC + half), 0.0))


def density(x, a):
    """
    Limiting density rho(x) for source strength ``a`` >= 0.

    Equal to Im xi_1+(x)/pi, the boundary value of the first sheet from the
    upper half-plane, which is the non-real root of the cubic on the support
    and zero elsewhere.  The computation uses the real root, polished by
    Newton's method, and deflation to a quadratic for the complex pair.
    """
    # rho is even; evaluating at |x| makes mirrored inputs agree bitwise
    x = numpy.abs(numpy.asarray(x, dtype=float))
    disc = discriminant(x, a)
    inside = disc < 0
    out = numpy.zeros(x.shape)
    if numpy.any(inside):
        out[inside] = _imag_part(x[inside], a) / numpy.pi
    return out[()] if out.ndim == 0 else out


def _bisect(f, lo, hi, tol=1e-12, maxiter=200):
    flo = f(lo)
    for _ in range(maxiter):
        if hi - lo <= tol * max(1.0, abs(lo)):
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def support(a, points=4097):
    """
    Support of the limiting density.

    Sign changes of the discriminant are located on a grid over [0, a + 3]
    and refined by bisection to 1e-12; the support is symmetric.
    """
    xmax = a + 3.0
    grid = numpy.linspace(0.0, xmax, points)
    neg = discriminant(grid, a) < 0
    f = lambda t: float(discriminant(t, a))
    # at a = 1 the discriminant has a double zero at 0; treat 0 as interior
    neg[0] = neg[0] or (f(0.0) == 0.0 and neg[1])
    edges = []
    for i in numpy.nonzero(neg[1:] != neg[:-1])[0]:
        edges.append(float(_bisect(f, grid[i], grid[i + 1])))
    if not edges:
        raise InsufficientDecade(f'no support found on [0, {xmax}] for a={a}')
    if neg[0]:
        # 0 is inside the support (or is the critical point at a = 1)
        z1 = edges[0]
        intervals = ((-z1, z1),)
    else:
        z2, z1 = edges[0], edges[1]
        intervals = ((-z1, -z2), (z2, z1))
    return Support(intervals=intervals, phase=_phase(a))


def edge_constant_exact(a):
    """
    Square-root edge constant from the local form of the inverse map.

    Near xi = q, z - z1 ~ z''(q) (xi - q)^2 / 2, hence
    Im xi_1+(z1 - d) ~ sqrt(2 d / z''(q)) and rho1 = sqrt(2 / z''(q)).
    """
    if a == 0.0:
        q = 1.0
    else:
        q = branch_points(a).q
    return float(numpy.sqrt(2.0 / map_z_derivative(q, a, order=2).real))


def edge_constant(a, levels=8, delta0=1e-2, rtol=1e-4):
    """
    rho1 = lim pi rho(x) / sqrt(z1 - x) as x -> z1 from inside.

    Richardson extrapolation in the edge distance over the ladder
    delta0 * z1 * 2**-k, k = 0..levels-1; the ratio is a regular series in
    the edge distance.
    """
    if not 0.0 <= a < 1.0:
        raise ValueError('edge_constant requires 0 <= a < 1')
    z1 = support(a).z1
    deltas = delta0 * z1 * 2.0 ** -numpy.arange(levels)
    table = [numpy.pi * density(z1 - deltas, a) / numpy.sqrt(deltas)]
    for k in range(1, levels):
        prev = table[-1]
        table.append((2.0 ** k * prev[1:] - prev[:-1]) / (2.0 ** k - 1.0))
    best, second = table[-1][0], table[-2][-1]
    if abs(best - second) > rtol * abs(best):
        raise ExtrapolationUnstable(
            f'edge constant estimates {second} and {best} disagree')
    return float(best)


def power_law_fit(a, target=None, lo=1e-6, hi=1e-3, points=25):
    """
    Least-squares fit log rho = log C + e log d toward ``target``.

    ``d`` runs over ``points`` log-spaced values in [lo, hi] * z1 and the
    density is sampled on whichever side of ``target`` lies in the support.
    The default target is 0 at a = 1 and the outer edge z1 otherwise.

    Returns ``(exponent, prefactor)``.
    """
    sup = support(a)
    z1 = sup.z1
    if target is None:
        target = 0.0 if a == 1.0 else z1
    d = numpy.logspace(numpy.log10(lo), numpy.log10(hi), points) * z1
    for sign in (-1.0, 1.0):
        rho = density(target + sign * d, a)
        if numpy.all(rho > 0) and numpy.all(numpy.isfinite(rho)):
            break
    else:
        raise InsufficientDecade(
            f'density vanishes within a decade of x={target} on both sides')
    slope, icept = numpy.polyfit(numpy.log(d), numpy.log(rho), 1)
    return float(slope), float(numpy.exp(icept))


def critical_exponent(a, target=None, **kwargs):
    """Fitted vanishing exponent of rho at ``target`` (see :func:`power_law_fit`)."""
    return power_law_fit(a, target, **kwargs)[0]


def mass(a):
    """Integral of rho over its support (adaptive quadrature per interval)."""
    total = 0.0
    sup = support(a)
    f = lambda t: float(density(t, a))
    for lo, hi in sup.intervals:
        pieces = [(lo, 0.0), (0.0, hi)] if lo < 0.0 < hi else [(lo, hi)]
        for p, q in pieces:
            val, _ = integrate.quad(f, p, q, limit=400, epsabs=1e-14, epsrel=1e-13)
            total += val
    return total


def _clustered_grid(lo, hi, points):
    theta = numpy.linspace(0.0, numpy.pi, points)
    return lo + (hi - lo) * (1.0 - numpy.cos(theta)) / 2.0


def density_profile(a, grid=None, points=2001):
    """
    Density on a grid.

    Without an explicit grid, a support-resolving grid is built: nodes
    cluster like a cosine map at every endpoint (and at 0 when a = 1).
    """
    sup = support(a)
    if grid is None:
        parts = []
        for lo, hi in sup.intervals:
            cuts = [lo, 0.0, hi] if lo < 0.0 < hi else [lo, hi]
            for p, q in zip(cuts[:-1], cuts[1:]):
                parts.append(_clustered_grid(p, q, points))
        grid = numpy.unique(numpy.concatenate(parts))
    grid = numpy.asarray(grid, dtype=float)
    rho1 = edge_constant(a) if a < 1.0 else float('nan')
    return DensityProfile(a=a, grid=grid, values=density(grid, a), z1=sup.z1,
                          rho1=rho1, phase=sup.phase, support=sup)
