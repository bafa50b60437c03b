"""
Spectral curve of the two-level external source model.

The cubic

    xi^3 - z xi^2 + (1 - a^2) xi + z a^2 = 0

defines a three-sheeted Riemann surface over the z-plane.  For 0 < a < 1 it
has four branch points +-z1 (real) and +-i z2 (imaginary).  The sheets are
labelled by their behaviour at infinity,

    xi_1 ~ z - 1/z,   xi_2 ~ a + 1/(2z),   xi_3 ~ -a + 1/(2z),

and are continued analytically into the plane slit along

    xi_1 : [-z1, z1]
    xi_2 : [0, z1]  and  [-i z2, i z2]
    xi_3 : [-z1, 0] and  [-i z2, i z2].

Off the cuts the sheets are told apart by where the roots sit in the
xi-plane.  Writing D = |xi^2 - a^2|^2, the inverse map satisfies

    Im z(xi) = Im xi (1 - (|xi|^2 + a^2)/D),
    Re z(xi) = Re xi (1 + (|xi|^2 - a^2)/D),

so the preimage of the real cut is the closed curve D = |xi|^2 + a^2 and
the one of the imaginary cut lies on Re xi = 0 or on D = a^2 - |xi|^2.
Sheet 1 is the exterior of the first curve; inside it sheet 2 has
Re xi > 0 and sheet 3 has Re xi < 0.  Exactly one root falls in each
region, so the labels follow from ranking rather than thresholds.

Tracking the roots from a far anchor along an arc of constant modulus
followed by a radial segment gives the same labels by continuation and is
kept as an independent check.
"""

from dataclasses import dataclass

import numpy

from .errors import BranchPointProximity, OnCut, PoleAtSource, UnsupportedPhase

__all__ = ['SourceParams', 'CubicRoots', 'BranchData', 'SheetValues',
           'solve_cubic', 'cubic_residual', 'map_z', 'map_z_derivative',
           'branch_points', 'assign_sheets', 'sheet_values',
           'on_real_cut', 'on_imaginary_cut', 'track_sheets']

OMEGA = numpy.exp(2j * numpy.pi / 3)

# all six permutations of three labels, used for root matching
_PERMS = numpy.array([[0, 1, 2], [0, 2, 1], [1, 0, 2],
                      [1, 2, 0], [2, 0, 1], [2, 1, 0]])

# offset used to read labels on either side of a cut
_SIDE_EPS = 1e-7


# ===========
# Data types
# ===========

@dataclass(frozen=True)
class SourceParams:
    """Source strength ``a`` and (even) matrix size ``n``."""

    a: float
    n: int

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f'source strength must be positive, got a={self.a}')
        if int(self.n) != self.n or self.n < 2 or self.n % 2:
            raise ValueError(f'matrix size must be an even integer >= 2, got n={self.n}')


@dataclass(frozen=True)
class CubicRoots:
    roots: numpy.ndarray        # shape (..., 3)
    label: tuple = ('unsorted', 'unsorted', 'unsorted')
    degenerate: numpy.ndarray = None    # True where two roots collide


@dataclass(frozen=True)
class BranchData:
    a: float
    z1: float
    z2: float
    q: float
    p: float
    p0: float

    @property
    def points(self):
        return numpy.array([self.z1, -self.z1, 1j * self.z2, -1j * self.z2])


@dataclass(frozen=True)
class SheetValues:
    """Sheet-labelled roots; ``xi[..., j]`` is xi_{j+1}."""

    xi: numpy.ndarray
    side: str = 'off-cut'

    @property
    def xi1(self):
        return self.xi[..., 0]

    @property
    def xi2(self):
        return self.xi[..., 1]

    @property
    def xi3(self):
        return self.xi[..., 2]


# ============
# Cubic roots
# ============

def _coefficients(z, a):
    z = numpy.asarray(z, dtype=complex)
    b = -z
    c = numpy.full_like(z, 1.0 - a * a)
    d = z * a * a
    return b, c, d


def cubic_residual(xi, z, a):
    """Value of the cubic polynomial at ``xi`` (broadcast against ``z``)."""
    xi = numpy.asarray(xi, dtype=complex)
    z = numpy.asarray(z, dtype=complex)
    return ((xi - z) * xi + (1.0 - a * a)) * xi + z * a * a


def _cardano(b, c, d):
    """Roots of t^3 + b t^2 + c t + d, shape (..., 3), unordered."""
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    sq = numpy.sqrt((q / 2.0) ** 2 + (p / 3.0) ** 3)
    u3a = -q / 2.0 + sq
    u3b = -q / 2.0 - sq
    u3 = numpy.where(numpy.abs(u3a) >= numpy.abs(u3b), u3a, u3b)
    u = u3 ** (1.0 / 3.0)
    zero = u == 0
    u_safe = numpy.where(zero, 1.0, u)
    v = numpy.where(zero, 0.0, -p / (3.0 * u_safe))
    t = numpy.stack([u + v,
                     OMEGA * u + OMEGA.conjugate() * v,
                     OMEGA.conjugate() * u + OMEGA * v], axis=-1)
    return t - (b / 3.0)[..., None]


def _newton(xi, b, c, d, steps=1):
    b, c, d = b[..., None], c[..., None], d[..., None]
    for _ in range(steps):
        f = ((xi + b) * xi + c) * xi + d
        df = (3.0 * xi + 2.0 * b) * xi + c
        ok = df != 0
        step = numpy.where(ok, f / numpy.where(ok, df, 1.0), 0.0)
        trial = xi - step
        ft = ((trial + b) * trial + c) * trial + d
        xi = numpy.where(numpy.abs(ft) <= numpy.abs(f), trial, xi)
    return xi


def _raw_roots(z, a):
    b, c, d = _coefficients(z, a)
    return _newton(_cardano(b, c, d), b, c, d)


def _min_gap(r):
    return numpy.minimum(numpy.minimum(numpy.abs(r[..., 0] - r[..., 1]),
                                       numpy.abs(r[..., 0] - r[..., 2])),
                         numpy.abs(r[..., 1] - r[..., 2]))


def _nearest(r):
    """Distance from each root to the closest other root, shape (..., 3)."""
    d01 = numpy.abs(r[..., 0] - r[..., 1])
    d02 = numpy.abs(r[..., 0] - r[..., 2])
    d12 = numpy.abs(r[..., 1] - r[..., 2])
    return numpy.stack([numpy.minimum(d01, d02), numpy.minimum(d01, d12),
                        numpy.minimum(d02, d12)], axis=-1)


def solve_cubic(x, a, tol=1e-7):
    """
    All three roots of the spectral cubic at ``x``.

    Cardano's formula followed by one guarded Newton step per root.  Roots
    are ordered by real part, then by imaginary part.  Entries where two
    roots coincide to within ``tol`` (relative) are flagged in
    ``degenerate``.
    """
    roots = _raw_roots(x, a)
    key_re = numpy.round(roots.real, 12)
    order = numpy.lexsort((roots.imag, key_re), axis=-1) if roots.ndim > 1 \
        else numpy.lexsort((roots.imag, key_re))
    roots = numpy.take_along_axis(roots, order, axis=-1)
    scale = 1.0 + numpy.max(numpy.abs(roots), axis=-1)
    return CubicRoots(roots=roots, degenerate=_min_gap(roots) < tol * scale)


# ==========================
# Inverse map and branch data
# ==========================

def map_z(xi, a):
    """Rational inverse map z(xi) = (xi^3 - (a^2-1) xi)/(xi^2 - a^2)."""
    xi = numpy.asarray(xi, dtype=complex)
    den = xi * xi - a * a
    if numpy.any(numpy.abs(den) <= 1e-14 * (1.0 + a * a)):
        raise PoleAtSource('map_z has poles at xi = +-a')
    out = (xi ** 3 - (a * a - 1.0) * xi) / den
    return out[()] if out.ndim == 0 else out


def map_z_derivative(xi, a, order=1):
    xi = numpy.asarray(xi, dtype=complex)
    den = xi * xi - a * a
    if order == 1:
        return 1.0 - (xi * xi + a * a) / den ** 2
    if order == 2:
        return 2.0 * xi * (xi * xi + 3.0 * a * a) / den ** 3
    raise ValueError('order must be 1 or 2')


def branch_points(a):
    """
    Branch points of the spectral curve for 0 < a < 1.

    The critical points of the inverse map are the roots of
    xi^4 - (1 + 2a^2) xi^2 + (a^2 - 1) a^2, i.e. +-q and +-ip; their images
    are the branch points z1 = z(q) and -i z2 = z(ip).
    """
    if not 0.0 < a < 1.0:
        raise UnsupportedPhase(
            f'branch geometry is only available for 0 < a < 1 (got a={a}); '
            'use density.support for the support shape')
    a2 = a * a
    root = numpy.sqrt(1.0 + 8.0 * a2)
    q = numpy.sqrt((1.0 + 2.0 * a2 + root) / 2.0)
    # written to avoid cancellation for small a
    p2 = 2.0 * a2 * (1.0 - a2) / (root + 1.0 + 2.0 * a2)
    p = numpy.sqrt(p2)
    z1 = float(map_z(q, a).real)
    z2 = float(abs(map_z(1j * p, a)))
    return BranchData(a=a, z1=z1, z2=z2, q=float(q), p=float(p),
                      p0=float(numpy.sqrt(1.0 - a2)))


# ================
# Sheet labelling
# ================

def _match(prev, new):
    """Permute ``new`` (N, 3) to follow ``prev`` (N, 3) as closely as possible."""
    cand = new[:, _PERMS]                                   # (N, 6, 3)
    cost = numpy.sum(numpy.abs(cand - prev[:, None, :]) ** 2, axis=-1)
    best = numpy.argmin(cost, axis=1)
    return cand[numpy.arange(len(new)), best]


def _path(s, radius, theta, target):
    """Arc from ``radius`` to angle ``theta`` for s <= 1/2, then radially in."""
    s = numpy.asarray(s)
    arc = radius * numpy.exp(1j * theta * numpy.clip(2.0 * s, 0.0, 1.0))
    r = radius + (numpy.abs(target) - radius) * numpy.clip(2.0 * s - 1.0, 0.0, 1.0)
    radial = r * numpy.exp(1j * theta)
    return numpy.where(s <= 0.5, arc, radial)


def _track(z, a, z1, max_iter=20000):
    """Label the cubic roots at the points ``z`` (1-D) by continuation."""
    n = z.size
    radius = numpy.maximum(10.0 * (1.0 + z1), 2.0 * numpy.abs(z))
    theta = numpy.angle(z)
    start = numpy.sort(_raw_roots(radius, a).real, axis=-1)[:, ::-1]
    roots = start.astype(complex)           # xi1 > xi2 > xi3 on the far real axis
    s = numpy.zeros(n)
    h = numpy.full(n, 1.0 / 32.0)
    active = numpy.arange(n)
    for _ in range(max_iter):
        if active.size == 0:
            return roots
        sa = s[active]
        ha = h[active]
        st = numpy.minimum(sa + ha, 1.0)
        # do not step over the corner between arc and radial leg
        st = numpy.where((sa < 0.5) & (st > 0.5), 0.5, st)
        zt = _path(st, radius[active], theta[active], z[active])
        new = _match(roots[active], _raw_roots(zt, a))
        ok = numpy.all(numpy.abs(new - roots[active]) < 0.25 * _nearest(new), axis=-1)
        acc = active[ok]
        roots[acc] = new[ok]
        s[acc] = st[ok]
        h[acc] = numpy.minimum(ha[ok] * 1.5, 0.25)
        rej = active[~ok]
        h[rej] = ha[~ok] * 0.25
        if numpy.any(h[rej] < 1e-15):
            raise BranchPointProximity('root tracking stalled near a branch point')
        active = active[s[active] < 1.0]
    raise BranchPointProximity('root tracking did not terminate')


def on_real_cut(z, bd, tol=0.0):
    z = numpy.asarray(z, dtype=complex)
    return (numpy.abs(z.imag) <= tol) & (numpy.abs(z.real) <= bd.z1)


def on_imaginary_cut(z, bd, tol=0.0):
    z = numpy.asarray(z, dtype=complex)
    return (numpy.abs(z.real) <= tol) & (numpy.abs(z.imag) <= bd.z2)


def _check_proximity(z, bd):
    tol = 1e-6 * (1.0 + bd.z1)
    dist = numpy.min(numpy.abs(z[..., None] - bd.points), axis=-1)
    if numpy.any(dist < tol):
        raise BranchPointProximity(
            f'point within {tol:.1e} of a branch point; sheet labels are ill-conditioned')


def _classify(roots, a):
    """Order roots as (xi_1, xi_2, xi_3) by the xi-plane regions."""
    a2 = a * a
    margin = numpy.abs(roots * roots - a2) ** 2 - numpy.abs(roots) ** 2 - a2
    first = numpy.argmax(margin, axis=-1)
    rest = numpy.array([[1, 2], [0, 2], [0, 1]])[first]
    r0 = numpy.take_along_axis(roots, rest[..., :1], axis=-1)[..., 0]
    r1 = numpy.take_along_axis(roots, rest[..., 1:], axis=-1)[..., 0]
    swap = r0.real < r1.real
    xi1 = numpy.take_along_axis(roots, first[..., None], axis=-1)[..., 0]
    return numpy.stack([xi1, numpy.where(swap, r1, r0), numpy.where(swap, r0, r1)], axis=-1)


def _label(flat, a, bd, method):
    if method == 'region':
        return _classify(_raw_roots(flat, a), a)
    if method == 'track':
        return _track(flat, a, bd.z1)
    raise ValueError(f'unknown labelling method {method!r}')


def track_sheets(z, a):
    """Sheet labels by root continuation from a far anchor (no cut checks)."""
    z = numpy.asarray(z, dtype=complex)
    return _track(z.reshape(-1), a, branch_points(a).z1).reshape(z.shape + (3,))


def assign_sheets(z, a, method='region'):
    """
    Sheet-labelled roots xi_1, xi_2, xi_3 at points off the cuts.

    Parameters
    ----------
    z : complex or array_like
        Evaluation points.  Points on [-z1, z1] or [-i z2, i z2] are
        rejected; use :func:`sheet_values` with a side for boundary values.
    a : float
        Source strength, 0 < a < 1.
    method : {'region', 'track'}
        Region ranking in the xi-plane, or continuation from a far anchor.

    Returns
    -------
    SheetValues
    """
    bd = branch_points(a)
    z = numpy.asarray(z, dtype=complex)
    if numpy.any(on_real_cut(z, bd) | on_imaginary_cut(z, bd)):
        raise OnCut('point on a branch cut; pass side= to sheet_values')
    _check_proximity(z, bd)
    flat = z.reshape(-1)
    xi = _label(flat, a, bd, method).reshape(z.shape + (3,))
    return SheetValues(xi=xi)


def sheet_values(z, a, side=None, method='region'):
    """
    Sheet-labelled roots including one-sided boundary values on the cuts.

    ``side`` is ``'+'`` or ``'-'``.  The real cut is oriented left to right
    (``'+'`` is the upper side); the imaginary cut is oriented upwards
    (``'+'`` is the left side).  Off the cuts ``side`` is ignored.

    Labels are read at a point displaced by 1e-7 to the requested side and
    then transferred to the exact roots at ``z`` by nearest matching, so
    the returned values are the boundary values up to rounding.

    Returns an array of shape ``z.shape + (3,)``.
    """
    bd = branch_points(a)
    z = numpy.asarray(z, dtype=complex)
    flat = z.reshape(-1)
    _check_proximity(flat, bd)
    _, xi = _sided_roots(flat, a, bd, side, method)
    return xi.reshape(z.shape + (3,))


def _sided_roots(flat, a, bd, side, method='region'):
    """
    Labelled roots at the probe points and at the exact points.

    Points on a cut are probed 1e-7 to the requested side; the exact roots
    there inherit the probe labels.  Off the cuts both arrays coincide.
    """
    real_cut = on_real_cut(flat, bd)
    imag_cut = on_imaginary_cut(flat, bd)
    cut = real_cut | imag_cut
    if numpy.any(cut):
        if side not in ('+', '-'):
            raise OnCut('point on a branch cut; side must be "+" or "-"')
        if numpy.any(real_cut & imag_cut):
            raise OnCut('the origin lies on both cuts; boundary values are not unique')
    sign = 1.0 if side == '+' else -1.0
    probe = flat.copy()
    probe[real_cut] += 1j * sign * _SIDE_EPS
    probe[imag_cut] -= sign * _SIDE_EPS
    xi_probe = _label(probe, a, bd, method)
    xi = xi_probe.copy()
    if numpy.any(cut):
        exact = _raw_roots(flat[cut], a)
        xi[cut] = _match(xi_probe[cut], exact)
    return xi_probe, xi
