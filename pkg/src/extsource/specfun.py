"""
Complex Airy function and the 3x3 Airy model matrix.

Ai is evaluated by its Maclaurin series for |s| <= 4.5 (|s| <= 2 in the
sector |arg s| < pi/3, where the series cancels) and by the
large-argument expansion for |s| >= 10.  In the annulus between, the Airy
equation y'' = s y is integrated radially by Taylor steps, inward from the
asymptotic circle where Ai is recessive (|arg s| < pi/3) and outward from
the series circle elsewhere.
"""

import math
from dataclasses import dataclass

import numpy

from .errors import OnRayError

__all__ = ['AiryPair', 'OMEGA', 'AI0', 'AIP0', 'airy', 'airy_series',
           'airy_asymptotic', 'sector_of', 'phi_matrix', 'PHI_JUMPS', 'PHI_SIDES']

OMEGA = numpy.exp(2j * numpy.pi / 3)
AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)

SERIES_RADIUS = 4.5
ASYMPTOTIC_RADIUS = 10.0
_MAX_TERMS = 40
_TAYLOR_TERMS = 40
_TAYLOR_STEP = 0.4
_RECESSIVE_SERIES_RADIUS = 2.0


@dataclass(frozen=True)
class AiryPair:
    ai: complex
    ai_prime: complex

    def __iter__(self):
        return iter((self.ai, self.ai_prime))


def airy_series(s):
    """Maclaurin series for (Ai, Ai'), summed until terms fall below 1e-17 relative."""
    s = numpy.asarray(s, dtype=complex)
    s3 = s ** 3
    f = numpy.ones_like(s)
    g = s.copy()
    fp = numpy.zeros_like(s)
    gp = numpy.ones_like(s)
    tf, tg = numpy.ones_like(s), s.copy()
    tfp, tgp = s * s / 2.0, numpy.ones_like(s)
    fp = fp + tfp
    for k in range(0, 200):
        tf = tf * s3 / ((3 * k + 2) * (3 * k + 3))
        tg = tg * s3 / ((3 * k + 3) * (3 * k + 4))
        tgp = tgp * s3 / ((3 * k + 1) * (3 * k + 3))
        f = f + tf
        g = g + tg
        gp = gp + tgp
        if k >= 1:
            tfp = tfp * s3 / ((3 * k) * (3 * k + 2))
            fp = fp + tfp
        scale = numpy.abs(f) + numpy.abs(g) + numpy.abs(fp) + numpy.abs(gp)
        small = numpy.abs(tf) + numpy.abs(tg) + numpy.abs(tfp) + numpy.abs(tgp)
        if k > 2 and numpy.all(small <= 1e-17 * scale):
            break
    return AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp


def _asym_coefficients(count):
    u = [1.0]
    for k in range(1, count):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    v = [1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, count)]
    return numpy.array(u), numpy.array(v)


_U, _V = _asym_coefficients(_MAX_TERMS)


def _asym_principal(s, terms):
    zeta = (2.0 / 3.0) * s * numpy.sqrt(s)
    pre = numpy.exp(-zeta) / (2.0 * numpy.sqrt(numpy.pi))
    q = s ** 0.25
    sa = numpy.zeros_like(s)
    sb = numpy.zeros_like(s)
    last = numpy.full(s.shape, numpy.inf)
    live = numpy.ones(s.shape, dtype=bool)
    zinv = 1.0 / zeta
    power = numpy.ones_like(s)
    for k in range(terms):
        ta = _U[k] * power
        tb = _V[k] * power
        size = numpy.abs(ta) + numpy.abs(tb)
        live = live & (size < last)        # stop at the smallest term
        sa = sa + numpy.where(live, ta, 0.0)
        sb = sb + numpy.where(live, tb, 0.0)
        last = numpy.where(live, size, last)
        power = -power * zinv
    return pre * sa / q, -pre * q * sb


def airy_asymptotic(s, terms=_MAX_TERMS):
    """
    Large-|s| expansion of (Ai, Ai'), truncated at the smallest term.

    For |arg s| > 2 pi/3 the connection formula
    Ai(s) = -w Ai(w s) - w^2 Ai(w^2 s) moves the evaluation into the
    sector where the expansion is uniform.
    """
    s = numpy.asarray(s, dtype=complex)
    terms = max(6, min(int(terms), _MAX_TERMS))
    far = numpy.abs(numpy.angle(s)) > 2.0 * numpy.pi / 3.0
    ai, aip = _asym_principal(numpy.where(far, 1.0, s), terms)
    if numpy.any(far):
        sf = s[far]
        a1, d1 = _asym_principal(OMEGA * sf, terms)
        a2, d2 = _asym_principal(OMEGA ** 2 * sf, terms)
        ai[far] = -OMEGA * a1 - OMEGA ** 2 * a2
        aip[far] = -OMEGA ** 2 * d1 - OMEGA * d2
    return ai, aip


def _taylor_walk(start, target, y, dy):
    """Carry (y, y') of y'' = s y along straight segments from start to target."""
    dist = numpy.abs(target - start)
    steps = max(1, int(numpy.ceil(dist.max() / _TAYLOR_STEP))) if dist.size else 1
    h = (target - start) / steps
    c = start.copy()
    for _ in range(steps):
        coef = [y, dy]
        for k in range(_TAYLOR_TERMS - 2):
            nxt = (c * coef[k] + (coef[k - 1] if k >= 1 else 0.0)) / ((k + 2) * (k + 1))
            coef.append(nxt)
        y = numpy.zeros_like(c)
        dy = numpy.zeros_like(c)
        hp = numpy.ones_like(c)
        for k in range(_TAYLOR_TERMS):
            y = y + coef[k] * hp
            if k + 1 < _TAYLOR_TERMS:
                dy = dy + (k + 1) * coef[k + 1] * hp
            hp = hp * h
        c = c + h
    return y, dy


def _airy_arrays(s):
    s = numpy.asarray(s, dtype=complex)
    r = numpy.abs(s)
    ai = numpy.empty(s.shape, dtype=complex)
    aip = numpy.empty(s.shape, dtype=complex)
    # the series cancels badly where Ai is small, so it stops earlier there
    recessive = numpy.abs(numpy.angle(s)) < numpy.pi / 3.0
    inner = (r <= SERIES_RADIUS) & ~(recessive & (r > _RECESSIVE_SERIES_RADIUS))
    outer = r >= ASYMPTOTIC_RADIUS
    mid = ~(inner | outer)
    if numpy.any(inner):
        ai[inner], aip[inner] = airy_series(s[inner])
    if numpy.any(outer):
        ai[outer], aip[outer] = airy_asymptotic(s[outer])
    if numpy.any(mid):
        sm = s[mid]
        unit = sm / numpy.abs(sm)
        recessive = numpy.abs(numpy.angle(sm)) < numpy.pi / 3.0
        res_a = numpy.empty(sm.shape, dtype=complex)
        res_d = numpy.empty(sm.shape, dtype=complex)
        for mask, radius, source in ((recessive, ASYMPTOTIC_RADIUS, airy_asymptotic),
                                     (~recessive, SERIES_RADIUS, airy_series)):
            if numpy.any(mask):
                start = unit[mask] * radius
                y, dy = source(start)
                res_a[mask], res_d[mask] = _taylor_walk(start, sm[mask], y, dy)
        ai[mid], aip[mid] = res_a, res_d
    return ai, aip


def airy(s):
    """
    Airy function and derivative at complex ``s``.

    Scalars return an :class:`AiryPair`; arrays return a tuple ``(ai, ai_prime)``
    of arrays of the same shape.
    """
    if numpy.ndim(s) == 0:
        ai, aip = _airy_arrays(numpy.array([s], dtype=complex))
        return AiryPair(complex(ai[0]), complex(aip[0]))
    return _airy_arrays(s)


_RAYS = (0.0, 2.0 * numpy.pi / 3.0, -2.0 * numpy.pi / 3.0)


def sector_of(s, tol=1e-8):
    """Sector label 'I', 'II' or 'III' of ``s``; raises OnRayError near a ray."""
    if s == 0:
        raise OnRayError('s = 0 lies on every ray')
    theta = numpy.angle(s)
    for ray in _RAYS:
        d = abs((theta - ray + numpy.pi) % (2.0 * numpy.pi) - numpy.pi)
        if d < tol:
            raise OnRayError(f'arg s = {theta} is within {tol} of the ray {ray}')
    if 0.0 < theta < 2.0 * numpy.pi / 3.0:
        return 'I'
    if -2.0 * numpy.pi / 3.0 < theta < 0.0:
        return 'II'
    return 'III'


def phi_matrix(s, sector=None, check=True):
    """
    Airy model matrix in the given sector.

    With y0 = Ai(s), y1 = w Ai(w s), y2 = w^2 Ai(w^2 s), w = exp(2 pi i/3),
    the lower-right 2x2 block holds the columns (y0, -y2) in sector I,
    (y0, y1) in sector II and (-y1, -y2) in sector III, each stacked with
    its derivative.  The determinant is i/(2 pi) in every sector.

    ``sector`` defaults to the sector containing ``s``.  With
    ``check=False`` the formula of the named sector is evaluated even on or
    beyond its bounding rays, which gives one-sided boundary values.
    """
    s = complex(s)
    actual = sector_of(s) if (check or sector is None) else None
    if sector is None:
        sector = actual
    elif check and sector != actual:
        raise ValueError(f's = {s} lies in sector {actual}, not {sector}')
    w = numpy.array([1.0, OMEGA, OMEGA ** 2])
    ai, aip = _airy_arrays(w * s)
    y = w * ai
    dy = w * w * aip
    if sector == 'I':
        cols = ((y[0], dy[0]), (-y[2], -dy[2]))
    elif sector == 'II':
        cols = ((y[0], dy[0]), (y[1], dy[1]))
    elif sector == 'III':
        cols = ((-y[1], -dy[1]), (-y[2], -dy[2]))
    else:
        raise ValueError(f'unknown sector {sector!r}')
    out = numpy.zeros((3, 3), dtype=complex)
    out[0, 0] = 1.0
    out[1, 1], out[2, 1] = cols[0]
    out[1, 2], out[2, 2] = cols[1]
    return out


# (plus side, minus side) of each ray; arg 0 is oriented away from the
# origin and the rays at +-2 pi/3 towards it
PHI_SIDES = {
    0.0: ('I', 'II'),
    2.0 * numpy.pi / 3.0: ('I', 'III'),
    -2.0 * numpy.pi / 3.0: ('III', 'II'),
}

PHI_JUMPS = {
    0.0: numpy.array([[1, 0, 0], [0, 1, 1], [0, 0, 1]], dtype=complex),
    2.0 * numpy.pi / 3.0: numpy.array([[1, 0, 0], [0, 1, 0], [0, 1, 1]], dtype=complex),
    -2.0 * numpy.pi / 3.0: numpy.array([[1, 0, 0], [0, 0, 1], [0, -1, 1]], dtype=complex),
}
