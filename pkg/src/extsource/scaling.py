"""
Universality checks for the finite-n kernel: the bulk sine-kernel limit and
the edge Airy-kernel limit.

Every reported discrepancy is built from gauge-invariant combinations, the
diagonal L(u, u) and the symmetric product L(u, v) L(v, u), so it does not
depend on which diagonal gauge the kernel is stored in.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy

from . import density as _density
from .ensemble import build_kernel, EnsembleParams
from .rh.lambdas import h_function
from .specfun import airy

__all__ = ['ScalingReport', 'rescaled_kernel', 'rescaled_matrix', 'gauge_factor',
           'sine_kernel', 'airy_kernel', 'bulk_check', 'edge_check', 'rate_estimate']

GRID_POINTS = 33


@dataclass
class ScalingReport:
    regime: str                 # 'bulk' or 'edge'
    a: float
    point: float                # x0 for the bulk, z1 for the edge
    ladder: list
    product_errors: list
    diag_errors: list
    errors: list                # max of the two discrepancies per n
    rate_estimate: float
    extras: dict = field(default_factory=dict)

    def monotone(self, slack=0.25):
        """True if errors are nonincreasing along the ladder up to a factor 1 + slack."""
        e = self.errors
        return all(e[i + 1] <= (1.0 + slack) * e[i] for i in range(len(e) - 1))

    def to_json(self):
        rows = []
        for i, n in enumerate(self.ladder):
            rows.append({'regime': self.regime, 'a': self.a, 'x0': self.point, 'n': n,
                         'sup_product_error': self.product_errors[i],
                         'sup_diag_error': self.diag_errors[i],
                         'rate_estimate': self.rate_estimate})
        return json.dumps({'regime': self.regime, 'a': self.a, 'x0': self.point,
                           'rate_estimate': self.rate_estimate, 'rows': rows,
                           'extras': self.extras}, indent=2)


def gauge_factor(x, y, a, n):
    """e^(n (h(x) - h(y))), elementwise over broadcast x, y."""
    return numpy.exp(n * (h_function(x, a) - h_function(y, a)))


def rescaled_matrix(kernel, x, y):
    """K^_n(x_i, y_j) for a prebuilt :class:`~extsource.ensemble.Kernel`."""
    x = numpy.atleast_1d(numpy.asarray(x, dtype=float))
    y = numpy.atleast_1d(numpy.asarray(y, dtype=float))
    hx = h_function(x, kernel.a)
    hy = h_function(y, kernel.a)
    return numpy.exp(kernel.n * (hx[:, None] - hy[None, :])) * kernel(x, y)


def rescaled_kernel(params, x, y, kernel=None):
    """
    K^_n(x, y) = e^(n (h(x) - h(y))) K_n(x, y).

    ``kernel`` may pass a prebuilt kernel to skip the Gram solve.
    """
    if kernel is None:
        kernel = build_kernel(params).kernel
    return float(rescaled_matrix(kernel, [x], [y])[0, 0])


def sine_kernel(u, v):
    return numpy.sinc(numpy.asarray(u) - numpy.asarray(v))


def airy_kernel(u, v):
    """Airy kernel on a grid; the diagonal uses Ai'(u)^2 - u Ai(u)^2."""
    u = numpy.asarray(u, dtype=float)
    v = numpy.asarray(v, dtype=float)
    au, dau = (numpy.real(t) for t in airy(u.astype(complex)))
    av, dav = (numpy.real(t) for t in airy(v.astype(complex)))
    diff = u - v
    same = numpy.abs(diff) < 1e-12
    with numpy.errstate(divide='ignore', invalid='ignore'):
        off = (au * dav - dau * av) / diff
    diag = dau * dau - u * au * au
    return numpy.where(same, diag, off)


def rate_estimate(ladder, errors):
    """Least-squares slope of log(error) against log(n)."""
    ladder = numpy.asarray(ladder, dtype=float)
    errors = numpy.asarray(errors, dtype=float)
    if len(ladder) < 2 or numpy.any(errors <= 0):
        return float('nan')
    return float(numpy.polyfit(numpy.log(ladder), numpy.log(errors), 1)[0])


def _scaled_grid(lo, hi, points):
    return numpy.linspace(lo, hi, points)


def _compare(kernel, base, scale, u, target):
    """Sup discrepancies of L(u, v) L(v, u) and L(u, u) against ``target``."""
    x = base + u / scale
    mat = rescaled_matrix(kernel, x, x) / scale
    product = mat * mat.T
    want = target(u[:, None], u[None, :])
    prod_err = float(numpy.max(numpy.abs(product - want * want.T)))
    diag_err = float(numpy.max(numpy.abs(numpy.diag(mat) - numpy.diag(want))))
    return mat, product, prod_err, diag_err


def bulk_check(a, x0, ladder, points=GRID_POINTS):
    """
    Sine-kernel discrepancies at the bulk point ``x0``.

    For each n, L_n(u, v) = K^_n(x0 + u/(n rho), x0 + v/(n rho)) / (n rho)
    with rho = rho(x0), on a ``points`` x ``points`` grid over [-2, 2]^2.
    """
    rho = float(_density.density(x0, a))
    if not rho > 0:
        raise ValueError(f'x0={x0} is outside the support (rho = {rho})')
    u = _scaled_grid(-2.0, 2.0, points)
    integer = numpy.abs(numpy.round(u[:, None] - u[None, :]) - (u[:, None] - u[None, :])) < 1e-9
    integer &= numpy.abs(u[:, None] - u[None, :]) > 0.5
    prods, diags, zeros = [], [], []
    for n in ladder:
        kern = build_kernel(EnsembleParams(a=a, n=int(n))).kernel
        _, product, pe, de = _compare(kern, x0, n * rho, u, sine_kernel)
        prods.append(pe)
        diags.append(de)
        zeros.append(float(numpy.max(numpy.abs(product[integer]))))
    errors = [max(p, d) for p, d in zip(prods, diags)]
    return ScalingReport(regime='bulk', a=float(a), point=float(x0), ladder=[int(n) for n in ladder],
                         product_errors=prods, diag_errors=diags, errors=errors,
                         rate_estimate=rate_estimate(ladder, errors),
                         extras={'rho': rho, 'sup_integer_separation_product': zeros})


def edge_check(a, ladder, points=GRID_POINTS):
    """
    Airy-kernel discrepancies at the right edge z1.

    For each n, A_n(u, v) = K^_n(z1 + u/c, z1 + v/c) / c with
    c = (rho1 n)^(2/3), on a grid over [-4, 2]^2.
    """
    z1 = _density.support(a).z1
    rho1 = _density.edge_constant(a)
    u = _scaled_grid(-4.0, 2.0, points)
    prods, diags, tails = [], [], []
    for n in ladder:
        kern = build_kernel(EnsembleParams(a=a, n=int(n))).kernel
        scale = (rho1 * n) ** (2.0 / 3.0)
        mat, _, pe, de = _compare(kern, z1, scale, u, airy_kernel)
        prods.append(pe)
        diags.append(de)
        tails.append(float(mat[-1, -1]))
    errors = [max(p, d) for p, d in zip(prods, diags)]
    return ScalingReport(regime='edge', a=float(a), point=float(z1), ladder=[int(n) for n in ladder],
                         product_errors=prods, diag_errors=diags, errors=errors,
                         rate_estimate=rate_estimate(ladder, errors),
                         extras={'rho1': rho1, 'diagonal_at_u2': tails})
