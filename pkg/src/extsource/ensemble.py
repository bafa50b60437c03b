"""
Finite-n ensemble: Monte Carlo spectra of M = M0 + A and the correlation
kernel of the equivalent biorthogonal ensemble.

M0 is a GUE matrix with density proportional to exp(-n Tr M0^2 / 2) and
A = diag(a, ..., a, -a, ..., -a).  Replica ``r`` of a run with seed ``s``
draws from PCG64 seeded by ``SeedSequence(s, spawn_key=(r,))``, so replicas
are independent and reproducible in any order.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy
from flint import arb, arb_mat, ctx
from scipy.special import roots_hermite

from .errors import EigenFail, IllConditioned

__all__ = ['EnsembleParams', 'EigenSample', 'Kernel', 'KernelMatrix', 'replica_rng', 'gue_matrix',
           'source_matrix', 'jacobi_eigvalsh', 'sample_spectrum', 'sample_batch',
           'build_kernel', 'correlation', 'gue_kernel', 'kernel_trace',
           'reproducing_error', 'empirical_density', 'l1_distance']

COND_LIMIT = 1e12
MAX_PREC = 4096
MONOMIAL_MAX_N = 32


@dataclass(frozen=True)
class EnsembleParams:
    """(a, n) with a >= 0 allowed, so that a = 0 gives plain GUE."""

    a: float
    n: int

    def __post_init__(self):
        _unpack(self)


@dataclass(frozen=True)
class EigenSample:
    eigenvalues: numpy.ndarray
    seed: int
    replica: int = 0


def replica_rng(seed, replica=0):
    """Generator for one replica; streams are keyed by (seed, replica)."""
    ss = numpy.random.SeedSequence(int(seed), spawn_key=(int(replica),))
    return numpy.random.Generator(numpy.random.PCG64(ss))


def gue_matrix(n, rng, scale=1.0):
    """
    GUE matrix with diagonal variance scale/n and off-diagonal real and
    imaginary parts of variance scale/(2n).
    """
    sd = numpy.sqrt(scale / n)
    diag = rng.standard_normal(n) * sd
    re = rng.standard_normal((n, n)) * sd / numpy.sqrt(2.0)
    im = rng.standard_normal((n, n)) * sd / numpy.sqrt(2.0)
    upper = numpy.triu(re + 1j * im, 1)
    return upper + upper.conj().T + numpy.diag(diag)


def source_matrix(n, a):
    half = n // 2
    return numpy.diag(numpy.concatenate([numpy.full(half, a), numpy.full(n - half, -a)]))


def jacobi_eigvalsh(h, tol=1e-12, max_sweeps=60):
    """
    Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of h[p, q] and then applies the
    real symmetric Jacobi rotation.  Sweeps stop once the off-diagonal
    Frobenius norm is below ``tol`` times the full norm.
    """
    h = numpy.array(h, dtype=complex)
    h = (h + h.conj().T) / 2.0
    n = h.shape[0]
    total = numpy.linalg.norm(h)
    if total == 0.0:
        return numpy.zeros(n)
    for _ in range(max_sweeps):
        # direct sum; norm^2 - diag^2 cancels to ~eps * norm^2
        off = numpy.linalg.norm(h - numpy.diag(numpy.diag(h)))
        if off <= tol * total:
            return numpy.sort(numpy.diag(h).real)
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = h[p, q]
                mag = abs(g)
                if mag <= 1e-300:
                    continue
                phase = g / mag
                theta = (h[q, q].real - h[p, p].real) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + numpy.sqrt(theta * theta + 1.0))
                c = 1.0 / numpy.sqrt(t * t + 1.0)
                s = t * c
                rot = numpy.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                h[:, idx] = h[:, idx] @ rot
                h[idx, :] = rot.conj().T @ h[idx, :]
                h[q, p] = 0.0
                h[p, q] = 0.0
    raise EigenFail(f'Jacobi iteration did not converge in {max_sweeps} sweeps')


def _eigvalsh(h, solver):
    h = (h + h.conj().T) / 2.0
    if solver == 'jacobi':
        return jacobi_eigvalsh(h)
    if solver == 'lapack':
        try:
            return numpy.linalg.eigvalsh(h)
        except numpy.linalg.LinAlgError as exc:
            raise EigenFail(str(exc)) from exc
    raise ValueError(f'unknown eigensolver {solver!r}')


def sample_spectrum(params, seed, replica=0, solver='lapack'):
    """Sorted eigenvalues of M0 + A for one replica."""
    n, a = _unpack(params)
    rng = replica_rng(seed, replica)
    m = gue_matrix(n, rng) + source_matrix(n, a)
    return EigenSample(eigenvalues=numpy.sort(_eigvalsh(m, solver)), seed=int(seed),
                       replica=int(replica))


def _batch_chunk(args):
    n, a, seed, start, stop, solver = args
    params = EnsembleParams(a=a, n=n)
    return numpy.array([sample_spectrum(params, seed, r, solver).eigenvalues
                        for r in range(start, stop)])


def sample_batch(params, seed, reps, jobs=None, solver='lapack'):
    """
    Eigenvalues of ``reps`` replicas, shape (reps, n).

    The result does not depend on ``jobs``: replica r always uses the
    stream (seed, r).
    """
    jobs = os.cpu_count() or 1 if jobs is None else max(1, int(jobs))
    if jobs == 1 or reps < 2 * jobs:
        return _batch_chunk((params.n, params.a, seed, 0, reps, solver))
    bounds = numpy.linspace(0, reps, jobs + 1).astype(int)
    tasks = [(params.n, params.a, seed, lo, hi, solver)
             for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return numpy.concatenate(list(pool.map(_batch_chunk, tasks)))


# =======
# Kernel
# =======
#
# The right family spans functions that are nearly linearly dependent once
# n a is moderately large, so the Gram matrix is ill-conditioned in every
# polynomial basis.  The Gram solve and all kernel evaluations therefore run
# in Arb ball arithmetic, with the working precision raised until the
# certified error of the inverse is small.


def _hermite_functions(u, degree):
    """h_k(u) = He_k(u)/sqrt(k!) for k < degree, shape (degree, len(u))."""
    out = numpy.empty((degree, len(u)))
    out[0] = 1.0
    if degree > 1:
        out[1] = u
    for k in range(1, degree - 1):
        out[k + 1] = (u * out[k] - numpy.sqrt(k) * out[k - 1]) / numpy.sqrt(k + 1)
    return out


def _basis_rows(xs, degree, center, n, basis):
    """
    Rows k < degree of a family at Arb points ``xs``: P_k(x) e^(-n (x - center)^2/4)
    with P_k = (x - center)^k or orthonormal for the weight e^(-n (x - center)^2/2).
    """
    nn = arb(n)
    sn = nn.sqrt()
    norm = (nn / (2 * arb.pi())) ** arb(0.25)
    sq = [arb(k).sqrt() for k in range(degree + 1)]
    out = [[None] * len(xs) for _ in range(degree)]
    for i, x in enumerate(xs):
        d = x - center
        e = (-(nn * d * d) / 4).exp()
        if basis == 'monomial':
            v = e
            for k in range(degree):
                out[k][i] = v
                v = v * x
            continue
        u = d * sn
        p0, p1 = norm * e, norm * e * u
        out[0][i] = p0
        if degree > 1:
            out[1][i] = p1
        for k in range(1, degree - 1):
            p0, p1 = p1, (u * p1 - sq[k] * p0) / sq[k + 1]
            out[k + 1][i] = p1
    return out


@lru_cache(maxsize=16)
def _gauss_hermite_arb(nodes, prec):
    """Gauss-Hermite rule for e^(-t^2) refined by Newton steps in Arb."""
    t0, _ = roots_hermite(nodes)
    with ctx.workprec(prec):
        inv_pi4 = 1 / arb.pi() ** arb(0.25)
        c1 = [(arb(2) / (k + 1)).sqrt() for k in range(nodes)]
        c2 = [(arb(k) / (k + 1)).sqrt() for k in range(nodes)]
        dn = (arb(2) * nodes).sqrt()

        def scan(t):
            q0, q1, total = arb(0), inv_pi4, arb(0)
            for k in range(nodes):
                total += q1 * q1
                q0, q1 = q1, c1[k] * t * q1 - c2[k] * q0
            return q1, dn * q0, total      # q_N, q_N', sum_{k<N} q_k^2

        ts, ws = [], []
        for guess in t0:
            t = arb(float(guess))
            for _ in range(int(numpy.ceil(numpy.log2(prec / 40.0))) + 2):
                q, dq, _ = scan(t)
                t = (t - q / dq).mid()
            _, _, total = scan(t)
            ts.append(t)
            ws.append(1 / total)
    return ts, ws


def _quadrature(n, a, nodes):
    """Rules for e^(-n (x - c)^2/2), c in {a, -a}, as (points, weights / weight function)."""
    t, w = _gauss_hermite_arb(nodes, ctx.prec)
    step = (arb(2) / n).sqrt()
    centres = [arb(0)] if a == 0 else [arb(a), -arb(a)]
    rules = []
    for c in centres:
        xs = [c + ti * step for ti in t]
        # the integrands are polynomials times e^(-n (x - c)^2/2) up to a constant,
        # so dividing by that factor keeps the rule exact
        ws = [wi * step * (ti * ti).exp() for ti, wi in zip(t, w)]
        rules.append((xs, ws))
    return rules


def _to_float(value):
    return float(value.mid())


@dataclass
class Kernel:
    """
    K(x, y) = f(x)^T G^-T g(y) with f_k = P_k(x) e^(-n x^2/4) and
    g spanning Q_m(y) e^(+-n a y - n y^2/4), evaluated in Arb at ``prec`` bits.
    """
    n: int
    a: float
    basis: str
    prec: int
    coeff: object = field(repr=False)      # arb_mat, G^-T
    cond: float = float('nan')
    nodes: int = 0
    gauge: str = 'symmetric exp(-n x^2/4) factor on both families'

    def _left(self, xs):
        return _basis_rows(xs, self.n, arb(0), self.n, self.basis)

    def _right(self, ys):
        if self.a == 0.0:
            return self._left(ys)
        half = self.n // 2
        # e^(+-n a y - n y^2/4) = e^(n a^2) e^(-n (y -+ 2a)^2/4); the constant is dropped
        return (_basis_rows(ys, half, 2 * arb(self.a), self.n, self.basis)
                + _basis_rows(ys, half, -2 * arb(self.a), self.n, self.basis))

    def _arb_points(self, x):
        x = numpy.atleast_1d(numpy.asarray(x, dtype=float))
        return x, [arb(float(v)) for v in x]

    def __call__(self, x, y):
        """Matrix K(x_i, y_j) as floats."""
        with ctx.workprec(self.prec):
            x, xs = self._arb_points(x)
            y, ys = self._arb_points(y)
            left = arb_mat(self._left(xs)).transpose()
            right = arb_mat(self._right(ys))
            if len(xs) <= len(ys):
                out = (left * self.coeff) * right
            else:
                out = left * (self.coeff * right)
            return numpy.array([[_to_float(out[i, j]) for j in range(len(ys))]
                                for i in range(len(xs))])

    def diagonal(self, x):
        """K(x_i, x_i) as floats."""
        with ctx.workprec(self.prec):
            x, xs = self._arb_points(x)
            left = self._left(xs)
            mixed = self.coeff * arb_mat(self._right(xs))
            out = numpy.empty(len(xs))
            for i in range(len(xs)):
                acc = arb(0)
                for k in range(self.n):
                    acc += left[k][i] * mixed[k, i]
                out[i] = _to_float(acc)
            return out


@dataclass
class KernelMatrix:
    grid: numpy.ndarray
    values: numpy.ndarray
    n: int
    a: float
    gauge: str
    kernel: Kernel = field(repr=False)

    def metadata(self):
        return {'a': self.a, 'n': self.n, 'gauge': self.gauge, 'basis': self.kernel.basis,
                'quadrature_nodes': self.kernel.nodes, 'working_precision_bits': self.kernel.prec,
                'condition_estimate': self.kernel.cond}


def _gram(n, a, basis, nodes):
    """G[k, l] = int f_k g_l dx, exact Gauss-Hermite rules centred at +-a (Arb)."""
    half = n // 2
    rules = _quadrature(n, a, nodes)
    blocks = []
    for idx, (xs, ws) in enumerate(rules):
        f = _basis_rows(xs, n, arb(0), n, basis)
        if a == 0.0:
            g = f
        else:
            sgn = 1 if idx == 0 else -1
            g = _basis_rows(xs, half, 2 * sgn * arb(a), n, basis)
        fw = arb_mat([[row[i] * ws[i] for i in range(len(xs))] for row in f])
        blocks.append(fw * arb_mat(g).transpose())
    if a == 0.0:
        return blocks[0]
    return arb_mat([[blocks[0][k, l] if l < half else blocks[1][k, l - half]
                     for l in range(n)] for k in range(n)])


def _inf_norm(m):
    return max(sum(abs(_to_float(m[i, j])) for j in range(m.ncols())) for i in range(m.nrows()))


def _max_relative_radius(m):
    worst = 0.0
    scale = max(abs(_to_float(m[i, j])) for i in range(m.nrows()) for j in range(m.ncols()))
    for i in range(m.nrows()):
        for j in range(m.ncols()):
            worst = max(worst, float(m[i, j].rad()) / scale)
    return worst


def _unpack(params):
    n, a = int(params.n), float(params.a)
    if n < 2 or n % 2:
        raise ValueError(f'n must be even and >= 2, got {n}')
    if a < 0:
        raise ValueError(f'a must be >= 0, got {a}')
    return n, a


def build_kernel(params, grid=None, basis='auto', nodes=None, prec=None):
    """
    Correlation kernel of the finite-n ensemble.

    Parameters
    ----------
    params : SourceParams or EnsembleParams
        ``a = 0`` gives the GUE kernel.
    grid : array_like, optional
        Points at which the returned matrix is sampled.
    basis : {'auto', 'monomial', 'orthonormal'}
        'auto' uses monomials for n <= 32 and Hermite polynomials
        orthonormal for each family's Gaussian factor above that.
    nodes : int, optional
        Gauss-Hermite nodes per centre; the default integrates the Gram
        entries exactly.
    prec : int, optional
        Starting working precision in bits (default 64 + 3n).

    Raises
    ------
    IllConditioned
        If the condition number of G, measured against the working
        precision, exceeds 1e12 times the double-precision unit roundoff
        even at 4096 bits.
    """
    n, a = _unpack(params)
    if n > 128:
        raise ValueError('build_kernel supports n <= 128')
    if basis == 'auto':
        basis = 'monomial' if n <= MONOMIAL_MAX_N else 'orthonormal'
    if basis not in ('monomial', 'orthonormal'):
        raise ValueError(f'unknown basis {basis!r}')
    nodes = (3 * n) // 4 + 16 if nodes is None else int(nodes)
    bits = 64 + 3 * n if prec is None else int(prec)
    while True:
        with ctx.workprec(bits):
            g = _gram(n, a, basis, nodes)
            try:
                inv = g.inv()
            except ZeroDivisionError:
                inv = None
            if inv is not None:
                cond = _inf_norm(g) * _inf_norm(inv)
                loss = cond * 2.0 ** (-bits) / 2.0 ** (-53)
                if loss <= COND_LIMIT and _max_relative_radius(inv) < 1e-20:
                    break
        bits *= 2
        if bits > MAX_PREC:
            raise IllConditioned(
                f'Gram matrix of the {basis} basis is too ill-conditioned at n={n}, a={a} '
                f'even at {bits // 2} bits; reduce n or use the orthonormal basis')
    kern = Kernel(n=n, a=a, basis=basis, prec=bits, coeff=inv.transpose(), cond=cond,
                  nodes=nodes)
    if grid is None:
        return KernelMatrix(grid=numpy.array([]), values=numpy.zeros((0, 0)), n=n, a=a,
                            gauge=kern.gauge, kernel=kern)
    grid = numpy.asarray(grid, dtype=float)
    return KernelMatrix(grid=grid, values=kern(grid, grid), n=n, a=a, gauge=kern.gauge,
                        kernel=kern)


def correlation(kernel, points):
    """m-point correlation det[K(x_j, x_k)], with the kernel re-evaluated at the points."""
    kern = kernel.kernel if isinstance(kernel, KernelMatrix) else kernel
    pts = numpy.atleast_1d(numpy.asarray(points, dtype=float))
    return float(numpy.linalg.det(kern(pts, pts)))


def gue_kernel(x, y, n):
    """GUE kernel with the weight exp(-n x^2/2) split evenly, via the Hermite recurrence."""
    x = numpy.atleast_1d(numpy.asarray(x, dtype=float))
    y = numpy.atleast_1d(numpy.asarray(y, dtype=float))
    c = (n / (2 * numpy.pi)) ** 0.25
    hx = _hermite_functions(x * numpy.sqrt(n), n) * c * numpy.exp(-n * x * x / 4)
    hy = _hermite_functions(y * numpy.sqrt(n), n) * c * numpy.exp(-n * y * y / 4)
    return hx.T @ hy


def _legendre_rule(lo, hi, points):
    t, w = numpy.polynomial.legendre.leggauss(points)
    return (hi - lo) / 2 * t + (hi + lo) / 2, (hi - lo) / 2 * w


def kernel_trace(kernel, half_width=None, points=1200):
    """int K(x, x) dx by Gauss-Legendre over a window covering the spectrum."""
    kern = kernel.kernel if isinstance(kernel, KernelMatrix) else kernel
    half_width = 2 * kern.a + 5.0 if half_width is None else half_width
    x, w = _legendre_rule(-half_width, half_width, points)
    return float(w @ kern.diagonal(x))


def reproducing_error(kernel, pairs, half_width=None, points=1200):
    """Max relative error of int K(x,y) K(y,z) dy = K(x,z) over ``pairs``."""
    kern = kernel.kernel if isinstance(kernel, KernelMatrix) else kernel
    half_width = 2 * kern.a + 5.0 if half_width is None else half_width
    y, w = _legendre_rule(-half_width, half_width, points)
    pairs = numpy.asarray(pairs, dtype=float).reshape(-1, 2)
    left = kern(pairs[:, 0], y)
    right = kern(y, pairs[:, 1])
    lhs = numpy.einsum('iy,y,yi->i', left, w, right)
    rhs = numpy.diag(kern(pairs[:, 0], pairs[:, 1]))
    return float(numpy.max(numpy.abs(lhs - rhs) / numpy.abs(rhs)))


def empirical_density(eigenvalues, edges):
    """Histogram density normalised to unit mass."""
    hist, _ = numpy.histogram(numpy.ravel(eigenvalues), bins=edges)
    width = numpy.diff(edges)
    return hist / (hist.sum() * width)


def l1_distance(values, reference, edges):
    return float(numpy.sum(numpy.abs(values - reference) * numpy.diff(edges)))
