import numpy
import pytest
from scipy import stats

from extsource import ensemble
from extsource.density import density, support
from extsource.ensemble import (EnsembleParams, build_kernel, correlation, empirical_density,
                                gue_kernel, gue_matrix, jacobi_eigvalsh, kernel_trace,
                                l1_distance, replica_rng, reproducing_error, sample_batch,
                                sample_spectrum, source_matrix)
from extsource.errors import IllConditioned
from extsource.surface import SourceParams

from .conftest import A


@pytest.fixture(scope='module')
def kern50():
    return build_kernel(EnsembleParams(A, 50)).kernel


def semicircle(x):
    return numpy.sqrt(numpy.clip(4 - x * x, 0, None)) / (2 * numpy.pi)


def test_params_validation():
    EnsembleParams(0.0, 2)
    for a, n in ((-0.1, 4), (0.4, 5), (0.4, 0)):
        with pytest.raises(ValueError):
            EnsembleParams(a, n)


def test_gue_matrix_variances():
    rng = replica_rng(7)
    n = 400
    h = gue_matrix(n, rng)
    assert numpy.array_equal(h, h.conj().T)
    iu = numpy.triu_indices(n, 1)
    assert numpy.var(numpy.diag(h).real) * n == pytest.approx(1.0, abs=0.15)
    assert numpy.var(h[iu].real) * 2 * n == pytest.approx(1.0, abs=0.02)
    assert numpy.var(h[iu].imag) * 2 * n == pytest.approx(1.0, abs=0.02)


def test_source_matrix():
    assert numpy.array_equal(source_matrix(4, 0.5), numpy.diag([0.5, 0.5, -0.5, -0.5]))


def test_sample_shape_sorted_deterministic():
    p = SourceParams(a=A, n=20)
    s1 = sample_spectrum(p, seed=11, replica=3)
    s2 = sample_spectrum(p, seed=11, replica=3)
    assert s1.eigenvalues.shape == (20,)
    assert numpy.all(numpy.diff(s1.eigenvalues) >= 0)
    assert numpy.array_equal(s1.eigenvalues, s2.eigenvalues)
    assert not numpy.array_equal(s1.eigenvalues, sample_spectrum(p, 11, 4).eigenvalues)


def test_batch_independent_of_jobs():
    p = EnsembleParams(A, 10)
    one = sample_batch(p, seed=5, reps=12, jobs=1)
    two = sample_batch(p, seed=5, reps=12, jobs=2)
    assert one.shape == (12, 10)
    assert numpy.array_equal(one, two)
    assert numpy.array_equal(one[7], sample_spectrum(p, 5, 7).eigenvalues)


def test_jacobi_matches_lapack(rng):
    for n in (2, 7, 30):
        h = gue_matrix(n, rng)
        if n % 2 == 0:
            h = h + source_matrix(n, 0.3)
        assert numpy.max(numpy.abs(jacobi_eigvalsh(h) - numpy.linalg.eigvalsh(h))) < 1e-12
    p = EnsembleParams(A, 16)
    j = sample_spectrum(p, 3, solver='jacobi').eigenvalues
    lp = sample_spectrum(p, 3, solver='lapack').eigenvalues
    assert numpy.max(numpy.abs(j - lp)) < 1e-12


def test_jacobi_diagonal_input():
    assert numpy.array_equal(jacobi_eigvalsh(numpy.diag([3.0, -1.0, 2.0])), [-1.0, 2.0, 3.0])


def test_gue_n2_density_matches_semicircle():
    """Stated example: n = 2 GUE histogram vs the semicircle, L1 < 0.05 with 1e5 samples."""
    eigs = sample_batch(EnsembleParams(0.0, 2), seed=1, reps=50_000)
    edges = numpy.linspace(-3, 3, 61)
    mid = 0.5 * (edges[1:] + edges[:-1])
    assert l1_distance(empirical_density(eigs, edges), semicircle(mid), edges) < 0.05


def test_reflection_symmetry():
    eigs = sample_batch(EnsembleParams(A, 20), seed=2, reps=400).ravel()
    stat = stats.ks_2samp(eigs, -eigs).statistic
    m = eigs.size
    crit = 1.628 * numpy.sqrt(2.0 / m)  # two-sample critical value at the 1% level
    assert stat < crit


def test_kernel_trace_and_projection(kern50, rng):
    assert kernel_trace(kern50) == pytest.approx(50, abs=1e-6)
    pairs = rng.uniform(-1.8, 1.8, (10, 2))
    assert reproducing_error(kern50, pairs) < 1e-6


def test_kernel_metadata():
    km = build_kernel(EnsembleParams(A, 10), grid=numpy.linspace(-2, 2, 5))
    meta = km.metadata()
    assert set(meta) >= {'a', 'n', 'gauge', 'quadrature_nodes', 'condition_estimate'}
    assert km.values.shape == (5, 5)
    assert numpy.isfinite(meta['condition_estimate'])


def test_gue_reduction_hermite_oracle():
    x = numpy.linspace(-2.5, 2.5, 41)
    k = build_kernel(EnsembleParams(0.0, 20)).kernel
    assert numpy.max(numpy.abs(k.diagonal(x) - numpy.diag(gue_kernel(x, x, 20)))) < 1e-3
    assert numpy.max(numpy.abs(k(x, x) - gue_kernel(x, x, 20))) < 1e-10


def test_gue_diagonal_vs_semicircle_n20():
    """Stated example: sup |K(x,x)/20 - semicircle| < 1e-3 at n = 20."""
    x = numpy.linspace(-1.9, 1.9, 381)
    k = build_kernel(EnsembleParams(0.0, 20)).kernel
    assert numpy.max(numpy.abs(k.diagonal(x) / 20 - semicircle(x))) < 1e-3


def test_diagonal_vs_density_n50(kern50):
    z1 = support(A).z1
    x = numpy.linspace(-z1 + 0.2, z1 - 0.2, 201)
    assert numpy.max(numpy.abs(kern50.diagonal(x) / 50 - density(x, A))) < 0.05


def test_correlations(kern50, rng):
    x = rng.uniform(-2.5, 2.5, 20)
    assert all(correlation(kern50, [v]) >= 0 for v in x)
    assert abs(correlation(kern50, [0.3, 0.3])) < 1e-10
    assert 0 < correlation(kern50, [0.3, 0.6]) < correlation(kern50, [0.3]) * \
        correlation(kern50, [0.6])


def test_gauge_invariance(kern50, rng):
    pts = rng.uniform(-1.5, 1.5, 3)
    k = kern50(pts, pts)
    d = numpy.exp(rng.uniform(-3, 3, 3))
    conj = d[:, None] * k / d[None, :]
    assert numpy.linalg.det(conj) == pytest.approx(numpy.linalg.det(k), rel=1e-10)


def test_ill_conditioned_raised(monkeypatch):
    # with the precision cap at 128 bits the n = 50 monomial Gram matrix cannot be inverted
    monkeypatch.setattr(ensemble, 'MAX_PREC', 128)
    with pytest.raises(IllConditioned):
        build_kernel(EnsembleParams(A, 50), basis='monomial', prec=64)


def test_kernel_size_limit():
    with pytest.raises(ValueError):
        build_kernel(EnsembleParams(A, 130))


def test_mc_matches_kernel_diagonal(kern50):
    eigs = sample_batch(EnsembleParams(A, 50), seed=3, reps=2000)
    edges = numpy.linspace(-2.6, 2.6, 53)
    x, w = numpy.polynomial.legendre.leggauss(8)
    ref = numpy.array([numpy.sum(w * kern50.diagonal(0.5 * (hi - lo) * x + 0.5 * (hi + lo))) / 2
                       for lo, hi in zip(edges[:-1], edges[1:])]) / 50
    assert l1_distance(empirical_density(eigs, edges), ref, edges) < 0.05
