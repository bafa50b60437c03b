"""
Non-intersecting Brownian bridges from 0 to +-b via the Hermitian matrix
bridge M(t) = W(t) - t W(1) + t B.

W is a Hermitian Brownian motion whose entries at time t have the GUE
variances of t M0.  Sampling W at the recorded times and at t = 1 from
independent Gaussian increments makes every recorded slice exact.  At time
t the eigenvalues of M(t)/sqrt(t(1-t)) follow the external-source ensemble
with a = b sqrt(t/(1-t)).
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy

from .density import support
from .ensemble import gue_matrix, replica_rng, source_matrix
from .errors import NonIntersectViolation

__all__ = ['BridgeEnsemble', 'simulate', 'simulate_batch', 'critical_time', 'mapped_a',
           'support_count_transition', 'GAP_FLOOR']

GAP_FLOOR = 1e-14


@dataclass
class BridgeEnsemble:
    b: float
    n: int
    times: numpy.ndarray
    paths: numpy.ndarray        # shape (len(times), n), sorted along axis 1
    seed: int
    replica: int = 0

    def rescaled(self, index):
        """Positions at times[index] divided by sqrt(t (1 - t))."""
        t = self.times[index]
        return self.paths[index] / numpy.sqrt(t * (1.0 - t))


def _check_times(times):
    times = numpy.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError('times must be a nonempty vector')
    if numpy.any(times <= 0.0) or numpy.any(times >= 1.0):
        raise ValueError('times must lie strictly inside (0, 1)')
    if numpy.any(numpy.diff(times) <= 0.0):
        raise ValueError('times must be strictly increasing')
    return times


def simulate(b, n, times, seed, replica=0):
    """
    One replica of the two-group bridge ensemble at the given times.

    Raises
    ------
    NonIntersectViolation
        If two sorted positions at a recorded time differ by less than 1e-14.
    """
    if not b > 0:
        raise ValueError(f'b must be positive, got {b}')
    if int(n) != n or n < 2 or n % 2:
        raise ValueError(f'n must be an even integer >= 2, got {n}')
    n = int(n)
    times = _check_times(times)
    rng = replica_rng(seed, replica)
    grid = numpy.append(times, 1.0)
    steps = numpy.diff(numpy.concatenate([[0.0], grid]))
    w = numpy.zeros((n, n), dtype=complex)
    walk = []
    for dt in steps:
        w = w + gue_matrix(n, rng, scale=dt)
        walk.append(w)
    w1 = walk[-1]
    target = source_matrix(n, b)
    paths = numpy.empty((len(times), n))
    for i, t in enumerate(times):
        m = walk[i] - t * w1 + t * target
        ev = numpy.linalg.eigvalsh((m + m.conj().T) / 2.0)
        gaps = numpy.diff(ev)
        if gaps.size and gaps.min() < GAP_FLOOR:
            raise NonIntersectViolation(
                f'paths {int(numpy.argmin(gaps))} and {int(numpy.argmin(gaps)) + 1} '
                f'collide at t={t} (gap {gaps.min():.3e})')
        paths[i] = ev
    return BridgeEnsemble(b=float(b), n=n, times=times, paths=paths, seed=int(seed),
                          replica=int(replica))


def _batch_chunk(args):
    b, n, times, seed, lo, hi = args
    return [simulate(b, n, times, seed, r) for r in range(lo, hi)]


def simulate_batch(b, n, times, seed, reps, jobs=1):
    """Replicas 0..reps-1; results do not depend on ``jobs``."""
    jobs = (os.cpu_count() or 1) if jobs is None else max(1, int(jobs))
    if jobs == 1 or reps < 2 * jobs:
        return _batch_chunk((b, n, times, seed, 0, reps))
    bounds = numpy.linspace(0, reps, jobs + 1).astype(int)
    tasks = [(b, n, times, seed, lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return [e for chunk in pool.map(_batch_chunk, tasks) for e in chunk]


def mapped_a(b, t):
    """Source strength b sqrt(t/(1-t)) of the rescaled time-t slice."""
    return b * numpy.sqrt(t / (1.0 - t))


def critical_time(b):
    """Splitting time 1/(1 + b^2)."""
    if not b > 0:
        raise ValueError(f'b must be positive, got {b}')
    return 1.0 / (1.0 + b * b)


def support_count_transition(b, tol=1e-6):
    """
    Time at which the support of the mapped ensemble splits, by bisection
    on the number of support intervals.
    """
    count = lambda t: support(float(mapped_a(b, t))).count
    # bracket between the times at which the mapped a equals 1/4 and 4
    at = lambda a: a * a / (a * a + b * b)
    lo, hi = at(0.25), at(4.0)
    if count(lo) != 1 or count(hi) != 2:
        raise ValueError('no support split found in (0, 1)')
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if count(mid) == 1:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
