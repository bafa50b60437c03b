"""
Command-line front end.

Each subcommand wraps one library operation and writes its data to
``--out`` (``-`` for stdout); diagnostics go to stderr.  Exit status is 0 on
success. Invalid input exits with 2 and numerical failure with 1.
"""

import argparse
import os
import sys

import numpy

from . import __version__
from .errors import NumericalError

__all__ = ['main', 'run', 'build_parser']


class UsageError(ValueError):
    pass


# ==========
# Validators
# ==========

def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f'must be positive, got {text}')
    return value


def _nonneg_float(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f'must be >= 0, got {text}')
    return value


def _even_int(text):
    value = int(text)
    if value < 2 or value % 2:
        raise argparse.ArgumentTypeError(f'must be an even integer >= 2, got {text}')
    return value


def _ladder(text):
    try:
        values = [_even_int(t) for t in text.split(',') if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not values:
        raise argparse.ArgumentTypeError('empty ladder')
    return values


def _times(text):
    """``start:end:count`` to an evenly spaced vector."""
    parts = text.split(':')
    if len(parts) != 3:
        raise argparse.ArgumentTypeError('times must be start:end:count')
    start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1 or not 0.0 < start <= end < 1.0 or (count > 1 and start == end):
        raise argparse.ArgumentTypeError(f'invalid time range {text}')
    return numpy.linspace(start, end, count)


def _grid(args):
    if not args.xmin < args.xmax:
        raise UsageError(f'--xmin must be below --xmax (got {args.xmin}, {args.xmax})')
    if args.points < 2:
        raise UsageError('--points must be at least 2')
    return numpy.linspace(args.xmin, args.xmax, args.points)


def _jobs(args):
    return args.jobs if args.jobs is not None else (os.cpu_count() or 1)


def _note(message):
    print(message, file=sys.stderr)


# ========
# Commands
# ========

def cmd_density(args):
    from .density import density, mass
    from .io import write_csv, write_meta
    x = _grid(args)
    rho = density(x, args.a)
    write_csv(args.out, ['x', 'rho'], zip(x, rho))
    write_meta(args.out, {'a': args.a, 'xmin': args.xmin, 'xmax': args.xmax,
                          'points': args.points})
    _note(f'grid mass (trapezoid) = {float(numpy.trapezoid(rho, x))!r}; '
          f'quadrature mass = {mass(args.a)!r}')


def cmd_branch_points(args):
    from .io import write_json
    from .surface import branch_points
    bd = branch_points(args.a)
    write_json(args.out, {'a': bd.a, 'z1': bd.z1, 'z2': bd.z2, 'q': bd.q, 'p': bd.p,
                          'p0': bd.p0, 'points': list(bd.points)})


def cmd_support(args):
    from .density import support
    from .io import write_json
    sup = support(args.a)
    write_json(args.out, {'a': args.a, 'phase': sup.phase, 'count': sup.count,
                          'intervals': [list(iv) for iv in sup.intervals]})


def cmd_sample(args):
    from .ensemble import EnsembleParams, sample_batch
    from .io import write_csv, write_meta
    params = EnsembleParams(a=args.a, n=args.n)
    values = sample_batch(params, args.seed, args.reps, jobs=_jobs(args), solver=args.solver)
    write_csv(args.out, [f'e{k}' for k in range(args.n)], values)
    write_meta(args.out, {'a': args.a, 'n': args.n, 'seed': args.seed, 'reps': args.reps,
                          'solver': args.solver, 'rng': 'PCG64(SeedSequence(seed, spawn_key=(replica,)))'})


def cmd_kernel(args):
    from .ensemble import EnsembleParams, build_kernel
    from .io import fmt, write_csv, write_meta
    grid = _grid(args)
    km = build_kernel(EnsembleParams(a=args.a, n=args.n), grid, basis=args.basis)
    rows = [[x] + list(row) for x, row in zip(grid, km.values)]
    write_csv(args.out, [''] + [fmt(x) for x in grid], rows)
    write_meta(args.out, km.metadata())


def cmd_bulk_check(args):
    from .io import write_json
    from .scaling import bulk_check
    report = bulk_check(args.a, args.x0, args.n)
    write_json(args.out, _report_dict(report))
    _note(f'sup discrepancies {report.errors}; rate {report.rate_estimate!r}')


def cmd_edge_check(args):
    from .io import write_json
    from .scaling import edge_check
    report = edge_check(args.a, args.n)
    write_json(args.out, _report_dict(report))
    _note(f'sup discrepancies {report.errors}; rate {report.rate_estimate!r}')


def _report_dict(report):
    rows = [{'regime': report.regime, 'a': report.a, 'x0': report.point, 'n': n,
             'sup_product_error': report.product_errors[i],
             'sup_diag_error': report.diag_errors[i], 'rate_estimate': report.rate_estimate}
            for i, n in enumerate(report.ladder)]
    return {'regime': report.regime, 'a': report.a, 'x0': report.point,
            'ladder': report.ladder, 'rate_estimate': report.rate_estimate,
            'monotone_within_25pct': report.monotone(), 'rows': rows, 'extras': report.extras}


def cmd_lambda_check(args):
    from .io import write_json
    from .rh.lambdas import lambda_constants, verify_lambda_jumps
    out = verify_lambda_jumps(args.a, count=args.count)
    consts = lambda_constants(args.a)
    out['constants'] = [consts.ell1, consts.ell2, consts.ell3]
    write_json(args.out, out)
    _note(f"max jump residual {out['max_residual']!r}; "
          f"max loop residual {out['max_loop_residual']!r}")


def cmd_parametrix_check(args):
    from .io import write_json
    from .rh.model import matching_error, p_jump_residuals, removability_coefficient
    errors = [matching_error(args.a, n) for n in args.n]
    ratios = [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]
    jumps = {str(n): p_jump_residuals(args.a, n) for n in args.n}
    write_json(args.out, {'a': args.a, 'ladder': args.n, 'matching_errors': errors,
                          'ratios': ratios, 'jump_residuals': jumps,
                          'removability': [removability_coefficient(args.a, n) for n in args.n]})
    _note(f'matching errors {errors}; ratios {ratios}')


def cmd_level_curves(args):
    from .io import write_csv, write_meta
    from .rh.curves import level_curves
    curves = level_curves(args.a, args.pair, points=args.points)
    rows = [(i, x, y) for i, c in enumerate(curves) for x, y in c]
    write_csv(args.out, ['curve', 'x', 'y'], rows)
    write_meta(args.out, {'a': args.a, 'pair': args.pair, 'points': args.points,
                          'curves': len(curves)})


def cmd_x0(args):
    from .io import write_json
    from .rh.curves import x0
    write_json(args.out, {'a': args.a, 'x0': x0(args.a)})


def cmd_bridges(args):
    from .bridges import critical_time, simulate_batch
    from .io import write_csv, write_meta
    ens = simulate_batch(args.b, args.n, args.times, args.seed, args.reps, jobs=_jobs(args))
    rows = ((e.replica, j, t, e.paths[i, j]) for e in ens
            for i, t in enumerate(e.times) for j in range(e.n))
    write_csv(args.out, ['replica', 'path', 'time', 'position'], rows)
    write_meta(args.out, {'b': args.b, 'n': args.n, 'times': list(args.times),
                          'seed': args.seed, 'reps': args.reps, 't_c': critical_time(args.b)})


# ======
# Parser
# ======

def build_parser():
    parser = argparse.ArgumentParser(prog='extsource', description=__doc__.strip().splitlines()[0])
    parser.add_argument('--version', action='version', version=__version__)
    sub = parser.add_subparsers(dest='command', required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('--out', required=True, help="output path ('-' for stdout)")
        p.set_defaults(func=func)
        return p

    def grid(p, lo=-3.0, hi=3.0, points=601):
        p.add_argument('--xmin', type=float, default=lo)
        p.add_argument('--xmax', type=float, default=hi)
        p.add_argument('--points', type=int, default=points)

    def jobs(p):
        p.add_argument('--jobs', type=int, default=None,
                       help='worker processes (default: available CPUs)')

    p = add('density', cmd_density, 'limiting density on a grid (CSV x,rho)')
    p.add_argument('--a', type=_nonneg_float, required=True)
    grid(p)

    p = add('branch-points', cmd_branch_points, 'branch points of the spectral curve (JSON)')
    p.add_argument('--a', type=_positive_float, required=True)

    p = add('support', cmd_support, 'support intervals of the density (JSON)')
    p.add_argument('--a', type=_nonneg_float, required=True)

    p = add('sample', cmd_sample, 'Monte Carlo eigenvalues, one row per replica (CSV)')
    p.add_argument('--a', type=_nonneg_float, required=True)
    p.add_argument('--n', type=_even_int, required=True)
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--reps', type=int, default=1)
    p.add_argument('--solver', choices=['lapack', 'jacobi'], default='lapack')
    jobs(p)

    p = add('kernel', cmd_kernel, 'finite-n correlation kernel on a grid (CSV matrix)')
    p.add_argument('--a', type=_nonneg_float, required=True)
    p.add_argument('--n', type=_even_int, required=True)
    p.add_argument('--basis', choices=['auto', 'monomial', 'orthonormal'], default='auto')
    grid(p, points=101)

    p = add('bulk-check', cmd_bulk_check, 'sine-kernel universality check (JSON)')
    p.add_argument('--a', type=_positive_float, required=True)
    p.add_argument('--x0', type=float, default=0.0)
    p.add_argument('--n', type=_ladder, default=[32, 64, 128])

    p = add('edge-check', cmd_edge_check, 'Airy-kernel universality check (JSON)')
    p.add_argument('--a', type=_positive_float, required=True)
    p.add_argument('--n', type=_ladder, default=[32, 64, 100, 128])

    p = add('lambda-check', cmd_lambda_check, 'jump relations of the lambda-functions (JSON)')
    p.add_argument('--a', type=_positive_float, required=True)
    p.add_argument('--count', type=int, default=20)

    p = add('parametrix-check', cmd_parametrix_check, 'local parametrix jumps and matching (JSON)')
    p.add_argument('--a', type=_positive_float, required=True)
    p.add_argument('--n', type=_ladder, default=[40, 80, 160])

    p = add('level-curves', cmd_level_curves, 'curves Re lambda_j = Re lambda_k (CSV)')
    p.add_argument('--a', type=_positive_float, required=True)
    p.add_argument('--pair', type=int, choices=[12, 13, 23], default=23)
    p.add_argument('--points', type=int, default=400)

    p = add('x0', cmd_x0, 'real crossing of the lambda_2/lambda_3 level curve (JSON)')
    p.add_argument('--a', type=_positive_float, required=True)

    p = add('bridges', cmd_bridges, 'non-intersecting Brownian bridge paths (CSV)')
    p.add_argument('--b', type=_positive_float, required=True)
    p.add_argument('--n', type=_even_int, required=True)
    p.add_argument('--times', type=_times, required=True, help='start:end:count')
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--reps', type=int, default=1)
    jobs(p)
    return parser


def run(argv=None):
    """Parse ``argv``, dispatch and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    for name in ('reps', 'jobs', 'count'):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            _note(f'error: --{name} must be at least 1')
            return 2
    try:
        args.func(args)
    except NumericalError as exc:
        _note(f'numerical failure: {type(exc).__name__}: {exc}')
        return 1
    except ValueError as exc:
        _note(f'error: {type(exc).__name__}: {exc}')
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
