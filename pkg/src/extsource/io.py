"""CSV and JSON writers with shortest round-trip float formatting."""

import csv
import json
import sys
from contextlib import contextmanager

import numpy

__all__ = ['fmt', 'to_jsonable', 'write_csv', 'write_json', 'write_meta', 'meta_path']


def fmt(value):
    """Shortest decimal string that round-trips the float (ints pass through)."""
    if isinstance(value, (bool, numpy.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, numpy.integer)):
        return str(int(value))
    if isinstance(value, (float, numpy.floating)):
        return repr(float(value))
    return str(value)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, numpy.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, numpy.complexfloating)):
        return {'re': float(obj.real), 'im': float(obj.imag)}
    if isinstance(obj, (bool, numpy.bool_)):
        return bool(obj)
    if isinstance(obj, numpy.integer):
        return int(obj)
    if isinstance(obj, numpy.floating):
        return float(obj)
    return obj


@contextmanager
def _open(path):
    if path == '-':
        yield sys.stdout
    else:
        with open(path, 'w', newline='') as handle:
            yield handle


def write_csv(path, header, rows):
    """Comma-separated file with a header row; ``path='-'`` writes to stdout."""
    with _open(path) as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_json(path, obj):
    """JSON with sorted keys; floats use Python's shortest repr."""
    with _open(path) as handle:
        json.dump(to_jsonable(obj), handle, indent=2, sort_keys=True, allow_nan=True)
        handle.write('\n')


def meta_path(path):
    return f'{path}.meta.json'


def write_meta(path, meta):
    """Sidecar ``<path>.meta.json``; skipped when writing to stdout."""
    if path != '-':
        write_json(meta_path(path), meta)
