import os
from concurrent.futures import ThreadPoolExecutor

WORKERS_ENV = "LCSPERM_WORKERS"


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1


def split_range(start, stop, parts):
    """Split [start, stop) into at most ``parts`` contiguous, near-equal ranges."""
    parts = max(1, min(parts, stop - start)) if stop > start else 1
    bounds = [start + (stop - start) * k // parts for k in range(parts + 1)]
    return [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def triangle_ranges(size, parts):
    """Row ranges of an upper triangle holding roughly equal numbers of entries."""
    if parts <= 1 or size < 2 * parts:
        return [(0, size)]
    total = size * (size + 1) / 2
    bounds = [0]
    acc = 0.0
    for i in range(size):
        acc += size - i
        if acc >= total * len(bounds) / parts and len(bounds) < parts:
            bounds.append(i + 1)
    bounds.append(size)
    return [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def run_ranges(fn, ranges, workers):
    """Call ``fn(start, stop)`` for each range, on threads when workers > 1."""
    if workers <= 1 or len(ranges) == 1:
        return [fn(a, b) for a, b in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))
