import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    """Worker cap from ``EQSTAB_THREADS`` (default 1, i.e. serial)."""
    try:
        return max(1, int(os.environ.get("EQSTAB_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    """Map ``fn`` over ``items`` preserving input order."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
