"""Backend selection for the hot kernels.

The default backend compiles the block loops with numba. Setting
``SIMPLEXMAP_BACKEND=numpy`` (or running without numba installed) routes every
kernel through the vectorized numpy path instead. ``SIMPLEXMAP_THREADS`` caps
the numba thread pool.
"""
import contextlib
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def _from_env():
    name = os.environ.get("SIMPLEXMAP_BACKEND", "").strip().lower()
    if not name:
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in BACKENDS:
        raise ValueError(f"SIMPLEXMAP_BACKEND must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("SIMPLEXMAP_BACKEND=numba but numba is not importable")
    return name


_active = _from_env()

if HAVE_NUMBA and not os.environ.get("NUMBA_THREADING_LAYER"):
    # the bundled TBB is often too old and numba warns on every first launch
    numba.config.THREADING_LAYER = "omp"

if HAVE_NUMBA and os.environ.get("SIMPLEXMAP_THREADS"):
    numba.set_num_threads(
        max(1, min(int(os.environ["SIMPLEXMAP_THREADS"]), numba.config.NUMBA_NUM_THREADS))
    )


def get_backend():
    return _active


def set_backend(name):
    global _active
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("numba is not importable")
    _active = name


@contextlib.contextmanager
def use_backend(name):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def njit(func=None, **kwargs):
    """``numba.njit(cache=True)`` when numba is present, identity otherwise."""
    kwargs.setdefault("cache", True)

    def wrap(f):
        if not HAVE_NUMBA:
            return f
        return numba.njit(**kwargs)(f)

    return wrap if func is None else wrap(func)
