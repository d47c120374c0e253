"""Backend selection: numba-jitted kernels with a pure-numpy/python fallback.

The flag is read once at import. Set MCBALANCE_NUMBA=0 to force the fallback
(useful where numba is unavailable or for debugging); MCBALANCE_NUMBA=1 demands
numba and raises if it cannot be imported. Unset, numba is used when present.

Both backends consume the same np.random.Generator streams, so traces are
bit-identical across backends for a given seed (pinned by tests/test_backends.py).
"""
import os

try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only on numba-less installs
    _numba = None

_env = os.environ.get("MCBALANCE_NUMBA", "").strip().lower()
if _env in ("0", "false", "off", "no"):
    NUMBA_ENABLED = False
elif _env in ("1", "true", "on", "yes"):
    if _numba is None:
        raise RuntimeError("MCBALANCE_NUMBA=1 but numba is not importable")
    NUMBA_ENABLED = True
else:
    NUMBA_ENABLED = _numba is not None


def maybe_jit(func=None, **options):
    """@njit(nopython, nogil) when the numba backend is on; identity otherwise.

    Usable bare (@maybe_jit) or with numba options (@maybe_jit(cache=True)).
    cache=True is only safe for functions without captured-array freevars.
    """
    def wrap(f):
        if not NUMBA_ENABLED:
            return f
        opts = {"nogil": True}
        opts.update(options)
        return _numba.njit(**opts)(f)

    if func is not None:
        return wrap(func)
    return wrap


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
