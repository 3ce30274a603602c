"""numba acceleration with a pure-numpy fallback.

Hot kernels are written in the subset of numpy that numba's nopython mode
understands, so the same source runs compiled or interpreted. Set
``LHVPROBE_DISABLE_JIT=1`` to force the pure-numpy path.
"""

import os

try:
    import numba as _numba
except ImportError:  # pragma: no cover - declared, but the numpy path still works without it
    _numba = None

_FALSY = {"", "0", "false", "no", "off"}

NUMBA_AVAILABLE = _numba is not None
JIT_ENABLED = (
    NUMBA_AVAILABLE
    and os.environ.get("LHVPROBE_DISABLE_JIT", "").strip().lower() in _FALSY
)


class Kernel:
    """A numeric kernel with an interpreted path and, when numba exists, a compiled one.

    Calling the kernel dispatches on ``JIT_ENABLED``; ``.py`` and ``.jit`` are
    exposed for benchmarks and cross-checks.
    """

    def __init__(self, func, fallback=None):
        self.py = func if fallback is None else fallback
        self.jit = _numba.njit(cache=True, nogil=True)(func) if NUMBA_AVAILABLE else None
        self.__name__ = func.__name__
        self.__doc__ = func.__doc__

    @classmethod
    def from_factory(cls, factory, *kernels):
        """Build a kernel whose body calls other kernels.

        ``factory`` receives the component callables and returns the body; it is
        instantiated once with the interpreted components and once with the
        compiled ones.
        """
        obj = cls.__new__(cls)
        obj.py = factory(*(k.py for k in kernels))
        obj.jit = (
            _numba.njit(nogil=True)(factory(*(k.jit for k in kernels)))
            if NUMBA_AVAILABLE
            else None
        )
        obj.__name__ = obj.py.__name__
        obj.__doc__ = obj.py.__doc__
        return obj

    def __call__(self, *args):
        if JIT_ENABLED:
            return self.jit(*args)
        return self.py(*args)


def kernel(func=None, *, fallback=None):
    """Decorator building a :class:`Kernel`; ``fallback`` replaces ``func`` on the numpy path."""
    if func is None:
        return lambda f: Kernel(f, fallback)
    return Kernel(func, fallback)
